use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::haar::{haar_state, moment_operator};
use crate::qcore::{tensor_power, CMatrix, DensityOperator, PureState, QuditRegister};
use crate::rng::Stream;

/// A state drawn from an ensemble.
#[derive(Clone, Debug)]
pub enum Sample {
    Pure(PureState),
    Mixed(DensityOperator),
}

impl Sample {
    pub fn density(&self) -> DensityOperator {
        match self {
            Sample::Pure(p) => p.density(),
            Sample::Mixed(r) => r.clone(),
        }
    }

    pub fn register(&self) -> &QuditRegister {
        match self {
            Sample::Pure(p) => p.register(),
            Sample::Mixed(r) => r.register(),
        }
    }

    pub fn is_pure(&self) -> bool {
        matches!(self, Sample::Pure(_))
    }
}

type Sampler = Arc<dyn Fn(&mut Stream) -> Result<Sample> + Send + Sync>;
type MomentFn = Arc<dyn Fn(usize) -> Result<CMatrix> + Send + Sync>;

/// Distribution over states on a fixed register.
#[derive(Clone)]
pub struct StateEnsemble {
    pub name: String,
    pub register: QuditRegister,
    pub parameters: Vec<(String, String)>,
    sampler: Sampler,
    support: Option<Arc<Vec<(f64, Sample)>>>,
    exact_moment: Option<MomentFn>,
}

impl fmt::Debug for StateEnsemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StateEnsemble")
            .field("name", &self.name)
            .field("register", &self.register)
            .field("parameters", &self.parameters)
            .field("finite_support", &self.support.as_ref().map(|s| s.len()))
            .field("exact_moment", &self.exact_moment.is_some())
            .finish()
    }
}

impl StateEnsemble {
    pub fn from_sampler<F>(name: impl Into<String>, register: QuditRegister, sampler: F) -> Self
    where
        F: Fn(&mut Stream) -> Result<Sample> + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            register,
            parameters: Vec::new(),
            sampler: Arc::new(sampler),
            support: None,
            exact_moment: None,
        }
    }

    /// Finite ensemble with the given weights (normalized here).
    pub fn finite(name: impl Into<String>, register: QuditRegister, states: Vec<(f64, Sample)>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidArgument("empty ensemble".into()));
        }
        if states.iter().any(|(_, s)| s.register() != &register) {
            return Err(Error::Dimension("ensemble member on a different register".into()));
        }
        let total: f64 = states.iter().map(|(w, _)| *w).sum();
        if !(total > 0.0) || states.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::InvalidArgument("weights must be nonnegative with positive sum".into()));
        }
        let states: Vec<(f64, Sample)> = states.into_iter().map(|(w, s)| (w / total, s)).collect();
        let support = Arc::new(states);
        let cdf_src = support.clone();
        let sampler = move |rng: &mut Stream| {
            let w: Vec<f64> = cdf_src.iter().map(|(w, _)| *w).collect();
            let i = crate::qcore::sample_outcome(&w, rng);
            Ok(cdf_src[i].1.clone())
        };
        Ok(Self {
            name: name.into(),
            register,
            parameters: Vec::new(),
            sampler: Arc::new(sampler),
            support: Some(support),
            exact_moment: None,
        })
    }

    pub fn uniform(name: impl Into<String>, register: QuditRegister, states: Vec<Sample>) -> Result<Self> {
        Self::finite(name, register, states.into_iter().map(|s| (1.0, s)).collect())
    }

    pub fn point(name: impl Into<String>, state: Sample) -> Result<Self> {
        let reg = state.register().clone();
        Self::uniform(name, reg, vec![state])
    }

    pub fn maximally_mixed(register: QuditRegister) -> Self {
        let rho = DensityOperator::maximally_mixed(register.clone());
        Self::point("maximally-mixed", Sample::Mixed(rho)).expect("single state")
    }

    pub fn zero_state(register: QuditRegister) -> Self {
        let psi = PureState::basis(register, 0).expect("index 0 exists");
        Self::point("zero-state", Sample::Pure(psi)).expect("single state")
    }

    /// Haar-random pure states on `register`, with exact moments.
    pub fn haar(register: QuditRegister) -> Self {
        let dim = register.total_dim();
        let reg = register.clone();
        Self::from_sampler("haar", register, move |rng| Ok(Sample::Pure(haar_state(&reg, rng))))
            .with_exact_moment(move |k| Ok(moment_operator(dim, k)?.matrix))
            .with_param("dim", dim)
    }

    pub fn with_exact_moment<F>(mut self, f: F) -> Self
    where
        F: Fn(usize) -> Result<CMatrix> + Send + Sync + 'static,
    {
        self.exact_moment = Some(Arc::new(f));
        self
    }

    pub fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.parameters.push((key.to_string(), value.to_string()));
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn sample(&self, rng: &mut Stream) -> Result<Sample> {
        (self.sampler)(rng)
    }

    pub fn support(&self) -> Option<&[(f64, Sample)]> {
        self.support.as_deref().map(|v| v.as_slice())
    }

    pub fn has_exact_moment(&self) -> bool {
        self.exact_moment.is_some()
    }

    /// `E ρ^{⊗k}` from a closed form when available.
    pub fn exact_moment(&self, k: usize) -> Option<Result<CMatrix>> {
        self.exact_moment.as_ref().map(|f| f(k))
    }

    /// `E ρ^{⊗k}` exactly, from the closed form or by averaging the finite support.
    pub fn exact_moment_any(&self, k: usize) -> Option<Result<CMatrix>> {
        if let Some(m) = self.exact_moment(k) {
            return Some(m);
        }
        let support = self.support()?;
        Some((|| {
            let mut acc: Option<CMatrix> = None;
            for (w, s) in support {
                let p = tensor_power(&s.density(), k)?.into_matrix() * crate::qcore::C64::new(*w, 0.0);
                acc = Some(match acc {
                    Some(a) => a + p,
                    None => p,
                });
            }
            Ok(acc.expect("nonempty support"))
        })())
    }

    pub fn is_exact(&self) -> bool {
        self.exact_moment.is_some() || self.support.is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn haar_first_moment_is_flat() {
        let reg = QuditRegister::qubits(1).unwrap();
        let e = StateEnsemble::haar(reg);
        let m = e.exact_moment(1).unwrap().unwrap();
        assert!((m - CMatrix::identity(2, 2) * crate::qcore::C64::new(0.5, 0.0)).camax() < 1e-15);
        let s = e.sample(&mut stream(1, &[])).unwrap();
        assert!(s.is_pure());
    }

    #[test]
    fn finite_weights_normalize() {
        let reg = QuditRegister::qubits(1).unwrap();
        let a = Sample::Pure(PureState::basis(reg.clone(), 0).unwrap());
        let b = Sample::Pure(PureState::basis(reg.clone(), 1).unwrap());
        let e = StateEnsemble::finite("two", reg, vec![(3.0, a), (1.0, b)]).unwrap();
        let m = e.exact_moment_any(1).unwrap().unwrap();
        assert!((m[(0, 0)].re - 0.75).abs() < 1e-15);
    }
}
