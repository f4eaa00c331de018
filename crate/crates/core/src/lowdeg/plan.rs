use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::haar::haar_unitary;
use crate::qcore::{CMatrix, DensityOperator, OutcomeRecord, ProjectiveMeasurement, QuditRegister};
use crate::rng::Stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Locality {
    Local,
    BoundedDepth { depth: usize, dimension: usize },
    General,
}

/// Nonadaptive plan: one measurement per copy on the register followed by
/// `ancilla` extra sites prepared in `|0⟩`.
#[derive(Clone, Debug)]
pub struct MeasurementPlan {
    pub register: QuditRegister,
    pub ancilla: usize,
    pub measurements: Vec<ProjectiveMeasurement>,
    pub locality: Locality,
    isometries: Vec<CMatrix>,
}

/// Rows of `U` with the ancilla digits equal to zero: `V = (I ⊗ ⟨0|) U`.
fn isometry(u: &CMatrix, sys_dim: usize, anc_dim: usize) -> CMatrix {
    CMatrix::from_fn(sys_dim, u.ncols(), |r, c| u[(r * anc_dim, c)])
}

impl MeasurementPlan {
    pub fn new(register: QuditRegister, ancilla: usize, measurements: Vec<ProjectiveMeasurement>, locality: Locality) -> Result<Self> {
        if measurements.is_empty() {
            return invalid("plan needs at least one copy");
        }
        let d = register
            .uniform_dim()
            .ok_or_else(|| Error::InvalidArgument("plans need a uniform local dimension".into()))?;
        let ext = QuditRegister::uniform(register.num_sites() + ancilla, d)?;
        for m in &measurements {
            if m.register() != &ext {
                return Err(Error::Dimension("measurement register differs from register plus ancillas".into()));
            }
        }
        let anc_dim = ext.total_dim() / register.total_dim();
        let isometries = measurements.iter().map(|m| isometry(m.rotation(), register.total_dim(), anc_dim)).collect();
        Ok(Self { register, ancilla, measurements, locality, isometries })
    }

    pub fn repeated(register: QuditRegister, meas: ProjectiveMeasurement, copies: usize) -> Result<Self> {
        let locality = if meas.local_bases().is_some() { Locality::Local } else { Locality::General };
        Self::new(register, 0, vec![meas; copies], locality)
    }

    pub fn computational(register: QuditRegister, copies: usize) -> Result<Self> {
        let meas = ProjectiveMeasurement::computational(register.clone());
        Self::repeated(register, meas, copies)
    }

    /// Independent Haar single-site bases on every copy and site.
    pub fn random_local(register: QuditRegister, copies: usize, rng: &mut Stream) -> Result<Self> {
        let ms = (0..copies)
            .map(|_| {
                let sites = register.local_dims().iter().map(|&d| haar_unitary(d, rng)).collect();
                ProjectiveMeasurement::product(register.clone(), sites, "random-local")
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(register, 0, ms, Locality::Local)
    }

    /// Independent Haar global bases on register plus ancillas.
    pub fn random_global(register: QuditRegister, copies: usize, ancilla: usize, rng: &mut Stream) -> Result<Self> {
        let d = register.dim(0);
        let ext = QuditRegister::uniform(register.num_sites() + ancilla, d)?;
        let ms = (0..copies)
            .map(|_| ProjectiveMeasurement::new(ext.clone(), haar_unitary(ext.total_dim(), rng), "random-global"))
            .collect::<Result<Vec<_>>>()?;
        Self::new(register, ancilla, ms, Locality::General)
    }

    pub fn copies(&self) -> usize {
        self.measurements.len()
    }

    pub fn local_dim(&self) -> usize {
        self.register.dim(0)
    }

    /// Sites per copy including ancillas.
    pub fn sites(&self) -> usize {
        self.register.num_sites() + self.ancilla
    }

    /// Outcomes per copy.
    pub fn outcomes(&self) -> usize {
        self.measurements[0].num_outcomes()
    }

    pub fn isometry(&self, copy: usize) -> &CMatrix {
        &self.isometries[copy]
    }

    /// Outcome distribution of copy `copy` for state `rho`.
    pub fn copy_probabilities(&self, rho: &DensityOperator, copy: usize) -> Result<Vec<f64>> {
        if rho.register() != &self.register {
            return Err(Error::Dimension("state register differs from plan register".into()));
        }
        crate::qcore::measure::born_from_matrix(rho.matrix(), &self.isometries[copy])
    }
}

/// `Π_i D · p_ρ(s_i)`: ratio of the outcome probability under `ρ^{⊗m}` to the uniform null.
pub fn likelihood_ratio(rho: &DensityOperator, plan: &MeasurementPlan, history: &OutcomeRecord) -> Result<f64> {
    if history.rows != plan.copies() || history.cols != plan.sites() {
        return Err(Error::Dimension(format!(
            "history is {}x{}, plan needs {}x{}",
            history.rows,
            history.cols,
            plan.copies(),
            plan.sites()
        )));
    }
    let d = plan.local_dim();
    let outcomes = plan.outcomes() as f64;
    let mut ratio = 1.0;
    for i in 0..plan.copies() {
        let p = plan.copy_probabilities(rho, i)?;
        let s = history.row(i).iter().fold(0, |acc, &x| acc * d + x);
        ratio *= outcomes * p[s];
    }
    Ok(ratio)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::PureState;

    #[test]
    fn ratio_examples() {
        let reg = QuditRegister::qubits(1).unwrap();
        let plan = MeasurementPlan::computational(reg.clone(), 1).unwrap();
        let zero = PureState::basis(reg.clone(), 0).unwrap().density();
        let mut h = OutcomeRecord::zeros(1, 1, 2);
        assert!((likelihood_ratio(&zero, &plan, &h).unwrap() - 2.0).abs() < 1e-15);
        h.set(0, 0, 1);
        assert!(likelihood_ratio(&zero, &plan, &h).unwrap().abs() < 1e-15);
        let mm = DensityOperator::maximally_mixed(reg);
        assert!((likelihood_ratio(&mm, &plan, &h).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn ancilla_isometry_rows() {
        let reg = QuditRegister::qubits(1).unwrap();
        let mut rng = crate::rng::stream(5, &[]);
        let plan = MeasurementPlan::random_global(reg.clone(), 1, 1, &mut rng).unwrap();
        let v = plan.isometry(0);
        assert_eq!((v.nrows(), v.ncols()), (2, 4));
        let mm = DensityOperator::maximally_mixed(reg);
        let p = plan.copy_probabilities(&mm, 0).unwrap();
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
