use rand::Rng;
use serde::{Deserialize, Serialize};

use super::register::QuditRegister;
use super::state::{check_unitary, CMatrix, DensityOperator, C64, EIG_CLIP, EIG_ERROR};
use crate::error::{Error, Result};

/// Projective measurement `{U|x⟩⟨x|U†}`; outcome `x` has probability `⟨x|U†ρU|x⟩`.
#[derive(Clone, Debug)]
pub struct ProjectiveMeasurement {
    register: QuditRegister,
    rotation: CMatrix,
    local: Option<Vec<CMatrix>>,
    label: String,
}

impl ProjectiveMeasurement {
    pub fn new(register: QuditRegister, rotation: CMatrix, label: impl Into<String>) -> Result<Self> {
        if rotation.nrows() != register.total_dim() {
            return Err(Error::Dimension("rotation size differs from register".into()));
        }
        check_unitary(&rotation)?;
        Ok(Self { register, rotation, local: None, label: label.into() })
    }

    pub fn computational(register: QuditRegister) -> Self {
        let dim = register.total_dim();
        let local = register.local_dims().iter().map(|&d| CMatrix::identity(d, d)).collect();
        Self { register, rotation: CMatrix::identity(dim, dim), local: Some(local), label: "computational".into() }
    }

    /// Product of single-site bases, one unitary per site.
    pub fn product(register: QuditRegister, sites: Vec<CMatrix>, label: impl Into<String>) -> Result<Self> {
        if sites.len() != register.num_sites() {
            return Err(Error::Dimension(format!("{} site bases for {} sites", sites.len(), register.num_sites())));
        }
        let mut rotation = CMatrix::identity(1, 1);
        for (s, u) in sites.iter().enumerate() {
            if u.nrows() != register.dim(s) {
                return Err(Error::Dimension(format!("site {s} basis has size {}", u.nrows())));
            }
            check_unitary(u)?;
            rotation = rotation.kronecker(u);
        }
        Ok(Self { register, rotation, local: Some(sites), label: label.into() })
    }

    pub fn register(&self) -> &QuditRegister {
        &self.register
    }

    pub fn rotation(&self) -> &CMatrix {
        &self.rotation
    }

    /// Per-site bases when the measurement is a product measurement.
    pub fn local_bases(&self) -> Option<&[CMatrix]> {
        self.local.as_deref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn num_outcomes(&self) -> usize {
        self.register.total_dim()
    }
}

/// Born probabilities, clipped and renormalized.
pub fn born_probabilities(rho: &DensityOperator, meas: &ProjectiveMeasurement) -> Result<Vec<f64>> {
    if rho.register() != meas.register() {
        return Err(Error::Dimension("state and measurement registers differ".into()));
    }
    born_from_matrix(rho.matrix(), meas.rotation())
}

pub(crate) fn born_from_matrix(m: &CMatrix, u: &CMatrix) -> Result<Vec<f64>> {
    let mu = m * u;
    let dim = u.ncols();
    let mut p = Vec::with_capacity(dim);
    for x in 0..dim {
        let col = u.column(x);
        let val: C64 = col.iter().zip(mu.column(x).iter()).map(|(a, b)| a.conj() * b).sum();
        p.push(val.re);
    }
    clip_probabilities(p)
}

pub(crate) fn clip_probabilities(mut p: Vec<f64>) -> Result<Vec<f64>> {
    for v in p.iter_mut() {
        if *v < EIG_ERROR {
            return Err(Error::NotPsd(format!("negative probability {v:.3e}")));
        }
        if *v < 0.0 {
            let _ = EIG_CLIP;
            *v = 0.0;
        }
    }
    let total: f64 = p.iter().sum();
    for v in p.iter_mut() {
        *v /= total;
    }
    Ok(p)
}

/// Inverse-CDF draw from a probability vector.
pub fn sample_outcome<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Rectangular table of digits (rows = copies, columns = sites).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub rows: usize,
    pub cols: usize,
    pub base: usize,
    pub digits: Vec<usize>,
}

impl OutcomeRecord {
    pub fn zeros(rows: usize, cols: usize, base: usize) -> Self {
        Self { rows, cols, base, digits: vec![0; rows * cols] }
    }

    pub fn get(&self, row: usize, col: usize) -> usize {
        self.digits[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: usize) {
        self.digits[row * self.cols + col] = v;
    }

    pub fn row(&self, row: usize) -> &[usize] {
        &self.digits[row * self.cols..(row + 1) * self.cols]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::state::PureState;
    use rand::SeedableRng;

    #[test]
    fn hadamard_basis_on_zero_is_uniform() {
        let reg = QuditRegister::qubits(1).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = CMatrix::from_row_slice(2, 2, &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)]);
        let meas = ProjectiveMeasurement::new(reg.clone(), h, "x").unwrap();
        let rho = PureState::basis(reg, 0).unwrap().density();
        let p = born_probabilities(&rho, &meas).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_unitary() {
        let reg = QuditRegister::qubits(1).unwrap();
        let m = CMatrix::from_element(2, 2, C64::new(1.0, 0.0));
        assert!(matches!(ProjectiveMeasurement::new(reg, m, "bad"), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn sampling_follows_probabilities() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = [0.2, 0.0, 0.8];
        let mut counts = [0usize; 3];
        for _ in 0..20000 {
            counts[sample_outcome(&p, &mut rng)] += 1;
        }
        assert_eq!(counts[1], 0);
        assert!((counts[0] as f64 / 20000.0 - 0.2).abs() < 0.015);
    }
}
