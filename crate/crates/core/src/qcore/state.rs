use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::register::QuditRegister;
use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub(crate) const HERM_TOL: f64 = 1e-9;
/// Eigenvalues below this are an error.
pub const EIG_ERROR: f64 = -1e-8;
/// Eigenvalues in `[EIG_ERROR, EIG_CLIP)` are silently treated as zero.
pub const EIG_CLIP: f64 = -1e-12;

#[derive(Clone, Debug)]
pub struct PureState {
    register: QuditRegister,
    amps: CVector,
}

impl PureState {
    /// Normalizes `amps`; fails on a zero vector or a length mismatch.
    pub fn new(register: QuditRegister, amps: CVector) -> Result<Self> {
        if amps.len() != register.total_dim() {
            return Err(Error::Dimension(format!(
                "{} amplitudes for dimension {}",
                amps.len(),
                register.total_dim()
            )));
        }
        let norm = amps.norm();
        if !(norm > 0.0) {
            return invalid("zero state vector");
        }
        Ok(Self { register, amps: amps / C64::new(norm, 0.0) })
    }

    pub fn basis(register: QuditRegister, index: usize) -> Result<Self> {
        let dim = register.total_dim();
        if index >= dim {
            return invalid(format!("basis index {index} >= {dim}"));
        }
        let mut v = CVector::zeros(dim);
        v[index] = C64::new(1.0, 0.0);
        Ok(Self { register, amps: v })
    }

    pub fn register(&self) -> &QuditRegister {
        &self.register
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut CVector {
        &mut self.amps
    }

    pub fn density(&self) -> DensityOperator {
        DensityOperator {
            register: self.register.clone(),
            matrix: &self.amps * self.amps.adjoint(),
        }
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let register = self.register.concat(&other.register)?;
        Ok(PureState { register, amps: self.amps.kronecker(&other.amps) })
    }
}

/// Hermitian, unit-trace, positive semidefinite operator.
#[derive(Clone, Debug)]
pub struct DensityOperator {
    register: QuditRegister,
    matrix: CMatrix,
}

impl DensityOperator {
    pub fn new(register: QuditRegister, matrix: CMatrix) -> Result<Self> {
        let dim = register.total_dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::Dimension(format!("{}x{} matrix for dimension {dim}", matrix.nrows(), matrix.ncols())));
        }
        let herm = (&matrix - matrix.adjoint()).camax();
        if herm > HERM_TOL {
            return invalid(format!("matrix not Hermitian (deviation {herm:.3e})"));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > HERM_TOL || tr.im.abs() > HERM_TOL {
            return invalid(format!("trace {tr} differs from 1"));
        }
        let rho = Self { register, matrix };
        let min = rho.eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min < EIG_ERROR {
            return Err(Error::NotPsd(format!("minimum eigenvalue {min:.3e}")));
        }
        Ok(rho)
    }

    pub fn maximally_mixed(register: QuditRegister) -> Self {
        let dim = register.total_dim();
        let matrix = CMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0);
        Self { register, matrix }
    }

    pub fn register(&self) -> &QuditRegister {
        &self.register
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn tensor(&self, other: &DensityOperator) -> Result<DensityOperator> {
        tensor_product(self, other)
    }
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    h.symmetric_eigenvalues().iter().cloned().collect()
}

pub fn tensor_product(a: &DensityOperator, b: &DensityOperator) -> Result<DensityOperator> {
    let register = a.register.concat(&b.register)?;
    Ok(DensityOperator { register, matrix: a.matrix.kronecker(&b.matrix) })
}

pub fn tensor_power(rho: &DensityOperator, copies: usize) -> Result<DensityOperator> {
    if copies == 0 {
        return invalid("tensor power needs at least one copy");
    }
    let register = rho.register.repeat(copies)?;
    let mut m = rho.matrix.clone();
    for _ in 1..copies {
        m = m.kronecker(&rho.matrix);
    }
    Ok(DensityOperator { register, matrix: m })
}

/// Grouping of flat indices for a partial trace: `groups[t][k]` is the full
/// index whose kept digits encode `k` and traced digits encode `t`.
fn trace_groups(register: &QuditRegister, keep: &[usize]) -> (usize, Vec<Vec<usize>>) {
    let n = register.num_sites();
    let mut is_kept = vec![false; n];
    for &s in keep {
        is_kept[s] = true;
    }
    let kept_dim: usize = keep.iter().map(|&s| register.dim(s)).product();
    let traced_dim = register.total_dim() / kept_dim;
    let mut groups = vec![vec![0usize; kept_dim]; traced_dim];
    for full in 0..register.total_dim() {
        let digits = register.digits(full);
        let k = keep.iter().fold(0, |acc, &s| acc * register.dim(s) + digits[s]);
        let t = (0..n).filter(|&s| !is_kept[s]).fold(0, |acc, s| acc * register.dim(s) + digits[s]);
        groups[t][k] = full;
    }
    (kept_dim, groups)
}

/// Reduced operator on the sites in `keep`, in the order given.
pub fn partial_trace_matrix(register: &QuditRegister, m: &CMatrix, keep: &[usize]) -> Result<(QuditRegister, CMatrix)> {
    register.check_sites(keep)?;
    if keep.is_empty() {
        return invalid("partial trace must keep at least one site");
    }
    let reduced = register.select(keep)?;
    let (k, groups) = trace_groups(register, keep);
    let mut out = CMatrix::zeros(k, k);
    for g in &groups {
        for (a, &ia) in g.iter().enumerate() {
            for (b, &ib) in g.iter().enumerate() {
                out[(a, b)] += m[(ia, ib)];
            }
        }
    }
    Ok((reduced, out))
}

pub fn partial_trace(rho: &DensityOperator, keep: &[usize]) -> Result<DensityOperator> {
    let (register, matrix) = partial_trace_matrix(&rho.register, &rho.matrix, keep)?;
    Ok(DensityOperator { register, matrix })
}

/// Half the trace norm of `a - b`.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.register != b.register {
        return Err(Error::Dimension("trace distance between different registers".into()));
    }
    Ok(trace_norm(&(&a.matrix - &b.matrix)) / 2.0)
}

/// Trace norm of a Hermitian matrix.
pub fn trace_norm(h: &CMatrix) -> f64 {
    hermitian_eigenvalues(h).iter().map(|x| x.abs()).sum()
}

/// `U ρ U†`.
pub fn conjugate(rho: &DensityOperator, u: &CMatrix) -> Result<DensityOperator> {
    if u.nrows() != rho.matrix.nrows() {
        return Err(Error::Dimension("unitary size differs from state".into()));
    }
    Ok(DensityOperator { register: rho.register.clone(), matrix: u * &rho.matrix * u.adjoint() })
}

/// `(1-κ)ρ + κ I/D`.
pub fn depolarize_global(rho: &DensityOperator, kappa: f64) -> Result<DensityOperator> {
    check_rate(kappa)?;
    let dim = rho.register.total_dim();
    let mut m = &rho.matrix * C64::new(1.0 - kappa, 0.0);
    for i in 0..dim {
        m[(i, i)] += C64::new(kappa / dim as f64, 0.0);
    }
    Ok(DensityOperator { register: rho.register.clone(), matrix: m })
}

/// Single-site depolarizing channel of rate `kappa` applied to each listed site.
pub fn depolarize_sites(rho: &DensityOperator, sites: &[usize], kappa: f64) -> Result<DensityOperator> {
    check_rate(kappa)?;
    rho.register.check_sites(sites)?;
    let mut m = rho.matrix.clone();
    for &s in sites {
        m = depolarize_one(&rho.register, &m, s, kappa);
    }
    Ok(DensityOperator { register: rho.register.clone(), matrix: m })
}

fn depolarize_one(reg: &QuditRegister, m: &CMatrix, site: usize, kappa: f64) -> CMatrix {
    let d = reg.dim(site);
    let stride = reg.stride(site);
    let dim = reg.total_dim();
    let mut out = m * C64::new(1.0 - kappa, 0.0);
    let w = C64::new(kappa / d as f64, 0.0);
    for i in 0..dim {
        let di = (i / stride) % d;
        let i0 = i - di * stride;
        for j in 0..dim {
            let dj = (j / stride) % d;
            if di != dj {
                continue;
            }
            let j0 = j - dj * stride;
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..d {
                acc += m[(i0 + a * stride, j0 + a * stride)];
            }
            out[(i, j)] += w * acc;
        }
    }
    out
}

fn check_rate(kappa: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&kappa) {
        return invalid(format!("noise rate {kappa} outside [0,1]"));
    }
    Ok(())
}

/// Apply a gate acting on `sites` (in order) to a state vector.
pub fn apply_gate_vector(register: &QuditRegister, v: &mut CVector, sites: &[usize], gate: &CMatrix) -> Result<()> {
    let (k, groups) = gate_groups(register, sites, gate)?;
    let mut buf = CVector::zeros(k);
    for g in &groups {
        for (a, &ia) in g.iter().enumerate() {
            buf[a] = v[ia];
        }
        let out = gate * &buf;
        for (a, &ia) in g.iter().enumerate() {
            v[ia] = out[a];
        }
    }
    Ok(())
}

/// `G ρ G†` for a gate on `sites`.
pub fn apply_gate_density(rho: &DensityOperator, sites: &[usize], gate: &CMatrix) -> Result<DensityOperator> {
    let full = embed_gate(&rho.register, sites, gate)?;
    conjugate(rho, &full)
}

/// The full-register matrix of a gate on `sites`.
pub fn embed_gate(register: &QuditRegister, sites: &[usize], gate: &CMatrix) -> Result<CMatrix> {
    let (_, groups) = gate_groups(register, sites, gate)?;
    let dim = register.total_dim();
    let mut full = CMatrix::zeros(dim, dim);
    for g in &groups {
        for (a, &ia) in g.iter().enumerate() {
            for (b, &ib) in g.iter().enumerate() {
                full[(ia, ib)] = gate[(a, b)];
            }
        }
    }
    Ok(full)
}

fn gate_groups(register: &QuditRegister, sites: &[usize], gate: &CMatrix) -> Result<(usize, Vec<Vec<usize>>)> {
    register.check_sites(sites)?;
    let k: usize = sites.iter().map(|&s| register.dim(s)).product();
    if gate.nrows() != k || gate.ncols() != k {
        return Err(Error::Dimension(format!("gate is {}x{}, sites need {k}", gate.nrows(), gate.ncols())));
    }
    Ok(trace_groups(register, sites))
}

pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    if u.ncols() != n {
        return f64::INFINITY;
    }
    (u.adjoint() * u - CMatrix::identity(n, n)).camax()
}

pub fn check_unitary(u: &CMatrix) -> Result<()> {
    let dev = unitarity_defect(u);
    if dev > 1e-9 {
        return Err(Error::NotUnitary(dev));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell() -> PureState {
        let reg = QuditRegister::qubits(2).unwrap();
        let v = CVector::from_vec(vec![c(1.0), c(0.0), c(0.0), c(1.0)]);
        PureState::new(reg, v).unwrap()
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = bell().density();
        for keep in [[0], [1]] {
            let r = partial_trace(&rho, &keep).unwrap();
            let mm = DensityOperator::maximally_mixed(QuditRegister::qubits(1).unwrap());
            assert!(trace_distance(&r, &mm).unwrap() < 1e-12);
        }
    }

    #[test]
    fn partial_trace_of_product_with_order() {
        let r2 = QuditRegister::new(vec![2]).unwrap();
        let r3 = QuditRegister::new(vec![3]).unwrap();
        let a = PureState::basis(r2, 1).unwrap().density();
        let b = PureState::basis(r3, 2).unwrap().density();
        let ab = tensor_product(&a, &b).unwrap();
        let back = partial_trace(&ab, &[1, 0]).unwrap();
        let ba = tensor_product(&b, &a).unwrap();
        assert!((back.matrix() - ba.matrix()).camax() < 1e-14);
    }

    #[test]
    fn site_depolarizing_full_rate_is_maximally_mixed() {
        let rho = bell().density();
        let out = depolarize_sites(&rho, &[0, 1], 1.0).unwrap();
        let mm = DensityOperator::maximally_mixed(rho.register().clone());
        assert!(trace_distance(&out, &mm).unwrap() < 1e-12);
        let half = depolarize_sites(&rho, &[0], 1.0).unwrap();
        assert!((half.purity() - 0.25).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_operators() {
        let reg = QuditRegister::qubits(1).unwrap();
        let m = CMatrix::from_row_slice(2, 2, &[c(1.5), c(0.0), c(0.0), c(-0.5)]);
        assert!(matches!(DensityOperator::new(reg.clone(), m), Err(Error::NotPsd(_))));
        let m = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.0), c(0.5)]);
        assert!(DensityOperator::new(reg, m).is_err());
        assert!(partial_trace(&bell().density(), &[2]).is_err());
    }

    #[test]
    fn gate_on_second_site_matches_kron() {
        let reg = QuditRegister::qubits(2).unwrap();
        let x = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let full = embed_gate(&reg, &[1], &x).unwrap();
        let expect = CMatrix::identity(2, 2).kronecker(&x);
        assert!((full - expect).camax() < 1e-15);
        let mut v = PureState::basis(reg.clone(), 0).unwrap().amplitudes().clone();
        apply_gate_vector(&reg, &mut v, &[1], &x).unwrap();
        assert!((v[1].re - 1.0).abs() < 1e-15);
    }
}
