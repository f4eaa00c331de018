use nalgebra::SymmetricEigen;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::ensemble::{Sample, StateEnsemble};
use crate::error::{invalid, Result};
use crate::qcore::{CMatrix, DensityOperator, QuditRegister, C64};
use crate::rng::Stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HamiltonianKind {
    Gue,
    Rsps,
}

/// Pauli string as one letter per qubit: 0 = I, 1 = X, 2 = Y, 3 = Z.
pub type PauliString = Vec<u8>;

#[derive(Clone, Debug)]
pub struct HamiltonianSpec {
    pub kind: HamiltonianKind,
    pub n: usize,
    /// RSPS terms with their signs.
    pub terms: Vec<(PauliString, i8)>,
    pub matrix: CMatrix,
}

/// `H_jj = g/√D`, `H_jk = (g + i g')/√(2D)` for `j < k`.
pub fn sample_gue(n: usize, rng: &mut Stream) -> Result<HamiltonianSpec> {
    let dim = QuditRegister::qubits(n)?.total_dim();
    let scale = (dim as f64).sqrt();
    let mut h = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let g: f64 = rng.sample(StandardNormal);
        h[(j, j)] = C64::new(g / scale, 0.0);
        for k in j + 1..dim {
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            let z = C64::new(a, b) / (2.0 * dim as f64).sqrt();
            h[(j, k)] = z;
            h[(k, j)] = z.conj();
        }
    }
    Ok(HamiltonianSpec { kind: HamiltonianKind::Gue, n, terms: Vec::new(), matrix: h })
}

/// Add `coef · P` to `h`, using `P|x⟩ = phase(x) |x ⊕ flip⟩`.
fn add_pauli(h: &mut CMatrix, p: &[u8], coef: f64) {
    let n = p.len();
    let dim = 1usize << n;
    let mut flip = 0usize;
    for (q, &l) in p.iter().enumerate() {
        if l == 1 || l == 2 {
            flip |= 1 << (n - 1 - q);
        }
    }
    for x in 0..dim {
        let mut phase = C64::new(coef, 0.0);
        for (q, &l) in p.iter().enumerate() {
            let bit = x >> (n - 1 - q) & 1;
            match (l, bit) {
                (2, 0) => phase *= C64::new(0.0, 1.0),
                (2, 1) => phase *= C64::new(0.0, -1.0),
                (3, 1) => phase = -phase,
                _ => {}
            }
        }
        h[(x ^ flip, x)] += phase;
    }
}

pub fn pauli_matrix(p: &[u8]) -> CMatrix {
    let dim = 1 << p.len();
    let mut m = CMatrix::zeros(dim, dim);
    add_pauli(&mut m, p, 1.0);
    m
}

/// `Σ_a r_a P_a / √J` with i.i.d. uniform Pauli strings and signs.
pub fn sample_rsps(n: usize, terms: usize, rng: &mut Stream) -> Result<HamiltonianSpec> {
    if terms == 0 {
        return invalid("RSPS needs at least one term");
    }
    let dim = QuditRegister::qubits(n)?.total_dim();
    let coef = 1.0 / (terms as f64).sqrt();
    let mut h = CMatrix::zeros(dim, dim);
    let mut list = Vec::with_capacity(terms);
    for _ in 0..terms {
        let p: PauliString = (0..n).map(|_| rng.gen_range(0..4u8)).collect();
        let r: i8 = if rng.gen() { 1 } else { -1 };
        add_pauli(&mut h, &p, r as f64 * coef);
        list.push((p, r));
    }
    Ok(HamiltonianSpec { kind: HamiltonianKind::Rsps, n, terms: list, matrix: h })
}

pub fn operator_norm(h: &CMatrix) -> f64 {
    crate::qcore::state::hermitian_eigenvalues(h).iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// `exp(-βH) / tr exp(-βH)` via eigendecomposition.
pub fn gibbs_state(h: &CMatrix, beta: f64) -> Result<DensityOperator> {
    if !beta.is_finite() {
        return invalid("inverse temperature must be finite");
    }
    let dim = h.nrows();
    let n = dim.trailing_zeros() as usize;
    let reg = if dim.is_power_of_two() { QuditRegister::qubits(n)? } else { QuditRegister::new(vec![dim])? };
    let herm = (h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let shift = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &x| a.min(x));
    let w: Vec<f64> = eig.eigenvalues.iter().map(|&e| (-beta * (e - shift)).exp()).collect();
    let z: f64 = w.iter().sum();
    let v = &eig.eigenvectors;
    let mut rho = CMatrix::zeros(dim, dim);
    for (k, wk) in w.iter().enumerate() {
        let col = v.column(k);
        rho += &col * col.adjoint() * C64::new(wk / z, 0.0);
    }
    DensityOperator::new(reg, rho)
}

/// Gibbs states of random Hamiltonians; `terms` is used by RSPS only.
pub fn make_gibbs_ensemble(kind: HamiltonianKind, n: usize, beta: f64, terms: usize) -> Result<StateEnsemble> {
    let reg = QuditRegister::qubits(n)?;
    let name = match kind {
        HamiltonianKind::Gue => "gibbs-gue",
        HamiltonianKind::Rsps => "gibbs-rsps",
    };
    if kind == HamiltonianKind::Rsps && terms == 0 {
        return invalid("RSPS needs at least one term");
    }
    let e = StateEnsemble::from_sampler(name, reg, move |rng| {
        let h = match kind {
            HamiltonianKind::Gue => sample_gue(n, rng)?,
            HamiltonianKind::Rsps => sample_rsps(n, terms, rng)?,
        };
        Ok(Sample::Mixed(gibbs_state(&h.matrix, beta)?))
    })
    .with_param("n", n)
    .with_param("beta", beta);
    Ok(if kind == HamiltonianKind::Rsps { e.with_param("J", terms) } else { e })
}
