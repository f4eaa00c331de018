use nalgebra::SymmetricEigen;
use serde::Serialize;

use super::ensemble::StateEnsemble;
use crate::error::{invalid, Error, Result};
use crate::haar::rational::{binomial, to_f64};
use crate::qcore::perm::checked_power;
use crate::qcore::{permute_index, tensor_power, CMatrix, Permutation, C64};
use crate::rng::{chunked, Stream, CHUNKS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum MomentMode {
    Exact,
    MonteCarlo { samples: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct DesignReport {
    pub ensemble: String,
    pub k: usize,
    /// Smallest ε with (1-ε)M ⪯ M_Haar ⪯ (1+ε)M on the symmetric subspace; infinite when M is singular there.
    pub epsilon: f64,
    pub exact: bool,
    pub samples: usize,
    /// Largest entrywise standard error of the empirical moment (0 in exact mode).
    pub sampling_error: f64,
    /// Extremes of the eigenvalues of M relative to the Haar value on the symmetric subspace.
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// Weight of M outside the symmetric subspace.
    pub leakage: f64,
    pub non_psd: bool,
}

/// Orthonormal basis of the symmetric subspace of `(C^dim)^{⊗k}`, as columns.
pub fn symmetric_basis(dim: usize, k: usize) -> Result<CMatrix> {
    let total = checked_power(dim, k)?;
    let perms = Permutation::all(k);
    let mut proj = CMatrix::zeros(total, total);
    let w = C64::new(1.0 / perms.len() as f64, 0.0);
    for p in &perms {
        for i in 0..total {
            proj[(permute_index(dim, p, i), i)] += w;
        }
    }
    let eig = SymmetricEigen::new(proj);
    let cols: Vec<usize> = (0..total).filter(|&i| eig.eigenvalues[i] > 0.5).collect();
    let mut basis = CMatrix::zeros(total, cols.len());
    for (j, &c) in cols.iter().enumerate() {
        basis.set_column(j, &eig.eigenvectors.column(c));
    }
    Ok(basis)
}

/// Empirical `E ρ^{⊗k}` and the largest entrywise standard error.
pub fn monte_carlo_moment(ens: &StateEnsemble, k: usize, samples: usize, rng: &mut Stream) -> Result<(CMatrix, f64)> {
    if samples == 0 {
        return invalid("Monte Carlo moment needs at least one sample");
    }
    let total = checked_power(ens.register.total_dim(), k)?;
    let parts = chunked(rng, samples, CHUNKS, |r, count| -> Result<(CMatrix, nalgebra::DMatrix<f64>)> {
        let mut sum = CMatrix::zeros(total, total);
        let mut sq = nalgebra::DMatrix::<f64>::zeros(total, total);
        for _ in 0..count {
            let m = tensor_power(&ens.sample(r)?.density(), k)?.into_matrix();
            sq += m.map(|z| z.norm_sqr());
            sum += m;
        }
        Ok((sum, sq))
    });
    let mut sum = CMatrix::zeros(total, total);
    let mut sq = nalgebra::DMatrix::<f64>::zeros(total, total);
    for p in parts {
        let (a, b) = p?;
        sum += a;
        sq += b;
    }
    let n = samples as f64;
    let mean = sum / C64::new(n, 0.0);
    let mut worst: f64 = 0.0;
    for (z, s2) in mean.iter().zip(sq.iter()) {
        let var = (s2 / n - z.norm_sqr()).max(0.0);
        worst = worst.max((var / n).sqrt());
    }
    Ok((mean, worst))
}

pub fn design_certify(ens: &StateEnsemble, k: usize, mode: MomentMode, rng: &mut Stream) -> Result<DesignReport> {
    if k == 0 {
        return invalid("design order must be positive");
    }
    let dim = ens.register.total_dim();
    let (m, exact, samples, err) = match mode {
        MomentMode::Exact => {
            let m = ens
                .exact_moment_any(k)
                .ok_or_else(|| Error::InvalidArgument(format!("ensemble {} has no exact moments", ens.name)))??;
            (m, true, 0, 0.0)
        }
        MomentMode::MonteCarlo { samples } => {
            let (m, e) = monte_carlo_moment(ens, k, samples, rng)?;
            (m, false, samples, e)
        }
    };
    let basis = symmetric_basis(dim, k)?;
    let haar_val = 1.0 / to_f64(&num_rational::BigRational::from_integer(binomial((dim + k - 1) as u64, k as u64)));
    let restricted = basis.adjoint() * &m * &basis;
    let restricted = (&restricted + restricted.adjoint()) * C64::new(0.5, 0.0);
    let mu = crate::qcore::state::hermitian_eigenvalues(&restricted);
    let mu_min = mu.iter().cloned().fold(f64::INFINITY, f64::min);
    let mu_max = mu.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let in_sym: f64 = restricted.trace().re;
    let leakage = (m.trace().re - in_sym).max(0.0);
    let full_min = crate::qcore::state::hermitian_eigenvalues(&m).iter().cloned().fold(f64::INFINITY, f64::min);
    let epsilon = if mu_min <= 1e-14 {
        f64::INFINITY
    } else {
        (haar_val / mu_min - 1.0).max(1.0 - haar_val / mu_max).max(0.0)
    };
    Ok(DesignReport {
        ensemble: ens.name.clone(),
        k,
        epsilon,
        exact,
        samples,
        sampling_error: err,
        ratio_min: mu_min / haar_val,
        ratio_max: mu_max / haar_val,
        leakage,
        non_psd: full_min < crate::qcore::state::EIG_ERROR,
    })
}
