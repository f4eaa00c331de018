use serde::Serialize;

use super::circuit::{apply_noisy_circuit_traced, BlockKind, InputState, NoisyCircuitSpec};
use crate::error::{invalid, Result};
use crate::qcore::{partial_trace, trace_norm, CMatrix, C64};
use crate::rng::{chunked, Stream, CHUNKS};

/// `c = (1 + 3(1-κ)²)/4`.
pub fn noise_parameter(kappa: f64) -> f64 {
    (1.0 + 3.0 * (1.0 - kappa).powi(2)) / 4.0
}

/// `c^{nl}(1 - 2^{-n}) + 2^{-n}`.
pub fn purity_bound(n: usize, l: usize, kappa: f64) -> f64 {
    let inv = 0.5f64.powi(n as i32);
    noise_parameter(kappa).powi((n * l) as i32) * (1.0 - inv) + inv
}

/// Haar twirl of `ρ⊗ρ` with purity `p` on dimension `dim`: coefficients `(α, β)`
/// of `α I + β SWAP`.
fn twirl(p: f64, dim: f64) -> (f64, f64) {
    let den = dim * dim - 1.0;
    ((1.0 - p / dim) / den, (p - 1.0 / dim) / den)
}

/// Exact `E tr ρ²` after a Haar block followed (optionally) by single-qubit
/// depolarizing on every qubit, given purity `p` before the block.
pub fn purity_step(p: f64, n: usize, kappa: f64, noisy: bool) -> f64 {
    if !noisy {
        return p;
    }
    let dim = 2f64.powi(n as i32);
    let (alpha, beta) = twirl(p, dim);
    alpha * dim + beta * (4.0 * noise_parameter(kappa)).powi(n as i32)
}

/// Expected purities after each of `l` noisy Haar blocks starting from purity `p0`.
pub fn purity_recursion(n: usize, l: usize, kappa: f64, p0: f64) -> Vec<f64> {
    let mut p = p0;
    (0..l)
        .map(|_| {
            p = purity_step(p, n, kappa, true);
            p
        })
        .collect()
}

/// Exact `E ‖tr_{¬A} ρ' - I/2^a‖₂²` for `ρ'` a Haar block (then optional noise)
/// applied to a state of purity `p`.
pub fn reduced_deviation_exact(p: f64, n: usize, a: usize, kappa: f64, noisy: bool) -> f64 {
    let dim = 2f64.powi(n as i32);
    let da = 2f64.powi(a as i32);
    let db = dim / da;
    let (alpha, beta) = twirl(p, dim);
    let c4 = if noisy { 4.0 * noise_parameter(kappa) } else { 4.0 };
    alpha * da * db * db + beta * c4.powi(a as i32) * 2f64.powi((n - a) as i32) - 1.0 / da
}

/// `2^{a-n}(p - 2^{-n})`, the expression used for the Haar average of the
/// reduced deviation; an upper bound on [`reduced_deviation_exact`].
pub fn reduced_deviation_bound(p: f64, n: usize, a: usize) -> f64 {
    2f64.powi(a as i32 - n as i32) * (p - 0.5f64.powi(n as i32))
}

/// `R(a) = 2^{a-n}[c^{nl}(1 - 2^{-n}) + lε] + ε*`.
pub fn r_bound(a: usize, n: usize, l: usize, kappa: f64, eps: f64, eps_star: f64) -> f64 {
    let inv = 0.5f64.powi(n as i32);
    2f64.powi(a as i32 - n as i32) * (noise_parameter(kappa).powi((n * l) as i32) * (1.0 - inv) + l as f64 * eps)
        + eps_star
}

#[derive(Clone, Debug, Serialize)]
pub struct PurityReport {
    pub n: usize,
    pub l: usize,
    pub kappa: f64,
    pub trials: usize,
    /// Monte Carlo mean purity after each block.
    pub layer_means: Vec<f64>,
    /// Exact Haar expectation after each block.
    pub layer_exact: Vec<f64>,
    pub mean: f64,
    pub stderr: f64,
    pub bound: f64,
    pub pass: bool,
}

/// Purity of `|0̄⟩` after `l` noisy Haar blocks against `c^{nl}(1-2^{-n}) + 2^{-n}`.
pub fn purity_decay_check(n: usize, l: usize, kappa: f64, trials: usize, rng: &mut Stream) -> Result<PurityReport> {
    if trials < 2 || l == 0 {
        return invalid("purity check needs l >= 1 and at least two trials");
    }
    let spec = NoisyCircuitSpec::haar(n, l, kappa, InputState::Zero);
    spec.validate()?;
    let parts = chunked(rng, trials, CHUNKS, |r, count| -> Result<(Vec<f64>, f64)> {
        let mut sums = vec![0.0; l];
        let mut sq = 0.0;
        for _ in 0..count {
            let c = spec.sample(r)?;
            let (_, ps) = apply_noisy_circuit_traced(&c, &c.input(InputState::Zero)?)?;
            for (s, p) in sums.iter_mut().zip(&ps) {
                *s += p;
            }
            sq += ps[l - 1] * ps[l - 1];
        }
        Ok((sums, sq))
    });
    let mut sums = vec![0.0; l];
    let mut sq = 0.0;
    for part in parts {
        let (s, q) = part?;
        sums.iter_mut().zip(&s).for_each(|(a, b)| *a += b);
        sq += q;
    }
    let t = trials as f64;
    let layer_means: Vec<f64> = sums.iter().map(|s| s / t).collect();
    let mean = layer_means[l - 1];
    let var = ((sq / t - mean * mean) * t / (t - 1.0)).max(0.0);
    let stderr = (var / t).sqrt();
    let bound = purity_bound(n, l, kappa);
    Ok(PurityReport {
        n,
        l,
        kappa,
        trials,
        layer_exact: purity_recursion(n, l, kappa, 1.0),
        layer_means,
        mean,
        stderr,
        bound,
        pass: mean <= bound + 3.0 * stderr + 1e-12,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ReducedStateAudit {
    pub sites: Vec<usize>,
    pub trials: usize,
    pub r: f64,
    /// `2^{|A|/2} R^{1/4}`.
    pub threshold: f64,
    /// `R^{1/2}`.
    pub predicted_tail: f64,
    pub exceedance: f64,
    pub exceedance_stderr: f64,
    pub trace_distances: Vec<f64>,
    pub mean_sq_deviation: f64,
    pub mean_sq_stderr: f64,
    /// Exact Haar value of the mean squared deviation (all-Haar specs on `|0̄⟩`).
    pub exact_sq_deviation: Option<f64>,
    pub pass: bool,
}

/// Exceedance frequency of `‖tr_{¬A}ρ - I/2^{|A|}‖₁ ≥ 2^{|A|/2}R^{1/4}` against `R^{1/2}`.
pub fn reduced_state_audit(
    spec: &NoisyCircuitSpec,
    sites: &[usize],
    trials: usize,
    eps: f64,
    eps_star: f64,
    rng: &mut Stream,
) -> Result<ReducedStateAudit> {
    spec.validate()?;
    if trials < 2 {
        return invalid("audit needs at least two trials");
    }
    if spec.blocks.is_empty() {
        return invalid("audit needs at least one block");
    }
    let mut keep = sites.to_vec();
    keep.sort_unstable();
    keep.dedup();
    if keep.is_empty() || keep.len() != sites.len() || keep.iter().any(|&s| s >= spec.n) {
        return invalid(format!("site set {sites:?} is not a nonempty subset of 0..{}", spec.n));
    }
    let a = keep.len();
    let l = spec.blocks.len();
    let noise_layers = spec.noise_after.as_ref().map_or(l, |v| v.len());
    let r = r_bound(a, spec.n, noise_layers, spec.kappa, eps, eps_star);
    let threshold = 2f64.powf(a as f64 / 2.0) * r.powf(0.25);
    let da = 1usize << a;
    let per_trial = chunked(rng, trials, CHUNKS, |rg, count| -> Result<Vec<(f64, f64)>> {
        (0..count)
            .map(|_| {
                let c = spec.sample(rg)?;
                let out = apply_noisy_circuit_traced(&c, &c.input(spec.input)?)?.0;
                let red = partial_trace(&out, &keep)?.into_matrix();
                let diff: CMatrix = red - CMatrix::identity(da, da) * C64::new(1.0 / da as f64, 0.0);
                let hs: f64 = diff.iter().map(|z| z.norm_sqr()).sum();
                Ok((trace_norm(&diff), hs))
            })
            .collect()
    });
    let mut trace_distances = Vec::with_capacity(trials);
    let mut hs = Vec::with_capacity(trials);
    for part in per_trial {
        for (t, h) in part? {
            trace_distances.push(t);
            hs.push(h);
        }
    }
    let t = trials as f64;
    let exceed = trace_distances.iter().filter(|&&x| x >= threshold).count() as f64 / t;
    let exceedance_stderr = (exceed * (1.0 - exceed) / t).sqrt();
    let mean_sq = hs.iter().sum::<f64>() / t;
    let var = hs.iter().map(|h| (h - mean_sq).powi(2)).sum::<f64>() / (t - 1.0);
    let all_haar = spec.blocks.iter().all(|b| *b == BlockKind::Haar) && spec.input == InputState::Zero;
    let exact_sq_deviation = all_haar.then(|| {
        let noisy: Vec<bool> = (0..l).map(|i| spec.noise_after.as_ref().map_or(true, |v| v.contains(&i))).collect();
        let p = noisy[..l - 1].iter().fold(1.0, |p, &nz| purity_step(p, spec.n, spec.kappa, nz));
        reduced_deviation_exact(p, spec.n, a, spec.kappa, noisy[l - 1])
    });
    let predicted_tail = r.sqrt();
    Ok(ReducedStateAudit {
        sites: keep,
        trials,
        r,
        threshold,
        predicted_tail,
        exceedance: exceed,
        exceedance_stderr,
        trace_distances,
        mean_sq_deviation: mean_sq,
        mean_sq_stderr: (var / t).sqrt(),
        exact_sq_deviation,
        pass: exceed <= predicted_tail + 3.0 * exceedance_stderr,
    })
}
