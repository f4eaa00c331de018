//! k-local likelihood ratio for single-qubit measurements.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::ensembles::{local_indistinguishability, reduced_average, LocalQuery, StateEnsemble};
use crate::error::{invalid, Result};
use crate::qcore::{CMatrix, C64};
use crate::rng::Stream;

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct KllrOptions {
    /// Position subsets examined; all of them when there are no more than this.
    pub max_subsets: usize,
    /// Rounds of coordinate refinement after the grid search.
    pub refine_rounds: usize,
    /// Monte Carlo samples for ensembles without exact moments.
    pub samples: usize,
}

impl Default for KllrOptions {
    fn default() -> Self {
        Self { max_subsets: 64, refine_rounds: 4, samples: 2000 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct KllrReport {
    pub k: usize,
    pub copies: usize,
    /// Best value found; a lower bound on the true maximum.
    pub value: f64,
    pub lower_bound: bool,
    pub witness_positions: Vec<(usize, usize)>,
    /// Bloch directions of the witness bases.
    pub witness_directions: Vec<[f64; 3]>,
    pub subsets_examined: usize,
    /// Largest trace distance to maximally mixed over the examined subsets.
    pub indistinguishability: f64,
    pub local_bound: f64,
    pub exact: bool,
    pub holds: bool,
}

fn bloch_grid() -> Vec<[f64; 3]> {
    let mut out = Vec::with_capacity(26);
    for a in -1i32..=1 {
        for b in -1i32..=1 {
            for c in -1i32..=1 {
                if (a, b, c) == (0, 0, 0) {
                    continue;
                }
                let norm = ((a * a + b * b + c * c) as f64).sqrt();
                out.push([a as f64 / norm, b as f64 / norm, c as f64 / norm]);
            }
        }
    }
    out
}

fn projector(n: &[f64; 3], sign: f64) -> CMatrix {
    let h = 0.5;
    CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(h * (1.0 + sign * n[2]), 0.0),
            C64::new(h * sign * n[0], -h * sign * n[1]),
            C64::new(h * sign * n[0], h * sign * n[1]),
            C64::new(h * (1.0 - sign * n[2]), 0.0),
        ],
    )
}

/// `2^k Σ_s q(s)² - 1` for the product measurement along `dirs`.
fn score(r: &CMatrix, dirs: &[[f64; 3]]) -> f64 {
    let k = dirs.len();
    let dim = 1usize << k;
    let pairs: Vec<[CMatrix; 2]> = dirs.iter().map(|n| [projector(n, 1.0), projector(n, -1.0)]).collect();
    let mut total = 0.0;
    for s in 0..dim {
        let mut p = CMatrix::identity(1, 1);
        for (i, pr) in pairs.iter().enumerate() {
            p = p.kronecker(&pr[(s >> (k - 1 - i)) & 1]);
        }
        let q = (r * p).trace().re;
        total += q * q;
    }
    dim as f64 * total - 1.0
}

fn from_angles(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

fn to_angles(n: &[f64; 3]) -> (f64, f64) {
    (n[2].clamp(-1.0, 1.0).acos(), n[1].atan2(n[0]))
}

/// Grid search over product bases followed by coordinate refinement.
fn maximize(r: &CMatrix, k: usize, rounds: usize) -> (f64, Vec<[f64; 3]>) {
    let grid = bloch_grid();
    let mut best = (f64::NEG_INFINITY, vec![grid[0]; k]);
    let combos = grid.len().pow(k as u32);
    for c in 0..combos {
        let dirs: Vec<[f64; 3]> = (0..k).map(|i| grid[(c / grid.len().pow((k - 1 - i) as u32)) % grid.len()]).collect();
        let v = score(r, &dirs);
        if v > best.0 + 1e-15 {
            best = (v, dirs);
        }
    }
    let mut step = 0.2;
    for _ in 0..rounds {
        for i in 0..k {
            loop {
                let (theta, phi) = to_angles(&best.1[i]);
                let mut improved = false;
                for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                    let mut dirs = best.1.clone();
                    dirs[i] = from_angles(theta + dt, phi + dp);
                    let v = score(r, &dirs);
                    if v > best.0 + 1e-13 {
                        best = (v, dirs);
                        improved = true;
                    }
                }
                if !improved {
                    break;
                }
            }
        }
        step /= 3.0;
    }
    best
}

fn subsets(total: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, total: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..total {
            cur.push(i);
            rec(i + 1, total, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, total, k, &mut Vec::new(), &mut out);
    out
}

fn binomial_f64(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

/// Maximum over `k`-position subsets of `m` copies and single-qubit product bases of
/// `‖E_ρ D̄_reduced - 1‖²`, alongside the bound from local indistinguishability.
pub fn kllr(ens: &StateEnsemble, m: usize, k: usize, opts: KllrOptions, rng: &mut Stream) -> Result<KllrReport> {
    if ens.register.uniform_dim() != Some(2) {
        return invalid("k-LLR is defined for qubit registers");
    }
    let n = ens.register.num_sites();
    if k == 0 || k > m * n {
        return invalid(format!("k = {k} outside 1..={}", m * n));
    }
    if k > 6 {
        return Err(crate::Error::ResourceCap(format!("k = {k} exceeds the grid-search cap of 6")));
    }
    let positions: Vec<(usize, usize)> = (0..m).flat_map(|c| (0..n).map(move |s| (c, s))).collect();
    let chosen: Vec<Vec<usize>> = if binomial_f64(m * n, k) <= opts.max_subsets as f64 {
        subsets(m * n, k)
    } else {
        let mut seen = std::collections::BTreeSet::new();
        while seen.len() < opts.max_subsets {
            let mut s = sample(rng, m * n, k).into_vec();
            s.sort_unstable();
            seen.insert(s);
        }
        seen.into_iter().collect()
    };
    let mut best = (f64::NEG_INFINITY, Vec::new(), Vec::new());
    let mut eps: f64 = 0.0;
    let mut exact = true;
    for set in &chosen {
        let pos: Vec<(usize, usize)> = set.iter().map(|&i| positions[i]).collect();
        let q = LocalQuery::new(m, pos.clone());
        let (r, _, ex) = reduced_average(ens, &q, opts.samples, rng)?;
        exact &= ex;
        let dist = local_indistinguishability(ens, &q, opts.samples, rng)?;
        eps = eps.max(dist.value);
        let (v, dirs) = maximize(&r, k, opts.refine_rounds);
        if v > best.0 {
            best = (v, pos, dirs);
        }
    }
    let local_bound = eps * eps * 4f64.powi(k as i32);
    let value = best.0.max(0.0);
    Ok(KllrReport {
        k,
        copies: m,
        value,
        lower_bound: true,
        witness_positions: best.1,
        witness_directions: best.2,
        subsets_examined: chosen.len(),
        indistinguishability: eps,
        local_bound,
        exact,
        holds: value <= local_bound * (1.0 + 1e-9) + 1e-12,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::QuditRegister;
    use crate::rng::stream;

    #[test]
    fn extremes() {
        let reg = QuditRegister::qubits(2).unwrap();
        let mut rng = stream(1, &[]);
        let mm = kllr(&StateEnsemble::maximally_mixed(reg.clone()), 2, 1, KllrOptions::default(), &mut rng).unwrap();
        assert!(mm.value.abs() < 1e-14);
        let z = kllr(&StateEnsemble::zero_state(reg), 1, 1, KllrOptions::default(), &mut rng).unwrap();
        assert!((z.value - 1.0).abs() < 1e-12);
        assert!(z.holds);
    }

    #[test]
    fn haar_pairs_respect_local_bound() {
        let reg = QuditRegister::qubits(2).unwrap();
        let r = kllr(&StateEnsemble::haar(reg), 2, 2, KllrOptions::default(), &mut stream(2, &[])).unwrap();
        assert!(r.exact && r.holds);
        assert!(r.value > 0.0);
    }
}
