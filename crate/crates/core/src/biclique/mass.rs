use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;

use super::grid::LocalPlanGrid;
use super::instance::BicliqueInstance;
use crate::error::{invalid, Error, Result};
use crate::haar::{centered_moment_operator, gamma, haar_sample};
use crate::haar::rational::to_f64;
use crate::qcore::{CMatrix, CVector, Permutation, C64};

/// Largest `|W|` accepted by the exact Fourier-mass routines.
pub const MAX_MASS_POSITIONS: usize = 5;
const MAX_ENUMERATION: usize = 1 << 20;

/// Validate a position set and return its `κ`-power exponent `2|supp W| + 2|∪ W_ℓ|`.
fn kappa_exponent(inst: &BicliqueInstance, plan: &LocalPlanGrid, w: &[(usize, usize)]) -> Result<i32> {
    if plan.m != inst.m || plan.n != inst.n || plan.d != inst.d {
        return invalid("plan grid does not match the instance");
    }
    if w.len() > MAX_MASS_POSITIONS {
        return Err(Error::ResourceCap(format!("|W| = {} exceeds {MAX_MASS_POSITIONS}", w.len())));
    }
    let distinct: BTreeSet<_> = w.iter().collect();
    if distinct.len() != w.len() {
        return invalid("repeated position in W");
    }
    if let Some(&(c, s)) = w.iter().find(|&&(c, s)| c >= inst.m || s >= inst.n) {
        return invalid(format!("position ({c},{s}) outside the {}x{} grid", inst.m, inst.n));
    }
    let copies: BTreeSet<_> = w.iter().map(|p| p.0).collect();
    let sites: BTreeSet<_> = w.iter().map(|p| p.1).collect();
    Ok(2 * (copies.len() + sites.len()) as i32)
}

fn enumeration_size(d: usize, t: usize) -> Result<usize> {
    d.checked_pow(t as u32)
        .filter(|&v| v <= MAX_ENUMERATION)
        .ok_or_else(|| Error::ResourceCap(format!("{d}^{t} readouts exceed {MAX_ENUMERATION}")))
}

fn digits(mut x: usize, d: usize, t: usize) -> Vec<usize> {
    let mut out = vec![0; t];
    for slot in out.iter_mut().rev() {
        *slot = x % d;
        x /= d;
    }
    out
}

/// `μ_W = κ^{2|supp W| + 2|∪W_ℓ|} E_x[⟨ψ_x|E(dΔ)^{⊗W}|ψ_x⟩²]` with the centered
/// moment written as `Σ_π γ_{fix π} P_π`, and `⟨ψ_x|P_π|ψ_x⟩ = Π_a ⟨v_a|v_{π(a)}⟩`.
pub fn fourier_mass(inst: &BicliqueInstance, plan: &LocalPlanGrid, w: &[(usize, usize)]) -> Result<f64> {
    let exponent = kappa_exponent(inst, plan, w)?;
    let t = w.len();
    if t == 0 {
        return Ok(0.0);
    }
    let d = inst.d;
    let total = enumeration_size(d, t)?;
    let gammas: Vec<f64> = (0..=t).map(|f| to_f64(&gamma(d as u64, t as u64, f as u64))).collect();
    let perms: Vec<(Vec<usize>, f64)> = Permutation::all(t)
        .into_iter()
        .map(|p| (p.images().to_vec(), gammas[p.fixed_points()]))
        .filter(|(_, g)| *g != 0.0)
        .collect();
    let mut acc = 0.0;
    let mut gram = vec![C64::new(0.0, 0.0); t * t];
    for x in 0..total {
        let xs = digits(x, d, t);
        let cols: Vec<CVector> = w.iter().zip(&xs).map(|(&(c, s), &xa)| plan.basis(c, s).column(xa).into_owned()).collect();
        for a in 0..t {
            for b in 0..t {
                gram[a * t + b] = cols[a].dotc(&cols[b]);
            }
        }
        let val: C64 = perms
            .iter()
            .map(|(img, g)| img.iter().enumerate().fold(C64::new(*g, 0.0), |p, (a, &b)| p * gram[a * t + b]))
            .sum();
        acc += val.re * val.re;
    }
    Ok(inst.kappa().powi(exponent) * acc / total as f64)
}

/// Same quantity from the explicit centered moment operator.
pub fn fourier_mass_operator(inst: &BicliqueInstance, plan: &LocalPlanGrid, w: &[(usize, usize)]) -> Result<f64> {
    let exponent = kappa_exponent(inst, plan, w)?;
    let t = w.len();
    if t == 0 {
        return Ok(0.0);
    }
    let d = inst.d;
    let total = enumeration_size(d, t)?;
    let g: CMatrix = centered_moment_operator(d, t)?.matrix;
    let mut acc = 0.0;
    for x in 0..total {
        let xs = digits(x, d, t);
        let psi = w
            .iter()
            .zip(&xs)
            .fold(CVector::from_element(1, C64::new(1.0, 0.0)), |v, (&(c, s), &xa)| {
                v.kronecker(&plan.basis(c, s).column(xa).into_owned())
            });
        let val = psi.dotc(&(&g * &psi)).re;
        acc += val * val;
    }
    Ok(inst.kappa().powi(exponent) * acc / total as f64)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct MassEstimate {
    pub value: f64,
    pub stderr: f64,
    pub pairs: usize,
}

/// Monte Carlo over independent Haar pairs `(ρ, ρ')` of
/// `κ^{...} Π_{(i,j)∈W} E_x[⟨ψ_x|dΔ|ψ_x⟩⟨ψ_x|dΔ'|ψ_x⟩]`.
pub fn fourier_mass_monte_carlo<R: Rng + ?Sized>(
    inst: &BicliqueInstance,
    plan: &LocalPlanGrid,
    w: &[(usize, usize)],
    pairs: usize,
    rng: &mut R,
) -> Result<MassEstimate> {
    let exponent = kappa_exponent(inst, plan, w)?;
    if pairs < 2 {
        return invalid("Monte Carlo oracle needs at least two pairs");
    }
    let d = inst.d;
    let scale = inst.kappa().powi(exponent);
    let (mut s1, mut s2) = (0.0, 0.0);
    for _ in 0..pairs {
        let a = haar_sample(d, rng)?;
        let b = haar_sample(d, rng)?;
        let mut prod = 1.0;
        for &(c, s) in w {
            let basis = plan.basis(c, s);
            let mut cij = 0.0;
            for x in 0..d {
                let v = basis.column(x);
                let fa = d as f64 * v.dotc(a.amplitudes()).norm_sqr() - 1.0;
                let fb = d as f64 * v.dotc(b.amplitudes()).norm_sqr() - 1.0;
                cij += fa * fb;
            }
            prod *= cij / d as f64;
        }
        let v = scale * prod;
        s1 += v;
        s2 += v * v;
    }
    let n = pairs as f64;
    let mean = s1 / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(MassEstimate { value: mean, stderr: (var / n).sqrt(), pairs })
}

/// `Σ_{1 ≤ |W| ≤ k} μ_W` over every position set of the grid.
pub fn fourier_mass_total(inst: &BicliqueInstance, plan: &LocalPlanGrid, k: usize) -> Result<f64> {
    let cells: Vec<(usize, usize)> = (0..inst.m).flat_map(|c| (0..inst.n).map(move |s| (c, s))).collect();
    let k = k.min(cells.len()).min(MAX_MASS_POSITIONS);
    let mut total = 0.0;
    let mut chosen = Vec::with_capacity(k);
    fn rec(
        cells: &[(usize, usize)],
        start: usize,
        k: usize,
        chosen: &mut Vec<(usize, usize)>,
        f: &mut dyn FnMut(&[(usize, usize)]) -> Result<()>,
    ) -> Result<()> {
        if !chosen.is_empty() {
            f(chosen)?;
        }
        if chosen.len() == k {
            return Ok(());
        }
        for i in start..cells.len() {
            chosen.push(cells[i]);
            rec(cells, i + 1, k, chosen, f)?;
            chosen.pop();
        }
        Ok(())
    }
    rec(&cells, 0, k, &mut chosen, &mut |w| {
        total += fourier_mass(inst, plan, w)?;
        Ok(())
    })?;
    Ok(total)
}

fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

/// `Σ_{t=1}^{k} Σ_{s=1}^{k} C(m,t) C(n,s) κ^{2s+2t} (C k³/√d)^t`.
pub fn low_degree_mass_budget(inst: &BicliqueInstance, k: usize, constant: f64) -> f64 {
    let kappa = inst.kappa();
    let base = constant * (k as f64).powi(3) / (inst.d as f64).sqrt();
    let mut total = 0.0;
    for t in 1..=k {
        for s in 1..=k {
            total += binomial(inst.m, t) * binomial(inst.n, s) * kappa.powi(2 * (s + t) as i32) * base.powi(t as i32);
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn inst(kappa_n: f64) -> BicliqueInstance {
        BicliqueInstance::new(2, 2, kappa_n, 2).unwrap()
    }

    #[test]
    fn single_position_vanishes() {
        let i = inst(1.0);
        let plan = LocalPlanGrid::random(2, 2, 2, &mut stream(1, &[]));
        assert_eq!(fourier_mass(&i, &plan, &[(0, 1)]).unwrap(), 0.0);
    }

    #[test]
    fn permutation_form_matches_operator() {
        let mut rng = stream(2, &[]);
        for d in [2, 3] {
            let i = BicliqueInstance::new(3, d, 1.5, 2).unwrap();
            let plan = LocalPlanGrid::random(2, 3, d, &mut rng);
            for w in [vec![(0, 0), (0, 1)], vec![(0, 0), (1, 0), (1, 2)], vec![(0, 0), (0, 1), (1, 1), (1, 2)]] {
                let a = fourier_mass(&i, &plan, &w).unwrap();
                let b = fourier_mass_operator(&i, &plan, &w).unwrap();
                assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()), "d={d} w={w:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn kappa_scaling_is_exact_power() {
        let plan = LocalPlanGrid::computational(2, 2, 2);
        let w = [(0, 0), (1, 1)];
        let a = fourier_mass(&inst(0.5), &plan, &w).unwrap();
        let b = fourier_mass(&inst(1.0), &plan, &w).unwrap();
        // 2|supp| + 2|∪| = 2·2 + 2·2
        assert!((b / a - 2f64.powi(8)).abs() < 1e-9);
    }

    #[test]
    fn relabeling_invariance() {
        let plan = LocalPlanGrid::computational(2, 2, 2);
        let i = inst(1.0);
        let a = fourier_mass(&i, &plan, &[(0, 0), (1, 1)]).unwrap();
        let b = fourier_mass(&i, &plan, &[(1, 0), (0, 1)]).unwrap();
        let c = fourier_mass(&i, &plan, &[(1, 1), (0, 0)]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn matches_monte_carlo() {
        let i = BicliqueInstance::new(2, 2, 1.0, 2).unwrap();
        let plan = LocalPlanGrid::computational(2, 2, 2);
        let w = [(0, 0), (0, 1)];
        let exact = fourier_mass(&i, &plan, &w).unwrap();
        let mc = fourier_mass_monte_carlo(&i, &plan, &w, 100_000, &mut stream(4, &[])).unwrap();
        assert!((exact - mc.value).abs() < 3.0 * mc.stderr, "{exact} vs {mc:?}");
    }

    #[test]
    fn tiny_instance_within_budget() {
        let mut rng = stream(6, &[]);
        for lambda in [0.5, 1.0, 1.5, 2.0] {
            let inst = BicliqueInstance::new(2, 2, lambda, 2).unwrap();
            for plan in [LocalPlanGrid::for_instance(&inst), LocalPlanGrid::random(2, 2, 2, &mut rng)] {
                let total = fourier_mass_total(&inst, &plan, 2).unwrap();
                assert!(total <= low_degree_mass_budget(&inst, 2, 8.0), "λ={lambda}");
                assert!(total <= low_degree_mass_budget(&inst, 2, 1.0), "λ={lambda}");
            }
        }
    }

    #[test]
    fn budget_properties() {
        assert_eq!(low_degree_mass_budget(&BicliqueInstance::new(4, 2, 0.0, 4).unwrap(), 2, 1.0), 0.0);
        let a = low_degree_mass_budget(&BicliqueInstance::new(8, 2, 1.0, 8).unwrap(), 2, 1.0);
        let b = low_degree_mass_budget(&BicliqueInstance::new(8, 2, 2.0, 8).unwrap(), 2, 1.0);
        let c = low_degree_mass_budget(&BicliqueInstance::new(8, 3, 2.0, 8).unwrap(), 2, 1.0);
        assert!(a < b && c < b);
    }
}
