use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::rational::{beta, factorial, gamma, rising, to_f64};
use crate::error::{invalid, Error, Result};
use crate::qcore::perm::checked_power;
use crate::qcore::{permute_index, CMatrix, Permutation, QuditRegister, C64};

/// `E (|ψ⟩⟨ψ|)^{⊗k}` or a centered variant, on `k` sites of dimension `d`.
#[derive(Clone, Debug)]
pub struct MomentOperator {
    pub d: usize,
    pub order: usize,
    pub matrix: CMatrix,
}

impl MomentOperator {
    pub fn register(&self) -> Result<QuditRegister> {
        QuditRegister::uniform(self.order, self.d)
    }
}

fn add_permutation(m: &mut CMatrix, d: usize, p: &Permutation, coef: f64) {
    for i in 0..m.nrows() {
        m[(permute_index(d, p, i), i)] += C64::new(coef, 0.0);
    }
}

/// Haar moment operator `Σ_π P_π / (d (d+1) ... (d+k-1))`.
pub fn moment_operator(d: usize, k: usize) -> Result<MomentOperator> {
    if d < 2 || k == 0 {
        return invalid(format!("moment operator needs d >= 2 and k >= 1 (got d={d}, k={k})"));
    }
    let dim = checked_power(d, k)?;
    let coef = to_f64(&BigRational::new(BigInt::one(), rising(d as u64, k as u64)));
    let mut m = CMatrix::zeros(dim, dim);
    for p in Permutation::all(k) {
        add_permutation(&mut m, d, &p, coef);
    }
    Ok(MomentOperator { d, order: k, matrix: m })
}

/// Exact trace of the moment operator, `Σ_π d^{#cycles(π)} / (d ... (d+k-1))`.
pub fn moment_trace_exact(d: usize, k: usize) -> BigRational {
    let num = Permutation::all(k)
        .iter()
        .fold(BigInt::zero(), |acc, p| acc + BigInt::from(d).pow(p.num_cycles() as u32));
    BigRational::new(num, rising(d as u64, k as u64))
}

/// `E Π_l |⟨ψ|l⟩|^{2 λ_l} = Π λ_l! / (d (d+1) ... (d+k-1))` with `k = Σ λ_l ≤ d`.
pub fn mixed_overlap_moment(d: usize, lambda: &[usize]) -> Result<BigRational> {
    let k: usize = lambda.iter().sum();
    if lambda.len() > d {
        return invalid(format!("{} basis vectors for dimension {d}", lambda.len()));
    }
    if k > d {
        return invalid(format!("total power {k} exceeds dimension {d}"));
    }
    let num = lambda.iter().fold(BigInt::one(), |acc, &l| acc * factorial(l as u64));
    Ok(BigRational::new(num, rising(d as u64, k as u64)))
}

/// `E (d ρ - I)^{⊗t} = Σ_π γ_{fix(π)} P_π` for Haar pure `ρ`.
pub fn centered_moment_operator(d: usize, t: usize) -> Result<MomentOperator> {
    let dim = checked_power(d, t)?;
    let gammas: Vec<f64> = (0..=t).map(|f| to_f64(&gamma(d as u64, t as u64, f as u64))).collect();
    let mut m = CMatrix::zeros(dim, dim);
    for p in Permutation::all(t) {
        add_permutation(&mut m, d, &p, gammas[p.fixed_points()]);
    }
    Ok(MomentOperator { d, order: t, matrix: m })
}

/// Same operator assembled by inclusion-exclusion over the subset of positions
/// carrying `dρ`: `Σ_U (-1)^{t-|U|} β_{d,|U|} Σ_{π ∈ S_U} P_π`.
pub fn centered_moment_operator_subset_form(d: usize, t: usize) -> Result<MomentOperator> {
    let dim = checked_power(d, t)?;
    let mut m = CMatrix::zeros(dim, dim);
    for mask in 0usize..(1 << t) {
        let u: Vec<usize> = (0..t).filter(|&i| mask >> i & 1 == 1).collect();
        let sign = if (t - u.len()) % 2 == 0 { 1.0 } else { -1.0 };
        let coef = sign * to_f64(&beta(d as u64, u.len() as u64));
        for sub in Permutation::all(u.len()) {
            let mut images: Vec<usize> = (0..t).collect();
            for (a, &pos) in u.iter().enumerate() {
                images[pos] = u[sub.image(a)];
            }
            add_permutation(&mut m, d, &Permutation::new(images)?, coef);
        }
    }
    Ok(MomentOperator { d, order: t, matrix: m })
}

/// Frozen constant `C` in `|γ_f| ≤ (C t / √d)^f`. The largest ratio observed
/// for `d ≥ 64`, `t ≤ 6` is just under 0.5.
pub const GAMMA_CONSTANT: f64 = 1.0;

#[derive(Clone, Debug, Serialize)]
pub struct GammaBoundRow {
    pub f: usize,
    pub gamma_abs: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Compare `|γ_f|` against `(C t / √d)^f` exactly, plus `|γ_0| = β_{d,t}`.
pub fn gamma_bound_check(d: usize, t: usize, c: f64) -> (Vec<GammaBoundRow>, bool) {
    let mut rows = Vec::new();
    let mut all = true;
    for f in 0..=t {
        let g = gamma(d as u64, t as u64, f as u64);
        let g_abs = if g < BigRational::zero() { -g.clone() } else { g.clone() };
        let ga = to_f64(&g_abs);
        let bound = (c * t as f64 / (d as f64).sqrt()).powi(f as i32);
        // Compare |γ|² d^f ≤ (C t)^{2f} in exact arithmetic when C is rational enough.
        let holds = exact_le(&g_abs, c, t, d, f) && (f != 0 || g_abs == beta(d as u64, t as u64));
        all &= holds;
        rows.push(GammaBoundRow { f, gamma_abs: ga, bound, holds });
    }
    (rows, all)
}

fn exact_le(g_abs: &BigRational, c: f64, t: usize, d: usize, f: usize) -> bool {
    let scale = 1_000_000i64;
    let c_num = (c * scale as f64).round() as i64;
    let ct = BigRational::new(BigInt::from(c_num) * BigInt::from(t), BigInt::from(scale));
    let lhs = g_abs * g_abs * BigRational::from_integer(BigInt::from(d).pow(f as u32));
    let rhs = num_traits::pow::pow(ct, 2 * f);
    lhs <= rhs
}

/// Outcome of the fixed-point-free overlap check.
#[derive(Clone, Debug, Serialize)]
pub struct DerangementCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `E_x |⟨ψ_x|P_π|ψ_x⟩|² ≤ d^{-|W|/2}` for a derangement `π` over positions
/// with bases `bases[w]` (columns are the basis vectors), by full enumeration.
pub fn derangement_overlap_check(bases: &[CMatrix], perm: &Permutation) -> Result<DerangementCheck> {
    let t = perm.len();
    if bases.len() != t {
        return Err(Error::Dimension(format!("{} bases for permutation on {t}", bases.len())));
    }
    if !perm.is_derangement() {
        return invalid("permutation has fixed points");
    }
    let d = bases[0].nrows();
    let total = checked_power(d, t)?;
    let inv = perm.inverse();
    let mut acc = 0.0;
    for idx in 0..total {
        let mut x = vec![0; t];
        let mut r = idx;
        for k in (0..t).rev() {
            x[k] = r % d;
            r /= d;
        }
        let mut prod = C64::new(1.0, 0.0);
        for k in 0..t {
            let src = inv.image(k);
            prod *= bases[k].column(x[k]).dotc(&bases[src].column(x[src]));
        }
        acc += prod.norm_sqr();
    }
    let lhs = acc / total as f64;
    let rhs = (d as f64).powf(-(t as f64) / 2.0);
    Ok(DerangementCheck { lhs, rhs, holds: lhs <= rhs * (1.0 + 1e-12) })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeriesCheck {
    pub d: u64,
    pub s: u64,
    pub order: u64,
    pub error: f64,
    pub next_term: f64,
    pub coefficient_bounds_hold: bool,
    pub holds: bool,
}

/// Truncate the expansion of `β_{d,s}` in `1/d` after `order` terms and compare
/// the error with the first omitted term; also checks `|c_a(s)| ≤ (1+s)^{2a}`.
pub fn beta_series_check(d: u64, s: u64, order: u64) -> SeriesCheck {
    use super::rational::beta_series_coefficient;
    let dq = BigRational::from_integer(BigInt::from(d));
    let mut partial = BigRational::zero();
    let mut coef_ok = true;
    for a in 0..=order {
        let c = beta_series_coefficient(s, a);
        coef_ok &= c_abs_le(&c, s, a);
        partial += c / num_traits::pow::pow(dq.clone(), a as usize);
    }
    let next_c = beta_series_coefficient(s, order + 1);
    coef_ok &= c_abs_le(&next_c, s, order + 1);
    let next = next_c / num_traits::pow::pow(dq, (order + 1) as usize);
    let err = beta(d, s) - partial;
    let err_abs = if err < BigRational::zero() { -err } else { err };
    let next_abs = if next < BigRational::zero() { -next } else { next };
    let holds = err_abs < BigRational::from_integer(BigInt::from(2)) * &next_abs || err_abs.is_zero();
    SeriesCheck {
        d,
        s,
        order,
        error: to_f64(&err_abs),
        next_term: to_f64(&next_abs),
        coefficient_bounds_hold: coef_ok,
        holds: holds && coef_ok,
    }
}

fn c_abs_le(c: &BigRational, s: u64, a: u64) -> bool {
    let c_abs = if *c < BigRational::zero() { -c.clone() } else { c.clone() };
    c_abs <= BigRational::from_integer(BigInt::from(1 + s).pow((2 * a) as u32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::rational::ratio;

    #[test]
    fn trace_is_exactly_one() {
        for d in 2..6 {
            for k in 1..5 {
                assert_eq!(moment_trace_exact(d, k), BigRational::one(), "d={d} k={k}");
            }
        }
    }

    #[test]
    fn first_moment_is_maximally_mixed() {
        let m = moment_operator(3, 1).unwrap();
        assert!((m.matrix - CMatrix::identity(3, 3) / C64::new(3.0, 0.0)).camax() < 1e-15);
    }

    #[test]
    fn overlap_moment_examples() {
        assert_eq!(mixed_overlap_moment(2, &[1, 1]).unwrap(), ratio(1, 6));
        assert_eq!(mixed_overlap_moment(4, &[2]).unwrap(), ratio(2, 20));
        assert!(mixed_overlap_moment(2, &[3]).is_err());
    }

    #[test]
    fn two_copy_centered_closed_form() {
        for d in 2..5 {
            let c = centered_moment_operator(d, 2).unwrap().matrix;
            let swap = crate::qcore::permutation_operator(d, &Permutation::new(vec![1, 0]).unwrap()).unwrap();
            let id = CMatrix::identity(d * d, d * d);
            let expect = (&id + swap) * C64::new(d as f64 / (d as f64 + 1.0), 0.0) - id;
            assert!((c - expect).camax() < 1e-13);
        }
    }

    #[test]
    fn subset_form_matches() {
        for (d, t) in [(2, 3), (3, 3), (2, 4)] {
            let a = centered_moment_operator(d, t).unwrap().matrix;
            let b = centered_moment_operator_subset_form(d, t).unwrap().matrix;
            assert!((a - b).camax() < 1e-12);
        }
    }

    #[test]
    fn swap_on_computational_pair() {
        let id = CMatrix::identity(2, 2);
        let r = derangement_overlap_check(&[id.clone(), id], &Permutation::new(vec![1, 0]).unwrap()).unwrap();
        assert!((r.lhs - 0.5).abs() < 1e-15);
        assert!(r.holds);
    }

    #[test]
    fn series_truncation() {
        for s in 1..5 {
            for order in 0..4 {
                assert!(beta_series_check(16, s, order).holds, "s={s} order={order}");
            }
        }
    }

    #[test]
    fn gamma_bound_with_frozen_constant() {
        for d in [64, 128, 256] {
            for t in 1..=6 {
                assert!(gamma_bound_check(d, t, GAMMA_CONSTANT).1, "d={d} t={t}");
            }
        }
    }
}
