use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::engine::{compute, copy_transforms, Mode};
use super::fourier::{enumerate_indices, FourierIndex, IndexFilter, DEFAULT_INDEX_BUDGET};
use super::plan::MeasurementPlan;
use crate::ensembles::StateEnsemble;
use crate::error::{invalid, Result};
use crate::qcore::{DensityOperator, C64};
use crate::rng::{chunked, Stream, CHUNKS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DegreeSpec {
    Plain { k: usize },
    CopyWise { #[serde(rename = "D")] d: usize, k: usize },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub positions: Vec<(usize, usize)>,
    pub exponents: Vec<usize>,
    pub value_sq: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdvantageReport {
    pub degree: DegreeSpec,
    pub total: f64,
    pub coefficients: Vec<CoefficientEntry>,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub stderr: Option<f64>,
    /// Named auxiliary quantities (bounds, alternative projections).
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub extras: BTreeMap<String, f64>,
}

impl AdvantageReport {
    pub(crate) fn assemble(degree: DegreeSpec, indices: &[FourierIndex], values: &[C64], stderr: &[f64], mode: Mode) -> Self {
        let coefficients: Vec<CoefficientEntry> = indices
            .iter()
            .zip(values)
            .map(|(i, v)| CoefficientEntry { positions: i.positions.clone(), exponents: i.exponents.clone(), value_sq: v.norm_sqr() })
            .collect();
        let total = coefficients.iter().map(|c| c.value_sq).sum();
        let (samples, err) = match mode {
            Mode::MonteCarlo { samples } => {
                let var: f64 = values.iter().zip(stderr).map(|(v, s)| (2.0 * v.norm() * s).powi(2)).sum();
                (Some(samples), Some(var.sqrt()))
            }
            _ => (None, None),
        };
        Self { degree, total, coefficients, method: mode.tag().into(), samples, stderr: err, extras: BTreeMap::new() }
    }

    /// Sum of squared coefficients of indices with at most `k` positions.
    pub fn total_up_to(&self, k: usize) -> f64 {
        self.coefficients.iter().filter(|c| c.positions.len() <= k).map(|c| c.value_sq).sum()
    }
}

pub fn fourier_coefficient(ens: &StateEnsemble, plan: &MeasurementPlan, index: &FourierIndex, mode: Mode, rng: &mut Stream) -> Result<C64> {
    if index.is_empty() {
        return Ok(C64::new(1.0, 0.0));
    }
    let d = plan.local_dim();
    for (&(c, s), &e) in index.positions.iter().zip(&index.exponents) {
        if c >= plan.copies() || s >= plan.sites() || e == 0 || e >= d {
            return invalid(format!("index entry ({c},{s})^{e} out of range"));
        }
    }
    Ok(compute(ens, plan, std::slice::from_ref(index), mode, rng)?.values[0])
}

pub fn advantage_with_filter(
    ens: &StateEnsemble,
    plan: &MeasurementPlan,
    filter: IndexFilter,
    degree: DegreeSpec,
    mode: Mode,
    rng: &mut Stream,
) -> Result<AdvantageReport> {
    let indices = enumerate_indices(plan.copies(), plan.sites(), plan.local_dim(), filter, DEFAULT_INDEX_BUDGET)?;
    let c = compute(ens, plan, &indices, mode, rng)?;
    Ok(AdvantageReport::assemble(degree, &indices, &c.values, &c.stderr, mode))
}

/// Squared degree-`k` advantage.
pub fn degree_advantage(ens: &StateEnsemble, plan: &MeasurementPlan, k: usize, mode: Mode, rng: &mut Stream) -> Result<AdvantageReport> {
    advantage_with_filter(ens, plan, IndexFilter::degree(k), DegreeSpec::Plain { k }, mode, rng)
}

/// Squared copy-wise degree-`(D, k)` advantage with the Hölder upper bound in
/// `extras["holder_bound"]`.
pub fn copywise_advantage(
    ens: &StateEnsemble,
    plan: &MeasurementPlan,
    d_per_copy: usize,
    k: usize,
    mode: Mode,
    rng: &mut Stream,
) -> Result<AdvantageReport> {
    let mut r = advantage_with_filter(ens, plan, IndexFilter::copywise(d_per_copy, k), DegreeSpec::CopyWise { d: d_per_copy, k }, mode, rng)?;
    let pairs = match mode {
        Mode::MonteCarlo { samples } => PairMode::MonteCarlo { pairs: samples },
        _ if ens.support().is_some() => PairMode::Exact,
        _ => PairMode::MonteCarlo { pairs: 4096 },
    };
    let h = holder_bound(ens, plan, Some(d_per_copy), k, pairs, rng)?;
    r.extras.insert("holder_bound".into(), h.value);
    r.extras.insert("holder_exact".into(), if h.exact { 1.0 } else { 0.0 });
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum PairMode {
    /// Enumerate all pairs of a finite ensemble.
    Exact,
    MonteCarlo { pairs: usize },
}

#[derive(Clone, Debug, Serialize)]
pub struct PairEstimate {
    pub value: f64,
    pub stderr: f64,
    pub exact: bool,
}

/// `⟨D̄_ρ^{≤D}, D̄_{ρ'}^{≤D}⟩ - 1` for one copy, from the per-copy transforms.
fn truncated_inner(a: &[C64], b: &[C64], d: usize, sites: usize, trunc: Option<usize>) -> f64 {
    let mut acc = 0.0;
    for alpha in 1..a.len() {
        if let Some(lim) = trunc {
            let weight = super::fourier::digits(d, sites, alpha).iter().filter(|&&x| x != 0).count();
            if weight > lim {
                continue;
            }
        }
        acc += (a[alpha].conj() * b[alpha]).re;
    }
    acc
}

/// Expectation over independent pairs of `f(transforms(ρ), transforms(ρ'))`.
fn pair_expectation<F>(ens: &StateEnsemble, plan: &MeasurementPlan, mode: PairMode, rng: &mut Stream, f: F) -> Result<(Vec<f64>, Vec<f64>, bool)>
where
    F: Fn(&[Vec<C64>], &[Vec<C64>]) -> Vec<f64> + Sync,
{
    match mode {
        PairMode::Exact => {
            let support = ens
                .support()
                .ok_or_else(|| crate::Error::InvalidArgument(format!("ensemble {} has no finite support", ens.name)))?;
            let ts: Vec<(f64, Vec<Vec<C64>>)> =
                support.iter().map(|(w, s)| Ok((*w, copy_transforms(plan, &s.density())?))).collect::<Result<_>>()?;
            let mut acc: Vec<f64> = Vec::new();
            for (wa, ta) in &ts {
                for (wb, tb) in &ts {
                    let v = f(ta, tb);
                    if acc.is_empty() {
                        acc = vec![0.0; v.len()];
                    }
                    for (a, x) in acc.iter_mut().zip(v) {
                        *a += wa * wb * x;
                    }
                }
            }
            let n = acc.len();
            Ok((acc, vec![0.0; n], true))
        }
        PairMode::MonteCarlo { pairs } => {
            if pairs == 0 {
                return invalid("pair estimate needs samples");
            }
            let parts = chunked(rng, pairs, CHUNKS, |r, count| -> Result<(Vec<f64>, Vec<f64>)> {
                let mut s: Vec<f64> = Vec::new();
                let mut q: Vec<f64> = Vec::new();
                for _ in 0..count {
                    let a = copy_transforms(plan, &ens.sample(r)?.density())?;
                    let b = copy_transforms(plan, &ens.sample(r)?.density())?;
                    let v = f(&a, &b);
                    if s.is_empty() {
                        s = vec![0.0; v.len()];
                        q = vec![0.0; v.len()];
                    }
                    for (j, x) in v.into_iter().enumerate() {
                        s[j] += x;
                        q[j] += x * x;
                    }
                }
                Ok((s, q))
            });
            let mut s: Vec<f64> = Vec::new();
            let mut q: Vec<f64> = Vec::new();
            for p in parts {
                let (a, b) = p?;
                if a.is_empty() {
                    continue;
                }
                if s.is_empty() {
                    s = vec![0.0; a.len()];
                    q = vec![0.0; a.len()];
                }
                for j in 0..a.len() {
                    s[j] += a[j];
                    q[j] += b[j];
                }
            }
            let n = pairs as f64;
            let mean: Vec<f64> = s.iter().map(|x| x / n).collect();
            let err = mean.iter().zip(&q).map(|(m, q)| ((q / n - m * m).max(0.0) / n).sqrt()).collect();
            Ok((mean, err, false))
        }
    }
}

/// `Σ_{B ⊆ [m], 1 ≤ |B| ≤ k} Π_{i∈B} (E|c_i|^{|B|})^{1/|B|}` with
/// `c_i = ⟨D̄_ρ^{≤D}, D̄_{ρ'}^{≤D}⟩ - 1` on copy `i`.
pub fn holder_bound(ens: &StateEnsemble, plan: &MeasurementPlan, trunc: Option<usize>, k: usize, mode: PairMode, rng: &mut Stream) -> Result<PairEstimate> {
    let m = plan.copies();
    let d = plan.local_dim();
    let sites = plan.sites();
    let kk = k.min(m);
    // layout: moments[i * kk + (t-1)] = E|c_i|^t
    let (mom, err, exact) = pair_expectation(ens, plan, mode, rng, |a, b| {
        let mut out = Vec::with_capacity(m * kk);
        for i in 0..m {
            let c = truncated_inner(&a[i], &b[i], d, sites, trunc).abs();
            for t in 1..=kk {
                out.push(c.powi(t as i32));
            }
        }
        out
    })?;
    let mut total = 0.0;
    for t in 1..=kk {
        // elementary symmetric polynomial of degree t in x_i = (E|c_i|^t)^{1/t}
        let xs: Vec<f64> = (0..m).map(|i| mom[i * kk + t - 1].max(0.0).powf(1.0 / t as f64)).collect();
        let mut e = vec![0.0; t + 1];
        e[0] = 1.0;
        for x in xs {
            for j in (1..=t).rev() {
                e[j] += e[j - 1] * x;
            }
        }
        total += e[t];
    }
    let stderr = err.iter().cloned().fold(0.0, f64::max);
    Ok(PairEstimate { value: total, stderr, exact })
}

/// `E_{ρ,ρ'} (⟨D̄_ρ^{≤D}, D̄_{ρ'}^{≤D}⟩ - 1)^k` for the single-copy measurement of
/// `plan`'s first copy; `trunc = None` keeps every degree.
pub fn copy_moment_statistic(ens: &StateEnsemble, plan: &MeasurementPlan, k: usize, trunc: Option<usize>, mode: PairMode, rng: &mut Stream) -> Result<PairEstimate> {
    let d = plan.local_dim();
    let sites = plan.sites();
    let (v, e, exact) = pair_expectation(ens, plan, mode, rng, |a, b| vec![truncated_inner(&a[0], &b[0], d, sites, trunc).powi(k as i32)])?;
    Ok(PairEstimate { value: v[0], stderr: e[0], exact })
}

/// `E_{ρ,ρ'} |⟨D̄_ρ^{≤D}, D̄_{ρ'}^{≤D}⟩ - 1|^t` for the first copy of `plan`.
pub fn abs_copy_moment(ens: &StateEnsemble, plan: &MeasurementPlan, t: usize, trunc: Option<usize>, mode: PairMode, rng: &mut Stream) -> Result<PairEstimate> {
    let d = plan.local_dim();
    let sites = plan.sites();
    let (v, e, exact) = pair_expectation(ens, plan, mode, rng, |a, b| vec![truncated_inner(&a[0], &b[0], d, sites, trunc).abs().powi(t as i32)])?;
    Ok(PairEstimate { value: v[0], stderr: e[0], exact })
}

/// `E_ρ[D̄_ρ(s)^q]` maximized over single-copy outcomes `s` (first copy of `plan`).
pub fn max_ratio_moment(ens: &StateEnsemble, plan: &MeasurementPlan, q: usize, centered: bool, mode: PairMode, rng: &mut Stream) -> Result<PairEstimate> {
    let outcomes = plan.outcomes() as f64;
    let f = |rho: &DensityOperator| -> Result<Vec<f64>> {
        Ok(plan
            .copy_probabilities(rho, 0)?
            .into_iter()
            .map(|p| {
                let r = outcomes * p - if centered { 1.0 } else { 0.0 };
                r.powi(q as i32)
            })
            .collect())
    };
    let (vals, err, exact) = match mode {
        PairMode::Exact => {
            let support = ens
                .support()
                .ok_or_else(|| crate::Error::InvalidArgument(format!("ensemble {} has no finite support", ens.name)))?;
            let mut acc = vec![0.0; plan.outcomes()];
            for (w, s) in support {
                for (a, x) in acc.iter_mut().zip(f(&s.density())?) {
                    *a += w * x;
                }
            }
            let n = acc.len();
            (acc, vec![0.0; n], true)
        }
        PairMode::MonteCarlo { pairs } => {
            let parts = chunked(rng, pairs, CHUNKS, |r, count| -> Result<(Vec<f64>, Vec<f64>)> {
                let mut s = vec![0.0; plan.outcomes()];
                let mut sq = vec![0.0; plan.outcomes()];
                for _ in 0..count {
                    for (j, x) in f(&ens.sample(r)?.density())?.into_iter().enumerate() {
                        s[j] += x;
                        sq[j] += x * x;
                    }
                }
                Ok((s, sq))
            });
            let mut s = vec![0.0; plan.outcomes()];
            let mut sq = vec![0.0; plan.outcomes()];
            for p in parts {
                let (a, b) = p?;
                for j in 0..s.len() {
                    s[j] += a[j];
                    sq[j] += b[j];
                }
            }
            let n = pairs as f64;
            let mean: Vec<f64> = s.iter().map(|x| x / n).collect();
            let err = mean.iter().zip(&sq).map(|(m, q)| ((q / n - m * m).max(0.0) / n).sqrt()).collect();
            (mean, err, false)
        }
    };
    let (j, best) = vals.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (j, &v)| if v > acc.1 { (j, v) } else { acc });
    Ok(PairEstimate { value: best, stderr: err[j], exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::make_stabilizer_ensemble;
    use crate::qcore::QuditRegister;
    use crate::rng::stream;

    #[test]
    fn zero_state_degree_one_is_one() {
        let reg = QuditRegister::qubits(1).unwrap();
        let plan = MeasurementPlan::computational(reg.clone(), 1).unwrap();
        let r = degree_advantage(&StateEnsemble::zero_state(reg), &plan, 1, Mode::Enumeration, &mut stream(0, &[])).unwrap();
        assert!((r.total - 1.0).abs() < 1e-15);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["degree"]["k"], 1);
        assert_eq!(json["method"], "exact-enumeration");
    }

    #[test]
    fn stabilizer_second_copy_moment() {
        let reg = QuditRegister::qubits(1).unwrap();
        let plan = MeasurementPlan::computational(reg, 1).unwrap();
        let stab = make_stabilizer_ensemble(1).unwrap();
        let v = copy_moment_statistic(&stab, &plan, 2, None, PairMode::Exact, &mut stream(0, &[])).unwrap();
        assert!((v.value - 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn copywise_full_equals_full_degree() {
        let mut rng = stream(4, &[]);
        let reg = QuditRegister::qubits(2).unwrap();
        let plan = MeasurementPlan::random_local(reg.clone(), 2, &mut rng).unwrap();
        let ens = make_stabilizer_ensemble(2).unwrap();
        let full = degree_advantage(&ens, &plan, 4, Mode::Enumeration, &mut rng).unwrap();
        let cw = copywise_advantage(&ens, &plan, 2, 2, Mode::Enumeration, &mut rng).unwrap();
        assert!((full.total - cw.total).abs() < 1e-10);
        assert!(cw.total <= cw.extras["holder_bound"] + 1e-12);
    }
}
