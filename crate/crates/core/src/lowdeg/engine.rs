//! Three independent routes to the Fourier coefficients `E_ρ E_s[D̄(s) χ(s)]`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::fourier::{character, digit_transform, digits, FourierIndex};
use super::plan::MeasurementPlan;
use crate::ensembles::StateEnsemble;
use crate::error::{invalid, Error, Result};
use crate::qcore::{partial_trace_matrix, CMatrix, CVector, QuditRegister, C64};
use crate::rng::{chunked, Stream, CHUNKS};

/// Largest history space enumerated exactly.
pub const MAX_HISTORIES: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Mode {
    /// Full enumeration of the joint outcome distribution.
    Enumeration,
    /// Reduced-moment contraction per index.
    Moment,
    MonteCarlo { samples: usize },
}

impl Mode {
    pub fn tag(&self) -> &'static str {
        match self {
            Mode::Enumeration => "exact-enumeration",
            Mode::Moment => "exact-moment",
            Mode::MonteCarlo { .. } => "monte-carlo",
        }
    }
}

/// Coefficients with per-entry standard errors (zero for exact modes).
#[derive(Clone, Debug)]
pub struct Coefficients {
    pub values: Vec<C64>,
    pub stderr: Vec<f64>,
}

pub fn compute(ens: &StateEnsemble, plan: &MeasurementPlan, indices: &[FourierIndex], mode: Mode, rng: &mut Stream) -> Result<Coefficients> {
    check_plan(ens, plan)?;
    let values = match mode {
        Mode::Enumeration => {
            let p = history_distribution(ens, plan)?;
            by_enumeration(&p, plan, indices)
        }
        Mode::Moment => by_moment(ens, plan, indices)?,
        Mode::MonteCarlo { samples } => return by_monte_carlo(ens, plan, indices, samples, rng),
    };
    let stderr = vec![0.0; values.len()];
    Ok(Coefficients { values, stderr })
}

fn check_plan(ens: &StateEnsemble, plan: &MeasurementPlan) -> Result<()> {
    if ens.register != plan.register {
        return Err(Error::Dimension("ensemble and plan registers differ".into()));
    }
    Ok(())
}

/// Joint outcome distribution `E_ρ Π_i p_{ρ,i}(s_i)` over all histories, copy 0 most significant.
pub fn history_distribution(ens: &StateEnsemble, plan: &MeasurementPlan) -> Result<Vec<f64>> {
    check_plan(ens, plan)?;
    let per = plan.outcomes();
    let m = plan.copies();
    let total = per
        .checked_pow(m as u32)
        .filter(|&t| t <= MAX_HISTORIES)
        .ok_or_else(|| Error::ResourceCap(format!("{per}^{m} histories exceed {MAX_HISTORIES}")))?;
    if let Some(support) = ens.support() {
        let mut out = vec![0.0; total];
        for (w, s) in support {
            let rho = s.density();
            let probs: Vec<Vec<f64>> = (0..m).map(|i| plan.copy_probabilities(&rho, i)).collect::<Result<_>>()?;
            for (h, slot) in out.iter_mut().enumerate() {
                let outs = digits(per, m, h);
                *slot += w * outs.iter().enumerate().map(|(i, &x)| probs[i][x]).product::<f64>();
            }
        }
        return Ok(out);
    }
    let moment = ens
        .exact_moment(m)
        .ok_or_else(|| Error::InvalidArgument(format!("ensemble {} has neither finite support nor exact moments", ens.name)))??;
    let mut out = vec![0.0; total];
    for (h, slot) in out.iter_mut().enumerate() {
        let outs = digits(per, m, h);
        let mut phi = CVector::from_element(1, C64::new(1.0, 0.0));
        for (i, &x) in outs.iter().enumerate() {
            phi = phi.kronecker(&plan.isometry(i).column(x).into_owned());
        }
        *slot = phi.dotc(&(&moment * &phi)).re.max(0.0);
    }
    Ok(out)
}

/// Digit position of `(copy, site)` in a flattened history.
fn flat_pairs(plan: &MeasurementPlan, idx: &FourierIndex) -> Vec<(usize, usize)> {
    let sites = plan.sites();
    idx.positions.iter().zip(&idx.exponents).map(|(&(c, s), &e)| (c * sites + s, e)).collect()
}

pub fn by_enumeration(p: &[f64], plan: &MeasurementPlan, indices: &[FourierIndex]) -> Vec<C64> {
    let d = plan.local_dim();
    let len = plan.copies() * plan.sites();
    let hist_digits: Vec<Vec<usize>> = (0..p.len()).map(|h| digits(d, len, h)).collect();
    indices
        .iter()
        .map(|idx| {
            let pairs = flat_pairs(plan, idx);
            p.iter()
                .zip(&hist_digits)
                .map(|(&ph, dg)| character(d, pairs.iter().map(|&(pos, e)| (e, dg[pos]))) * ph)
                .sum()
        })
        .collect()
}

/// Marginal of a per-copy distribution onto `sites` (in increasing order).
fn marginal(p: &[f64], d: usize, len: usize, sites: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; d.pow(sites.len() as u32)];
    for (x, &px) in p.iter().enumerate() {
        let dg = digits(d, len, x);
        let k = sites.iter().fold(0, |acc, &s| acc * d + dg[s]);
        out[k] += px;
    }
    out
}

fn coefficient_from_marginal(q: &[f64], d: usize, exps: &[usize]) -> C64 {
    q.iter()
        .enumerate()
        .map(|(x, &qx)| {
            let dg = digits(d, exps.len(), x);
            character(d, exps.iter().copied().zip(dg)) * qx
        })
        .sum()
}

pub fn by_moment(ens: &StateEnsemble, plan: &MeasurementPlan, indices: &[FourierIndex]) -> Result<Vec<C64>> {
    let d = plan.local_dim();
    let sites = plan.sites();
    if let Some(support) = ens.support() {
        let mut probs: Vec<(f64, Vec<Vec<f64>>)> = Vec::with_capacity(support.len());
        for (w, s) in support {
            let rho = s.density();
            probs.push((*w, (0..plan.copies()).map(|i| plan.copy_probabilities(&rho, i)).collect::<Result<_>>()?));
        }
        return Ok(indices
            .iter()
            .map(|idx| {
                probs
                    .iter()
                    .map(|(w, ps)| {
                        idx.copies().iter().fold(C64::new(*w, 0.0), |acc, &c| {
                            let part = idx.restrict(c);
                            let st: Vec<usize> = part.iter().map(|x| x.0).collect();
                            let ex: Vec<usize> = part.iter().map(|x| x.1).collect();
                            acc * coefficient_from_marginal(&marginal(&ps[c], d, sites, &st), d, &ex)
                        })
                    })
                    .sum()
            })
            .collect());
    }
    if !ens.has_exact_moment() {
        return invalid(format!("ensemble {} has no exact moments", ens.name));
    }
    let ext_reg = QuditRegister::uniform(sites, d)?;
    let mut cache: BTreeMap<Vec<usize>, (QuditRegister, CMatrix)> = BTreeMap::new();
    let mut out = Vec::with_capacity(indices.len());
    for idx in indices {
        let copies = idx.copies();
        if !cache.contains_key(&copies) {
            let m = ens.exact_moment(copies.len()).expect("checked")?;
            let mut w = CMatrix::identity(1, 1);
            for &c in &copies {
                w = w.kronecker(plan.isometry(c));
            }
            let rotated = w.adjoint() * m * w;
            cache.insert(copies.clone(), (ext_reg.repeat(copies.len())?, rotated));
        }
        let (reg, rotated) = &cache[&copies];
        let keep: Vec<usize> = idx
            .positions
            .iter()
            .map(|&(c, s)| copies.iter().position(|&x| x == c).unwrap() * sites + s)
            .collect();
        let (_, red) = partial_trace_matrix(reg, rotated, &keep)?;
        let q: Vec<f64> = (0..red.nrows()).map(|i| red[(i, i)].re).collect();
        out.push(coefficient_from_marginal(&q, d, &idx.exponents));
    }
    Ok(out)
}

/// Per-copy exponent vectors as flat indices into the digit transform.
fn copy_alphas(plan: &MeasurementPlan, idx: &FourierIndex) -> Vec<(usize, usize)> {
    let d = plan.local_dim();
    let sites = plan.sites();
    idx.copies()
        .into_iter()
        .map(|c| {
            let mut alpha = vec![0; sites];
            for (s, e) in idx.restrict(c) {
                alpha[s] = e;
            }
            (c, alpha.iter().fold(0, |acc, &a| acc * d + a))
        })
        .collect()
}

/// Per-copy transforms `Σ_s p_{ρ,i}(s) ξ^{α·s}` for one state.
pub fn copy_transforms(plan: &MeasurementPlan, rho: &crate::qcore::DensityOperator) -> Result<Vec<Vec<C64>>> {
    (0..plan.copies())
        .map(|i| {
            let p: Vec<C64> = plan.copy_probabilities(rho, i)?.into_iter().map(|x| C64::new(x, 0.0)).collect();
            Ok(digit_transform(&p, plan.local_dim(), plan.sites()))
        })
        .collect()
}

pub fn by_monte_carlo(ens: &StateEnsemble, plan: &MeasurementPlan, indices: &[FourierIndex], samples: usize, rng: &mut Stream) -> Result<Coefficients> {
    if samples == 0 {
        return invalid("Monte Carlo mode needs samples");
    }
    let alphas: Vec<Vec<(usize, usize)>> = indices.iter().map(|i| copy_alphas(plan, i)).collect();
    let parts = chunked(rng, samples, CHUNKS, |r, count| -> Result<(Vec<C64>, Vec<f64>)> {
        let mut sum = vec![C64::new(0.0, 0.0); indices.len()];
        let mut sq = vec![0.0; indices.len()];
        for _ in 0..count {
            let t = copy_transforms(plan, &ens.sample(r)?.density())?;
            for (j, al) in alphas.iter().enumerate() {
                let v = al.iter().fold(C64::new(1.0, 0.0), |acc, &(c, a)| acc * t[c][a]);
                sum[j] += v;
                sq[j] += v.norm_sqr();
            }
        }
        Ok((sum, sq))
    });
    let mut sum = vec![C64::new(0.0, 0.0); indices.len()];
    let mut sq = vec![0.0; indices.len()];
    for p in parts {
        let (a, b) = p?;
        for j in 0..indices.len() {
            sum[j] += a[j];
            sq[j] += b[j];
        }
    }
    let n = samples as f64;
    let values: Vec<C64> = sum.iter().map(|z| z / n).collect();
    let stderr = values.iter().zip(&sq).map(|(z, s)| ((s / n - z.norm_sqr()).max(0.0) / n).sqrt()).collect();
    Ok(Coefficients { values, stderr })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{make_stabilizer_ensemble, StateEnsemble};
    use crate::lowdeg::fourier::{enumerate_indices, IndexFilter};
    use crate::rng::stream;

    #[test]
    fn routes_agree_on_haar_and_stabilizer() {
        let mut rng = stream(9, &[]);
        let reg = QuditRegister::qubits(2).unwrap();
        let plan = MeasurementPlan::random_local(reg.clone(), 2, &mut rng).unwrap();
        let idx = enumerate_indices(2, 2, 2, IndexFilter::degree(4), 1000).unwrap();
        for ens in [StateEnsemble::haar(reg.clone()), make_stabilizer_ensemble(2).unwrap()] {
            let a = compute(&ens, &plan, &idx, Mode::Enumeration, &mut rng).unwrap().values;
            let b = compute(&ens, &plan, &idx, Mode::Moment, &mut rng).unwrap().values;
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_state_single_coefficient_is_one() {
        let reg = QuditRegister::qubits(1).unwrap();
        let plan = MeasurementPlan::computational(reg.clone(), 1).unwrap();
        let idx = enumerate_indices(1, 1, 2, IndexFilter::degree(1), 10).unwrap();
        let e = StateEnsemble::zero_state(reg);
        let c = compute(&e, &plan, &idx, Mode::Enumeration, &mut stream(0, &[])).unwrap();
        assert!((c.values[0].re - 1.0).abs() < 1e-15);
        let mc = compute(&e, &plan, &idx, Mode::MonteCarlo { samples: 10 }, &mut stream(0, &[])).unwrap();
        assert!((mc.values[0].re - 1.0).abs() < 1e-15);
    }
}
