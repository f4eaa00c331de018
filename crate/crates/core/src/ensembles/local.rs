use serde::Serialize;

use super::ensemble::StateEnsemble;
use crate::error::{invalid, Error, Result};
use crate::qcore::state::trace_norm;
use crate::qcore::{partial_trace_matrix, CMatrix, DensityOperator, QuditRegister, C64};
use crate::rng::{chunked, Stream, CHUNKS};

/// Which positions of `copies` rotated copies are kept, with optional ancillas.
#[derive(Clone, Debug)]
pub struct LocalQuery {
    pub copies: usize,
    /// `(copy, site)` pairs; sites index the register followed by the ancillas.
    pub positions: Vec<(usize, usize)>,
    /// One unitary per copy acting on register plus ancillas; empty means identity.
    pub rotations: Vec<CMatrix>,
    pub ancilla: usize,
}

impl LocalQuery {
    pub fn new(copies: usize, mut positions: Vec<(usize, usize)>) -> Self {
        positions.sort_unstable();
        positions.dedup();
        Self { copies, positions, rotations: Vec::new(), ancilla: 0 }
    }

    pub fn with_rotations(mut self, rotations: Vec<CMatrix>) -> Self {
        self.rotations = rotations;
        self
    }

    pub fn with_ancilla(mut self, ancilla: usize) -> Self {
        self.ancilla = ancilla;
        self
    }

    fn sites_of(&self, copy: usize) -> Vec<usize> {
        self.positions.iter().filter(|(c, _)| *c == copy).map(|&(_, s)| s).collect()
    }

    fn validate(&self, reg: &QuditRegister) -> Result<QuditRegister> {
        let d = reg
            .uniform_dim()
            .ok_or_else(|| Error::InvalidArgument("local queries need a uniform register".into()))?;
        let ext = QuditRegister::uniform(reg.num_sites() + self.ancilla, d)?;
        if self.positions.is_empty() {
            return invalid("empty position set");
        }
        for &(c, s) in &self.positions {
            if c >= self.copies || s >= ext.num_sites() {
                return invalid(format!("position ({c},{s}) out of range"));
            }
        }
        if !self.rotations.is_empty() {
            if self.rotations.len() != self.copies {
                return Err(Error::Dimension(format!("{} rotations for {} copies", self.rotations.len(), self.copies)));
            }
            for u in &self.rotations {
                if u.nrows() != ext.total_dim() {
                    return Err(Error::Dimension("rotation does not match register plus ancillas".into()));
                }
                crate::qcore::state::check_unitary(u)?;
            }
        }
        Ok(ext)
    }
}

/// Reduced operator on the query positions for one state `ρ^{⊗m}` (rotated, ancillas in |0⟩).
pub fn reduced_rotated(rho: &DensityOperator, q: &LocalQuery) -> Result<CMatrix> {
    let ext = q.validate(rho.register())?;
    let anc_dim = ext.total_dim() / rho.register().total_dim();
    let mut zero = CMatrix::zeros(anc_dim, anc_dim);
    zero[(0, 0)] = C64::new(1.0, 0.0);
    let base = rho.matrix().kronecker(&zero);
    let mut out = CMatrix::identity(1, 1);
    for c in 0..q.copies {
        let sites = q.sites_of(c);
        if sites.is_empty() {
            continue;
        }
        let state = match q.rotations.get(c) {
            Some(u) => u * &base * u.adjoint(),
            None => base.clone(),
        };
        let (_, red) = partial_trace_matrix(&ext, &state, &sites)?;
        out = out.kronecker(&red);
    }
    Ok(out)
}

/// `(⊗_c V_c) M_t (⊗_c V_c)†` reduced to the query, with `V_c = U_c (I ⊗ |0⟩)` over the
/// `t` touched copies.
fn moment_reduction(ens: &StateEnsemble, q: &LocalQuery) -> Result<CMatrix> {
    let ext = q.validate(&ens.register)?;
    let sys = ens.register.total_dim();
    let anc_dim = ext.total_dim() / sys;
    let touched: Vec<usize> = (0..q.copies).filter(|&c| !q.sites_of(c).is_empty()).collect();
    let m = ens.exact_moment(touched.len()).expect("checked by caller")?;
    let mut w = CMatrix::identity(1, 1);
    for &c in &touched {
        let embed = CMatrix::from_fn(ext.total_dim(), sys, |r, col| if r == col * anc_dim { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        let v = match q.rotations.get(c) {
            Some(u) => u * embed,
            None => embed,
        };
        w = w.kronecker(&v);
    }
    let full = &w * m * w.adjoint();
    let reg = ext.repeat(touched.len())?;
    let keep: Vec<usize> = q
        .positions
        .iter()
        .map(|&(c, s)| touched.iter().position(|&x| x == c).expect("touched") * ext.num_sites() + s)
        .collect();
    Ok(partial_trace_matrix(&reg, &full, &keep)?.1)
}

/// Ensemble average of [`reduced_rotated`], exact when the ensemble has finite support or exact moments.
/// Returns the average and the Frobenius-norm standard error.
pub fn reduced_average(ens: &StateEnsemble, q: &LocalQuery, samples: usize, rng: &mut Stream) -> Result<(CMatrix, f64, bool)> {
    if let Some(support) = ens.support() {
        let mut acc: Option<CMatrix> = None;
        for (w, s) in support {
            let r = reduced_rotated(&s.density(), q)? * C64::new(*w, 0.0);
            acc = Some(match acc {
                Some(a) => a + r,
                None => r,
            });
        }
        return Ok((acc.expect("nonempty support"), 0.0, true));
    }
    if ens.has_exact_moment() {
        return Ok((moment_reduction(ens, q)?, 0.0, true));
    }
    if samples == 0 {
        return invalid("Monte Carlo estimate needs samples");
    }
    let parts = chunked(rng, samples, CHUNKS, |r, count| -> Result<(Option<CMatrix>, f64)> {
        let mut sum: Option<CMatrix> = None;
        let mut sq = 0.0;
        for _ in 0..count {
            let m = reduced_rotated(&ens.sample(r)?.density(), q)?;
            sq += m.iter().map(|z| z.norm_sqr()).sum::<f64>();
            sum = Some(match sum {
                Some(a) => a + m,
                None => m,
            });
        }
        Ok((sum, sq))
    });
    let mut sum: Option<CMatrix> = None;
    let mut sq = 0.0;
    for p in parts {
        let (a, b) = p?;
        sq += b;
        if let Some(a) = a {
            sum = Some(match sum {
                Some(s) => s + a,
                None => a,
            });
        }
    }
    let n = samples as f64;
    let mean = sum.expect("samples > 0") / C64::new(n, 0.0);
    let var = (sq / n - mean.iter().map(|z| z.norm_sqr()).sum::<f64>()).max(0.0);
    Ok((mean, (var / n).sqrt(), false))
}

#[derive(Clone, Debug, Serialize)]
pub struct IndistinguishabilityEstimate {
    pub value: f64,
    /// Upper bound on the standard error of `value` (0 when exact).
    pub stderr: f64,
    pub exact: bool,
}

/// Trace distance between the averaged reduced state and the same reduction of the
/// maximally mixed input (which is `I/d^{|T|}` without ancillas).
pub fn local_indistinguishability(ens: &StateEnsemble, q: &LocalQuery, samples: usize, rng: &mut Stream) -> Result<IndistinguishabilityEstimate> {
    let (avg, frob_err, exact) = reduced_average(ens, q, samples, rng)?;
    let reference = reduced_rotated(&DensityOperator::maximally_mixed(ens.register.clone()), q)?;
    let diff = &avg - &reference;
    let herm = (&diff + diff.adjoint()) * C64::new(0.5, 0.0);
    let value = trace_norm(&herm) / 2.0;
    let k = avg.nrows() as f64;
    Ok(IndistinguishabilityEstimate { value, stderr: 0.5 * k.sqrt() * frob_err, exact })
}
