use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::C64;

/// Default cap on the number of enumerated indices.
pub const DEFAULT_INDEX_BUDGET: usize = 1_000_000;

/// Character index: positions `(copy, site)` in increasing order with exponents in `1..d`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FourierIndex {
    pub positions: Vec<(usize, usize)>,
    pub exponents: Vec<usize>,
}

impl FourierIndex {
    pub fn new(mut entries: Vec<((usize, usize), usize)>) -> Result<Self> {
        entries.sort_unstable();
        if entries.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidArgument("repeated position in Fourier index".into()));
        }
        if entries.iter().any(|e| e.1 == 0) {
            return Err(Error::InvalidArgument("zero exponent in Fourier index".into()));
        }
        Ok(Self {
            positions: entries.iter().map(|e| e.0).collect(),
            exponents: entries.iter().map(|e| e.1).collect(),
        })
    }

    /// Index with every exponent equal to 1.
    pub fn binary(positions: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(positions.into_iter().map(|p| (p, 1)).collect())
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn copies(&self) -> Vec<usize> {
        let mut c: Vec<usize> = self.positions.iter().map(|p| p.0).collect();
        c.dedup();
        c
    }

    /// Positions and exponents that belong to one copy.
    pub fn restrict(&self, copy: usize) -> Vec<(usize, usize)> {
        self.positions
            .iter()
            .zip(&self.exponents)
            .filter(|((c, _), _)| *c == copy)
            .map(|(&(_, s), &e)| (s, e))
            .collect()
    }

    pub fn per_copy_max(&self) -> usize {
        let mut best = 0;
        let mut run = 0;
        let mut last = None;
        for &(c, _) in &self.positions {
            run = if last == Some(c) { run + 1 } else { 1 };
            last = Some(c);
            best = best.max(run);
        }
        best
    }
}

/// Which indices a report sums over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndexFilter {
    pub max_size: usize,
    pub per_copy: Option<usize>,
    pub max_copies: Option<usize>,
}

impl IndexFilter {
    pub fn degree(k: usize) -> Self {
        Self { max_size: k, per_copy: None, max_copies: None }
    }

    pub fn copywise(d_per_copy: usize, k: usize) -> Self {
        Self { max_size: d_per_copy.saturating_mul(k), per_copy: Some(d_per_copy), max_copies: Some(k) }
    }

    pub fn admits(&self, idx: &FourierIndex) -> bool {
        idx.len() <= self.max_size
            && self.per_copy.map_or(true, |d| idx.per_copy_max() <= d)
            && self.max_copies.map_or(true, |k| idx.copies().len() <= k)
    }
}

/// All nonempty indices over `copies × sites` admitted by `filter`, in lexicographic
/// order of their `(copy, site, exponent)` lists.
pub fn enumerate_indices(copies: usize, sites: usize, d: usize, filter: IndexFilter, budget: usize) -> Result<Vec<FourierIndex>> {
    let positions: Vec<(usize, usize)> = (0..copies).flat_map(|c| (0..sites).map(move |s| (c, s))).collect();
    let mut out = Vec::new();
    let mut cur: Vec<((usize, usize), usize)> = Vec::new();
    fn rec(
        start: usize,
        positions: &[(usize, usize)],
        d: usize,
        filter: &IndexFilter,
        budget: usize,
        cur: &mut Vec<((usize, usize), usize)>,
        out: &mut Vec<FourierIndex>,
    ) -> Result<()> {
        if cur.len() == filter.max_size {
            return Ok(());
        }
        for p in start..positions.len() {
            let pos = positions[p];
            let same_copy = cur.iter().filter(|e| e.0 .0 == pos.0).count();
            if filter.per_copy.is_some_and(|lim| same_copy + 1 > lim) {
                continue;
            }
            if let Some(kc) = filter.max_copies {
                let mut cs: Vec<usize> = cur.iter().map(|e| e.0 .0).collect();
                cs.push(pos.0);
                cs.dedup();
                if cs.len() > kc {
                    continue;
                }
            }
            for e in 1..d {
                cur.push((pos, e));
                if out.len() >= budget {
                    return Err(Error::ResourceCap(format!("more than {budget} Fourier indices")));
                }
                out.push(FourierIndex {
                    positions: cur.iter().map(|x| x.0).collect(),
                    exponents: cur.iter().map(|x| x.1).collect(),
                });
                rec(p + 1, positions, d, filter, budget, cur, out)?;
                cur.pop();
            }
        }
        Ok(())
    }
    rec(0, &positions, d, &filter, budget, &mut cur, &mut out)?;
    Ok(out)
}

/// `ξ^{Σ α_i x_i}` with `ξ = exp(2πi/d)`; real `±1` when `d = 2`.
pub fn character(d: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> C64 {
    let total: usize = pairs.into_iter().map(|(a, x)| a * x).sum::<usize>() % d;
    if d == 2 {
        return C64::new(if total == 0 { 1.0 } else { -1.0 }, 0.0);
    }
    let theta = 2.0 * std::f64::consts::PI * total as f64 / d as f64;
    C64::new(theta.cos(), theta.sin())
}

/// Digits of `index` in base `d` over `len` digits, most significant first.
pub fn digits(d: usize, len: usize, mut index: usize) -> Vec<usize> {
    let mut out = vec![0; len];
    for slot in out.iter_mut().rev() {
        *slot = index % d;
        index /= d;
    }
    out
}

/// `f̂(α) = Σ_x f(x) ξ^{α·x}` for all `α ∈ [d]^len`, one digit at a time.
pub fn digit_transform(f: &[C64], d: usize, len: usize) -> Vec<C64> {
    let mut a = f.to_vec();
    let roots: Vec<C64> = (0..d).map(|j| character(d, [(j, 1)])).collect();
    let mut stride = 1;
    for _ in 0..len {
        let block = stride * d;
        let mut next = vec![C64::new(0.0, 0.0); a.len()];
        for base in (0..a.len()).step_by(block) {
            for off in 0..stride {
                for alpha in 0..d {
                    let mut acc = C64::new(0.0, 0.0);
                    for x in 0..d {
                        acc += a[base + x * stride + off] * roots[(alpha * x) % d];
                    }
                    next[base + alpha * stride + off] = acc;
                }
            }
        }
        a = next;
        stride = block;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumeration_order_and_counts() {
        let all = enumerate_indices(1, 3, 2, IndexFilter::degree(3), 100).unwrap();
        assert_eq!(all.len(), 7);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        let q = enumerate_indices(2, 2, 3, IndexFilter::degree(2), 100).unwrap();
        // 4 positions * 2 exponents + C(4,2) * 4
        assert_eq!(q.len(), 8 + 24);
        let cw = enumerate_indices(3, 2, 2, IndexFilter::copywise(1, 2), 100).unwrap();
        assert!(cw.iter().all(|i| i.per_copy_max() <= 1 && i.copies().len() <= 2));
        assert_eq!(cw.len(), 6 + 12);
        assert!(matches!(enumerate_indices(4, 4, 2, IndexFilter::degree(4), 10), Err(Error::ResourceCap(_))));
    }

    #[test]
    fn characters_are_orthonormal() {
        for d in 2usize..4 {
            let len = 3;
            let total = d.pow(len as u32);
            let idx = enumerate_indices(1, len, d, IndexFilter::degree(3), 1000).unwrap();
            let mut all = vec![FourierIndex { positions: vec![], exponents: vec![] }];
            all.extend(idx);
            let chi = |i: &FourierIndex, x: usize| {
                let dg = digits(d, len, x);
                character(d, i.positions.iter().zip(&i.exponents).map(|(p, &e)| (e, dg[p.1])))
            };
            for a in &all {
                for b in &all {
                    let v: C64 = (0..total).map(|x| chi(a, x) * chi(b, x).conj()).sum::<C64>() / total as f64;
                    let expect = if a == b { 1.0 } else { 0.0 };
                    assert!((v - C64::new(expect, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn transform_matches_direct_sum() {
        let d = 3;
        let f: Vec<C64> = (0..9).map(|i| C64::new(i as f64, 0.0)).collect();
        let t = digit_transform(&f, d, 2);
        for alpha in 0..9 {
            let a = digits(d, 2, alpha);
            let direct: C64 = (0..9)
                .map(|x| {
                    let xd = digits(d, 2, x);
                    f[x] * character(d, [(a[0], xd[0]), (a[1], xd[1])])
                })
                .sum();
            assert!((direct - t[alpha]).norm() < 1e-12);
        }
    }
}
