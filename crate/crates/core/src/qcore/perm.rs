use super::register::DEFAULT_DIM_CAP;
use super::state::{CMatrix, C64};
use crate::error::{invalid, Error, Result};

/// Permutation of `0..t`, stored as its image list: `k -> self.0[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return invalid(format!("{images:?} is not a permutation"));
            }
        }
        Ok(Self(images))
    }

    pub fn identity(t: usize) -> Self {
        Self((0..t).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn image(&self, k: usize) -> usize {
        self.0[k]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self(other.0.iter().map(|&k| self.0[k]).collect())
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (k, &v) in self.0.iter().enumerate() {
            inv[v] = k;
        }
        Self(inv)
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.0.len()];
        let mut out = Vec::new();
        for start in 0..self.0.len() {
            if seen[start] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut k = start;
            while !seen[k] {
                seen[k] = true;
                cyc.push(k);
                k = self.0[k];
            }
            out.push(cyc);
        }
        out
    }

    pub fn num_cycles(&self) -> usize {
        self.cycles().len()
    }

    pub fn fixed_points(&self) -> usize {
        self.0.iter().enumerate().filter(|(k, &v)| *k == v).count()
    }

    pub fn is_derangement(&self) -> bool {
        self.fixed_points() == 0
    }

    /// All permutations of `0..t` in lexicographic order of image lists.
    pub fn all(t: usize) -> Vec<Self> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..t).collect();
        loop {
            out.push(Self(cur.clone()));
            let Some(i) = (1..t).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
            let j = (i..t).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }
}

/// Flat index of `P_π |i⟩` where `i` is a flat index over `t` sites of dimension `d`.
/// The content of position `k` moves to position `π(k)`.
pub fn permute_index(d: usize, perm: &Permutation, index: usize) -> usize {
    let t = perm.len();
    let mut digits = vec![0; t];
    let mut x = index;
    for k in (0..t).rev() {
        digits[k] = x % d;
        x /= d;
    }
    let mut out = vec![0; t];
    for k in 0..t {
        out[perm.image(k)] = digits[k];
    }
    out.iter().fold(0, |acc, &v| acc * d + v)
}

/// Matrix of `P_π` on `(C^d)^{⊗t}`.
pub fn permutation_operator(d: usize, perm: &Permutation) -> Result<CMatrix> {
    let dim = checked_power(d, perm.len())?;
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(permute_index(d, perm, i), i)] = C64::new(1.0, 0.0);
    }
    Ok(m)
}

pub(crate) fn checked_power(d: usize, t: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..t {
        dim = dim
            .checked_mul(d)
            .filter(|&x| x <= DEFAULT_DIM_CAP)
            .ok_or_else(|| Error::ResourceCap(format!("{d}^{t} exceeds dimension cap {DEFAULT_DIM_CAP}")))?;
    }
    Ok(dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn all_counts_and_is_sorted() {
        let p = Permutation::all(4);
        assert_eq!(p.len(), 24);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(Permutation::all(0).len(), 1);
    }

    #[test]
    fn trace_counts_cycles() {
        for d in 2..4 {
            for p in Permutation::all(3) {
                let m = permutation_operator(d, &p).unwrap();
                let tr = m.trace().re;
                assert_eq!(tr as usize, d.pow(p.num_cycles() as u32));
            }
        }
    }

    #[test]
    fn swap_acts_on_product_basis() {
        let swap = Permutation::new(vec![1, 0]).unwrap();
        assert_eq!(permute_index(3, &swap, 1 * 3 + 2), 2 * 3 + 1);
    }

    proptest! {
        #[test]
        fn operators_form_a_representation(a in 0usize..24, b in 0usize..24, d in 2usize..4) {
            let all = Permutation::all(4);
            let (p, q) = (&all[a], &all[b]);
            let lhs = permutation_operator(d, p).unwrap() * permutation_operator(d, q).unwrap();
            let rhs = permutation_operator(d, &p.compose(q)).unwrap();
            prop_assert!((lhs - rhs).camax() < 1e-15);
            prop_assert_eq!(p.compose(&p.inverse()), Permutation::identity(4));
        }
    }
}
