use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest total Hilbert-space dimension any dense object may have.
pub const DEFAULT_DIM_CAP: usize = 4096;

/// Ordered list of local dimensions. Site 0 is the most significant digit of
/// the flat basis index.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuditRegister {
    dims: Vec<usize>,
}

impl QuditRegister {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        Self::with_cap(dims, DEFAULT_DIM_CAP)
    }

    pub fn with_cap(dims: Vec<usize>, cap: usize) -> Result<Self> {
        if dims.is_empty() {
            return invalid("register needs at least one site");
        }
        if let Some(&d) = dims.iter().find(|&&d| d < 2) {
            return invalid(format!("local dimension {d} < 2"));
        }
        let mut total: usize = 1;
        for &d in &dims {
            total = total
                .checked_mul(d)
                .filter(|&t| t <= cap)
                .ok_or_else(|| Error::ResourceCap(format!("register {dims:?} exceeds dimension cap {cap}")))?;
        }
        Ok(Self { dims })
    }

    pub fn uniform(sites: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; sites])
    }

    pub fn qubits(n: usize) -> Result<Self> {
        Self::uniform(n, 2)
    }

    pub fn num_sites(&self) -> usize {
        self.dims.len()
    }

    pub fn local_dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, site: usize) -> usize {
        self.dims[site]
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// Common local dimension, if all sites agree.
    pub fn uniform_dim(&self) -> Option<usize> {
        let d = self.dims[0];
        self.dims.iter().all(|&x| x == d).then_some(d)
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.dims).fold(0, |acc, (&x, &d)| acc * d + x)
    }

    /// Stride of a site in the flat index.
    pub fn stride(&self, site: usize) -> usize {
        self.dims[site + 1..].iter().product()
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self::new(dims)
    }

    /// `copies` back-to-back copies of this register.
    pub fn repeat(&self, copies: usize) -> Result<Self> {
        let mut dims = Vec::with_capacity(self.dims.len() * copies);
        for _ in 0..copies {
            dims.extend_from_slice(&self.dims);
        }
        Self::new(dims)
    }

    pub fn select(&self, sites: &[usize]) -> Result<Self> {
        Self::new(sites.iter().map(|&s| self.dims[s]).collect())
    }

    pub(crate) fn check_sites(&self, sites: &[usize]) -> Result<()> {
        let mut seen = vec![false; self.dims.len()];
        for &s in sites {
            if s >= self.dims.len() {
                return invalid(format!("site {s} out of range for {} sites", self.dims.len()));
            }
            if std::mem::replace(&mut seen[s], true) {
                return invalid(format!("site {s} listed twice"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_radix_roundtrip() {
        let r = QuditRegister::new(vec![2, 3, 4]).unwrap();
        assert_eq!(r.total_dim(), 24);
        for i in 0..24 {
            assert_eq!(r.index(&r.digits(i)), i);
        }
        assert_eq!(r.digits(23), vec![1, 2, 3]);
        assert_eq!(r.stride(0), 12);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(QuditRegister::qubits(13), Err(Error::ResourceCap(_))));
        assert!(QuditRegister::qubits(12).is_ok());
        assert!(QuditRegister::new(vec![1]).is_err());
    }
}
