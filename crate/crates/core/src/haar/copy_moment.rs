//! Closed forms for moments of the single-copy likelihood-ratio overlap
//! `X = D Σ_s p_ρ(s) p_{ρ'}(s)` between independent Haar states.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::rational::{binomial, factorial, falling, rising, stirling2};

/// `a[j][r] = Σ_{partitions of [j] into r blocks} Π_b (|b|!)²`.
fn block_weights(j: usize) -> Vec<Vec<BigInt>> {
    let mut a = vec![vec![BigInt::zero(); j + 1]; j + 1];
    a[0][0] = BigInt::one();
    for n in 1..=j {
        for r in 1..=n {
            let mut acc = BigInt::zero();
            for s in 1..=n {
                let f = factorial(s as u64);
                acc += binomial((n - 1) as u64, (s - 1) as u64) * &f * &f * &a[n - s][r - 1];
            }
            a[n][r] = acc;
        }
    }
    a
}

/// `E X^j` exactly, for Haar states in dimension `dim`.
pub fn haar_overlap_power(dim: u64, j: usize) -> BigRational {
    let a = block_weights(j);
    let mut acc = BigInt::zero();
    for r in 1..=j {
        acc += falling(dim, r as u64) * &a[j][r];
    }
    if j == 0 {
        acc = BigInt::one();
    }
    let den = rising(dim, j as u64);
    BigRational::new(BigInt::from(dim).pow(j as u32) * acc, &den * &den)
}

/// `E (X - 1)^k = Σ_j C(k,j) (-1)^{k-j} E X^j`.
pub fn haar_copy_moment(dim: u64, k: usize) -> BigRational {
    let mut acc = BigRational::zero();
    for j in 0..=k {
        let term = BigRational::from_integer(binomial(k as u64, j as u64)) * haar_overlap_power(dim, j);
        if (k - j) % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// Upper bound on `E X^j` from counting lists with `r` distinct outcomes: at most
/// `S(j,r) d(d-1)…(d-r+1)` lists, each weighted by at most `(j-r+1)!²`.
pub fn overlap_power_bound(dim: u64, j: usize, worst_block: impl Fn(usize, usize) -> u64) -> BigRational {
    let mut acc = BigInt::zero();
    for r in 1..=j {
        let f = factorial(worst_block(j, r));
        acc += &f * &f * stirling2(j as u64, r as u64) * falling(dim, r as u64);
    }
    if j == 0 {
        acc = BigInt::one();
    }
    let den = rising(dim, j as u64);
    BigRational::new(BigInt::from(dim).pow(j as u32) * acc, &den * &den)
}

/// Largest block size when `j` outcomes take `r` distinct values.
pub fn worst_block(j: usize, r: usize) -> u64 {
    (j - r + 1) as u64
}

/// `C k² k^k (ε + 2^{-n})`.
pub fn copy_moment_bound(k: usize, eps: f64, n: usize, constant: f64) -> f64 {
    let kf = k as f64;
    constant * kf * kf * kf.powf(kf) * (eps + 2f64.powi(-(n as i32)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::rational::{bell, ratio};

    #[test]
    fn qubit_second_moment() {
        assert_eq!(haar_overlap_power(2, 1), ratio(1, 1));
        assert_eq!(haar_overlap_power(2, 2), ratio(10, 9));
        assert_eq!(haar_copy_moment(2, 2), ratio(1, 9));
        assert_eq!(haar_copy_moment(4, 1), BigRational::zero());
    }

    #[test]
    fn block_weights_count_partitions() {
        // every partition contributes a weight of at least one
        let a = block_weights(6);
        let total: BigInt = (1..=6).map(|r| a[6][r].clone()).sum();
        assert!(total >= bell(6));
    }

    #[test]
    fn corrected_bound_dominates_and_shifted_one_does_not() {
        for dim in [2u64, 4, 8, 16] {
            for j in 1..=7 {
                assert!(overlap_power_bound(dim, j, worst_block) >= haar_overlap_power(dim, j));
            }
        }
        let shifted = overlap_power_bound(2, 2, |j, r| (j - r) as u64);
        assert!(shifted < haar_overlap_power(2, 2));
    }
}
