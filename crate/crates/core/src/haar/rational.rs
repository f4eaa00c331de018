//! Exact rational coefficients for Haar moments.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(int(n), int(d))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `d (d+1) ... (d+k-1)`.
pub fn rising(d: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(d + i))
}

/// `d (d-1) ... (d-k+1)`.
pub fn falling(d: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * (BigInt::from(d) - BigInt::from(i)))
}

/// `β_{d,s} = d^s / (d (d+1) ... (d+s-1))`.
pub fn beta(d: u64, s: u64) -> BigRational {
    BigRational::new(BigInt::from(d).pow(s as u32), rising(d, s))
}

/// `γ_f = Σ_{r=0}^{f} (-1)^r C(f,r) β_{d,t-r}`, the coefficient of `P_π` with `f` fixed points
/// in `E (dρ - I)^{⊗t}`.
pub fn gamma(d: u64, t: u64, f: u64) -> BigRational {
    assert!(f <= t, "fixed points exceed order");
    let mut acc = BigRational::zero();
    for r in 0..=f {
        let term = BigRational::from_integer(binomial(f, r)) * beta(d, t - r);
        if r % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// `σ_i(s) = Σ_{j=1}^{s-1} j^{i-1}`.
pub fn power_sum(s: u64, i: u64) -> BigInt {
    (1..s).fold(BigInt::zero(), |acc, j| acc + BigInt::from(j).pow((i - 1) as u32))
}

/// Coefficient `c_a(s)` of `d^{-a}` in the expansion of `β_{d,s}`.
pub fn beta_series_coefficient(s: u64, a: u64) -> BigRational {
    if a == 0 {
        return BigRational::one();
    }
    let mut total = BigRational::zero();
    let mut fact = BigInt::one();
    for l in 1..=a {
        fact *= BigInt::from(l);
        let mut inner = BigRational::zero();
        for parts in compositions(a + l, l as usize, 2) {
            let mut num = BigInt::one();
            let mut den = BigInt::one();
            for &i in &parts {
                num *= power_sum(s, i);
                den *= BigInt::from(i - 1);
            }
            inner += BigRational::new(num, den);
        }
        total += inner / BigRational::from_integer(fact.clone());
    }
    if a % 2 == 1 {
        -total
    } else {
        total
    }
}

/// Ordered tuples of `parts` integers, each at least `min`, summing to `total`.
pub fn compositions(total: u64, parts: usize, min: u64) -> Vec<Vec<u64>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(parts);
    fn rec(rem: u64, left: usize, min: u64, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if left == 0 {
            if rem == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if rem < min * left as u64 {
            return;
        }
        for v in min..=rem - min * (left as u64 - 1) {
            cur.push(v);
            rec(rem - v, left - 1, min, cur, out);
            cur.pop();
        }
    }
    rec(total, parts, min, &mut cur, &mut out);
    out
}

/// Stirling numbers of the second kind `S(n, k)`.
pub fn stirling2(n: u64, k: u64) -> BigInt {
    let n = n as usize;
    let k = k as usize;
    let mut row = vec![BigInt::zero(); k + 1];
    row[0] = BigInt::one();
    for i in 1..=n {
        for j in (1..=k.min(i)).rev() {
            row[j] = BigInt::from(j) * &row[j] + &row[j - 1];
        }
        row[0] = BigInt::zero();
    }
    row[k].clone()
}

pub fn bell(n: u64) -> BigInt {
    (0..=n).fold(BigInt::zero(), |acc, k| acc + stirling2(n, k))
}

pub fn abs(r: &BigRational) -> BigRational {
    r.abs()
}
