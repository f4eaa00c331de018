//! Stabilizer states: explicit Clifford-orbit enumeration for tiny registers and
//! an exact uniform sampler from the affine-subspace normal form for larger ones.

use std::collections::BTreeMap;

use rand::Rng;

use super::ensemble::{Sample, StateEnsemble};
use crate::error::{Error, Result};
use crate::haar::moment_operator;
use crate::qcore::{apply_gate_vector, CMatrix, CVector, PureState, QuditRegister, C64};
use crate::rng::Stream;

pub const MAX_ENUMERATION_QUBITS: usize = 2;
pub const MAX_SAMPLING_QUBITS: usize = 6;

fn gates() -> (CMatrix, CMatrix, CMatrix) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| C64::new(x, 0.0);
    let h = CMatrix::from_row_slice(2, 2, &[r(s), r(s), r(s), r(-s)]);
    let p = CMatrix::from_row_slice(2, 2, &[r(1.0), r(0.0), r(0.0), C64::new(0.0, 1.0)]);
    let mut cx = CMatrix::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 1), (2, 3), (3, 2)] {
        cx[(i, j)] = r(1.0);
    }
    (h, p, cx)
}

/// Hash key of a state up to global phase.
fn phase_key(v: &CVector) -> Vec<(i64, i64)> {
    let first = v.iter().find(|z| z.norm() > 1e-9).copied().unwrap_or(C64::new(1.0, 0.0));
    let phase = first.conj() / first.norm();
    v.iter()
        .map(|z| {
            let w = z * phase;
            ((w.re * 1e8).round() as i64, (w.im * 1e8).round() as i64)
        })
        .collect()
}

/// All stabilizer states on `n ≤ 2` qubits, by breadth-first search over the
/// orbit of `|0…0⟩` under H, S and CNOT. Sorted by their canonical amplitude key.
pub fn enumerate_stabilizer_states(n: usize) -> Result<Vec<PureState>> {
    if n == 0 || n > MAX_ENUMERATION_QUBITS {
        return Err(Error::ResourceCap(format!("stabilizer enumeration supports 1..={MAX_ENUMERATION_QUBITS} qubits, got {n}")));
    }
    let reg = QuditRegister::qubits(n)?;
    let (h, p, cx) = gates();
    let mut moves: Vec<(Vec<usize>, CMatrix)> = Vec::new();
    for q in 0..n {
        moves.push((vec![q], h.clone()));
        moves.push((vec![q], p.clone()));
    }
    for a in 0..n {
        for b in 0..n {
            if a != b {
                moves.push((vec![a, b], cx.clone()));
            }
        }
    }
    let start = PureState::basis(reg.clone(), 0)?.amplitudes().clone();
    let mut seen: BTreeMap<Vec<(i64, i64)>, CVector> = BTreeMap::new();
    seen.insert(phase_key(&start), start.clone());
    let mut frontier = vec![start];
    while let Some(v) = frontier.pop() {
        for (sites, g) in &moves {
            let mut w = v.clone();
            apply_gate_vector(&reg, &mut w, sites, g)?;
            let key = phase_key(&w);
            if !seen.contains_key(&key) {
                seen.insert(key, w.clone());
                frontier.push(w);
            }
        }
    }
    seen.into_values().map(|v| PureState::new(reg.clone(), v)).collect()
}

/// Number of stabilizer states with support on an affine subspace of dimension `k`.
fn count_with_support_dim(n: usize, k: usize) -> f64 {
    // Gaussian binomial [n k]_2.
    let mut g = 1.0;
    for i in 0..k {
        g *= (2f64.powi((n - i) as i32) - 1.0) / (2f64.powi((i + 1) as i32) - 1.0);
    }
    2f64.powi((n - k) as i32) * g * 2f64.powi(k as i32) * 2f64.powi((k * (k + 1) / 2) as i32)
}

pub fn stabilizer_count(n: usize) -> f64 {
    (0..=n).map(|k| count_with_support_dim(n, k)).sum()
}

fn gf2_rank(rows: &[u64]) -> usize {
    let mut rows = rows.to_vec();
    let mut rank = 0;
    for bit in 0..64 {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) else { continue };
        rows.swap(rank, pivot);
        for r in 0..rows.len() {
            if r != rank && rows[r] >> bit & 1 == 1 {
                rows[r] ^= rows[rank];
            }
        }
        rank += 1;
    }
    rank
}

/// Uniformly random stabilizer state on `n ≤ 6` qubits. Each state has the normal form
/// `Σ_{y ∈ F_2^k} i^{l·y} (-1)^{q(y)} |a + B y⟩` over an affine subspace `a + span(B)`.
pub fn random_stabilizer_state(n: usize, rng: &mut Stream) -> Result<PureState> {
    if n == 0 || n > MAX_SAMPLING_QUBITS {
        return Err(Error::ResourceCap(format!("stabilizer sampling supports 1..={MAX_SAMPLING_QUBITS} qubits, got {n}")));
    }
    let weights: Vec<f64> = (0..=n).map(|k| count_with_support_dim(n, k)).collect();
    let k = crate::qcore::sample_outcome(&weights.iter().map(|w| w / stabilizer_count(n)).collect::<Vec<_>>(), rng);
    let basis: Vec<u64> = loop {
        let rows: Vec<u64> = (0..k).map(|_| rng.gen_range(0..1u64 << n)).collect();
        if gf2_rank(&rows) == k {
            break rows;
        }
    };
    let offset: u64 = rng.gen_range(0..1u64 << n);
    let lin: Vec<bool> = (0..k).map(|_| rng.gen()).collect();
    let quad: Vec<Vec<bool>> = (0..k).map(|i| (0..k).map(|j| j >= i && rng.gen()).collect()).collect();
    let reg = QuditRegister::qubits(n)?;
    let mut v = CVector::zeros(1 << n);
    for y in 0u64..(1 << k) {
        let bit = |j: usize| y >> j & 1 == 1;
        let mut x = offset;
        let mut l = 0;
        let mut q = 0;
        for j in 0..k {
            if bit(j) {
                x ^= basis[j];
                l += lin[j] as u32;
                for jj in j..k {
                    q += (quad[j][jj] && bit(jj)) as u32;
                }
            }
        }
        let phase = C64::new(0.0, 1.0).powu(l % 2) * if q % 2 == 0 { 1.0 } else { -1.0 };
        v[x as usize] = phase;
    }
    PureState::new(reg, v)
}

/// Uniform stabilizer ensemble. Finite support for `n ≤ 2`, sampled otherwise;
/// exact moments up to order 3 coincide with Haar.
pub fn make_stabilizer_ensemble(n: usize) -> Result<StateEnsemble> {
    let reg = QuditRegister::qubits(n)?;
    let dim = reg.total_dim();
    let ens = if n <= MAX_ENUMERATION_QUBITS {
        let states = enumerate_stabilizer_states(n)?.into_iter().map(Sample::Pure).collect();
        StateEnsemble::uniform("stabilizer", reg, states)?
    } else if n <= MAX_SAMPLING_QUBITS {
        StateEnsemble::from_sampler("stabilizer", reg, move |rng| Ok(Sample::Pure(random_stabilizer_state(n, rng)?))).with_exact_moment(
            move |k| {
                if k <= 3 {
                    Ok(moment_operator(dim, k)?.matrix)
                } else {
                    Err(Error::InvalidArgument(format!("no closed-form stabilizer moment of order {k}")))
                }
            },
        )
    } else {
        return Err(Error::ResourceCap(format!("stabilizer ensemble supports at most {MAX_SAMPLING_QUBITS} qubits")));
    };
    Ok(ens.with_param("n", n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use std::collections::BTreeSet;

    #[test]
    fn orbit_sizes() {
        assert_eq!(enumerate_stabilizer_states(1).unwrap().len(), 6);
        assert_eq!(enumerate_stabilizer_states(2).unwrap().len(), 60);
        assert_eq!(stabilizer_count(1), 6.0);
        assert_eq!(stabilizer_count(2), 60.0);
        assert_eq!(stabilizer_count(3), 1080.0);
    }

    #[test]
    fn normal_form_sampler_hits_exactly_the_orbit() {
        for n in 1..=2 {
            let orbit: BTreeSet<_> = enumerate_stabilizer_states(n).unwrap().iter().map(|s| phase_key(s.amplitudes())).collect();
            let mut rng = stream(11, &[n as u64]);
            let mut hits = BTreeMap::new();
            let draws = 12000;
            for _ in 0..draws {
                let s = random_stabilizer_state(n, &mut rng).unwrap();
                *hits.entry(phase_key(s.amplitudes())).or_insert(0usize) += 1;
            }
            let keys: BTreeSet<_> = hits.keys().cloned().collect();
            assert_eq!(keys, orbit);
            let expect = draws as f64 / orbit.len() as f64;
            for &c in hits.values() {
                assert!((c as f64 - expect).abs() < 5.0 * expect.sqrt(), "count {c} vs {expect}");
            }
        }
    }
}
