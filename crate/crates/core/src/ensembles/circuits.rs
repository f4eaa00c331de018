use serde::{Deserialize, Serialize};

use super::ensemble::{Sample, StateEnsemble};
use crate::error::{invalid, Result};
use crate::haar::haar_unitary;
use crate::qcore::{apply_gate_vector, CMatrix, PureState, QuditRegister};
use crate::rng::Stream;

pub const MAX_CIRCUIT_QUBITS: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Architecture {
    /// Two-qubit bricks with periodic boundary.
    Brickwork,
    /// Haar blocks of `block` qubits; every other layer is shifted by `block / 2`
    /// with periodic wrap.
    CoarseGrained { block: usize },
}

/// A gate on an ordered list of qubits.
#[derive(Clone, Debug)]
pub struct Gate {
    pub sites: Vec<usize>,
    pub unitary: CMatrix,
}

#[derive(Clone, Debug)]
pub struct CircuitSpec {
    pub n: usize,
    pub depth: usize,
    pub architecture: Architecture,
    pub layers: Vec<Vec<Gate>>,
}

/// Site groups of layer `layer` (0-based).
pub fn layer_groups(n: usize, layer: usize, arch: Architecture) -> Vec<Vec<usize>> {
    let (width, shift) = match arch {
        Architecture::Brickwork => (2, 1),
        Architecture::CoarseGrained { block } => (block, block / 2),
    };
    let offset = if layer % 2 == 0 { 0 } else { shift };
    (0..n / width)
        .map(|b| (0..width).map(|j| (offset + b * width + j) % n).collect())
        .collect()
}

fn check_shape(n: usize, arch: Architecture) -> Result<()> {
    if n == 0 || n % 2 == 1 {
        return invalid(format!("circuit needs an even number of qubits, got {n}"));
    }
    if n > MAX_CIRCUIT_QUBITS {
        return invalid(format!("at most {MAX_CIRCUIT_QUBITS} qubits, got {n}"));
    }
    if let Architecture::CoarseGrained { block } = arch {
        if block < 2 || block % 2 == 1 || n % block != 0 {
            return invalid(format!("block size {block} must be even and divide {n}"));
        }
    }
    Ok(())
}

impl CircuitSpec {
    /// Independent Haar gates on every brick.
    pub fn random(n: usize, depth: usize, architecture: Architecture, rng: &mut Stream) -> Result<Self> {
        check_shape(n, architecture)?;
        let layers = (0..depth)
            .map(|l| {
                layer_groups(n, l, architecture)
                    .into_iter()
                    .map(|sites| {
                        let unitary = haar_unitary(1 << sites.len(), rng);
                        Gate { sites, unitary }
                    })
                    .collect()
            })
            .collect();
        Ok(Self { n, depth, architecture, layers })
    }

    /// Circuit output on `|0…0⟩`.
    pub fn state(&self) -> Result<PureState> {
        let reg = QuditRegister::qubits(self.n)?;
        let mut psi = PureState::basis(reg.clone(), 0)?;
        let v = psi.amplitudes_mut();
        for layer in &self.layers {
            for g in layer {
                apply_gate_vector(&reg, v, &g.sites, &g.unitary)?;
            }
        }
        Ok(psi)
    }
}

pub fn sample_brickwork(n: usize, depth: usize, architecture: Architecture, rng: &mut Stream) -> Result<PureState> {
    CircuitSpec::random(n, depth, architecture, rng)?.state()
}

pub fn make_circuit_ensemble(n: usize, depth: usize, architecture: Architecture) -> Result<StateEnsemble> {
    check_shape(n, architecture)?;
    let reg = QuditRegister::qubits(n)?;
    let name = match architecture {
        Architecture::Brickwork => "brickwork",
        Architecture::CoarseGrained { .. } => "coarse",
    };
    let mut e = StateEnsemble::from_sampler(name, reg, move |rng| Ok(Sample::Pure(sample_brickwork(n, depth, architecture, rng)?)))
        .with_param("n", n)
        .with_param("L", depth);
    if let Architecture::CoarseGrained { block } = architecture {
        e = e.with_param("block", block);
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn brick_layers_alternate_with_wrap() {
        assert_eq!(layer_groups(4, 0, Architecture::Brickwork), vec![vec![0, 1], vec![2, 3]]);
        assert_eq!(layer_groups(4, 1, Architecture::Brickwork), vec![vec![1, 2], vec![3, 0]]);
        let coarse = Architecture::CoarseGrained { block: 4 };
        assert_eq!(layer_groups(8, 1, coarse), vec![vec![2, 3, 4, 5], vec![6, 7, 0, 1]]);
    }

    #[test]
    fn depth_zero_is_all_zeros() {
        let psi = sample_brickwork(4, 0, Architecture::Brickwork, &mut stream(0, &[])).unwrap();
        assert!((psi.amplitudes()[0].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn odd_or_bad_blocks_rejected() {
        let mut rng = stream(0, &[]);
        assert!(sample_brickwork(3, 1, Architecture::Brickwork, &mut rng).is_err());
        assert!(sample_brickwork(6, 1, Architecture::CoarseGrained { block: 4 }, &mut rng).is_err());
    }
}
