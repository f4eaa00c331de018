use serde::{Deserialize, Serialize};

use crate::ensembles::{Architecture, CircuitSpec};
use crate::error::{invalid, Error, Result};
use crate::haar::haar_unitary;
use crate::qcore::{apply_gate_vector, conjugate, depolarize_sites, CMatrix, CVector, DensityOperator, QuditRegister, C64};
use crate::rng::Stream;

/// Largest qubit count simulated with explicit density matrices.
pub const MAX_NOISY_QUBITS: usize = 10;

/// Generator of one unitary block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BlockKind {
    /// Haar unitary on all `n` qubits (an exact 2-design).
    Haar,
    Brickwork { depth: usize },
    CoarseGrained { block: usize, depth: usize },
}

/// Which state is fed into the noisy circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputState {
    /// `C†(I/2^n) = I/2^n`.
    Null,
    /// `C†|0̄⟩⟨0̄|`.
    Alternative,
    /// `|0̄⟩⟨0̄|`, independent of the circuit.
    Zero,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoisyCircuitSpec {
    pub n: usize,
    pub blocks: Vec<BlockKind>,
    pub kappa: f64,
    /// Block indices followed by a noise layer; `None` means after every block.
    #[serde(default)]
    pub noise_after: Option<Vec<usize>>,
    pub input: InputState,
}

impl NoisyCircuitSpec {
    /// `l` Haar blocks with noise after each.
    pub fn haar(n: usize, l: usize, kappa: f64, input: InputState) -> Self {
        Self { n, blocks: vec![BlockKind::Haar; l], kappa, noise_after: None, input }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > MAX_NOISY_QUBITS {
            return Err(Error::ResourceCap(format!("noisy circuits support 1..={MAX_NOISY_QUBITS} qubits, got {}", self.n)));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            return invalid(format!("noise rate {} outside [0,1]", self.kappa));
        }
        if let Some(after) = &self.noise_after {
            if let Some(&b) = after.iter().find(|&&b| b >= self.blocks.len()) {
                return invalid(format!("noise placement after block {b} of {}", self.blocks.len()));
            }
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut Stream) -> Result<NoisyCircuit> {
        self.validate()?;
        let dim = 1usize << self.n;
        let unitaries = self
            .blocks
            .iter()
            .map(|b| match *b {
                BlockKind::Haar => Ok(haar_unitary(dim, rng)),
                BlockKind::Brickwork { depth } => circuit_unitary(&CircuitSpec::random(self.n, depth, Architecture::Brickwork, rng)?),
                BlockKind::CoarseGrained { block, depth } => {
                    circuit_unitary(&CircuitSpec::random(self.n, depth, Architecture::CoarseGrained { block }, rng)?)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let noisy = (0..self.blocks.len())
            .map(|i| self.noise_after.as_ref().map_or(true, |a| a.contains(&i)))
            .collect();
        Ok(NoisyCircuit { n: self.n, unitaries, kappa: self.kappa, noisy })
    }
}

fn circuit_unitary(spec: &CircuitSpec) -> Result<CMatrix> {
    let reg = QuditRegister::qubits(spec.n)?;
    let dim = reg.total_dim();
    let mut u = CMatrix::identity(dim, dim);
    for j in 0..dim {
        let mut col: CVector = u.column(j).into_owned();
        for layer in &spec.layers {
            for g in layer {
                apply_gate_vector(&reg, &mut col, &g.sites, &g.unitary)?;
            }
        }
        u.set_column(j, &col);
    }
    Ok(u)
}

/// One sampled realization of a noisy circuit.
#[derive(Clone, Debug)]
pub struct NoisyCircuit {
    pub n: usize,
    pub unitaries: Vec<CMatrix>,
    pub kappa: f64,
    /// `noisy[i]`: a depolarizing layer follows block `i`.
    pub noisy: Vec<bool>,
}

impl NoisyCircuit {
    pub fn register(&self) -> QuditRegister {
        QuditRegister::qubits(self.n).expect("validated qubit count")
    }

    /// Ideal circuit `U_l ⋯ U_1`.
    pub fn ideal(&self) -> CMatrix {
        let dim = 1usize << self.n;
        self.unitaries.iter().fold(CMatrix::identity(dim, dim), |acc, u| u * acc)
    }

    pub fn input(&self, which: InputState) -> Result<DensityOperator> {
        let reg = self.register();
        let dim = reg.total_dim();
        match which {
            InputState::Null => Ok(DensityOperator::maximally_mixed(reg)),
            InputState::Zero => zero(reg, dim),
            InputState::Alternative => conjugate(&zero(reg, dim)?, &self.ideal().adjoint()),
        }
    }
}

fn zero(reg: QuditRegister, dim: usize) -> Result<DensityOperator> {
    let mut m = CMatrix::zeros(dim, dim);
    m[(0, 0)] = C64::new(1.0, 0.0);
    DensityOperator::new(reg, m)
}

/// Output state together with its purity after every block (after noise).
pub fn apply_noisy_circuit_traced(circuit: &NoisyCircuit, input: &DensityOperator) -> Result<(DensityOperator, Vec<f64>)> {
    if input.register().num_sites() != circuit.n || input.register().uniform_dim() != Some(2) {
        return Err(Error::Dimension("input register does not match the circuit".into()));
    }
    let sites: Vec<usize> = (0..circuit.n).collect();
    let mut rho = input.clone();
    let mut purities = Vec::with_capacity(circuit.unitaries.len());
    for (u, &noisy) in circuit.unitaries.iter().zip(&circuit.noisy) {
        rho = conjugate(&rho, u)?;
        if noisy && circuit.kappa > 0.0 {
            let before = rho.purity();
            rho = depolarize_sites(&rho, &sites, circuit.kappa)?;
            debug_assert!(rho.purity() <= before + 1e-12, "depolarizing raised purity");
        }
        purities.push(rho.purity());
    }
    Ok((rho, purities))
}

/// `D_κ^{⊗n} ∘ U_l ∘ ⋯ ∘ D_κ^{⊗n} ∘ U_1` applied to `input`.
pub fn apply_noisy_circuit(circuit: &NoisyCircuit, input: &DensityOperator) -> Result<DensityOperator> {
    Ok(apply_noisy_circuit_traced(circuit, input)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn max_diff(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).camax()
    }

    #[test]
    fn noiseless_is_unitary_and_inverts() {
        let spec = NoisyCircuitSpec::haar(3, 2, 0.0, InputState::Alternative);
        let c = spec.sample(&mut stream(1, &[])).unwrap();
        let out = apply_noisy_circuit(&c, &c.input(InputState::Alternative).unwrap()).unwrap();
        assert!((out.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        let zero = c.input(InputState::Zero).unwrap();
        let out = apply_noisy_circuit(&c, &zero).unwrap();
        let u = c.ideal();
        assert!(max_diff(out.matrix(), &(&u * zero.matrix() * u.adjoint())) < 1e-12);
    }

    #[test]
    fn maximally_mixed_is_fixed() {
        let spec = NoisyCircuitSpec {
            n: 4,
            blocks: vec![BlockKind::Brickwork { depth: 3 }, BlockKind::Haar],
            kappa: 0.3,
            noise_after: Some(vec![0]),
            input: InputState::Null,
        };
        let c = spec.sample(&mut stream(2, &[])).unwrap();
        let mm = c.input(InputState::Null).unwrap();
        let out = apply_noisy_circuit(&c, &mm).unwrap();
        assert!(max_diff(out.matrix(), mm.matrix()) < 1e-12);
    }

    #[test]
    fn full_noise_mixes() {
        let spec = NoisyCircuitSpec::haar(3, 2, 1.0, InputState::Zero);
        let c = spec.sample(&mut stream(3, &[])).unwrap();
        let (out, purities) = apply_noisy_circuit_traced(&c, &c.input(InputState::Zero).unwrap()).unwrap();
        assert!((out.purity() - 0.125).abs() < 1e-12);
        assert!(purities.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn brickwork_block_is_unitary() {
        let spec = NoisyCircuitSpec {
            n: 4,
            blocks: vec![BlockKind::CoarseGrained { block: 2, depth: 2 }],
            kappa: 0.0,
            noise_after: None,
            input: InputState::Zero,
        };
        let c = spec.sample(&mut stream(4, &[])).unwrap();
        assert!(crate::qcore::state::unitarity_defect(&c.unitaries[0]) < 1e-12);
    }

    #[test]
    fn rejects_bad_placement() {
        let mut spec = NoisyCircuitSpec::haar(2, 1, 0.1, InputState::Zero);
        spec.noise_after = Some(vec![3]);
        assert!(spec.validate().is_err());
    }
}
