use serde::Serialize;

use super::circuit::{apply_noisy_circuit, InputState, NoisyCircuitSpec};
use super::purity::r_bound;
use crate::ensembles::{Sample, StateEnsemble};
use crate::error::{invalid, Result};
use crate::lowdeg::{degree_advantage, AdvantageReport, MeasurementPlan, Mode};
use crate::qcore::QuditRegister;
use crate::rng::Stream;

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    pub advantage: AdvantageReport,
    /// Number of Fourier indices of degree `1..=k`; each squared coefficient is
    /// at most one for qubit readouts.
    pub index_count: usize,
    /// `total / index_count`, equal to one for a point-mass alternative.
    pub normalized: f64,
    pub max_coefficient: f64,
    /// `ε = m 2^{k/2} R(k)^{1/4} + 2 m R(k)^{1/2}` from the reduced-state bound.
    pub local_epsilon: f64,
    /// `k (mn)^k ε²`.
    pub predicted_budget: f64,
    pub within_budget: bool,
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Degree-`k` advantage of the plan for the alternative `Φ̃_C ∘ C†(|0̄⟩⟨0̄|)`
/// (one circuit per trial) against `I/2^n`.
pub fn hypothesis_test_sim(
    spec: &NoisyCircuitSpec,
    plan: &MeasurementPlan,
    k: usize,
    trials: usize,
    rng: &mut Stream,
) -> Result<HypothesisReport> {
    spec.validate()?;
    if trials == 0 {
        return invalid("hypothesis test needs at least one circuit");
    }
    let reg = QuditRegister::qubits(spec.n)?;
    if plan.register != reg {
        return invalid("plan register does not match the circuit");
    }
    let states = (0..trials)
        .map(|_| {
            let c = spec.sample(rng)?;
            Ok(Sample::Mixed(apply_noisy_circuit(&c, &c.input(InputState::Alternative)?)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let ens = StateEnsemble::uniform("noisy-circuit", reg, states)?.with_param("kappa", spec.kappa);
    let advantage = degree_advantage(&ens, plan, k, Mode::Moment, rng)?;
    let positions = plan.copies() * spec.n;
    let index_count: usize = (1..=k.min(positions)).map(|t| binomial(positions, t)).sum();
    let max_coefficient = advantage.coefficients.iter().map(|c| c.value_sq).fold(0.0, f64::max);
    let m = plan.copies() as f64;
    let noise_layers = spec.noise_after.as_ref().map_or(spec.blocks.len(), |v| v.len());
    let r = r_bound(k.min(spec.n), spec.n, noise_layers, spec.kappa, 0.0, 0.0);
    let local_epsilon = m * 2f64.powf(k as f64 / 2.0) * r.powf(0.25) + 2.0 * m * r.sqrt();
    let predicted_budget = k as f64 * (positions as f64).powi(k as i32) * local_epsilon * local_epsilon;
    Ok(HypothesisReport {
        normalized: if index_count > 0 { advantage.total / index_count as f64 } else { 0.0 },
        within_budget: advantage.total <= predicted_budget,
        advantage,
        index_count,
        max_coefficient,
        local_epsilon,
        predicted_budget,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn extremes() {
        let reg = QuditRegister::qubits(2).unwrap();
        let plan = MeasurementPlan::computational(reg, 2).unwrap();
        let clean = NoisyCircuitSpec::haar(2, 2, 0.0, InputState::Alternative);
        let r = hypothesis_test_sim(&clean, &plan, 1, 5, &mut stream(1, &[])).unwrap();
        assert!((r.normalized - 1.0).abs() < 1e-10);
        let dead = NoisyCircuitSpec::haar(2, 2, 1.0, InputState::Alternative);
        let r = hypothesis_test_sim(&dead, &plan, 2, 5, &mut stream(1, &[])).unwrap();
        assert!(r.advantage.total.abs() < 1e-12);
    }
}
