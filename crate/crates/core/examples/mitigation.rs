//! Purity decay of noisy Haar circuits and the reduced-state audit.

use qlowdeg::mitigation::{purity_decay_check, purity_recursion, reduced_state_audit, InputState, NoisyCircuitSpec};
use qlowdeg::rng::stream;

fn main() -> qlowdeg::Result<()> {
    let (n, l, kappa) = (4, 3, 0.2);
    let r = purity_decay_check(n, l, kappa, 200, &mut stream(5, &[]))?;
    println!("layer means {:?}", r.layer_means);
    println!("exact       {:?}", purity_recursion(n, l, kappa, 1.0));
    println!("final {:.5} <= bound {:.5}: {}", r.mean, r.bound, r.pass);

    let spec = NoisyCircuitSpec::haar(n, 2, 0.3, InputState::Zero);
    let a = reduced_state_audit(&spec, &[0], 200, 0.0, 0.0, &mut stream(6, &[]))?;
    println!("exceedance {:.3} vs R^1/2 {:.3} at threshold {:.3}", a.exceedance, a.predicted_tail, a.threshold);
    Ok(())
}
