//! Degree-k advantage of local measurements, exact and sampled, with the
//! matching bound audit.

use qlowdeg::ensembles::make_stabilizer_ensemble;
use qlowdeg::lowdeg::{bound_audit, copywise_advantage, degree_advantage, AuditInstance, MeasurementPlan, Mode};
use qlowdeg::qcore::QuditRegister;
use qlowdeg::rng::stream;

fn main() -> qlowdeg::Result<()> {
    let mut rng = stream(7, &[]);
    let reg = QuditRegister::qubits(2)?;
    let ens = make_stabilizer_ensemble(2)?;
    let plan = MeasurementPlan::random_local(reg, 3, &mut rng)?;
    for k in 1..=3 {
        let exact = degree_advantage(&ens, &plan, k, Mode::Moment, &mut rng)?;
        let mc = degree_advantage(&ens, &plan, k, Mode::MonteCarlo { samples: 20_000 }, &mut rng)?;
        println!("k={k}: exact {:.6}, sampled {:.6} ± {:.1e}", exact.total, mc.total, mc.stderr.unwrap_or(0.0));
    }
    let cw = copywise_advantage(&ens, &plan, 1, 2, Mode::Enumeration, &mut rng)?;
    println!("copy-wise (D=1, k=2): {:.6} <= Hölder {:.6}", cw.total, cw.extras["holder_bound"]);
    let audit = bound_audit(AuditInstance::LocalMeasurements { ensemble: &ens, plan: &plan, k: 2, mode: Mode::Moment }, &mut rng)?;
    println!("{} -> {}", audit.inequality(), if audit.pass { "holds" } else { "violated" });
    Ok(())
}
