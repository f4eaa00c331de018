//! Certify stabilizer states as an exact 3-design that fails at k = 4.

use qlowdeg::ensembles::{design_certify, make_stabilizer_ensemble, MomentMode};
use qlowdeg::rng::stream;

fn main() -> qlowdeg::Result<()> {
    let mut rng = stream(1, &[]);
    for n in 1..=2 {
        let ens = make_stabilizer_ensemble(n)?;
        for k in 2..=4 {
            let r = design_certify(&ens, k, MomentMode::Exact, &mut rng)?;
            println!("stabilizer n={n} k={k}: epsilon = {:.3e}", r.epsilon);
        }
    }
    let brick = qlowdeg::registry::Registry::default().ensemble("brickwork:n=2,L=4")?;
    let r = design_certify(&brick, 2, MomentMode::MonteCarlo { samples: 2000 }, &mut rng)?;
    println!("brickwork n=2 L=4 k=2: epsilon ~ {:.3} (sampling error {:.1e})", r.epsilon, r.sampling_error);
    Ok(())
}
