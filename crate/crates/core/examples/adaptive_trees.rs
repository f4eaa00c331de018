//! Adaptive measurement trees: a basis switch conditioned on earlier outcomes.

use nalgebra::dmatrix;
use qlowdeg::ensembles::make_stabilizer_ensemble;
use qlowdeg::lowdeg::{adaptive_tree_advantage, AdaptivePlan, DecisionTree};
use qlowdeg::qcore::{ProjectiveMeasurement, QuditRegister, C64};
use qlowdeg::rng::stream;

fn main() -> qlowdeg::Result<()> {
    let reg = QuditRegister::qubits(1)?;
    let h = 1.0 / 2f64.sqrt();
    let hadamard = dmatrix![C64::new(h, 0.0), C64::new(h, 0.0); C64::new(h, 0.0), C64::new(-h, 0.0)];
    let z = ProjectiveMeasurement::computational(reg.clone());
    let x = ProjectiveMeasurement::new(reg.clone(), hadamard, "x")?;
    // Measure Z, then X if the first outcome was 1.
    let block = DecisionTree { measurement: 0, children: vec![DecisionTree::leaf(0), DecisionTree::leaf(1)] };
    let plan = AdaptivePlan::within_block(reg, vec![z, x], vec![block.clone(), block])?;
    let ens = make_stabilizer_ensemble(1)?;
    let r = adaptive_tree_advantage(&ens, &plan, 1, 2, &mut stream(0, &[]))?;
    println!("adaptive advantage {:.6}, bound {:.3e}, holds: {}", r.advantage.total, r.bound, r.holds);
    Ok(())
}
