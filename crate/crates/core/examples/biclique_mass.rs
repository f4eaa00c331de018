//! Fourier mass of the planted-biclique likelihood ratio against the budget.

use qlowdeg::biclique::{fourier_mass, fourier_mass_total, low_degree_mass_budget, BicliqueInstance, LocalPlanGrid};

fn main() -> qlowdeg::Result<()> {
    let inst = BicliqueInstance::new(3, 2, 2.0, 3)?;
    let plan = LocalPlanGrid::computational(3, 3, 2);
    for w in [vec![(0, 0)], vec![(0, 0), (1, 1)], vec![(0, 0), (0, 1), (1, 0), (1, 1)]] {
        println!("mu_W{w:?} = {:.6e}", fourier_mass(&inst, &plan, &w)?);
    }
    for k in 1..=4 {
        println!("degree <= {k}: {:.6e} (budget {:.3e})", fourier_mass_total(&inst, &plan, k)?, low_degree_mass_budget(&inst, k, 8.0));
    }
    Ok(())
}
