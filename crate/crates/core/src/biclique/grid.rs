use rand::Rng;
use serde::Serialize;

use super::instance::{BicliqueInstance, PlantedSecret};
use crate::error::{invalid, Result};
use crate::haar::haar_unitary;
use crate::qcore::state::unitarity_defect;
use crate::qcore::{sample_outcome, CMatrix, OutcomeRecord};

/// One `d`-dimensional orthonormal basis (as unitary columns) per `(copy, site)`.
#[derive(Clone, Debug)]
pub struct LocalPlanGrid {
    pub m: usize,
    pub n: usize,
    pub d: usize,
    bases: Vec<CMatrix>,
    computational: bool,
}

impl LocalPlanGrid {
    pub fn new(m: usize, n: usize, d: usize, bases: Vec<CMatrix>) -> Result<Self> {
        if bases.len() != m * n {
            return invalid(format!("{} bases for a {m}x{n} grid", bases.len()));
        }
        for (i, b) in bases.iter().enumerate() {
            if b.nrows() != d || b.ncols() != d {
                return invalid(format!("basis {i} is not {d}x{d}"));
            }
            let defect = unitarity_defect(b);
            if defect > 1e-10 {
                return invalid(format!("basis {i} is not unitary (deviation {defect:.2e})"));
            }
        }
        Ok(Self { m, n, d, bases, computational: false })
    }

    pub fn computational(m: usize, n: usize, d: usize) -> Self {
        Self { m, n, d, bases: vec![CMatrix::identity(d, d); m * n], computational: true }
    }

    /// Independent Haar bases at every position.
    pub fn random<R: Rng + ?Sized>(m: usize, n: usize, d: usize, rng: &mut R) -> Self {
        let bases = (0..m * n).map(|_| haar_unitary(d, rng)).collect();
        Self { m, n, d, bases, computational: false }
    }

    /// The same basis at every position.
    pub fn uniform(m: usize, n: usize, basis: CMatrix) -> Result<Self> {
        let d = basis.nrows();
        Self::new(m, n, d, vec![basis; m * n])
    }

    pub fn for_instance(inst: &BicliqueInstance) -> Self {
        Self::computational(inst.m, inst.n, inst.d)
    }

    pub fn basis(&self, copy: usize, site: usize) -> &CMatrix {
        &self.bases[copy * self.n + site]
    }

    pub fn is_computational(&self) -> bool {
        self.computational
    }
}

/// Sample the `m × n` readout grid. Each copy independently takes the planted
/// branch with probability `κ`; there, sites in `S` follow the Born rule of `ρ`
/// and every other digit is uniform.
pub fn measure_grid<R: Rng + ?Sized>(
    inst: &BicliqueInstance,
    secret: Option<&PlantedSecret>,
    plan: &LocalPlanGrid,
    rng: &mut R,
) -> Result<OutcomeRecord> {
    if plan.m != inst.m || plan.n != inst.n || plan.d != inst.d {
        return invalid("plan grid does not match the instance");
    }
    if let Some(s) = secret {
        if s.planted.len() != inst.n || s.d() != inst.d {
            return invalid("secret does not match the instance");
        }
    }
    let d = inst.d;
    let kappa = inst.kappa();
    let mut out = OutcomeRecord::zeros(inst.m, inst.n, d);
    let shared = secret.filter(|_| plan.is_computational()).map(|s| s.born(plan.basis(0, 0)));
    for c in 0..inst.m {
        let planted = secret.is_some() && rng.gen::<f64>() < kappa;
        for i in 0..inst.n {
            let digit = match secret {
                Some(s) if planted && s.contains(i) => match &shared {
                    Some(p) => sample_outcome(p, rng),
                    None => sample_outcome(&s.born(plan.basis(c, i)), rng),
                },
                _ => rng.gen_range(0..d),
            };
            out.set(c, i, digit);
        }
    }
    Ok(out)
}

/// Cell and pair-correlation summary of a batch of grids.
#[derive(Clone, Debug, Serialize)]
pub struct GridMarginals {
    /// Frequency of each digit at each cell, `[cell][digit]`.
    pub cells: Vec<Vec<f64>>,
    pub samples: usize,
}

impl GridMarginals {
    pub fn from_records(records: &[OutcomeRecord]) -> Self {
        let first = &records[0];
        let mut cells = vec![vec![0.0; first.base]; first.rows * first.cols];
        for r in records {
            for (cell, &x) in r.digits.iter().enumerate() {
                cells[cell][x] += 1.0;
            }
        }
        let total = records.len() as f64;
        cells.iter_mut().flatten().for_each(|v| *v /= total);
        Self { cells, samples: records.len() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biclique::instance::sample_secret;
    use crate::qcore::{PureState, QuditRegister};
    use crate::rng::stream;

    #[test]
    fn null_marginals_uniform() {
        let inst = BicliqueInstance::new(3, 3, 1.0, 2).unwrap();
        let plan = LocalPlanGrid::for_instance(&inst);
        let mut rng = stream(5, &[]);
        let recs: Vec<_> = (0..10_000).map(|_| measure_grid(&inst, None, &plan, &mut rng).unwrap()).collect();
        let marg = GridMarginals::from_records(&recs);
        let sd = (1.0 / 3.0 * 2.0 / 3.0 / 10_000f64).sqrt();
        for cell in &marg.cells {
            for &p in cell {
                assert!((p - 1.0 / 3.0).abs() < 4.0 * sd);
            }
        }
    }

    #[test]
    fn full_plant_reads_rho() {
        let inst = BicliqueInstance::new(4, 2, 4.0, 3).unwrap();
        let rho = PureState::basis(QuditRegister::new(vec![2]).unwrap(), 0).unwrap();
        let s = PlantedSecret::new(rho, vec![true; 4]).unwrap();
        let g = measure_grid(&inst, Some(&s), &LocalPlanGrid::for_instance(&inst), &mut stream(1, &[])).unwrap();
        assert!(g.digits.iter().all(|&x| x == 0));
    }

    #[test]
    fn random_plan_is_unitary() {
        let mut rng = stream(2, &[]);
        let plan = LocalPlanGrid::random(2, 2, 3, &mut rng);
        assert!(LocalPlanGrid::new(2, 2, 3, plan.bases.clone()).is_ok());
        let inst = BicliqueInstance::new(2, 3, 1.0, 2).unwrap();
        let s = sample_secret(&inst, &mut rng).unwrap();
        let g = measure_grid(&inst, Some(&s), &plan, &mut rng).unwrap();
        assert!(g.digits.iter().all(|&x| x < 3));
    }
}
