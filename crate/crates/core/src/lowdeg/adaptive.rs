//! Round-based adaptive protocols as explicit learning trees, evaluated exactly.

use serde::{Deserialize, Serialize};

use super::advantage::{copy_moment_statistic, AdvantageReport, DegreeSpec, PairMode};
use super::engine::{Mode, MAX_HISTORIES};
use super::fourier::{digit_transform, digits, enumerate_indices, IndexFilter, DEFAULT_INDEX_BUDGET};
use super::plan::MeasurementPlan;
use crate::ensembles::StateEnsemble;
use crate::error::{invalid, Error, Result};
use crate::qcore::{CVector, ProjectiveMeasurement, QuditRegister, C64};
use crate::rng::Stream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Adaptivity {
    WithinBlock,
    AmongBlock,
}

/// Per-copy node: the measurement to apply and one child per outcome.
#[derive(Clone, Debug)]
pub struct DecisionTree {
    pub measurement: usize,
    pub children: Vec<DecisionTree>,
}

impl DecisionTree {
    pub fn leaf(measurement: usize) -> Self {
        Self { measurement, children: Vec::new() }
    }

    /// Tree of depth `depth` that always applies `measurement`.
    pub fn constant(measurement: usize, depth: usize, outcomes: usize) -> Self {
        let children = if depth > 1 { vec![Self::constant(measurement, depth - 1, outcomes); outcomes] } else { Vec::new() };
        Self { measurement, children }
    }
}

/// Per-block node: measurements for the block's copies and one child per block outcome.
#[derive(Clone, Debug)]
pub struct BlockTree {
    pub measurements: Vec<usize>,
    pub children: Vec<BlockTree>,
}

/// Adaptive plan compiled to a rule `copy, outcome prefix -> measurement`.
#[derive(Clone, Debug)]
pub struct AdaptivePlan {
    pub register: QuditRegister,
    pub measurements: Vec<ProjectiveMeasurement>,
    pub m0: usize,
    pub m1: usize,
    pub adaptivity: Adaptivity,
    rule: Vec<Vec<usize>>,
}

impl AdaptivePlan {
    fn check_measurements(register: &QuditRegister, measurements: &[ProjectiveMeasurement]) -> Result<usize> {
        if measurements.is_empty() {
            return invalid("adaptive plan needs at least one measurement");
        }
        if register.uniform_dim().is_none() {
            return invalid("adaptive plans need a uniform local dimension");
        }
        for m in measurements {
            if m.register() != register {
                return Err(Error::Dimension("adaptive measurements act on the register without ancillas".into()));
            }
        }
        Ok(register.total_dim())
    }

    fn check_size(outcomes: usize, m: usize) -> Result<()> {
        outcomes
            .checked_pow(m as u32)
            .filter(|&t| t <= MAX_HISTORIES)
            .map(|_| ())
            .ok_or_else(|| Error::ResourceCap(format!("{outcomes}^{m} leaves exceed {MAX_HISTORIES}")))
    }

    pub fn within_block(register: QuditRegister, measurements: Vec<ProjectiveMeasurement>, trees: Vec<DecisionTree>) -> Result<Self> {
        let outcomes = Self::check_measurements(&register, &measurements)?;
        let m1 = trees.len();
        if m1 == 0 {
            return invalid("within-block plan needs at least one block");
        }
        let m0 = depth(&trees[0]);
        let m = m0 * m1;
        Self::check_size(outcomes, m)?;
        for t in &trees {
            validate_tree(t, m0, outcomes, measurements.len())?;
        }
        let mut rule: Vec<Vec<usize>> = (0..m).map(|j| vec![0; outcomes.pow(j as u32)]).collect();
        for (j, slots) in rule.iter_mut().enumerate() {
            let (b, local) = (j / m0, j % m0);
            for (prefix, slot) in slots.iter_mut().enumerate() {
                let outs = digits(outcomes, j, prefix);
                let mut node = &trees[b];
                for &x in &outs[b * m0..j] {
                    node = &node.children[x];
                }
                debug_assert_eq!(depth(node), m0 - local);
                *slot = node.measurement;
            }
        }
        Ok(Self { register, measurements, m0, m1, adaptivity: Adaptivity::WithinBlock, rule })
    }

    pub fn among_block(register: QuditRegister, measurements: Vec<ProjectiveMeasurement>, m0: usize, m1: usize, tree: BlockTree) -> Result<Self> {
        let outcomes = Self::check_measurements(&register, &measurements)?;
        if m0 == 0 || m1 == 0 {
            return invalid("among-block plan needs nonempty blocks");
        }
        let m = m0 * m1;
        Self::check_size(outcomes, m)?;
        validate_block_tree(&tree, m0, m1, outcomes.pow(m0 as u32), measurements.len())?;
        let block_outcomes = outcomes.pow(m0 as u32);
        let mut rule: Vec<Vec<usize>> = (0..m).map(|j| vec![0; outcomes.pow(j as u32)]).collect();
        for (j, slots) in rule.iter_mut().enumerate() {
            let b = j / m0;
            for (prefix, slot) in slots.iter_mut().enumerate() {
                // outcomes of completed blocks, as block-outcome digits
                let done = prefix / outcomes.pow((j - b * m0) as u32);
                let mut node = &tree;
                for x in digits(block_outcomes, b, done) {
                    node = &node.children[x];
                }
                *slot = node.measurements[j % m0];
            }
        }
        Ok(Self { register, measurements, m0, m1, adaptivity: Adaptivity::AmongBlock, rule })
    }

    /// Degenerate tree that reproduces a nonadaptive plan copy by copy.
    pub fn from_plan(plan: &MeasurementPlan, m0: usize, adaptivity: Adaptivity) -> Result<Self> {
        if plan.ancilla != 0 {
            return invalid("adaptive plans do not support ancillas");
        }
        let m = plan.copies();
        if m0 == 0 || m % m0 != 0 {
            return invalid(format!("{m} copies do not split into blocks of {m0}"));
        }
        let m1 = m / m0;
        let outcomes = plan.outcomes();
        let meas = plan.measurements.clone();
        match adaptivity {
            Adaptivity::WithinBlock => {
                let trees = (0..m1).map(|b| chain((b * m0..(b + 1) * m0).collect(), outcomes)).collect();
                Self::within_block(plan.register.clone(), meas, trees)
            }
            Adaptivity::AmongBlock => {
                let tree = block_chain(m0, 0, m1, outcomes.pow(m0 as u32));
                Self::among_block(plan.register.clone(), meas, m0, m1, tree)
            }
        }
    }

    pub fn copies(&self) -> usize {
        self.m0 * self.m1
    }

    pub fn outcomes(&self) -> usize {
        self.register.total_dim()
    }

    /// Measurement id for copy `j` after outcomes `prefix` (copy 0 most significant).
    pub fn choice(&self, j: usize, prefix: usize) -> usize {
        self.rule[j][prefix]
    }

    /// Measurement ids along the path of a full history.
    pub fn path(&self, history: usize) -> Vec<usize> {
        let n = self.outcomes();
        let m = self.copies();
        (0..m).map(|j| self.rule[j][history / n.pow((m - j) as u32)]).collect()
    }
}

fn chain(ids: Vec<usize>, outcomes: usize) -> DecisionTree {
    let rest: Vec<usize> = ids[1..].to_vec();
    let children = if rest.is_empty() { Vec::new() } else { vec![chain(rest, outcomes); outcomes] };
    DecisionTree { measurement: ids[0], children }
}

fn block_chain(m0: usize, b: usize, m1: usize, block_outcomes: usize) -> BlockTree {
    let children = if b + 1 < m1 { vec![block_chain(m0, b + 1, m1, block_outcomes); block_outcomes] } else { Vec::new() };
    BlockTree { measurements: (b * m0..(b + 1) * m0).collect(), children }
}

fn depth(t: &DecisionTree) -> usize {
    1 + t.children.first().map_or(0, depth)
}

fn validate_tree(t: &DecisionTree, levels: usize, outcomes: usize, count: usize) -> Result<()> {
    if t.measurement >= count {
        return invalid(format!("tree references measurement {} of {count}", t.measurement));
    }
    let want = if levels > 1 { outcomes } else { 0 };
    if t.children.len() != want {
        return invalid(format!("tree node has {} children, expected {want}", t.children.len()));
    }
    t.children.iter().try_for_each(|c| validate_tree(c, levels - 1, outcomes, count))
}

fn validate_block_tree(t: &BlockTree, m0: usize, levels: usize, block_outcomes: usize, count: usize) -> Result<()> {
    if t.measurements.len() != m0 || t.measurements.iter().any(|&i| i >= count) {
        return invalid("block node must list one valid measurement per copy");
    }
    let want = if levels > 1 { block_outcomes } else { 0 };
    if t.children.len() != want {
        return invalid(format!("block node has {} children, expected {want}", t.children.len()));
    }
    t.children.iter().try_for_each(|c| validate_block_tree(c, m0, levels - 1, block_outcomes, count))
}

/// Leaf distribution `E_ρ Π_j ⟨φ_{s_j}|ρ|φ_{s_j}⟩` with bases chosen along each path.
pub fn tree_distribution(ens: &StateEnsemble, plan: &AdaptivePlan) -> Result<Vec<f64>> {
    if ens.register != plan.register {
        return Err(Error::Dimension("ensemble and plan registers differ".into()));
    }
    let n = plan.outcomes();
    let m = plan.copies();
    let total = n.pow(m as u32);
    if let Some(support) = ens.support() {
        let mut out = vec![0.0; total];
        for (w, s) in support {
            let rho = s.density();
            let probs: Vec<Vec<f64>> =
                plan.measurements.iter().map(|meas| crate::qcore::born_probabilities(&rho, meas)).collect::<Result<_>>()?;
            for (h, slot) in out.iter_mut().enumerate() {
                let outs = digits(n, m, h);
                *slot += w * plan.path(h).iter().zip(&outs).map(|(&id, &x)| probs[id][x]).product::<f64>();
            }
        }
        return Ok(out);
    }
    let moment = ens
        .exact_moment(m)
        .ok_or_else(|| Error::InvalidArgument(format!("ensemble {} has neither finite support nor exact moments", ens.name)))??;
    let mut out = vec![0.0; total];
    for (h, slot) in out.iter_mut().enumerate() {
        let outs = digits(n, m, h);
        let mut phi = CVector::from_element(1, C64::new(1.0, 0.0));
        for (&id, &x) in plan.path(h).iter().zip(&outs) {
            phi = phi.kronecker(&plan.measurements[id].rotation().column(x).into_owned());
        }
        *slot = phi.dotc(&(&moment * &phi)).re.max(0.0);
    }
    Ok(out)
}

/// `N p(x)` truncated to characters of weight `≤ trunc`.
fn truncated_ratio(p: &[f64], d: usize, sites: usize, trunc: usize) -> Vec<f64> {
    let pc: Vec<C64> = p.iter().map(|&x| C64::new(x, 0.0)).collect();
    let c = digit_transform(&pc, d, sites);
    let kept: Vec<C64> = c
        .iter()
        .enumerate()
        .map(|(a, v)| if digits(d, sites, a).iter().filter(|&&x| x != 0).count() <= trunc { v.conj() } else { C64::new(0.0, 0.0) })
        .collect();
    digit_transform(&kept, d, sites).iter().map(|z| z.re).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct AdaptiveReport {
    /// Product-then-projection: the leaf ratio projected onto copy-wise degree `(D, k)`.
    pub advantage: AdvantageReport,
    /// Projection-then-product: per-copy truncations multiplied along each path, then
    /// restricted to the same index set. Finite ensembles only.
    pub projection_then_product: Option<f64>,
    pub adaptivity: Adaptivity,
    pub epsilon: f64,
    pub m_constant: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Exact copy-wise degree-`(D, k)` advantage of an adaptive plan with the matching
/// round-based bound.
pub fn adaptive_tree_advantage(ens: &StateEnsemble, plan: &AdaptivePlan, d_per_copy: usize, k: usize, rng: &mut Stream) -> Result<AdaptiveReport> {
    let d = plan.register.uniform_dim().expect("checked at construction");
    let sites = plan.register.num_sites();
    let m = plan.copies();
    let p = tree_distribution(ens, plan)?;
    let pc: Vec<C64> = p.iter().map(|&x| C64::new(x, 0.0)).collect();
    let coeffs = digit_transform(&pc, d, m * sites);
    let filter = IndexFilter::copywise(d_per_copy, k);
    let indices = enumerate_indices(m, sites, d, filter, DEFAULT_INDEX_BUDGET)?;
    let flat = |idx: &super::fourier::FourierIndex| {
        let mut alpha = vec![0; m * sites];
        for (&(c, s), &e) in idx.positions.iter().zip(&idx.exponents) {
            alpha[c * sites + s] = e;
        }
        alpha.iter().fold(0, |acc, &a| acc * d + a)
    };
    let values: Vec<C64> = indices.iter().map(|i| coeffs[flat(i)]).collect();
    let zeros = vec![0.0; values.len()];
    let advantage = AdvantageReport::assemble(DegreeSpec::CopyWise { d: d_per_copy, k }, &indices, &values, &zeros, Mode::Enumeration);

    let projection_then_product = match ens.support() {
        Some(support) => {
            let n = plan.outcomes();
            let mut g = vec![0.0; p.len()];
            for (w, s) in support {
                let rho = s.density();
                let trunc: Vec<Vec<f64>> = plan
                    .measurements
                    .iter()
                    .map(|meas| Ok(truncated_ratio(&crate::qcore::born_probabilities(&rho, meas)?, d, sites, d_per_copy)))
                    .collect::<Result<_>>()?;
                for (h, slot) in g.iter_mut().enumerate() {
                    let outs = digits(n, m, h);
                    *slot += w * plan.path(h).iter().zip(&outs).map(|(&id, &x)| trunc[id][x]).product::<f64>();
                }
            }
            let scale = (n as f64).powi(m as i32);
            let gc: Vec<C64> = g.iter().map(|&x| C64::new(x / scale, 0.0)).collect();
            let gt = digit_transform(&gc, d, m * sites);
            Some(indices.iter().map(|i| gt[flat(i)].norm_sqr()).sum())
        }
        None => None,
    };

    let (epsilon, m_constant, bound) = round_bound(ens, plan, d_per_copy, k, rng)?;
    let holds = advantage.total <= bound * (1.0 + 1e-12) + 1e-12;
    Ok(AdaptiveReport { advantage, projection_then_product, adaptivity: plan.adaptivity, epsilon, m_constant, bound, holds })
}

fn factorial_f64(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `(ε, M, rhs)` of the within-block or among-block bound, with `ε` maximized over
/// the plan's measurements.
fn round_bound(ens: &StateEnsemble, plan: &AdaptivePlan, d_per_copy: usize, k: usize, rng: &mut Stream) -> Result<(f64, f64, f64)> {
    let (m0, m1) = (plan.m0 as f64, plan.m1 as f64);
    let kf = k as f64;
    let power = match plan.adaptivity {
        Adaptivity::WithinBlock => 2 * k * plan.m0,
        Adaptivity::AmongBlock => 2 * k,
    };
    let mode = if ens.support().is_some() { PairMode::Exact } else { PairMode::MonteCarlo { pairs: 4096 } };
    let mut epsilon: f64 = 0.0;
    for meas in &plan.measurements {
        let single = MeasurementPlan::repeated(plan.register.clone(), meas.clone(), 1)?;
        let e = copy_moment_statistic(ens, &single, power, Some(d_per_copy), mode, rng)?;
        epsilon = epsilon.max(e.value.max(0.0));
    }
    let (mc, bound) = match plan.adaptivity {
        Adaptivity::WithinBlock => {
            let mc = 2.0 * factorial_f64(2 * (k * plan.m0).saturating_sub(1));
            let pre = kf * 2f64.powf(kf) * m1.powf(kf) * kf * kf * (kf * m0).powf(kf * kf) * mc;
            (mc, if epsilon == 0.0 { 0.0 } else { pre * epsilon.powf(1.0 / (2.0 * kf * m0)) })
        }
        Adaptivity::AmongBlock => {
            let mc = 2.0 * factorial_f64(2 * plan.m1);
            let m = m0 * m1;
            let pre = m1 * kf * kf * m.powf(kf) * mc.powf(kf * m1) * kf.powf(2.0 * (m1 - 1.0)) * m0.powf(2.0 * kf * (m1 - 1.0));
            (mc, if epsilon == 0.0 { 0.0 } else { pre * epsilon.sqrt() })
        }
    };
    Ok((epsilon, mc, bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::make_stabilizer_ensemble;
    use crate::lowdeg::advantage::copywise_advantage;
    use crate::lowdeg::fourier::character;
    use crate::qcore::CMatrix;
    use crate::rng::stream;

    fn hadamard() -> CMatrix {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_row_slice(2, 2, &[h, h, h, -h].map(|x| C64::new(x, 0.0)))
    }

    #[test]
    fn degenerate_tree_matches_nonadaptive() {
        let mut rng = stream(12, &[]);
        let reg = QuditRegister::qubits(1).unwrap();
        let plan = MeasurementPlan::random_local(reg.clone(), 4, &mut rng).unwrap();
        let ens = make_stabilizer_ensemble(1).unwrap();
        let flat = copywise_advantage(&ens, &plan, 1, 2, Mode::Enumeration, &mut rng).unwrap();
        for a in [Adaptivity::WithinBlock, Adaptivity::AmongBlock] {
            let tree = AdaptivePlan::from_plan(&plan, 2, a).unwrap();
            let r = adaptive_tree_advantage(&ens, &tree, 1, 2, &mut rng).unwrap();
            assert!((r.advantage.total - flat.total).abs() < 1e-10);
            assert!((r.projection_then_product.unwrap() - flat.total).abs() < 1e-10);
            assert!(r.holds);
        }
    }

    #[test]
    fn two_basis_tree_matches_direct_summation() {
        let reg = QuditRegister::qubits(1).unwrap();
        let z = ProjectiveMeasurement::computational(reg.clone());
        let x = ProjectiveMeasurement::new(reg.clone(), hadamard(), "x").unwrap();
        // switch to X after outcome 1, stay in Z after 0
        let block = DecisionTree { measurement: 0, children: vec![DecisionTree::leaf(0), DecisionTree::leaf(1)] };
        let plan = AdaptivePlan::within_block(reg.clone(), vec![z, x], vec![block.clone(), block]).unwrap();
        let ens = make_stabilizer_ensemble(1).unwrap();
        let r = adaptive_tree_advantage(&ens, &plan, 1, 2, &mut stream(0, &[])).unwrap();

        let mut oracle = 0.0;
        for t in 1u32..16 {
            if t.count_ones() > 2 {
                continue;
            }
            let mut coef = 0.0;
            for h in 0..16usize {
                let s: Vec<usize> = (0..4).map(|j| (h >> (3 - j)) & 1).collect();
                let ids = [0, if s[0] == 1 { 1 } else { 0 }, 0, if s[2] == 1 { 1 } else { 0 }];
                let mut p = 0.0;
                for (w, st) in ens.support().unwrap() {
                    let rho = st.density();
                    let mut prod = *w;
                    for j in 0..4 {
                        let probs = crate::qcore::born_probabilities(&rho, &plan.measurements[ids[j]]).unwrap();
                        prod *= probs[s[j]];
                    }
                    p += prod;
                }
                let chi = character(2, (0..4).filter(|j| t >> (3 - j) & 1 == 1).map(|j| (1, s[j]))).re;
                coef += p * chi;
            }
            oracle += coef * coef;
        }
        assert!((r.advantage.total - oracle).abs() < 1e-10);
    }

    #[test]
    fn null_ensemble_gives_zero() {
        let reg = QuditRegister::qubits(1).unwrap();
        let mut rng = stream(3, &[]);
        let plan = MeasurementPlan::random_local(reg.clone(), 2, &mut rng).unwrap();
        let tree = AdaptivePlan::from_plan(&plan, 1, Adaptivity::AmongBlock).unwrap();
        let r = adaptive_tree_advantage(&StateEnsemble::maximally_mixed(reg), &tree, 1, 2, &mut rng).unwrap();
        assert!(r.advantage.total.abs() < 1e-14);
        assert!(r.holds);
    }

    #[test]
    fn among_block_rule_uses_previous_blocks_only() {
        let reg = QuditRegister::qubits(1).unwrap();
        let z = ProjectiveMeasurement::computational(reg.clone());
        let x = ProjectiveMeasurement::new(reg.clone(), hadamard(), "x").unwrap();
        let leaf = |i| BlockTree { measurements: vec![i, i], children: vec![] };
        let tree = BlockTree { measurements: vec![0, 0], children: vec![leaf(0), leaf(1), leaf(1), leaf(0)] };
        let plan = AdaptivePlan::among_block(reg, vec![z, x], 2, 2, tree).unwrap();
        assert_eq!(plan.path(0b0100), vec![0, 0, 1, 1]);
        assert_eq!(plan.path(0b1100), vec![0, 0, 0, 0]);
        assert_eq!(plan.path(0b1000), vec![0, 0, 1, 1]);
    }
}
