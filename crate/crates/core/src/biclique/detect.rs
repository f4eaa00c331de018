use rand::Rng;
use serde::{Deserialize, Serialize};

use super::grid::{measure_grid, LocalPlanGrid};
use super::instance::{sample_secret, BicliqueInstance, PlantedSecret};
use crate::error::{invalid, Error, Result};
use crate::qcore::OutcomeRecord;

/// Default two-sided z for the edge-count detector.
pub const EDGE_Z: f64 = 1.4;
/// Default scan constant in `t t' p0 ± c (t t')^{3/4} √ln n`.
pub const SCAN_CONSTANT: f64 = 0.47;

#[derive(Clone, Debug, Serialize)]
pub struct Calibration {
    pub null_mean: f64,
    pub null_variance: f64,
    pub alt_mean: Option<f64>,
    pub alt_variance: Option<f64>,
    /// Number of elementary readouts entering the statistic.
    pub samples: usize,
}

/// `decision = statistic > threshold`.
#[derive(Clone, Debug, Serialize)]
pub struct DetectionResult {
    pub detector: Detector,
    pub statistic: f64,
    pub threshold: f64,
    pub decision: bool,
    pub calibration: Calibration,
}

impl DetectionResult {
    fn new(detector: Detector, statistic: f64, threshold: f64, calibration: Calibration) -> Self {
        Self { detector, statistic, threshold, decision: statistic > threshold, calibration }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Detector {
    EdgeCount,
    Swap,
    Scan,
}

impl Detector {
    pub fn name(self) -> &'static str {
        match self {
            Detector::EdgeCount => "edge-count",
            Detector::Swap => "swap",
            Detector::Scan => "scan",
        }
    }

    /// Grid point at which the default threshold is calibrated.
    pub fn default_instance(self) -> BicliqueInstance {
        let (n, lambda) = match self {
            Detector::EdgeCount => (64, 4.0),
            Detector::Swap => (16, 12.0),
            Detector::Scan => (12, 8.0),
        };
        BicliqueInstance { n, d: 2, lambda, m: n }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "edge-count" | "edge" => Ok(Detector::EdgeCount),
            "swap" => Ok(Detector::Swap),
            "scan" | "subgraph-scan" => Ok(Detector::Scan),
            other => Err(Error::Parse(format!("unknown detector '{other}' (edge-count, swap, scan)"))),
        }
    }
}

/// Acceptance probability `(d+1)/2d` of `Π = (I + SWAP)/2` on a pair that is
/// not fully planted.
pub fn swap_null_mean(d: usize) -> f64 {
    (d as f64 + 1.0) / (2.0 * d as f64)
}

/// `Var Z` under the null, `(2/mn)(d²-1)/4d²`.
pub fn swap_null_variance(inst: &BicliqueInstance) -> f64 {
    let d = inst.d as f64;
    2.0 / (inst.m * inst.n) as f64 * (d * d - 1.0) / (4.0 * d * d)
}

/// `ᾱ = (d+1)/2d + κ³(d-1)/2d`.
pub fn swap_alt_mean(inst: &BicliqueInstance) -> f64 {
    let d = inst.d as f64;
    swap_null_mean(inst.d) + inst.kappa().powi(3) * (d - 1.0) / (2.0 * d)
}

/// Exact `E_S E[Z²]` under the alternative, keeping the correlation between pairs
/// of the same copy through the shared mixture branch.
pub fn swap_second_moment(inst: &BicliqueInstance) -> f64 {
    let (m, p) = (inst.m as f64, (inst.n / 2) as f64);
    let k = inst.kappa();
    let q = k * k;
    let p0 = swap_null_mean(inst.d);
    let delta = 1.0 - p0;
    let total = m * p;
    let diag = total * (p0 + k * delta * q);
    let same_copy = m * p * (p - 1.0) * (p0 * p0 + 2.0 * k * p0 * delta * q + k * delta * delta * q * q);
    let same_pair = m * (m - 1.0) * p * (p0 * p0 + 2.0 * k * p0 * delta * q + k * k * delta * delta * q);
    let rest = m * (m - 1.0) * p * (p - 1.0) * (p0 * p0 + 2.0 * k * p0 * delta * q + k * k * delta * delta * q * q);
    (diag + same_copy + same_pair + rest) / (total * total)
}

/// Second moment as expanded in the proof of the SWAP protocol, which replaces
/// `E_S α²_{S,j}` by `κ²ᾱ² + (1-κ²)p0²` and ignores the shared branch.
pub fn swap_second_moment_expansion(inst: &BicliqueInstance) -> f64 {
    let (m, n) = (inst.m as f64, inst.n as f64);
    let k = inst.kappa();
    let a = swap_alt_mean(inst);
    let p0 = swap_null_mean(inst.d);
    a * a + 2.0 / (m * n) * (a - p0 * p0) + 4.0 / (m * n) * ((m - 1.0) / 2.0 * k * k - m / 2.0) * (a * a - p0 * p0)
}

/// Acceptance fraction of the pair measurements.
pub fn swap_statistic(accepts: &[bool]) -> f64 {
    if accepts.is_empty() {
        return 0.0;
    }
    accepts.iter().filter(|&&b| b).count() as f64 / accepts.len() as f64
}

/// `tr(Π (A ⊗ B)) = (tr A tr B + tr AB)/2` for unit-trace `A`, `B` given `tr AB`.
fn pair_acceptance(overlap: f64) -> f64 {
    0.5 * (1.0 + overlap)
}

/// Simulate `{Π, I-Π}` on the pairs `(2j, 2j+1)` of every copy.
pub fn swap_outcomes<R: Rng + ?Sized>(
    inst: &BicliqueInstance,
    secret: Option<&PlantedSecret>,
    rng: &mut R,
) -> Result<Vec<bool>> {
    if inst.n % 2 == 1 {
        return invalid(format!("SWAP protocol needs even n (got {})", inst.n));
    }
    let d = inst.d as f64;
    let p_mixed = pair_acceptance(1.0 / d);
    let p_full = pair_acceptance(1.0);
    let kappa = inst.kappa();
    let mut out = Vec::with_capacity(inst.m * inst.n / 2);
    for _ in 0..inst.m {
        let planted = secret.is_some() && rng.gen::<f64>() < kappa;
        for j in 0..inst.n / 2 {
            let full = match secret {
                Some(s) if planted => s.contains(2 * j) && s.contains(2 * j + 1),
                _ => false,
            };
            let p = if full { p_full } else { p_mixed };
            out.push(rng.gen::<f64>() < p);
        }
    }
    Ok(out)
}

pub fn swap_protocol<R: Rng + ?Sized>(
    inst: &BicliqueInstance,
    secret: Option<&PlantedSecret>,
    rng: &mut R,
) -> Result<DetectionResult> {
    let accepts = swap_outcomes(inst, secret, rng)?;
    let null_mean = swap_null_mean(inst.d);
    let alt_mean = swap_alt_mean(inst);
    let alt_var = swap_second_moment(inst) - alt_mean * alt_mean;
    Ok(DetectionResult::new(
        Detector::Swap,
        swap_statistic(&accepts),
        0.5 * (null_mean + alt_mean),
        Calibration {
            null_mean,
            null_variance: swap_null_variance(inst),
            alt_mean: Some(alt_mean),
            alt_variance: Some(alt_var),
            samples: accepts.len(),
        },
    ))
}

/// Probability that a uniform digit maps to bit 1 (`digit < floor(d/2)`).
pub fn edge_probability(d: usize) -> f64 {
    (d / 2) as f64 / d as f64
}

fn ones(grid: &OutcomeRecord) -> Vec<u8> {
    let cut = grid.base / 2;
    grid.digits.iter().map(|&x| u8::from(x < cut)).collect()
}

/// Two-sided edge count: `|#ones - nm p0| > z √(nm p0(1-p0))`.
pub fn edge_count_protocol(grid: &OutcomeRecord, z: f64) -> DetectionResult {
    let cells = grid.rows * grid.cols;
    let p0 = edge_probability(grid.base);
    let count: f64 = ones(grid).iter().map(|&b| b as f64).sum();
    let mean = cells as f64 * p0;
    let var = cells as f64 * p0 * (1.0 - p0);
    DetectionResult::new(
        Detector::EdgeCount,
        (count - mean).abs(),
        z * var.sqrt(),
        Calibration { null_mean: mean, null_variance: var, alt_mean: None, alt_variance: None, samples: cells },
    )
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ScanCaps {
    /// Rows (copies) in the scanned submatrix.
    pub t: usize,
    /// Columns (sites) in the scanned submatrix.
    pub t_prime: usize,
    pub constant: f64,
    /// Largest number of row subsets enumerated.
    pub max_row_subsets: usize,
}

impl Default for ScanCaps {
    fn default() -> Self {
        Self { t: 8, t_prime: 8, constant: SCAN_CONSTANT, max_row_subsets: 1 << 20 }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|i| (n - i) as f64 / (i + 1) as f64).product()
}

/// Brute-force scan over `t × t'` submatrices. For each row subset the extreme
/// column choices are the `t'` largest and smallest column sums, so only row
/// subsets are enumerated. The statistic is the largest `|ones - t t' p0|`
/// divided by `(t t')^{3/4} √ln n`; the threshold is the scan constant.
pub fn subgraph_scan(grid: &OutcomeRecord, caps: ScanCaps) -> Result<DetectionResult> {
    let (m, n) = (grid.rows, grid.cols);
    let ScanCaps { t, t_prime, constant, max_row_subsets } = caps;
    if t == 0 || t_prime == 0 || t > m || t_prime > n {
        return invalid(format!("scan sizes {t}x{t_prime} outside the {m}x{n} grid"));
    }
    if t > 12 || t_prime > 12 {
        return Err(Error::ResourceCap(format!("scan sizes {t}x{t_prime} exceed 12")));
    }
    if binomial(m, t) > max_row_subsets as f64 {
        return Err(Error::ResourceCap(format!("C({m},{t}) row subsets exceed {max_row_subsets}")));
    }
    let bits = ones(grid);
    let p0 = edge_probability(grid.base);
    let centre = (t * t_prime) as f64 * p0;
    let mut best: f64 = 0.0;
    let mut rows: Vec<usize> = (0..t).collect();
    let mut sums = vec![0u32; n];
    loop {
        sums.iter_mut().for_each(|s| *s = 0);
        for &r in &rows {
            for (c, s) in sums.iter_mut().enumerate() {
                *s += bits[r * n + c] as u32;
            }
        }
        sums.sort_unstable();
        let low: u32 = sums[..t_prime].iter().sum();
        let high: u32 = sums[n - t_prime..].iter().sum();
        best = best.max(high as f64 - centre).max(centre - low as f64);
        // next combination
        let mut i = t;
        while i > 0 && rows[i - 1] == m - t + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        rows[i - 1] += 1;
        for j in i..t {
            rows[j] = rows[j - 1] + 1;
        }
    }
    let scale = ((t * t_prime) as f64).powf(0.75) * (n.max(2) as f64).ln().sqrt();
    let cells = t * t_prime;
    Ok(DetectionResult::new(
        Detector::Scan,
        best / scale,
        constant,
        Calibration {
            null_mean: centre,
            null_variance: cells as f64 * p0 * (1.0 - p0),
            alt_mean: None,
            alt_variance: None,
            samples: m * n,
        },
    ))
}

/// Run a detector on a fresh draw: the alternative samples its own secret.
pub fn run_detector<R: Rng + ?Sized>(
    inst: &BicliqueInstance,
    detector: Detector,
    alternative: bool,
    scan: ScanCaps,
    rng: &mut R,
) -> Result<DetectionResult> {
    let secret = if alternative { Some(sample_secret(inst, rng)?) } else { None };
    match detector {
        Detector::Swap => swap_protocol(inst, secret.as_ref(), rng),
        Detector::EdgeCount => {
            let grid = measure_grid(inst, secret.as_ref(), &LocalPlanGrid::for_instance(inst), rng)?;
            Ok(edge_count_protocol(&grid, EDGE_Z))
        }
        Detector::Scan => {
            let grid = measure_grid(inst, secret.as_ref(), &LocalPlanGrid::for_instance(inst), rng)?;
            subgraph_scan(&grid, scan)
        }
    }
}
