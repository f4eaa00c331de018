use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::detect::{run_detector, Detector, ScanCaps};
use super::instance::BicliqueInstance;
use crate::error::Result;
use crate::rng::stream;

/// How the copy count follows the qudit count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CopyRule {
    EqualN,
    Fixed(usize),
}

impl CopyRule {
    pub fn copies(self, n: usize) -> usize {
        match self {
            CopyRule::EqualN => n,
            CopyRule::Fixed(m) => m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseRow {
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub m: usize,
    pub detector: Detector,
    pub trials: usize,
    pub power: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
}

/// 95% Wilson score interval for `successes / trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Fraction of `trials` draws on which the detector fires. Trial `j` of cell
/// `cell` uses the stream `(seed, cell, j)`.
pub fn detection_rate(
    inst: &BicliqueInstance,
    detector: Detector,
    alternative: bool,
    trials: usize,
    seed: u64,
    cell: u64,
    scan: ScanCaps,
) -> Result<usize> {
    let hits: Result<Vec<bool>> = (0..trials)
        .into_par_iter()
        .map(|j| {
            let mut rng = stream(seed, &[cell, u64::from(alternative), j as u64]);
            Ok(run_detector(inst, detector, alternative, scan, &mut rng)?.decision)
        })
        .collect();
    Ok(hits?.into_iter().filter(|&h| h).count())
}

/// Empirical power on each `(n, d, λ)` cell, in the given order.
pub fn phase_diagram(
    cells: &[(usize, usize, f64)],
    copies: CopyRule,
    detector: Detector,
    trials: usize,
    seed: u64,
    scan: ScanCaps,
) -> Result<Vec<PhaseRow>> {
    if trials == 0 {
        return Ok(Vec::new());
    }
    cells
        .iter()
        .enumerate()
        .map(|(idx, &(n, d, lambda))| {
            let inst = BicliqueInstance::new(n, d, lambda, copies.copies(n))?;
            let hits = detection_rate(&inst, detector, true, trials, seed, idx as u64, scan)?;
            let (ci_low, ci_high) = wilson_interval(hits, trials);
            Ok(PhaseRow {
                n,
                d,
                lambda,
                m: inst.m,
                detector,
                trials,
                power: hits as f64 / trials as f64,
                ci_low,
                ci_high,
                seed,
            })
        })
        .collect()
}

/// `λ` at which the power curve first crosses `level`, interpolated linearly in
/// `log λ` between neighbouring rows (rows sorted by `λ`).
pub fn crossover(rows: &[PhaseRow], level: f64) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.lambda, r.power)).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.windows(2).find_map(|w| {
        let ((l0, p0), (l1, p1)) = (w[0], w[1]);
        if p0 < level && p1 >= level && l0 > 0.0 {
            let f = (level - p0) / (p1 - p0);
            Some((l0.ln() + f * (l1.ln() - l0.ln())).exp())
        } else {
            None
        }
    })
}

/// Predicted edge-count threshold `n^{1/2} d^{1/4}`.
pub fn edge_count_threshold(n: usize, d: usize) -> f64 {
    (n as f64).sqrt() * (d as f64).powf(0.25)
}

/// `%.6g`-style formatting.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x == 0.0 { "0".into() } else { format!("{x}") };
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..6).contains(&exp) {
        let s = format!("{:.5e}", x);
        let (mant, e) = s.split_once('e').expect("exponent");
        return format!("{}e{}", trim(mant), e);
    }
    let decimals = (5 - exp).max(0) as usize;
    trim(&format!("{:.*}", decimals, x)).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub const PHASE_HEADER: &str = "n,d,lambda,m,detector,trials,power,ci_low,ci_high,seed";

pub fn phase_csv(rows: &[PhaseRow]) -> String {
    let mut out = String::from(PHASE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.d,
            sig6(r.lambda),
            r.m,
            r.detector.name(),
            r.trials,
            sig6(r.power),
            sig6(r.ci_low),
            sig6(r.ci_high),
            r.seed
        ));
    }
    out
}
