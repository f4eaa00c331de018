//! Run the three planted-biclique detectors on null and planted draws.

use qlowdeg::biclique::{run_detector, Detector, ScanCaps};
use qlowdeg::rng::stream;

fn main() -> qlowdeg::Result<()> {
    for det in [Detector::EdgeCount, Detector::Swap, Detector::Scan] {
        let inst = det.default_instance().with_lambda(det.default_instance().n as f64);
        let mut rng = stream(11, &[]);
        let null = run_detector(&inst, det, false, ScanCaps::default(), &mut rng)?;
        let alt = run_detector(&inst, det, true, ScanCaps::default(), &mut rng)?;
        println!(
            "{:<10} n={} m={} lambda={}: null {:.4} (fires {}), planted {:.4} (fires {}), threshold {:.4}",
            det.name(),
            inst.n,
            inst.m,
            inst.lambda,
            null.statistic,
            null.decision,
            alt.statistic,
            alt.decision,
            alt.threshold
        );
    }
    Ok(())
}
