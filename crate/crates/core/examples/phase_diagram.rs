//! Edge-count power across lambda, printed as CSV.

use qlowdeg::biclique::{crossover, edge_count_threshold, phase_csv, phase_diagram, CopyRule, Detector, ScanCaps};

fn main() -> qlowdeg::Result<()> {
    let cells: Vec<_> = [2.0, 4.0, 8.0, 16.0, 32.0].iter().map(|&l| (32, 2, l)).collect();
    let rows = phase_diagram(&cells, CopyRule::EqualN, Detector::EdgeCount, 100, 3, ScanCaps::default())?;
    print!("{}", phase_csv(&rows));
    if let Some(x) = crossover(&rows, 0.5) {
        println!("# crossover {x:.2}, scale n^1/2 d^1/4 = {:.2}", edge_count_threshold(32, 2));
    }
    Ok(())
}
