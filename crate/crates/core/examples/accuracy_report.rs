//! Per-group and pooled accuracy intervals over the published point pairs,
//! plus a small measurement file resolved against its own simulation column.
//!
//! ```text
//! cargo run -p morphsim --example accuracy_report
//! ```

use morphsim::accuracy::{
    confidence_interval, pair_error, published_pairs, AccuracyReport, ErrorBasis, PointPair, ReportOptions,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pairs = published_pairs();
    let report = AccuracyReport::build(&pairs, &ReportOptions::default())?;
    print!("{}", report.table());

    let listed = AccuracyReport::build(
        &pairs,
        &ReportOptions {
            basis: ErrorBasis::Listed,
            ..ReportOptions::default()
        },
    )?;
    let (a, b) = listed.pooled.interval.unwrap();
    println!("\npooled interval on the listed errors: ({a:.4}, {b:.4})");

    let own = [
        PointPair::new("a-b", 80.0, 79.1),
        PointPair::new("b-c", 64.5, 65.2),
        PointPair::new("c-d", 51.2, 50.9),
    ];
    let acc: Vec<f64> = own.iter().map(|p| 1.0 - pair_error(p) / 100.0).collect();
    let (lo, hi) = confidence_interval(&acc, 0.9)?;
    println!("three hand-measured pairs, 90% interval on accuracy: ({lo:.4}, {hi:.4})");
    Ok(())
}
