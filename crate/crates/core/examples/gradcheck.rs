//! Central-difference checks of every tape operation and of a two-layer,
//! two-scale toy network.

use mstgn::model::gradient_suite;

fn main() -> mstgn::Result<()> {
    let seeds: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let mut overall: f64 = 0.0;
    for seed in 0..seeds {
        let report = gradient_suite(seed)?;
        let worst = report.worst().expect("suite has entries");
        println!(
            "seed {seed}: {} checks, worst {} at {:.2e}",
            report.entries.len(),
            worst.name,
            worst.max_rel_error
        );
        overall = overall.max(report.max_rel_error());
    }
    println!("max relative error {overall:.3e}");
    Ok(())
}
