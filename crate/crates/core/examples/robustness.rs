//! Eigengap robustness: perturbed CHSH states against the bound `√(2δ/Δ)`.

use selftest_lab::io::{emit_report, Format};
use selftest_lab::lab::{robustness_sweep, SweepConfig};

fn main() -> selftest_lab::Result<()> {
    let cfg = SweepConfig {
        seeds_per_magnitude: 4,
        ..SweepConfig::default()
    };
    let rows = robustness_sweep(&cfg)?;
    print!("{}", String::from_utf8_lossy(&emit_report(&rows, Format::Csv)));
    let ok = rows.iter().all(|r| r.epsilon <= r.bound + 1e-9);
    println!("all within bound: {ok}");
    Ok(())
}
