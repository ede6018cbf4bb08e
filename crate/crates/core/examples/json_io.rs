//! Strategy JSON round trip and report emission.

use selftest_lab::io::{emit_report, strategy_from_json, strategy_to_json, Format};
use selftest_lab::lab::trine_strategy;
use selftest_lab::metrics::strategy_metrics;

fn main() -> selftest_lab::Result<()> {
    let s = trine_strategy();
    let text = strategy_to_json(&s);
    let back = strategy_from_json(&text, 1e-9)?;
    println!("round trip exact: {}", back == s);

    match strategy_from_json(&text[..text.len() / 3], 1e-9) {
        Err(e) => println!("truncated input: {e}"),
        Ok(_) => println!("truncated input parsed?"),
    }

    let m = strategy_metrics(&s)?;
    print!("{}", String::from_utf8_lossy(&emit_report(&m, Format::Csv)));
    Ok(())
}
