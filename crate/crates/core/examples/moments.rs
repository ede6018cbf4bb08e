//! Two PVM dilations of the trine strategy with equal correlations but different
//! higher-order moments.

use selftest_lab::lab::{literal_h_moments, moment_separation, trine_pvm_strategy, G_MINUS, G_PLUS, H_PLUS};
use selftest_lab::strategy::correlation_of;

fn main() -> selftest_lab::Result<()> {
    let s1 = trine_pvm_strategy(H_PLUS, G_PLUS);
    let s2 = trine_pvm_strategy(H_PLUS, G_MINUS);
    let diff = correlation_of(&s1)?.max_difference(&correlation_of(&s2)?);
    println!("correlation difference: {diff:e}");

    let m = moment_separation()?;
    println!("word {:?}", m.word);
    println!("S1: {:.15}  (4−√2)/18 = {:.15}", m.s1, (4.0 - 2f64.sqrt()) / 18.0);
    println!("S2: {:.15}  (2−√2)/18 = {:.15}", m.s2, (2.0 - 2f64.sqrt()) / 18.0);
    println!("difference {:.15}", m.difference);

    let h = literal_h_moments()?;
    println!("with the H-word: {:.15} and {:.15}", h.s1, h.s2);
    Ok(())
}
