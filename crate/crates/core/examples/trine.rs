//! The trine extension of CHSH: β functionals and how far Bob's third measurement is from
//! projective.

use selftest_lab::lab::{beta_functionals, trine_strategy};
use selftest_lab::metrics::{projective_eps, support_preserving_eps};
use selftest_lab::strategy::validate_strategy;

fn main() -> selftest_lab::Result<()> {
    let s = trine_strategy();
    println!("valid: {}", validate_strategy(&s, 1e-12)?.valid);
    let b = beta_functionals(&s)?;
    println!("β0 = {:.15} (2√2 = {:.15})", b.beta0, 2.0 * 2f64.sqrt());
    println!("β1 = {:.15}", b.beta1);
    println!("support-preserving ε = {:e}", support_preserving_eps(&s)?);
    println!("projective ε = {:.15}", projective_eps(&s)?);
    Ok(())
}
