//! Naimark dilation of POVM families and of whole strategies.

use selftest_lab::lab::trine_strategy;
use selftest_lab::naimark::{minimal_trine_dilation, naimark_family, naimark_strategy, verify_dilation};
use selftest_lab::random::{random_povm, seeded};
use selftest_lab::strategy::correlation_of;

fn main() -> selftest_lab::Result<()> {
    let mut rng = seeded(1);
    let fams = vec![random_povm(3, 2, &mut rng), random_povm(3, 4, &mut rng)];
    let d = naimark_family(&fams)?;
    let check = verify_dilation(&fams, &d, 1e-10)?;
    println!("dilated {:?}: passed = {}, worst defect = {:e}", d.dims, check.passed, check.worst);

    let s = trine_strategy();
    let n = naimark_strategy(&s)?;
    let diff = correlation_of(&s)?.max_difference(&correlation_of(&n.strategy)?);
    println!("trine strategy dilated to {:?}, correlation change {diff:e}", n.strategy.dims);

    let m = minimal_trine_dilation();
    println!("minimal trine dilation: {:?}", m.dims);
    println!("check: {}", verify_dilation(&s.bob, &m, 1e-12)?.passed);
    Ok(())
}
