//! Support-preserving and projective diagnostics, and the hat operators that move a local
//! measurement to the other side of the state.

use selftest_lab::metrics::{alice_hat_residual, hat_operators, strategy_metrics};
use selftest_lab::random::{random_povm, random_state_with_rank, seeded};
use selftest_lab::strategy::Strategy;

fn main() -> selftest_lab::Result<()> {
    let mut rng = seeded(7);
    let psi = random_state_with_rank(3, 3, 2, &mut rng);
    let s = Strategy::pure(
        psi.clone(),
        (3, 3),
        vec![random_povm(3, 2, &mut rng)],
        vec![random_povm(3, 3, &mut rng)],
    )?;
    let m = strategy_metrics(&s)?;
    println!("support-preserving ε = {:.6}", m.support_eps);
    println!("projective ε = {:.6}", m.projective_eps);
    println!("Alice commutators: {:?}", m.alice_commutator);

    let hats = hat_operators(&s)?;
    let a = &s.alice[0][0];
    let res = alice_hat_residual(a, &hats.alice[0][0], &psi, s.dims)?;
    println!("‖(A ⊗ 1 − 1 ⊗ Â)ψ‖ = {res:e}");
    Ok(())
}
