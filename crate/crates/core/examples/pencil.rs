//! A Schmidt-rank-deficient combination of two generic states in C^d ⊗ C^d.

use selftest_lab::lab::rank_deficient_combination;
use selftest_lab::random::{random_vector, seeded};
use selftest_lab::schmidt::schmidt_rank;

fn main() -> selftest_lab::Result<()> {
    let mut rng = seeded(0);
    for d in 2..=4 {
        let phi = random_vector(d * d, &mut rng);
        let psi = random_vector(d * d, &mut rng);
        let r = rank_deficient_combination(&phi, &psi, d)?;
        println!(
            "d = {d}: ranks {} and {} -> root {:?}, combined rank {}",
            schmidt_rank(&phi, (d, d))?,
            schmidt_rank(&psi, (d, d))?,
            r.root,
            r.rank
        );
    }
    Ok(())
}
