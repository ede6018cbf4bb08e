//! Schmidt decomposition and restriction of a strategy to the supports of its state.

use selftest_lab::lab::canonical_chsh;
use selftest_lab::schmidt::{restrict, schmidt_decompose, RANK_TOL};
use selftest_lab::strategy::{attach_product_ancilla, correlation_of};
use selftest_lab::tensor::{basis, normalize, re};

fn main() -> selftest_lab::Result<()> {
    let anc = normalize(&(basis(3, 0) + basis(3, 2) * re(2.0)));
    let big = attach_product_ancilla(&canonical_chsh(), &anc, &basis(2, 1))?;
    println!("dims with ancilla: {:?}", big.dims);

    let sd = schmidt_decompose(&big.pure_vector("example")?, big.dims, RANK_TOL)?;
    println!("Schmidt coefficients: {:?}", sd.coefficients);

    let r = restrict(&big)?;
    println!("restricted dims: {:?}", r.strategy.dims);
    let diff = correlation_of(&big)?.max_difference(&correlation_of(&r.strategy)?);
    println!("correlation change under restriction: {diff:e}");
    Ok(())
}
