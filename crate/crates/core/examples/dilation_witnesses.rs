//! Local dilation witnesses: restriction and Naimark embeddings, reversal and composition.

use selftest_lab::dilation::{compose, dilation_residuals, naimark_embedding, restriction_embedding, reverse_witness};
use selftest_lab::lab::{canonical_chsh, trine_strategy};
use selftest_lab::metrics::projective_eps;
use selftest_lab::strategy::attach_product_ancilla;
use selftest_lab::tensor::basis;

fn main() -> selftest_lab::Result<()> {
    let trine = trine_strategy();
    let e = naimark_embedding(&trine)?;
    let r = dilation_residuals(&e.src, &e.dst, &e.witness)?;
    println!("trine ↪ Naimark: ε = {:.15} (projective ε = {:.15})", r.eps, projective_eps(&trine)?);

    let big = attach_product_ancilla(&canonical_chsh(), &basis(2, 0), &basis(3, 1))?;
    let e = restriction_embedding(&big)?;
    let fwd = dilation_residuals(&e.src, &e.dst, &e.witness)?;
    println!("restriction ↪ CHSH⊗ancilla: ε = {:e}", fwd.eps);

    let back = reverse_witness(&e.src, &e.dst, &e.witness)?;
    let rev = dilation_residuals(&e.dst, &e.src, &back)?;
    println!("reverse witness: ε = {:e}, ancilla dims {:?}", rev.eps, back.ancilla_dims(e.src.dims)?);

    let round = compose(&back, e.src.dims, &e.witness, e.dst.dims)?;
    let r = dilation_residuals(&e.dst, &e.dst, &round)?;
    println!("composed round trip: ε = {:e}", r.eps);
    Ok(())
}
