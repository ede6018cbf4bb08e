//! The three forms of a local dilation on one exact instance: vector form, matrix form with
//! `σ_aux`, and extraction form with unitaries.

use selftest_lab::dilation::{
    dilation_residuals, extraction_residual, matrix_form_residual, vector_to_extraction, vector_to_matrix,
    DilationWitness,
};
use selftest_lab::lab::canonical_chsh;
use selftest_lab::random::{random_state_with_rank, random_unitary, seeded};
use selftest_lab::strategy::{conjugate_local, Strategy};
use selftest_lab::tensor::{flatten_state, identity, kron, reshape_state};

fn main() -> selftest_lab::Result<()> {
    let mut rng = seeded(3);
    let chsh = canonical_chsh();
    let aux = random_state_with_rank(2, 2, 2, &mut rng);
    let psi = flatten_state(&kron(
        &reshape_state(&chsh.pure_vector("chsh")?, (2, 2))?,
        &reshape_state(&aux, (2, 2))?,
    ));
    let ext = |fams: &[Vec<_>]| -> Vec<Vec<_>> {
        fams.iter().map(|f| f.iter().map(|e| kron(e, &identity(2))).collect()).collect()
    };
    let product = Strategy::pure(psi, (4, 4), ext(&chsh.alice), ext(&chsh.bob))?;
    let ua = random_unitary(4, &mut rng);
    let ub = random_unitary(4, &mut rng);
    let src = conjugate_local(&product, &ua.adjoint(), &ub.adjoint())?;

    let w = DilationWitness { u_a: ua, u_b: ub, aux };
    println!("vector form:     ε = {:e}", dilation_residuals(&src, &chsh, &w)?.eps);

    let sigma = vector_to_matrix(&src, &chsh, &w)?;
    println!("matrix form:     ε = {:e}", matrix_form_residual(&src, &chsh, &w.u_a, &w.u_b, &sigma)?);

    let (wa, wb) = vector_to_extraction(&src, &chsh, &w)?;
    println!("extraction form: ε = {:e}", extraction_residual(&src, &chsh, &wa, &wb)?.eps);
    Ok(())
}
