//! Tensor products, partial traces, reduced states and Hermitian eigendecomposition.

use selftest_lab::tensor::{
    hermitian_eig, kron, marginals, partial_trace, pauli_x, pauli_z, reshape_state, Keep,
};
use selftest_lab::lab::phi_plus;

fn main() -> selftest_lab::Result<()> {
    let psi = phi_plus();
    let rho = &psi * psi.adjoint();
    let rho_a = partial_trace(&rho, (2, 2), Keep::A)?;
    println!("tr_B |Φ+⟩⟨Φ+| = {rho_a}");

    let (sigma_a, sigma_b) = marginals(&reshape_state(&psi, (2, 2))?);
    println!("marginals agree: {}", (&sigma_a - &rho_a).norm() < 1e-15 && (&sigma_b - &rho_a).norm() < 1e-15);

    let zx = kron(&pauli_z(), &pauli_x());
    let spec = hermitian_eig(&zx)?;
    println!("spectrum of Z⊗X: {:?}", spec.eigenvalues);
    println!("multiplicities: {:?}", spec.multiplicities(1e-9));
    Ok(())
}
