//! Worked examples: CHSH, the trine extension, functionals, eigengap bounds, moments.

mod eigengap;
mod functionals;
mod pencil;
mod perturb;

pub use eigengap::{eigengap_analysis, robustness_constant, EigengapReport, CLUSTER_TOL};
pub use functionals::{
    beta_functionals, effective_measurement, higher_order_moment, literal_h_moments,
    moment_separation, observable, BetaValues, MomentSeparation,
};
pub use pencil::{rank_deficient_combination, PencilResult, PencilRoot};
pub use perturb::{
    perturb_state, perturb_strategy, robustness_sweep, seesaw_state, RobustnessRow, SweepConfig,
};

use crate::naimark::{extend_family, trine_embedding, trine_vectors};
use crate::strategy::{NonlocalGame, Povm, State, Strategy};
use crate::tensor::{apply_local, basis, identity, pauli_x, pauli_z, projector, re, Operator, StateVector};

/// `(2 + √2) / 4`, the quantum value of CHSH.
pub const OMEGA_CHSH: f64 = 0.853_553_390_593_273_8;

/// Outcome index of `H_+` in Bob's question 0.
pub const H_PLUS: usize = 0;
/// Outcome index of `H_-` in Bob's question 0.
pub const H_MINUS: usize = 1;
/// Outcome index of `G_-` in Bob's question 1.
pub const G_MINUS: usize = 0;
/// Outcome index of `G_+` in Bob's question 1.
pub const G_PLUS: usize = 1;

pub fn chsh_game() -> NonlocalGame {
    NonlocalGame::chsh()
}

/// `(|00⟩ + |11⟩)/√2`
pub fn phi_plus() -> StateVector {
    (basis(4, 0) + basis(4, 3)) / re(2f64.sqrt())
}

/// `{(1 + O)/2, (1 − O)/2}` for an observable `O` with eigenvalues ±1.
pub fn eigenprojectors(o: &Operator) -> Povm {
    let d = o.nrows();
    vec![(identity(d) + o).scale(0.5), (identity(d) - o).scale(0.5)]
}

/// `H = (X + Z)/√2`
pub fn h_observable() -> Operator {
    (pauli_x() + pauli_z()).scale(1.0 / 2f64.sqrt())
}

/// `G = (X − Z)/√2`
pub fn g_observable() -> Operator {
    (pauli_x() - pauli_z()).scale(1.0 / 2f64.sqrt())
}

/// Alice measures `Z` (question 0) and `X` (question 1).
pub fn alice_measurements() -> Vec<Povm> {
    vec![eigenprojectors(&pauli_z()), eigenprojectors(&pauli_x())]
}

/// `{H_+, H_-}` and `{G_-, G_+}`.
pub fn bob_chsh_measurements() -> Vec<Povm> {
    let g = eigenprojectors(&g_observable());
    vec![eigenprojectors(&h_observable()), vec![g[1].clone(), g[0].clone()]]
}

/// The trine POVM `M_0 = (1 + Z)/3`, `M_{1,2} = (1 − Z/2 ± √3 X/2)/3`.
pub fn trine_povm() -> Povm {
    let z = pauli_z();
    let x = pauli_x();
    let s = 3f64.sqrt() / 2.0;
    vec![
        (identity(2) + &z).scale(1.0 / 3.0),
        (identity(2) - z.scale(0.5) + x.scale(s)).scale(1.0 / 3.0),
        (identity(2) - z.scale(0.5) - x.scale(s)).scale(1.0 / 3.0),
    ]
}

/// `(|Φ⁺⟩, {Z, X}, {H, G})`.
pub fn canonical_chsh() -> Strategy {
    Strategy::pure(phi_plus(), (2, 2), alice_measurements(), bob_chsh_measurements())
        .expect("canonical strategy is well formed")
}

/// The canonical CHSH strategy with the trine POVM as Bob's third question.
pub fn trine_strategy() -> Strategy {
    let mut bob = bob_chsh_measurements();
    bob.push(trine_povm());
    Strategy::pure(phi_plus(), (2, 2), alice_measurements(), bob).expect("trine strategy is well formed")
}

/// A pure PVM strategy on `C^2 ⊗ C^3` dilating the trine strategy: state `(1 ⊗ V)|Φ⁺⟩`,
/// Bob's `H` and `G` extended with `1 − VV*` on the given outcomes, trine replaced by
/// `|e_i⟩⟨e_i|`. With `(H_PLUS, G_PLUS)` this is the minimal dilation.
pub fn trine_pvm_strategy(h_absorb: usize, g_absorb: usize) -> Strategy {
    let v = trine_embedding();
    let chsh = bob_chsh_measurements();
    let bob = vec![
        extend_family(&chsh[0], &v, h_absorb),
        extend_family(&chsh[1], &v, g_absorb),
        trine_vectors().iter().map(projector).collect(),
    ];
    let state = apply_local(&identity(2), &v, &phi_plus(), (2, 2)).expect("dimensions match");
    Strategy::new((2, 3), State::Pure(state), alice_measurements(), bob).expect("well formed")
}
