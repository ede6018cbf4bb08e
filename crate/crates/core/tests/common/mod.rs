#![allow(dead_code)]

use rand::Rng;
use selftest_lab::dilation::DilationWitness;
use selftest_lab::random::{random_povm, random_pvm, random_state_with_rank, random_unitary, random_vector, SeededRng};
use selftest_lab::strategy::{conjugate_local, Povm, State, Strategy};
use selftest_lab::tensor::{flatten_state, identity, kron, reshape_state, Operator, StateVector};

pub struct Shape {
    pub dims: std::ops::RangeInclusive<usize>,
    pub questions: std::ops::RangeInclusive<usize>,
    pub outcomes: std::ops::RangeInclusive<usize>,
    pub full_rank: bool,
    pub projective: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Self {
            dims: 2..=4,
            questions: 1..=2,
            outcomes: 2..=3,
            full_rank: false,
            projective: false,
        }
    }
}

pub fn random_families(d: usize, shape: &Shape, rng: &mut SeededRng) -> Vec<Povm> {
    let nq = rng.random_range(shape.questions.clone());
    (0..nq)
        .map(|_| {
            let m = rng.random_range(shape.outcomes.clone());
            if shape.projective {
                random_pvm(d, m, rng)
            } else {
                random_povm(d, m, rng)
            }
        })
        .collect()
}

pub fn random_strategy(shape: &Shape, rng: &mut SeededRng) -> Strategy {
    let da = rng.random_range(shape.dims.clone());
    let db = rng.random_range(shape.dims.clone());
    strategy_with_dims((da, db), shape, rng)
}

pub fn strategy_with_dims((da, db): (usize, usize), shape: &Shape, rng: &mut SeededRng) -> Strategy {
    let rank = if shape.full_rank { da.min(db) } else { rng.random_range(1..=da.min(db)) };
    let psi = random_state_with_rank(da, db, rank, rng);
    let alice = random_families(da, shape, rng);
    let bob = random_families(db, shape, rng);
    Strategy::pure(psi, (da, db), alice, bob).unwrap()
}

/// Every element extended by `1` on an ancilla of dimension `k`.
pub fn extend(fams: &[Povm], k: usize) -> Vec<Povm> {
    fams.iter().map(|f| f.iter().map(|e| kron(e, &identity(k))).collect()).collect()
}

/// `ψ̃ ⊗ aux` on `(Ã Â)(B̃ B̂)` with identity-extended measurements.
pub fn tensor_with_aux(dst: &Strategy, aux: &StateVector, anc: (usize, usize)) -> Strategy {
    let m = reshape_state(&dst.pure_vector("dst").unwrap(), dst.dims).unwrap();
    let a = reshape_state(aux, anc).unwrap();
    let state = flatten_state(&kron(&m, &a));
    Strategy::pure(
        state,
        (dst.dims.0 * anc.0, dst.dims.1 * anc.1),
        extend(&dst.alice, anc.0),
        extend(&dst.bob, anc.1),
    )
    .unwrap()
}

/// A source with an exact vector-form witness into `dst`: `src = U*(ψ̃ ⊗ aux)`.
pub fn exact_instance(dst: &Strategy, anc: (usize, usize), aux_rank: usize, rng: &mut SeededRng) -> (Strategy, DilationWitness) {
    let aux = random_state_with_rank(anc.0, anc.1, aux_rank, rng);
    let big = tensor_with_aux(dst, &aux, anc);
    let ua = random_unitary(big.dims.0, rng);
    let ub = random_unitary(big.dims.1, rng);
    let src = conjugate_local(&big, &ua.adjoint(), &ub.adjoint()).unwrap();
    (src, DilationWitness { u_a: ua, u_b: ub, aux })
}

/// A mixed source `tr_P` of `U*(ψ̃ ⊗ aux)` with `aux` on `Â ⊗ B̂ ⊗ P`, and the unitaries.
pub fn exact_mixed_instance(dst: &Strategy, anc: (usize, usize), p: usize, rng: &mut SeededRng) -> (Strategy, Operator, Operator) {
    let aux = random_vector(anc.0 * anc.1 * p, rng);
    let m = reshape_state(&dst.pure_vector("dst").unwrap(), dst.dims).unwrap();
    let a = reshape_state(&aux, (anc.0, anc.1 * p)).unwrap();
    let joint = kron(&m, &a);
    let (da, db) = (dst.dims.0 * anc.0, dst.dims.1 * anc.1);
    // Rows (A), columns (B, P); ρ_AB = Σ_p |col block p⟩⟨·|.
    let v = flatten_state(&joint);
    let mut rho = Operator::zeros(da * db, da * db);
    for k in 0..p {
        let slice = StateVector::from_fn(da * db, |ab, _| v[ab * p + k]);
        rho += &slice * slice.adjoint();
    }
    let big = Strategy::new((da, db), State::Mixed(rho), extend(&dst.alice, anc.0), extend(&dst.bob, anc.1)).unwrap();
    let ua = random_unitary(da, rng);
    let ub = random_unitary(db, rng);
    let src = conjugate_local(&big, &ua.adjoint(), &ub.adjoint()).unwrap();
    (src, ua, ub)
}
