use serde::Serialize;

use crate::error::{mismatch, Error, Result};
use crate::random::hermitize;
use crate::strategy::{Player, Povm, State, Strategy};
use crate::tensor::{
    identity, kron, local_expectation, partial_trace, psd_sqrt, reshape_state, Keep, Operator, C64,
};

use super::{trine_pvm_strategy, G_MINUS, G_PLUS, H_MINUS, H_PLUS};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BetaValues {
    pub beta0: f64,
    pub beta1: f64,
}

/// `E_0 − E_1` for a two-outcome family.
pub fn observable(fam: &Povm) -> Result<Operator> {
    if fam.len() != 2 {
        return Err(Error::InvalidStrategy(format!(
            "expected a two-outcome measurement, found {} outcomes",
            fam.len()
        )));
    }
    Ok(&fam[0] - &fam[1])
}

/// `tr(ρ X ⊗ Y)`
pub(crate) fn expectation(s: &Strategy, x: &Operator, y: &Operator) -> Result<C64> {
    match &s.state {
        State::Pure(psi) => Ok(local_expectation(x, y, &reshape_state(psi, s.dims)?)),
        State::Mixed(rho) => Ok((rho * kron(x, y)).trace()),
    }
}

/// `β₀ = ⟨A0B0 + A0B1 + A1B0 − A1B1⟩` and
/// `β₁ = ⟨A0F0 − ½A0F1 + (√3/2)A1F1 − ½A0F2 − (√3/2)A1F2⟩`.
pub fn beta_functionals(s: &Strategy) -> Result<BetaValues> {
    if s.alice.len() != 2 || s.bob.len() != 3 || s.bob[2].len() != 3 {
        return Err(Error::InvalidStrategy(format!(
            "β functionals need Alice answers [2, 2] and Bob answers [2, 2, 3], found {:?} and {:?}",
            s.alice_answer_counts(),
            s.bob_answer_counts()
        )));
    }
    s.check_dims()?;
    let a0 = observable(&s.alice[0])?;
    let a1 = observable(&s.alice[1])?;
    let b0 = observable(&s.bob[0])?;
    let b1 = observable(&s.bob[1])?;
    let f = &s.bob[2];
    let e = |x: &Operator, y: &Operator| expectation(s, x, y).map(|z| z.re);
    let beta0 = e(&a0, &b0)? + e(&a0, &b1)? + e(&a1, &b0)? - e(&a1, &b1)?;
    let r = 3f64.sqrt() / 2.0;
    let beta1 = e(&a0, &f[0])? - 0.5 * e(&a0, &f[1])? + r * e(&a1, &f[1])? - 0.5 * e(&a0, &f[2])?
        - r * e(&a1, &f[2])?;
    Ok(BetaValues { beta0, beta1 })
}

/// `G_j = tr_{B'}[(1 ⊗ σ^{1/2}) U F_j U* (1 ⊗ σ^{1/2})]` for `U: H_B → H_B̃ ⊗ H_B'` with
/// `dims = (dim H_B̃, dim H_B')`.
pub fn effective_measurement(f: &Povm, u: &Operator, dims: (usize, usize), sigma: &Operator) -> Result<Povm> {
    let (dt, dp) = dims;
    if u.nrows() != dt * dp {
        return Err(mismatch("effective_measurement factorization", dt * dp, u.nrows()));
    }
    if sigma.shape() != (dp, dp) {
        return Err(mismatch("effective_measurement σ", dp, sigma.nrows()));
    }
    let root = kron(&identity(dt), &psd_sqrt(sigma)?);
    f.iter()
        .map(|fj| {
            if fj.shape() != (u.ncols(), u.ncols()) {
                return Err(mismatch("effective_measurement element", u.ncols(), fj.nrows()));
            }
            let inner = &root * u * fj * u.adjoint() * &root;
            Ok(hermitize(&partial_trace(&inner, (dt, dp), Keep::A)?))
        })
        .collect()
}

fn word_product(s: &Strategy, player: Player, word: &[(usize, usize)], d: usize) -> Result<Operator> {
    let mut out = identity(d);
    for &(q, a) in word {
        out *= s.element(player, q, a)?;
    }
    Ok(out)
}

/// `⟨ψ| A_{s1a1}⋯A_{skak} ⊗ B_{t1b1}⋯B_{tlbl} |ψ⟩`
pub fn higher_order_moment(s: &Strategy, alice_word: &[(usize, usize)], bob_word: &[(usize, usize)]) -> Result<C64> {
    let a = word_product(s, Player::Alice, alice_word, s.dims.0)?;
    let b = word_product(s, Player::Bob, bob_word, s.dims.1)?;
    expectation(s, &a, &b)
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentSeparation {
    /// Bob word as `(question, answer)` pairs.
    pub word: Vec<(usize, usize)>,
    pub s1: f64,
    pub s2: f64,
    pub difference: f64,
}

/// Bob moment `⟨M'_0 G'_+ M'_0⟩` on two pure PVM dilations of the trine strategy that differ
/// only in where `G` absorbs `1 − VV*` (`G_+` for the minimal dilation, `G_-` for the other).
pub fn moment_separation() -> Result<MomentSeparation> {
    let word = vec![(2, 0), (1, G_PLUS), (2, 0)];
    let s1 = higher_order_moment(&trine_pvm_strategy(H_PLUS, G_PLUS), &[], &word)?.re;
    let s2 = higher_order_moment(&trine_pvm_strategy(H_PLUS, G_MINUS), &[], &word)?.re;
    Ok(MomentSeparation {
        word,
        s1,
        s2,
        difference: s1 - s2,
    })
}

/// Bob moment `⟨M'_0 H_+ M'_0⟩` on the minimal dilation and on the variant where `H` absorbs
/// `1 − VV*` on `H_-`.
pub fn literal_h_moments() -> Result<MomentSeparation> {
    let word = vec![(2, 0), (0, H_PLUS), (2, 0)];
    let s1 = higher_order_moment(&trine_pvm_strategy(H_PLUS, G_PLUS), &[], &word)?.re;
    let s2 = higher_order_moment(&trine_pvm_strategy(H_MINUS, G_PLUS), &[], &word)?.re;
    Ok(MomentSeparation {
        word,
        s1,
        s2,
        difference: s1 - s2,
    })
}
