use serde::Serialize;

use crate::error::{mismatch, Error, Result};
use crate::strategy::NonlocalGame;
use crate::tensor::{hermitian_eig, reshape_state, Operator, StateVector, C64};

/// Eigenvalues closer than this are one cluster.
pub const CLUSTER_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Serialize)]
pub struct EigengapReport {
    pub lambda0: f64,
    pub lambda1: f64,
    pub gap: f64,
    pub top_multiplicity: usize,
    /// Squared overlap of the candidate with `ψ̃ ⊗ (aux space)`.
    pub p0: f64,
    /// `min_aux ‖φ − ψ̃ ⊗ aux‖ = √(2 − 2√p0)`
    pub state_bound: f64,
    /// `⟨φ| W ⊗ 1 |φ⟩`
    pub energy: f64,
    /// `λ0 − energy`
    pub delta: f64,
    pub delta_eff: f64,
    /// `1 − δ_eff / Δ`
    pub p0_lower_bound: f64,
    /// `√(2 δ_eff / Δ)`
    pub distance_bound: f64,
    /// Whether `energy ≥ λ0 − δ_eff` and, if so, whether both bounds hold.
    pub premise_holds: bool,
    pub bounds_hold: bool,
}

/// Overlap analysis of `candidate` (on `H` or `H ⊗ H_aux`) against the top eigenvector of `W`.
pub fn eigengap_analysis(
    w: &Operator,
    canonical: &StateVector,
    candidate: &StateVector,
    delta_eff: f64,
) -> Result<EigengapReport> {
    let spec = hermitian_eig(w)?;
    let n = spec.dim();
    if canonical.len() != n {
        return Err(mismatch("eigengap canonical state", n, canonical.len()));
    }
    if !candidate.len().is_multiple_of(n) || candidate.is_empty() {
        return Err(mismatch("eigengap candidate", n, candidate.len()));
    }
    let clusters = spec.multiplicities(CLUSTER_TOL);
    let top_multiplicity = clusters[0];
    if top_multiplicity > 1 {
        return Err(Error::DegenerateTopEigenvalue {
            multiplicity: top_multiplicity,
        });
    }
    let lambda0 = spec.eigenvalues[0];
    let lambda1 = spec.eigenvalues.get(1).copied().unwrap_or(lambda0);
    let gap = lambda0 - lambda1;
    let top = spec.vector(0);
    let overlap = top.dotc(canonical).norm_sqr() / canonical.norm_squared();
    if overlap < 1.0 - 1e-9 {
        return Err(Error::NotTopEigenvector { overlap });
    }
    let k = candidate.len() / n;
    let phi = reshape_state(candidate, (n, k))?;
    let psi = canonical / C64::from(canonical.norm());
    let aux = phi.transpose() * psi.conjugate();
    let norm2 = candidate.norm_squared();
    let p0 = (aux.norm_squared() / norm2).clamp(0.0, 1.0);
    // ‖φ − a/‖a‖‖² = ‖b‖² + (1 − ‖a‖)² with a the projection and b = φ − a, φ normalized.
    let b2 = (&phi - &psi * aux.transpose()).norm_squared() / norm2;
    let a = p0.sqrt();
    let state_bound = (b2 + (b2 / (1.0 + a)).powi(2)).sqrt();
    let energy = ((phi.adjoint() * w * &phi).trace().re) / norm2;
    let delta = lambda0 - energy;
    let p0_lower_bound = 1.0 - delta_eff / gap;
    let distance_bound = (2.0 * delta_eff / gap).max(0.0).sqrt();
    let premise_holds = energy >= lambda0 - delta_eff - 1e-12;
    let bounds_hold = !premise_holds
        || (p0 >= p0_lower_bound - 1e-12 && state_bound <= distance_bound + 1e-9);
    Ok(EigengapReport {
        lambda0,
        lambda1,
        gap,
        top_multiplicity,
        p0,
        state_bound,
        energy,
        delta,
        delta_eff,
        p0_lower_bound,
        distance_bound,
        premise_holds,
        bounds_hold,
    })
}

/// `C = 2 · (Σ_{s,t} π(s,t) Σ_{a,b} 𝒱(a,b|s,t)) · max(n_A, n_B)` with `n_A`, `n_B` the
/// largest answer-set sizes.
pub fn robustness_constant(g: &NonlocalGame) -> f64 {
    let na = g.alice_answers().iter().copied().max().unwrap_or(0);
    let nb = g.bob_answers().iter().copied().max().unwrap_or(0);
    2.0 * g.predicate_mass() * na.max(nb) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::{canonical_chsh, chsh_game, phi_plus, OMEGA_CHSH};
    use crate::strategy::game_operator;
    use crate::tensor::{identity, normalize, re};

    fn chsh_w() -> Operator {
        game_operator(&chsh_game(), &canonical_chsh()).unwrap()
    }

    #[test]
    fn chsh_gap() {
        let r = eigengap_analysis(&chsh_w(), &phi_plus(), &phi_plus(), 0.0).unwrap();
        assert!((r.lambda0 - OMEGA_CHSH).abs() < 1e-12);
        assert!((r.lambda1 - 0.5).abs() < 1e-12);
        assert!((r.gap - 2f64.sqrt() / 4.0).abs() < 1e-12);
        assert_eq!(r.top_multiplicity, 1);
        assert!((r.p0 - 1.0).abs() < 1e-12);
        assert!(r.state_bound < 1e-14);
        assert!(r.bounds_hold);
    }

    #[test]
    fn two_level_saturation() {
        let w = chsh_w();
        let spec = hermitian_eig(&w).unwrap();
        let perp = spec.vector(1);
        let top = spec.vector(0);
        let theta: f64 = 0.3;
        let cand = &top * re(theta.cos()) + &perp * re(theta.sin());
        let gap = spec.eigenvalues[0] - spec.eigenvalues[1];
        let delta = gap * theta.sin().powi(2);
        let r = eigengap_analysis(&w, &top, &cand, delta).unwrap();
        assert!((r.delta - delta).abs() < 1e-12);
        assert!((r.p0 - theta.cos().powi(2)).abs() < 1e-12);
        assert!((r.p0 - r.p0_lower_bound).abs() < 1e-12);
        assert!(r.bounds_hold);
    }

    #[test]
    fn extended_candidate() {
        let w = chsh_w();
        let aux = normalize(&StateVector::from_vec(vec![re(1.0), re(2.0), re(-1.0)]));
        let cand = phi_plus().kronecker(&aux);
        let r = eigengap_analysis(&w, &phi_plus(), &cand, 0.0).unwrap();
        assert!((r.p0 - 1.0).abs() < 1e-12);
        assert!(r.delta.abs() < 1e-12);
    }

    #[test]
    fn degenerate_top_is_rejected() {
        let e = eigengap_analysis(&identity(4), &phi_plus(), &phi_plus(), 0.0);
        assert!(matches!(e, Err(Error::DegenerateTopEigenvalue { multiplicity: 4 })));
    }

    #[test]
    fn wrong_reference_is_rejected() {
        let e = eigengap_analysis(&chsh_w(), &crate::tensor::basis(4, 1), &phi_plus(), 0.0);
        assert!(matches!(e, Err(Error::NotTopEigenvector { .. })));
    }

    #[test]
    fn chsh_constant() {
        // Σπ Σ𝒱 = 2, answer sets of size 2.
        assert!((robustness_constant(&chsh_game()) - 8.0).abs() < 1e-15);
    }
}
