//! State-dependent norms and the support-preserving / projective diagnostics.

use serde::Serialize;

use crate::error::{mismatch, Error, Result};
use crate::schmidt::{local_supports, schmidt_decompose, SchmidtData, RANK_TOL};
use crate::strategy::{Povm, Strategy};
use crate::tensor::{complete_to_unitary, identity, marginals, re, reshape_state, Operator, StateVector};

/// Quadratic forms below this are reported as invalid rather than clipped.
pub const NEGATIVE_DEFECT_TOL: f64 = 1e-10;

/// `‖X‖_σ = √tr(X* X σ)`
pub fn state_dependent_norm(x: &Operator, sigma: &Operator) -> Result<f64> {
    if x.ncols() != sigma.nrows() || sigma.nrows() != sigma.ncols() {
        return Err(mismatch("state_dependent_norm", sigma.nrows(), x.ncols()));
    }
    Ok((x.adjoint() * x * sigma).trace().re.max(0.0).sqrt())
}

/// `⟨X, Y⟩_σ = tr(X* Y σ)`
pub fn state_inner(x: &Operator, y: &Operator, sigma: &Operator) -> f64 {
    (x.adjoint() * y * sigma).trace().re
}

fn clip(value: f64, context: impl FnOnce() -> String) -> Result<f64> {
    if value < -NEGATIVE_DEFECT_TOL {
        return Err(Error::NegativeDefect {
            context: context(),
            value,
        });
    }
    Ok(value.max(0.0))
}

/// `‖[Π, E]‖²_σ = ⟨E² − EΠE⟩_σ`, clipped at 0.
pub fn commutator_sq(e: &Operator, pi: &Operator, sigma: &Operator) -> Result<f64> {
    let v = ((e * e - e * pi * e) * sigma).trace().re;
    clip(v, || "commutator with the support projection".into())
}

/// `⟨1 − E, E⟩_σ = tr((1 − E) E σ)`, clipped at 0.
pub fn projective_defect(e: &Operator, sigma: &Operator) -> Result<f64> {
    let v = ((identity(e.nrows()) - e) * e * sigma).trace().re;
    clip(v, || "projective defect".into())
}

/// Per-element metric tables for a pure strategy, indexed `[question][answer]`.
#[derive(Debug, Clone, Serialize)]
pub struct StrategyMetrics {
    pub support_eps: f64,
    pub projective_eps: f64,
    pub alice_commutator: Vec<Vec<f64>>,
    pub bob_commutator: Vec<Vec<f64>>,
    /// `⟨1 − E, E⟩_σ` (squared scale).
    pub alice_projective: Vec<Vec<f64>>,
    pub bob_projective: Vec<Vec<f64>>,
}

/// Marginals, supports and Schmidt data of a pure strategy.
pub struct LocalData {
    pub psi: StateVector,
    pub schmidt: SchmidtData,
    pub sigma_a: Operator,
    pub sigma_b: Operator,
    pub pi_a: Operator,
    pub pi_b: Operator,
    /// Orthonormal bases of the complements of the supports.
    pub complement_a: Operator,
    pub complement_b: Operator,
}

impl LocalData {
    pub fn of(s: &Strategy, context: &'static str) -> Result<Self> {
        let psi = s.pure_vector(context)?;
        let m = reshape_state(&psi, s.dims)?;
        let (sigma_a, sigma_b) = marginals(&m);
        let schmidt = schmidt_decompose(&psi, s.dims, RANK_TOL)?;
        let (pi_a, pi_b) = local_supports(&schmidt);
        let complement = |u: &Operator| -> Result<Operator> {
            let full = complete_to_unitary(u)?;
            Ok(full.columns(u.ncols(), u.nrows() - u.ncols()).into_owned())
        };
        let complement_a = complement(&schmidt.left_vectors)?;
        let complement_b = complement(&schmidt.right_vectors)?;
        Ok(Self {
            psi,
            schmidt,
            sigma_a,
            sigma_b,
            pi_a,
            pi_b,
            complement_a,
            complement_b,
        })
    }
}

fn table(fams: &[Povm], f: impl Fn(&Operator) -> Result<f64>) -> Result<Vec<Vec<f64>>> {
    fams.iter().map(|fam| fam.iter().map(&f).collect()).collect()
}

fn table_max(t: &[Vec<f64>]) -> f64 {
    t.iter().flatten().copied().fold(0.0, f64::max)
}

/// `‖[Π, E]‖_σ = ‖(1 − Π) E σ^{1/2}‖_F`, evaluated in Schmidt coordinates as `‖Q* E L Λ‖_F`.
fn support_leak(e: &Operator, complement: &Operator, support: &Operator, lambda: &[f64]) -> f64 {
    let mut m = complement.adjoint() * e * support;
    for (j, &l) in lambda.iter().enumerate() {
        m.column_mut(j).scale_mut(l);
    }
    m.norm()
}

pub fn strategy_metrics(s: &Strategy) -> Result<StrategyMetrics> {
    let ld = LocalData::of(s, "strategy_metrics")?;
    let lambda = &ld.schmidt.coefficients;
    let alice_commutator = table(&s.alice, |e| {
        Ok(support_leak(e, &ld.complement_a, &ld.schmidt.left_vectors, lambda))
    })?;
    let bob_commutator = table(&s.bob, |e| {
        Ok(support_leak(e, &ld.complement_b, &ld.schmidt.right_vectors, lambda))
    })?;
    let alice_projective = table(&s.alice, |e| projective_defect(e, &ld.sigma_a))?;
    let bob_projective = table(&s.bob, |e| projective_defect(e, &ld.sigma_b))?;
    let support_eps = table_max(&alice_commutator).max(table_max(&bob_commutator));
    let projective_eps = table_max(&alice_projective)
        .max(table_max(&bob_projective))
        .sqrt();
    Ok(StrategyMetrics {
        support_eps,
        projective_eps,
        alice_commutator,
        bob_commutator,
        alice_projective,
        bob_projective,
    })
}

/// Smallest `ε` for which the strategy is ε-support-preserving.
pub fn support_preserving_eps(s: &Strategy) -> Result<f64> {
    Ok(strategy_metrics(s)?.support_eps)
}

/// Smallest `ε` for which the strategy is ε-projective.
pub fn projective_eps(s: &Strategy) -> Result<f64> {
    Ok(strategy_metrics(s)?.projective_eps)
}

/// Operators `Â_sa` on `H_B` and `B̂_tb` on `H_A` built from Schmidt data.
#[derive(Debug, Clone)]
pub struct HatOperators {
    /// Alice's hats, acting on Bob's space.
    pub alice: Vec<Povm>,
    /// Bob's hats, acting on Alice's space.
    pub bob: Vec<Povm>,
}

/// `Â = F (Λ (E* A E)ᵀ Λ⁻¹) F*`, zero outside the support.
fn hat(x: &Operator, from: &Operator, to: &Operator, lambda: &[f64]) -> Operator {
    let k = lambda.len();
    let compressed = from.adjoint() * x * from;
    let core = Operator::from_fn(k, k, |j, i| compressed[(i, j)] * re(lambda[j] / lambda[i]));
    to * core * to.adjoint()
}

pub fn hat_operators(s: &Strategy) -> Result<HatOperators> {
    let psi = s.pure_vector("hat_operators")?;
    let sd = schmidt_decompose(&psi, s.dims, RANK_TOL)?;
    let e = &sd.left_vectors;
    let f = &sd.right_vectors;
    let l = &sd.coefficients;
    Ok(HatOperators {
        alice: s
            .alice
            .iter()
            .map(|fam| fam.iter().map(|a| hat(a, e, f, l)).collect())
            .collect(),
        bob: s
            .bob
            .iter()
            .map(|fam| fam.iter().map(|b| hat(b, f, e, l)).collect())
            .collect(),
    })
}

/// `‖(A ⊗ 1)ψ − (1 ⊗ Y)ψ‖`
pub fn alice_hat_residual(a: &Operator, y: &Operator, psi: &StateVector, dims: (usize, usize)) -> Result<f64> {
    let m = reshape_state(psi, dims)?;
    Ok((a * &m - &m * y.transpose()).norm())
}

/// `‖(1 ⊗ B)ψ − (X ⊗ 1)ψ‖`
pub fn bob_hat_residual(b: &Operator, x: &Operator, psi: &StateVector, dims: (usize, usize)) -> Result<f64> {
    let m = reshape_state(psi, dims)?;
    Ok((&m * b.transpose() - x * &m).norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::{canonical_chsh, trine_strategy};
    use crate::random::{random_state_with_rank, seeded};
    use crate::strategy::{attach_product_ancilla, State};
    use crate::tensor::{basis, pauli_x, pauli_z, projector, real_matrix};

    #[test]
    fn norm_examples() {
        let half = identity(2).scale(0.5);
        assert!((state_dependent_norm(&identity(2), &half).unwrap() - 1.0).abs() < 1e-15);
        assert!((state_dependent_norm(&pauli_z(), &half).unwrap() - 1.0).abs() < 1e-15);
        let rho = projector(&basis(3, 1));
        assert!((state_dependent_norm(&identity(3), &rho).unwrap() - 1.0).abs() < 1e-15);
        assert!(state_dependent_norm(&identity(2), &rho).is_err());
    }

    #[test]
    fn full_rank_is_support_preserving() {
        assert!(support_preserving_eps(&canonical_chsh()).unwrap() < 1e-15);
        assert!(support_preserving_eps(&trine_strategy()).unwrap() < 1e-15);
        let m = trine_strategy();
        let ld = LocalData::of(&m, "test").unwrap();
        let c = commutator_sq(&m.bob[2][0], &ld.pi_b, &ld.sigma_b).unwrap();
        assert!(c.sqrt() < 1e-12);
    }

    #[test]
    fn chsh_with_ancilla_is_support_preserving() {
        let s = attach_product_ancilla(&canonical_chsh(), &basis(2, 0), &basis(2, 0)).unwrap();
        assert!(support_preserving_eps(&s).unwrap() < 1e-12);
    }

    #[test]
    fn off_support_coupling_is_detected() {
        let psi = (basis(9, 0) + basis(9, 8)) / re(2f64.sqrt());
        let x02 = real_matrix(3, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let alice = vec![vec![(identity(3) + &x02).scale(0.5), (identity(3) - &x02).scale(0.5)]];
        let s = Strategy::pure(psi.clone(), (3, 3), alice, vec![vec![identity(3)]]).unwrap();
        crate::strategy::ensure_valid(&s, 1e-12).unwrap();
        // X02 maps the support {0, 2} into itself.
        assert!(support_preserving_eps(&s).unwrap() < 1e-12);
        // Couple |1⟩, outside the support {0, 2}, with the support.
        let u = real_matrix(
            3,
            &[
                1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt(), 0.0,
                1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0,
                0.0, 0.0, 1.0,
            ],
        );
        let leaky: Povm = (0..3).map(|k| projector(&u.column(k).into_owned())).collect();
        let s = Strategy::pure(psi, (3, 3), vec![leaky], vec![vec![identity(3)]]).unwrap();
        assert!(support_preserving_eps(&s).unwrap() > 0.1);
    }

    #[test]
    fn trine_projective_eps() {
        let m = strategy_metrics(&trine_strategy()).unwrap();
        for v in &m.bob_projective[2] {
            assert!((v - 1.0 / 9.0).abs() < 1e-14);
        }
        assert!((m.projective_eps - 1.0 / 3.0).abs() < 1e-14);
        assert!(projective_eps(&canonical_chsh()).unwrap() < 1e-7);
    }

    #[test]
    fn off_support_non_projective_element_is_zero_projective() {
        let psi = basis(4, 0);
        let half = projector(&basis(2, 1)).scale(0.5);
        let fam = vec![projector(&basis(2, 0)) + &half, half];
        let s = Strategy::pure(psi, (2, 2), vec![fam], vec![vec![identity(2)]]).unwrap();
        assert!(projective_eps(&s).unwrap() < 1e-12);
    }

    #[test]
    fn negative_defect_is_an_error() {
        let e = identity(2).scale(2.0);
        assert!(matches!(
            projective_defect(&e, &identity(2).scale(0.5)),
            Err(Error::NegativeDefect { .. })
        ));
    }

    #[test]
    fn hat_of_z_on_phi_plus() {
        let s = canonical_chsh();
        let hats = hat_operators(&s).unwrap();
        let a = &s.alice[0][0];
        assert!((&hats.alice[0][0] - a.transpose()).norm() < 1e-14);
        let psi = s.pure_vector("t").unwrap();
        assert!(alice_hat_residual(a, &hats.alice[0][0], &psi, s.dims).unwrap() < 1e-14);
    }

    #[test]
    fn hat_of_x_on_asymmetric_state() {
        let psi = basis(4, 0) * re(0.9f64.sqrt()) + basis(4, 3) * re(0.1f64.sqrt());
        let s = Strategy::pure(
            psi.clone(),
            (2, 2),
            vec![vec![pauli_x(), identity(2) - pauli_x()]],
            vec![vec![identity(2)]],
        )
        .unwrap();
        let hats = hat_operators(&s).unwrap();
        let expected = real_matrix(2, &[0.0, 3.0, 1.0 / 3.0, 0.0]);
        assert!((&hats.alice[0][0] - expected).norm() < 1e-12);
        assert!(alice_hat_residual(&pauli_x(), &hats.alice[0][0], &psi, (2, 2)).unwrap() < 1e-14);
    }

    #[test]
    fn hat_of_support_projection() {
        let mut rng = seeded(31);
        let psi = random_state_with_rank(3, 4, 2, &mut rng);
        let sd = schmidt_decompose(&psi, (3, 4), RANK_TOL).unwrap();
        let (pa, pb) = local_supports(&sd);
        let s = Strategy::pure(
            psi.clone(),
            (3, 4),
            vec![vec![pa.clone(), identity(3) - &pa]],
            vec![vec![identity(4)]],
        )
        .unwrap();
        let hats = hat_operators(&s).unwrap();
        assert!((&hats.alice[0][0] - pb).norm() < 1e-12);
        assert!(alice_hat_residual(&pa, &hats.alice[0][0], &psi, (3, 4)).unwrap() < 1e-12);
    }

    #[test]
    fn mixed_input_rejected() {
        let s = Strategy::new(
            (2, 2),
            State::Mixed(identity(4).scale(0.25)),
            vec![vec![identity(2)]],
            vec![vec![identity(2)]],
        )
        .unwrap();
        assert!(matches!(strategy_metrics(&s), Err(Error::MixedState(_))));
    }
}
