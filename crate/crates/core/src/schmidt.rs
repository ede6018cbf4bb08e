//! Schmidt decomposition, local supports, restriction and purification.

use crate::error::{Error, Result};
use crate::random::hermitize;
use crate::strategy::{Povm, State, Strategy};
use crate::tensor::{
    ensure_square, fix_phase, hermitian_eig, re, reshape_state, svd, Operator, StateVector,
};

/// Default rank cutoff, relative to the largest Schmidt coefficient.
pub const RANK_TOL: f64 = 1e-10;

/// `ψ = Σ_i λ_i e_i ⊗ f_i` with `λ` descending.
#[derive(Debug, Clone)]
pub struct SchmidtData {
    pub coefficients: Vec<f64>,
    /// `d_A x rank`, column `i` is `e_i`.
    pub left_vectors: Operator,
    /// `d_B x rank`, column `i` is `f_i`.
    pub right_vectors: Operator,
    pub rank: usize,
    pub dims: (usize, usize),
}

impl SchmidtData {
    pub fn is_full_rank(&self) -> bool {
        self.rank == self.dims.0 && self.rank == self.dims.1
    }

    pub fn reconstruct(&self) -> StateVector {
        let (da, db) = self.dims;
        let mut psi = StateVector::zeros(da * db);
        for (i, &l) in self.coefficients.iter().enumerate() {
            psi += self.left_vectors.column(i).kronecker(&self.right_vectors.column(i)) * re(l);
        }
        psi
    }
}

pub fn schmidt_decompose(psi: &StateVector, dims: (usize, usize), rank_tol: f64) -> Result<SchmidtData> {
    let m = reshape_state(psi, dims)?;
    let d = svd(&m)?;
    let top = d.singular_values.first().copied().unwrap_or(0.0);
    let kept: Vec<usize> = (0..d.singular_values.len())
        .filter(|&i| top > 0.0 && d.singular_values[i] > rank_tol * top)
        .collect();
    let rank = kept.len();
    let (da, db) = dims;
    let mut left = Operator::zeros(da, rank);
    let mut right = Operator::zeros(db, rank);
    let mut coefficients = Vec::with_capacity(rank);
    for (k, &i) in kept.iter().enumerate() {
        let mut e = d.u.column(i).into_owned();
        // Ψ = U Σ V*, so f_i[j] = (V*)[i, j].
        let mut f = d.v.column(i).map(|z| z.conj());
        let before = e.clone();
        fix_phase(&mut e);
        if let Some(p) = before.iter().zip(e.iter()).find(|(_, b)| b.norm() > 0.0) {
            // before = phase * e, push the phase onto f.
            let phase = p.0 / p.1;
            f *= phase;
        }
        left.set_column(k, &e);
        right.set_column(k, &f);
        coefficients.push(d.singular_values[i]);
    }
    Ok(SchmidtData {
        coefficients,
        left_vectors: left,
        right_vectors: right,
        rank,
        dims,
    })
}

pub fn schmidt_rank(psi: &StateVector, dims: (usize, usize)) -> Result<usize> {
    Ok(schmidt_decompose(psi, dims, RANK_TOL)?.rank)
}

/// `(Π_A, Π_B)`, the projections onto the local supports.
pub fn local_supports(sd: &SchmidtData) -> (Operator, Operator) {
    (
        &sd.left_vectors * sd.left_vectors.adjoint(),
        &sd.right_vectors * sd.right_vectors.adjoint(),
    )
}

/// A restricted strategy with the isometries `U_A: C^k → H_A`, `U_B: C^k → H_B`.
#[derive(Debug, Clone)]
pub struct Restriction {
    pub strategy: Strategy,
    pub u_a: Operator,
    pub u_b: Operator,
    pub schmidt: SchmidtData,
}

fn compress(fams: &[Povm], u: &Operator) -> Vec<Povm> {
    fams.iter()
        .map(|f| f.iter().map(|e| hermitize(&(u.adjoint() * e * u))).collect())
        .collect()
}

/// Compression of a pure strategy to the local supports of its state.
pub fn restrict(s: &Strategy) -> Result<Restriction> {
    let psi = s.pure_vector("restrict")?;
    let sd = schmidt_decompose(&psi, s.dims, RANK_TOL)?;
    let k = sd.rank;
    let mut reduced = StateVector::zeros(k * k);
    for (i, &l) in sd.coefficients.iter().enumerate() {
        reduced[i * k + i] = re(l);
    }
    let norm = reduced.norm();
    reduced /= re(norm);
    let strategy = Strategy::new(
        (k, k),
        State::Pure(reduced),
        compress(&s.alice, &sd.left_vectors),
        compress(&s.bob, &sd.right_vectors),
    )?;
    Ok(Restriction {
        strategy,
        u_a: sd.left_vectors.clone(),
        u_b: sd.right_vectors.clone(),
        schmidt: sd,
    })
}

/// Purification `ψ = Σ √p_i v_i ⊗ |i⟩_P` on `H ⊗ H_P` with `dim H_P = rank ρ`.
#[derive(Debug, Clone)]
pub struct Purification {
    pub state: StateVector,
    pub dim_p: usize,
}

pub fn purify(rho: &Operator) -> Result<Purification> {
    let d = ensure_square(rho)?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::InvalidDensity(format!("trace is {tr}")));
    }
    let spec = hermitian_eig(rho).map_err(|e| Error::InvalidDensity(e.to_string()))?;
    if spec.min_eigenvalue() < -1e-9 {
        return Err(Error::InvalidDensity(format!(
            "eigenvalue {:e} is negative",
            spec.min_eigenvalue()
        )));
    }
    let top = spec.eigenvalues[0];
    let r = spec.eigenvalues.iter().filter(|&&p| p > 1e-12 * top.max(1.0)).count();
    let mut state = StateVector::zeros(d * r);
    for i in 0..r {
        let w = spec.eigenvalues[i].sqrt();
        for a in 0..d {
            state[a * r + i] = spec.eigenvectors[(a, i)] * w;
        }
    }
    Ok(Purification { state, dim_p: r })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::canonical_chsh;
    use crate::random::{random_density, random_state_with_rank, random_unitary, seeded};
    use crate::strategy::{attach_product_ancilla, correlation_of};
    use crate::tensor::{apply_local, basis, identity, partial_trace, projector, Keep};

    fn phi_plus() -> StateVector {
        (basis(4, 0) + basis(4, 3)) / re(2f64.sqrt())
    }

    fn phi_plus_3() -> StateVector {
        (basis(9, 0) + basis(9, 8)) / re(2f64.sqrt())
    }

    #[test]
    fn phi_plus_coefficients() {
        let sd = schmidt_decompose(&phi_plus(), (2, 2), RANK_TOL).unwrap();
        assert_eq!(sd.rank, 2);
        for c in &sd.coefficients {
            assert!((c - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        }
        assert!((sd.reconstruct() - phi_plus()).norm() < 1e-14);
        let (pa, pb) = local_supports(&sd);
        assert!((pa - identity(2)).norm() < 1e-14);
        assert!((pb - identity(2)).norm() < 1e-14);
    }

    #[test]
    fn product_state() {
        let sd = schmidt_decompose(&basis(4, 0), (2, 2), RANK_TOL).unwrap();
        assert_eq!(sd.rank, 1);
        assert!((sd.coefficients[0] - 1.0).abs() < 1e-15);
        let (pa, _) = local_supports(&sd);
        assert!((pa - projector(&basis(2, 0))).norm() < 1e-14);
    }

    #[test]
    fn rank_deficient_qutrits() {
        let sd = schmidt_decompose(&phi_plus_3(), (3, 3), RANK_TOL).unwrap();
        assert_eq!(sd.rank, 2);
        assert!(!sd.is_full_rank());
        let (pa, _) = local_supports(&sd);
        let expected = projector(&basis(3, 0)) + projector(&basis(3, 2));
        assert!((pa - expected).norm() < 1e-14);
    }

    #[test]
    fn left_phase_convention() {
        let mut rng = seeded(4);
        let psi = random_state_with_rank(3, 4, 3, &mut rng);
        let sd = schmidt_decompose(&psi, (3, 4), RANK_TOL).unwrap();
        assert!((sd.reconstruct() - &psi).norm() < 1e-12);
        for k in 0..sd.rank {
            let col = sd.left_vectors.column(k);
            let max = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let pivot = col.iter().find(|z| z.norm() >= max - 1e-12).unwrap();
            assert!(pivot.im.abs() < 1e-14 && pivot.re > 0.0);
        }
    }

    #[test]
    fn rank_invariant_under_local_unitaries() {
        let mut rng = seeded(5);
        for r in 1..=3 {
            let psi = random_state_with_rank(3, 3, r, &mut rng);
            let ua = random_unitary(3, &mut rng);
            let ub = random_unitary(3, &mut rng);
            let moved = apply_local(&ua, &ub, &psi, (3, 3)).unwrap();
            assert_eq!(schmidt_rank(&psi, (3, 3)).unwrap(), r);
            assert_eq!(schmidt_rank(&moved, (3, 3)).unwrap(), r);
        }
    }

    #[test]
    fn support_is_range_of_u() {
        let mut rng = seeded(6);
        let psi = random_state_with_rank(4, 3, 2, &mut rng);
        let s = Strategy::pure(psi, (4, 3), vec![vec![identity(4)]], vec![vec![identity(3)]]).unwrap();
        let r = restrict(&s).unwrap();
        let (pa, pb) = local_supports(&r.schmidt);
        assert!((&r.u_a * r.u_a.adjoint() - pa).norm() < 1e-12);
        assert!((&r.u_b * r.u_b.adjoint() - pb).norm() < 1e-12);
    }

    #[test]
    fn restriction_of_chsh_with_ancilla() {
        let chsh = canonical_chsh();
        let big = attach_product_ancilla(&chsh, &basis(2, 0), &basis(2, 0)).unwrap();
        let r = restrict(&big).unwrap();
        assert_eq!(r.strategy.dims, (2, 2));
        let d = correlation_of(&chsh).unwrap().max_difference(&correlation_of(&r.strategy).unwrap());
        assert!(d < 1e-12);
        // The support is spanned by |i⟩|0⟩, so the restricted operators are the CHSH ones
        // in a basis related by the Schmidt unitary.
        let ua = &r.u_a;
        for (fam_big, fam_res) in big.alice.iter().zip(&r.strategy.alice) {
            for (e, er) in fam_big.iter().zip(fam_res) {
                assert!((ua * er * ua.adjoint() - e * ua * ua.adjoint()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn restriction_of_qutrit_pvms_can_be_non_projective() {
        let psi = phi_plus_3();
        let u = crate::tensor::real_matrix(
            3,
            &[
                1.0 / 2f64.sqrt(), 0.0, 1.0 / 2f64.sqrt(),
                0.0, 1.0, 0.0,
                1.0 / 2f64.sqrt(), 0.0, -1.0 / 2f64.sqrt(),
            ],
        );
        let rotated: Povm = (0..3).map(|k| projector(&u.column(k).into_owned())).collect();
        let z: Povm = (0..3).map(|k| projector(&basis(3, k))).collect();
        let rotated_alt: Povm = vec![
            projector(&crate::tensor::normalize(&(basis(3, 0) + basis(3, 1)))),
            projector(&crate::tensor::normalize(&(basis(3, 0) - basis(3, 1)))),
            projector(&basis(3, 2)),
        ];
        let s = Strategy::pure(psi, (3, 3), vec![z.clone(), rotated_alt], vec![z, rotated]).unwrap();
        let r = restrict(&s).unwrap();
        assert_eq!(r.strategy.dims, (2, 2));
        crate::strategy::ensure_valid(&r.strategy, 1e-9).unwrap();
        let e = &r.strategy.alice[1][0];
        assert!((e * e - e).norm() > 1e-3);
        assert!(matches!(
            restrict(&Strategy {
                state: State::Mixed(identity(9).scale(1.0 / 9.0)),
                ..s
            }),
            Err(Error::MixedState(_))
        ));
    }

    #[test]
    fn purify_pure_state() {
        let rho = projector(&phi_plus());
        let p = purify(&rho).unwrap();
        assert_eq!(p.dim_p, 1);
        let back = partial_trace(&projector(&p.state), (4, 1), Keep::A).unwrap();
        assert!((back - rho).norm() < 1e-12);
    }

    #[test]
    fn purify_maximally_mixed() {
        let p = purify(&identity(4).scale(0.25)).unwrap();
        assert_eq!(p.dim_p, 4);
        assert_eq!(schmidt_rank(&p.state, (4, 4)).unwrap(), 4);
        let back = partial_trace(&projector(&p.state), (4, 4), Keep::A).unwrap();
        assert!((back - identity(4).scale(0.25)).norm() < 1e-12);
    }

    #[test]
    fn purify_rank_two_mixture() {
        let rho = projector(&phi_plus()).scale(0.5) + projector(&basis(4, 0)).scale(0.5);
        let p = purify(&rho).unwrap();
        assert_eq!(p.dim_p, 2);
        let back = partial_trace(&projector(&p.state), (4, 2), Keep::A).unwrap();
        assert!((back - rho).norm() < 1e-10);
    }

    #[test]
    fn purify_random_round_trip() {
        let mut rng = seeded(12);
        for k in 1..=6 {
            let rho = random_density(6, k, &mut rng);
            let p = purify(&rho).unwrap();
            assert_eq!(p.dim_p, k);
            let back = partial_trace(&projector(&p.state), (6, p.dim_p), Keep::A).unwrap();
            assert!((back - rho).norm() < 1e-10);
        }
    }

    #[test]
    fn purify_rejects_non_states() {
        assert!(matches!(purify(&identity(2)), Err(Error::InvalidDensity(_))));
        let bad = crate::tensor::pauli_z().scale(0.5) + identity(2).scale(0.5) - identity(2).scale(0.0);
        assert!(purify(&bad).is_ok());
        let neg = crate::tensor::real_matrix(2, &[1.5, 0.0, 0.0, -0.5]);
        assert!(matches!(purify(&neg), Err(Error::InvalidDensity(_))));
    }
}
