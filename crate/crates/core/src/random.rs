//! Seeded random instances: unitaries, Hermitian matrices, POVMs, states.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::tensor::{
    c, hermitian_eig, identity, normalize, psd_inv_sqrt, Operator, StateVector, C64,
};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im) / 2f64.sqrt()
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Operator {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> StateVector {
    normalize(&StateVector::from_fn(d, |_, _| gaussian(rng)))
}

/// Haar-random unitary via QR with the diagonal phase correction.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    let qr = ginibre(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Operator {
    let g = ginibre(d, d, rng);
    (&g + g.adjoint()).scale(0.5)
}

/// Random `m`-outcome POVM on `C^d`: `E_j = T^{-1/2} G_j G_j* T^{-1/2}`.
pub fn random_povm<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Vec<Operator> {
    let raw: Vec<Operator> = (0..m)
        .map(|_| {
            let g = ginibre(d, d, rng);
            &g * g.adjoint()
        })
        .collect();
    let total = raw.iter().fold(Operator::zeros(d, d), |acc, e| acc + e);
    let t = psd_inv_sqrt(&total, 0.0).expect("sum of Gram matrices is Hermitian");
    raw.iter().map(|e| hermitize(&(&t * e * &t))).collect()
}

/// Random `m`-outcome PVM on `C^d`; some projectors may be zero when `m > d`.
pub fn random_pvm<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Vec<Operator> {
    let u = random_unitary(d, rng);
    let mut out = vec![Operator::zeros(d, d); m];
    for k in 0..d {
        let j = if k < m { k } else { rng.random_range(0..m) };
        let v = u.column(k);
        out[j] += v * v.adjoint();
    }
    out
}

/// Random pure bipartite state with Schmidt rank `min(rank, d_a, d_b)`.
pub fn random_state_with_rank<R: Rng + ?Sized>(
    d_a: usize,
    d_b: usize,
    rank: usize,
    rng: &mut R,
) -> StateVector {
    let r = rank.min(d_a).min(d_b).max(1);
    let ua = random_unitary(d_a, rng);
    let ub = random_unitary(d_b, rng);
    let mut coeffs: Vec<f64> = (0..r).map(|_| 0.2 + rng.random::<f64>()).collect();
    let norm = coeffs.iter().map(|x| x * x).sum::<f64>().sqrt();
    coeffs.iter_mut().for_each(|x| *x /= norm);
    let mut psi = StateVector::zeros(d_a * d_b);
    for (i, &l) in coeffs.iter().enumerate() {
        psi += ua.column(i).kronecker(&ub.column(i)) * c(l, 0.0);
    }
    psi
}

pub fn random_density<R: Rng + ?Sized>(d: usize, rank: usize, rng: &mut R) -> Operator {
    let g = ginibre(d, rank.clamp(1, d), rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace();
    hermitize(&(rho / tr))
}

/// Random unitary close to the identity, `exp(i t H)` for a random Hermitian `H`.
pub fn near_identity_unitary<R: Rng + ?Sized>(d: usize, t: f64, rng: &mut R) -> Operator {
    let h = random_hermitian(d, rng);
    let spec = hermitian_eig(&h).expect("random Hermitian");
    let phases = Operator::from_fn(d, d, |i, k| {
        spec.eigenvectors[(i, k)] * C64::from_polar(1.0, t * spec.eigenvalues[k])
    });
    let u = phases * spec.eigenvectors.adjoint();
    debug_assert!((u.adjoint() * &u - identity(d)).norm() < 1e-10);
    u
}

pub(crate) fn hermitize(m: &Operator) -> Operator {
    (m + m.adjoint()).scale(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{is_psd, isometry_defect};

    #[test]
    fn unitary_is_unitary() {
        let mut rng = seeded(1);
        for d in 1..7 {
            assert!(isometry_defect(&random_unitary(d, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn povm_is_complete_and_positive() {
        let mut rng = seeded(2);
        let fam = random_povm(3, 4, &mut rng);
        let sum = fam.iter().fold(Operator::zeros(3, 3), |a, e| a + e);
        assert!((sum - identity(3)).norm() < 1e-12);
        assert!(fam.iter().all(|e| is_psd(e, 1e-12)));
    }

    #[test]
    fn pvm_is_projective() {
        let mut rng = seeded(3);
        for e in random_pvm(4, 3, &mut rng) {
            assert!((&e * &e - &e).norm() < 1e-12);
        }
    }

    #[test]
    fn same_seed_same_draw() {
        let a = random_unitary(3, &mut seeded(9));
        let b = random_unitary(3, &mut seeded(9));
        assert_eq!(a, b);
    }
}
