use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::random::{gaussian, hermitize, random_density, random_hermitian, random_vector, seeded};
use crate::strategy::{game_operator, NonlocalGame, Povm, State, Strategy};
use crate::tensor::{hermitian_eig, identity, normalize, psd_inv_sqrt, re, Operator, StateVector};

use super::{canonical_chsh, chsh_game, eigengap_analysis, phi_plus};

/// Top eigenvector of the game operator for the measurements of `s`, and its eigenvalue.
pub fn seesaw_state(g: &NonlocalGame, s: &Strategy) -> Result<(StateVector, f64)> {
    let w = game_operator(g, s)?;
    let spec = hermitian_eig(&w)?;
    Ok((spec.vector(0), spec.eigenvalues[0]))
}

/// `normalize((1 − m) ψ + m r)` for a random unit vector `r`.
pub fn perturb_state<R: Rng + ?Sized>(psi: &StateVector, magnitude: f64, rng: &mut R) -> StateVector {
    let r = random_vector(psi.len(), rng);
    let mixed = psi * re(1.0 - magnitude) + r * re(magnitude);
    if mixed.norm() == 0.0 {
        // ψ and r exactly opposite at m = 1/2: fall back to the random direction.
        return random_vector(psi.len(), rng);
    }
    normalize(&mixed)
}

fn perturb_family<R: Rng + ?Sized>(fam: &Povm, magnitude: f64, rng: &mut R) -> Povm {
    let d = fam[0].nrows();
    let n = fam.len() as f64;
    let mut clipped: Vec<Operator> = fam
        .iter()
        .map(|e| {
            let moved = hermitize(&(e + random_hermitian(d, rng).scale(magnitude)));
            hermitian_eig(&moved).expect("Hermitian").apply_fn(|x| x.max(0.0))
        })
        .collect();
    let mut total = clipped.iter().fold(Operator::zeros(d, d), |a, e| a + e);
    if hermitian_eig(&total).expect("Hermitian").min_eigenvalue() < 1e-8 {
        for e in clipped.iter_mut() {
            *e += identity(d).scale(1e-8 / n);
        }
        total += identity(d).scale(1e-8);
    }
    let t = psd_inv_sqrt(&total, 0.0).expect("Hermitian");
    clipped.iter().map(|e| hermitize(&(&t * e * &t))).collect()
}

/// Seeded perturbation of the state and every measurement, reprojected onto valid POVMs.
pub fn perturb_strategy(s: &Strategy, magnitude: f64, seed: u64) -> Strategy {
    if magnitude == 0.0 {
        return s.clone();
    }
    let mut rng = seeded(seed);
    let state = match &s.state {
        State::Pure(psi) => State::Pure(perturb_state(psi, magnitude, &mut rng)),
        State::Mixed(rho) => {
            let tau = random_density(rho.nrows(), rho.nrows(), &mut rng);
            State::Mixed(hermitize(&(rho.scale(1.0 - magnitude) + tau.scale(magnitude))))
        }
    };
    let alice = s.alice.iter().map(|f| perturb_family(f, magnitude, &mut rng)).collect();
    let bob = s.bob.iter().map(|f| perturb_family(f, magnitude, &mut rng)).collect();
    Strategy {
        dims: s.dims,
        state,
        alice,
        bob,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub magnitudes: Vec<f64>,
    pub seeds_per_magnitude: usize,
    pub seed: u64,
    /// Dimension of the auxiliary factor the perturbed state lives on.
    pub aux_dim: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            magnitudes: vec![0.001, 0.003, 0.01, 0.03, 0.1],
            seeds_per_magnitude: 40,
            seed: 0,
            aux_dim: 2,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RobustnessRow {
    pub magnitude: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub bound: f64,
}

/// Perturbs `|Φ⁺⟩ ⊗ |aux⟩` on `C^4 ⊗ C^k` and reports, per sample, the optimality gap
/// `δ = λ0 − ⟨φ|W ⊗ 1|φ⟩`, the distance `min ‖φ − Φ⁺ ⊗ aux‖` and the bound `√(2δ/Δ)`.
pub fn robustness_sweep(cfg: &SweepConfig) -> Result<Vec<RobustnessRow>> {
    let w = game_operator(&chsh_game(), &canonical_chsh())?;
    let k = cfg.aux_dim.max(1);
    let jobs: Vec<(usize, f64)> = cfg
        .magnitudes
        .iter()
        .flat_map(|&m| std::iter::repeat_n(m, cfg.seeds_per_magnitude))
        .enumerate()
        .collect();
    jobs.par_iter()
        .map(|&(j, m)| {
            let mut rng = seeded(cfg.seed.wrapping_add(j as u64));
            let aux = normalize(&StateVector::from_fn(k, |_, _| gaussian(&mut rng)));
            let start = phi_plus().kronecker(&aux);
            let phi = perturb_state(&start, m, &mut rng);
            let probe = eigengap_analysis(&w, &phi_plus(), &phi, 0.0)?;
            let delta = probe.delta.max(0.0);
            let report = eigengap_analysis(&w, &phi_plus(), &phi, delta)?;
            Ok(RobustnessRow {
                magnitude: m,
                delta,
                epsilon: report.state_bound,
                bound: report.distance_bound,
            })
        })
        .collect()
}
