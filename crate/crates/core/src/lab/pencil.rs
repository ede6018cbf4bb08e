use nalgebra::Schur;
use serde::Serialize;

use crate::error::{mismatch, Error, Result};
use crate::schmidt::schmidt_rank;
use crate::tensor::{normalize, reshape_state, svd, Operator, StateVector, C64};

/// Which combination the root refers to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum PencilRoot {
    /// `φ + x ψ`
    PhiPlusXPsi(C64),
    /// `ψ + x φ`, used when `M_ψ` is singular.
    PsiPlusXPhi(C64),
}

impl PencilRoot {
    pub fn value(&self) -> C64 {
        match self {
            PencilRoot::PhiPlusXPsi(x) | PencilRoot::PsiPlusXPhi(x) => *x,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PencilResult {
    pub root: PencilRoot,
    #[serde(skip)]
    pub state: StateVector,
    pub rank: usize,
}

fn relative_smin(m: &Operator) -> Result<f64> {
    let sv = svd(m)?.singular_values;
    let max = sv.first().copied().unwrap_or(0.0);
    Ok(if max == 0.0 { 0.0 } else { sv.last().copied().unwrap_or(0.0) / max })
}

const SINGULAR_TOL: f64 = 1e-10;

/// A normalized combination of `φ, ψ ∈ C^d ⊗ C^d` with Schmidt rank below `d`, from a root of
/// `det(M_φ + x M_ψ) = 0`.
pub fn rank_deficient_combination(phi: &StateVector, psi: &StateVector, d: usize) -> Result<PencilResult> {
    if phi.len() != d * d || psi.len() != d * d {
        return Err(mismatch("rank_deficient_combination", d * d, phi.len().max(psi.len())));
    }
    let residual = psi - phi * (phi.dotc(psi) / C64::from(phi.norm_squared()));
    if phi.norm() == 0.0 || residual.norm() <= 1e-12 * psi.norm() {
        return Err(Error::LinearlyDependent);
    }
    let mphi = reshape_state(phi, (d, d))?;
    let mpsi = reshape_state(psi, (d, d))?;
    let finish = |root: PencilRoot, v: StateVector| -> Result<PencilResult> {
        let state = normalize(&v);
        let rank = schmidt_rank(&state, (d, d))?;
        Ok(PencilResult { root, state, rank })
    };
    if relative_smin(&mphi)? <= SINGULAR_TOL {
        return finish(PencilRoot::PhiPlusXPsi(C64::new(0.0, 0.0)), phi.clone());
    }
    if relative_smin(&mpsi)? <= SINGULAR_TOL {
        return finish(PencilRoot::PsiPlusXPhi(C64::new(0.0, 0.0)), psi.clone());
    }
    // det(M_φ + x M_ψ) = det(M_ψ) det(M_ψ⁻¹ M_φ + x), roots are −eig(M_ψ⁻¹ M_φ).
    let inv = mpsi.clone().try_inverse().ok_or(Error::Eigen("M_ψ is not invertible".into()))?;
    let n = &inv * &mphi;
    let (_, t) = Schur::new(n).unpack();
    let mut best = (C64::new(0.0, 0.0), f64::INFINITY);
    for i in 0..d {
        let x = -t[(i, i)];
        let smin = relative_smin(&(&mphi + &mpsi * x))?;
        if smin < best.1 {
            best = (x, smin);
        }
    }
    finish(PencilRoot::PhiPlusXPsi(best.0), phi + psi * best.0)
}
