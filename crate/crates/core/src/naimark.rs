//! Naimark dilations of POVM families and of strategies.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::random::hermitize;
use crate::strategy::{Povm, State, Strategy};
use crate::tensor::{
    apply_local, ensure_square, hermitian_eig, hermiticity_defect, identity, isometry_defect,
    projector, psd_sqrt, range_basis, re, Operator, StateVector, DEFAULT_TOL,
};

/// Projective families on `H'` and an isometry `V: H → H'` with `R_ij = V* P_ij V`.
#[derive(Debug, Clone)]
pub struct NaimarkDilation {
    pub pvms: Vec<Povm>,
    pub isometry: Operator,
    /// `(d, d')`
    pub dims: (usize, usize),
}

fn check_povm(povm: &Povm, d: usize, tol: f64) -> Result<()> {
    if povm.is_empty() {
        return Err(Error::InvalidPovm("no elements".into()));
    }
    let mut sum = Operator::zeros(d, d);
    for (k, e) in povm.iter().enumerate() {
        if e.shape() != (d, d) {
            return Err(Error::InvalidPovm(format!("element {k} has shape {:?}, expected {d}x{d}", e.shape())));
        }
        let herm = hermiticity_defect(e);
        if herm > tol {
            return Err(Error::InvalidPovm(format!("element {k} is not Hermitian (defect {herm:e})")));
        }
        let min = hermitian_eig(&hermitize(e))?.min_eigenvalue();
        if min < -tol {
            return Err(Error::InvalidPovm(format!("element {k} has eigenvalue {min:e}")));
        }
        sum += e;
    }
    let defect = (sum - identity(d)).norm();
    if defect > tol {
        return Err(Error::InvalidPovm(format!("elements sum to identity with defect {defect:e}")));
    }
    Ok(())
}

/// `V φ = Σ_j √R_j φ ⊗ e_j`, `P_j = 1 ⊗ e_j e_j*`.
pub fn naimark_single(povm: &Povm) -> Result<NaimarkDilation> {
    let d = povm.first().map(|e| e.nrows()).unwrap_or(0);
    check_povm(povm, d, DEFAULT_TOL)?;
    Ok(single_unchecked(povm, d))
}

fn single_unchecked(povm: &Povm, d: usize) -> NaimarkDilation {
    let m = povm.len();
    let mut v = Operator::zeros(d * m, d);
    for (j, r) in povm.iter().enumerate() {
        let root = psd_sqrt(&hermitize(r)).expect("Hermitian by construction");
        for i in 0..d {
            for k in 0..d {
                v[(i * m + j, k)] = root[(i, k)];
            }
        }
    }
    let pvm = (0..m)
        .map(|j| Operator::from_fn(d * m, d * m, |r, c| if r == c && r % m == j { re(1.0) } else { re(0.0) }))
        .collect();
    NaimarkDilation {
        pvms: vec![pvm],
        isometry: v,
        dims: (d, d * m),
    }
}

/// `V P V* + (1 − V V*)` on outcome `absorbing`, `V P V*` elsewhere.
pub fn extend_family(fam: &Povm, v: &Operator, absorbing: usize) -> Povm {
    let complement = identity(v.nrows()) - v * v.adjoint();
    fam.iter()
        .enumerate()
        .map(|(j, p)| {
            let mut q = v * p * v.adjoint();
            if j == absorbing {
                q += &complement;
            }
            hermitize(&q)
        })
        .collect()
}

/// Simultaneous dilation of several POVMs on the same space. Families are added one at a
/// time; the identity defect `1 − VV*` is always absorbed into outcome 0.
pub fn naimark_family(povms: &[Povm]) -> Result<NaimarkDilation> {
    let Some(first) = povms.first() else {
        return Err(Error::InvalidPovm("no families to dilate".into()));
    };
    let d = first.first().map(|e| e.nrows()).unwrap_or(0);
    for fam in povms {
        check_povm(fam, d, DEFAULT_TOL)?;
    }
    let mut acc = single_unchecked(first, d);
    for fam in &povms[1..] {
        let v1 = &acc.isometry;
        let lifted = extend_family(fam, v1, 0);
        let step = single_unchecked(&lifted, acc.dims.1);
        let v2 = &step.isometry;
        let mut pvms: Vec<Povm> = acc.pvms.iter().map(|p| extend_family(p, v2, 0)).collect();
        pvms.extend(step.pvms);
        let isometry = v2 * v1;
        acc = NaimarkDilation {
            pvms,
            dims: (d, isometry.nrows()),
            isometry,
        };
    }
    Ok(acc)
}

/// The identity dilation of a family of projective measurements.
pub fn identity_dilation(pvms: &[Povm], d: usize) -> NaimarkDilation {
    NaimarkDilation {
        pvms: pvms.to_vec(),
        isometry: identity(d),
        dims: (d, d),
    }
}

/// A projective strategy `((V_A ⊗ V_B)ψ, {P}, {Q})` with its isometries.
#[derive(Debug, Clone)]
pub struct NaimarkStrategy {
    pub strategy: Strategy,
    pub v_a: Operator,
    pub v_b: Operator,
}

fn dilate_side(fams: &[Povm], d: usize) -> Result<NaimarkDilation> {
    if fams.is_empty() {
        Ok(identity_dilation(&[], d))
    } else {
        naimark_family(fams)
    }
}

pub fn naimark_strategy(s: &Strategy) -> Result<NaimarkStrategy> {
    let psi = s.pure_vector("naimark_strategy")?;
    let da = dilate_side(&s.alice, s.dims.0)?;
    let db = dilate_side(&s.bob, s.dims.1)?;
    let state = apply_local(&da.isometry, &db.isometry, &psi, s.dims)?;
    let strategy = Strategy::new((da.dims.1, db.dims.1), State::Pure(state), da.pvms, db.pvms)?;
    Ok(NaimarkStrategy {
        strategy,
        v_a: da.isometry,
        v_b: db.isometry,
    })
}

/// Compression of the generic dilation of one POVM to `span{P_j V φ}`, whose dimension is
/// `Σ_j rank R_j`.
pub fn minimal_single_dilation(povm: &Povm) -> Result<NaimarkDilation> {
    let generic = naimark_single(povm)?;
    let v = &generic.isometry;
    let span = generic.pvms[0]
        .iter()
        .fold(Operator::zeros(v.nrows(), v.nrows()), |acc, p| acc + p * v * v.adjoint() * p);
    let k = range_basis(&span, 1e-12)?;
    let pvm = generic.pvms[0].iter().map(|p| hermitize(&(k.adjoint() * p * &k))).collect();
    let isometry = k.adjoint() * v;
    Ok(NaimarkDilation {
        pvms: vec![pvm],
        dims: (povm[0].nrows(), k.ncols()),
        isometry,
    })
}

/// The trine vectors `e_0, e_1, e_2` in `C^3`.
pub fn trine_vectors() -> [StateVector; 3] {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let s6 = 6f64.sqrt();
    [
        StateVector::from_vec(vec![re(s2 / s3), re(0.0), re(1.0 / s3)]),
        StateVector::from_vec(vec![re(-1.0 / s6), re(-s3 / s6), re(s2 / s6)]),
        StateVector::from_vec(vec![re(-1.0 / s6), re(s3 / s6), re(s2 / s6)]),
    ]
}

/// The canonical embedding `C^2 → C^3`.
pub fn trine_embedding() -> Operator {
    Operator::from_fn(3, 2, |i, j| if i == j { re(1.0) } else { re(0.0) })
}

/// Minimal dilation of Bob's three measurements in the trine strategy, in Bob's question
/// order `[𝓗, 𝓖, 𝓜]`. The `+1` projectors of `H` and `G` absorb `1 − VV*`.
pub fn minimal_trine_dilation() -> NaimarkDilation {
    let v = trine_embedding();
    let bob = crate::lab::trine_strategy().bob;
    let h = extend_family(&bob[0], &v, crate::lab::H_PLUS);
    let g = extend_family(&bob[1], &v, crate::lab::G_PLUS);
    let m: Povm = trine_vectors().iter().map(projector).collect();
    NaimarkDilation {
        pvms: vec![h, g, m],
        isometry: v,
        dims: (2, 3),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ElementDefect {
    pub family: usize,
    pub outcome: usize,
    /// `‖R − V* P V‖_F`
    pub reproduction: f64,
    /// `‖P² − P‖_F`
    pub idempotence: f64,
    /// `‖P − P*‖_F`
    pub hermiticity: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DilationCheck {
    pub passed: bool,
    pub isometry_defect: f64,
    pub completeness: Vec<f64>,
    pub elements: Vec<ElementDefect>,
    pub worst: f64,
}

impl DilationCheck {
    /// The element with the largest defect.
    pub fn worst_element(&self) -> Option<&ElementDefect> {
        self.elements.iter().max_by(|a, b| {
            let ka = a.reproduction.max(a.idempotence).max(a.hermiticity);
            let kb = b.reproduction.max(b.idempotence).max(b.hermiticity);
            ka.total_cmp(&kb)
        })
    }
}

/// Checks `V*V = 1`, projectivity and completeness of every `P`, and `R = V* P V`.
pub fn verify_dilation(povms: &[Povm], d: &NaimarkDilation, tol: f64) -> Result<DilationCheck> {
    let v = &d.isometry;
    let big = v.nrows();
    if povms.len() != d.pvms.len() {
        return Err(Error::InvalidPovm(format!(
            "{} families given, dilation has {}",
            povms.len(),
            d.pvms.len()
        )));
    }
    let isometry_defect = isometry_defect(v);
    let mut elements = Vec::new();
    let mut completeness = Vec::new();
    for (i, (fam, pfam)) in povms.iter().zip(&d.pvms).enumerate() {
        if fam.len() != pfam.len() {
            return Err(Error::InvalidPovm(format!("family {i}: outcome counts differ")));
        }
        let mut sum = Operator::zeros(big, big);
        for (j, (r, p)) in fam.iter().zip(pfam).enumerate() {
            ensure_square(p)?;
            sum += p;
            elements.push(ElementDefect {
                family: i,
                outcome: j,
                reproduction: (r - v.adjoint() * p * v).norm(),
                idempotence: (p * p - p).norm(),
                hermiticity: hermiticity_defect(p),
            });
        }
        completeness.push((sum - identity(big)).norm());
    }
    let worst = elements
        .iter()
        .flat_map(|e| [e.reproduction, e.idempotence, e.hermiticity])
        .chain(completeness.iter().copied())
        .fold(isometry_defect, f64::max);
    Ok(DilationCheck {
        passed: worst <= tol,
        isometry_defect,
        completeness,
        elements,
        worst,
    })
}
