//! Local ε-dilation residuals (vector, matrix and extraction forms) and witness constructions.
//!
//! A witness maps the source strategy's local spaces into `H̃ ⊗ Ĥ`, where `H̃` is the target
//! strategy's local space. Bipartite vectors on `(H̃_A ⊗ Ĥ_A) ⊗ (H̃_B ⊗ Ĥ_B ⊗ H_P)` are handled
//! as matrices with rows `(ã, â)` and columns `(b̃, b̂, p)`, so `ψ̃ ⊗ aux` is `kron(Ψ̃, AUX)`.

use serde::Serialize;

use crate::error::{mismatch, Error, Result};
use crate::naimark::naimark_strategy;
use crate::random::{random_unitary, seeded};
use crate::schmidt::{purify, restrict, schmidt_decompose, RANK_TOL};
use crate::strategy::{Povm, State, Strategy};
use crate::tensor::{
    complete_to_unitary, flatten_state, identity, isometry_defect, kron, normalize, partial_trace,
    re, reshape_state, swap_middle_factors, Keep, Operator, StateVector, C64,
};

/// Number of random `H_P` unitaries applied in the purification-robustness mode.
pub const PURIFICATION_PROBES: usize = 8;

const ISOMETRY_TOL: f64 = 1e-9;

/// Local isometries `U_A: H_A → H̃_A ⊗ Ĥ_A`, `U_B: H_B → H̃_B ⊗ Ĥ_B` and `|aux⟩ ∈ Ĥ_A ⊗ Ĥ_B`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationWitness {
    pub u_a: Operator,
    pub u_b: Operator,
    pub aux: StateVector,
}

impl DilationWitness {
    /// The identity witness on `dims` with a scalar auxiliary state.
    pub fn identity(dims: (usize, usize)) -> Self {
        Self {
            u_a: identity(dims.0),
            u_b: identity(dims.1),
            aux: StateVector::from_element(1, re(1.0)),
        }
    }

    /// `(dim Ĥ_A, dim Ĥ_B)` given the target local dimensions.
    pub fn ancilla_dims(&self, target: (usize, usize)) -> Result<(usize, usize)> {
        let (ta, tb) = target;
        if ta == 0 || !self.u_a.nrows().is_multiple_of(ta) {
            return Err(mismatch("witness U_A rows (multiple of target dim)", ta, self.u_a.nrows()));
        }
        if tb == 0 || !self.u_b.nrows().is_multiple_of(tb) {
            return Err(mismatch("witness U_B rows (multiple of target dim)", tb, self.u_b.nrows()));
        }
        Ok((self.u_a.nrows() / ta, self.u_b.nrows() / tb))
    }

    fn check_isometries(&self) -> Result<()> {
        for (what, u) in [("U_A", &self.u_a), ("U_B", &self.u_b)] {
            let defect = isometry_defect(u);
            if defect > ISOMETRY_TOL {
                return Err(Error::NotIsometry {
                    what: what.into(),
                    defect,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidualReport {
    pub state_residual: f64,
    /// `[question][answer]`
    pub alice: Vec<Vec<f64>>,
    pub bob: Vec<Vec<f64>>,
    pub eps: f64,
    /// Number of purifications checked (1 for pure sources).
    pub purifications: usize,
}

impl ResidualReport {
    fn from_rows(state_residual: f64, alice: Vec<Vec<f64>>, bob: Vec<Vec<f64>>) -> Self {
        let eps = alice
            .iter()
            .chain(&bob)
            .flatten()
            .copied()
            .fold(state_residual, f64::max);
        Self {
            state_residual,
            alice,
            bob,
            eps,
            purifications: 1,
        }
    }

    fn merge_max(self, other: ResidualReport) -> Self {
        let zip = |x: Vec<Vec<f64>>, y: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            x.into_iter()
                .zip(y)
                .map(|(a, b)| a.into_iter().zip(b).map(|(p, q)| p.max(q)).collect())
                .collect()
        };
        let mut r = Self::from_rows(
            self.state_residual.max(other.state_residual),
            zip(self.alice, other.alice),
            zip(self.bob, other.bob),
        );
        r.purifications = self.purifications + other.purifications;
        r
    }
}

fn check_layout(src: &Strategy, dst: &Strategy) -> Result<()> {
    if src.alice_answer_counts() != dst.alice_answer_counts()
        || src.bob_answer_counts() != dst.bob_answer_counts()
    {
        return Err(Error::InvalidStrategy(format!(
            "question/answer layouts differ: source Alice {:?} Bob {:?}, target Alice {:?} Bob {:?}",
            src.alice_answer_counts(),
            src.bob_answer_counts(),
            dst.alice_answer_counts(),
            dst.bob_answer_counts()
        )));
    }
    Ok(())
}

/// `kron(1_A ⊗ X ⊗ 1_P)`-free evaluation of every residual row.
struct Rows<'a> {
    src: &'a Strategy,
    dst: &'a Strategy,
    /// Source state as a `d_A x (d_B d_P)` matrix.
    psi: Operator,
    dp: usize,
}

impl Rows<'_> {
    fn evaluate(&self, w: &DilationWitness, aux: &Operator) -> Result<ResidualReport> {
        let psi_t = reshape_state(&self.dst.pure_vector("dilation target")?, self.dst.dims)?;
        let ip = identity(self.dp);
        let ub_ext = kron(&w.u_b, &ip);
        let left = &w.u_a * &self.psi;
        let state = (&left * ub_ext.transpose() - kron(&psi_t, aux)).norm();
        let alice = self
            .src
            .alice
            .iter()
            .zip(&self.dst.alice)
            .map(|(fam, tfam)| {
                fam.iter()
                    .zip(tfam)
                    .map(|(a, ta)| {
                        let lhs = &w.u_a * a * &self.psi * ub_ext.transpose();
                        (lhs - kron(&(ta * &psi_t), aux)).norm()
                    })
                    .collect()
            })
            .collect();
        let bob = self
            .src
            .bob
            .iter()
            .zip(&self.dst.bob)
            .map(|(fam, tfam)| {
                fam.iter()
                    .zip(tfam)
                    .map(|(b, tb)| {
                        let lhs = &left * kron(&(&w.u_b * b), &ip).transpose();
                        (lhs - kron(&(&psi_t * tb.transpose()), aux)).norm()
                    })
                    .collect()
            })
            .collect();
        Ok(ResidualReport::from_rows(state, alice, bob))
    }
}

fn check_witness_shapes(src: &Strategy, dst: &Strategy, w: &DilationWitness) -> Result<(usize, usize)> {
    if w.u_a.ncols() != src.dims.0 {
        return Err(mismatch("witness U_A columns", src.dims.0, w.u_a.ncols()));
    }
    if w.u_b.ncols() != src.dims.1 {
        return Err(mismatch("witness U_B columns", src.dims.1, w.u_b.ncols()));
    }
    w.ancilla_dims(dst.dims)
}

/// `(⟨ψ̃| ⊗ 1) M` for `M` with rows `(ã, â)` and columns `(b̃, c)`: a `d_Â x d_c` matrix.
fn project_out_target(m: &Operator, psi_t: &Operator, da_hat: usize, dc: usize) -> Operator {
    let (ta, tb) = psi_t.shape();
    Operator::from_fn(da_hat, dc, |ah, c| {
        let mut acc = C64::new(0.0, 0.0);
        for at in 0..ta {
            for bt in 0..tb {
                acc += psi_t[(at, bt)].conj() * m[(at * da_hat + ah, bt * dc + c)];
            }
        }
        acc
    })
}

/// Vector-form residuals of `src ↪ dst` for the witness `w`.
///
/// Pure sources use `w.aux`. Mixed sources are purified spectrally; the auxiliary state on
/// `Ĥ_A ⊗ Ĥ_B ⊗ H_P` is then recovered from the purification, and the check is repeated under
/// [`PURIFICATION_PROBES`] seeded random unitaries on `H_P`, reporting the maximum.
pub fn dilation_residuals(src: &Strategy, dst: &Strategy, w: &DilationWitness) -> Result<ResidualReport> {
    dilation_residuals_with_probes(src, dst, w, PURIFICATION_PROBES, 0)
}

pub fn dilation_residuals_with_probes(
    src: &Strategy,
    dst: &Strategy,
    w: &DilationWitness,
    probes: usize,
    seed: u64,
) -> Result<ResidualReport> {
    src.check_dims()?;
    dst.check_dims()?;
    check_layout(src, dst)?;
    let (ha, hb) = check_witness_shapes(src, dst, w)?;
    w.check_isometries()?;
    let psi_t = reshape_state(&dst.pure_vector("dilation target")?, dst.dims)?;
    match &src.state {
        State::Pure(psi) => {
            if w.aux.len() != ha * hb {
                return Err(mismatch("witness aux", ha * hb, w.aux.len()));
            }
            let rows = Rows {
                src,
                dst,
                psi: reshape_state(psi, src.dims)?,
                dp: 1,
            };
            rows.evaluate(w, &reshape_state(&w.aux, (ha, hb))?)
        }
        State::Mixed(rho) => {
            let pur = purify(rho)?;
            let dp = pur.dim_p;
            let (da, db) = src.dims;
            let base = reshape_state(&pur.state, (da, db * dp))?;
            let mut rng = seeded(seed);
            let mut report: Option<ResidualReport> = None;
            for k in 0..=probes {
                let q = if k == 0 { identity(dp) } else { random_unitary(dp, &mut rng) };
                let psi = &base * kron(&identity(db), &q).transpose();
                let rows = Rows {
                    src,
                    dst,
                    psi,
                    dp,
                };
                let image = &w.u_a * &rows.psi * kron(&w.u_b, &identity(dp)).transpose();
                let aux = project_out_target(&image, &psi_t, ha, hb * dp);
                let n = aux.norm();
                if n <= 1e-6 {
                    return Err(Error::AuxRecovery { norm: n });
                }
                let r = rows.evaluate(w, &(aux / re(n)))?;
                report = Some(match report {
                    None => r,
                    Some(prev) => prev.merge_max(r),
                });
            }
            Ok(report.expect("at least one purification"))
        }
    }
}

/// Source, target and a witness for `src ↪ dst`.
#[derive(Debug, Clone)]
pub struct Embedding {
    pub src: Strategy,
    pub dst: Strategy,
    pub witness: DilationWitness,
}

/// The restriction `S_res` and the witness `S_res ↪ S` given by the support isometries.
pub fn restriction_embedding(s: &Strategy) -> Result<Embedding> {
    let pure = s.to_pure("restriction_embedding")?;
    let r = restrict(&pure)?;
    Ok(Embedding {
        src: r.strategy,
        dst: pure,
        witness: DilationWitness {
            u_a: r.u_a,
            u_b: r.u_b,
            aux: StateVector::from_element(1, re(1.0)),
        },
    })
}

/// The Naimark dilation `S_Naimark` and the witness `S ↪ S_Naimark` given by `V_A, V_B`.
pub fn naimark_embedding(s: &Strategy) -> Result<Embedding> {
    let pure = s.to_pure("naimark_embedding")?;
    let n = naimark_strategy(&pure)?;
    Ok(Embedding {
        src: pure,
        dst: n.strategy,
        witness: DilationWitness {
            u_a: n.v_a,
            u_b: n.v_b,
            aux: StateVector::from_element(1, re(1.0)),
        },
    })
}

/// `L`: `e_i ↦ e_i ⊗ |0⟩` for `i < n`, the remaining `big − n` coordinates onto the other
/// slots of `C^n ⊗ C^r` in order.
fn padding_embedding(n: usize, big: usize, r: usize) -> Operator {
    let mut l = Operator::zeros(n * r, big);
    for i in 0..n.min(big) {
        l[(i * r, i)] = re(1.0);
    }
    let free = (0..n * r).filter(|k| k % r != 0);
    for (col, row) in (n..big).zip(free) {
        l[(row, col)] = re(1.0);
    }
    l
}

/// From a witness for `src ↪ dst` whose auxiliary state is a product, a witness for
/// `dst ↪ src` with auxiliary state `|0⟩|0⟩` and the same residuals.
pub fn reverse_witness(src: &Strategy, dst: &Strategy, w: &DilationWitness) -> Result<DilationWitness> {
    if !src.is_pure() {
        return Err(Error::MixedState("reverse_witness"));
    }
    check_layout(src, dst)?;
    let (ha, hb) = check_witness_shapes(src, dst, w)?;
    w.check_isometries()?;
    if w.aux.len() != ha * hb {
        return Err(mismatch("witness aux", ha * hb, w.aux.len()));
    }
    let sd = schmidt_decompose(&normalize(&w.aux), (ha, hb), 1e-8)?;
    if sd.rank != 1 {
        return Err(Error::EntangledAux {
            schmidt_rank: sd.rank,
        });
    }
    let a = sd.left_vectors.column(0).into_owned();
    let b = sd.right_vectors.column(0) * re(sd.coefficients[0]);
    let (na, nb) = src.dims;
    let (big_a, big_b) = (w.u_a.nrows(), w.u_b.nrows());
    let r = big_a.div_ceil(na).max(big_b.div_ceil(nb)).max(1);
    let side = |u: &Operator, anc: &StateVector, n: usize, target: usize| -> Result<Operator> {
        // J: x ↦ x ⊗ anc on H̃ ⊗ Ĥ.
        let j = kron(&identity(target), &Operator::from_column_slice(anc.len(), 1, anc.as_slice()));
        let full = complete_to_unitary(u)?;
        Ok(padding_embedding(n, u.nrows(), r) * full.adjoint() * j)
    };
    let u_a = side(&w.u_a, &a, na, dst.dims.0)?;
    let u_b = side(&w.u_b, &b.into_owned(), nb, dst.dims.1)?;
    let mut aux = StateVector::zeros(r * r);
    aux[0] = re(1.0);
    let out = DilationWitness { u_a, u_b, aux };
    out.check_isometries()?;
    Ok(out)
}

/// Composition of `w1: X ↪ Y` and `w2: Y ↪ Z` into `X ↪ Z`, with ancilla `Ĥ₂ ⊗ Ĥ₁`.
pub fn compose(
    w1: &DilationWitness,
    y_dims: (usize, usize),
    w2: &DilationWitness,
    z_dims: (usize, usize),
) -> Result<DilationWitness> {
    let (a1, b1) = w1.ancilla_dims(y_dims)?;
    let (a2, b2) = w2.ancilla_dims(z_dims)?;
    if w2.u_a.ncols() != y_dims.0 || w2.u_b.ncols() != y_dims.1 {
        return Err(mismatch("compose: second witness domain", y_dims.0, w2.u_a.ncols()));
    }
    let aux1 = reshape_state(&w1.aux, (a1, b1))?;
    let aux2 = reshape_state(&w2.aux, (a2, b2))?;
    Ok(DilationWitness {
        u_a: kron(&w2.u_a, &identity(a1)) * &w1.u_a,
        u_b: kron(&w2.u_b, &identity(b1)) * &w1.u_b,
        aux: flatten_state(&kron(&aux2, &aux1)),
    })
}

/// `max_{s,a,t,b} ‖U (A ⊗ B) ρ U* − (Ã ⊗ B̃)|ψ̃⟩⟨ψ̃| ⊗ σ_aux‖_F`
pub fn matrix_form_residual(
    src: &Strategy,
    dst: &Strategy,
    u_a: &Operator,
    u_b: &Operator,
    sigma_aux: &Operator,
) -> Result<f64> {
    src.check_dims()?;
    dst.check_dims()?;
    check_layout(src, dst)?;
    let w = DilationWitness {
        u_a: u_a.clone(),
        u_b: u_b.clone(),
        aux: StateVector::zeros(0),
    };
    let (ha, hb) = check_witness_shapes(src, dst, &w)?;
    if sigma_aux.shape() != (ha * hb, ha * hb) {
        return Err(mismatch("σ_aux", ha * hb, sigma_aux.nrows()));
    }
    let psi_t = dst.pure_vector("matrix_form_residual target")?;
    let target = &psi_t * psi_t.adjoint();
    let rho = src.state.density();
    let u = kron(u_a, u_b);
    let (ta, tb) = dst.dims;
    let mut worst = 0.0f64;
    for (sq, (fam, tfam)) in src.alice.iter().zip(&dst.alice).enumerate() {
        let _ = sq;
        for (a, ta_op) in fam.iter().zip(tfam) {
            for (bfam, tbfam) in src.bob.iter().zip(&dst.bob) {
                for (b, tb_op) in bfam.iter().zip(tbfam) {
                    let lhs = &u * kron(a, b) * &rho * u.adjoint();
                    let ideal = kron(&(kron(ta_op, tb_op) * &target), sigma_aux);
                    let rhs = swap_middle_factors(&ideal, [ta, tb, ha, hb])?;
                    worst = worst.max((lhs - rhs).norm());
                }
            }
        }
    }
    Ok(worst)
}

/// `σ_aux = tr_P |aux⟩⟨aux|` for an auxiliary vector on `Ĥ_A ⊗ Ĥ_B ⊗ H_P`.
pub fn aux_density(aux: &StateVector, ancilla_dims: (usize, usize)) -> Result<Operator> {
    let d = ancilla_dims.0 * ancilla_dims.1;
    if d == 0 || !aux.len().is_multiple_of(d) {
        return Err(mismatch("aux density", d, aux.len()));
    }
    let dp = aux.len() / d;
    partial_trace(&(aux * aux.adjoint()), (d, dp), Keep::A)
}

/// The auxiliary state `(⟨ψ̃| ⊗ 1)(U ⊗ 1_P)ψ_{ABP}` for a pure source or a spectral purification
/// of a mixed one, as a vector on `Ĥ_A ⊗ Ĥ_B ⊗ H_P`. Not normalized.
pub fn recover_aux(src: &Strategy, dst: &Strategy, u_a: &Operator, u_b: &Operator) -> Result<StateVector> {
    let w = DilationWitness {
        u_a: u_a.clone(),
        u_b: u_b.clone(),
        aux: StateVector::zeros(0),
    };
    let (ha, hb) = check_witness_shapes(src, dst, &w)?;
    let psi_t = reshape_state(&dst.pure_vector("recover_aux target")?, dst.dims)?;
    let (da, db) = src.dims;
    let (psi, dp) = match &src.state {
        State::Pure(v) => (reshape_state(v, src.dims)?, 1),
        State::Mixed(rho) => {
            let p = purify(rho)?;
            (reshape_state(&p.state, (da, db * p.dim_p))?, p.dim_p)
        }
    };
    let image = u_a * psi * kron(u_b, &identity(dp)).transpose();
    Ok(flatten_state(&project_out_target(&image, &psi_t, ha, hb * dp)))
}

/// Vector-form witness to matrix form: `σ_aux = tr_P |aux⟩⟨aux|` with `aux` recovered from the
/// source state.
pub fn vector_to_matrix(src: &Strategy, dst: &Strategy, w: &DilationWitness) -> Result<Operator> {
    let dims = w.ancilla_dims(dst.dims)?;
    let aux = match &src.state {
        State::Pure(_) => w.aux.clone(),
        State::Mixed(_) => normalize(&recover_aux(src, dst, &w.u_a, &w.u_b)?),
    };
    aux_density(&aux, dims)
}

/// Matrix-form data `(U_A, U_B)` to a vector-form witness for a pure source, with
/// `aux = (⟨ψ̃| ⊗ 1) U ψ` normalized.
pub fn matrix_to_vector(src: &Strategy, dst: &Strategy, u_a: &Operator, u_b: &Operator) -> Result<DilationWitness> {
    let psi = src.pure_vector("matrix_to_vector")?;
    let pure = Strategy {
        state: State::Pure(psi),
        ..src.clone()
    };
    let aux = recover_aux(&pure, dst, u_a, u_b)?;
    let n = aux.norm();
    if n <= 1e-6 {
        return Err(Error::AuxRecovery { norm: n });
    }
    Ok(DilationWitness {
        u_a: u_a.clone(),
        u_b: u_b.clone(),
        aux: aux / re(n),
    })
}

fn ensure_full_rank(s: &Strategy, context: &'static str) -> Result<StateVector> {
    let psi = s.pure_vector(context)?;
    let sd = schmidt_decompose(&psi, s.dims, RANK_TOL)?;
    if !sd.is_full_rank() {
        return Err(Error::NotFullRank(context));
    }
    Ok(psi)
}

fn operator_rows(fams: &[Povm], tfams: &[Povm], u: &Operator, dhat: usize) -> Vec<Vec<f64>> {
    let ih = identity(dhat);
    fams.iter()
        .zip(tfams)
        .map(|(fam, tfam)| {
            fam.iter()
                .zip(tfam)
                .map(|(x, tx)| (u * x * u.adjoint() - kron(tx, &ih)).norm())
                .collect()
        })
        .collect()
}

/// Extraction-form residual for unitaries `U_A, U_B` between full-rank pure strategies:
/// the state row `‖Uψ − ψ̃ ⊗ aux‖` with `aux` recovered and normalized, and the operator rows
/// `‖U_A A U_A* − Ã ⊗ 1‖_F`, `‖U_B B U_B* − B̃ ⊗ 1‖_F`.
pub fn extraction_residual(src: &Strategy, dst: &Strategy, u_a: &Operator, u_b: &Operator) -> Result<ResidualReport> {
    check_layout(src, dst)?;
    ensure_full_rank(src, "extraction_residual source")?;
    ensure_full_rank(dst, "extraction_residual target")?;
    for (what, u) in [("U_A", u_a), ("U_B", u_b)] {
        let defect = if u.is_square() { isometry_defect(u) } else { f64::INFINITY };
        if defect > ISOMETRY_TOL {
            return Err(Error::NotIsometry {
                what: format!("{what} (unitary required)"),
                defect,
            });
        }
    }
    let w = matrix_to_vector(src, dst, u_a, u_b)?;
    let (ha, hb) = w.ancilla_dims(dst.dims)?;
    let vector = dilation_residuals(src, dst, &w)?;
    let alice = operator_rows(&src.alice, &dst.alice, u_a, ha);
    let bob = operator_rows(&src.bob, &dst.bob, u_b, hb);
    Ok(ResidualReport::from_rows(vector.state_residual, alice, bob))
}

/// Vector-form witness between full-rank pure strategies to extraction-form unitaries
/// `W = (1 ⊗ T*) U` where `T = Σ_i |α_i⟩⟨i|` embeds the Schmidt support of `aux`.
pub fn vector_to_extraction(src: &Strategy, dst: &Strategy, w: &DilationWitness) -> Result<(Operator, Operator)> {
    ensure_full_rank(src, "vector_to_extraction source")?;
    ensure_full_rank(dst, "vector_to_extraction target")?;
    let (ha, hb) = w.ancilla_dims(dst.dims)?;
    let sd = schmidt_decompose(&normalize(&w.aux), (ha, hb), RANK_TOL)?;
    let wa = kron(&identity(dst.dims.0), &sd.left_vectors.adjoint()) * &w.u_a;
    let wb = kron(&identity(dst.dims.1), &sd.right_vectors.adjoint()) * &w.u_b;
    if !wa.is_square() || !wb.is_square() {
        return Err(Error::NotIsometry {
            what: "T-embedded witness (dimension count)".into(),
            defect: f64::INFINITY,
        });
    }
    Ok((wa, wb))
}

/// Extraction-form unitaries to a vector-form witness with the recovered auxiliary state.
pub fn extraction_to_vector(src: &Strategy, dst: &Strategy, u_a: &Operator, u_b: &Operator) -> Result<DilationWitness> {
    matrix_to_vector(src, dst, u_a, u_b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::{canonical_chsh, phi_plus, trine_strategy};
    use crate::metrics::{projective_eps, support_preserving_eps};
    use crate::random::{random_vector, random_state_with_rank};
    use crate::strategy::attach_product_ancilla;
    use crate::tensor::{apply_local, basis, projector};

    fn chsh_with_ancilla() -> Strategy {
        attach_product_ancilla(&canonical_chsh(), &basis(2, 0), &basis(2, 0)).unwrap()
    }

    /// `H_A ⊗ H_A' → H_A ⊗ H_A'` as a witness into CHSH with ancilla `|0⟩`.
    fn swap_to_ancilla() -> DilationWitness {
        DilationWitness {
            u_a: identity(4),
            u_b: identity(4),
            aux: basis(4, 0),
        }
    }

    #[test]
    fn identity_witness() {
        let s = canonical_chsh();
        let r = dilation_residuals(&s, &s, &DilationWitness::identity((2, 2))).unwrap();
        assert!(r.eps < 1e-15);
    }

    #[test]
    fn ancilla_witness() {
        let r = dilation_residuals(&chsh_with_ancilla(), &canonical_chsh(), &swap_to_ancilla()).unwrap();
        assert!(r.eps < 1e-14);
    }

    #[test]
    fn perturbed_state_residual() {
        let theta: f64 = 0.01;
        let mut s = canonical_chsh();
        s.state = State::Pure(phi_plus() * re(theta.cos()) + basis(4, 1) * re(theta.sin()));
        let r = dilation_residuals(&s, &canonical_chsh(), &DilationWitness::identity((2, 2))).unwrap();
        assert!((r.state_residual - 2.0 * (theta / 2.0).sin().abs()).abs() < 1e-12);
    }

    #[test]
    fn mixed_source_is_purified_and_probed() {
        let mixed = Strategy {
            state: State::Mixed(canonical_chsh().state.density()),
            ..canonical_chsh()
        };
        let r = dilation_residuals(&mixed, &canonical_chsh(), &DilationWitness::identity((2, 2))).unwrap();
        assert_eq!(r.purifications, PURIFICATION_PROBES + 1);
        assert!(r.eps < 1e-12);
    }

    #[test]
    fn witness_shape_errors() {
        let s = canonical_chsh();
        let w = DilationWitness::identity((3, 2));
        assert!(matches!(dilation_residuals(&s, &s, &w), Err(Error::DimensionMismatch { .. })));
        let bad = DilationWitness {
            u_a: identity(2).scale(2.0),
            ..DilationWitness::identity((2, 2))
        };
        assert!(matches!(dilation_residuals(&s, &s, &bad), Err(Error::NotIsometry { .. })));
    }

    #[test]
    fn restriction_embedding_examples() {
        let e = restriction_embedding(&canonical_chsh()).unwrap();
        assert!(dilation_residuals(&e.src, &e.dst, &e.witness).unwrap().eps < 1e-12);
        let e = restriction_embedding(&chsh_with_ancilla()).unwrap();
        assert!(dilation_residuals(&e.src, &e.dst, &e.witness).unwrap().eps < 1e-12);
    }

    #[test]
    fn restriction_embedding_with_controlled_leakage() {
        // State on span{|0⟩,|1⟩} ⊗ span{|0⟩,|1⟩} inside C^3 ⊗ C^3; Alice's measurement rotates
        // |1⟩ toward |2⟩ by a small angle.
        let psi = (basis(9, 0) + basis(9, 4)) / re(2f64.sqrt());
        let t: f64 = 0.05;
        let v = basis(3, 1) * re(t.cos()) + basis(3, 2) * re(t.sin());
        let e1 = projector(&v);
        let fam = vec![projector(&basis(3, 0)), e1.clone(), identity(3) - projector(&basis(3, 0)) - e1];
        let s = Strategy::pure(psi, (3, 3), vec![fam], vec![vec![identity(3)]]).unwrap();
        let eps = support_preserving_eps(&s).unwrap();
        assert!(eps > 0.01);
        let e = restriction_embedding(&s).unwrap();
        let r = dilation_residuals(&e.src, &e.dst, &e.witness).unwrap();
        assert!(r.eps <= eps + 1e-10);
    }

    #[test]
    fn naimark_embedding_examples() {
        let e = naimark_embedding(&canonical_chsh()).unwrap();
        assert!(dilation_residuals(&e.src, &e.dst, &e.witness).unwrap().eps < 1e-12);
        let e = naimark_embedding(&trine_strategy()).unwrap();
        let r = dilation_residuals(&e.src, &e.dst, &e.witness).unwrap();
        assert!((r.eps - 1.0 / 3.0).abs() < 1e-12);
        assert!(r.eps <= projective_eps(&trine_strategy()).unwrap() + 1e-10);
        let trivial = Strategy::pure(phi_plus(), (2, 2), vec![vec![identity(2)]], vec![vec![identity(2)]]).unwrap();
        let e = naimark_embedding(&trivial).unwrap();
        assert!(dilation_residuals(&e.src, &e.dst, &e.witness).unwrap().eps < 1e-14);
    }

    #[test]
    fn reverse_of_identity() {
        let s = canonical_chsh();
        let w = reverse_witness(&s, &s, &DilationWitness::identity((2, 2))).unwrap();
        assert!(dilation_residuals(&s, &s, &w).unwrap().eps < 1e-14);
    }

    #[test]
    fn reverse_of_ancilla_witness() {
        let big = chsh_with_ancilla();
        let chsh = canonical_chsh();
        let back = reverse_witness(&big, &chsh, &swap_to_ancilla()).unwrap();
        let r = dilation_residuals(&chsh, &big, &back).unwrap();
        assert!(r.eps < 1e-10);
    }

    #[test]
    fn reverse_preserves_residuals() {
        let mut rng = seeded(5);
        let psi = random_state_with_rank(3, 3, 2, &mut rng);
        let s = Strategy::pure(
            psi,
            (3, 3),
            vec![crate::random::random_povm(3, 2, &mut rng)],
            vec![crate::random::random_pvm(3, 3, &mut rng)],
        )
        .unwrap();
        let e = restriction_embedding(&s).unwrap();
        let fwd = dilation_residuals(&e.src, &e.dst, &e.witness).unwrap();
        let back = reverse_witness(&e.src, &e.dst, &e.witness).unwrap();
        let rev = dilation_residuals(&e.dst, &e.src, &back).unwrap();
        assert!((fwd.eps - rev.eps).abs() < 1e-10);
    }

    #[test]
    fn reverse_rejects_entangled_aux() {
        let w = DilationWitness {
            u_a: identity(4),
            u_b: identity(4),
            aux: (basis(4, 0) + basis(4, 3)) / re(2f64.sqrt()),
        };
        let big = chsh_with_ancilla();
        assert!(matches!(
            reverse_witness(&big, &canonical_chsh(), &w),
            Err(Error::EntangledAux { schmidt_rank: 2 })
        ));
    }

    #[test]
    fn composition_is_transitive() {
        let big = chsh_with_ancilla();
        let chsh = canonical_chsh();
        let w1 = swap_to_ancilla();
        let e = restriction_embedding(&chsh).unwrap();
        // big ↪ chsh ↪ ... use the reverse of the restriction, chsh ↪ chsh_res.
        let w2 = reverse_witness(&e.src, &e.dst, &e.witness).unwrap();
        let composed = compose(&w1, chsh.dims, &w2, e.src.dims).unwrap();
        let r = dilation_residuals(&big, &e.src, &composed).unwrap();
        assert!(r.eps < 1e-10);
    }

    #[test]
    fn matrix_form_examples() {
        let s = canonical_chsh();
        let one = identity(1);
        assert!(matrix_form_residual(&s, &s, &identity(2), &identity(2), &one).unwrap() < 1e-14);
        let big = chsh_with_ancilla();
        let w = swap_to_ancilla();
        let sigma = vector_to_matrix(&big, &s, &w).unwrap();
        assert!(matrix_form_residual(&big, &s, &w.u_a, &w.u_b, &sigma).unwrap() < 1e-10);
        let corrupted = projector(&basis(4, 3));
        assert!(matrix_form_residual(&big, &s, &w.u_a, &w.u_b, &corrupted).unwrap() > 0.1);
    }

    #[test]
    fn matrix_to_vector_recovers_aux() {
        let big = chsh_with_ancilla();
        let s = canonical_chsh();
        let w = matrix_to_vector(&big, &s, &identity(4), &identity(4)).unwrap();
        assert!((w.aux.clone() - basis(4, 0)).norm() < 1e-12);
        assert!(dilation_residuals(&big, &s, &w).unwrap().eps < 1e-12);
    }

    #[test]
    fn extraction_examples() {
        let s = canonical_chsh();
        assert!(extraction_residual(&s, &s, &identity(2), &identity(2)).unwrap().eps < 1e-14);
        let mut rng = seeded(11);
        let ua = random_unitary(2, &mut rng);
        let ub = random_unitary(2, &mut rng);
        let moved = crate::strategy::conjugate_local(&s, &ua.adjoint(), &ub.adjoint()).unwrap();
        assert!(extraction_residual(&moved, &s, &ua, &ub).unwrap().eps < 1e-10);
    }

    #[test]
    fn extraction_detects_non_projective_question() {
        let trine = trine_strategy();
        let mut dst = trine.clone();
        dst.bob[2] = vec![projector(&basis(2, 0)), projector(&basis(2, 1)), Operator::zeros(2, 2)];
        let r = extraction_residual(&trine, &dst, &identity(2), &identity(2)).unwrap();
        assert!(r.bob[2].iter().all(|&x| x > 0.1));
        assert!(r.bob[0].iter().chain(&r.bob[1]).all(|&x| x < 1e-14));
    }

    #[test]
    fn extraction_requires_full_rank() {
        let s = chsh_with_ancilla();
        let e = extraction_residual(&s, &s, &identity(4), &identity(4));
        assert!(matches!(e, Err(Error::NotFullRank(_))));
    }

    #[test]
    fn extraction_vector_round_trip() {
        // Full-rank source built as U*(Φ⁺ ⊗ aux) with an entangled full-rank aux.
        let mut rng = seeded(21);
        let chsh = canonical_chsh();
        let aux = random_state_with_rank(2, 2, 2, &mut rng);
        let ua = random_unitary(4, &mut rng);
        let ub = random_unitary(4, &mut rng);
        let big = attach_like(&chsh, &aux);
        let src = crate::strategy::conjugate_local(&big, &ua.adjoint(), &ub.adjoint()).unwrap();
        let w = DilationWitness {
            u_a: ua.clone(),
            u_b: ub.clone(),
            aux: aux.clone(),
        };
        assert!(dilation_residuals(&src, &chsh, &w).unwrap().eps < 1e-10);
        let (wa, wb) = vector_to_extraction(&src, &chsh, &w).unwrap();
        assert!(extraction_residual(&src, &chsh, &wa, &wb).unwrap().eps < 1e-10);
        let back = extraction_to_vector(&src, &chsh, &wa, &wb).unwrap();
        assert!(dilation_residuals(&src, &chsh, &back).unwrap().eps < 1e-10);
        let _ = random_vector(2, &mut rng);
    }

    /// `ψ̃ ⊗ aux` with identity-extended measurements, in the `(Ã Â)(B̃ B̂)` ordering.
    fn attach_like(s: &Strategy, aux: &StateVector) -> Strategy {
        let m = reshape_state(&s.pure_vector("t").unwrap(), s.dims).unwrap();
        let am = reshape_state(aux, (2, 2)).unwrap();
        let state = flatten_state(&kron(&m, &am));
        let ext = |fams: &[Povm]| -> Vec<Povm> {
            fams.iter().map(|f| f.iter().map(|e| kron(e, &identity(2))).collect()).collect()
        };
        let _ = apply_local;
        Strategy::pure(state, (4, 4), ext(&s.alice), ext(&s.bob)).unwrap()
    }
}
