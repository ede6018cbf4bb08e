//! Dense complex linear algebra on bipartite spaces.
//!
//! Operators are plain `nalgebra` complex matrices. Bipartite vectors are stored
//! row-major over the `(A, B)` index pair, so `psi[i * d_b + j]` is the amplitude of
//! `|i>|j>`. Most bipartite computations reshape such a vector into its `d_a x d_b`
//! coefficient matrix, where `(X ⊗ Y)|psi>` becomes `X · Psi · Y^T`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{mismatch, Error, Result};

pub type C64 = Complex64;
pub type Operator = DMatrix<C64>;
pub type StateVector = DVector<C64>;

/// Tolerance for semantic checks (Hermiticity, positivity, completeness).
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance for exact algebraic identities.
pub const EXACT_TOL: f64 = 1e-12;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(d: usize) -> Operator {
    Operator::identity(d, d)
}

pub fn zeros(d: usize) -> Operator {
    Operator::zeros(d, d)
}

/// Builds a square operator from real row-major entries.
pub fn real_matrix(d: usize, entries: &[f64]) -> Operator {
    assert_eq!(entries.len(), d * d);
    Operator::from_fn(d, d, |i, j| re(entries[i * d + j]))
}

pub fn pauli_x() -> Operator {
    real_matrix(2, &[0.0, 1.0, 1.0, 0.0])
}

pub fn pauli_y() -> Operator {
    Operator::from_row_slice(2, 2, &[ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO])
}

pub fn pauli_z() -> Operator {
    real_matrix(2, &[1.0, 0.0, 0.0, -1.0])
}

/// `|v><v|`
pub fn projector(v: &StateVector) -> Operator {
    v * v.adjoint()
}

/// Computational basis vector `|i>` in dimension `d`.
pub fn basis(d: usize, i: usize) -> StateVector {
    let mut v = StateVector::zeros(d);
    v[i] = ONE;
    v
}

/// Kronecker product: `result[(i*db + k, j*db + l)] = a[(i,j)] * b[(k,l)]`.
///
/// Works for rectangular operands too, which is how isometries are tensored.
pub fn kron(a: &Operator, b: &Operator) -> Operator {
    a.kronecker(b)
}

pub fn kron_vec(a: &StateVector, b: &StateVector) -> StateVector {
    a.kronecker(b)
}

pub fn trace(op: &Operator) -> C64 {
    op.trace()
}

pub fn frobenius(op: &Operator) -> f64 {
    op.norm()
}

/// `‖H − H*‖_F`
pub fn hermiticity_defect(op: &Operator) -> f64 {
    (op - op.adjoint()).norm()
}

pub fn ensure_square(op: &Operator) -> Result<usize> {
    if op.nrows() != op.ncols() {
        return Err(Error::NotSquare {
            rows: op.nrows(),
            cols: op.ncols(),
        });
    }
    Ok(op.nrows())
}

pub fn ensure_finite(op: &Operator) -> Result<()> {
    if op.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

/// Which tensor factor a partial trace keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Partial trace of an operator on `H_A ⊗ H_B`, keeping the factor named by `keep`.
pub fn partial_trace(op: &Operator, dims: (usize, usize), keep: Keep) -> Result<Operator> {
    let d = ensure_square(op)?;
    let (da, db) = dims;
    if d != da * db {
        return Err(mismatch("partial_trace", da * db, d));
    }
    Ok(match keep {
        Keep::A => Operator::from_fn(da, da, |i, j| {
            (0..db).map(|k| op[(i * db + k, j * db + k)]).sum()
        }),
        Keep::B => Operator::from_fn(db, db, |k, l| {
            (0..da).map(|i| op[(i * db + k, i * db + l)]).sum()
        }),
    })
}

/// Coefficient matrix of a bipartite vector: `Psi[(i, j)] = psi[i * d_b + j]`.
pub fn reshape_state(psi: &StateVector, dims: (usize, usize)) -> Result<Operator> {
    let (da, db) = dims;
    if psi.len() != da * db {
        return Err(mismatch("bipartite vector", da * db, psi.len()));
    }
    Ok(Operator::from_fn(da, db, |i, j| psi[i * db + j]))
}

/// Inverse of [`reshape_state`].
pub fn flatten_state(m: &Operator) -> StateVector {
    let (da, db) = m.shape();
    StateVector::from_fn(da * db, |k, _| m[(k / db, k % db)])
}

/// `(x ⊗ y)|psi>` without forming the Kronecker product.
///
/// `x` and `y` may be rectangular (isometries), in which case the output lives on the
/// larger space `rows(x) · rows(y)`.
pub fn apply_local(
    x: &Operator,
    y: &Operator,
    psi: &StateVector,
    dims: (usize, usize),
) -> Result<StateVector> {
    let m = reshape_state(psi, dims)?;
    if x.ncols() != dims.0 {
        return Err(mismatch("apply_local (A factor)", dims.0, x.ncols()));
    }
    if y.ncols() != dims.1 {
        return Err(mismatch("apply_local (B factor)", dims.1, y.ncols()));
    }
    Ok(flatten_state(&(x * m * y.transpose())))
}

/// `<psi| x ⊗ y |psi>` via the coefficient matrix.
pub fn local_expectation(x: &Operator, y: &Operator, psi_mat: &Operator) -> C64 {
    // tr(Psi* x Psi y^T) = sum_ij (Psi* x Psi)_ij y_ij
    let left = psi_mat.adjoint() * x * psi_mat;
    left.iter().zip(y.iter()).map(|(a, b)| a * b).sum()
}

/// Reduced states `(sigma_A, sigma_B)` of a pure bipartite state given as coefficient matrix.
pub fn marginals(psi_mat: &Operator) -> (Operator, Operator) {
    let sigma_a = psi_mat * psi_mat.adjoint();
    let sigma_b = (psi_mat.adjoint() * psi_mat).transpose();
    (sigma_a, sigma_b)
}

/// Reorders the factors of an operator on `H_1 ⊗ H_2 ⊗ H_3 ⊗ H_4` into `H_1 ⊗ H_3 ⊗ H_2 ⊗ H_4`.
pub fn swap_middle_factors(op: &Operator, dims: [usize; 4]) -> Result<Operator> {
    let [d1, d2, d3, d4] = dims;
    let n = d1 * d2 * d3 * d4;
    if ensure_square(op)? != n {
        return Err(mismatch("swap_middle_factors", n, op.nrows()));
    }
    let perm: Vec<usize> = (0..n)
        .map(|k| {
            // k indexes (i1, i3, i2, i4) in the output ordering.
            let i4 = k % d4;
            let i2 = (k / d4) % d2;
            let i3 = (k / (d4 * d2)) % d3;
            let i1 = k / (d4 * d2 * d3);
            ((i1 * d2 + i2) * d3 + i3) * d4 + i4
        })
        .collect();
    Ok(Operator::from_fn(n, n, |r, s| op[(perm[r], perm[s])]))
}

/// Eigen-decomposition of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct SpectralData {
    /// Sorted in descending order.
    pub eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    pub eigenvectors: Operator,
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn vector(&self, k: usize) -> StateVector {
        self.eigenvectors.column(k).into_owned()
    }

    /// `Σ f(λ_k) v_k v_k*`
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> Operator {
        let scaled = Operator::from_fn(self.dim(), self.dim(), |i, k| {
            self.eigenvectors[(i, k)] * f(self.eigenvalues[k])
        });
        scaled * self.eigenvectors.adjoint()
    }

    pub fn reconstruct(&self) -> Operator {
        self.apply_fn(|x| x)
    }

    /// Sizes of eigenvalue clusters, in descending order of eigenvalue. Consecutive
    /// eigenvalues closer than `tol` are merged.
    pub fn multiplicities(&self, tol: f64) -> Vec<usize> {
        let mut out: Vec<usize> = Vec::new();
        let mut prev: Option<f64> = None;
        for &x in &self.eigenvalues {
            match prev {
                Some(p) if p - x <= tol => *out.last_mut().unwrap() += 1,
                _ => out.push(1),
            }
            prev = Some(x);
        }
        out
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }
}

/// Rotates `v` so that its first entry of (numerically) largest modulus is real and nonnegative.
pub fn fix_phase(v: &mut StateVector) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = v.iter().position(|z| z.norm() >= max - 1e-12).unwrap();
    let phase = v[pivot] / v[pivot].norm();
    *v /= phase;
    v[pivot] = re(v[pivot].re);
}

/// Spectral decomposition of a Hermitian operator with descending eigenvalues and the
/// largest-modulus-entry phase convention on eigenvectors.
pub fn hermitian_eig(h: &Operator) -> Result<SpectralData> {
    let d = ensure_square(h)?;
    ensure_finite(h)?;
    let defect = hermiticity_defect(h);
    if defect > DEFAULT_TOL * h.norm().max(1.0) {
        return Err(Error::NotHermitian { defect });
    }
    if d == 0 {
        return Ok(SpectralData {
            eigenvalues: vec![],
            eigenvectors: Operator::zeros(0, 0),
        });
    }
    let sym = (h + h.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut eigenvectors = Operator::zeros(d, d);
    for (k, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        fix_phase(&mut v);
        eigenvectors.set_column(k, &v);
    }
    Ok(SpectralData {
        eigenvalues,
        eigenvectors,
    })
}

/// True iff the smallest eigenvalue of the Hermitian part is at least `-tol`.
pub fn is_psd(h: &Operator, tol: f64) -> bool {
    match hermitian_eig(h) {
        Ok(s) => s.min_eigenvalue() >= -tol,
        Err(_) => false,
    }
}

/// Square root of a PSD operator; eigenvalues at or below [`SQRT_FLOOR`] map to zero.
pub fn psd_sqrt(h: &Operator) -> Result<Operator> {
    let spec = hermitian_eig(h)?;
    let floor = SQRT_FLOOR * spec.eigenvalues.first().map_or(1.0, |x| x.abs().max(1.0));
    Ok(spec.apply_fn(|x| if x > floor { x.sqrt() } else { 0.0 }))
}

/// Relative eigenvalue floor for [`psd_sqrt`].
pub const SQRT_FLOOR: f64 = 1e-14;

/// Inverse square root on the support; eigenvalues at or below `cutoff` map to zero.
pub fn psd_inv_sqrt(h: &Operator, cutoff: f64) -> Result<Operator> {
    Ok(hermitian_eig(h)?.apply_fn(|x| if x > cutoff { 1.0 / x.sqrt() } else { 0.0 }))
}

/// `m = U diag(s) V*` with unitary `U`, `V` and `s` nonincreasing.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Operator,
    pub singular_values: Vec<f64>,
    pub v: Operator,
}

/// Full singular value decomposition.
pub fn svd(m: &Operator) -> Result<Svd> {
    ensure_finite(m)?;
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return Ok(Svd {
            u: identity(r),
            singular_values: Vec::new(),
            v: identity(c),
        });
    }
    let f = faer::Mat::<C64>::from_fn(r, c, |i, j| m[(i, j)]);
    let d = f.svd().map_err(|e| Error::Eigen(format!("singular value decomposition: {e:?}")))?;
    let (fu, fv) = (d.U(), d.V());
    let s = d.S().column_vector();
    Ok(Svd {
        u: Operator::from_fn(r, r, |i, j| fu[(i, j)]),
        singular_values: (0..r.min(c)).map(|k| s[k].re).collect(),
        v: Operator::from_fn(c, c, |i, j| fv[(i, j)]),
    })
}

/// `‖V*V − 1‖_F`
pub fn isometry_defect(v: &Operator) -> f64 {
    (v.adjoint() * v - identity(v.ncols())).norm()
}

/// Extends an isometry `v` (`n x m`) to a unitary whose first `m` columns are `v`.
pub fn complete_to_unitary(v: &Operator) -> Result<Operator> {
    let (n, m) = v.shape();
    let complement = identity(n) - v * v.adjoint();
    let spec = hermitian_eig(&complement)?;
    let mut u = Operator::zeros(n, n);
    for k in 0..m {
        u.set_column(k, &v.column(k));
    }
    for k in 0..(n - m) {
        u.set_column(m + k, &spec.eigenvectors.column(k));
    }
    Ok(u)
}

/// Orthonormal basis (as columns) of the range of a PSD operator.
pub fn range_basis(h: &Operator, tol: f64) -> Result<Operator> {
    let spec = hermitian_eig(h)?;
    let top = spec.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    let r = spec
        .eigenvalues
        .iter()
        .filter(|&&x| x > tol * top.max(1.0))
        .count();
    Ok(spec.eigenvectors.columns(0, r).into_owned())
}

pub fn normalize(v: &StateVector) -> StateVector {
    v / re(v.norm())
}
