//! Games, strategies, correlations and winning probabilities.

use serde::Serialize;

use crate::error::{mismatch, Error, Result};
use crate::tensor::{
    ensure_square, hermitian_eig, hermiticity_defect, identity, kron, local_expectation,
    reshape_state, swap_middle_factors, Operator, StateVector, C64, DEFAULT_TOL,
};

/// POVM elements for a single question, indexed by answer.
pub type Povm = Vec<Operator>;

/// A two-player nonlocal game with 0-based question and answer sets.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlocalGame {
    pi: Vec<Vec<f64>>,
    predicate: Vec<Vec<Vec<Vec<bool>>>>,
    alice_answers: Vec<usize>,
    bob_answers: Vec<usize>,
}

impl NonlocalGame {
    /// `pi[s][t]` is the question distribution, `predicate[s][t][a][b]` the winning condition.
    pub fn new(pi: Vec<Vec<f64>>, predicate: Vec<Vec<Vec<Vec<bool>>>>) -> Result<Self> {
        let ns = pi.len();
        if ns == 0 {
            return Err(Error::InvalidGame("no questions for Alice".into()));
        }
        let nt = pi[0].len();
        if nt == 0 || pi.iter().any(|row| row.len() != nt) {
            return Err(Error::InvalidGame("pi must be a non-empty rectangular table".into()));
        }
        if pi.iter().flatten().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::InvalidGame("pi has a negative or non-finite entry".into()));
        }
        let total: f64 = pi.iter().flatten().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidGame(format!("pi sums to {total}, expected 1")));
        }
        if predicate.len() != ns || predicate.iter().any(|row| row.len() != nt) {
            return Err(Error::InvalidGame(
                "predicate must be indexed [s][t][a][b] with the same question sets as pi".into(),
            ));
        }
        let mut alice_answers = vec![0; ns];
        let mut bob_answers = vec![0; nt];
        for s in 0..ns {
            alice_answers[s] = predicate[s][0].len();
            for t in 0..nt {
                let block = &predicate[s][t];
                if block.len() != alice_answers[s] || block.is_empty() {
                    return Err(Error::InvalidGame(format!(
                        "inconsistent Alice answer count for question {s}"
                    )));
                }
                if s == 0 {
                    bob_answers[t] = block[0].len();
                }
                if bob_answers[t] == 0 || block.iter().any(|row| row.len() != bob_answers[t]) {
                    return Err(Error::InvalidGame(format!(
                        "inconsistent Bob answer count for question {t}"
                    )));
                }
            }
        }
        Ok(Self {
            pi,
            predicate,
            alice_answers,
            bob_answers,
        })
    }

    /// CHSH: uniform questions, win iff `a ⊕ b = s ∧ t`.
    pub fn chsh() -> Self {
        let predicate = (0..2)
            .map(|s| {
                (0..2)
                    .map(|t| {
                        (0..2)
                            .map(|a| (0..2).map(|b| (a ^ b) == (s & t)).collect())
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Self::new(vec![vec![0.25; 2]; 2], predicate).expect("CHSH is well formed")
    }

    /// The game with the same shape as `self` whose predicate is constantly `value`.
    pub fn constant(pi: Vec<Vec<f64>>, alice: &[usize], bob: &[usize], value: bool) -> Result<Self> {
        let predicate = alice
            .iter()
            .map(|&na| bob.iter().map(|&nb| vec![vec![value; nb]; na]).collect())
            .collect();
        Self::new(pi, predicate)
    }

    pub fn alice_questions(&self) -> usize {
        self.pi.len()
    }

    pub fn bob_questions(&self) -> usize {
        self.pi[0].len()
    }

    pub fn alice_answers(&self) -> &[usize] {
        &self.alice_answers
    }

    pub fn bob_answers(&self) -> &[usize] {
        &self.bob_answers
    }

    pub fn pi(&self, s: usize, t: usize) -> f64 {
        self.pi[s][t]
    }

    pub fn wins(&self, s: usize, t: usize, a: usize, b: usize) -> bool {
        self.predicate[s][t][a][b]
    }

    pub fn pi_table(&self) -> &[Vec<f64>] {
        &self.pi
    }

    pub fn predicate_table(&self) -> &[Vec<Vec<Vec<bool>>>] {
        &self.predicate
    }

    /// `Σ_{s,t} π(s,t) Σ_{a,b} 𝒱(a,b|s,t)`
    pub fn predicate_mass(&self) -> f64 {
        let mut total = 0.0;
        for s in 0..self.alice_questions() {
            for t in 0..self.bob_questions() {
                let count = self.predicate[s][t].iter().flatten().filter(|&&v| v).count();
                total += self.pi[s][t] * count as f64;
            }
        }
        total
    }

    pub fn check_compatible(&self, strategy: &Strategy) -> Result<()> {
        let alice: Vec<usize> = strategy.alice.iter().map(Vec::len).collect();
        let bob: Vec<usize> = strategy.bob.iter().map(Vec::len).collect();
        if alice != self.alice_answers || bob != self.bob_answers {
            return Err(Error::InvalidGame(format!(
                "game answer sets (Alice {:?}, Bob {:?}) do not match strategy (Alice {:?}, Bob {:?})",
                self.alice_answers, self.bob_answers, alice, bob
            )));
        }
        Ok(())
    }
}

/// Shared state of a strategy.
#[derive(Debug, Clone, PartialEq)]
pub enum State {
    Pure(StateVector),
    Mixed(Operator),
}

impl State {
    pub fn dim(&self) -> usize {
        match self {
            State::Pure(v) => v.len(),
            State::Mixed(m) => m.nrows(),
        }
    }

    pub fn density(&self) -> Operator {
        match self {
            State::Pure(v) => v * v.adjoint(),
            State::Mixed(m) => m.clone(),
        }
    }

    /// `tr(ρ²)`
    pub fn purity(&self) -> f64 {
        match self {
            State::Pure(v) => v.norm_squared().powi(2),
            State::Mixed(m) => (m * m).trace().re,
        }
    }
}

/// A tensor-product strategy: shared state and one POVM per question for each player.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub dims: (usize, usize),
    pub state: State,
    pub alice: Vec<Povm>,
    pub bob: Vec<Povm>,
}

impl Strategy {
    /// Builds a strategy after checking that every dimension is consistent.
    pub fn new(dims: (usize, usize), state: State, alice: Vec<Povm>, bob: Vec<Povm>) -> Result<Self> {
        let s = Self {
            dims,
            state,
            alice,
            bob,
        };
        s.check_dims()?;
        Ok(s)
    }

    pub fn pure(psi: StateVector, dims: (usize, usize), alice: Vec<Povm>, bob: Vec<Povm>) -> Result<Self> {
        Self::new(dims, State::Pure(psi), alice, bob)
    }

    pub fn check_dims(&self) -> Result<()> {
        let (da, db) = self.dims;
        if da == 0 || db == 0 {
            return Err(Error::InvalidStrategy("local dimensions must be positive".into()));
        }
        if self.state.dim() != da * db {
            return Err(mismatch("state", da * db, self.state.dim()));
        }
        if let State::Mixed(m) = &self.state {
            ensure_square(m)?;
        }
        for (who, fams, d) in [("Alice", &self.alice, da), ("Bob", &self.bob, db)] {
            for (q, fam) in fams.iter().enumerate() {
                if fam.is_empty() {
                    return Err(Error::InvalidStrategy(format!("{who} question {q} has no outcomes")));
                }
                for (k, e) in fam.iter().enumerate() {
                    if e.nrows() != d || e.ncols() != d {
                        return Err(mismatch(format!("{who} question {q} element {k}"), d, e.nrows().max(e.ncols())));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_pure(&self) -> bool {
        matches!(self.state, State::Pure(_)) || self.state.purity() >= 1.0 - 1e-9
    }

    /// The state vector of a pure strategy. A density operator of purity at least
    /// `1 - 1e-9` is accepted and replaced by its top eigenvector.
    pub fn pure_vector(&self, context: &'static str) -> Result<StateVector> {
        match &self.state {
            State::Pure(v) => Ok(v.clone()),
            State::Mixed(m) if self.state.purity() >= 1.0 - 1e-9 => {
                let spec = hermitian_eig(m)?;
                Ok(spec.vector(0))
            }
            State::Mixed(_) => Err(Error::MixedState(context)),
        }
    }

    /// Same strategy with the state converted to a vector (see [`Strategy::pure_vector`]).
    pub fn to_pure(&self, context: &'static str) -> Result<Strategy> {
        Ok(Strategy {
            state: State::Pure(self.pure_vector(context)?),
            ..self.clone()
        })
    }

    pub fn alice_answer_counts(&self) -> Vec<usize> {
        self.alice.iter().map(Vec::len).collect()
    }

    pub fn bob_answer_counts(&self) -> Vec<usize> {
        self.bob.iter().map(Vec::len).collect()
    }

    /// Iterates `(player, question, answer, element)` over every measurement element.
    pub fn elements(&self) -> impl Iterator<Item = (Player, usize, usize, &Operator)> {
        let a = self.alice.iter().enumerate().flat_map(|(q, fam)| {
            fam.iter().enumerate().map(move |(k, e)| (Player::Alice, q, k, e))
        });
        let b = self.bob.iter().enumerate().flat_map(|(q, fam)| {
            fam.iter().enumerate().map(move |(k, e)| (Player::Bob, q, k, e))
        });
        a.chain(b)
    }

    pub fn element(&self, player: Player, question: usize, answer: usize) -> Result<&Operator> {
        let fams = match player {
            Player::Alice => &self.alice,
            Player::Bob => &self.bob,
        };
        fams.get(question)
            .and_then(|f| f.get(answer))
            .ok_or_else(|| {
                Error::IndexOutOfRange(format!("{player:?} question {question} answer {answer}"))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Player {
    Alice,
    Bob,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilyReport {
    pub question: usize,
    pub completeness_defect: f64,
    pub min_eigenvalue: f64,
    pub hermiticity_defect: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    /// `|‖ψ‖ − 1|` for pure states, `|tr ρ − 1|` for mixed ones.
    pub state_norm_defect: f64,
    pub state_hermiticity_defect: f64,
    pub state_min_eigenvalue: f64,
    pub alice: Vec<FamilyReport>,
    pub bob: Vec<FamilyReport>,
}

impl ValidationReport {
    /// One line per failing quantity.
    pub fn defects(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.state_norm_defect > tol {
            out.push(format!("state normalization defect {:e}", self.state_norm_defect));
        }
        if self.state_hermiticity_defect > tol {
            out.push(format!("state hermiticity defect {:e}", self.state_hermiticity_defect));
        }
        if self.state_min_eigenvalue < -tol {
            out.push(format!("state has eigenvalue {:e}", self.state_min_eigenvalue));
        }
        for (who, fams) in [("Alice", &self.alice), ("Bob", &self.bob)] {
            for f in fams {
                if f.completeness_defect > tol {
                    out.push(format!(
                        "{who} question {}: elements sum to identity with defect {:e}",
                        f.question, f.completeness_defect
                    ));
                }
                if f.min_eigenvalue < -tol {
                    out.push(format!(
                        "{who} question {}: element has eigenvalue {:e}",
                        f.question, f.min_eigenvalue
                    ));
                }
                if f.hermiticity_defect > tol {
                    out.push(format!(
                        "{who} question {}: element hermiticity defect {:e}",
                        f.question, f.hermiticity_defect
                    ));
                }
            }
        }
        out
    }
}

fn family_report(question: usize, fam: &Povm, d: usize, full: bool) -> Result<FamilyReport> {
    let sum = fam.iter().fold(Operator::zeros(d, d), |acc, e| acc + e);
    let completeness_defect = (sum - identity(d)).norm();
    let hermiticity_defect = fam.iter().map(hermiticity_defect).fold(0.0, f64::max);
    let mut min_eigenvalue = f64::INFINITY;
    if full {
        for e in fam {
            let h = (e + e.adjoint()).scale(0.5);
            min_eigenvalue = min_eigenvalue.min(hermitian_eig(&h)?.min_eigenvalue());
        }
    } else {
        min_eigenvalue = 0.0;
    }
    Ok(FamilyReport {
        question,
        completeness_defect,
        min_eigenvalue,
        hermiticity_defect,
    })
}

fn validation_report(s: &Strategy, tol: f64, full: bool) -> Result<ValidationReport> {
    s.check_dims()?;
    let (da, db) = s.dims;
    let (state_norm_defect, state_hermiticity_defect, state_min_eigenvalue) = match &s.state {
        State::Pure(v) => ((v.norm() - 1.0).abs(), 0.0, 0.0),
        State::Mixed(m) => {
            let herm = hermiticity_defect(m);
            let min = if full {
                hermitian_eig(&(m + m.adjoint()).scale(0.5))?.min_eigenvalue()
            } else {
                0.0
            };
            ((m.trace().re - 1.0).abs() + m.trace().im.abs(), herm, min)
        }
    };
    let alice = s
        .alice
        .iter()
        .enumerate()
        .map(|(q, f)| family_report(q, f, da, full))
        .collect::<Result<Vec<_>>>()?;
    let bob = s
        .bob
        .iter()
        .enumerate()
        .map(|(q, f)| family_report(q, f, db, full))
        .collect::<Result<Vec<_>>>()?;
    let mut report = ValidationReport {
        valid: false,
        state_norm_defect,
        state_hermiticity_defect,
        state_min_eigenvalue,
        alice,
        bob,
    };
    report.valid = report.defects(tol).is_empty();
    Ok(report)
}

/// Full validation: state normalization and positivity, POVM completeness, Hermiticity and
/// positivity of every element.
pub fn validate_strategy(s: &Strategy, tol: f64) -> Result<ValidationReport> {
    validation_report(s, tol, true)
}

/// Validation that fails with [`Error::InvalidStrategy`] listing every defect.
pub fn ensure_valid(s: &Strategy, tol: f64) -> Result<()> {
    let report = validate_strategy(s, tol)?;
    if report.valid {
        Ok(())
    } else {
        Err(Error::InvalidStrategy(report.defects(tol).join("\n")))
    }
}

fn ensure_structurally_valid(s: &Strategy) -> Result<()> {
    let report = validation_report(s, DEFAULT_TOL, false)?;
    if report.valid {
        Ok(())
    } else {
        Err(Error::InvalidStrategy(report.defects(DEFAULT_TOL).join("\n")))
    }
}

/// `W = Σ π(s,t) 𝒱(a,b|s,t) A_sa ⊗ B_tb`
pub fn game_operator(g: &NonlocalGame, s: &Strategy) -> Result<Operator> {
    g.check_compatible(s)?;
    s.check_dims()?;
    let (da, db) = s.dims;
    let mut w = Operator::zeros(da * db, da * db);
    for (sq, fa) in s.alice.iter().enumerate() {
        for (tq, fb) in s.bob.iter().enumerate() {
            let p = g.pi(sq, tq);
            if p == 0.0 {
                continue;
            }
            for (a, ea) in fa.iter().enumerate() {
                let mut bsum = Operator::zeros(db, db);
                for (b, eb) in fb.iter().enumerate() {
                    if g.wins(sq, tq, a, b) {
                        bsum += eb;
                    }
                }
                w += kron(ea, &bsum) * C64::from(p);
            }
        }
    }
    Ok(w)
}

/// `ω(S, G) = Σ π 𝒱 p(a,b|s,t) = tr(W ρ)`
pub fn win_probability(g: &NonlocalGame, s: &Strategy) -> Result<f64> {
    g.check_compatible(s)?;
    Ok(correlation_of(s)?.win_probability(g))
}

/// `δ = ω_q − ω(S, G)`, returned as-is even when negative.
pub fn optimality_gap(g: &NonlocalGame, s: &Strategy, omega_q: f64) -> Result<f64> {
    Ok(omega_q - win_probability(g, s)?)
}

/// Outcome distribution `p(a,b|s,t)`, stored as `table[s][t][a][b]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correlation {
    pub table: Vec<Vec<Vec<Vec<f64>>>>,
}

impl Correlation {
    pub fn get(&self, a: usize, b: usize, s: usize, t: usize) -> f64 {
        self.table[s][t][a][b]
    }

    pub fn win_probability(&self, g: &NonlocalGame) -> f64 {
        let mut total = 0.0;
        for (s, row) in self.table.iter().enumerate() {
            for (t, block) in row.iter().enumerate() {
                let mut won = 0.0;
                for (a, probs) in block.iter().enumerate() {
                    for (b, &p) in probs.iter().enumerate() {
                        if g.wins(s, t, a, b) {
                            won += p;
                        }
                    }
                }
                total += g.pi(s, t) * won;
            }
        }
        total
    }

    /// Largest absolute entrywise difference; tables of different shape compare as infinite.
    pub fn max_difference(&self, other: &Correlation) -> f64 {
        let mut worst = 0.0f64;
        if self.table.len() != other.table.len() {
            return f64::INFINITY;
        }
        for (x, y) in self.table.iter().zip(&other.table) {
            if x.len() != y.len() {
                return f64::INFINITY;
            }
            for (xb, yb) in x.iter().zip(y) {
                if xb.len() != yb.len() {
                    return f64::INFINITY;
                }
                for (xr, yr) in xb.iter().zip(yb) {
                    if xr.len() != yr.len() {
                        return f64::INFINITY;
                    }
                    for (p, q) in xr.iter().zip(yr) {
                        worst = worst.max((p - q).abs());
                    }
                }
            }
        }
        worst
    }

    /// Checks entry range and per-question normalization.
    pub fn check(&self) -> Result<()> {
        for (s, row) in self.table.iter().enumerate() {
            for (t, block) in row.iter().enumerate() {
                let total: f64 = block.iter().flatten().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidStrategy(format!(
                        "p(.,.|{s},{t}) sums to {total}"
                    )));
                }
                if block.iter().flatten().any(|&p| !(-1e-12..=1.0 + 1e-12).contains(&p)) {
                    return Err(Error::InvalidStrategy(format!(
                        "p(.,.|{s},{t}) has an entry outside [0, 1]"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// `p(a,b|s,t) = tr(ρ A_sa ⊗ B_tb)`.
///
/// Checks dimensions, Hermiticity and completeness of every family; use
/// [`validate_strategy`] for the positivity checks.
pub fn correlation_of(s: &Strategy) -> Result<Correlation> {
    ensure_structurally_valid(s)?;
    let (da, db) = s.dims;
    // For each Alice element, a d_B x d_B matrix L with p = Σ_kl L[k,l] B[k,l].
    let left: Vec<Vec<Operator>> = match &s.state {
        State::Pure(psi) => {
            let m = reshape_state(psi, s.dims)?;
            let mh = m.adjoint();
            s.alice
                .iter()
                .map(|fam| fam.iter().map(|a| &mh * a * &m).collect())
                .collect()
        }
        State::Mixed(rho) => s
            .alice
            .iter()
            .map(|fam| {
                fam.iter()
                    .map(|a| {
                        // tr(ρ(A⊗B)) = Σ ρ[(j,l),(i,k)] A[i,j] B[k,l]
                        Operator::from_fn(db, db, |k, l| {
                            let mut acc = C64::new(0.0, 0.0);
                            for i in 0..da {
                                for j in 0..da {
                                    acc += a[(i, j)] * rho[(j * db + l, i * db + k)];
                                }
                            }
                            acc
                        })
                    })
                    .collect()
            })
            .collect(),
    };
    let table = left
        .iter()
        .map(|lfam| {
            s.bob
                .iter()
                .map(|bfam| {
                    lfam.iter()
                        .map(|l| {
                            bfam.iter()
                                .map(|b| l.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<C64>().re)
                                .collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let corr = Correlation { table };
    corr.check()?;
    Ok(corr)
}

/// `⟨ψ| X ⊗ Y |ψ⟩` for a pure strategy.
pub fn expectation(s: &Strategy, x: &Operator, y: &Operator) -> Result<C64> {
    let psi = s.pure_vector("expectation")?;
    Ok(local_expectation(x, y, &reshape_state(&psi, s.dims)?))
}

/// Attaches `|anc_a⟩_{A'} ⊗ |anc_b⟩_{B'}` and extends every element by the identity.
/// The new local spaces are `H_A ⊗ H_A'` and `H_B ⊗ H_B'`.
pub fn attach_product_ancilla(s: &Strategy, anc_a: &StateVector, anc_b: &StateVector) -> Result<Strategy> {
    let (da, db) = s.dims;
    let (ka, kb) = (anc_a.len(), anc_b.len());
    let state = match &s.state {
        State::Pure(psi) => {
            let m = reshape_state(psi, s.dims)?;
            let outer = anc_a * anc_b.transpose();
            State::Pure(crate::tensor::flatten_state(&kron(&m, &outer)))
        }
        State::Mixed(rho) => {
            let pa = anc_a * anc_a.adjoint();
            let pb = anc_b * anc_b.adjoint();
            let big = kron(&kron(rho, &pa), &pb);
            // (A B A' B') -> (A A' B B')
            State::Mixed(swap_middle_factors(&big, [da, db, ka, kb])?)
        }
    };
    let ia = identity(ka);
    let ib = identity(kb);
    Strategy::new(
        (da * ka, db * kb),
        state,
        s.alice.iter().map(|f| f.iter().map(|e| kron(e, &ia)).collect()).collect(),
        s.bob.iter().map(|f| f.iter().map(|e| kron(e, &ib)).collect()).collect(),
    )
}

/// `(U_A ⊗ U_B)` applied to the state, elements conjugated `E ↦ U E U*`.
pub fn conjugate_local(s: &Strategy, ua: &Operator, ub: &Operator) -> Result<Strategy> {
    let (da, db) = s.dims;
    if ua.shape() != (da, da) {
        return Err(mismatch("conjugate_local U_A", da, ua.nrows()));
    }
    if ub.shape() != (db, db) {
        return Err(mismatch("conjugate_local U_B", db, ub.nrows()));
    }
    let state = match &s.state {
        State::Pure(psi) => State::Pure(crate::tensor::apply_local(ua, ub, psi, s.dims)?),
        State::Mixed(rho) => {
            let u = kron(ua, ub);
            State::Mixed(&u * rho * u.adjoint())
        }
    };
    let conj = |u: &Operator, fams: &[Povm]| -> Vec<Povm> {
        fams.iter()
            .map(|f| f.iter().map(|e| u * e * u.adjoint()).collect())
            .collect()
    };
    Strategy::new(s.dims, state, conj(ua, &s.alice), conj(ub, &s.bob))
}
