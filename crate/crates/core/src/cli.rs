//! Command-line surface: argument parsing, command dispatch and exit codes.
//!
//! Exit codes: 0 on success or a passed check, 1 on a failed check, 2 on input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::dilation::{
    aux_density, dilation_residuals_with_probes, extraction_residual, matrix_form_residual,
    naimark_embedding, vector_to_matrix, DilationWitness, ResidualReport, PURIFICATION_PROBES,
};
use crate::error::{Error, Result};
use crate::io::{
    emit_report, matrix_repr, parse_game_file, parse_strategy_file, parse_witness_file,
    strategy_from_json_unchecked, AuxData, Format, MatrixRepr, StrategyRepr, WitnessForm,
};
use crate::lab::{
    beta_functionals, canonical_chsh, chsh_game, eigengap_analysis, literal_h_moments,
    moment_separation, observable, phi_plus, rank_deficient_combination, robustness_constant,
    robustness_sweep, trine_strategy, BetaValues, MomentSeparation, SweepConfig, OMEGA_CHSH,
};
use crate::metrics::{projective_eps, strategy_metrics, support_preserving_eps};
use crate::naimark::{naimark_strategy, verify_dilation, DilationCheck, NaimarkDilation};
use crate::random::{random_vector, seeded};
use crate::schmidt::restrict;
use crate::strategy::{
    correlation_of, expectation, game_operator, validate_strategy, Strategy, ValidationReport,
};
use crate::tensor::StateVector;

/// Environment variable capping the worker thread count (0 = automatic).
pub const THREADS_ENV: &str = "SELFTEST_LAB_THREADS";

#[derive(Debug, Clone, Parser)]
#[command(name = "selftest-lab", version, about = "Self-testing toolkit for nonlocal-game strategies")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    /// Numerical tolerance for validation and pass/fail checks.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Check state normalization and POVM conditions; exit 1 if any defect exceeds --tol.
    Validate { strategy: PathBuf },
    /// Correlation table p(a,b|s,t), and the winning probability if a game is given.
    Correlation {
        strategy: PathBuf,
        #[arg(long)]
        game: Option<PathBuf>,
    },
    /// Support-preserving and projective diagnostics of a pure strategy.
    Metrics { strategy: PathBuf },
    /// Restriction of a pure strategy to the supports of its state.
    Restrict { strategy: PathBuf },
    /// Naimark dilation of a pure strategy with its isometries.
    Naimark { strategy: PathBuf },
    /// Residuals of a witness for src ↪ dst; exit 0 iff eps ≤ --tol.
    CheckDilation {
        src: PathBuf,
        dst: PathBuf,
        witness: PathBuf,
        /// Random H_P unitaries tried for mixed sources.
        #[arg(long, default_value_t = PURIFICATION_PROBES)]
        probes: usize,
    },
    /// Reproduce a worked example.
    #[command(subcommand)]
    Repro(Repro),
}

#[derive(Debug, Clone, Subcommand)]
pub enum Repro {
    /// Winning probability, β₀, eigengap and robustness constant of the canonical CHSH strategy.
    Chsh,
    /// β functionals and diagnostics of the trine strategy.
    Trine,
    /// Higher-order moments separating two PVM dilations of the trine strategy.
    Moments,
    /// Rank-deficient combinations of random pairs in C^d ⊗ C^d, d = 2, 3, 4.
    Pencil {
        #[arg(long, default_value_t = 100)]
        pairs: usize,
    },
    /// Distance of perturbed CHSH states from Φ⁺ ⊗ aux against the eigengap bound.
    Robustness {
        #[arg(long, default_value_t = 40)]
        samples: usize,
        #[arg(long, default_value_t = 2)]
        aux_dim: usize,
        #[arg(long, value_delimiter = ',')]
        magnitudes: Option<Vec<f64>>,
    },
}

/// Serialized report and whether the check it encodes passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub bytes: Vec<u8>,
    pub passed: bool,
}

fn outcome<T: Serialize + ?Sized>(report: &T, format: Format, passed: bool) -> Outcome {
    Outcome {
        bytes: emit_report(report, format),
        passed,
    }
}

#[derive(Serialize)]
struct ValidateOutput {
    valid: bool,
    defects: Vec<String>,
    report: ValidationReport,
}

#[derive(Serialize)]
struct CorrelationOutput {
    correlation: Vec<Vec<Vec<Vec<f64>>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    win_probability: Option<f64>,
}

#[derive(Serialize)]
struct RestrictOutput {
    schmidt_coefficients: Vec<f64>,
    support_eps: f64,
    #[serde(rename = "U_A")]
    u_a: MatrixRepr,
    #[serde(rename = "U_B")]
    u_b: MatrixRepr,
    strategy: StrategyRepr,
}

#[derive(Serialize)]
struct NaimarkOutput {
    alice_check: DilationCheck,
    bob_check: DilationCheck,
    correlation_difference: f64,
    #[serde(rename = "V_A")]
    v_a: MatrixRepr,
    #[serde(rename = "V_B")]
    v_b: MatrixRepr,
    strategy: StrategyRepr,
}

#[derive(Serialize)]
struct CheckOutput {
    form: WitnessForm,
    tol: f64,
    eps: f64,
    passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    residuals: Option<ResidualReport>,
}

#[derive(Serialize)]
struct ChshOutput {
    win_probability: f64,
    omega: f64,
    beta0: f64,
    p_00_00: f64,
    eigengap: f64,
    top_multiplicity: usize,
    robustness_constant: f64,
    passed: bool,
}

#[derive(Serialize)]
struct TrineOutput {
    beta: BetaValues,
    support_eps: f64,
    projective_eps: f64,
    naimark_embedding_eps: f64,
    passed: bool,
}

#[derive(Serialize)]
struct MomentsOutput {
    separation: MomentSeparation,
    literal_h_word: MomentSeparation,
    passed: bool,
}

#[derive(Serialize)]
struct PencilRow {
    d: usize,
    pairs: usize,
    max_rank: usize,
    all_rank_deficient: bool,
}

fn load(path: &PathBuf, tol: f64) -> Result<Strategy> {
    parse_strategy_file(path, tol).map_err(|e| with_path(e, path))
}

fn with_path(e: Error, path: &Path) -> Error {
    match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        Error::InvalidStrategy(msg) => Error::InvalidStrategy(format!("{}:\n{msg}", path.display())),
        other => other,
    }
}

fn chsh_beta0(s: &Strategy) -> Result<f64> {
    let a: Vec<_> = s.alice.iter().map(observable).collect::<Result<_>>()?;
    let b: Vec<_> = s.bob.iter().map(observable).collect::<Result<_>>()?;
    let e = |x, y| expectation(s, x, y).map(|z| z.re);
    Ok(e(&a[0], &b[0])? + e(&a[0], &b[1])? + e(&a[1], &b[0])? - e(&a[1], &b[1])?)
}

fn check_dilation(cfg: &RunConfig, src: &PathBuf, dst: &PathBuf, witness: &PathBuf, probes: usize) -> Result<Outcome> {
    let src = load(src, cfg.tol)?;
    let dst = load(dst, cfg.tol)?;
    let w = parse_witness_file(witness).map_err(|e| with_path(e, witness))?;
    let (eps, residuals) = match w.form {
        WitnessForm::Vector => {
            let aux = match (&w.aux, src.is_pure()) {
                (Some(AuxData::Vector(v)), _) => v.clone(),
                (_, false) => StateVector::zeros(0),
                _ => {
                    return Err(Error::InvalidStrategy(
                        "a vector-form witness for a pure source needs an \"aux\" vector".into(),
                    ))
                }
            };
            let dw = DilationWitness {
                u_a: w.u_a,
                u_b: w.u_b,
                aux,
            };
            let r = dilation_residuals_with_probes(&src, &dst, &dw, probes, cfg.seed)?;
            (r.eps, Some(r))
        }
        WitnessForm::Matrix => {
            let dw = DilationWitness {
                u_a: w.u_a,
                u_b: w.u_b,
                aux: StateVector::zeros(0),
            };
            let sigma = match w.aux {
                Some(AuxData::Matrix(m)) => m,
                Some(AuxData::Vector(v)) => aux_density(&v, dw.ancilla_dims(dst.dims)?)?,
                None => vector_to_matrix(&src, &dst, &dw)?,
            };
            (matrix_form_residual(&src, &dst, &dw.u_a, &dw.u_b, &sigma)?, None)
        }
        WitnessForm::Extraction => {
            let r = extraction_residual(&src, &dst, &w.u_a, &w.u_b)?;
            (r.eps, Some(r))
        }
    };
    let passed = eps <= cfg.tol;
    let out = CheckOutput {
        form: w.form,
        tol: cfg.tol,
        eps,
        passed,
        residuals,
    };
    Ok(outcome(&out, cfg.format, passed))
}

fn repro(cfg: &RunConfig, which: &Repro) -> Result<Outcome> {
    const EXACT: f64 = 1e-12;
    let s2 = std::f64::consts::SQRT_2;
    match which {
        Repro::Chsh => {
            let s = canonical_chsh();
            let g = chsh_game();
            let corr = correlation_of(&s)?;
            let w = game_operator(&g, &s)?;
            let gap = eigengap_analysis(&w, &phi_plus(), &phi_plus(), 0.0)?;
            let win = corr.win_probability(&g);
            let beta0 = chsh_beta0(&s)?;
            let p = corr.get(0, 0, 0, 0);
            let passed = (win - OMEGA_CHSH).abs() < EXACT
                && (beta0 - 2.0 * s2).abs() < EXACT
                && (p - (std::f64::consts::PI / 8.0).cos().powi(2) / 2.0).abs() < EXACT
                && (gap.gap - s2 / 4.0).abs() < EXACT
                && gap.top_multiplicity == 1;
            let out = ChshOutput {
                win_probability: win,
                omega: OMEGA_CHSH,
                beta0,
                p_00_00: p,
                eigengap: gap.gap,
                top_multiplicity: gap.top_multiplicity,
                robustness_constant: robustness_constant(&g),
                passed,
            };
            Ok(outcome(&out, cfg.format, passed))
        }
        Repro::Trine => {
            let s = trine_strategy();
            let beta = beta_functionals(&s)?;
            let e = naimark_embedding(&s)?;
            let naimark_eps = crate::dilation::dilation_residuals(&e.src, &e.dst, &e.witness)?.eps;
            let passed = (beta.beta0 - 2.0 * s2).abs() < EXACT && (beta.beta1 - 1.0).abs() < EXACT;
            let out = TrineOutput {
                beta,
                support_eps: support_preserving_eps(&s)?,
                projective_eps: projective_eps(&s)?,
                naimark_embedding_eps: naimark_eps,
                passed,
            };
            Ok(outcome(&out, cfg.format, passed))
        }
        Repro::Moments => {
            let m = moment_separation()?;
            let passed = (m.s1 - (4.0 - s2) / 18.0).abs() < EXACT
                && (m.s2 - (2.0 - s2) / 18.0).abs() < EXACT
                && (m.difference - 1.0 / 9.0).abs() < EXACT;
            let out = MomentsOutput {
                separation: m,
                literal_h_word: literal_h_moments()?,
                passed,
            };
            Ok(outcome(&out, cfg.format, passed))
        }
        Repro::Pencil { pairs } => {
            let mut rng = seeded(cfg.seed);
            let mut rows = Vec::new();
            for d in 2..=4 {
                let mut max_rank = 0;
                for _ in 0..*pairs {
                    let phi = random_vector(d * d, &mut rng);
                    let psi = random_vector(d * d, &mut rng);
                    max_rank = max_rank.max(rank_deficient_combination(&phi, &psi, d)?.rank);
                }
                rows.push(PencilRow {
                    d,
                    pairs: *pairs,
                    max_rank,
                    all_rank_deficient: max_rank < d,
                });
            }
            let passed = rows.iter().all(|r| r.all_rank_deficient);
            Ok(outcome(&rows, cfg.format, passed))
        }
        Repro::Robustness {
            samples,
            aux_dim,
            magnitudes,
        } => {
            let sweep = SweepConfig {
                magnitudes: magnitudes.clone().unwrap_or_else(|| SweepConfig::default().magnitudes),
                seeds_per_magnitude: *samples,
                seed: cfg.seed,
                aux_dim: *aux_dim,
            };
            let rows = robustness_sweep(&sweep)?;
            let passed = rows.iter().all(|r| r.epsilon <= r.bound + 1e-9);
            Ok(outcome(&rows, cfg.format, passed))
        }
    }
}

/// Runs one command and returns its report.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.tol.is_nan() || cfg.tol <= 0.0 || cfg.tol.is_infinite() {
        return Err(Error::InvalidStrategy(format!("--tol must be positive, got {}", cfg.tol)));
    }
    match &cfg.command {
        Command::Validate { strategy } => {
            let text = fs::read_to_string(strategy).map_err(|e| with_path(e.into(), strategy))?;
            let s = strategy_from_json_unchecked(&text)?;
            let report = validate_strategy(&s, cfg.tol)?;
            let out = ValidateOutput {
                valid: report.valid,
                defects: report.defects(cfg.tol),
                report,
            };
            Ok(outcome(&out, cfg.format, out.valid))
        }
        Command::Correlation { strategy, game } => {
            let s = load(strategy, cfg.tol)?;
            let corr = correlation_of(&s)?;
            let win_probability = match game {
                Some(path) => {
                    let g = parse_game_file(path).map_err(|e| with_path(e, path))?;
                    g.check_compatible(&s)?;
                    Some(corr.win_probability(&g))
                }
                None => None,
            };
            let out = CorrelationOutput {
                correlation: corr.table,
                win_probability,
            };
            Ok(outcome(&out, cfg.format, true))
        }
        Command::Metrics { strategy } => {
            let m = strategy_metrics(&load(strategy, cfg.tol)?)?;
            Ok(outcome(&m, cfg.format, true))
        }
        Command::Restrict { strategy } => {
            let s = load(strategy, cfg.tol)?;
            let r = restrict(&s)?;
            let out = RestrictOutput {
                schmidt_coefficients: r.schmidt.coefficients.clone(),
                support_eps: support_preserving_eps(&s)?,
                u_a: matrix_repr(&r.u_a),
                u_b: matrix_repr(&r.u_b),
                strategy: StrategyRepr::from_strategy(&r.strategy),
            };
            Ok(outcome(&out, cfg.format, true))
        }
        Command::Naimark { strategy } => {
            let s = load(strategy, cfg.tol)?;
            let n = naimark_strategy(&s)?;
            let side = |pvms: &[crate::strategy::Povm], v: &crate::tensor::Operator| NaimarkDilation {
                pvms: pvms.to_vec(),
                isometry: v.clone(),
                dims: (v.ncols(), v.nrows()),
            };
            let alice_check = verify_dilation(&s.alice, &side(&n.strategy.alice, &n.v_a), cfg.tol)?;
            let bob_check = verify_dilation(&s.bob, &side(&n.strategy.bob, &n.v_b), cfg.tol)?;
            let diff = correlation_of(&s)?.max_difference(&correlation_of(&n.strategy)?);
            let passed = alice_check.passed && bob_check.passed && diff <= cfg.tol;
            let out = NaimarkOutput {
                alice_check,
                bob_check,
                correlation_difference: diff,
                v_a: matrix_repr(&n.v_a),
                v_b: matrix_repr(&n.v_b),
                strategy: StrategyRepr::from_strategy(&n.strategy),
            };
            Ok(outcome(&out, cfg.format, passed))
        }
        Command::CheckDilation {
            src,
            dst,
            witness,
            probes,
        } => check_dilation(cfg, src, dst, witness, *probes),
        Command::Repro(which) => repro(cfg, which),
    }
}

/// Thread count from [`THREADS_ENV`]; unset, empty or unparsable means automatic.
pub fn configured_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

/// Executes `cfg`, writes the report and returns the process exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let result = match rayon::ThreadPoolBuilder::new().num_threads(configured_threads()).build() {
        Ok(pool) => pool.install(|| execute(cfg)),
        Err(_) => execute(cfg),
    };
    let out = match result {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let written = match &cfg.out {
        Some(path) => fs::write(path, &out.bytes),
        None => std::io::stdout().lock().write_all(&out.bytes),
    };
    if let Err(e) = written {
        eprintln!("error: writing report: {e}");
        return 2;
    }
    if out.passed {
        0
    } else {
        1
    }
}

/// Parses `args` (including the program name) and runs.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match RunConfig::try_parse_from(args) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            let _ = e.print();
            e.exit_code()
        }
    }
}
