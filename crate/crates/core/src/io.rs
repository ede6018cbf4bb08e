//! JSON encodings of strategies, games and witnesses, and report emission.
//!
//! Complex numbers are `[re, im]` pairs; matrices are row-major nested arrays of pairs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dilation::DilationWitness;
use crate::error::{Error, Result};
use crate::strategy::{ensure_valid, NonlocalGame, Povm, State, Strategy};
use crate::tensor::{c, Operator, StateVector};

pub type ComplexRepr = [f64; 2];
pub type VectorRepr = Vec<ComplexRepr>;
pub type MatrixRepr = Vec<Vec<ComplexRepr>>;

pub fn vector_repr(v: &StateVector) -> VectorRepr {
    v.iter().map(|z| [z.re, z.im]).collect()
}

pub fn matrix_repr(m: &Operator) -> MatrixRepr {
    m.row_iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn vector_from_repr(v: &[ComplexRepr]) -> StateVector {
    StateVector::from_iterator(v.len(), v.iter().map(|&[x, y]| c(x, y)))
}

pub fn matrix_from_repr(m: &[Vec<ComplexRepr>], what: &str) -> Result<Operator> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if let Some(bad) = m.iter().position(|r| r.len() != cols) {
        return Err(Error::InvalidStrategy(format!(
            "{what}: row {bad} has {} entries, row 0 has {cols}",
            m[bad].len()
        )));
    }
    Ok(Operator::from_fn(rows, cols, |i, j| {
        let [x, y] = m[i][j];
        c(x, y)
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DimsRepr {
    #[serde(rename = "A")]
    pub a: usize,
    #[serde(rename = "B")]
    pub b: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase")]
pub enum StateRepr {
    Pure(VectorRepr),
    Mixed(MatrixRepr),
}

/// On-disk strategy layout.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyRepr {
    pub dims: DimsRepr,
    pub state: StateRepr,
    pub alice: Vec<Vec<MatrixRepr>>,
    pub bob: Vec<Vec<MatrixRepr>>,
}

impl StrategyRepr {
    pub fn from_strategy(s: &Strategy) -> Self {
        let fams = |f: &[Povm]| f.iter().map(|fam| fam.iter().map(matrix_repr).collect()).collect();
        Self {
            dims: DimsRepr {
                a: s.dims.0,
                b: s.dims.1,
            },
            state: match &s.state {
                State::Pure(v) => StateRepr::Pure(vector_repr(v)),
                State::Mixed(m) => StateRepr::Mixed(matrix_repr(m)),
            },
            alice: fams(&s.alice),
            bob: fams(&s.bob),
        }
    }

    /// Structural conversion; dimensions are checked, POVM conditions are not.
    pub fn to_strategy(&self) -> Result<Strategy> {
        let state = match &self.state {
            StateRepr::Pure(v) => State::Pure(vector_from_repr(v)),
            StateRepr::Mixed(m) => State::Mixed(matrix_from_repr(m, "mixed state")?),
        };
        let fams = |who: &str, f: &[Vec<MatrixRepr>]| -> Result<Vec<Povm>> {
            f.iter()
                .enumerate()
                .map(|(q, fam)| {
                    fam.iter()
                        .enumerate()
                        .map(|(a, m)| matrix_from_repr(m, &format!("{who} question {q} answer {a}")))
                        .collect()
                })
                .collect()
        };
        Strategy::new(
            (self.dims.a, self.dims.b),
            state,
            fams("Alice", &self.alice)?,
            fams("Bob", &self.bob)?,
        )
    }
}

pub fn strategy_to_json(s: &Strategy) -> String {
    to_json(&StrategyRepr::from_strategy(s))
}

/// Parses strategy JSON without checking the POVM conditions.
pub fn strategy_from_json_unchecked(text: &str) -> Result<Strategy> {
    serde_json::from_str::<StrategyRepr>(text)?.to_strategy()
}

/// Parses strategy JSON and requires [`ensure_valid`] at `tol`.
pub fn strategy_from_json(text: &str, tol: f64) -> Result<Strategy> {
    let s = strategy_from_json_unchecked(text)?;
    ensure_valid(&s, tol)?;
    Ok(s)
}

pub fn parse_strategy_file(path: impl AsRef<Path>, tol: f64) -> Result<Strategy> {
    strategy_from_json(&fs::read_to_string(path)?, tol)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameRepr {
    pub pi: Vec<Vec<f64>>,
    /// `[s][t][a][b]`, entries 0 or 1.
    pub predicate: Vec<Vec<Vec<Vec<u8>>>>,
}

impl GameRepr {
    pub fn from_game(g: &NonlocalGame) -> Self {
        Self {
            pi: g.pi_table().to_vec(),
            predicate: g
                .predicate_table()
                .iter()
                .map(|x| x.iter().map(|y| y.iter().map(|z| z.iter().map(|&w| u8::from(w)).collect()).collect()).collect())
                .collect(),
        }
    }

    pub fn to_game(&self) -> Result<NonlocalGame> {
        let mut predicate = Vec::with_capacity(self.predicate.len());
        for x in &self.predicate {
            let mut px = Vec::with_capacity(x.len());
            for y in x {
                let mut py = Vec::with_capacity(y.len());
                for z in y {
                    let pz = z
                        .iter()
                        .map(|&w| match w {
                            0 => Ok(false),
                            1 => Ok(true),
                            other => Err(Error::InvalidGame(format!("predicate entry {other} is not 0 or 1"))),
                        })
                        .collect::<Result<Vec<bool>>>()?;
                    py.push(pz);
                }
                px.push(py);
            }
            predicate.push(px);
        }
        NonlocalGame::new(self.pi.clone(), predicate)
    }
}

pub fn game_to_json(g: &NonlocalGame) -> String {
    to_json(&GameRepr::from_game(g))
}

pub fn parse_game_file(path: impl AsRef<Path>) -> Result<NonlocalGame> {
    serde_json::from_str::<GameRepr>(&fs::read_to_string(path)?)?.to_game()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum WitnessForm {
    #[default]
    Vector,
    Matrix,
    Extraction,
}

/// A vector (`|aux⟩`) or a matrix (`σ_aux`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AuxRepr {
    Vector(VectorRepr),
    Matrix(MatrixRepr),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessRepr {
    #[serde(rename = "U_A")]
    pub u_a: MatrixRepr,
    #[serde(rename = "U_B")]
    pub u_b: MatrixRepr,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub aux: Option<AuxRepr>,
    #[serde(default)]
    pub form: WitnessForm,
}

/// Witness file contents after decoding.
#[derive(Debug, Clone)]
pub struct WitnessFile {
    pub u_a: Operator,
    pub u_b: Operator,
    pub aux: Option<AuxData>,
    pub form: WitnessForm,
}

#[derive(Debug, Clone)]
pub enum AuxData {
    Vector(StateVector),
    Matrix(Operator),
}

impl WitnessRepr {
    pub fn from_witness(w: &DilationWitness) -> Self {
        Self {
            u_a: matrix_repr(&w.u_a),
            u_b: matrix_repr(&w.u_b),
            aux: Some(AuxRepr::Vector(vector_repr(&w.aux))),
            form: WitnessForm::Vector,
        }
    }

    pub fn decode(&self) -> Result<WitnessFile> {
        Ok(WitnessFile {
            u_a: matrix_from_repr(&self.u_a, "U_A")?,
            u_b: matrix_from_repr(&self.u_b, "U_B")?,
            aux: match &self.aux {
                None => None,
                Some(AuxRepr::Vector(v)) => Some(AuxData::Vector(vector_from_repr(v))),
                Some(AuxRepr::Matrix(m)) => Some(AuxData::Matrix(matrix_from_repr(m, "aux")?)),
            },
            form: self.form,
        })
    }
}

pub fn witness_to_json(w: &DilationWitness) -> String {
    to_json(&WitnessRepr::from_witness(w))
}

pub fn parse_witness_file(path: impl AsRef<Path>) -> Result<WitnessFile> {
    serde_json::from_str::<WitnessRepr>(&fs::read_to_string(path)?)?.decode()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Pretty JSON with a trailing newline. Floats use the shortest round-trip representation.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

fn scalar_csv(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    let join = |k: &str| if prefix.is_empty() { k.to_string() } else { format!("{prefix}.{k}") };
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                flatten(&join(k), x, out);
            }
        }
        Value::Array(items) => {
            for (i, x) in items.iter().enumerate() {
                flatten(&join(&i.to_string()), x, out);
            }
        }
        scalar => out.push((prefix.to_string(), scalar_csv(scalar))),
    }
}

/// CSV form of a serialized report. An array of flat records becomes a table with a header
/// row; anything else becomes `key,value` rows with dotted paths.
pub fn to_csv(value: &Value) -> String {
    if let Value::Array(items) = value {
        let records: Option<Vec<&serde_json::Map<String, Value>>> = items
            .iter()
            .map(|x| x.as_object().filter(|m| m.values().all(|v| !v.is_object() && !v.is_array())))
            .collect();
        if let Some(records) = records.filter(|r| !r.is_empty()) {
            let header: Vec<&String> = records[0].keys().collect();
            let mut s = header.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(",");
            s.push('\n');
            for r in records {
                let row: Vec<String> = header.iter().map(|k| r.get(*k).map_or(String::new(), scalar_csv)).collect();
                s.push_str(&row.join(","));
                s.push('\n');
            }
            return s;
        }
    }
    let mut rows = Vec::new();
    flatten("", value, &mut rows);
    let mut s = String::from("key,value\n");
    for (k, v) in rows {
        s.push_str(&format!("{k},{v}\n"));
    }
    s
}

/// Deterministic serialization of any report.
pub fn emit_report<T: Serialize + ?Sized>(result: &T, format: Format) -> Vec<u8> {
    match format {
        Format::Json => to_json(result).into_bytes(),
        Format::Csv => to_csv(&serde_json::to_value(result).expect("serializable report")).into_bytes(),
    }
}
