//! JSON analysis reports.
//!
//! Reports are written key-sorted with every number rounded to 12
//! significant digits, so identical runs give identical bytes and a report
//! survives a parse/serialize round trip unchanged.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::error::Result;

fn round12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Text form used in reports and CSV output: 12 significant digits,
/// `inf`, `-inf` or `nan` for non-finite values.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{}", round12(x))
    }
}

/// A report number. Finite values serialize as JSON numbers rounded to 12
/// significant digits; infinities and NaN as strings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Real(pub f64);

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0.is_finite() {
            s.serialize_f64(round12(self.0))
        } else {
            s.serialize_str(&format_number(self.0))
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct RealVisitor;
        impl Visitor<'_> for RealVisitor {
            type Value = Real;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or one of \"inf\", \"-inf\", \"nan\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Real, E> {
                Ok(Real(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Real, E> {
                match v {
                    "inf" => Ok(Real(f64::INFINITY)),
                    "-inf" => Ok(Real(f64::NEG_INFINITY)),
                    "nan" => Ok(Real(f64::NAN)),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(RealVisitor)
    }
}

impl Real {
    pub fn vec(v: &DVector<f64>) -> Vec<Real> {
        v.iter().map(|&x| Real(x)).collect()
    }

    pub fn slice(v: &[f64]) -> Vec<Real> {
        v.iter().map(|&x| Real(x)).collect()
    }

    /// Row-major nested rows.
    pub fn rows(m: &DMatrix<f64>) -> Vec<Vec<Real>> {
        (0..m.nrows()).map(|i| m.row(i).iter().map(|&x| Real(x)).collect()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ava,
    Avt,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EloBlock {
    /// Display (Elo) units.
    pub ratings: Vec<Real>,
    pub ratings_natural: Vec<Real>,
    pub scale: Real,
    pub iterations: usize,
    pub residual: Real,
    pub frobenius: Real,
    pub log_loss: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeloBlock {
    pub k: usize,
    /// Display (Elo) units.
    pub ratings: Vec<Real>,
    pub ratings_natural: Vec<Real>,
    /// One row of `2k` features per player.
    pub cyclic_features: Vec<Vec<Real>>,
    pub epochs: usize,
    pub seed: u64,
    pub frobenius: Real,
    pub log_loss: Real,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchurBlock {
    /// Block magnitudes, largest first.
    pub pairs: Vec<Real>,
    /// One row per player: coordinates in the `2k` Schur basis vectors.
    pub basis: Vec<Vec<Real>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HodgeBlock {
    /// `div(A)` in logit units (AvA), or skill followed by difficulty (AvT).
    pub ratings: Vec<Real>,
    pub transitive_norm: Real,
    pub cyclic_norm: Real,
    pub max_curl: Real,
    pub cyclic: bool,
    pub transitive: bool,
    pub maxent_prediction: Option<Vec<Real>>,
    pub schur: Option<SchurBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NashBlock {
    pub distribution: Vec<Real>,
    pub nash_average: Vec<Real>,
    pub uniform_average: Vec<Real>,
    pub support: Vec<String>,
    pub entropy: Real,
    pub exploitability: Real,
    /// Game value (AvT only).
    pub value: Option<Real>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub subcommand: String,
    pub status: String,
    pub error: Option<String>,
    pub input_sha256: String,
    pub matrix_sha256: Option<String>,
    pub shape: Vec<usize>,
    pub tolerance: Real,
    pub clamp_eps: Real,
    pub iterations: usize,
    pub residual: Real,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub mode: Mode,
    /// Players; for AvT agents followed by tasks.
    pub labels: Vec<String>,
    pub elo: Option<EloBlock>,
    pub melo: Option<MeloBlock>,
    pub hodge: Option<HodgeBlock>,
    pub nash: Option<NashBlock>,
    pub diagnostics: Diagnostics,
}

impl EvaluationReport {
    pub fn new(mode: Mode, labels: Vec<String>, diagnostics: Diagnostics) -> Self {
        EvaluationReport { mode, labels, elo: None, melo: None, hodge: None, nash: None, diagnostics }
    }
}

impl Diagnostics {
    pub fn new(subcommand: &str, input: &[u8], tolerance: f64, clamp_eps: f64) -> Self {
        Diagnostics {
            subcommand: subcommand.into(),
            status: "ok".into(),
            error: None,
            input_sha256: sha256_hex(input),
            matrix_sha256: None,
            shape: Vec::new(),
            tolerance: Real(tolerance),
            clamp_eps: Real(clamp_eps),
            iterations: 0,
            residual: Real(0.0),
            warnings: Vec::new(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Checksum of a matrix as printed with 12 significant digits, row-major.
pub fn matrix_sha256(m: &DMatrix<f64>) -> String {
    let text: Vec<String> =
        (0..m.nrows()).map(|i| m.row(i).iter().map(|&x| format_number(x)).collect::<Vec<_>>().join(",")).collect();
    sha256_hex(text.join("\n").as_bytes())
}

/// Pretty-printed, key-sorted JSON with a trailing newline.
pub fn serialize_report(report: &EvaluationReport) -> Result<String> {
    // serde_json::Value keeps object keys in sorted order
    let value = serde_json::to_value(report)?;
    let mut text = serde_json::to_string_pretty(&value)?;
    text.push('\n');
    Ok(text)
}

pub fn parse_report(text: &str) -> Result<EvaluationReport> {
    Ok(serde_json::from_str(text)?)
}
