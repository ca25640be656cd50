//! JSON documents exchanged with the command line: transform sets,
//! correspondence lists, MDT results and re-referenced panoramas.
//!
//! Numbers are written with the shortest representation that parses back to
//! the identical `f64`, so every document round-trips at full precision.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{de::DeserializeOwned, Deserialize, Serialize};
use thiserror::Error;

use crate::distortion::AffineTransform;
use crate::linalg::SquareMatrix;
use crate::mdt::MdtResult;
use crate::panorama::{CorrectionResult, DistortionReport, PairCorrespondences};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid document: {0}")]
    Invalid(String),

    #[error("PNG error: {0}")]
    Png(String),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        // serde_json appends its own " at line L column C".
        let full = e.to_string();
        let message = full
            .rsplit_once(" at line ")
            .map_or(full.as_str(), |(m, _)| m)
            .to_string();
        FormatError::Json {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, FormatError> {
    Ok(serde_json::from_str(text)?)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("documents always serialize");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    fs::write(path, to_json(value))?;
    Ok(())
}

fn rows(m: &SquareMatrix) -> Vec<Vec<f64>> {
    m.rows()
}

fn matrix_from_rows(
    rows: &[Vec<f64>],
    dim: usize,
    what: &str,
) -> Result<SquareMatrix, FormatError> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(FormatError::Invalid(format!(
            "{what} must be a {dim}x{dim} array"
        )));
    }
    SquareMatrix::from_rows(rows).map_err(|e| FormatError::Invalid(format!("{what}: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformEntry {
    pub id: String,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub height: Option<u32>,
}

/// `{version, dim, entries: [{id, A, b, width?, height?}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformSet {
    pub version: u32,
    pub dim: usize,
    pub entries: Vec<TransformEntry>,
}

impl TransformSet {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let set: Self = parse_json(text)?;
        set.validate()?;
        Ok(set)
    }

    pub fn read(path: &Path) -> Result<Self, FormatError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<(), FormatError> {
        if self.version != FORMAT_VERSION {
            return Err(FormatError::Invalid(format!(
                "unsupported version {}",
                self.version
            )));
        }
        if self.dim == 0 {
            return Err(FormatError::Invalid("dim must be positive".into()));
        }
        if self.entries.is_empty() {
            return Err(FormatError::Invalid("no entries".into()));
        }
        let mut seen = HashSet::new();
        for e in &self.entries {
            if !seen.insert(e.id.as_str()) {
                return Err(FormatError::Invalid(format!("duplicate id '{}'", e.id)));
            }
            matrix_from_rows(&e.a, self.dim, &format!("entry '{}' A", e.id))?;
            if e.b.len() != self.dim {
                return Err(FormatError::Invalid(format!(
                    "entry '{}' b must have {} components",
                    e.id, self.dim
                )));
            }
        }
        Ok(())
    }

    pub fn from_transforms<'a>(
        ids: impl IntoIterator<Item = &'a str>,
        transforms: &[AffineTransform],
        sizes: &[Option<(u32, u32)>],
    ) -> Self {
        let dim = transforms.first().map_or(0, AffineTransform::dim);
        let entries = ids
            .into_iter()
            .zip(transforms)
            .zip(sizes)
            .map(|((id, t), size)| TransformEntry {
                id: id.to_string(),
                a: rows(t.linear()),
                b: t.translation().to_vec(),
                width: size.map(|s| s.0),
                height: size.map(|s| s.1),
            })
            .collect();
        Self {
            version: FORMAT_VERSION,
            dim,
            entries,
        }
    }

    pub fn ids(&self) -> Vec<&str> {
        self.entries.iter().map(|e| e.id.as_str()).collect()
    }

    pub fn sizes(&self) -> Vec<Option<(u32, u32)>> {
        self.entries.iter().map(|e| e.width.zip(e.height)).collect()
    }

    pub fn linear_parts(&self) -> Vec<SquareMatrix> {
        self.entries
            .iter()
            .map(|e| SquareMatrix::from_rows(&e.a).expect("validated on parse"))
            .collect()
    }

    /// Fails with [`crate::Error::SingularMatrix`] on a non-invertible entry.
    pub fn affine_transforms(&self) -> crate::Result<Vec<AffineTransform>> {
        self.linear_parts()
            .into_iter()
            .zip(&self.entries)
            .map(|(a, e)| AffineTransform::new(a, e.b.clone()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverSummary {
    pub iterations: usize,
    pub final_gradient_norm: f64,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineEntry {
    pub id: String,
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdtSummary {
    pub transform: Vec<Vec<f64>>,
    pub objective: f64,
    pub baseline_objectives: Vec<BaselineEntry>,
    pub solver: SolverSummary,
}

impl MdtSummary {
    pub fn new<'a>(result: &MdtResult, ids: impl IntoIterator<Item = &'a str>) -> Self {
        Self {
            transform: rows(result.transform.matrix()),
            objective: result.objective,
            baseline_objectives: ids
                .into_iter()
                .zip(&result.baseline_objectives)
                .map(|(id, &objective)| BaselineEntry {
                    id: id.to_string(),
                    objective,
                })
                .collect(),
            solver: SolverSummary {
                iterations: result.solver.iterations,
                final_gradient_norm: result.solver.final_gradient_norm,
                objective: result.solver.objective,
            },
        }
    }
}

/// Output of the `mdt` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MdtDocument {
    pub version: u32,
    pub dim: usize,
    #[serde(flatten)]
    pub result: MdtSummary,
}

impl MdtDocument {
    pub fn new<'a>(result: &MdtResult, ids: impl IntoIterator<Item = &'a str>) -> Self {
        Self {
            version: FORMAT_VERSION,
            dim: result.transform.dim(),
            result: MdtSummary::new(result, ids),
        }
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        parse_json(text)
    }
}

/// A re-referenced panorama. Also a valid [`TransformSet`] document: the
/// corrected transforms sit in `entries`, diagnostics alongside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionDocument {
    #[serde(flatten)]
    pub transforms: TransformSet,
    pub global_rotation: Vec<Vec<f64>>,
    pub global_shift: [f64; 2],
    pub mdt: MdtSummary,
    pub report: DistortionReport,
}

impl CorrectionDocument {
    pub fn new<'a>(
        result: &CorrectionResult,
        ids: impl IntoIterator<Item = &'a str> + Clone,
        sizes: &[Option<(u32, u32)>],
    ) -> Self {
        Self {
            transforms: TransformSet::from_transforms(
                ids.clone(),
                &result.corrected_transforms,
                sizes,
            ),
            global_rotation: rows(result.global_rotation.matrix()),
            global_shift: result.global_shift,
            mdt: MdtSummary::new(&result.mdt, ids),
            report: result.report.clone(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let doc: Self = parse_json(text)?;
        doc.transforms.validate()?;
        Ok(doc)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceEntry {
    pub from_id: String,
    pub to_id: String,
    /// `[x, y, x', y']`: `(x, y)` in `from_id`, `(x', y')` in `to_id`.
    pub pairs: Vec<[f64; 4]>,
}

fn default_version() -> u32 {
    FORMAT_VERSION
}

/// `{version?, entries: [{from_id, to_id, pairs}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceSet {
    #[serde(default = "default_version")]
    pub version: u32,
    pub entries: Vec<CorrespondenceEntry>,
}

impl CorrespondenceSet {
    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let set: Self = parse_json(text)?;
        if set.version != FORMAT_VERSION {
            return Err(FormatError::Invalid(format!(
                "unsupported version {}",
                set.version
            )));
        }
        if set.entries.is_empty() {
            return Err(FormatError::Invalid("no entries".into()));
        }
        Ok(set)
    }

    pub fn read(path: &Path) -> Result<Self, FormatError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn pairs(&self) -> Vec<PairCorrespondences> {
        self.entries
            .iter()
            .map(|e| PairCorrespondences {
                from_id: e.from_id.clone(),
                to_id: e.to_id.clone(),
                pairs: e
                    .pairs
                    .iter()
                    .map(|p| ([p[0], p[1]], [p[2], p[3]]))
                    .collect(),
            })
            .collect()
    }
}
