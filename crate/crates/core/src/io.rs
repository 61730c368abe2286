//! JSON file formats for matrices, vectors and reports.
//!
//! Real entries are plain numbers and complex entries are `[re, im]` pairs.
//! Doubles are written in shortest round-trip form, so a matrix survives
//! `write` followed by `parse` bit for bit.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{AnyMatrix, Matrix, Vector};
use crate::scalar::{DomainTag, MaxTimes, NonNeg, Scalar, Semiring};

/// One number in a file: real, or a complex `[re, im]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    pub fn from_scalar(s: Scalar) -> Self {
        match s {
            Scalar::Complex(z) => Entry::Complex([z.re, z.im]),
            Scalar::NonnegReal(x) | Scalar::MaxTimes(x) => Entry::Real(x),
        }
    }

    /// Read the entry as a scalar of `domain`; `at` locates it in messages.
    pub fn to_scalar(self, domain: DomainTag, at: &str) -> Result<Scalar> {
        let s = match (domain, self) {
            (DomainTag::Complex, Entry::Real(x)) => Scalar::Complex(Complex64::new(x, 0.0)),
            (DomainTag::Complex, Entry::Complex([re, im])) => Scalar::Complex(Complex64::new(re, im)),
            (DomainTag::NonnegReal, Entry::Real(x)) => Scalar::NonnegReal(x),
            (DomainTag::MaxTimes, Entry::Real(x)) => Scalar::MaxTimes(x),
            (_, Entry::Complex(_)) => {
                return Err(Error::InvalidInput(format!("{at}: complex entry in a {domain} file")));
            }
        };
        if !s.is_valid() {
            let why = if domain == DomainTag::Complex { "must be finite" } else { "must be finite and nonnegative" };
            return Err(Error::InvalidInput(format!("{at}: {self:?} is not a valid {domain} entry ({why})")));
        }
        Ok(s)
    }

    pub fn typed<S: Semiring>(self, at: &str) -> Result<S> {
        S::try_from_scalar(self.to_scalar(S::DOMAIN, at)?)
    }
}

pub fn entries_of<S: Semiring>(v: &Vector<S>) -> Vec<Entry> {
    v.iter().map(|x| Entry::from_scalar(x.to_scalar())).collect()
}

pub fn vector_from_entries<S: Semiring>(entries: &[Entry]) -> Result<Vector<S>> {
    let xs = entries
        .iter()
        .enumerate()
        .map(|(i, e)| e.typed(&format!("entry {i}")))
        .collect::<Result<Vec<S>>>()?;
    Vector::new(xs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub domain: DomainTag,
    pub matrix: Vec<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl MatrixFile {
    pub fn from_matrix(m: &AnyMatrix, name: Option<String>) -> Self {
        let (r, c) = m.shape();
        let matrix = (0..r).map(|i| (0..c).map(|j| Entry::from_scalar(m.get(i, j))).collect()).collect();
        MatrixFile { domain: m.domain(), matrix, name }
    }

    /// Validate shape and entries.
    pub fn to_matrix(&self) -> Result<AnyMatrix> {
        match self.domain {
            DomainTag::Complex => self.typed::<Complex64>().map(AnyMatrix::from),
            DomainTag::NonnegReal => self.typed::<NonNeg>().map(AnyMatrix::from),
            DomainTag::MaxTimes => self.typed::<MaxTimes>().map(AnyMatrix::from),
        }
    }

    fn typed<S: Semiring>(&self) -> Result<Matrix<S>> {
        let cols = self.matrix.first().map_or(0, Vec::len);
        if cols == 0 {
            return Err(Error::InvalidInput("matrix has no entries".into()));
        }
        let mut rows = Vec::with_capacity(self.matrix.len());
        for (i, row) in self.matrix.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::InvalidInput(format!(
                    "row {i} has {} entries, row 0 has {cols}",
                    row.len()
                )));
            }
            let typed = row
                .iter()
                .enumerate()
                .map(|(j, e)| e.typed(&format!("row {i}, column {j}")))
                .collect::<Result<Vec<S>>>()?;
            rows.push(typed);
        }
        Matrix::from_rows(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VectorFile {
    pub domain: DomainTag,
    pub vector: Vec<Entry>,
}

impl VectorFile {
    pub fn from_vector<S: Semiring>(v: &Vector<S>) -> Self {
        VectorFile { domain: S::DOMAIN, vector: entries_of(v) }
    }

    pub fn to_vector<S: Semiring>(&self) -> Result<Vector<S>> {
        if self.domain != S::DOMAIN {
            return Err(Error::DomainMismatch { left: S::DOMAIN, right: self.domain });
        }
        vector_from_entries(&self.vector)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json(value)).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn parse_matrix_str(text: &str) -> Result<AnyMatrix> {
    let file: MatrixFile = serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))?;
    file.to_matrix()
}

pub fn parse_matrix_file(path: impl AsRef<Path>) -> Result<AnyMatrix> {
    let path = path.as_ref();
    let file: MatrixFile = read_json(path)?;
    file.to_matrix().map_err(|e| match e {
        Error::InvalidInput(msg) => Error::InvalidInput(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_matrix_file(path: impl AsRef<Path>, m: &AnyMatrix, name: Option<String>) -> Result<()> {
    write_json(path.as_ref(), &MatrixFile::from_matrix(m, name))
}

pub fn parse_vector_file(path: impl AsRef<Path>) -> Result<VectorFile> {
    read_json(path.as_ref())
}

pub fn write_vector_file<S: Semiring>(path: impl AsRef<Path>, v: &Vector<S>) -> Result<()> {
    write_json(path.as_ref(), &VectorFile::from_vector(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    /// Nothing found within the configured bounds.
    NoResult,
    InvalidInput,
    /// `verify` found the report inconsistent with the matrices.
    Rejected,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::NoResult | Status::Rejected => 1,
            Status::InvalidInput => 2,
        }
    }
}

/// An eigenvalue with one eigenvector witnessing it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub lambda: Entry,
    pub vector: Vec<Entry>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureStats {
    pub elements: usize,
    pub truncated: bool,
    /// Longest shortest word.
    pub depth: usize,
    /// `|S^(k)|` for `k = 1, 2, ...`.
    pub layer_sizes: Vec<usize>,
}

/// Settings a report was produced with, kept so it can be rechecked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub closure_cap: usize,
    pub word_cap: usize,
    pub quasi_bound: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub command: String,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainTag>,
    pub options: RunOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambdas: Vec<Entry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residuals: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spectrum: Vec<SpectrumEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closure: Option<ClosureStats>,
    /// The vector that was projected, for `project` reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_vector: Option<Vec<Entry>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pathway: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ReportFile {
    pub fn new(command: &str, status: Status, options: RunOptions) -> Self {
        ReportFile {
            command: command.to_string(),
            status,
            domain: None,
            options,
            classification: None,
            vector: None,
            lambdas: Vec::new(),
            residuals: Vec::new(),
            spectrum: Vec::new(),
            closure: None,
            input_vector: None,
            pathway: Vec::new(),
            warnings: Vec::new(),
            error: None,
        }
    }

    /// `ok` must come with every residual within the tolerance.
    pub fn is_consistent(&self) -> bool {
        self.status != Status::Ok
            || (self.residuals.iter().all(|&r| r <= self.options.tol)
                && self.spectrum.iter().all(|s| s.residual <= self.options.tol))
    }
}

pub fn parse_report_file(path: impl AsRef<Path>) -> Result<ReportFile> {
    read_json(path.as_ref())
}

pub fn parse_report_str(text: &str) -> Result<ReportFile> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(e.to_string()))
}
