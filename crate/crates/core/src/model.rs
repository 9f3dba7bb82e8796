//! Alternatives, criteria and the evaluation matrix.
//!
//! Matrices are read from a small CSV dialect:
//!
//! ```text
//! alternative,c1,c2
//! ISA_1,62,78097
//! ISA_2,90,337983
//! ```
//!
//! The first header cell names the alternative column (its text is not
//! checked), the remaining header cells are criterion ids. Cells are decimal
//! reals with `.` as the only decimal separator. Row and column order is
//! preserved, since downstream rankings break ties by it.
//!
//! Criteria are read from a JSON array of `{id, name, weight, direction, scale}`
//! objects. `direction` has no default.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance on the sum of criterion weights.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: expected {expected} cells, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, column {column} ({criterion}): `{value}` is not a decimal number")]
    BadCell {
        line: u64,
        column: usize,
        criterion: String,
        value: String,
    },
    #[error("cell ({alternative}, {criterion}) is not finite")]
    NonFinite {
        alternative: String,
        criterion: String,
    },
    #[error("duplicate alternative id(s): {}", .0.join(", "))]
    DuplicateAlternative(Vec<String>),
    #[error("duplicate criterion id(s): {}", .0.join(", "))]
    DuplicateCriterion(Vec<String>),
    #[error("empty alternative id at row {0}")]
    EmptyAlternativeId(usize),
    #[error("a matrix needs at least 2 alternatives, found {0}")]
    TooFewAlternatives(usize),
    #[error("a matrix needs at least 1 criterion")]
    NoCriteria,
    #[error("row {row} has {found} values, expected {expected}")]
    Shape {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid criteria: {}", join_violations(.0))]
    Criteria(Vec<CriteriaViolation>),
    #[error("criteria JSON: {0}")]
    Json(#[from] serde_json::Error),
}

fn join_violations(v: &[CriteriaViolation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Alternative {
    pub id: String,
    pub label: String,
}

impl Alternative {
    pub fn new(id: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            label: label.into(),
        }
    }

    /// An alternative whose label is its id.
    pub fn bare(id: impl Into<String>) -> Self {
        let id = id.into();
        Self {
            label: id.clone(),
            id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub id: String,
    pub name: String,
    pub weight: f64,
    pub direction: Direction,
    pub scale: String,
}

impl Criterion {
    pub fn new(id: impl Into<String>, weight: f64, direction: Direction) -> Self {
        let id = id.into();
        Self {
            name: id.clone(),
            id,
            weight,
            direction,
            scale: String::new(),
        }
    }
}

/// A broken invariant of a criteria set.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CriteriaViolation {
    Empty,
    EmptyId,
    DuplicateId { id: String },
    WeightOutOfRange { id: String, weight: f64 },
    WeightSum { sum: f64 },
}

impl fmt::Display for CriteriaViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Empty => f.write_str("no criteria"),
            Self::EmptyId => f.write_str("criterion with empty id"),
            Self::DuplicateId { id } => write!(f, "duplicate criterion id {id}"),
            Self::WeightOutOfRange { id, weight } => {
                write!(f, "weight of {id} is {weight}, outside [0, 1]")
            }
            Self::WeightSum { sum } => write!(f, "weights sum to {sum} ≠ 1"),
        }
    }
}

/// Checks weight range, id uniqueness and sum-to-one. Returns every
/// violation found; an empty list means the set is valid.
pub fn validate_criteria(criteria: &[Criterion]) -> Vec<CriteriaViolation> {
    let mut out = Vec::new();
    if criteria.is_empty() {
        out.push(CriteriaViolation::Empty);
        return out;
    }
    let mut seen = HashSet::new();
    for c in criteria {
        if c.id.is_empty() {
            out.push(CriteriaViolation::EmptyId);
        } else if !seen.insert(c.id.as_str()) {
            out.push(CriteriaViolation::DuplicateId { id: c.id.clone() });
        }
        // NaN fails both comparisons and lands here too.
        if !(0.0..=1.0).contains(&c.weight) {
            out.push(CriteriaViolation::WeightOutOfRange {
                id: c.id.clone(),
                weight: c.weight,
            });
        }
    }
    let sum: f64 = criteria.iter().map(|c| c.weight).sum();
    if sum.is_nan() || (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
        out.push(CriteriaViolation::WeightSum { sum });
    }
    out
}

/// Parses and validates a criteria JSON document.
pub fn load_criteria(source: &str) -> Result<Vec<Criterion>, ModelError> {
    let criteria: Vec<Criterion> = serde_json::from_str(source)?;
    let violations = validate_criteria(&criteria);
    if violations.is_empty() {
        Ok(criteria)
    } else {
        Err(ModelError::Criteria(violations))
    }
}

/// Dense alternatives × criteria table of finite reals.
///
/// Columns are identified by criterion id only; weights and directions are
/// supplied separately so one matrix can be scored under many criteria sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct EvaluationMatrix {
    alternatives: Vec<Alternative>,
    columns: Vec<String>,
    values: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    alternatives: Vec<Alternative>,
    columns: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl TryFrom<RawMatrix> for EvaluationMatrix {
    type Error = ModelError;

    fn try_from(raw: RawMatrix) -> Result<Self, Self::Error> {
        EvaluationMatrix::new(raw.alternatives, raw.columns, raw.values)
    }
}

impl From<EvaluationMatrix> for RawMatrix {
    fn from(m: EvaluationMatrix) -> Self {
        RawMatrix {
            alternatives: m.alternatives,
            columns: m.columns,
            values: m.values,
        }
    }
}

impl EvaluationMatrix {
    pub fn new(
        alternatives: Vec<Alternative>,
        columns: Vec<String>,
        values: Vec<Vec<f64>>,
    ) -> Result<Self, ModelError> {
        if alternatives.len() < 2 {
            return Err(ModelError::TooFewAlternatives(alternatives.len()));
        }
        if columns.is_empty() {
            return Err(ModelError::NoCriteria);
        }
        if let Some(i) = alternatives.iter().position(|a| a.id.is_empty()) {
            return Err(ModelError::EmptyAlternativeId(i));
        }
        let dups = duplicates(alternatives.iter().map(|a| a.id.as_str()));
        if !dups.is_empty() {
            return Err(ModelError::DuplicateAlternative(dups));
        }
        let dups = duplicates(columns.iter().map(String::as_str));
        if !dups.is_empty() {
            return Err(ModelError::DuplicateCriterion(dups));
        }
        if values.len() != alternatives.len() {
            return Err(ModelError::Shape {
                row: values.len(),
                expected: alternatives.len(),
                found: values.len(),
            });
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != columns.len() {
                return Err(ModelError::Shape {
                    row: i,
                    expected: columns.len(),
                    found: row.len(),
                });
            }
            if let Some(j) = row.iter().position(|v| !v.is_finite()) {
                return Err(ModelError::NonFinite {
                    alternative: alternatives[i].id.clone(),
                    criterion: columns[j].clone(),
                });
            }
        }
        Ok(Self {
            alternatives,
            columns,
            values,
        })
    }

    pub fn alternatives(&self) -> &[Alternative] {
        &self.alternatives
    }

    pub fn alternative_ids(&self) -> impl Iterator<Item = &str> {
        self.alternatives.iter().map(|a| a.id.as_str())
    }

    /// Criterion ids, in column order.
    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, alternative: usize, criterion: usize) -> f64 {
        self.values[alternative][criterion]
    }

    pub fn column(&self, criterion: usize) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(move |row| row[criterion])
    }

    pub fn column_index(&self, id: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == id)
    }

    pub fn alternative_index(&self, id: &str) -> Option<usize> {
        self.alternatives.iter().position(|a| a.id == id)
    }

    /// Same shape and labels, new cells. Used by transforms such as
    /// normalization; `values` must keep the shape.
    pub(crate) fn with_values(&self, values: Vec<Vec<f64>>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            alternatives: self.alternatives.clone(),
            columns: self.columns.clone(),
            values,
        }
    }

    /// Returns a copy with alternative labels replaced, matched by id.
    /// Ids missing from `labels` keep their current label.
    pub fn relabel(mut self, labels: &[Alternative]) -> Self {
        for a in &mut self.alternatives {
            if let Some(l) = labels.iter().find(|l| l.id == a.id) {
                a.label = l.label.clone();
            }
        }
        self
    }

    /// Writes the matrix in the same CSV dialect `load_matrix` reads.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("alternative");
        for c in &self.columns {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (alt, row) in self.alternatives.iter().zip(&self.values) {
            out.push_str(&alt.id);
            for v in row {
                out.push(',');
                // `Display` for f64 is the shortest string that round-trips.
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
        out
    }
}

fn duplicates<'a>(ids: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut dups: Vec<String> = Vec::new();
    for id in ids {
        if !seen.insert(id) && !dups.iter().any(|d| d == id) {
            dups.push(id.to_string());
        }
    }
    dups
}

fn parse_cell(raw: &str) -> Option<f64> {
    let ok = !raw.is_empty()
        && raw
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E'));
    if ok {
        raw.parse().ok()
    } else {
        None
    }
}

/// Parses matrix CSV text into a validated [`EvaluationMatrix`].
pub fn load_matrix(source: &str) -> Result<EvaluationMatrix, ModelError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(source.as_bytes());

    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.map_err(csv_error)?,
        None => {
            return Err(ModelError::Parse {
                line: 1,
                message: "missing header row".into(),
            })
        }
    };
    let columns: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let width = header.len();

    let mut alternatives = Vec::new();
    let mut values = Vec::new();
    for record in records {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != width {
            return Err(ModelError::RaggedRow {
                line,
                expected: width,
                found: record.len(),
            });
        }
        let mut row = Vec::with_capacity(columns.len());
        for (j, raw) in record.iter().enumerate().skip(1) {
            let v = parse_cell(raw).ok_or_else(|| ModelError::BadCell {
                line,
                column: j + 1,
                criterion: columns[j - 1].clone(),
                value: raw.to_string(),
            })?;
            row.push(v);
        }
        alternatives.push(Alternative::bare(&record[0]));
        values.push(row);
    }
    EvaluationMatrix::new(alternatives, columns, values)
}

fn csv_error(e: csv::Error) -> ModelError {
    let line = e.position().map_or(0, |p| p.line());
    ModelError::Parse {
        line,
        message: e.to_string(),
    }
}
