//! Weighted-sum scoring of an evaluation matrix.
//!
//! Each column is min-max normalized according to its criterion direction,
//! then alternatives are scored by the weighted sum of their normalized
//! cells. Sorting the scores (ties broken by matrix row order) gives a
//! strict ranking that can be cast as a ballot.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate_criteria, CriteriaViolation, Criterion, Direction, EvaluationMatrix};
use crate::ranking::Ranking;
use crate::scores::ScoreMap;

/// Descriptor recorded on every score vector produced here.
pub const METHOD: &str = "saw/min-max";

#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error("matrix column {0} has no criterion")]
    UnmatchedColumn(String),
    #[error("criterion {0} has no matrix column")]
    UnmatchedCriterion(String),
    #[error("invalid weights: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidWeights(Vec<CriteriaViolation>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub method: String,
    pub scores: ScoreMap,
}

/// Exported form of a scoring run: `{method, scores, ranking}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub method: String,
    pub scores: ScoreMap,
    pub ranking: Ranking,
}

fn direction_of(criteria: &[Criterion], column: &str) -> Result<Direction, ScoringError> {
    criteria
        .iter()
        .find(|c| c.id == column)
        .map(|c| c.direction)
        .ok_or_else(|| ScoringError::UnmatchedColumn(column.to_string()))
}

/// Min-max normalizes every column into `[0, 1]`.
///
/// Maximize columns map the column minimum to 0 and the maximum to 1;
/// minimize columns the reverse. A constant column maps to 0 everywhere.
pub fn normalize(
    matrix: &EvaluationMatrix,
    criteria: &[Criterion],
) -> Result<EvaluationMatrix, ScoringError> {
    let ncols = matrix.columns().len();
    let mut out: Vec<Vec<f64>> = matrix.rows().to_vec();
    for (j, id) in matrix.columns().iter().enumerate() {
        let direction = direction_of(criteria, id)?;
        let (lo, hi) = matrix
            .column(j)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
        let span = hi - lo;
        for row in out.iter_mut() {
            let v = row[j];
            row[j] = if span == 0.0 {
                0.0
            } else {
                let t = match direction {
                    Direction::Maximize => (v - lo) / span,
                    Direction::Minimize => (hi - v) / span,
                };
                t.clamp(0.0, 1.0)
            };
        }
    }
    debug_assert!(out.iter().all(|r| r.len() == ncols));
    Ok(matrix.with_values(out))
}

/// `score(a) = Σ_c weight(c) · normalized(a, c)`.
///
/// The criteria must cover exactly the matrix columns (any order) and pass
/// [`validate_criteria`].
pub fn weighted_score(
    normalized: &EvaluationMatrix,
    criteria: &[Criterion],
) -> Result<ScoreVector, ScoringError> {
    let violations = validate_criteria(criteria);
    if !violations.is_empty() {
        return Err(ScoringError::InvalidWeights(violations));
    }
    if let Some(c) = criteria
        .iter()
        .find(|c| normalized.column_index(&c.id).is_none())
    {
        return Err(ScoringError::UnmatchedCriterion(c.id.clone()));
    }
    let weights = normalized
        .columns()
        .iter()
        .map(|id| {
            criteria
                .iter()
                .find(|c| &c.id == id)
                .map(|c| c.weight)
                .ok_or_else(|| ScoringError::UnmatchedColumn(id.clone()))
        })
        .collect::<Result<Vec<f64>, _>>()?;

    let scores = normalized
        .alternatives()
        .iter()
        .zip(normalized.rows())
        .map(|(alt, row)| {
            let s: f64 = row.iter().zip(&weights).map(|(v, w)| w * v).sum();
            // weights may sum to 1 ± 1e-9
            (alt.id.clone(), s.clamp(0.0, 1.0))
        })
        .collect();
    Ok(ScoreVector {
        method: METHOD.to_string(),
        scores,
    })
}

/// Sorts `alternatives` by descending score. Exact ties keep the order of
/// `alternatives`. An alternative without a score sorts last.
pub fn derive_ranking<'a, I>(scores: &ScoreVector, alternatives: I) -> Ranking
where
    I: IntoIterator<Item = &'a str>,
{
    let mut keyed: Vec<(&str, f64)> = alternatives
        .into_iter()
        .map(|id| (id, scores.scores.get(id).unwrap_or(f64::NEG_INFINITY)))
        .collect();
    // stable sort: equal scores keep input order
    keyed.sort_by(|a, b| b.1.total_cmp(&a.1));
    Ranking::new(keyed.into_iter().map(|(id, _)| id))
}

/// Normalize, score and rank in one step.
pub fn score_matrix(
    matrix: &EvaluationMatrix,
    criteria: &[Criterion],
) -> Result<ScoreReport, ScoringError> {
    let normalized = normalize(matrix, criteria)?;
    let scores = weighted_score(&normalized, criteria)?;
    let ranking = derive_ranking(&scores, matrix.alternative_ids());
    Ok(ScoreReport {
        method: scores.method,
        scores: scores.scores,
        ranking,
    })
}
