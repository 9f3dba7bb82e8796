use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A strict total order over alternative ids, best first.
///
/// Serialized as a plain JSON array. Only strict rankings exist at present,
/// so [`Ranking::is_strict`] is always true.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ranking(Vec<String>);

impl Ranking {
    pub fn new<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(ids.into_iter().map(Into::into).collect())
    }

    pub fn ordered(&self) -> &[String] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn is_strict(&self) -> bool {
        true
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn top(&self) -> Option<&str> {
        self.0.first().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.0.iter().position(|x| x == id)
    }

    /// Checks that this ranking is a permutation of `alternatives`.
    pub fn check_permutation<'a, I>(&self, alternatives: I) -> Result<(), PermutationError>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let expected: Vec<&str> = alternatives.into_iter().collect();
        let expected_set: HashSet<&str> = expected.iter().copied().collect();
        let mut seen = HashSet::new();
        let mut err = PermutationError::default();
        for id in &self.0 {
            if !expected_set.contains(id.as_str()) {
                err.unknown.push(id.clone());
            } else if !seen.insert(id.as_str()) && !err.duplicate.contains(id) {
                err.duplicate.push(id.clone());
            }
        }
        err.missing = expected
            .iter()
            .filter(|id| !seen.contains(*id))
            .map(|id| id.to_string())
            .collect();
        if err.is_empty() {
            Ok(())
        } else {
            Err(err)
        }
    }
}

impl From<Vec<String>> for Ranking {
    fn from(v: Vec<String>) -> Self {
        Self(v)
    }
}

/// Why a ranking is not a permutation of the expected alternatives.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PermutationError {
    pub missing: Vec<String>,
    pub duplicate: Vec<String>,
    pub unknown: Vec<String>,
}

impl PermutationError {
    fn is_empty(&self) -> bool {
        self.missing.is_empty() && self.duplicate.is_empty() && self.unknown.is_empty()
    }
}

impl fmt::Display for PermutationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if !self.missing.is_empty() {
            parts.push(format!("missing {}", self.missing.join(", ")));
        }
        if !self.duplicate.is_empty() {
            parts.push(format!("duplicated {}", self.duplicate.join(", ")));
        }
        if !self.unknown.is_empty() {
            parts.push(format!("unknown {}", self.unknown.join(", ")));
        }
        write!(
            f,
            "not a permutation of the alternatives: {}",
            parts.join("; ")
        )
    }
}

impl std::error::Error for PermutationError {}
