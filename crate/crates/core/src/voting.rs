//! Ranked-ballot aggregation.
//!
//! Every ballot is a strict ranking of all alternatives. Two rules are
//! provided:
//!
//! * **Borda**: on each ballot the last alternative earns 1 point, the one
//!   above it 2, and so on up to `n` for the top; points are summed over
//!   ballots and the alternatives sorted by total.
//! * **Condorcet**: alternatives are compared pairwise; one that beats every
//!   other by a strict majority of voters is the Condorcet winner. The full
//!   ranking is completed by Copeland score (pairwise majority wins minus
//!   losses), then Borda points, then the profile's alternative order.
//!
//! Ties that survive every criterion fall back to the profile's alternative
//! order, so results are deterministic.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ranking::{PermutationError, Ranking};
use crate::scores::ScoreMap;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VotingError {
    #[error("profile has no ballots")]
    EmptyProfile,
    #[error("profile has no alternatives")]
    NoAlternatives,
    #[error("duplicate alternative {0}")]
    DuplicateAlternative(String),
    #[error("voter {0} appears more than once")]
    DuplicateVoter(String),
    #[error("ballot of {voter}: {error}")]
    MalformedBallot {
        voter: String,
        error: PermutationError,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Borda,
    Condorcet,
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Borda, Method::Condorcet];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Borda => "borda",
            Method::Condorcet => "condorcet",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
#[error("unknown voting method `{0}` (expected borda or condorcet)")]
pub struct UnknownMethod(pub String);

impl FromStr for Method {
    type Err = UnknownMethod;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "borda" => Ok(Method::Borda),
            "condorcet" => Ok(Method::Condorcet),
            other => Err(UnknownMethod(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ballot {
    pub voter: String,
    pub ranking: Ranking,
}

impl Ballot {
    pub fn new(voter: impl Into<String>, ranking: Ranking) -> Self {
        Self {
            voter: voter.into(),
            ranking,
        }
    }
}

/// A validated set of strict ballots over a common, ordered alternative set.
#[derive(Debug, Clone)]
pub struct Profile {
    alternatives: Vec<String>,
    ballots: Vec<Ballot>,
    // orders[v][k] = index of the alternative ballot v ranks at position k
    orders: Vec<Vec<usize>>,
}

impl Profile {
    pub fn new<I, S>(alternatives: I, ballots: Vec<Ballot>) -> Result<Self, VotingError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let alternatives: Vec<String> = alternatives.into_iter().map(Into::into).collect();
        if alternatives.is_empty() {
            return Err(VotingError::NoAlternatives);
        }
        let mut seen = HashSet::new();
        for a in &alternatives {
            if !seen.insert(a.as_str()) {
                return Err(VotingError::DuplicateAlternative(a.clone()));
            }
        }
        if ballots.is_empty() {
            return Err(VotingError::EmptyProfile);
        }
        let mut voters = HashSet::new();
        let mut orders = Vec::with_capacity(ballots.len());
        for b in &ballots {
            if !voters.insert(b.voter.as_str()) {
                return Err(VotingError::DuplicateVoter(b.voter.clone()));
            }
            b.ranking
                .check_permutation(alternatives.iter().map(String::as_str))
                .map_err(|error| VotingError::MalformedBallot {
                    voter: b.voter.clone(),
                    error,
                })?;
            orders.push(
                b.ranking
                    .iter()
                    .map(|id| alternatives.iter().position(|a| a == id).unwrap())
                    .collect(),
            );
        }
        Ok(Self {
            alternatives,
            ballots,
            orders,
        })
    }

    pub fn alternatives(&self) -> &[String] {
        &self.alternatives
    }

    pub fn ballots(&self) -> &[Ballot] {
        &self.ballots
    }

    pub fn voter_count(&self) -> usize {
        self.ballots.len()
    }

    /// Ballots as alternative indices, best first.
    pub fn orders(&self) -> &[Vec<usize>] {
        &self.orders
    }
}

/// `wins[a][b]` = number of voters ranking `a` strictly above `b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairwiseMatrix {
    pub alternatives: Vec<String>,
    pub wins: Vec<Vec<u32>>,
    pub voter_count: u32,
}

impl PairwiseMatrix {
    pub fn len(&self) -> usize {
        self.alternatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alternatives.is_empty()
    }

    /// True when `a` is preferred to `b` by a strict majority of voters.
    pub fn beats(&self, a: usize, b: usize) -> bool {
        2 * self.wins[a][b] > self.voter_count
    }

    pub fn get(&self, a: &str, b: &str) -> Option<u32> {
        let i = self.alternatives.iter().position(|x| x == a)?;
        let j = self.alternatives.iter().position(|x| x == b)?;
        Some(self.wins[i][j])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteResult {
    pub method: Method,
    /// Borda points, or Copeland scores for the Condorcet method.
    pub scores: ScoreMap,
    pub ranking: Ranking,
    pub condorcet_winner: Option<String>,
    pub has_condorcet_winner: bool,
}

/// Borda points per alternative, aligned with `profile.alternatives()`.
pub fn borda_scores(profile: &Profile) -> Vec<u64> {
    let n = profile.alternatives.len();
    let mut points = vec![0u64; n];
    for order in &profile.orders {
        for (k, &alt) in order.iter().enumerate() {
            points[alt] += (n - k) as u64;
        }
    }
    points
}

/// Indices sorted by descending key; equal keys keep index order.
fn rank_by<K: Ord>(n: usize, key: impl Fn(usize) -> K) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by_key(|&i| std::cmp::Reverse(key(i)));
    idx
}

fn to_ranking(profile: &Profile, order: &[usize]) -> Ranking {
    Ranking::new(order.iter().map(|&i| profile.alternatives[i].as_str()))
}

fn winner_id(profile: &Profile, pw: &PairwiseMatrix) -> Option<String> {
    condorcet_winner_index(pw).map(|i| profile.alternatives[i].clone())
}

/// Ranks by Borda points. The Condorcet fields report the profile's
/// Condorcet winner, if any, for comparison.
pub fn borda_result(profile: &Profile) -> VoteResult {
    let points = borda_scores(profile);
    let order = rank_by(points.len(), |i| points[i]);
    let winner = winner_id(profile, &pairwise_matrix(profile));
    VoteResult {
        method: Method::Borda,
        scores: profile
            .alternatives
            .iter()
            .zip(&points)
            .map(|(a, p)| (a.as_str(), *p as f64))
            .collect(),
        ranking: to_ranking(profile, &order),
        has_condorcet_winner: winner.is_some(),
        condorcet_winner: winner,
    }
}

pub fn pairwise_matrix(profile: &Profile) -> PairwiseMatrix {
    let n = profile.alternatives.len();
    let mut wins = vec![vec![0u32; n]; n];
    let mut pos = vec![0usize; n];
    for order in &profile.orders {
        for (k, &alt) in order.iter().enumerate() {
            pos[alt] = k;
        }
        for a in 0..n {
            for b in 0..n {
                if pos[a] < pos[b] {
                    wins[a][b] += 1;
                }
            }
        }
    }
    PairwiseMatrix {
        alternatives: profile.alternatives.clone(),
        wins,
        voter_count: profile.voter_count() as u32,
    }
}

/// Index of the alternative that beats every other by strict majority.
pub fn condorcet_winner_index(pw: &PairwiseMatrix) -> Option<usize> {
    // Only the alternative that survives a knockout pass can be the winner.
    let n = pw.len();
    let mut candidate = 0;
    for b in 1..n {
        if !pw.beats(candidate, b) {
            candidate = b;
        }
    }
    (0..n)
        .filter(|&b| b != candidate)
        .all(|b| pw.beats(candidate, b))
        .then_some(candidate)
}

pub fn condorcet_winner(pw: &PairwiseMatrix) -> Option<&str> {
    condorcet_winner_index(pw).map(|i| pw.alternatives[i].as_str())
}

/// Copeland score per alternative: strict-majority wins minus losses.
pub fn copeland_scores(pw: &PairwiseMatrix) -> Vec<i64> {
    let n = pw.len();
    (0..n)
        .map(|a| {
            (0..n)
                .filter(|&b| b != a)
                .map(|b| {
                    if pw.beats(a, b) {
                        1
                    } else if pw.beats(b, a) {
                        -1
                    } else {
                        0
                    }
                })
                .sum()
        })
        .collect()
}

/// Condorcet winner plus a Copeland completion of the ranking.
pub fn condorcet_result(profile: &Profile) -> VoteResult {
    let pw = pairwise_matrix(profile);
    let copeland = copeland_scores(&pw);
    let borda = borda_scores(profile);
    let order = rank_by(copeland.len(), |i| (copeland[i], borda[i]));
    let winner = winner_id(profile, &pw);
    debug_assert!(
        winner.is_none() || winner.as_deref() == Some(profile.alternatives[order[0]].as_str())
    );
    VoteResult {
        method: Method::Condorcet,
        scores: profile
            .alternatives
            .iter()
            .zip(&copeland)
            .map(|(a, c)| (a.as_str(), *c as f64))
            .collect(),
        ranking: to_ranking(profile, &order),
        has_condorcet_winner: winner.is_some(),
        condorcet_winner: winner,
    }
}

pub fn result(profile: &Profile, method: Method) -> VoteResult {
    match method {
        Method::Borda => borda_result(profile),
        Method::Condorcet => condorcet_result(profile),
    }
}

/// Ballots file: `{"alternatives": [...]?, "voters": [{"id", "ranking"}]}`.
///
/// `alternatives` fixes the tie-break order; when absent, the first voter's
/// ranking is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallotsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alternatives: Option<Vec<String>>,
    pub voters: Vec<VoterBallot>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoterBallot {
    pub id: String,
    pub ranking: Ranking,
}

impl BallotsFile {
    pub fn into_profile(self) -> Result<Profile, VotingError> {
        let alternatives = match self.alternatives {
            Some(a) => a,
            None => self
                .voters
                .first()
                .map(|v| v.ranking.ordered().to_vec())
                .ok_or(VotingError::EmptyProfile)?,
        };
        let ballots = self
            .voters
            .into_iter()
            .map(|v| Ballot::new(v.id, v.ranking))
            .collect();
        Profile::new(alternatives, ballots)
    }
}
