//! The group-decision session state machine.
//!
//! A session moves through `setup → balloting → results → closed`, one
//! step at a time. Participants are enrolled during setup, decision makers
//! submit (and may replace) ballots during balloting, and closing the
//! ballot box computes and freezes both Borda and Condorcet results.
//!
//! Everything here is pure: callers pass the current time in and persist
//! the session themselves (see [`crate::service`]).

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    validate_criteria, Alternative, CriteriaViolation, Criterion, EvaluationMatrix,
};
use crate::ranking::{PermutationError, Ranking};
use crate::scoring::{self, ScoreReport, ScoringError};
use crate::voting::{self, Ballot, Method, PairwiseMatrix, Profile, VoteResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Setup,
    Balloting,
    Results,
    Closed,
}

impl Phase {
    pub fn next(self) -> Option<Phase> {
        match self {
            Phase::Setup => Some(Phase::Balloting),
            Phase::Balloting => Some(Phase::Results),
            Phase::Results => Some(Phase::Closed),
            Phase::Closed => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Setup => "setup",
            Phase::Balloting => "balloting",
            Phase::Results => "results",
            Phase::Closed => "closed",
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Facilitator,
    DecisionMaker,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Participant {
    pub id: String,
    pub display_name: String,
    pub role: Role,
    /// Bearer token issued at enrollment. Never exposed through views.
    pub token: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseChange {
    pub phase: Phase,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    #[error("session {0} not found")]
    NotFound(String),
    #[error("a session needs at least 2 alternatives, got {0}")]
    TooFewAlternatives(usize),
    #[error("{0}")]
    Validation(String),
    #[error("operation requires phase {expected}, session is in {actual}")]
    WrongPhase { expected: String, actual: Phase },
    #[error("cannot move from {from} to {to}")]
    InvalidTransition { from: Phase, to: Phase },
    #[error("cannot close balloting with no ballots")]
    NoBallots,
    #[error("participant {0} already enrolled")]
    DuplicateParticipant(String),
    #[error("session already has a facilitator")]
    SecondFacilitator,
    #[error("unknown participant {0}")]
    UnknownParticipant(String),
    #[error("the facilitator does not vote")]
    FacilitatorCannotVote,
    #[error("malformed ballot: {0}")]
    MalformedBallot(PermutationError),
    #[error("session has no evaluation matrix")]
    NoMatrix,
    #[error("unknown criterion {0}")]
    UnknownCriterion(String),
    #[error("invalid weights: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidWeights(Vec<CriteriaViolation>),
    #[error("unknown method {0}")]
    UnknownMethod(String),
    #[error("{0}")]
    Forbidden(String),
    #[error("storage: {0}")]
    Storage(String),
}

impl SessionError {
    /// Stable machine-readable code, used in API error bodies.
    pub fn code(&self) -> &'static str {
        match self {
            Self::NotFound(_) => "session_not_found",
            Self::TooFewAlternatives(_) => "too_few_alternatives",
            Self::Validation(_) => "validation_error",
            Self::WrongPhase { .. } => "wrong_phase",
            Self::InvalidTransition { .. } => "invalid_transition",
            Self::NoBallots => "no_ballots",
            Self::DuplicateParticipant(_) => "duplicate_participant",
            Self::SecondFacilitator | Self::FacilitatorCannotVote => "role_error",
            Self::UnknownParticipant(_) => "unknown_participant",
            Self::MalformedBallot(_) => "malformed_ballot",
            Self::NoMatrix => "no_matrix",
            Self::UnknownCriterion(_) => "unknown_criterion",
            Self::InvalidWeights(_) => "invalid_weights",
            Self::UnknownMethod(_) => "unknown_method",
            Self::Forbidden(_) => "forbidden",
            Self::Storage(_) => "storage_error",
        }
    }
}

/// Facilitator-supplied session definition.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionSpec {
    /// May be omitted when a matrix is given; the matrix rows are used.
    #[serde(default)]
    pub alternatives: Option<Vec<Alternative>>,
    #[serde(default)]
    pub criteria: Option<Vec<Criterion>>,
    #[serde(default)]
    pub matrix: Option<EvaluationMatrix>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewParticipant {
    pub id: String,
    #[serde(default)]
    pub display_name: Option<String>,
    #[serde(default = "default_role")]
    pub role: Role,
}

fn default_role() -> Role {
    Role::DecisionMaker
}

impl NewParticipant {
    pub fn decision_maker(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            display_name: None,
            role: Role::DecisionMaker,
        }
    }

    pub fn facilitator(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            display_name: None,
            role: Role::Facilitator,
        }
    }

    fn into_participant(self, token: String) -> Participant {
        Participant {
            display_name: self.display_name.unwrap_or_else(|| self.id.clone()),
            id: self.id,
            role: self.role,
            token,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub schema: u32,
    pub id: String,
    pub phase: Phase,
    pub alternatives: Vec<Alternative>,
    pub criteria: Option<Vec<Criterion>>,
    pub matrix: Option<EvaluationMatrix>,
    pub participants: Vec<Participant>,
    pub ballots: BTreeMap<String, Ballot>,
    pub results: BTreeMap<Method, VoteResult>,
    pub pairwise: Option<PairwiseMatrix>,
    pub history: Vec<PhaseChange>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}

fn validation(e: impl fmt::Display) -> SessionError {
    SessionError::Validation(e.to_string())
}

impl Session {
    pub fn create(
        id: impl Into<String>,
        spec: SessionSpec,
        facilitator: NewParticipant,
        facilitator_token: String,
        now: DateTime<Utc>,
    ) -> Result<Self, SessionError> {
        if facilitator.role != Role::Facilitator {
            return Err(validation("session creator must have the facilitator role"));
        }
        if facilitator.id.is_empty() {
            return Err(validation("participant id must not be empty"));
        }
        let SessionSpec {
            alternatives,
            criteria,
            matrix,
        } = spec;
        let alternatives = match (alternatives, &matrix) {
            (Some(a), _) => a,
            (None, Some(m)) => m.alternatives().to_vec(),
            (None, None) => Vec::new(),
        };
        if alternatives.len() < 2 {
            return Err(SessionError::TooFewAlternatives(alternatives.len()));
        }
        let ids: Vec<&str> = alternatives.iter().map(|a| a.id.as_str()).collect();
        if ids.iter().any(|id| id.is_empty()) {
            return Err(validation("alternative id must not be empty"));
        }
        for (i, id) in ids.iter().enumerate() {
            if ids[..i].contains(id) {
                return Err(validation(format!("duplicate alternative id {id}")));
            }
        }

        let matrix = match (&criteria, matrix) {
            (None, None) => None,
            (Some(_), None) => return Err(validation("criteria given without a matrix")),
            (None, Some(_)) => return Err(validation("matrix given without criteria")),
            (Some(c), Some(m)) => {
                let violations = validate_criteria(c);
                if !violations.is_empty() {
                    return Err(SessionError::InvalidWeights(violations));
                }
                if !m.alternative_ids().eq(ids.iter().copied()) {
                    return Err(validation(
                        "matrix rows must list the session alternatives in the same order",
                    ));
                }
                // Checks that criteria and columns match one to one.
                scoring::score_matrix(&m, c).map_err(validation)?;
                Some(m.relabel(&alternatives))
            }
        };

        Ok(Self {
            schema: SCHEMA_VERSION,
            id: id.into(),
            phase: Phase::Setup,
            alternatives,
            criteria,
            matrix,
            participants: vec![facilitator.into_participant(facilitator_token)],
            ballots: BTreeMap::new(),
            results: BTreeMap::new(),
            pairwise: None,
            history: vec![PhaseChange {
                phase: Phase::Setup,
                at: now,
            }],
            created_at: now,
            updated_at: now,
        })
    }

    /// A fresh session in setup with the same alternatives, criteria,
    /// matrix and participants (tokens included), and no ballots.
    pub fn rerun(&self, id: impl Into<String>, now: DateTime<Utc>) -> Self {
        Self {
            schema: SCHEMA_VERSION,
            id: id.into(),
            phase: Phase::Setup,
            alternatives: self.alternatives.clone(),
            criteria: self.criteria.clone(),
            matrix: self.matrix.clone(),
            participants: self.participants.clone(),
            ballots: BTreeMap::new(),
            results: BTreeMap::new(),
            pairwise: None,
            history: vec![PhaseChange {
                phase: Phase::Setup,
                at: now,
            }],
            created_at: now,
            updated_at: now,
        }
    }

    fn touch(&mut self, now: DateTime<Utc>) {
        self.updated_at = self.updated_at.max(now);
    }

    fn require_phase(&self, expected: Phase) -> Result<(), SessionError> {
        if self.phase == expected {
            Ok(())
        } else {
            Err(SessionError::WrongPhase {
                expected: expected.to_string(),
                actual: self.phase,
            })
        }
    }

    pub fn alternative_ids(&self) -> impl Iterator<Item = &str> {
        self.alternatives.iter().map(|a| a.id.as_str())
    }

    pub fn participant(&self, id: &str) -> Option<&Participant> {
        self.participants.iter().find(|p| p.id == id)
    }

    pub fn facilitator(&self) -> &Participant {
        self.participants
            .iter()
            .find(|p| p.role == Role::Facilitator)
            .expect("session always has a facilitator")
    }

    /// The participant holding `token`, if any.
    pub fn caller(&self, token: Option<&str>) -> Option<&Participant> {
        let token = token?;
        self.participants.iter().find(|p| p.token == token)
    }

    pub fn is_facilitator(&self, token: Option<&str>) -> bool {
        self.caller(token)
            .is_some_and(|p| p.role == Role::Facilitator)
    }

    pub fn add_participant(
        &mut self,
        participant: NewParticipant,
        token: String,
        now: DateTime<Utc>,
    ) -> Result<&Participant, SessionError> {
        self.require_phase(Phase::Setup)?;
        if participant.id.is_empty() {
            return Err(validation("participant id must not be empty"));
        }
        if self.participant(&participant.id).is_some() {
            return Err(SessionError::DuplicateParticipant(participant.id));
        }
        if participant.role == Role::Facilitator {
            return Err(SessionError::SecondFacilitator);
        }
        self.participants.push(participant.into_participant(token));
        self.touch(now);
        Ok(self.participants.last().unwrap())
    }

    /// Moves to `to`, which must be the immediate successor of the current
    /// phase. Entering `results` tallies the ballots with every method.
    pub fn advance(&mut self, to: Phase, now: DateTime<Utc>) -> Result<(), SessionError> {
        if self.phase.next() != Some(to) {
            return Err(SessionError::InvalidTransition {
                from: self.phase,
                to,
            });
        }
        if to == Phase::Results {
            let (results, pairwise) = self.tally()?;
            self.results = results;
            self.pairwise = Some(pairwise);
        }
        self.phase = to;
        self.history.push(PhaseChange { phase: to, at: now });
        self.touch(now);
        Ok(())
    }

    pub fn open_balloting(&mut self, now: DateTime<Utc>) -> Result<(), SessionError> {
        self.advance(Phase::Balloting, now)
    }

    pub fn close_balloting(&mut self, now: DateTime<Utc>) -> Result<(), SessionError> {
        self.advance(Phase::Results, now)
    }

    pub fn close(&mut self, now: DateTime<Utc>) -> Result<(), SessionError> {
        self.advance(Phase::Closed, now)
    }

    /// Stores (or replaces) a decision maker's ballot.
    pub fn submit_ballot(
        &mut self,
        participant: &str,
        ranking: Ranking,
        now: DateTime<Utc>,
    ) -> Result<(), SessionError> {
        self.require_phase(Phase::Balloting)?;
        let p = self
            .participant(participant)
            .ok_or_else(|| SessionError::UnknownParticipant(participant.to_string()))?;
        if p.role == Role::Facilitator {
            return Err(SessionError::FacilitatorCannotVote);
        }
        ranking
            .check_permutation(self.alternative_ids())
            .map_err(SessionError::MalformedBallot)?;
        self.ballots
            .insert(participant.to_string(), Ballot::new(participant, ranking));
        self.touch(now);
        Ok(())
    }

    /// Builds the voting profile from the stored ballots, in session
    /// alternative order.
    pub fn profile(&self) -> Result<Profile, SessionError> {
        if self.ballots.is_empty() {
            return Err(SessionError::NoBallots);
        }
        Profile::new(
            self.alternative_ids(),
            self.ballots.values().cloned().collect(),
        )
        .map_err(validation)
    }

    /// Recomputes every method's result from the stored ballots.
    pub fn tally(&self) -> Result<(BTreeMap<Method, VoteResult>, PairwiseMatrix), SessionError> {
        let profile = self.profile()?;
        let results = Method::ALL
            .iter()
            .map(|&m| (m, voting::result(&profile, m)))
            .collect();
        Ok((results, voting::pairwise_matrix(&profile)))
    }

    /// Ranks the session matrix under personal weights. Criteria keep their
    /// directions; criteria missing from `weights` get weight 0.
    pub fn suggest_ballot(
        &self,
        weights: &BTreeMap<String, f64>,
    ) -> Result<ScoreReport, SessionError> {
        let (Some(criteria), Some(matrix)) = (&self.criteria, &self.matrix) else {
            return Err(SessionError::NoMatrix);
        };
        if let Some(id) = weights
            .keys()
            .find(|id| !criteria.iter().any(|c| &c.id == *id))
        {
            return Err(SessionError::UnknownCriterion(id.clone()));
        }
        let personal: Vec<Criterion> = criteria
            .iter()
            .map(|c| Criterion {
                weight: weights.get(&c.id).copied().unwrap_or(0.0),
                ..c.clone()
            })
            .collect();
        scoring::score_matrix(matrix, &personal).map_err(|e| match e {
            ScoringError::InvalidWeights(v) => SessionError::InvalidWeights(v),
            other => validation(other),
        })
    }

    pub fn result(&self, method: Method) -> Result<&VoteResult, SessionError> {
        if self.phase < Phase::Results {
            return Err(SessionError::WrongPhase {
                expected: "results or closed".into(),
                actual: self.phase,
            });
        }
        self.results
            .get(&method)
            .ok_or_else(|| SessionError::UnknownMethod(method.to_string()))
    }

    pub fn pairwise(&self) -> Result<&PairwiseMatrix, SessionError> {
        if self.phase < Phase::Results {
            return Err(SessionError::WrongPhase {
                expected: "results or closed".into(),
                actual: self.phase,
            });
        }
        self.pairwise.as_ref().ok_or(SessionError::NoBallots)
    }

    /// Client-facing projection. Tokens are never included; individual
    /// ballots only when `reveal_ballots` is set (the facilitator's view).
    pub fn view(&self, reveal_ballots: bool) -> SessionView {
        SessionView {
            id: self.id.clone(),
            phase: self.phase,
            alternatives: self.alternatives.clone(),
            criteria: self.criteria.clone(),
            matrix: self.matrix.clone(),
            participants: self
                .participants
                .iter()
                .map(|p| ParticipantView {
                    id: p.id.clone(),
                    display_name: p.display_name.clone(),
                    role: p.role,
                    has_voted: self.ballots.contains_key(&p.id),
                })
                .collect(),
            ballot_count: self.ballots.len(),
            ballots: reveal_ballots.then(|| self.ballots.values().cloned().collect()),
            results: self.results.clone(),
            created_at: self.created_at,
            updated_at: self.updated_at,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticipantView {
    pub id: String,
    pub display_name: String,
    pub role: Role,
    pub has_voted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionView {
    pub id: String,
    pub phase: Phase,
    pub alternatives: Vec<Alternative>,
    pub criteria: Option<Vec<Criterion>>,
    pub matrix: Option<EvaluationMatrix>,
    pub participants: Vec<ParticipantView>,
    pub ballot_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ballots: Option<Vec<Ballot>>,
    pub results: BTreeMap<Method, VoteResult>,
    pub created_at: DateTime<Utc>,
    pub updated_at: DateTime<Utc>,
}
