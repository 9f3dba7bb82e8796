//! End-to-end walkthrough on the shipped ISA dataset.
//!
//! Builds an in-memory session over the 24 Integrated Security Areas,
//! enrolls three decision makers, has each cast the ballot their weight
//! preset produces on the evaluation matrix, closes balloting and reports
//! the top of both classifications.

use std::collections::BTreeMap;

use chrono::{TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::{
    load_criteria, load_matrix, Alternative, Criterion, EvaluationMatrix, ModelError,
};
use crate::ranking::Ranking;
use crate::service::{FixedClock, SessionService};
use crate::session::{NewParticipant, Phase, Session, SessionError, SessionSpec};
use crate::store::MemoryStore;
use crate::voting::{Method, VoteResult};

pub const ISA_MATRIX_CSV: &str = include_str!("../../../data/isa_matrix.csv");
pub const ISA_CRITERIA_JSON: &str = include_str!("../../../data/isa_criteria.json");

pub const TABLE_HEADER: &str = "Integrated Security Area | Final Classification";

/// The shipped ISA matrix and criteria.
pub fn isa_dataset() -> Result<(EvaluationMatrix, Vec<Criterion>), ModelError> {
    Ok((
        load_matrix(ISA_MATRIX_CSV)?,
        load_criteria(ISA_CRITERIA_JSON)?,
    ))
}

/// `ISA_2` → `AIS 02`. Other ids are returned unchanged.
pub fn isa_label(id: &str) -> String {
    match id.strip_prefix("ISA_").and_then(|n| n.parse::<u32>().ok()) {
        Some(n) => format!("AIS {n:02}"),
        None => id.to_string(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightPreset {
    pub name: String,
    pub weights: BTreeMap<String, f64>,
}

fn preset(name: &str, w: [f64; 6]) -> WeightPreset {
    WeightPreset {
        name: name.to_string(),
        weights: ["c1", "c2", "c3", "c4", "c5", "c6"]
            .iter()
            .map(|c| c.to_string())
            .zip(w)
            .collect(),
    }
}

/// One preset per decision maker. The first uses the criteria file's own
/// weights; the other two lean towards crime counts and towards population
/// and perceived risk.
pub fn default_presets(criteria: &[Criterion]) -> Vec<WeightPreset> {
    vec![
        WeightPreset {
            name: "criteria weights".into(),
            weights: criteria.iter().map(|c| (c.id.clone(), c.weight)).collect(),
        },
        preset("crime focus", [0.40, 0.10, 0.05, 0.05, 0.25, 0.15]),
        preset("community focus", [0.15, 0.30, 0.10, 0.05, 0.10, 0.30]),
    ]
}

/// Scales every weight by a factor in `[0.5, 1.5)` and renormalizes.
fn jitter(presets: &mut [WeightPreset], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for p in presets {
        for w in p.weights.values_mut() {
            *w *= rng.gen_range(0.5..1.5);
        }
        let total: f64 = p.weights.values().sum();
        for w in p.weights.values_mut() {
            *w /= total;
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct DemoOptions {
    /// Every decision maker casts the criteria-weights ballot.
    pub unanimous: bool,
    /// Perturbs the preset weights; `None` uses them as given.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CastBallot {
    pub voter: String,
    pub preset: WeightPreset,
    pub ranking: Ranking,
}

#[derive(Debug, Clone)]
pub struct DemoOutcome {
    pub session: Session,
    pub ballots: Vec<CastBallot>,
}

impl DemoOutcome {
    pub fn result(&self, method: Method) -> &VoteResult {
        &self.session.results[&method]
    }
}

pub fn run(
    matrix: EvaluationMatrix,
    criteria: Vec<Criterion>,
    options: &DemoOptions,
) -> Result<DemoOutcome, SessionError> {
    let clock = FixedClock(Utc.timestamp_opt(0, 0).unwrap());
    let svc = SessionService::with_clock(MemoryStore::new(), clock);

    let alternatives: Vec<Alternative> = matrix
        .alternatives()
        .iter()
        .map(|a| Alternative::new(&a.id, isa_label(&a.id)))
        .collect();
    let mut presets = default_presets(&criteria);
    if options.unanimous {
        presets = vec![presets[0].clone(); 3];
    }
    if let Some(seed) = options.seed {
        jitter(&mut presets, seed);
    }

    let spec = SessionSpec {
        alternatives: Some(alternatives),
        criteria: Some(criteria),
        matrix: Some(matrix),
    };
    let created = svc.create(spec, NewParticipant::facilitator("facilitator"))?;
    let id = created.session.id.clone();
    let ftok = Some(created.facilitator_token.as_str());

    let mut voters = Vec::new();
    for i in 1..=presets.len() {
        let pid = format!("dm{i}");
        let (_, token) = svc.enroll(&id, ftok, NewParticipant::decision_maker(&pid))?;
        voters.push((pid, token));
    }
    svc.advance(&id, ftok, Phase::Balloting)?;

    let mut ballots = Vec::new();
    for ((pid, token), preset) in voters.iter().zip(presets) {
        let ranking = svc.suggest(&id, &preset.weights)?.ranking;
        svc.submit_ballot(&id, Some(token), pid, ranking.clone())?;
        ballots.push(CastBallot {
            voter: pid.clone(),
            preset,
            ranking,
        });
    }
    let session = svc.advance(&id, ftok, Phase::Results)?;
    Ok(DemoOutcome { session, ballots })
}

fn table(session: &Session, ranking: &Ranking, top: usize) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for (i, id) in ranking.iter().take(top).enumerate() {
        let label = session
            .alternatives
            .iter()
            .find(|a| a.id == id)
            .map_or(id, |a| a.label.as_str());
        out.push_str(&format!("{label} | {}°\n", i + 1));
    }
    out
}

/// Text report with one classification table per method.
pub fn render(outcome: &DemoOutcome, top: usize) -> String {
    let s = &outcome.session;
    let label = |id: &str| {
        s.alternatives
            .iter()
            .find(|a| a.id == id)
            .map_or_else(|| id.to_string(), |a| a.label.clone())
    };
    let borda = outcome.result(Method::Borda);
    let condorcet = outcome.result(Method::Condorcet);
    let winner = condorcet
        .condorcet_winner
        .as_deref()
        .map_or_else(|| "none".to_string(), label);

    let mut out = String::new();
    out.push_str(&format!(
        "{} alternatives, {} decision makers\n\n",
        s.alternatives.len(),
        outcome.ballots.len()
    ));
    out.push_str("Borda count\n");
    out.push_str(&table(s, &borda.ranking, top));
    out.push('\n');
    out.push_str(&format!(
        "Condorcet (Copeland completion), Condorcet winner: {winner}\n"
    ));
    out.push_str(&table(s, &condorcet.ranking, top));
    out
}

#[derive(Debug, Serialize)]
pub struct DemoReport<'a> {
    pub ballots: &'a [CastBallot],
    pub borda: &'a VoteResult,
    pub condorcet: &'a VoteResult,
}

pub fn report(outcome: &DemoOutcome) -> DemoReport<'_> {
    DemoReport {
        ballots: &outcome.ballots,
        borda: outcome.result(Method::Borda),
        condorcet: outcome.result(Method::Condorcet),
    }
}
