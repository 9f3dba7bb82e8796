//! Random command sequences against the session service, with the
//! workflow invariants checked after every step.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicI64, Ordering};

use chrono::{DateTime, TimeZone, Utc};
use consilium::model::Alternative;
use consilium::ranking::Ranking;
use consilium::service::{Clock, SessionService};
use consilium::session::{NewParticipant, Phase, Session, SessionSpec};
use consilium::store::{decode, encode, MemoryStore, SessionStore};
use consilium::voting::{Method, VoteResult};
use proptest::prelude::*;

/// Ticks forward one second per reading, occasionally stepping back to
/// check that `updated_at` still never decreases.
#[derive(Default)]
pub struct JitterClock(AtomicI64);

impl Clock for JitterClock {
    fn now(&self) -> DateTime<Utc> {
        let n = self.0.fetch_add(1, Ordering::Relaxed);
        let back = if n % 5 == 4 { 3 } else { 0 };
        Utc.timestamp_opt(1_700_000_000 + n - back, 0).unwrap()
    }
}

pub const ALTS: [&str; 4] = ["A", "B", "C", "D"];

#[derive(Debug, Clone)]
pub enum Cmd {
    Enroll(u8),
    EnrollFacilitator,
    Advance(Phase),
    Submit { voter: u8, order: Vec<usize> },
    SubmitBroken { voter: u8, order: Vec<usize> },
    SubmitAsFacilitator(Vec<usize>),
    Results(Method),
    Suggest,
}

fn permutation() -> impl Strategy<Value = Vec<usize>> {
    Just((0..ALTS.len()).collect::<Vec<_>>()).prop_shuffle()
}

pub fn cmd() -> impl Strategy<Value = Cmd> {
    let phase = prop::sample::select(vec![
        Phase::Setup,
        Phase::Balloting,
        Phase::Results,
        Phase::Closed,
    ]);
    let method = prop::sample::select(Method::ALL.to_vec());
    prop_oneof![
        3 => (0u8..4).prop_map(Cmd::Enroll),
        1 => Just(Cmd::EnrollFacilitator),
        3 => phase.prop_map(Cmd::Advance),
        6 => ((0u8..5), permutation()).prop_map(|(voter, order)| Cmd::Submit { voter, order }),
        1 => ((0u8..4), prop::collection::vec(0usize..ALTS.len(), 0..6))
            .prop_map(|(voter, order)| Cmd::SubmitBroken { voter, order }),
        1 => permutation().prop_map(Cmd::SubmitAsFacilitator),
        1 => method.prop_map(Cmd::Results),
        1 => Just(Cmd::Suggest),
    ]
}

fn ranking(order: &[usize]) -> Ranking {
    Ranking::new(order.iter().map(|&i| ALTS[i]))
}

/// Runs `cmds` and checks phase monotonicity, ballot validity, results
/// immutability and persistence round-trips after each step. Returns a
/// description of the first violation.
pub fn drive(cmds: &[Cmd]) -> Result<Session, String> {
    let svc = SessionService::with_clock(MemoryStore::new(), JitterClock::default());
    let spec = SessionSpec {
        alternatives: Some(ALTS.map(Alternative::bare).to_vec()),
        ..Default::default()
    };
    let created = svc
        .create(spec, NewParticipant::facilitator("fac"))
        .map_err(|e| e.to_string())?;
    let id = created.session.id.clone();
    let ftok = created.facilitator_token.clone();
    let mut tokens: BTreeMap<u8, String> = BTreeMap::new();

    let mut prev = created.session;
    let mut frozen: Option<BTreeMap<Method, VoteResult>> = None;

    for (step, c) in cmds.iter().enumerate() {
        let before_phase = prev.phase;
        let _: Result<(), String> = match c {
            Cmd::Enroll(i) => svc
                .enroll(
                    &id,
                    Some(&ftok),
                    NewParticipant::decision_maker(format!("dm{i}")),
                )
                .map(|(_, t)| {
                    tokens.insert(*i, t);
                })
                .map_err(|e| e.to_string()),
            Cmd::EnrollFacilitator => {
                match svc.enroll(&id, Some(&ftok), NewParticipant::facilitator("fac2")) {
                    Ok(_) => return Err(format!("step {step}: second facilitator accepted")),
                    Err(e) => Err(e.to_string()),
                }
            }
            Cmd::Advance(to) => {
                let r = svc.advance(&id, Some(&ftok), *to);
                let legal = before_phase.next() == Some(*to)
                    && !(*to == Phase::Results && prev.ballots.is_empty());
                if r.is_ok() != legal {
                    return Err(format!(
                        "step {step}: advance {before_phase}->{to} ok={} expected {legal}",
                        r.is_ok()
                    ));
                }
                r.map(|_| ()).map_err(|e| e.to_string())
            }
            Cmd::Submit { voter, order } => {
                let pid = format!("dm{voter}");
                let tok = tokens.get(voter).cloned().unwrap_or_default();
                let r = svc.submit_ballot(&id, Some(&tok), &pid, ranking(order));
                let legal = before_phase == Phase::Balloting && tokens.contains_key(voter);
                if r.is_ok() != legal {
                    return Err(format!(
                        "step {step}: submit ok={} expected {legal}",
                        r.is_ok()
                    ));
                }
                r.map(|_| ()).map_err(|e| e.to_string())
            }
            Cmd::SubmitBroken { voter, order } => {
                let r = ranking(order);
                let valid = r.check_permutation(ALTS).is_ok();
                let tok = tokens.get(voter).cloned().unwrap_or_default();
                let res = svc.submit_ballot(&id, Some(&tok), &format!("dm{voter}"), r);
                if !valid && res.is_ok() {
                    return Err(format!("step {step}: malformed ballot accepted"));
                }
                res.map(|_| ()).map_err(|e| e.to_string())
            }
            Cmd::SubmitAsFacilitator(order) => {
                match svc.submit_ballot(&id, Some(&ftok), "fac", ranking(order)) {
                    Ok(_) => return Err(format!("step {step}: facilitator ballot accepted")),
                    Err(e) => Err(e.to_string()),
                }
            }
            Cmd::Results(m) => {
                let r = svc.results(&id, *m);
                if r.is_ok() != (before_phase >= Phase::Results) {
                    return Err(format!(
                        "step {step}: results availability wrong in {before_phase}"
                    ));
                }
                r.map(|_| ()).map_err(|e| e.to_string())
            }
            Cmd::Suggest => {
                if svc.suggest(&id, &BTreeMap::new()).is_ok() {
                    return Err(format!("step {step}: suggestion without matrix"));
                }
                Ok(())
            }
        };

        let cur = svc.get(&id).map_err(|e| e.to_string())?;
        if cur.phase < prev.phase {
            return Err(format!(
                "step {step}: phase went back {} -> {}",
                prev.phase, cur.phase
            ));
        }
        if cur.updated_at < prev.updated_at {
            return Err(format!("step {step}: updated_at decreased"));
        }
        if !cur
            .history
            .windows(2)
            .all(|w| w[0].phase.next() == Some(w[1].phase))
        {
            return Err(format!("step {step}: history skips a phase"));
        }
        for b in cur.ballots.values() {
            if b.ranking.check_permutation(ALTS).is_err() {
                return Err(format!("step {step}: stored ballot is not a permutation"));
            }
        }
        if (cur.phase >= Phase::Results) == cur.results.is_empty() {
            return Err(format!("step {step}: results present in {}", cur.phase));
        }
        if cur.phase >= Phase::Results {
            let (recomputed, _) = cur.tally().map_err(|e| e.to_string())?;
            if recomputed != cur.results {
                return Err(format!(
                    "step {step}: stored results differ from recomputation"
                ));
            }
            match &frozen {
                None => frozen = Some(cur.results.clone()),
                Some(f) if f != &cur.results => {
                    return Err(format!("step {step}: results changed after freezing"))
                }
                Some(_) => {}
            }
            if cur.ballots != prev.ballots && prev.phase >= Phase::Results {
                return Err(format!("step {step}: ballots changed after close"));
            }
        }
        let raw = svc.store().raw(&id).ok_or("session not persisted")?;
        let loaded = decode(&id, &raw).map_err(|e| e.to_string())?;
        if loaded != cur || encode(&loaded) != raw {
            return Err(format!("step {step}: persistence round-trip differs"));
        }
        if svc.store().load(&id).map_err(|e| e.to_string())?.as_ref() != Some(&cur) {
            return Err(format!("step {step}: store load differs"));
        }
        prev = cur;
    }
    Ok(prev)
}
