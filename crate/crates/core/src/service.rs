//! Session commands with access control and persistence.
//!
//! Commands against one session are serialized through a per-session lock;
//! commands against different sessions run independently. A mutation is
//! applied to a copy, persisted, and only then published, so a failed write
//! leaves the in-memory session untouched.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use chrono::{DateTime, Utc};
use parking_lot::{Mutex, RwLock};

use crate::ranking::Ranking;
use crate::scoring::ScoreReport;
use crate::session::{NewParticipant, Phase, Session, SessionError, SessionSpec};
use crate::store::{is_valid_id, SessionStore, StoreError};
use crate::voting::{Method, PairwiseMatrix, VoteResult};

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

/// Always returns the same instant.
#[derive(Debug, Clone, Copy)]
pub struct FixedClock(pub DateTime<Utc>);

impl Clock for FixedClock {
    fn now(&self) -> DateTime<Utc> {
        self.0
    }
}

impl From<StoreError> for SessionError {
    fn from(e: StoreError) -> Self {
        SessionError::Storage(e.to_string())
    }
}

fn new_token() -> String {
    uuid::Uuid::new_v4().simple().to_string()
}

/// A newly created session with the facilitator's token.
#[derive(Debug, Clone)]
pub struct Created {
    pub session: Session,
    pub facilitator_token: String,
}

type Cell = Arc<Mutex<Session>>;

pub struct SessionService<S> {
    store: S,
    clock: Box<dyn Clock>,
    sessions: RwLock<HashMap<String, Cell>>,
}

impl<S: SessionStore> SessionService<S> {
    pub fn new(store: S) -> Self {
        Self::with_clock(store, SystemClock)
    }

    pub fn with_clock(store: S, clock: impl Clock + 'static) -> Self {
        Self {
            store,
            clock: Box::new(clock),
            sessions: RwLock::new(HashMap::new()),
        }
    }

    pub fn store(&self) -> &S {
        &self.store
    }

    fn cell(&self, id: &str) -> Result<Cell, SessionError> {
        if let Some(c) = self.sessions.read().get(id) {
            return Ok(c.clone());
        }
        if !is_valid_id(id) {
            return Err(SessionError::NotFound(id.to_string()));
        }
        let loaded = self
            .store
            .load(id)?
            .ok_or_else(|| SessionError::NotFound(id.to_string()))?;
        let mut map = self.sessions.write();
        // another caller may have loaded it meanwhile
        Ok(map
            .entry(id.to_string())
            .or_insert_with(|| Arc::new(Mutex::new(loaded)))
            .clone())
    }

    fn read<T>(
        &self,
        id: &str,
        f: impl FnOnce(&Session) -> Result<T, SessionError>,
    ) -> Result<T, SessionError> {
        let cell = self.cell(id)?;
        let guard = cell.lock();
        f(&guard)
    }

    fn mutate<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session, DateTime<Utc>) -> Result<T, SessionError>,
    ) -> Result<T, SessionError> {
        let cell = self.cell(id)?;
        let mut guard = cell.lock();
        let mut next = guard.clone();
        let out = f(&mut next, self.clock.now())?;
        self.store.save(&next)?;
        *guard = next;
        Ok(out)
    }

    fn insert(&self, session: Session) -> Result<(), SessionError> {
        self.store.save(&session)?;
        self.sessions
            .write()
            .insert(session.id.clone(), Arc::new(Mutex::new(session)));
        Ok(())
    }

    pub fn create(
        &self,
        spec: SessionSpec,
        facilitator: NewParticipant,
    ) -> Result<Created, SessionError> {
        let token = new_token();
        let id = uuid::Uuid::new_v4().to_string();
        let session = Session::create(id, spec, facilitator, token.clone(), self.clock.now())?;
        self.insert(session.clone())?;
        Ok(Created {
            session,
            facilitator_token: token,
        })
    }

    pub fn get(&self, id: &str) -> Result<Session, SessionError> {
        self.read(id, |s| Ok(s.clone()))
    }

    fn require_facilitator(s: &Session, token: Option<&str>) -> Result<(), SessionError> {
        if s.is_facilitator(token) {
            Ok(())
        } else {
            Err(SessionError::Forbidden("facilitator token required".into()))
        }
    }

    /// Enrolls a participant and returns their token.
    pub fn enroll(
        &self,
        id: &str,
        token: Option<&str>,
        participant: NewParticipant,
    ) -> Result<(Session, String), SessionError> {
        self.mutate(id, |s, now| {
            Self::require_facilitator(s, token)?;
            let issued = new_token();
            s.add_participant(participant, issued.clone(), now)?;
            Ok((s.clone(), issued))
        })
    }

    pub fn advance(
        &self,
        id: &str,
        token: Option<&str>,
        to: Phase,
    ) -> Result<Session, SessionError> {
        self.mutate(id, |s, now| {
            Self::require_facilitator(s, token)?;
            s.advance(to, now)?;
            Ok(s.clone())
        })
    }

    /// Stores `ranking` as `participant`'s ballot. The token must be that
    /// participant's own.
    pub fn submit_ballot(
        &self,
        id: &str,
        token: Option<&str>,
        participant: &str,
        ranking: Ranking,
    ) -> Result<Session, SessionError> {
        self.mutate(id, |s, now| {
            match s.caller(token) {
                Some(p) if p.id == participant => {}
                _ => {
                    if s.participant(participant).is_none() {
                        return Err(SessionError::UnknownParticipant(participant.to_string()));
                    }
                    return Err(SessionError::Forbidden(format!(
                        "token does not belong to {participant}"
                    )));
                }
            }
            s.submit_ballot(participant, ranking, now)?;
            Ok(s.clone())
        })
    }

    pub fn suggest(
        &self,
        id: &str,
        weights: &BTreeMap<String, f64>,
    ) -> Result<ScoreReport, SessionError> {
        self.read(id, |s| s.suggest_ballot(weights))
    }

    pub fn results(&self, id: &str, method: Method) -> Result<VoteResult, SessionError> {
        self.read(id, |s| s.result(method).cloned())
    }

    pub fn pairwise(&self, id: &str) -> Result<PairwiseMatrix, SessionError> {
        self.read(id, |s| s.pairwise().cloned())
    }

    /// Starts a new session in setup with the same configuration and
    /// participants, for another round of voting.
    pub fn rerun(&self, id: &str, token: Option<&str>) -> Result<Created, SessionError> {
        let source = self.read(id, |s| {
            Self::require_facilitator(s, token)?;
            Ok(s.clone())
        })?;
        let session = source.rerun(uuid::Uuid::new_v4().to_string(), self.clock.now());
        self.insert(session.clone())?;
        Ok(Created {
            facilitator_token: session.facilitator().token.clone(),
            session,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Alternative;
    use crate::store::{FileStore, MemoryStore};

    fn spec() -> SessionSpec {
        SessionSpec {
            alternatives: Some(["A", "B", "C"].map(Alternative::bare).to_vec()),
            ..Default::default()
        }
    }

    #[test]
    fn facilitator_only_commands() {
        let svc = SessionService::new(MemoryStore::new());
        let c = svc
            .create(spec(), NewParticipant::facilitator("f"))
            .unwrap();
        let id = &c.session.id;
        assert!(matches!(
            svc.enroll(id, None, NewParticipant::decision_maker("d")),
            Err(SessionError::Forbidden(_))
        ));
        let (_, dtok) = svc
            .enroll(
                id,
                Some(&c.facilitator_token),
                NewParticipant::decision_maker("d"),
            )
            .unwrap();
        assert!(matches!(
            svc.advance(id, Some(&dtok), Phase::Balloting),
            Err(SessionError::Forbidden(_))
        ));
        svc.advance(id, Some(&c.facilitator_token), Phase::Balloting)
            .unwrap();

        let r = Ranking::new(["B", "A", "C"]);
        assert!(matches!(
            svc.submit_ballot(id, Some(&c.facilitator_token), "d", r.clone()),
            Err(SessionError::Forbidden(_))
        ));
        assert!(matches!(
            svc.submit_ballot(id, Some(&dtok), "ghost", r.clone()),
            Err(SessionError::UnknownParticipant(_))
        ));
        svc.submit_ballot(id, Some(&dtok), "d", r.clone()).unwrap();
        svc.advance(id, Some(&c.facilitator_token), Phase::Results)
            .unwrap();
        assert_eq!(svc.results(id, Method::Borda).unwrap().ranking, r);
    }

    #[test]
    fn failed_command_changes_nothing() {
        let svc = SessionService::new(MemoryStore::new());
        let c = svc
            .create(spec(), NewParticipant::facilitator("f"))
            .unwrap();
        let id = &c.session.id;
        let before = svc.store().raw(id).unwrap();
        assert!(svc
            .advance(id, Some(&c.facilitator_token), Phase::Closed)
            .is_err());
        assert_eq!(svc.store().raw(id).unwrap(), before);
        assert_eq!(svc.get(id).unwrap(), c.session);
    }

    #[test]
    fn sessions_survive_restart() {
        let dir = tempfile::tempdir().unwrap();
        let id = {
            let svc = SessionService::new(FileStore::open(dir.path()).unwrap());
            let c = svc
                .create(spec(), NewParticipant::facilitator("f"))
                .unwrap();
            svc.advance(&c.session.id, Some(&c.facilitator_token), Phase::Balloting)
                .unwrap();
            c.session.id
        };
        let svc = SessionService::new(FileStore::open(dir.path()).unwrap());
        assert_eq!(svc.get(&id).unwrap().phase, Phase::Balloting);
        assert!(matches!(svc.get("missing"), Err(SessionError::NotFound(_))));
        assert!(matches!(svc.get("../x"), Err(SessionError::NotFound(_))));
    }

    #[test]
    fn rerun_keeps_participants() {
        let svc = SessionService::new(MemoryStore::new());
        let c = svc
            .create(spec(), NewParticipant::facilitator("f"))
            .unwrap();
        let id = &c.session.id;
        svc.enroll(
            id,
            Some(&c.facilitator_token),
            NewParticipant::decision_maker("d"),
        )
        .unwrap();
        let r = svc.rerun(id, Some(&c.facilitator_token)).unwrap();
        assert_ne!(&r.session.id, id);
        assert_eq!(r.facilitator_token, c.facilitator_token);
        assert_eq!(svc.get(&r.session.id).unwrap().participants.len(), 2);
        assert!(svc.rerun(id, None).is_err());
    }

    #[test]
    fn concurrent_ballots_all_land() {
        let svc = Arc::new(SessionService::new(MemoryStore::new()));
        let c = svc
            .create(spec(), NewParticipant::facilitator("f"))
            .unwrap();
        let id = c.session.id.clone();
        let tokens: Vec<(String, String)> = (0..8)
            .map(|i| {
                let pid = format!("d{i}");
                let (_, t) = svc
                    .enroll(
                        &id,
                        Some(&c.facilitator_token),
                        NewParticipant::decision_maker(&pid),
                    )
                    .unwrap();
                (pid, t)
            })
            .collect();
        svc.advance(&id, Some(&c.facilitator_token), Phase::Balloting)
            .unwrap();
        std::thread::scope(|scope| {
            for (pid, tok) in &tokens {
                let svc = svc.clone();
                let id = id.clone();
                scope.spawn(move || {
                    svc.submit_ballot(&id, Some(tok), pid, Ranking::new(["C", "B", "A"]))
                        .unwrap();
                });
            }
        });
        assert_eq!(svc.get(&id).unwrap().ballots.len(), 8);
    }
}
