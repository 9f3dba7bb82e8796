//! Session persistence: one JSON document per session.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use parking_lot::Mutex;
use thiserror::Error;

use crate::session::{Session, SCHEMA_VERSION};

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("session document {id}: {source}")]
    Corrupt {
        id: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("session {id} has schema {found}, expected {SCHEMA_VERSION}")]
    UnsupportedSchema { id: String, found: u32 },
}

pub trait SessionStore: Send + Sync {
    fn load(&self, id: &str) -> Result<Option<Session>, StoreError>;
    fn save(&self, session: &Session) -> Result<(), StoreError>;
}

/// Ids that are safe to use as a file name.
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id.len() <= 128
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_')
}

/// Canonical on-disk encoding of a session.
pub fn encode(session: &Session) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(session).expect("session serializes");
    out.push(b'\n');
    out
}

pub fn decode(id: &str, bytes: &[u8]) -> Result<Session, StoreError> {
    let session: Session = serde_json::from_slice(bytes).map_err(|source| StoreError::Corrupt {
        id: id.to_string(),
        source,
    })?;
    if session.schema != SCHEMA_VERSION {
        return Err(StoreError::UnsupportedSchema {
            id: id.to_string(),
            found: session.schema,
        });
    }
    Ok(session)
}

/// Stores sessions as `<root>/sessions/<id>.json`.
///
/// Writes go to a temporary file in the same directory which is then
/// renamed over the target, so readers see either the old or the new
/// document.
#[derive(Debug, Clone)]
pub struct FileStore {
    dir: PathBuf,
}

impl FileStore {
    pub fn open(root: impl AsRef<Path>) -> Result<Self, StoreError> {
        let dir = root.as_ref().join("sessions");
        fs::create_dir_all(&dir).map_err(|source| StoreError::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(Self { dir })
    }

    pub fn path_for(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.json"))
    }
}

impl SessionStore for FileStore {
    fn load(&self, id: &str) -> Result<Option<Session>, StoreError> {
        if !is_valid_id(id) {
            return Ok(None);
        }
        let path = self.path_for(id);
        match fs::read(&path) {
            Ok(bytes) => decode(id, &bytes).map(Some),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(source) => Err(StoreError::Io { path, source }),
        }
    }

    fn save(&self, session: &Session) -> Result<(), StoreError> {
        let path = self.path_for(&session.id);
        let io_err = |source| StoreError::Io {
            path: path.clone(),
            source,
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(io_err)?;
        tmp.write_all(&encode(session)).map_err(io_err)?;
        tmp.as_file().sync_all().map_err(io_err)?;
        tmp.persist(&path).map_err(|e| io_err(e.error))?;
        Ok(())
    }
}

/// Keeps encoded documents in memory. Sessions still go through the JSON
/// encoding, so behaviour matches [`FileStore`].
#[derive(Debug, Default)]
pub struct MemoryStore {
    docs: Mutex<HashMap<String, Vec<u8>>>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn raw(&self, id: &str) -> Option<Vec<u8>> {
        self.docs.lock().get(id).cloned()
    }
}

impl SessionStore for MemoryStore {
    fn load(&self, id: &str) -> Result<Option<Session>, StoreError> {
        match self.docs.lock().get(id) {
            Some(bytes) => decode(id, bytes).map(Some),
            None => Ok(None),
        }
    }

    fn save(&self, session: &Session) -> Result<(), StoreError> {
        self.docs.lock().insert(session.id.clone(), encode(session));
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Alternative;
    use crate::session::{NewParticipant, SessionSpec};
    use chrono::{TimeZone, Utc};

    fn session(id: &str) -> Session {
        let spec = SessionSpec {
            alternatives: Some(vec![Alternative::bare("A"), Alternative::bare("B")]),
            ..Default::default()
        };
        let now = Utc.timestamp_opt(1_700_000_000, 0).unwrap();
        Session::create(
            id,
            spec,
            NewParticipant::facilitator("f"),
            "tok".into(),
            now,
        )
        .unwrap()
    }

    #[test]
    fn file_round_trip_is_byte_identical() {
        let dir = tempfile::tempdir().unwrap();
        let store = FileStore::open(dir.path()).unwrap();
        let s = session("abc");
        store.save(&s).unwrap();
        let bytes = fs::read(store.path_for("abc")).unwrap();
        let loaded = store.load("abc").unwrap().unwrap();
        assert_eq!(loaded, s);
        assert_eq!(encode(&loaded), bytes);
        assert!(String::from_utf8(bytes).unwrap().contains("\"schema\": 1"));
    }

    #[test]
    fn missing_and_hostile_ids() {
        let dir = tempfile::tempdir().unwrap();
        let store = FileStore::open(dir.path()).unwrap();
        assert!(store.load("nope").unwrap().is_none());
        assert!(store.load("../etc/passwd").unwrap().is_none());
    }

    #[test]
    fn rejects_other_schema() {
        let mut s = session("x");
        s.schema = 2;
        let bytes = serde_json::to_vec(&s).unwrap();
        assert!(matches!(
            decode("x", &bytes),
            Err(StoreError::UnsupportedSchema { found: 2, .. })
        ));
        assert!(matches!(decode("x", b"{"), Err(StoreError::Corrupt { .. })));
    }

    #[test]
    fn overwrite_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let store = FileStore::open(dir.path()).unwrap();
        let mut s = session("abc");
        store.save(&s).unwrap();
        s.alternatives[0].label = "renamed".into();
        store.save(&s).unwrap();
        let names: Vec<_> = fs::read_dir(dir.path().join("sessions"))
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(names, ["abc.json"]);
        assert_eq!(
            store.load("abc").unwrap().unwrap().alternatives[0].label,
            "renamed"
        );
    }
}
