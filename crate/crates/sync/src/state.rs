//! Client-side sync state and the lock that serializes sync runs.

use std::collections::{BTreeMap, VecDeque};
use std::fs::{self, File, OpenOptions, TryLockError};
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use medgraph_core::records::{Patient, Visit};
use serde::{Deserialize, Serialize};

/// A queued record the server refused; kept so nothing is silently lost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejected {
    pub kind: String,
    pub id: String,
    pub status: u16,
    pub reason: String,
    pub record: serde_json::Value,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SyncState {
    /// Digest of every dataset pulled from the server, by dataset id.
    #[serde(default)]
    pub known_digests: BTreeMap<String, String>,
    #[serde(default)]
    pub pending_patients: VecDeque<Patient>,
    #[serde(default)]
    pub pending_visits: VecDeque<Visit>,
    #[serde(default)]
    pub rejected: Vec<Rejected>,
    #[serde(default)]
    pub last_sync: Option<DateTime<Utc>>,
}

impl SyncState {
    /// Reads the state file; a missing file is an empty state.
    pub fn load(path: &Path) -> io::Result<Self> {
        match fs::read_to_string(path) {
            Ok(text) => serde_json::from_str(&text).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e)),
            Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(SyncState::default()),
            Err(e) => Err(e),
        }
    }

    /// Writes the state atomically.
    pub fn save(&self, path: &Path) -> io::Result<()> {
        let tmp = path.with_extension("json.tmp");
        let text = serde_json::to_string_pretty(self).expect("sync state serializes");
        fs::write(&tmp, text)?;
        File::open(&tmp)?.sync_all()?;
        fs::rename(&tmp, path)
    }

    pub fn enqueue_patient(&mut self, patient: Patient) {
        self.pending_patients.push_back(patient);
    }

    pub fn enqueue_visit(&mut self, visit: Visit) {
        self.pending_visits.push_back(visit);
    }

    pub fn is_idle(&self) -> bool {
        self.pending_patients.is_empty() && self.pending_visits.is_empty()
    }
}

/// Exclusive advisory lock on a file, held until dropped. The operating
/// system releases it if the process dies.
#[derive(Debug)]
pub struct SyncLock {
    _file: File,
    path: PathBuf,
}

impl SyncLock {
    /// Takes the lock, or returns `Ok(None)` when another holder has it.
    pub fn try_acquire(path: &Path) -> io::Result<Option<Self>> {
        let file = OpenOptions::new().create(true).truncate(false).write(true).open(path)?;
        match file.try_lock() {
            Ok(()) => Ok(Some(SyncLock {
                _file: file,
                path: path.to_path_buf(),
            })),
            Err(TryLockError::WouldBlock) => Ok(None),
            Err(TryLockError::Error(e)) => Err(e),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn second_lock_is_refused_until_release() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sync.lock");
        let first = SyncLock::try_acquire(&path).unwrap().expect("first lock");
        assert!(SyncLock::try_acquire(&path).unwrap().is_none());
        drop(first);
        assert!(SyncLock::try_acquire(&path).unwrap().is_some());
    }

    #[test]
    fn state_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.json");
        assert_eq!(SyncState::load(&path).unwrap(), SyncState::default());
        let mut s = SyncState::default();
        s.known_digests.insert("a".into(), "d1".into());
        s.last_sync = Some(Utc::now());
        s.save(&path).unwrap();
        assert_eq!(SyncState::load(&path).unwrap(), s);
    }
}
