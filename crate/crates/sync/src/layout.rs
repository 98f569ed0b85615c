//! Files and directories inside a medgraph data directory.

use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataDir(PathBuf);

impl DataDir {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DataDir(root.into())
    }

    pub fn root(&self) -> &Path {
        &self.0
    }

    /// Standards catalog.
    pub fn standards(&self) -> PathBuf {
        self.0.join("standards")
    }

    /// `patients.jsonl` and `visits.jsonl`.
    pub fn records(&self) -> PathBuf {
        self.0.join("records")
    }

    /// Optional RUTF ration table (`lo,hi,rations`).
    pub fn rations(&self) -> PathBuf {
        self.0.join("rations.csv")
    }

    pub fn sync_state(&self) -> PathBuf {
        self.0.join("sync-state.json")
    }

    pub fn sync_lock(&self) -> PathBuf {
        self.0.join("sync.lock")
    }

    /// Optional `key=value` configuration.
    pub fn config(&self) -> PathBuf {
        self.0.join("config")
    }
}
