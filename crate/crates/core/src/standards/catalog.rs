//! On-disk store of reference datasets.
//!
//! Layout: one `<id>.csv` (canonical table) and one `<id>.meta` (key=value
//! lines) per dataset. Writes go through a temp file and rename; a single
//! writer is enforced by an internal lock.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DatasetDigest, DatasetMeta, StandardDataset, StandardsError, ZLabel};
use crate::scalar::Scalar;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("dataset `{0}` not found")]
    NotFound(String),
    #[error("i/o failure on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("corrupt metadata in {path}: {message}")]
    CorruptMeta { path: PathBuf, message: String },
    #[error(transparent)]
    Invalid(#[from] StandardsError),
}

/// Summary of one stored dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    #[serde(flatten)]
    pub meta: DatasetMeta,
    pub digest: DatasetDigest,
}

#[derive(Debug)]
pub struct Catalog {
    root: PathBuf,
    write_lock: Mutex<()>,
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CatalogError + '_ {
    move |source| CatalogError::Io {
        path: path.to_path_buf(),
        source,
    }
}

impl Catalog {
    /// Opens (creating if needed) a catalog rooted at `root`.
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, CatalogError> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(io_err(&root))?;
        Ok(Catalog {
            root,
            write_lock: Mutex::new(()),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn csv_path(&self, id: &str) -> PathBuf {
        self.root.join(format!("{id}.csv"))
    }

    fn meta_path(&self, id: &str) -> PathBuf {
        self.root.join(format!("{id}.meta"))
    }

    /// Stores `ds`, replacing any dataset with the same id.
    pub fn put<T: Scalar>(&self, ds: &StandardDataset<T>) -> Result<DatasetDigest, CatalogError> {
        let _guard = self.write_lock.lock().unwrap_or_else(|e| e.into_inner());
        let id = ds.id();
        write_atomic(&self.csv_path(id), ds.to_csv().as_bytes())?;
        write_atomic(&self.meta_path(id), render_meta(ds.meta(), ds.z_labels()).as_bytes())?;
        Ok(ds.digest())
    }

    pub fn get<T: Scalar>(&self, id: &str) -> Result<StandardDataset<T>, CatalogError> {
        let (meta, csv) = self.get_raw(id)?;
        Ok(StandardDataset::parse(meta, &csv)?)
    }

    /// Metadata and canonical CSV text of a stored dataset.
    pub fn get_raw(&self, id: &str) -> Result<(DatasetMeta, String), CatalogError> {
        if DatasetMeta::new(id, super::Indicator::Custom, super::Sex::Any, super::XUnit::AgeDays)
            .validate()
            .is_err()
        {
            return Err(CatalogError::NotFound(id.to_string()));
        }
        let meta_path = self.meta_path(id);
        let meta_text = match fs::read_to_string(&meta_path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(CatalogError::NotFound(id.to_string())),
            Err(e) => return Err(io_err(&meta_path)(e)),
        };
        let meta = parse_meta(&meta_text).map_err(|message| CatalogError::CorruptMeta {
            path: meta_path.clone(),
            message,
        })?;
        let csv_path = self.csv_path(id);
        let csv = fs::read_to_string(&csv_path).map_err(|e| {
            if e.kind() == io::ErrorKind::NotFound {
                CatalogError::NotFound(id.to_string())
            } else {
                io_err(&csv_path)(e)
            }
        })?;
        Ok((meta, csv))
    }

    /// All stored datasets, sorted by id.
    pub fn list(&self) -> Result<Vec<CatalogEntry>, CatalogError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.root).map_err(io_err(&self.root))? {
            let entry = entry.map_err(io_err(&self.root))?;
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) == Some("meta") {
                if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                    ids.push(stem.to_string());
                }
            }
        }
        ids.sort();
        ids.iter()
            .map(|id| {
                let ds = self.get::<f64>(id)?;
                Ok(CatalogEntry {
                    digest: ds.digest(),
                    meta: ds.meta().clone(),
                })
            })
            .collect()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.meta_path(id).is_file()
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CatalogError> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn render_meta(meta: &DatasetMeta, labels: &[ZLabel]) -> String {
    let labels = labels.iter().map(|z| z.column_name()).collect::<Vec<_>>().join(",");
    format!(
        "id={}\nindicator={}\nsex={}\nx_unit={}\nx_label={}\ny_label={}\nlabels={}\n",
        meta.id, meta.indicator, meta.sex, meta.x_unit, meta.x_label, meta.y_label, labels
    )
}

fn parse_meta(text: &str) -> Result<DatasetMeta, String> {
    let mut id = None;
    let mut indicator = None;
    let mut sex = None;
    let mut x_unit = None;
    let mut x_label = None;
    let mut y_label = None;
    for line in text.lines() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("expected key=value, got `{line}`"))?;
        match key.trim() {
            "id" => id = Some(value.trim().to_string()),
            "indicator" => indicator = Some(value.parse()?),
            "sex" => sex = Some(value.parse()?),
            "x_unit" => x_unit = Some(value.parse()?),
            "x_label" => x_label = Some(value.to_string()),
            "y_label" => y_label = Some(value.to_string()),
            // informational; the CSV header is authoritative
            "labels" => {}
            other => return Err(format!("unknown key `{other}`")),
        }
    }
    let missing = |k: &str| format!("missing `{k}`");
    let mut meta = DatasetMeta::new(
        id.ok_or_else(|| missing("id"))?,
        indicator.ok_or_else(|| missing("indicator"))?,
        sex.ok_or_else(|| missing("sex"))?,
        x_unit.ok_or_else(|| missing("x_unit"))?,
    );
    if let Some(x) = x_label {
        meta.x_label = x;
    }
    if let Some(y) = y_label {
        meta.y_label = y;
    }
    Ok(meta)
}
