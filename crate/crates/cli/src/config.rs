use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use medgraph_core::Palette;
use medgraph_sync::DataDir;
use serde::Deserialize;

pub const DEFAULT_DATA_DIR: &str = "medgraph-data";
pub const DEFAULT_PALETTE: &str = "passport";

/// Optional `<data_dir>/config`, TOML.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    data_dir: Option<PathBuf>,
    server_url: Option<String>,
    palette: Option<String>,
    ration_table: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct CliConfig {
    pub data_dir: DataDir,
    pub server_url: Option<String>,
    pub palette: String,
    pub ration_table: PathBuf,
}

fn relative_to(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

impl CliConfig {
    /// Resolves settings from the data directory and its config file. A
    /// `data_dir` key in the file moves the data elsewhere; relative paths in
    /// the file are taken from the directory holding it.
    pub fn load(dir: Option<PathBuf>) -> Result<Self> {
        let root = dir.unwrap_or_else(|| PathBuf::from(DEFAULT_DATA_DIR));
        let path = DataDir::new(&root).config();
        let file: ConfigFile = match fs::read_to_string(&path) {
            Ok(text) => toml::from_str(&text).with_context(|| format!("reading {}", path.display()))?,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => ConfigFile::default(),
            Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
        };
        let data_root = file.data_dir.map(|d| relative_to(&root, d)).unwrap_or(root.clone());
        fs::create_dir_all(&data_root).with_context(|| format!("creating data directory {}", data_root.display()))?;
        let data_dir = DataDir::new(data_root);

        let palette = file.palette.unwrap_or_else(|| DEFAULT_PALETTE.to_string());
        if Palette::builtin_named(&palette).is_none() {
            bail!(
                "{}: unknown palette `{palette}` (expected who or passport)",
                path.display()
            );
        }
        let ration_table = file
            .ration_table
            .map(|p| relative_to(&root, p))
            .unwrap_or_else(|| data_dir.rations());
        Ok(CliConfig {
            data_dir,
            server_url: file.server_url,
            palette,
            ration_table,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_without_file() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = CliConfig::load(Some(tmp.path().to_path_buf())).unwrap();
        assert_eq!(cfg.palette, "passport");
        assert_eq!(cfg.server_url, None);
        assert_eq!(cfg.ration_table, tmp.path().join("rations.csv"));
    }

    #[test]
    fn file_overrides() {
        let tmp = tempfile::tempdir().unwrap();
        fs::write(
            tmp.path().join("config"),
            "server_url = \"http://clinic:8080\"\npalette = \"who\"\nration_table = \"tables/r.csv\"\ndata_dir = \"store\"\n",
        )
        .unwrap();
        let cfg = CliConfig::load(Some(tmp.path().to_path_buf())).unwrap();
        assert_eq!(cfg.server_url.as_deref(), Some("http://clinic:8080"));
        assert_eq!(cfg.palette, "who");
        assert_eq!(cfg.ration_table, tmp.path().join("tables/r.csv"));
        assert_eq!(cfg.data_dir.root(), tmp.path().join("store"));
        assert!(tmp.path().join("store").is_dir());
    }

    #[test]
    fn bad_file_is_an_error() {
        let tmp = tempfile::tempdir().unwrap();
        fs::write(tmp.path().join("config"), "colour = \"red\"\n").unwrap();
        assert!(CliConfig::load(Some(tmp.path().to_path_buf())).is_err());
        fs::write(tmp.path().join("config"), "palette = \"neon\"\n").unwrap();
        assert!(CliConfig::load(Some(tmp.path().to_path_buf())).is_err());
    }
}
