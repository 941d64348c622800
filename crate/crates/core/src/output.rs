//! Writes a result bundle to disk.
//!
//! Files are named `<preset>-seed<seed>-<part>`: `config.toml` (the effective config),
//! `summary.jsonl` (one JSON record per extracted quantity) and one `.csv` per table.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::presets::ResultBundle;

pub fn file_stem(bundle: &ResultBundle) -> String {
    format!("{}-seed{}", bundle.preset, bundle.seed)
}

/// Writes every file of `bundle` into `dir` (created if missing) and returns the paths in
/// write order. An empty bundle produces only the config echo.
pub fn emit_outputs(bundle: &ResultBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let stem = file_stem(bundle);
    let mut written = Vec::new();
    let mut write = |name: String, contents: &str| -> Result<()> {
        let path = dir.join(name);
        fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };

    write(format!("{stem}-config.toml"), &bundle.config_echo)?;
    if !bundle.summary.is_empty() {
        let mut lines = String::new();
        for r in &bundle.summary {
            lines.push_str(&serde_json::to_string(r).expect("summary records serialize"));
            lines.push('\n');
        }
        write(format!("{stem}-summary.jsonl"), &lines)?;
    }
    for t in &bundle.tables {
        write(format!("{stem}-{}.csv", t.name), &t.csv)?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{default_config, Preset};

    #[test]
    fn empty_bundle_writes_config_only() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = default_config(Preset::Hbt).unwrap();
        let files = emit_outputs(&ResultBundle::empty(&cfg), dir.path()).unwrap();
        assert_eq!(files.len(), 1);
        assert!(files[0].ends_with("hbt-seed1-config.toml"));
        let echo = fs::read_to_string(&files[0]).unwrap();
        assert_eq!(crate::config::parse_config(&echo).unwrap(), cfg);
    }

    #[test]
    fn io_errors_carry_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let cfg = default_config(Preset::Hbt).unwrap();
        let err = emit_outputs(&ResultBundle::empty(&cfg), &blocker.join("sub")).unwrap_err();
        assert!(err.to_string().contains("file"), "{err}");
    }
}
