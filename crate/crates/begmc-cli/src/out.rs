//! Output helpers: every artifact embeds its config for provenance.

use anyhow::Context;
use serde::Serialize;
use std::path::{Path, PathBuf};

pub fn write_json<C: Serialize>(dir: &Path, name: &str, value: &C) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn write_csv<C: Serialize>(
    dir: &Path,
    name: &str,
    config: &C,
    columns: &[&str],
    rows: &[Vec<String>],
) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let file = std::fs::File::create(&path)?;
    begmc::export::write_csv(file, config, columns, rows)?;
    Ok(path)
}
