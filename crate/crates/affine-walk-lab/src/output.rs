//! Deterministic report writers.  Every CSV starts with provenance comment
//! lines (experiment name, config hash, seed, crate version) and every JSON
//! summary embeds the same fields, so a row can always be traced back to
//! the exact configuration that produced it.  Identical configuration
//! yields identical bytes: rows are emitted in a fixed order and floats use
//! Rust's shortest-round-trip formatting.

use serde_json::Value;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct Provenance {
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
}

impl Provenance {
    pub fn new(experiment: &str, config_hash: &str, seed: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            config_hash: config_hash.to_string(),
            seed,
        }
    }

    fn comment_header(&self) -> String {
        format!(
            "# experiment = {}\n# config_hash = {}\n# seed = {}\n# version = {}\n",
            self.experiment, self.config_hash, self.seed, VERSION
        )
    }
}

/// Render a CSV document: provenance comments, a header row, then data rows.
pub fn render_csv(prov: &Provenance, header: &str, rows: &[Vec<String>]) -> String {
    let mut out = prov.comment_header();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

/// Render a JSON summary with provenance fields merged into the object.
pub fn render_json(prov: &Provenance, mut body: Value) -> String {
    let obj = body
        .as_object_mut()
        .expect("JSON summaries are always objects");
    obj.insert("experiment".into(), Value::String(prov.experiment.clone()));
    obj.insert("config_hash".into(), Value::String(prov.config_hash.clone()));
    obj.insert("seed".into(), Value::from(prov.seed));
    obj.insert("version".into(), Value::String(VERSION.into()));
    let mut text = serde_json::to_string_pretty(&body).expect("serializable");
    text.push('\n');
    text
}

/// Write a document, creating the directory if needed; returns the path.
pub fn write_report(out_dir: &Path, filename: &str, contents: &str) -> anyhow::Result<PathBuf> {
    std::fs::create_dir_all(out_dir)?;
    let path = out_dir.join(filename);
    std::fs::write(&path, contents.as_bytes())?;
    Ok(path)
}

/// Shortest-round-trip float formatting (deterministic for a given binary).
pub fn fmt_f64(v: f64) -> String {
    format!("{v}")
}
