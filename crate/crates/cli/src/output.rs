//! Output files. Every file starts with the artifact name, version and the
//! SHA-256 of the expanded configuration; floats are written with 17
//! significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{render_config, RunConfig};
use crate::error::CliError;

pub const ARTIFACT: &str = "sgdelta";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn config_hash(cfg: &RunConfig) -> String {
    let digest = Sha256::digest(render_config(cfg).as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub struct Outputs {
    dir: PathBuf,
    hash: String,
    written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    artifact: &'a str,
    version: &'a str,
    config_sha256: &'a str,
    kind: &'a str,
    config: &'a RunConfig,
    report: &'a T,
}

impl Outputs {
    pub fn new(dir: &Path, cfg: &RunConfig) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            hash: config_hash(cfg),
            written: Vec::new(),
        })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    fn banner(&self) -> String {
        format!("{ARTIFACT} {VERSION} config_sha256={}", self.hash)
    }

    fn put(&mut self, name: &str, body: String) -> Result<(), CliError> {
        let path = self.dir.join(name);
        fs::write(&path, body)?;
        self.written.push(path);
        Ok(())
    }

    /// Comma-separated table: a `#` banner line, one header row, then rows.
    pub fn csv(
        &mut self,
        name: &str,
        header: &[&str],
        rows: impl IntoIterator<Item = Vec<String>>,
    ) -> Result<(), CliError> {
        let mut body = format!("# {}\n{}\n", self.banner(), header.join(","));
        for row in rows {
            body.push_str(&row.join(","));
            body.push('\n');
        }
        self.put(name, body)
    }

    pub fn json<T: Serialize>(
        &mut self,
        name: &str,
        kind: &str,
        cfg: &RunConfig,
        report: &T,
    ) -> Result<(), CliError> {
        let env = Envelope {
            artifact: ARTIFACT,
            version: VERSION,
            config_sha256: &self.hash,
            kind,
            config: cfg,
            report,
        };
        let mut body =
            serde_json::to_string_pretty(&env).map_err(|e| CliError::Runtime(e.to_string()))?;
        body.push('\n');
        self.put(name, body)
    }

    pub fn summary(&mut self, text: &str) -> Result<(), CliError> {
        let body = format!("{}\n{text}", self.banner());
        self.put("summary.txt", body)
    }
}
