//! Run manifests and file writers. Every command funnels its artifacts
//! through [`RunWriter`] so the manifest always lists exactly what was
//! written.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::AppConfig;
use zktrade_core::training::{RankingReport, ReturnStats};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Reproducibility record written next to every command's outputs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub config: AppConfig,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
}

pub struct RunWriter {
    out_dir: PathBuf,
    manifest: RunManifest,
}

impl RunWriter {
    pub fn new(out_dir: &Path, command: &str, seed: u64, config: &AppConfig) -> std::io::Result<Self> {
        std::fs::create_dir_all(out_dir)?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            manifest: RunManifest {
                command: command.to_string(),
                seed,
                config: config.clone(),
                inputs: Vec::new(),
                outputs: Vec::new(),
            },
        })
    }

    pub fn record_input(&mut self, path: &Path) -> std::io::Result<()> {
        let bytes = std::fs::read(path)?;
        self.manifest.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: hex::encode(Sha256::digest(&bytes)),
        });
        Ok(())
    }

    pub fn write(&mut self, name: &str, contents: &str) -> std::io::Result<PathBuf> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents)?;
        self.manifest.outputs.push(name.to_string());
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> std::io::Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value).expect("serializable");
        text.push('\n');
        self.write(name, &text)
    }

    /// Write the manifest itself; call last.
    pub fn finish(mut self) -> std::io::Result<PathBuf> {
        self.manifest.outputs.push("manifest.json".into());
        let path = self.out_dir.join("manifest.json");
        let mut text = serde_json::to_string_pretty(&self.manifest).expect("serializable");
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

fn stats_row(label: &str, stats: &ReturnStats) -> String {
    format!(
        "{label},{:.4},{:.4},{:.4},{:.4}\n",
        stats.max, stats.min, stats.mean, stats.stddev
    )
}

/// Ranking table as CSV: `config,max,min,mean,stddev` rows plus the
/// aggregate `overall` row.
pub fn ranking_csv(report: &RankingReport) -> String {
    let mut out = String::from("config,max,min,mean,stddev\n");
    for row in &report.rows {
        out.push_str(&stats_row(&row.config.to_string(), &row.stats));
    }
    out.push_str(&stats_row("overall", &report.overall));
    out
}

/// The same table with a leading trading-period column, for the frequency
/// comparison.
pub fn frequency_csv(entries: &[(i64, RankingReport)]) -> String {
    let mut out = String::from("period_seconds,config,max,min,mean,stddev\n");
    for (period, report) in entries {
        for row in &report.rows {
            out.push_str(&format!("{period},{}", stats_row(&row.config.to_string(), &row.stats)));
        }
        out.push_str(&format!("{period},{}", stats_row("overall", &report.overall)));
    }
    out
}
