//! Versioned JSON report envelope, CSV tables, and atomic file output.
//!
//! Reports embed the config hash, grid geometry, and the sampled times so
//! that every "for all t" claim in a result can be audited against the
//! discretization that produced it.

use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

use multiflow::{CellSet, GridSpace, TimeGrid};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub schema_version: u32,
    pub command: &'a str,
    pub config_sha256: String,
    pub seed: u64,
    pub metric: &'a str,
    pub grid: GridMeta,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sampled_times: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub result: T,
}

#[derive(Serialize)]
pub struct GridMeta {
    pub bounds: Vec<[f64; 2]>,
    pub resolution: Vec<usize>,
    pub cell_widths: Vec<f64>,
}

impl GridMeta {
    pub fn of(space: &GridSpace) -> GridMeta {
        GridMeta {
            bounds: space.bounds().iter().map(|&(a, b)| [a, b]).collect(),
            resolution: space.resolution().to_vec(),
            cell_widths: (0..space.dimension()).map(|k| space.cell_width(k)).collect(),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl<'a, T: Serialize> Report<'a, T> {
    pub fn new(
        command: &'a str,
        config_bytes: &[u8],
        seed: u64,
        metric: &'a str,
        space: &GridSpace,
        result: T,
    ) -> Report<'a, T> {
        Report {
            schema_version: SCHEMA_VERSION,
            command,
            config_sha256: sha256_hex(config_bytes),
            seed,
            metric,
            grid: GridMeta::of(space),
            model: None,
            sampled_times: None,
            threshold: None,
            result,
        }
    }

    pub fn with_model(mut self, name: &str) -> Self {
        self.model = Some(name.to_string());
        self
    }

    pub fn with_times(mut self, times: &TimeGrid) -> Self {
        self.sampled_times = Some(times.samples().to_vec());
        self.threshold = times.threshold();
        self
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(self)?;
        bytes.push(b'\n');
        write_atomic(path, &bytes)
    }
}

/// Cell sets serialize as sorted index arrays with a count.
#[derive(Serialize)]
pub struct CellSetJson {
    pub count: usize,
    pub cells: Vec<usize>,
}

impl CellSetJson {
    pub fn of(set: &CellSet) -> CellSetJson {
        CellSetJson { count: set.len(), cells: set.to_sorted_vec() }
    }
}

/// Write via a temp file in the same directory plus rename, so readers
/// never observe a half-written file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    let tmp = path.with_extension("tmp");
    std::fs::write(&tmp, bytes)
        .with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn write_csv(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut text = String::with_capacity(header.len() + rows.iter().map(|r| r.len() + 1).sum::<usize>() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    write_atomic(path, text.as_bytes())
}
