//! File formats: channel JSON, versioned CSV tables, and run manifests.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use sicap_core::channels::WiretapChannel;
use sicap_core::probability::{Pmf, TransitionMatrix};

/// Unit for information-valued output columns. Conversion happens at the
/// output boundary only; everything internal stays in nats.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Units {
    Nats,
    Bits,
}

impl Units {
    /// Multiplier taking nats to the selected unit.
    pub fn factor(self) -> f64 {
        match self {
            Units::Nats => 1.0,
            Units::Bits => 1.0 / std::f64::consts::LN_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

/// Resolves the directory generated files land in: explicit flag, then the
/// SICAP_OUT_DIR environment variable, then the working directory.
pub fn resolve_out_dir(flag: Option<PathBuf>) -> Result<PathBuf> {
    let dir = flag
        .or_else(|| std::env::var_os("SICAP_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir)
        .with_context(|| format!("cannot create output directory {}", dir.display()))?;
    Ok(dir)
}

/// On-disk channel description: input law plus both transition matrices,
/// stored output-major (one row per output symbol).
#[derive(Serialize, Deserialize)]
pub struct ChannelFile {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub p_x: Vec<f64>,
    pub bob: Vec<Vec<f64>>,
    pub eve: Vec<Vec<f64>>,
}

impl ChannelFile {
    pub fn from_channel(wc: &WiretapChannel) -> Self {
        ChannelFile {
            nx: wc.p_x().len(),
            ny: wc.bob().n_outputs(),
            nz: wc.eve().n_outputs(),
            p_x: wc.p_x().probs().to_vec(),
            bob: wc.bob().rows().to_vec(),
            eve: wc.eve().rows().to_vec(),
        }
    }

    pub fn into_channel(self) -> Result<WiretapChannel> {
        if self.p_x.len() != self.nx {
            bail!("p_x has {} entries, nx says {}", self.p_x.len(), self.nx);
        }
        if self.bob.len() != self.ny || self.eve.len() != self.nz {
            bail!(
                "matrix row counts ({}, {}) disagree with ny={}, nz={}",
                self.bob.len(),
                self.eve.len(),
                self.ny,
                self.nz
            );
        }
        let p_x = Pmf::new(self.p_x)?;
        let bob = TransitionMatrix::from_rows(&self.bob)?;
        let eve = TransitionMatrix::from_rows(&self.eve)?;
        Ok(WiretapChannel::new(p_x, bob, eve)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read channel file {}", path.display()))?;
        // serde_json reports line and column in its message.
        serde_json::from_str(&text)
            .with_context(|| format!("malformed channel file {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        fs::write(path, text + "\n")
            .with_context(|| format!("cannot write channel file {}", path.display()))?;
        Ok(())
    }
}

/// Loads a channel file and rebuilds the validated channel.
pub fn load_channel(path: &Path) -> Result<WiretapChannel> {
    ChannelFile::load(path)?.into_channel()
}

/// 12 significant digits for every numeric CSV cell.
pub fn sig(v: f64) -> String {
    format!("{v:.11e}")
}

/// A CSV table with a schema tag. The first line carries the only
/// run-varying content (a timestamp); everything below is deterministic.
pub struct CsvTable {
    schema: &'static str,
    columns: &'static [&'static str],
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(schema: &'static str, columns: &'static [&'static str]) -> Self {
        CsvTable {
            schema,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let stamp = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut text = format!(
            "# generated-at {stamp} (unix seconds)\n# schema {}\n{}\n",
            self.schema,
            self.columns.join(",")
        );
        for row in &self.rows {
            text.push_str(&row.join(","));
            text.push('\n');
        }
        fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))?;
        Ok(())
    }
}

/// Record of one invocation: enough to re-run it and account for every file
/// it produced.
#[derive(Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub units: String,
    pub parameters: serde_json::Value,
    pub seeds: Vec<u64>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, units: Units, parameters: serde_json::Value) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION"),
            units: units.name().to_string(),
            parameters,
            seeds: Vec::new(),
            outputs: Vec::new(),
        }
    }

    pub fn seed(mut self, s: u64) -> Self {
        self.seeds.push(s);
        self
    }

    pub fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn write(&self, dir: &Path, stem: &str) -> Result<PathBuf> {
        let path = dir.join(format!("{stem}.manifest.json"));
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&path, text + "\n")
            .with_context(|| format!("cannot write manifest {}", path.display()))?;
        Ok(path)
    }
}
