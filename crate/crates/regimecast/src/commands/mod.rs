// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command implementations. Each command returns the files it produces as
//! bytes; the binary writes them, so runs can be compared without touching disk.

mod changepoint;
mod compare;
mod forecast;
mod ingest_check;
mod synth;

pub use changepoint::{cmd_changepoint, load_stream_series};
pub use compare::{cmd_compare, compare_records, CompareReport};
pub use forecast::{cmd_forecast, run_forecast, ChangepointSource, ForecastRun};
pub use ingest_check::cmd_ingest_check;
pub use synth::{cmd_synth, resolve_spec, SynthPreset};

use std::path::Path;

use serde_json::{json, Value};

use crate::config::{Method, Model, Penalty, PipelineConfig, StageConfig};
use crate::error::{Error, Result};
use crate::ingest::{parse_incidents, IncidentTable, StreamLabel, TimestampFormat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Self {
            name: name.into(),
            bytes,
        }
    }
}

/// Files produced by a command. `error` is set when a section failed but the
/// rest of the report was still written.
#[derive(Debug)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub error: Option<Error>,
}

impl Outcome {
    pub fn ok(artifacts: Vec<Artifact>) -> Self {
        Self {
            artifacts,
            error: None,
        }
    }

    pub fn artifact(&self, name: &str) -> Option<&[u8]> {
        self.artifacts
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.bytes.as_slice())
    }

    /// Writes every artifact under `dir`, creating it if needed.
    pub fn write_to(&self, dir: &Path) -> Result<Value> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut files = Vec::new();
        for a in &self.artifacts {
            let path = dir.join(&a.name);
            std::fs::write(&path, &a.bytes).map_err(|e| Error::io(&path, e))?;
            files.push(path.display().to_string());
        }
        Ok(json!({ "out_dir": dir.display().to_string(), "files": files }))
    }
}

/// Changepoint flags; each set field replaces the corresponding field of
/// whichever stage a command runs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageOverrides {
    pub method: Option<Method>,
    pub model: Option<Model>,
    pub penalty: Option<Penalty>,
    pub penalty_value: Option<f64>,
    pub q_max: Option<usize>,
}

impl StageOverrides {
    pub fn apply(&self, stage: &StageConfig) -> StageConfig {
        let mut s = stage.clone();
        if let Some(m) = self.method {
            s.method = m;
        }
        if let Some(m) = self.model {
            s.model = m;
        }
        if let Some(p) = self.penalty {
            s.penalty = p;
        }
        if let Some(v) = self.penalty_value {
            s.penalty_value = Some(v);
            // a bare value implies a manual penalty
            if self.penalty.is_none() {
                s.penalty = Penalty::Manual;
            }
        }
        if let Some(q) = self.q_max {
            s.q_max = q;
        }
        s
    }
}

pub(crate) fn read_incidents(path: &Path, cfg: &PipelineConfig) -> Result<IncidentTable> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_incidents(
        std::io::BufReader::new(file),
        &TimestampFormat(cfg.timestamp_format.clone()),
    )
}

/// Stream selector for commands that count incidents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamSelector {
    All,
    Label(StreamLabel),
}

impl StreamSelector {
    pub fn parse(name: &str) -> Result<Self> {
        if name == "all" {
            return Ok(StreamSelector::All);
        }
        StreamLabel::ALL
            .iter()
            .find(|l| l.name() == name)
            .map(|&l| StreamSelector::Label(l))
            .ok_or_else(|| {
                let names: Vec<_> = StreamLabel::ALL.iter().map(|l| l.name()).collect();
                Error::Usage(format!(
                    "unknown stream '{name}', expected all or one of {}",
                    names.join(", ")
                ))
            })
    }

    pub fn accepts(self, label: StreamLabel) -> bool {
        match self {
            StreamSelector::All => true,
            StreamSelector::Label(l) => l == label,
        }
    }
}

impl Default for StreamSelector {
    fn default() -> Self {
        StreamSelector::Label(StreamLabel::new(
            crate::ingest::Stream::NonPandemic,
            crate::ingest::Status::Admitted,
        ))
    }
}
