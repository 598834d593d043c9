// SPDX-License-Identifier: MIT OR Apache-2.0

//! Pipeline configuration. Every field has the analysis default, so an empty
//! JSON object is a complete config; command-line flags override fields.

use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use clap::ValueEnum;
use regimecast_core::changepoint::{CostModel, Detector, PenaltySpec, Segmentation};
use regimecast_core::DailySeries;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const OUT_ENV: &str = "REGIMECAST_OUT";
pub const DEFAULT_OUT: &str = "regimecast-out";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Binseg,
    Pelt,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Mean,
    Variance,
    Meanvar,
}

impl From<Model> for CostModel {
    fn from(m: Model) -> Self {
        match m {
            Model::Mean => CostModel::Mean,
            Model::Variance => CostModel::Variance,
            Model::Meanvar => CostModel::MeanVar,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Penalty {
    Aic,
    Bic,
    Sic,
    Mbic,
    Manual,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Binseg => "binseg",
            Method::Pelt => "pelt",
            Method::Oracle => "oracle",
        }
    }
}

/// Solver settings for one changepoint stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    pub method: Method,
    pub model: Model,
    pub penalty: Penalty,
    #[serde(default)]
    pub penalty_value: Option<f64>,
    /// Changepoint cap for binseg and the oracle.
    #[serde(default = "default_q_max")]
    pub q_max: usize,
}

fn default_q_max() -> usize {
    2
}

impl StageConfig {
    pub fn ems() -> Self {
        Self {
            method: Method::Binseg,
            model: Model::Meanvar,
            penalty: Penalty::Bic,
            penalty_value: None,
            q_max: 2,
        }
    }

    pub fn hosp() -> Self {
        Self {
            method: Method::Pelt,
            model: Model::Variance,
            penalty: Penalty::Mbic,
            penalty_value: None,
            q_max: 2,
        }
    }

    pub fn penalty_spec(&self) -> Result<PenaltySpec> {
        Ok(match (self.penalty, self.penalty_value) {
            (Penalty::Aic, _) => PenaltySpec::Aic,
            (Penalty::Bic, _) => PenaltySpec::Bic,
            (Penalty::Sic, _) => PenaltySpec::Sic,
            (Penalty::Mbic, _) => PenaltySpec::Mbic,
            (Penalty::Manual, Some(v)) => PenaltySpec::Manual(v),
            (Penalty::Manual, None) => {
                return Err(Error::Config("penalty 'manual' needs penalty_value".into()))
            }
        })
    }

    pub fn detect(&self, series: &DailySeries) -> Result<Segmentation> {
        let detector = Detector::new(self.model.into(), self.penalty_spec()?);
        let data = series.values();
        Ok(match self.method {
            Method::Binseg => detector.binseg(data, self.q_max)?,
            Method::Pelt => detector.pelt(data)?,
            Method::Oracle => detector.exact(data, self.q_max)?,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub incidents: Option<PathBuf>,
    pub hospitalization: Option<PathBuf>,
    /// Daily pandemic-call counts as a series file; derived from
    /// `incidents` when absent.
    pub calls: Option<PathBuf>,
    pub series: Option<PathBuf>,
}

impl Inputs {
    pub fn is_empty(&self) -> bool {
        self.incidents.is_none()
            && self.hospitalization.is_none()
            && self.calls.is_none()
            && self.series.is_none()
    }
}

/// Built-in synthetic sources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SynthSource {
    /// Regime-dummy regression data with the published coefficients.
    Paper,
    /// Three-regime daily EMS demand.
    Ems,
    /// Four-regime hospitalization series.
    Hosp,
    /// Incident table with per-problem demand shifts.
    Incidents,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: Inputs,
    pub synth: Option<SynthSource>,
    pub smoothing_window: usize,
    /// Window for the call target; the smoothing window when absent.
    pub target_window: Option<usize>,
    pub ems_stage: StageConfig,
    pub hosp_stage: StageConfig,
    pub train_fraction: f64,
    pub alpha: f64,
    pub welch: bool,
    pub period_boundaries: Vec<NaiveDate>,
    pub period_labels: Vec<String>,
    /// Problems with fewer non-pandemic admitted calls are left out of the t-test family.
    pub min_problem_calls: usize,
    /// Dispositions with fewer timed records are left out of the ANOVA.
    pub min_group_size: usize,
    pub timestamp_format: Option<String>,
    pub seed: u64,
    /// Take changepoints from a segmentation file instead of detecting them.
    pub changepoints: Option<PathBuf>,
    pub no_changepoints: bool,
    /// Detect changepoints even when the synthetic source knows the true ones.
    pub detect: bool,
    pub output_dir: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            inputs: Inputs::default(),
            synth: None,
            smoothing_window: 7,
            target_window: None,
            ems_stage: StageConfig::ems(),
            hosp_stage: StageConfig::hosp(),
            train_fraction: 0.8,
            alpha: regimecast_core::hypothesis::DEFAULT_ALPHA,
            welch: false,
            period_boundaries: vec![date(2020, 3, 18), date(2020, 5, 13)],
            period_labels: Vec::new(),
            min_problem_calls: 0,
            min_group_size: 2,
            timestamp_format: None,
            seed: 0,
            changepoints: None,
            no_changepoints: false,
            detect: false,
            output_dir: None,
        }
    }
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid constant date")
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn target_window(&self) -> usize {
        self.target_window.unwrap_or(self.smoothing_window)
    }

    /// Checks field ranges and the inputs-or-synth exclusivity.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !self.inputs.is_empty() && self.synth.is_some() {
            problems.push("inputs and synth are mutually exclusive".to_string());
        }
        if self.smoothing_window == 0 {
            problems.push("smoothing_window must be >= 1".into());
        }
        if self.target_window == Some(0) {
            problems.push("target_window must be >= 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            problems.push(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            problems.push(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        for (name, stage) in [
            ("ems_stage", &self.ems_stage),
            ("hosp_stage", &self.hosp_stage),
        ] {
            if stage.q_max == 0 {
                problems.push(format!("{name}.q_max must be >= 1"));
            }
            if let Err(e) = stage.penalty_spec() {
                problems.push(format!("{name}: {e}"));
            }
        }
        if self.changepoints.is_some() && self.no_changepoints {
            problems.push("changepoints and no_changepoints are mutually exclusive".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    /// `--out`, then the config file, then the environment default.
    pub fn resolve_output_dir(&self, flag: Option<&Path>, env: Option<&str>) -> PathBuf {
        flag.map(Path::to_path_buf)
            .or_else(|| self.output_dir.clone())
            .or_else(|| env.filter(|e| !e.is_empty()).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
    }
}
