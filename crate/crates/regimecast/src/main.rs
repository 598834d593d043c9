// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use regimecast::commands::{
    cmd_changepoint, cmd_compare, cmd_forecast, cmd_ingest_check, cmd_synth, Outcome,
    StageOverrides, StreamSelector, SynthPreset,
};
use regimecast::config::{Method, Model, Penalty, PipelineConfig, SynthSource, OUT_ENV};
use regimecast::{Error, Result};

/// Regime-shift detection, regime-dummy forecasting and period comparisons for daily EMS demand.
#[derive(Debug, Parser)]
#[command(name = "regimecast", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    /// JSON pipeline config; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: config, then $REGIMECAST_OUT, then ./regimecast-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Smoothing window in days.
    #[arg(long, global = true)]
    window: Option<usize>,
    #[arg(long, global = true)]
    train_frac: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true, value_enum)]
    method: Option<Method>,
    #[arg(long, global = true, value_enum)]
    model: Option<Model>,
    #[arg(long, global = true, value_enum)]
    penalty: Option<Penalty>,
    #[arg(long, global = true)]
    penalty_value: Option<f64>,
    #[arg(long, global = true)]
    qmax: Option<usize>,
    /// Fit without regime dummies.
    #[arg(long, global = true)]
    no_changepoints: bool,
}

#[derive(Debug, Args, Default)]
struct Inputs {
    #[arg(long)]
    incidents: Option<PathBuf>,
    /// Hospitalization CSV (date,count).
    #[arg(long)]
    hosp: Option<PathBuf>,
    /// Daily pandemic calls as a series file.
    #[arg(long)]
    calls: Option<PathBuf>,
    /// Any daily series (CSV date,value or JSON).
    #[arg(long)]
    series: Option<PathBuf>,
    /// chrono pattern for incident timestamps.
    #[arg(long)]
    timestamp_format: Option<String>,
    #[arg(long, value_enum)]
    synth: Option<SynthSource>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Detect changepoints in a daily series.
    Changepoint {
        #[command(flatten)]
        inputs: Inputs,
        /// Incident stream to count: all, non_pandemic_admitted, ...
        #[arg(long, default_value = "non_pandemic_admitted")]
        stream: String,
    },
    /// Fit the regime-dummy regression of pandemic calls on hospitalization.
    Forecast {
        #[command(flatten)]
        inputs: Inputs,
        /// Segmentation JSON whose regime starts define the dummies.
        #[arg(long)]
        changepoints: Option<PathBuf>,
        /// Detect changepoints even for synthetic data with known ones.
        #[arg(long)]
        detect: bool,
        /// Smoothing window for the call target.
        #[arg(long)]
        target_window: Option<usize>,
    },
    /// Period t-tests per problem, ANOVA across dispositions, response times.
    Compare {
        #[command(flatten)]
        inputs: Inputs,
        /// Comma-separated period boundary dates.
        #[arg(long, value_delimiter = ',')]
        periods: Vec<NaiveDate>,
        #[arg(long)]
        welch: bool,
        #[arg(long)]
        min_problem_calls: Option<usize>,
    },
    /// Generate synthetic data from a JSON spec or a preset.
    Synth {
        spec: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<SynthPreset>,
    },
    /// Parse inputs and report row counts, rejects and stream totals.
    IngestCheck {
        #[command(flatten)]
        inputs: Inputs,
    },
}

fn apply_inputs(cfg: &mut PipelineConfig, i: Inputs) {
    if i.incidents.is_some()
        || i.hosp.is_some()
        || i.calls.is_some()
        || i.series.is_some()
        || i.synth.is_some()
    {
        cfg.inputs.incidents = i.incidents;
        cfg.inputs.hospitalization = i.hosp;
        cfg.inputs.calls = i.calls;
        cfg.inputs.series = i.series;
        cfg.synth = i.synth;
    }
    if i.timestamp_format.is_some() {
        cfg.timestamp_format = i.timestamp_format;
    }
}

fn run(cli: Cli) -> Result<(Outcome, PathBuf)> {
    let g = cli.global;
    let mut cfg = match &g.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(s) = g.seed {
        cfg.seed = s;
    }
    if let Some(w) = g.window {
        cfg.smoothing_window = w;
    }
    if let Some(f) = g.train_frac {
        cfg.train_fraction = f;
    }
    if let Some(a) = g.alpha {
        cfg.alpha = a;
    }
    if g.no_changepoints {
        cfg.no_changepoints = true;
    }
    let overrides = StageOverrides {
        method: g.method,
        model: g.model,
        penalty: g.penalty,
        penalty_value: g.penalty_value,
        q_max: g.qmax,
    };
    let env = std::env::var(OUT_ENV).ok();
    let out = cfg.resolve_output_dir(g.out.as_deref(), env.as_deref());

    let outcome = match cli.command {
        Command::Changepoint { inputs, stream } => {
            apply_inputs(&mut cfg, inputs);
            cmd_changepoint(&cfg, &overrides, StreamSelector::parse(&stream)?)?
        }
        Command::Forecast {
            inputs,
            changepoints,
            detect,
            target_window,
        } => {
            apply_inputs(&mut cfg, inputs);
            if changepoints.is_some() {
                cfg.changepoints = changepoints;
            }
            cfg.detect |= detect;
            if target_window.is_some() {
                cfg.target_window = target_window;
            }
            cmd_forecast(&cfg, &overrides)?
        }
        Command::Compare {
            inputs,
            periods,
            welch,
            min_problem_calls,
        } => {
            apply_inputs(&mut cfg, inputs);
            if !periods.is_empty() {
                cfg.period_boundaries = periods;
                cfg.period_labels.clear();
            }
            cfg.welch |= welch;
            if let Some(m) = min_problem_calls {
                cfg.min_problem_calls = m;
            }
            cmd_compare(&cfg)?
        }
        Command::Synth { spec, preset } => {
            let spec = spec
                .map(|p| -> Result<serde_json::Value> {
                    let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
                    Ok(serde_json::from_str(&text)?)
                })
                .transpose()?;
            cmd_synth(spec.as_ref(), preset, g.seed)?
        }
        Command::IngestCheck { inputs } => {
            apply_inputs(&mut cfg, inputs);
            cmd_ingest_check(&cfg)?
        }
    };
    Ok((outcome, out))
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            return fail(&Error::Usage(
                first.trim_start_matches("error: ").to_string(),
            ));
        }
    };
    match run(cli) {
        Ok((outcome, dir)) => {
            let summary = match outcome.write_to(&dir) {
                Ok(s) => s,
                Err(e) => return fail(&e),
            };
            println!("{summary}");
            match &outcome.error {
                Some(e) => fail(e),
                None => ExitCode::SUCCESS,
            }
        }
        Err(e) => fail(&e),
    }
}
