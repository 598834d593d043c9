// SPDX-License-Identifier: MIT OR Apache-2.0

use chrono::NaiveDate;
use regimecast_core::regression::{
    build_design, evaluate, predict, split_chronological, stepwise_select, FitMetrics,
    RegimeModelFit, HOSP, INTERCEPT,
};
use regimecast_core::series::moving_average;
use regimecast_core::synth::{gen_regression_dgp, DgpSpec};
use regimecast_core::DailySeries;

use super::{read_incidents, Artifact, Outcome, StageOverrides};
use crate::config::{PipelineConfig, StageConfig, SynthSource};
use crate::error::{Error, Result};
use crate::formats::{
    predictions_csv, read_regime_starts, read_series, to_json, ArmaReport, GridEntry,
    MetricsReport, ModelReport, SegmentationReport, SelectionReport, Window,
};
use crate::ingest::{
    classify_incident, daily_counts_by, date_span, parse_hospitalization, Status, Stream,
};

#[derive(Debug, Clone, PartialEq)]
pub enum ChangepointSource {
    /// Detect on the raw hospitalization series.
    Detect(StageConfig),
    /// Regime start dates.
    Given(Vec<NaiveDate>),
    None,
}

#[derive(Debug, Clone)]
pub struct ForecastRun {
    pub report: ModelReport,
    pub fit: RegimeModelFit,
    pub metrics: FitMetrics,
    pub segmentation: Option<SegmentationReport>,
    pub predictions: Vec<u8>,
}

fn overlap(a: &DailySeries, b: &DailySeries) -> Result<(DailySeries, DailySeries)> {
    let from = a.start().max(b.start());
    let to = a.end().min(b.end());
    if to < from {
        return Err(regimecast_core::Error::Range(format!(
            "hospitalization {}..{} and calls {}..{} do not overlap",
            a.start(),
            a.end(),
            b.start(),
            b.end()
        ))
        .into());
    }
    Ok((a.window(from, to)?, b.window(from, to)?))
}

/// detect, smooth, design, split, select, evaluate.
pub fn run_forecast(
    hosp_raw: &DailySeries,
    calls_raw: &DailySeries,
    changepoints: &ChangepointSource,
    smoothing_window: usize,
    target_window: usize,
    train_fraction: f64,
) -> Result<ForecastRun> {
    let (segmentation, cps) = match changepoints {
        ChangepointSource::Detect(stage) => {
            let seg = stage.detect(hosp_raw)?;
            let report = SegmentationReport::new(stage, hosp_raw, &seg)?;
            let starts = report.regime_starts.clone();
            (Some(report), starts)
        }
        ChangepointSource::Given(dates) => (None, dates.clone()),
        ChangepointSource::None => (None, Vec::new()),
    };

    let (hosp, calls) = overlap(hosp_raw, calls_raw)?;
    let hosp_s = moving_average(&hosp, smoothing_window)?;
    let calls_s = moving_average(&calls, target_window)?;
    let full = build_design(&hosp_s, &cps)?;
    let split = split_chronological(&calls_s, &full, train_fraction)?;

    // a dummy that never switches on inside the training window cannot be estimated
    let dropped: Vec<String> = full
        .labels()
        .iter()
        .enumerate()
        .filter(|(_, l)| *l != INTERCEPT && *l != HOSP)
        .filter(|(j, _)| {
            let c = split.x_train.column(*j);
            c.iter().all(|&v| v == c[0])
        })
        .map(|(_, l)| l.clone())
        .collect();
    let drop: Vec<&str> = dropped.iter().map(String::as_str).collect();
    let x = full.without(&drop);
    let split = split_chronological(&calls_s, &x, train_fraction)?;
    let cut = split.y_train.len();

    let selection = stepwise_select(&split.x_train, split.y_train.values())?;
    let fit = selection.fit;
    let metrics = evaluate(
        &fit,
        &split.x_test,
        &calls.values()[cut..],
        split.y_test.values(),
        split.y_train.values(),
        &split.x_train,
    )?;
    let fitted = predict(&fit, &x)?;

    let report = ModelReport {
        orders: [fit.orders.p, fit.orders.d, fit.orders.q],
        coefficients: ModelReport::coefficient_map(&fit),
        arma: ArmaReport {
            phi: fit.phi.clone(),
            theta: fit.theta.clone(),
        },
        residual_se: fit.residual_se,
        df: fit.df,
        aicc: fit.aicc,
        changepoints: cps,
        dropped,
        smoothing_window,
        target_window,
        window: Window {
            train_start: split.y_train.start(),
            train_end: split.y_train.end(),
            test_end: split.y_test.end(),
        },
        metrics: MetricsReport::from(&metrics),
        selection: SelectionReport {
            score: selection.score,
            grid: selection.grid.iter().map(GridEntry::from).collect(),
        },
    };
    Ok(ForecastRun {
        predictions: predictions_csv(&calls, calls_s.values(), &fitted),
        report,
        fit,
        metrics,
        segmentation,
    })
}

fn pandemic_admitted(path: &std::path::Path, cfg: &PipelineConfig) -> Result<DailySeries> {
    let records = read_incidents(path, cfg)?.records;
    let (from, to) = date_span(&records).ok_or(regimecast_core::Error::EmptySeries)?;
    daily_counts_by(
        &records,
        |r| {
            let l = classify_incident(r);
            l.stream == Stream::Pandemic && l.status == Status::Admitted
        },
        from,
        to,
    )
}

/// Writes `model.json`, `predictions.csv` and, when changepoints were
/// detected, the hospitalization `segmentation.json`.
///
/// `--synth paper` fits the regression DGP with its true regime dates and an
/// unsmoothed target unless told otherwise.
pub fn cmd_forecast(cfg: &PipelineConfig, overrides: &StageOverrides) -> Result<Outcome> {
    cfg.validate()?;
    let stage = overrides.apply(&cfg.hosp_stage);
    let given = cfg
        .changepoints
        .as_deref()
        .map(read_regime_starts)
        .transpose()?;
    let choose = |truth: Option<Vec<NaiveDate>>| match (&given, cfg.no_changepoints, truth) {
        (Some(dates), _, _) => ChangepointSource::Given(dates.clone()),
        (None, true, _) => ChangepointSource::None,
        (None, false, Some(t)) if !cfg.detect => ChangepointSource::Given(t),
        _ => ChangepointSource::Detect(stage.clone()),
    };

    let (hosp, calls, source, target_window) = match cfg.synth {
        Some(SynthSource::Paper) => {
            let sample = gen_regression_dgp(&DgpSpec::paper(cfg.seed))?;
            let source = choose(Some(sample.changepoints.clone()));
            (
                sample.hosp_raw,
                sample.target,
                source,
                cfg.target_window.unwrap_or(1),
            )
        }
        Some(other) => {
            return Err(Error::Usage(format!(
                "forecast supports --synth paper only, got {other:?}"
            )))
        }
        None => {
            let hosp_path =
                cfg.inputs.hospitalization.as_ref().ok_or_else(|| {
                    Error::Usage("forecast needs --hosp (or --synth paper)".into())
                })?;
            let file = std::fs::File::open(hosp_path).map_err(|e| Error::io(hosp_path, e))?;
            let hosp = parse_hospitalization(std::io::BufReader::new(file))?;
            let calls = match (&cfg.inputs.calls, &cfg.inputs.incidents) {
                (Some(p), _) => read_series(p)?,
                (None, Some(p)) => pandemic_admitted(p, cfg)?,
                (None, None) => {
                    return Err(Error::Usage("forecast needs --calls or --incidents".into()))
                }
            };
            (hosp, calls, choose(None), cfg.target_window())
        }
    };

    let run = run_forecast(
        &hosp,
        &calls,
        &source,
        cfg.smoothing_window,
        target_window,
        cfg.train_fraction,
    )?;
    let mut artifacts = vec![
        Artifact::new("model.json", to_json(&run.report)?),
        Artifact::new("predictions.csv", run.predictions),
    ];
    if let Some(seg) = &run.segmentation {
        artifacts.push(Artifact::new("segmentation.json", to_json(seg)?));
    }
    Ok(Outcome::ok(artifacts))
}
