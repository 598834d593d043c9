// SPDX-License-Identifier: MIT OR Apache-2.0

use std::collections::BTreeMap;

use chrono::NaiveDate;
use regimecast_core::hypothesis::{
    anova_oneway, bonferroni, multi_compare, welch_test_greater, Comparison, TestResult,
};
use regimecast_core::series::{slice_periods, summarize};
use regimecast_core::PeriodSpec;
use serde::Serialize;
use serde_json::Value;

use super::{read_incidents, Artifact, Outcome};
use crate::config::{PipelineConfig, SynthSource};
use crate::error::{Error, Result};
use crate::formats::to_json;
use crate::incidents::{gen_incidents, IncidentSpec};
use crate::ingest::{
    classify_incident, daily_counts_by, date_span, label_counts, response_intervals,
    IncidentRecord, ParseReport, Status, Stream, StreamLabel,
};

/// A report section that either holds its result or the error that stopped it.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Section<T> {
    Ok(T),
    Failed { error: Value },
}

impl<T> Section<T> {
    pub fn ok(&self) -> Option<&T> {
        match self {
            Section::Ok(t) => Some(t),
            Section::Failed { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Span {
    pub start: NaiveDate,
    pub end: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Periods {
    pub boundaries: Vec<NaiveDate>,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodSummary {
    pub stream: &'static str,
    pub period: String,
    pub start: NaiveDate,
    pub n: usize,
    pub mean: f64,
    pub sd: Option<f64>,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TRow {
    pub problem: String,
    pub n1: usize,
    pub n2: usize,
    pub mean1: f64,
    pub mean2: f64,
    pub t: Option<f64>,
    pub df: Option<f64>,
    pub p: Option<f64>,
    pub alpha_used: f64,
    pub reject: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TTable {
    pub test: &'static str,
    pub first_period: String,
    pub second_period: String,
    pub alpha: f64,
    pub m: usize,
    pub alpha_used: f64,
    pub results: Vec<TRow>,
}

impl TTable {
    /// Problems whose drop is significant.
    pub fn rejected(&self) -> Vec<&str> {
        self.results
            .iter()
            .filter(|r| r.reject == Some(true))
            .map(|r| r.problem.as_str())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub name: String,
    pub n: usize,
    pub mean: f64,
    pub median: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaReport {
    pub grouping: &'static str,
    pub response: &'static str,
    pub groups: Vec<GroupSummary>,
    #[serde(rename = "F")]
    pub f: f64,
    pub df1: f64,
    pub df2: f64,
    pub p: f64,
    pub alpha: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalSummary {
    pub n: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub median: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseRow {
    pub scope: String,
    pub assignment_min: IntervalSummary,
    pub dispatch_min: IntervalSummary,
    pub arrival_min: IntervalSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub span: Span,
    pub periods: Periods,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parse: Option<ParseReport>,
    pub stream_totals: BTreeMap<&'static str, usize>,
    /// Admitted calls whose disposition is "Referred".
    pub referred_calls: usize,
    pub period_summaries: Section<Vec<PeriodSummary>>,
    pub t_tests: Section<TTable>,
    pub anova: Section<AnovaReport>,
    /// Records with timestamps out of order are excluded.
    pub response_times: Vec<ResponseRow>,
}

fn section<T>(r: Result<T>, errors: &mut Vec<Error>) -> Section<T> {
    match r {
        Ok(t) => Section::Ok(t),
        Err(e) => {
            let error = e.to_json()["error"].clone();
            errors.push(e);
            Section::Failed { error }
        }
    }
}

fn non_pandemic_admitted(l: StreamLabel) -> bool {
    l.stream == Stream::NonPandemic && l.status == Status::Admitted
}

fn period_summaries(
    records: &[IncidentRecord],
    span: &Span,
    periods: &PeriodSpec,
) -> Result<Vec<PeriodSummary>> {
    let mut rows = Vec::new();
    let streams = StreamLabel::ALL
        .iter()
        .map(|&l| (l.name(), Some(l)))
        .chain([("all", None)]);
    for (name, label) in streams {
        let series = daily_counts_by(
            records,
            |r| label.map_or(true, |l| classify_incident(r) == l),
            span.start,
            span.end,
        )?;
        for (part, period) in slice_periods(&series, periods)?
            .iter()
            .zip(periods.labels())
        {
            let s = summarize(part.values())?;
            rows.push(PeriodSummary {
                stream: name,
                period: period.clone(),
                start: part.start(),
                n: s.n,
                mean: s.mean,
                sd: s.sd,
                median: s.median,
            });
        }
    }
    Ok(rows)
}

fn row(c: Comparison, alpha_used: f64) -> TRow {
    let (t, df, p, reject, error) = match c.outcome {
        Ok(r) => (
            Some(r.statistic),
            Some(r.df),
            Some(r.p_value),
            Some(r.reject),
            None,
        ),
        Err(e) => (None, None, None, None, Some(e.to_string())),
    };
    TRow {
        problem: c.problem,
        n1: c.n1,
        n2: c.n2,
        mean1: c.mean1,
        mean2: c.mean2,
        t,
        df,
        p,
        alpha_used,
        reject,
        error,
    }
}

fn welch_family(family: &[(String, Vec<f64>, Vec<f64>)], level: f64) -> Vec<Comparison> {
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    let mut out: Vec<Comparison> = family
        .iter()
        .map(|(name, a, b)| Comparison {
            problem: name.clone(),
            n1: a.len(),
            n2: b.len(),
            mean1: mean(a),
            mean2: mean(b),
            outcome: welch_test_greater(a, b).map(|r: TestResult| r.at_level(level)),
        })
        .collect();
    let key = |c: &Comparison| {
        c.outcome
            .as_ref()
            .map(|r| r.p_value)
            .unwrap_or(f64::INFINITY)
    };
    out.sort_by(|x, y| {
        key(x)
            .total_cmp(&key(y))
            .then_with(|| x.problem.cmp(&y.problem))
    });
    out
}

/// First period against the last, per non-pandemic problem, on daily admitted counts.
fn t_table(
    records: &[IncidentRecord],
    span: &Span,
    periods: &PeriodSpec,
    cfg: &PipelineConfig,
) -> Result<TTable> {
    let labels = periods.labels();
    if labels.len() < 2 {
        return Err(
            regimecast_core::Error::param("period comparison needs at least one boundary").into(),
        );
    }
    let mut totals: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| non_pandemic_admitted(classify_incident(r)))
    {
        *totals.entry(r.problem.as_str()).or_default() += 1;
    }
    let mut family = Vec::new();
    for (&problem, _) in totals.iter().filter(|(_, &n)| n >= cfg.min_problem_calls) {
        let series = daily_counts_by(
            records,
            |r| r.problem == problem && non_pandemic_admitted(classify_incident(r)),
            span.start,
            span.end,
        )?;
        let parts = slice_periods(&series, periods)?;
        let (first, last) = (&parts[0], &parts[parts.len() - 1]);
        family.push((
            problem.to_string(),
            first.values().to_vec(),
            last.values().to_vec(),
        ));
    }
    if family.is_empty() {
        return Err(Error::Usage(format!(
            "no problem reaches {} non-pandemic admitted calls",
            cfg.min_problem_calls
        )));
    }
    let level = bonferroni(cfg.alpha, family.len())?;
    let comparisons = if cfg.welch {
        welch_family(&family, level)
    } else {
        multi_compare(&family, cfg.alpha)?
    };
    Ok(TTable {
        test: if cfg.welch { "welch" } else { "student" },
        first_period: labels[0].clone(),
        second_period: labels[labels.len() - 1].clone(),
        alpha: cfg.alpha,
        m: family.len(),
        alpha_used: level,
        results: comparisons.into_iter().map(|c| row(c, level)).collect(),
    })
}

/// Minutes from pickup to arrival for transported calls with ordered timestamps.
fn total_response(r: &IncidentRecord) -> Option<f64> {
    if !r.timestamps_ordered() {
        return None;
    }
    let (a, b) = (r.t_phone_pickup?, r.t_arrived?);
    Some((b - a).num_seconds() as f64 / 60.0)
}

fn anova(records: &[IncidentRecord], cfg: &PipelineConfig) -> Result<AnovaReport> {
    let mut groups: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in records {
        if classify_incident(r).status != Status::Admitted || r.is_referred() {
            continue;
        }
        if let Some(minutes) = total_response(r) {
            groups
                .entry(r.disposition.trim())
                .or_default()
                .push(minutes);
        }
    }
    groups.retain(|_, v| v.len() >= cfg.min_group_size.max(2));
    let names: Vec<&str> = groups.keys().copied().collect();
    let samples: Vec<Vec<f64>> = groups.into_values().collect();
    let result = anova_oneway(&samples)?.at_level(cfg.alpha);
    let summaries = names
        .iter()
        .zip(&samples)
        .map(|(name, v)| {
            let s = summarize(v)?;
            Ok(GroupSummary {
                name: name.to_string(),
                n: s.n,
                mean: s.mean,
                median: s.median,
            })
        })
        .collect::<Result<_>>()?;
    Ok(AnovaReport {
        grouping: "disposition",
        response: "pickup_to_arrival_min",
        groups: summaries,
        f: result.statistic,
        df1: result.df,
        df2: result.df2.unwrap_or(f64::NAN),
        p: result.p_value,
        alpha: cfg.alpha,
        reject: result.reject,
    })
}

fn interval_summary(values: &[f64]) -> IntervalSummary {
    match summarize(values) {
        Ok(s) => IntervalSummary {
            n: s.n,
            mean: Some(s.mean),
            sd: s.sd,
            median: Some(s.median),
        },
        Err(_) => IntervalSummary {
            n: 0,
            mean: None,
            sd: None,
            median: None,
        },
    }
}

fn response_rows(records: &[IncidentRecord], periods: &PeriodSpec) -> Vec<ResponseRow> {
    let boundaries = periods.boundaries();
    let mut scopes: Vec<(String, [Vec<f64>; 3])> = std::iter::once("all".to_string())
        .chain(periods.labels().iter().cloned())
        .map(|s| (s, Default::default()))
        .collect();
    for r in records.iter().filter(|r| r.timestamps_ordered()) {
        let Ok(i) = response_intervals(r) else {
            continue;
        };
        let period = r
            .date()
            .map(|d| 1 + boundaries.iter().filter(|&&b| d >= b).count());
        for scope in std::iter::once(0).chain(period) {
            let bins = &mut scopes[scope].1;
            for (bin, v) in bins
                .iter_mut()
                .zip([i.assignment_min, i.dispatch_min, i.arrival_min])
            {
                bin.extend(v);
            }
        }
    }
    scopes
        .into_iter()
        .map(|(scope, [a, d, r])| ResponseRow {
            scope,
            assignment_min: interval_summary(&a),
            dispatch_min: interval_summary(&d),
            arrival_min: interval_summary(&r),
        })
        .collect()
}

/// The full comparison report; failed sections are returned alongside it.
pub fn compare_records(
    records: &[IncidentRecord],
    cfg: &PipelineConfig,
) -> Result<(CompareReport, Vec<Error>)> {
    let (start, end) = date_span(records).ok_or(regimecast_core::Error::EmptySeries)?;
    let span = Span { start, end };
    let periods = PeriodSpec::new(cfg.period_boundaries.clone(), cfg.period_labels.clone())?;
    let (stream_totals, referred_calls) = label_counts(records);
    let mut errors = Vec::new();
    let period_summaries = section(period_summaries(records, &span, &periods), &mut errors);
    let t_tests = section(t_table(records, &span, &periods, cfg), &mut errors);
    let anova = section(anova(records, cfg), &mut errors);
    let report = CompareReport {
        periods: Periods {
            boundaries: periods.boundaries().to_vec(),
            labels: periods.labels().to_vec(),
        },
        span,
        parse: None,
        stream_totals,
        referred_calls,
        period_summaries,
        t_tests,
        anova,
        response_times: response_rows(records, &periods),
    };
    Ok((report, errors))
}

/// Writes `compare.json`. A failed section is reported in the file and as
/// the command's error, while the other sections are still computed.
pub fn cmd_compare(cfg: &PipelineConfig) -> Result<Outcome> {
    cfg.validate()?;
    let (records, parse) = match (cfg.synth, &cfg.inputs.incidents) {
        (Some(SynthSource::Incidents), _) => (gen_incidents(&IncidentSpec::new(cfg.seed))?, None),
        (Some(other), _) => {
            return Err(Error::Usage(format!(
                "compare supports --synth incidents only, got {other:?}"
            )))
        }
        (None, Some(path)) => {
            let table = read_incidents(path, cfg)?;
            (table.records, Some(table.report))
        }
        (None, None) => {
            return Err(Error::Usage(
                "compare needs --incidents or --synth incidents".into(),
            ))
        }
    };
    let (mut report, mut errors) = compare_records(&records, cfg)?;
    report.parse = parse;
    let error = (!errors.is_empty()).then(|| errors.remove(0));
    Ok(Outcome {
        artifacts: vec![Artifact::new("compare.json", to_json(&report)?)],
        error,
    })
}
