// SPDX-License-Identifier: MIT OR Apache-2.0

//! Incident and hospitalization CSV ingestion, stream classification,
//! daily aggregation and response intervals.

mod hospitalization;

pub(crate) use hospitalization::parse_dated;
pub use hospitalization::parse_hospitalization;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{Read, Write};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use regimecast_core::DailySeries;
use serde::Serialize;

use crate::error::{Error, Result};

/// Dispositions that end a call without transport.
pub const DEFUNCT_LABELS: [&str; 7] = [
    "call cancelled",
    "no patient",
    "other",
    "refusal",
    "duplicate call",
    "false alarm call",
    "information call only",
];

const PANDEMIC_TOKEN: &str = "pandem";
const REFERRED: &str = "referred";

pub const COLUMNS: [&str; 11] = [
    "IncidentPrimaryKey",
    "Jurisdiction",
    "Problem",
    "Priority_Number",
    "Time_PhonePickUp",
    "Time_First_Unit_Assigned",
    "Time_First_Unit_Enroute",
    "Time_First_Unit_Arrived",
    "Call_Disposition",
    "Longitude",
    "Latitude",
];
const MANDATORY: [usize; 3] = [0, 2, 8];
const WRITE_FORMAT: &str = "%Y-%m-%d %H:%M:%S";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncidentRecord {
    pub primary_key: String,
    pub jurisdiction: String,
    pub problem: String,
    pub priority: Option<u8>,
    pub t_phone_pickup: Option<NaiveDateTime>,
    pub t_assigned: Option<NaiveDateTime>,
    pub t_enroute: Option<NaiveDateTime>,
    pub t_arrived: Option<NaiveDateTime>,
    pub disposition: String,
    pub longitude: Option<f64>,
    pub latitude: Option<f64>,
}

impl IncidentRecord {
    /// Calendar date of the phone pickup.
    pub fn date(&self) -> Option<NaiveDate> {
        self.t_phone_pickup.map(|t| t.date())
    }

    /// Present timestamps are non-decreasing in call order.
    pub fn timestamps_ordered(&self) -> bool {
        let present: Vec<NaiveDateTime> = [
            self.t_phone_pickup,
            self.t_assigned,
            self.t_enroute,
            self.t_arrived,
        ]
        .into_iter()
        .flatten()
        .collect();
        present.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn is_referred(&self) -> bool {
        self.disposition.trim().eq_ignore_ascii_case(REFERRED)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stream {
    Pandemic,
    NonPandemic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Admitted,
    Defunct,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StreamLabel {
    pub stream: Stream,
    pub status: Status,
}

impl StreamLabel {
    pub const ALL: [StreamLabel; 4] = [
        StreamLabel::new(Stream::NonPandemic, Status::Admitted),
        StreamLabel::new(Stream::NonPandemic, Status::Defunct),
        StreamLabel::new(Stream::Pandemic, Status::Admitted),
        StreamLabel::new(Stream::Pandemic, Status::Defunct),
    ];

    pub const fn new(stream: Stream, status: Status) -> Self {
        Self { stream, status }
    }

    pub fn name(self) -> &'static str {
        match (self.stream, self.status) {
            (Stream::NonPandemic, Status::Admitted) => "non_pandemic_admitted",
            (Stream::NonPandemic, Status::Defunct) => "non_pandemic_defunct",
            (Stream::Pandemic, Status::Admitted) => "pandemic_admitted",
            (Stream::Pandemic, Status::Defunct) => "pandemic_defunct",
        }
    }
}

/// Stream and status from the raw problem and disposition strings.
pub fn classify(problem: &str, disposition: &str) -> StreamLabel {
    let disposition = disposition.trim().to_lowercase();
    let status = if DEFUNCT_LABELS.contains(&disposition.as_str()) {
        Status::Defunct
    } else {
        Status::Admitted
    };
    let stream = if problem.to_lowercase().contains(PANDEMIC_TOKEN) {
        Stream::Pandemic
    } else {
        Stream::NonPandemic
    };
    StreamLabel { stream, status }
}

pub fn classify_incident(record: &IncidentRecord) -> StreamLabel {
    classify(&record.problem, &record.disposition)
}

/// Timestamp parsing: a fixed chrono pattern, or ISO-8601 /
/// `YYYY-MM-DD HH:MM:SS` when none is configured.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TimestampFormat(pub Option<String>);

impl TimestampFormat {
    pub fn parse(&self, s: &str) -> Option<NaiveDateTime> {
        let s = s.trim();
        if s.is_empty() {
            return None;
        }
        if let Some(p) = &self.0 {
            return NaiveDateTime::parse_from_str(s, p).ok();
        }
        ["%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M:%S%.f"]
            .iter()
            .find_map(|p| NaiveDateTime::parse_from_str(s, p).ok())
            // offsets are dropped: local wall-clock time is kept as written
            .or_else(|| {
                DateTime::parse_from_rfc3339(s)
                    .ok()
                    .map(|t| t.naive_local())
            })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ParseReport {
    pub rows_read: usize,
    pub rows_rejected: usize,
    pub reasons: BTreeMap<String, usize>,
    /// Keys of retained records whose timestamps run backwards.
    pub flagged_keys: Vec<String>,
    pub unparsed_timestamps: usize,
}

impl ParseReport {
    fn reject(&mut self, reason: &str) {
        self.rows_rejected += 1;
        *self.reasons.entry(reason.to_string()).or_default() += 1;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncidentTable {
    pub records: Vec<IncidentRecord>,
    pub report: ParseReport,
}

/// Parses an incident CSV. Header names match case-insensitively after
/// trimming; unknown columns are ignored.
pub fn parse_incidents<R: Read>(source: R, format: &TimestampFormat) -> Result<IncidentTable> {
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(source);
    let headers = reader.headers()?.clone();
    let position: Vec<Option<usize>> = COLUMNS
        .iter()
        .map(|c| {
            headers
                .iter()
                .position(|h| h.trim().eq_ignore_ascii_case(c))
        })
        .collect();
    if let Some(&m) = MANDATORY.iter().find(|&&m| position[m].is_none()) {
        return Err(Error::Schema(COLUMNS[m].to_string()));
    }

    let mut report = ParseReport::default();
    let mut records = Vec::new();
    for row in reader.records() {
        report.rows_read += 1;
        let row = match row {
            Ok(r) if r.len() == headers.len() => r,
            _ => {
                report.reject("malformed_row");
                continue;
            }
        };
        let field = |i: usize| position[i].and_then(|p| row.get(p)).unwrap_or("");
        let key = field(0);
        if key.trim().is_empty() {
            report.reject("missing_primary_key");
            continue;
        }
        if field(2).trim().is_empty() {
            report.reject("missing_problem");
            continue;
        }
        if field(8).trim().is_empty() {
            report.reject("missing_disposition");
            continue;
        }
        let priority = match field(3).trim() {
            "" => None,
            p => match p.parse::<u8>() {
                Ok(v) if (1..=15).contains(&v) => Some(v),
                _ => {
                    report.reject("invalid_priority");
                    continue;
                }
            },
        };
        let mut stamp = |i: usize| {
            let raw = field(i);
            let t = format.parse(raw);
            if t.is_none() && !raw.trim().is_empty() {
                report.unparsed_timestamps += 1;
            }
            t
        };
        let record = IncidentRecord {
            primary_key: key.to_string(),
            jurisdiction: field(1).to_string(),
            problem: field(2).to_string(),
            priority,
            t_phone_pickup: stamp(4),
            t_assigned: stamp(5),
            t_enroute: stamp(6),
            t_arrived: stamp(7),
            disposition: field(8).to_string(),
            longitude: field(9).trim().parse().ok(),
            latitude: field(10).trim().parse().ok(),
        };
        if !record.timestamps_ordered() {
            report.flagged_keys.push(record.primary_key.clone());
        }
        records.push(record);
    }

    let mut seen = HashSet::new();
    let mut duplicates: Vec<String> = records
        .iter()
        .filter(|r| !seen.insert(r.primary_key.as_str()))
        .map(|r| r.primary_key.clone())
        .collect();
    if !duplicates.is_empty() {
        duplicates.sort();
        duplicates.dedup();
        return Err(Error::Duplicate(duplicates));
    }
    Ok(IncidentTable { records, report })
}

/// Writes records with the canonical header; [`parse_incidents`] reads them back unchanged.
pub fn write_incidents<W: Write>(dest: W, records: &[IncidentRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(dest);
    w.write_record(COLUMNS)?;
    let stamp = |t: Option<NaiveDateTime>| {
        t.map(|t| t.format(WRITE_FORMAT).to_string())
            .unwrap_or_default()
    };
    let opt = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in records {
        w.write_record([
            r.primary_key.clone(),
            r.jurisdiction.clone(),
            r.problem.clone(),
            r.priority.map(|p| p.to_string()).unwrap_or_default(),
            stamp(r.t_phone_pickup),
            stamp(r.t_assigned),
            stamp(r.t_enroute),
            stamp(r.t_arrived),
            r.disposition.clone(),
            opt(r.longitude),
            opt(r.latitude),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<incident csv>", e))?;
    Ok(())
}

/// Daily counts over `from..=to` of records accepted by `keep`, keyed by
/// pickup date. Records without a pickup time are not counted.
pub fn daily_counts_by(
    records: &[IncidentRecord],
    keep: impl Fn(&IncidentRecord) -> bool,
    from: NaiveDate,
    to: NaiveDate,
) -> Result<DailySeries> {
    if to < from {
        return Err(
            regimecast_core::Error::Range(format!("calendar {from}..{to} is empty")).into(),
        );
    }
    let len = (to - from).num_days() as usize + 1;
    let mut values = vec![0.0; len];
    for r in records.iter().filter(|r| keep(r)) {
        let Some(day) = r.date() else { continue };
        if day < from || day > to {
            return Err(Error::Record {
                key: r.primary_key.clone(),
                reason: format!("pickup date {day} outside calendar {from}..{to}"),
            });
        }
        values[(day - from).num_days() as usize] += 1.0;
    }
    Ok(DailySeries::new(from, values)?)
}

/// Daily counts of records whose stream label satisfies `filter`.
pub fn daily_counts(
    records: &[IncidentRecord],
    filter: impl Fn(StreamLabel) -> bool,
    from: NaiveDate,
    to: NaiveDate,
) -> Result<DailySeries> {
    daily_counts_by(records, |r| filter(classify_incident(r)), from, to)
}

/// Earliest and latest pickup dates.
pub fn date_span(records: &[IncidentRecord]) -> Option<(NaiveDate, NaiveDate)> {
    let mut dates = records.iter().filter_map(IncidentRecord::date);
    let first = dates.next()?;
    Some(dates.fold((first, first), |(lo, hi), d| (lo.min(d), hi.max(d))))
}

/// Record counts per stream label, plus referred calls (counted inside admitted).
pub fn label_counts(records: &[IncidentRecord]) -> (BTreeMap<&'static str, usize>, usize) {
    let mut by: HashMap<StreamLabel, usize> = HashMap::new();
    for r in records {
        *by.entry(classify_incident(r)).or_default() += 1;
    }
    let counts = StreamLabel::ALL
        .iter()
        .map(|l| (l.name(), by.get(l).copied().unwrap_or(0)))
        .collect();
    (counts, records.iter().filter(|r| r.is_referred()).count())
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ResponseIntervals {
    pub assignment_min: Option<f64>,
    pub dispatch_min: Option<f64>,
    pub arrival_min: Option<f64>,
}

/// Minutes between consecutive call stages; absent where a bound is missing.
pub fn response_intervals(record: &IncidentRecord) -> Result<ResponseIntervals> {
    let gap =
        |a: Option<NaiveDateTime>, b: Option<NaiveDateTime>, name: &str| -> Result<Option<f64>> {
            match (a, b) {
                (Some(a), Some(b)) => {
                    let minutes = (b - a).num_seconds() as f64 / 60.0;
                    if minutes < 0.0 {
                        return Err(Error::Record {
                            key: record.primary_key.clone(),
                            reason: format!("negative {name} interval"),
                        });
                    }
                    Ok(Some(minutes))
                }
                _ => Ok(None),
            }
        };
    Ok(ResponseIntervals {
        assignment_min: gap(record.t_phone_pickup, record.t_assigned, "assignment")?,
        dispatch_min: gap(record.t_assigned, record.t_enroute, "dispatch")?,
        arrival_min: gap(record.t_enroute, record.t_arrived, "arrival")?,
    })
}
