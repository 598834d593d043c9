// SPDX-License-Identifier: MIT OR Apache-2.0

use serde_json::json;

use super::{read_incidents, Artifact, Outcome};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::formats::to_json;
use crate::ingest::{date_span, label_counts, parse_hospitalization};

/// Parses the configured inputs and writes `ingest_report.json`.
pub fn cmd_ingest_check(cfg: &PipelineConfig) -> Result<Outcome> {
    let mut report = serde_json::Map::new();
    if let Some(path) = &cfg.inputs.incidents {
        let table = read_incidents(path, cfg)?;
        let (totals, referred) = label_counts(&table.records);
        let span = date_span(&table.records);
        report.insert(
            "incidents".into(),
            json!({
                "path": path.display().to_string(),
                "records": table.records.len(),
                "undated": table.records.iter().filter(|r| r.t_phone_pickup.is_none()).count(),
                "span": span.map(|(a, b)| json!({ "start": a, "end": b })),
                "report": table.report,
                "stream_totals": totals,
                "referred_calls": referred,
            }),
        );
    }
    if let Some(path) = &cfg.inputs.hospitalization {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let s = parse_hospitalization(std::io::BufReader::new(file))?;
        report.insert(
            "hospitalization".into(),
            json!({ "path": path.display().to_string(), "start": s.start(), "end": s.end(), "n": s.len() }),
        );
    }
    if report.is_empty() {
        return Err(Error::Usage(
            "ingest-check needs --incidents and/or --hosp".into(),
        ));
    }
    Ok(Outcome::ok(vec![Artifact::new(
        "ingest_report.json",
        to_json(&report)?,
    )]))
}
