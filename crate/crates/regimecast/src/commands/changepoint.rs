// SPDX-License-Identifier: MIT OR Apache-2.0

use regimecast_core::synth::{
    ems_start, gen_hosp_like, gen_piecewise_normal, gen_regression_dgp, paper_ems_regimes, DgpSpec,
    RegimeSpec,
};
use regimecast_core::DailySeries;

use super::{read_incidents, Artifact, Outcome, StageOverrides, StreamSelector};
use crate::config::{PipelineConfig, StageConfig, SynthSource};
use crate::error::{Error, Result};
use crate::formats::{labels_csv, read_series, series_csv, to_json, SegmentationReport};
use crate::incidents::{gen_incidents, IncidentSpec};
use crate::ingest::{
    classify_incident, daily_counts_by, date_span, parse_hospitalization, IncidentRecord,
};

fn stream_counts(records: &[IncidentRecord], stream: StreamSelector) -> Result<DailySeries> {
    let (from, to) = date_span(records).ok_or(regimecast_core::Error::EmptySeries)?;
    daily_counts_by(records, |r| stream.accepts(classify_incident(r)), from, to)
}

/// The series a changepoint run analyses and the stage that applies to it:
/// hospitalization inputs use the hospitalization stage, everything else the EMS stage.
pub fn load_stream_series(
    cfg: &PipelineConfig,
    stream: StreamSelector,
) -> Result<(DailySeries, StageConfig)> {
    let ems = cfg.ems_stage.clone();
    let hosp = cfg.hosp_stage.clone();
    if let Some(source) = cfg.synth {
        return Ok(match source {
            SynthSource::Ems => {
                let spec = RegimeSpec {
                    start: ems_start(),
                    regimes: paper_ems_regimes(),
                    seed: cfg.seed,
                    round: false,
                };
                (gen_piecewise_normal(&spec)?, ems)
            }
            SynthSource::Hosp => (gen_hosp_like(cfg.seed), hosp),
            SynthSource::Paper => (
                gen_regression_dgp(&DgpSpec::paper(cfg.seed))?.hosp_raw,
                hosp,
            ),
            SynthSource::Incidents => (
                stream_counts(&gen_incidents(&IncidentSpec::new(cfg.seed))?, stream)?,
                ems,
            ),
        });
    }
    let i = &cfg.inputs;
    match (&i.series, &i.hospitalization, &i.incidents) {
        (Some(p), None, None) => Ok((read_series(p)?, ems)),
        (None, Some(p), None) => {
            let file = std::fs::File::open(p).map_err(|e| Error::io(p, e))?;
            Ok((parse_hospitalization(std::io::BufReader::new(file))?, hosp))
        }
        (None, None, Some(p)) => Ok((
            stream_counts(&read_incidents(p, cfg)?.records, stream)?,
            ems,
        )),
        _ => Err(Error::Usage(
            "changepoint needs exactly one of --series, --hosp, --incidents or --synth".into(),
        )),
    }
}

/// Writes `segmentation.json`, `labels.csv` and the analysed `series.csv`.
pub fn cmd_changepoint(
    cfg: &PipelineConfig,
    overrides: &StageOverrides,
    stream: StreamSelector,
) -> Result<Outcome> {
    cfg.validate()?;
    let (series, stage) = load_stream_series(cfg, stream)?;
    let stage = overrides.apply(&stage);
    let seg = stage.detect(&series)?;
    let report = SegmentationReport::new(&stage, &series, &seg)?;
    Ok(Outcome::ok(vec![
        Artifact::new("segmentation.json", to_json(&report)?),
        Artifact::new("labels.csv", labels_csv(&series, &seg)),
        Artifact::new("series.csv", series_csv(&series)),
    ]))
}
