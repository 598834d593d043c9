// SPDX-License-Identifier: MIT OR Apache-2.0

use std::hash::{BuildHasher, RandomState};

use chrono::NaiveDate;
use clap::ValueEnum;
use regimecast_core::synth::{
    ems_start, gen_hosp_like_with, gen_piecewise_normal, gen_regression_dgp, hosp_start,
    paper_ems_regimes, simulate_inar1, DgpSpec, HospSpec, Regime, RegimeSpec,
};
use serde_json::{json, Map, Value};

use super::{Artifact, Outcome};
use crate::error::{Error, Result};
use crate::formats::{series_csv, to_json};
use crate::incidents::{gen_incidents, IncidentSpec};
use crate::ingest::write_incidents;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SynthPreset {
    /// Three EMS demand regimes.
    Ems,
    /// Four-regime hospitalization series.
    Hosp,
    /// Regression data with the published coefficients.
    Paper,
    /// INAR(1) counts, alpha 0.5, lambda 5.
    Inar1,
    /// Incident table.
    Incidents,
}

impl SynthPreset {
    fn kind(self) -> &'static str {
        match self {
            SynthPreset::Ems => "regimes",
            SynthPreset::Hosp => "hosp",
            SynthPreset::Paper => "regression",
            SynthPreset::Inar1 => "inar1",
            SynthPreset::Incidents => "incidents",
        }
    }
}

/// Field reader that records every problem instead of stopping at the first.
struct Fields<'a> {
    obj: &'a Map<String, Value>,
    seen: Vec<&'static str>,
    problems: Vec<String>,
}

impl<'a> Fields<'a> {
    fn new(obj: &'a Map<String, Value>) -> Self {
        Self {
            obj,
            seen: vec!["kind", "seed"],
            problems: Vec::new(),
        }
    }

    fn get(&mut self, name: &'static str) -> Option<&'a Value> {
        self.seen.push(name);
        self.obj.get(name).filter(|v| !v.is_null())
    }

    fn problem(&mut self, name: &str, msg: impl std::fmt::Display) {
        self.problems.push(format!("{name}: {msg}"));
    }

    fn number(
        &mut self,
        name: &'static str,
        default: f64,
        ok: impl Fn(f64) -> bool,
        rule: &str,
    ) -> f64 {
        let Some(v) = self.get(name) else {
            return default;
        };
        match v.as_f64() {
            Some(x) if ok(x) => x,
            _ => {
                self.problem(name, format!("expected {rule}, got {v}"));
                default
            }
        }
    }

    fn count(&mut self, name: &'static str, default: usize, min: usize) -> usize {
        let Some(v) = self.get(name) else {
            return default;
        };
        match v.as_u64() {
            Some(x) if x as usize >= min => x as usize,
            _ => {
                self.problem(name, format!("expected an integer >= {min}, got {v}"));
                default
            }
        }
    }

    fn flag(&mut self, name: &'static str, default: bool) -> bool {
        let Some(v) = self.get(name) else {
            return default;
        };
        v.as_bool().unwrap_or_else(|| {
            self.problem(name, format!("expected true or false, got {v}"));
            default
        })
    }

    fn date(&mut self, name: &'static str, default: NaiveDate) -> NaiveDate {
        let Some(v) = self.get(name) else {
            return default;
        };
        match v
            .as_str()
            .and_then(|s| NaiveDate::parse_from_str(s, "%Y-%m-%d").ok())
        {
            Some(d) => d,
            None => {
                self.problem(name, format!("expected a YYYY-MM-DD date, got {v}"));
                default
            }
        }
    }

    fn numbers(&mut self, name: &'static str, default: &[f64], len: Option<usize>) -> Vec<f64> {
        let Some(v) = self.get(name) else {
            return default.to_vec();
        };
        let parsed: Option<Vec<f64>> = v
            .as_array()
            .and_then(|a| a.iter().map(Value::as_f64).collect());
        match parsed {
            Some(xs) if len.is_none_or_eq(xs.len()) => xs,
            _ => {
                let shape = len.map_or("an array of numbers".to_string(), |n| {
                    format!("{n} numbers")
                });
                self.problem(name, format!("expected {shape}, got {v}"));
                default.to_vec()
            }
        }
    }

    fn finish(self) -> Result<()> {
        let mut problems = self.problems;
        for key in self.obj.keys() {
            if !self.seen.contains(&key.as_str()) {
                problems.push(format!("{key}: unknown field"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }
}

trait LenRule {
    fn is_none_or_eq(&self, n: usize) -> bool;
}

impl LenRule for Option<usize> {
    fn is_none_or_eq(&self, n: usize) -> bool {
        self.map_or(true, |m| m == n)
    }
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

fn non_negative(x: f64) -> bool {
    x >= 0.0 && x.is_finite()
}

fn random_seed() -> u64 {
    RandomState::new().hash_one(std::time::SystemTime::now())
}

/// Fills defaults and the seed, checks every field and returns the resolved
/// spec, which regenerates the same output when fed back.
pub fn resolve_spec(spec: &Value, seed_flag: Option<u64>) -> Result<Value> {
    let obj = spec
        .as_object()
        .ok_or_else(|| Error::Validation(vec!["spec must be a JSON object".into()]))?;
    let mut f = Fields::new(obj);
    let seed = match (seed_flag, obj.get("seed")) {
        (Some(s), _) => s,
        (None, None | Some(Value::Null)) => random_seed(),
        (None, Some(v)) => v.as_u64().unwrap_or_else(|| {
            f.problem(
                "seed",
                format!("expected an unsigned 64-bit integer, got {v}"),
            );
            0
        }),
    };
    let kind = match obj.get("kind").and_then(Value::as_str) {
        Some(k) => k,
        None => {
            f.problem(
                "kind",
                "expected one of regimes, hosp, regression, inar1, incidents",
            );
            return Err(Error::Validation(f.problems));
        }
    };
    let resolved = match kind {
        "regimes" => {
            let start = f.date("start", ems_start());
            let round = f.flag("round", false);
            let regimes = match f.get("regimes") {
                None => paper_ems_regimes(),
                Some(v) => regimes_field(&mut f, v),
            };
            let list: Vec<Value> = regimes
                .iter()
                .map(|r| json!({ "len": r.len, "mean": r.mean, "sd": r.sd }))
                .collect();
            json!({ "kind": kind, "start": start, "regimes": list, "round": round, "seed": seed })
        }
        "hosp" => {
            let d = HospSpec::default();
            let levels = f.numbers("levels", &d.levels, Some(4));
            let sds = f.numbers("sds", &d.sds, Some(4));
            if sds.iter().any(|&s| !positive(s)) {
                f.problem("sds", "every SD must be positive");
            }
            json!({ "kind": kind, "levels": levels, "sds": sds, "seed": seed })
        }
        "regression" => {
            let d = DgpSpec::paper(seed);
            let start = f.date("start", hosp_start());
            let n = f.count("n", d.n, 4);
            let coefficients = f.numbers("coefficients", &d.coefficients, None);
            let offsets_f: Vec<f64> = d.offsets.iter().map(|&o| o as f64).collect();
            let offsets = f.numbers("offsets", &offsets_f, None);
            if offsets.iter().any(|o| o.fract() != 0.0 || *o < 1.0) {
                f.problem("offsets", "expected positive integer day offsets");
            } else if offsets.windows(2).any(|w| w[0] >= w[1]) {
                f.problem("offsets", "must be strictly increasing");
            } else if offsets.iter().any(|&o| o as usize >= n) {
                f.problem("offsets", format!("must be below n = {n}"));
            }
            if coefficients.len() != offsets.len() + 2 {
                f.problem(
                    "coefficients",
                    format!(
                        "need {} values for {} offsets",
                        offsets.len() + 2,
                        offsets.len()
                    ),
                );
            }
            let noise_sd = f.number("noise_sd", d.noise_sd, non_negative, "a number >= 0");
            let hosp_window = f.count("hosp_window", d.hosp_window, 1);
            json!({
                "kind": kind, "start": start, "n": n, "coefficients": coefficients,
                "offsets": offsets.iter().map(|&o| o as u64).collect::<Vec<_>>(),
                "noise_sd": noise_sd, "hosp_window": hosp_window, "seed": seed,
            })
        }
        "inar1" => {
            let alpha = f.number(
                "alpha",
                0.5,
                |a| (0.0..=1.0).contains(&a),
                "a number in [0, 1]",
            );
            let lambda = f.number("lambda", 5.0, non_negative, "a number >= 0");
            let n = f.count("n", 1000, 1);
            json!({ "kind": kind, "alpha": alpha, "lambda": lambda, "n": n, "seed": seed })
        }
        "incidents" => {
            let d = IncidentSpec::new(seed);
            let start = f.date("start", d.start);
            let end = f.date("end", d.end);
            if end < start {
                f.problem("end", format!("{end} precedes start {start}"));
            }
            let scale = f.number("scale", d.scale, positive, "a positive number");
            json!({ "kind": kind, "start": start, "end": end, "scale": scale, "boundaries": d.boundaries, "seed": seed })
        }
        other => {
            f.problem("kind", format!("unknown kind '{other}'"));
            Value::Null
        }
    };
    if kind == "incidents" {
        // boundaries are fixed by the generator but may be echoed back
        f.get("boundaries");
    }
    f.finish()?;
    Ok(resolved)
}

fn regimes_field(f: &mut Fields, v: &Value) -> Vec<Regime> {
    let Some(items) = v.as_array().filter(|a| !a.is_empty()) else {
        f.problem("regimes", "expected a non-empty array of {len, mean, sd}");
        return Vec::new();
    };
    let mut out = Vec::new();
    for (i, item) in items.iter().enumerate() {
        let len = item.get("len").and_then(Value::as_u64);
        let mean = item.get("mean").and_then(Value::as_f64);
        let sd = item.get("sd").and_then(Value::as_f64);
        if !len.is_some_and(|l| l >= 2) {
            f.problem(&format!("regimes[{i}].len"), "expected an integer >= 2");
        }
        if !mean.is_some_and(f64::is_finite) {
            f.problem(&format!("regimes[{i}].mean"), "expected a finite number");
        }
        if !sd.is_some_and(positive) {
            f.problem(&format!("regimes[{i}].sd"), "expected a positive number");
        }
        if let (Some(len), Some(mean), Some(sd)) = (len, mean, sd) {
            out.push(Regime::new(len as usize, mean, sd));
        }
    }
    out
}

fn date_of(v: &Value) -> NaiveDate {
    serde_json::from_value(v.clone()).expect("resolved spec holds valid dates")
}

fn floats(v: &Value) -> Vec<f64> {
    serde_json::from_value(v.clone()).expect("resolved spec holds numbers")
}

fn uint(v: &Value) -> u64 {
    v.as_u64().expect("resolved spec holds integers")
}

/// Generates from a spec (or a preset) and writes the series files plus
/// `spec.json`, the resolved spec with its seed.
pub fn cmd_synth(
    spec: Option<&Value>,
    preset: Option<SynthPreset>,
    seed_flag: Option<u64>,
) -> Result<Outcome> {
    let spec = match (spec, preset) {
        (Some(s), None) => s.clone(),
        (None, Some(p)) => json!({ "kind": p.kind() }),
        _ => {
            return Err(Error::Usage(
                "synth needs exactly one of SPEC or --preset".into(),
            ))
        }
    };
    let r = resolve_spec(&spec, seed_flag)?;
    let seed = uint(&r["seed"]);
    let mut artifacts = Vec::new();
    match r["kind"].as_str().expect("resolved kind") {
        "regimes" => {
            let regimes = r["regimes"]
                .as_array()
                .expect("resolved regimes")
                .iter()
                .map(|g| {
                    Regime::new(
                        uint(&g["len"]) as usize,
                        g["mean"].as_f64().unwrap(),
                        g["sd"].as_f64().unwrap(),
                    )
                })
                .collect();
            let s = gen_piecewise_normal(&RegimeSpec {
                start: date_of(&r["start"]),
                regimes,
                seed,
                round: r["round"].as_bool().unwrap_or(false),
            })?;
            artifacts.push(Artifact::new("series.csv", series_csv(&s)));
        }
        "hosp" => {
            let (l, s) = (floats(&r["levels"]), floats(&r["sds"]));
            let spec = HospSpec {
                levels: [l[0], l[1], l[2], l[3]],
                sds: [s[0], s[1], s[2], s[3]],
            };
            // normal draws can go negative, so this is a plain series rather than a count file
            artifacts.push(Artifact::new(
                "series.csv",
                series_csv(&gen_hosp_like_with(&spec, seed)?),
            ));
        }
        "regression" => {
            let spec = DgpSpec {
                start: date_of(&r["start"]),
                n: uint(&r["n"]) as usize,
                coefficients: floats(&r["coefficients"]),
                offsets: floats(&r["offsets"]).iter().map(|&o| o as usize).collect(),
                noise_sd: r["noise_sd"].as_f64().unwrap(),
                hosp_window: uint(&r["hosp_window"]) as usize,
                seed,
            };
            let sample = gen_regression_dgp(&spec)?;
            artifacts.push(Artifact::new(
                "hospitalization.csv",
                series_csv(&sample.hosp_raw),
            ));
            artifacts.push(Artifact::new("calls.csv", series_csv(&sample.target)));
        }
        "inar1" => {
            let s = simulate_inar1(
                r["alpha"].as_f64().unwrap(),
                r["lambda"].as_f64().unwrap(),
                uint(&r["n"]) as usize,
                seed,
            )?;
            artifacts.push(Artifact::new("series.csv", series_csv(&s)));
        }
        "incidents" => {
            let mut spec = IncidentSpec::new(seed);
            spec.start = date_of(&r["start"]);
            spec.end = date_of(&r["end"]);
            spec.scale = r["scale"].as_f64().unwrap();
            let mut bytes = Vec::new();
            write_incidents(&mut bytes, &gen_incidents(&spec)?)?;
            artifacts.push(Artifact::new("incidents.csv", bytes));
        }
        _ => unreachable!("resolve_spec rejects unknown kinds"),
    }
    artifacts.push(Artifact::new("spec.json", to_json(&r)?));
    Ok(Outcome::ok(artifacts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists_every_bad_field() {
        let spec = json!({ "kind": "regimes", "regimes": [{ "len": 1, "mean": 0.0, "sd": -1.0 }], "colour": 3 });
        let Err(Error::Validation(p)) = resolve_spec(&spec, Some(1)) else {
            panic!()
        };
        assert_eq!(p.len(), 3, "{p:?}");
    }

    #[test]
    fn resolved_spec_is_a_fixed_point() {
        for kind in ["regimes", "hosp", "regression", "inar1", "incidents"] {
            let r = resolve_spec(&json!({ "kind": kind }), Some(9)).unwrap();
            assert_eq!(resolve_spec(&r, None).unwrap(), r, "{kind}");
        }
    }

    #[test]
    fn missing_seed_is_generated() {
        let r = resolve_spec(&json!({ "kind": "inar1" }), None).unwrap();
        assert!(r["seed"].is_u64());
    }
}
