// SPDX-License-Identifier: MIT OR Apache-2.0

use std::path::PathBuf;

use chrono::NaiveDate;
use serde_json::json;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] regimecast_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("missing mandatory column '{0}'")]
    Schema(String),
    #[error("duplicate primary keys: {}", .0.join(", "))]
    Duplicate(Vec<String>),
    #[error("gap in dates: {missing} is missing (previous row {after})")]
    Gap {
        after: NaiveDate,
        missing: NaiveDate,
    },
    #[error("record '{key}': {reason}")]
    Record { key: String, reason: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid spec: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("usage: {0}")]
    Usage(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        use regimecast_core::Error as C;
        match self {
            Error::Core(c) => match c {
                C::Parameter(_) => "parameter",
                C::EmptySeries => "empty_series",
                C::Range(_) => "range",
                C::SegmentLength { .. } => "segment_length",
                C::TooLarge { .. } => "size",
                C::Design(_) => "design",
                C::Size(_) => "size",
                C::Undefined(_) => "undefined",
                C::Domain(_) => "domain",
                C::NoFit(_) => "no_fit",
                C::Convergence { .. } => "convergence",
            },
            Error::Io { .. } => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
            Error::Schema(_) => "schema",
            Error::Duplicate(_) => "duplicate",
            Error::Gap { .. } => "gap",
            Error::Record { .. } => "record",
            Error::Config(_) => "config",
            Error::Validation(_) => "validation",
            Error::Usage(_) => "usage",
        }
    }

    /// Machine-readable form written to stderr by the CLI.
    pub fn to_json(&self) -> serde_json::Value {
        let mut detail = json!({ "kind": self.kind(), "message": self.to_string() });
        match self {
            Error::Duplicate(keys) => detail["keys"] = json!(keys),
            Error::Validation(problems) => detail["problems"] = json!(problems),
            Error::Gap { missing, .. } => detail["missing"] = json!(missing),
            Error::Schema(column) => detail["column"] = json!(column),
            _ => {}
        }
        json!({ "error": detail })
    }
}
