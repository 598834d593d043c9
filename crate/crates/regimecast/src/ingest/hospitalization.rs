// SPDX-License-Identifier: MIT OR Apache-2.0

use std::io::Read;

use chrono::NaiveDate;
use regimecast_core::DailySeries;

use crate::error::{Error, Result};

fn bad_row(line: usize, reason: String) -> Error {
    Error::Record {
        key: format!("line {line}"),
        reason,
    }
}

/// Parses a `date,count` CSV into a contiguous daily series. A `value`
/// column is accepted in place of `count`, so generated series files load too.
pub fn parse_hospitalization<R: Read>(source: R) -> Result<DailySeries> {
    parse_dated(source, &["count", "value"], true)
}

/// Contiguous `date,<value>` CSV; the first of `value_names` present is read.
pub(crate) fn parse_dated<R: Read>(
    source: R,
    value_names: &[&str],
    non_negative: bool,
) -> Result<DailySeries> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Schema(name.to_string()))
    };
    let date_col = col("date")?;
    let count_col = value_names
        .iter()
        .find_map(|n| col(n).ok())
        .ok_or_else(|| Error::Schema(value_names[0].to_string()))?;

    let mut start: Option<NaiveDate> = None;
    let mut last: Option<NaiveDate> = None;
    let mut values = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let raw_date = row.get(date_col).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d")
            .map_err(|_| bad_row(line, format!("bad date {raw_date:?}")))?;
        let raw_count = row.get(count_col).unwrap_or("");
        let count: f64 = raw_count
            .parse()
            .ok()
            .filter(|c: &f64| !c.is_nan())
            .ok_or_else(|| bad_row(line, format!("bad count {raw_count:?}")))?;
        if !count.is_finite() || (non_negative && count < 0.0) {
            return Err(regimecast_core::Error::Domain(format!(
                "count {count} on {date} is not a non-negative number"
            ))
            .into());
        }
        if let Some(prev) = last {
            if date <= prev {
                return Err(regimecast_core::Error::param(format!(
                    "dates must increase: {date} follows {prev}"
                ))
                .into());
            }
            let step = (date - prev).num_days();
            if step > 1 {
                return Err(Error::Gap {
                    after: prev,
                    missing: prev + chrono::Days::new(1),
                });
            }
        }
        start.get_or_insert(date);
        last = Some(date);
        values.push(count);
    }
    let start = start.ok_or(regimecast_core::Error::EmptySeries)?;
    Ok(DailySeries::new(start, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contiguous_rows() {
        let s =
            parse_hospitalization("date,count\n2020-04-09,5\n2020-04-10,7\n".as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.values(), &[5.0, 7.0]);
    }

    #[test]
    fn gap_names_missing_date() {
        let err = parse_hospitalization("date,count\n2020-04-09,5\n2020-04-11,7\n".as_bytes())
            .unwrap_err();
        match err {
            Error::Gap { missing, .. } => {
                assert_eq!(missing, NaiveDate::from_ymd_opt(2020, 4, 10).unwrap())
            }
            e => panic!("{e:?}"),
        }
    }

    #[test]
    fn rejects_negative_and_unordered() {
        assert_eq!(
            parse_hospitalization("date,count\n2020-04-09,-1\n".as_bytes())
                .unwrap_err()
                .kind(),
            "domain"
        );
        assert!(
            parse_hospitalization("date,count\n2020-04-10,1\n2020-04-09,1\n".as_bytes()).is_err()
        );
        assert!(parse_hospitalization("date,count\n".as_bytes()).is_err());
        assert!(parse_hospitalization("day,count\n2020-04-09,1\n".as_bytes()).is_err());
    }
}
