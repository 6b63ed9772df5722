use chrono::NaiveDateTime;
use serde::Serialize;

use super::record::{HourlyRecord, TimeSeries, Variable};

/// One value outside its physical range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeViolation {
    pub index: usize,
    pub timestamp: NaiveDateTime,
    pub variable: Variable,
    pub value: f64,
    pub rule: &'static str,
}

/// Report-only validation result; nothing is repaired or dropped.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub records: usize,
    pub range_violations: Vec<RangeViolation>,
    /// Records whose cloud type is absent.
    pub missing_cloud_type: usize,
    /// Records with any non-finite measurement.
    pub non_finite_rows: usize,
    pub duplicate_timestamps: Vec<NaiveDateTime>,
    pub non_monotone_timestamps: usize,
}

impl ValidationReport {
    /// Records carrying at least one missing value (absent cloud type or NaN).
    pub fn rows_with_missing_values(&self) -> usize {
        self.missing_cloud_type + self.non_finite_rows
    }

    pub fn is_clean(&self) -> bool {
        self.range_violations.is_empty()
            && self.rows_with_missing_values() == 0
            && self.duplicate_timestamps.is_empty()
            && self.non_monotone_timestamps == 0
    }
}

type Rule = (Variable, f64, f64, &'static str);

const RULES: [Rule; 11] = [
    (Variable::ClearskyDhi, 0.0, f64::INFINITY, ">= 0"),
    (Variable::ClearskyDni, 0.0, f64::INFINITY, ">= 0"),
    (Variable::ClearskyGhi, 0.0, f64::INFINITY, ">= 0"),
    (Variable::Dhi, 0.0, f64::INFINITY, ">= 0"),
    (Variable::Dni, 0.0, f64::INFINITY, ">= 0"),
    (Variable::Ghi, 0.0, f64::INFINITY, ">= 0"),
    (Variable::RelativeHumidity, 0.0, 100.0, "in [0, 100]"),
    (Variable::WindDirection, 0.0, 360.0, "in [0, 360]"),
    (Variable::WindSpeed, 0.0, f64::INFINITY, ">= 0"),
    (Variable::SolarZenithAngle, 0.0, 180.0, "in [0, 180]"),
    (Variable::SurfaceAlbedo, 0.0, 1.0, "in [0, 1]"),
];

pub fn validate(series: &TimeSeries) -> ValidationReport {
    validate_records(series.records())
}

pub(crate) fn validate_records(records: &[HourlyRecord]) -> ValidationReport {
    let mut report = ValidationReport {
        records: records.len(),
        ..Default::default()
    };
    for (index, r) in records.iter().enumerate() {
        for (variable, lo, hi, rule) in RULES {
            let value = r.get(variable).expect("ranged variables are always present");
            if value.is_finite() && !(lo..=hi).contains(&value) {
                report.range_violations.push(RangeViolation {
                    index,
                    timestamp: r.timestamp,
                    variable,
                    value,
                    rule,
                });
            }
        }
        if r.cloud_type.is_none() {
            report.missing_cloud_type += 1;
        }
        let non_finite = Variable::MEASUREMENTS
            .iter()
            .filter_map(|&v| r.get(v))
            .any(|x| !x.is_finite());
        if non_finite {
            report.non_finite_rows += 1;
        }
    }
    for pair in records.windows(2) {
        if pair[1].timestamp == pair[0].timestamp {
            if report.duplicate_timestamps.last() != Some(&pair[1].timestamp) {
                report.duplicate_timestamps.push(pair[1].timestamp);
            }
        } else if pair[1].timestamp < pair[0].timestamp {
            report.non_monotone_timestamps += 1;
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    #[test]
    fn humidity_out_of_range_is_flagged() {
        let mut records = synthetic::constant_series(3, 20.0).into_records();
        records[1].relative_humidity = 120.0;
        let report = validate(&TimeSeries::new(records, "t", 0));
        assert_eq!(report.range_violations.len(), 1);
        let v = &report.range_violations[0];
        assert_eq!(v.variable, Variable::RelativeHumidity);
        assert_eq!(v.value, 120.0);
    }

    #[test]
    fn duplicate_timestamps_are_flagged() {
        let mut records = synthetic::constant_series(3, 20.0).into_records();
        records[2].timestamp = records[1].timestamp;
        let report = validate(&TimeSeries::new(records, "t", 0));
        assert_eq!(report.duplicate_timestamps.len(), 1);
        assert!(!report.is_clean());
    }

    #[test]
    fn missing_values_are_counted() {
        let mut records = synthetic::constant_series(4, 20.0).into_records();
        records[0].cloud_type = None;
        records[3].temperature = f64::NAN;
        let report = validate(&TimeSeries::new(records, "t", 0));
        assert_eq!(report.missing_cloud_type, 1);
        assert_eq!(report.non_finite_rows, 1);
        assert_eq!(report.rows_with_missing_values(), 2);
    }

    #[test]
    fn unsorted_input_is_reported() {
        let mut records = synthetic::constant_series(3, 20.0).into_records();
        records.swap(0, 1);
        let report = validate_records(&records);
        assert_eq!(report.non_monotone_timestamps, 1);
    }

    #[test]
    fn clean_series() {
        assert!(validate(&synthetic::constant_series(24, 1.0)).is_clean());
    }
}
