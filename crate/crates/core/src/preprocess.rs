//! Timestamp alignment, daytime filtering, holdout/train/test splits,
//! seasonal partitions and feature scalers.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use chrono::{Duration, Timelike};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ingest::TimeSeries;
use crate::{Error, Result};

/// First and last hour (inclusive) kept by [`filter_daytime`].
pub const DAYTIME_HOURS: (u32, u32) = (7, 18);

/// Moves every timestamp forward by `minutes`. Records not stamped at half
/// past the hour are counted and logged.
pub fn shift_timestamps(ts: &TimeSeries, minutes: i64) -> TimeSeries {
    let off = off_half_hour_count(ts);
    if off > 0 {
        tracing::warn!(records = off, "timestamps not at half past the hour before shifting");
    }
    let records = ts
        .records()
        .iter()
        .map(|r| {
            let mut r = r.clone();
            r.timestamp += Duration::minutes(minutes);
            r
        })
        .collect();
    ts.derive(records)
}

/// Number of records whose minute is not 30.
pub fn off_half_hour_count(ts: &TimeSeries) -> usize {
    ts.records().iter().filter(|r| r.timestamp.minute() != 30).count()
}

pub fn is_daytime_hour(hour: u32) -> bool {
    (DAYTIME_HOURS.0..=DAYTIME_HOURS.1).contains(&hour)
}

/// Keeps records with hour in 7..=18.
pub fn filter_daytime(ts: &TimeSeries) -> TimeSeries {
    ts.filter(|r| is_daytime_hour(r.hour()))
}

/// Alignment and night removal in one step.
pub fn align_daytime(ts: &TimeSeries) -> TimeSeries {
    filter_daytime(&shift_timestamps(ts, 30))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Season {
    #[default]
    Annual,
    Wet,
    Dry,
}

impl Season {
    pub const ALL: [Season; 3] = [Season::Annual, Season::Wet, Season::Dry];

    pub fn as_str(self) -> &'static str {
        match self {
            Season::Annual => "annual",
            Season::Wet => "wet",
            Season::Dry => "dry",
        }
    }

    pub fn contains_month(self, month: u32, spec: &SplitSpec) -> bool {
        match self {
            Season::Annual => true,
            Season::Wet => spec.wet_months.contains(&month),
            Season::Dry => spec.dry_months.contains(&month),
        }
    }
}

impl fmt::Display for Season {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Season {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "annual" => Ok(Season::Annual),
            "wet" => Ok(Season::Wet),
            "dry" => Ok(Season::Dry),
            other => Err(Error::Config(format!(
                "unknown season '{other}' (expected annual, wet or dry)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// Seeded uniform shuffle of rows.
    #[default]
    Random,
    /// Earliest rows train, latest rows test.
    Chronological,
}

impl FromStr for SplitMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" => Ok(SplitMode::Random),
            "chronological" => Ok(SplitMode::Chronological),
            other => Err(Error::Config(format!(
                "unknown split mode '{other}' (expected random or chronological)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitSpec {
    pub validation_year: i32,
    pub train_fraction: f64,
    pub shuffle_seed: u64,
    pub wet_months: BTreeSet<u32>,
    pub dry_months: BTreeSet<u32>,
    pub mode: SplitMode,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::with_wet_months((5..=10).collect(), 42)
    }
}

impl SplitSpec {
    /// Spec whose dry season is the complement of `wet_months`.
    pub fn with_wet_months(wet_months: BTreeSet<u32>, seed: u64) -> Self {
        let dry_months = (1..=12).filter(|m| !wet_months.contains(m)).collect();
        SplitSpec {
            validation_year: 2022,
            train_fraction: 0.8,
            shuffle_seed: seed,
            wet_months,
            dry_months,
            mode: SplitMode::Random,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "train_fraction {} outside (0, 1)",
                self.train_fraction
            )));
        }
        let all: BTreeSet<u32> = (1..=12).collect();
        let union: BTreeSet<u32> = self.wet_months.union(&self.dry_months).copied().collect();
        if union != all || !self.wet_months.is_disjoint(&self.dry_months) {
            return Err(Error::InvalidParameter(format!(
                "wet months {:?} and dry months {:?} must partition 1..=12",
                self.wet_months, self.dry_months
            )));
        }
        Ok(())
    }
}

/// Parses a month set such as `5-10`, `11-4` (wrapping) or `1,2,12`.
pub fn parse_month_set(text: &str) -> Result<BTreeSet<u32>> {
    let bad = || Error::Config(format!("invalid month set '{text}'"));
    let mut months = BTreeSet::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let month = |s: &str| -> Result<u32> {
            let m: u32 = s.trim().parse().map_err(|_| bad())?;
            if (1..=12).contains(&m) {
                Ok(m)
            } else {
                Err(bad())
            }
        };
        match part.split_once('-') {
            Some((a, b)) => {
                let (a, b) = (month(a)?, month(b)?);
                let mut m = a;
                loop {
                    months.insert(m);
                    if m == b {
                        break;
                    }
                    m = m % 12 + 1;
                }
            }
            None => {
                months.insert(month(part)?);
            }
        }
    }
    if months.is_empty() {
        return Err(bad());
    }
    Ok(months)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoldoutSplit {
    pub validation: TimeSeries,
    pub train: TimeSeries,
    pub test: TimeSeries,
}

/// Separates the validation year, then splits the remainder into train and
/// test sets of `round(train_fraction · n)` and the rest.
pub fn split_holdout_and_train_test(ts: &TimeSeries, spec: &SplitSpec) -> Result<HoldoutSplit> {
    spec.validate()?;
    if ts.is_empty() {
        return Err(Error::EmptyInput("series to split".into()));
    }
    let validation = ts.filter(|r| r.year() == spec.validation_year);
    if validation.is_empty() {
        tracing::warn!(year = spec.validation_year, "validation year absent; validation set is empty");
    }
    let rest: Vec<_> = ts
        .records()
        .iter()
        .filter(|r| r.year() != spec.validation_year)
        .cloned()
        .collect();
    let n_train = (spec.train_fraction * rest.len() as f64).round() as usize;
    let mut order: Vec<usize> = (0..rest.len()).collect();
    if spec.mode == SplitMode::Random {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(spec.shuffle_seed));
    }
    let pick = |idx: &[usize]| idx.iter().map(|&i| rest[i].clone()).collect::<Vec<_>>();
    Ok(HoldoutSplit {
        train: ts.derive(pick(&order[..n_train])),
        test: ts.derive(pick(&order[n_train..])),
        validation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeasonPartition {
    pub wet: TimeSeries,
    pub dry: TimeSeries,
}

pub fn season_partition(ts: &TimeSeries, spec: &SplitSpec) -> Result<SeasonPartition> {
    spec.validate()?;
    Ok(SeasonPartition {
        wet: season_filter(ts, Season::Wet, spec),
        dry: season_filter(ts, Season::Dry, spec),
    })
}

/// Records belonging to `season` (all records for annual).
pub fn season_filter(ts: &TimeSeries, season: Season, spec: &SplitSpec) -> TimeSeries {
    ts.filter(|r| season.contains_month(r.month(), spec))
}

/// Dense row-major matrix with named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    names: Vec<String>,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>, values: Vec<f64>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Schema("feature matrix needs at least one column".into()));
        }
        if values.len() % names.len() != 0 {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: names.len(),
            });
        }
        Ok(FeatureMatrix { names, values })
    }

    pub fn from_rows(names: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * names.len());
        for row in rows {
            if row.len() != names.len() {
                return Err(Error::LengthMismatch {
                    left: row.len(),
                    right: names.len(),
                });
            }
            values.extend_from_slice(row);
        }
        FeatureMatrix::new(names, values)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.values.len() / self.names.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.n_cols();
        &self.values[i * c..(i + 1) * c]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.n_cols())
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_cols() + j]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn map_columns(&self, f: impl Fn(usize, f64) -> f64) -> FeatureMatrix {
        let c = self.n_cols();
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &v)| f(k % c, v))
            .collect();
        FeatureMatrix {
            names: self.names.clone(),
            values,
        }
    }
}

fn check_columns(expected: &[String], x: &FeatureMatrix) -> Result<()> {
    if expected != x.names() {
        return Err(Error::Schema(format!(
            "scaler fitted on {:?}, applied to {:?}",
            expected,
            x.names()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardScalerParams {
    pub names: Vec<String>,
    pub mean: Vec<f64>,
    /// Population standard deviation.
    pub std: Vec<f64>,
}

/// `z = (x − μ) / σ` per column.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StandardScaler {
    params: Option<StandardScalerParams>,
}

impl StandardScaler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn params(&self) -> Option<&StandardScalerParams> {
        self.params.as_ref()
    }

    pub fn fit(&mut self, x: &FeatureMatrix) -> Result<&StandardScalerParams> {
        let n = x.n_rows();
        if n == 0 {
            return Err(Error::EmptyInput("standard scaler fit".into()));
        }
        let mut mean = Vec::with_capacity(x.n_cols());
        let mut std = Vec::with_capacity(x.n_cols());
        for (j, name) in x.names().iter().enumerate() {
            let col = x.column(j);
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("column '{name}'")));
            }
            let m = col.iter().sum::<f64>() / n as f64;
            let s = (col.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt();
            if !(s > 0.0) {
                return Err(Error::ConstantColumn(name.clone()));
            }
            mean.push(m);
            std.push(s);
        }
        Ok(self.params.insert(StandardScalerParams {
            names: x.names().to_vec(),
            mean,
            std,
        }))
    }

    pub fn transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        let p = self.params.as_ref().ok_or(Error::NotFitted)?;
        check_columns(&p.names, x)?;
        Ok(x.map_columns(|j, v| (v - p.mean[j]) / p.std[j]))
    }

    pub fn inverse_transform(&self, z: &FeatureMatrix) -> Result<FeatureMatrix> {
        let p = self.params.as_ref().ok_or(Error::NotFitted)?;
        check_columns(&p.names, z)?;
        Ok(z.map_columns(|j, v| v * p.std[j] + p.mean[j]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScalerParams {
    pub names: Vec<String>,
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

/// `x' = (x − min) / (max − min)` per column.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    params: Option<MinMaxScalerParams>,
}

impl MinMaxScaler {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn params(&self) -> Option<&MinMaxScalerParams> {
        self.params.as_ref()
    }

    pub fn fit(&mut self, x: &FeatureMatrix) -> Result<&MinMaxScalerParams> {
        if x.n_rows() == 0 {
            return Err(Error::EmptyInput("min-max scaler fit".into()));
        }
        let mut min = Vec::with_capacity(x.n_cols());
        let mut max = Vec::with_capacity(x.n_cols());
        for (j, name) in x.names().iter().enumerate() {
            let col = x.column(j);
            if col.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("column '{name}'")));
            }
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(hi > lo) {
                return Err(Error::ConstantColumn(name.clone()));
            }
            min.push(lo);
            max.push(hi);
        }
        Ok(self.params.insert(MinMaxScalerParams {
            names: x.names().to_vec(),
            min,
            max,
        }))
    }

    pub fn transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        let p = self.params.as_ref().ok_or(Error::NotFitted)?;
        check_columns(&p.names, x)?;
        Ok(x.map_columns(|j, v| (v - p.min[j]) / (p.max[j] - p.min[j])))
    }

    pub fn inverse_transform(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        let p = self.params.as_ref().ok_or(Error::NotFitted)?;
        check_columns(&p.names, x)?;
        Ok(x.map_columns(|j, v| v * (p.max[j] - p.min[j]) + p.min[j]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;
    use chrono::NaiveDate;

    fn at(y: i32, mo: u32, d: u32, h: u32, mi: u32) -> chrono::NaiveDateTime {
        NaiveDate::from_ymd_opt(y, mo, d).unwrap().and_hms_opt(h, mi, 0).unwrap()
    }

    fn series_at(times: &[chrono::NaiveDateTime]) -> TimeSeries {
        let mut records = synthetic::constant_series(times.len(), 1.0).into_records();
        for (r, t) in records.iter_mut().zip(times) {
            r.timestamp = *t;
        }
        TimeSeries::new(records, "t", 1)
    }

    #[test]
    fn shift_moves_half_hour_stamps_onto_the_hour() {
        let ts = series_at(&[at(2010, 3, 1, 6, 30), at(2010, 12, 31, 23, 30)]);
        let shifted = shift_timestamps(&ts, 30);
        assert_eq!(shifted.records()[0].timestamp, at(2010, 3, 1, 7, 0));
        assert_eq!(shifted.records()[1].timestamp, at(2011, 1, 1, 0, 0));
        assert_eq!(shifted.records()[0].ghi, 1.0);
        assert_eq!(off_half_hour_count(&ts), 0);
        assert_eq!(off_half_hour_count(&shifted), 2);
    }

    #[test]
    fn shift_of_empty_series() {
        let ts = TimeSeries::new(vec![], "e", 0);
        assert!(shift_timestamps(&ts, 30).is_empty());
    }

    #[test]
    fn daytime_window() {
        let ts = series_at(&[at(2010, 1, 1, 6, 0), at(2010, 1, 1, 7, 0), at(2010, 1, 1, 12, 0), at(2010, 1, 1, 18, 0), at(2010, 1, 1, 19, 0)]);
        let hours: Vec<u32> = filter_daytime(&ts).records().iter().map(|r| r.hour()).collect();
        assert_eq!(hours, vec![7, 12, 18]);
    }

    #[test]
    fn daytime_keeps_half_of_a_year() {
        let ts = shift_timestamps(&synthetic::ibadan_like(2019, 1, 1), 30);
        let day = filter_daytime(&ts);
        assert_eq!(day.len() * 24, ts.len() * 12);
        assert_eq!(filter_daytime(&day), day);
    }

    #[test]
    fn month_sets() {
        assert_eq!(parse_month_set("5-10").unwrap(), (5..=10).collect());
        assert_eq!(parse_month_set("11-4").unwrap(), [11, 12, 1, 2, 3, 4].into_iter().collect());
        assert_eq!(parse_month_set("1, 2,12").unwrap(), [1, 2, 12].into_iter().collect());
        assert!(parse_month_set("0-3").is_err());
        assert!(parse_month_set("").is_err());
    }

    #[test]
    fn spec_validation() {
        let mut spec = SplitSpec::default();
        assert!(spec.validate().is_ok());
        assert_eq!(spec.dry_months, [11, 12, 1, 2, 3, 4].into_iter().collect());
        spec.dry_months.insert(6);
        assert!(spec.validate().is_err());
        let mut spec = SplitSpec::default();
        spec.train_fraction = 1.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn split_counts_and_seed() {
        let mut records = synthetic::constant_series(1000, 1.0).into_records();
        records.extend(series_at(&[at(2022, 1, 1, 9, 0), at(2022, 1, 1, 10, 0)]).into_records());
        let ts = TimeSeries::new(records, "t", 0);
        let spec = SplitSpec::default();
        let s = split_holdout_and_train_test(&ts, &spec).unwrap();
        assert_eq!((s.train.len(), s.test.len(), s.validation.len()), (800, 200, 2));
        assert!(s.validation.records().iter().all(|r| r.year() == 2022));
        assert_eq!(split_holdout_and_train_test(&ts, &spec).unwrap(), s);
        let other = SplitSpec { shuffle_seed: 7, ..spec.clone() };
        assert_ne!(split_holdout_and_train_test(&ts, &other).unwrap().train, s.train);
        let chrono_spec = SplitSpec { mode: SplitMode::Chronological, ..spec };
        let c = split_holdout_and_train_test(&ts, &chrono_spec).unwrap();
        assert!(c.train.records().last().unwrap().timestamp < c.test.records()[0].timestamp);
    }

    #[test]
    fn missing_validation_year_gives_empty_set() {
        let ts = synthetic::constant_series(10, 1.0);
        let s = split_holdout_and_train_test(&ts, &SplitSpec::default()).unwrap();
        assert!(s.validation.is_empty());
        assert_eq!(s.train.len() + s.test.len(), 10);
    }

    #[test]
    fn seasons() {
        let ts = series_at(&[at(2010, 6, 1, 9, 0), at(2010, 1, 5, 9, 0), at(2010, 11, 5, 9, 0)]);
        let p = season_partition(&ts, &SplitSpec::default()).unwrap();
        assert_eq!(p.wet.len(), 1);
        assert_eq!(p.wet.records()[0].month(), 6);
        assert_eq!(p.dry.len(), 2);
        assert_eq!("Wet".parse::<Season>().unwrap(), Season::Wet);
    }

    fn matrix(rows: &[[f64; 2]]) -> FeatureMatrix {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        FeatureMatrix::from_rows(vec!["a".into(), "b".into()], &rows).unwrap()
    }

    #[test]
    fn standard_scaler_anchor_points() {
        let x = matrix(&[[1.0, 10.0], [3.0, 20.0], [5.0, 60.0]]);
        let mut s = StandardScaler::new();
        let p = s.fit(&x).unwrap().clone();
        assert_eq!(p.mean, vec![3.0, 30.0]);
        let probe = matrix(&[[p.mean[0], p.mean[1]], [p.mean[0] + p.std[0], p.mean[1] + p.std[1]]]);
        let z = s.transform(&probe).unwrap();
        assert_eq!(z.row(0), &[0.0, 0.0]);
        assert!(z.row(1).iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn minmax_anchor_points() {
        let x = matrix(&[[1.0, -5.0], [3.0, 5.0], [2.0, 0.0]]);
        let mut s = MinMaxScaler::new();
        s.fit(&x).unwrap();
        let t = s.transform(&x).unwrap();
        assert_eq!(t.row(0), &[0.0, 0.0]);
        assert_eq!(t.row(1), &[1.0, 1.0]);
        assert_eq!(t.row(2), &[0.5, 0.5]);
    }

    #[test]
    fn scaler_errors() {
        let x = matrix(&[[1.0, 2.0], [1.0, 3.0]]);
        assert!(matches!(StandardScaler::new().fit(&x), Err(Error::ConstantColumn(c)) if c == "a"));
        assert!(matches!(MinMaxScaler::new().fit(&x), Err(Error::ConstantColumn(c)) if c == "a"));
        assert!(matches!(StandardScaler::new().inverse_transform(&x), Err(Error::NotFitted)));
        assert!(matches!(MinMaxScaler::new().transform(&x), Err(Error::NotFitted)));
    }
}
