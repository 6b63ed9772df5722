//! Forecast error metrics and the nRMSE rating bands.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use chrono::{NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::preprocess::is_daytime_hour;
use crate::{Error, Result};

fn check_pair(y: &[f64], y_hat: &[f64]) -> Result<()> {
    if y.len() != y_hat.len() {
        return Err(Error::LengthMismatch { left: y.len(), right: y_hat.len() });
    }
    if y.is_empty() {
        return Err(Error::EmptyInput("metric inputs".into()));
    }
    if y.iter().chain(y_hat).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("metric inputs".into()));
    }
    Ok(())
}

/// Root mean squared error.
pub fn rmse(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_pair(y, y_hat)?;
    let sse: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((sse / y.len() as f64).sqrt())
}

/// Mean absolute error.
pub fn mae(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_pair(y, y_hat)?;
    let sae: f64 = y.iter().zip(y_hat).map(|(a, b)| (a - b).abs()).sum();
    Ok(sae / y.len() as f64)
}

/// RMSE divided by the mean of the actual series.
pub fn nrmse(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    let r = rmse(y, y_hat)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    if mean == 0.0 {
        return Err(Error::Undefined("nRMSE of a series with zero mean".into()));
    }
    Ok(r / mean)
}

/// Mean absolute scaled error: forecast MAE over `1/n`, scaled by the
/// one-step naive MAE over `1/(n−1)`. `y` must be in chronological order.
pub fn mase(y: &[f64], y_hat: &[f64]) -> Result<f64> {
    check_pair(y, y_hat)?;
    let n = y.len();
    if n < 2 {
        return Err(Error::Undefined("MASE needs at least two observations".into()));
    }
    let naive: f64 = y.windows(2).map(|w| (w[1] - w[0]).abs()).sum::<f64>() / (n - 1) as f64;
    if naive == 0.0 {
        return Err(Error::Undefined("MASE of a constant series".into()));
    }
    Ok(mae(y, y_hat)? / naive)
}

/// [`mase`] after ordering the pairs by timestamp.
pub fn mase_chronological(timestamps: &[NaiveDateTime], y: &[f64], y_hat: &[f64]) -> Result<f64> {
    if timestamps.len() != y.len() {
        return Err(Error::LengthMismatch { left: timestamps.len(), right: y.len() });
    }
    let (ys, hs) = sort_by_time(timestamps, y, y_hat);
    mase(&ys, &hs)
}

fn sort_by_time(timestamps: &[NaiveDateTime], y: &[f64], y_hat: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut order: Vec<usize> = (0..y.len()).collect();
    order.sort_by_key(|&i| timestamps[i]);
    (
        order.iter().map(|&i| y[i]).collect(),
        order.iter().map(|&i| y_hat[i]).collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Rating {
    Excellent,
    Good,
    Fair,
    Poor,
}

impl fmt::Display for Rating {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rating::Excellent => "Excellent",
            Rating::Good => "Good",
            Rating::Fair => "Fair",
            Rating::Poor => "Poor",
        })
    }
}

impl FromStr for Rating {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "Excellent" => Ok(Rating::Excellent),
            "Good" => Ok(Rating::Good),
            "Fair" => Ok(Rating::Fair),
            "Poor" => Ok(Rating::Poor),
            other => Err(Error::InvalidParameter(format!("unknown rating '{other}'"))),
        }
    }
}

/// Rating band of an nRMSE value; each band includes its lower edge.
pub fn classify_nrmse(v: f64) -> Result<Rating> {
    if !(v >= 0.0) {
        return Err(Error::InvalidParameter(format!("nRMSE {v} must be a non-negative number")));
    }
    Ok(if v < 0.10 {
        Rating::Excellent
    } else if v < 0.20 {
        Rating::Good
    } else if v < 0.30 {
        Rating::Fair
    } else {
        Rating::Poor
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetMetrics {
    pub target: String,
    pub rmse: f64,
    pub mae: f64,
    pub nrmse: f64,
    pub nrmse_rating: Rating,
    pub mase: f64,
    pub n: usize,
}

impl TargetMetrics {
    /// All four metrics for one target; MASE uses timestamp order.
    pub fn compute(
        target: impl Into<String>,
        timestamps: &[NaiveDateTime],
        y: &[f64],
        y_hat: &[f64],
    ) -> Result<Self> {
        let target = target.into();
        let wrap = |e: Error| Error::stage(format!("metrics for {target}"), e);
        let nrmse_v = nrmse(y, y_hat).map_err(wrap)?;
        Ok(TargetMetrics {
            rmse: rmse(y, y_hat).map_err(wrap)?,
            mae: mae(y, y_hat).map_err(wrap)?,
            nrmse: nrmse_v,
            nrmse_rating: classify_nrmse(nrmse_v).map_err(wrap)?,
            mase: mase_chronological(timestamps, y, y_hat).map_err(wrap)?,
            n: y.len(),
            target,
        })
    }
}

/// One row per target, written as `target,rmse,mae,nrmse,nrmse_rating,mase`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub rows: Vec<TargetMetrics>,
}

impl MetricsReport {
    pub fn get(&self, target: &str) -> Option<&TargetMetrics> {
        self.rows.iter().find(|r| r.target == target)
    }

    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["target", "rmse", "mae", "nrmse", "nrmse_rating", "mase"])?;
        for r in &self.rows {
            out.write_record([
                r.target.clone(),
                format!("{:.4}", r.rmse),
                format!("{:.4}", r.mae),
                format!("{:.4}", r.nrmse),
                r.nrmse_rating.to_string(),
                format!("{:.4}", r.mase),
            ])?;
        }
        out.flush().map_err(|e| Error::Csv(e.into()))
    }
}

/// One-step persistence forecast: the value of the previous hour of the same
/// day inside the daytime window. The first daytime hour of each day (and
/// any hour whose predecessor is missing) has no forecast.
pub fn persistence_baseline(timestamps: &[NaiveDateTime], y: &[f64]) -> Result<Vec<Option<f64>>> {
    if timestamps.len() != y.len() {
        return Err(Error::LengthMismatch { left: timestamps.len(), right: y.len() });
    }
    if timestamps.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("persistence baseline needs strictly increasing timestamps".into()));
    }
    let mut out = vec![None; y.len()];
    for i in 1..y.len() {
        let (prev, cur) = (timestamps[i - 1], timestamps[i]);
        if cur - prev == chrono::Duration::hours(1)
            && prev.date() == cur.date()
            && is_daytime_hour(prev.hour())
            && is_daytime_hour(cur.hour())
        {
            out[i] = Some(y[i - 1]);
        }
    }
    Ok(out)
}

/// Scored pairs `(actual, forecast)` of the persistence baseline.
pub fn persistence_pairs(timestamps: &[NaiveDateTime], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let baseline = persistence_baseline(timestamps, y)?;
    Ok(y.iter()
        .zip(baseline)
        .filter_map(|(a, f)| f.map(|f| (*a, f)))
        .unzip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn hours(day: u32, hs: &[u32]) -> Vec<NaiveDateTime> {
        hs.iter()
            .map(|&h| NaiveDate::from_ymd_opt(2022, 1, day).unwrap().and_hms_opt(h, 0, 0).unwrap())
            .collect()
    }

    #[test]
    fn hand_values() {
        assert_eq!(rmse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert!((rmse(&[1.0, 2.0, 3.0], &[1.0, 2.0, 5.0]).unwrap() - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(rmse(&[0.0], &[3.0]).unwrap(), 3.0);
        assert_eq!(mae(&[0.0, 0.0], &[1.0, -1.0]).unwrap(), 1.0);
        assert_eq!(nrmse(&[1.0, 3.0], &[2.0, 2.0]).unwrap(), 0.5);
        assert_eq!(mase(&[1.0, 4.0, 2.0], &[1.0, 4.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn naive_forecast_mase() {
        let y = [3.0, 7.0, 2.0, 9.0, 4.0, 4.5];
        let n = y.len();
        // forecasts y[t-1] scored over t = 2..n inside an n-length MASE
        let mut y_hat = y.to_vec();
        for t in 1..n {
            y_hat[t] = y[t - 1];
        }
        let m = mase(&y, &y_hat).unwrap();
        assert!((m - (n - 1) as f64 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn error_cases() {
        assert!(matches!(rmse(&[], &[]), Err(Error::EmptyInput(_))));
        assert!(matches!(mae(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(nrmse(&[1.0, -1.0], &[0.0, 0.0]), Err(Error::Undefined(_))));
        assert!(matches!(mase(&[2.0, 2.0, 2.0], &[1.0, 2.0, 3.0]), Err(Error::Undefined(_))));
        assert!(matches!(mase(&[2.0], &[1.0]), Err(Error::Undefined(_))));
    }

    #[test]
    fn rating_bands() {
        let cases = [
            (0.0, Rating::Excellent),
            (0.05, Rating::Excellent),
            (0.10, Rating::Good),
            (0.19, Rating::Good),
            (0.20, Rating::Fair),
            (0.22, Rating::Fair),
            (0.30, Rating::Poor),
            (0.33, Rating::Poor),
        ];
        for (v, r) in cases {
            assert_eq!(classify_nrmse(v).unwrap(), r, "{v}");
        }
        assert!(classify_nrmse(-0.01).is_err());
        assert!(classify_nrmse(f64::NAN).is_err());
    }

    #[test]
    fn mase_reorders_by_time() {
        let t = hours(3, &[9, 7, 8]);
        let y = [3.0, 1.0, 2.0];
        let y_hat = [3.5, 1.0, 2.0];
        // chronological y = [1, 2, 3]: naive MAE 1, forecast MAE 0.5/3
        assert!((mase_chronological(&t, &y, &y_hat).unwrap() - 0.5 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn report_csv() {
        let t = hours(1, &[7, 8, 9, 10]);
        let row = TargetMetrics::compute("ghi", &t, &[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 5.0]).unwrap();
        let mut buf = Vec::new();
        MetricsReport { rows: vec![row] }.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "target,rmse,mae,nrmse,nrmse_rating,mase\nghi,0.5000,0.2500,0.2000,Fair,0.2500\n");
    }

    #[test]
    fn persistence() {
        let mut t = hours(1, &[6, 7, 8, 9]);
        t.extend(hours(2, &[7, 8, 10]));
        let y = [5.0, 1.0, 2.0, 3.0, 10.0, 20.0, 40.0];
        let b = persistence_baseline(&t, &y).unwrap();
        assert_eq!(b, vec![None, None, Some(1.0), Some(2.0), None, Some(10.0), None]);
        let (a, f) = persistence_pairs(&t, &y).unwrap();
        assert_eq!(mae(&a, &f).unwrap(), (1.0 + 1.0 + 10.0) / 3.0);
    }

    #[test]
    fn persistence_of_constant_and_ramp() {
        let t = hours(5, &[7, 8, 9, 10, 11, 12]);
        let (a, f) = persistence_pairs(&t, &[4.0; 6]).unwrap();
        assert_eq!(mae(&a, &f).unwrap(), 0.0);
        let ramp: Vec<f64> = (0..6).map(|i| 10.0 + 2.5 * f64::from(i)).collect();
        let (a, f) = persistence_pairs(&t, &ramp).unwrap();
        assert_eq!(mae(&a, &f).unwrap(), 2.5);
    }
}
