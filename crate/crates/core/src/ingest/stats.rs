use std::io::Write;

use serde::Serialize;

use super::record::{TimeSeries, Variable};
use crate::{Error, Result};

/// Descriptive statistics of one variable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub variable: Variable,
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation (n − 1 denominator).
    pub std: f64,
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryTable {
    pub rows: Vec<SummaryRow>,
}

impl SummaryTable {
    pub fn get(&self, variable: Variable) -> Option<&SummaryRow> {
        self.rows.iter().find(|r| r.variable == variable)
    }

    /// CSV with columns `variable,count,mean,std,min,25%,50%,75%,max`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["variable", "count", "mean", "std", "min", "25%", "50%", "75%", "max"])?;
        for r in &self.rows {
            out.write_record([
                r.variable.label(),
                r.count.to_string(),
                r.mean.to_string(),
                r.std.to_string(),
                r.min.to_string(),
                r.q25.to_string(),
                r.median.to_string(),
                r.q75.to_string(),
                r.max.to_string(),
            ])?;
        }
        out.flush().map_err(|e| Error::io("<summary csv>", e))?;
        Ok(())
    }
}

/// Summary of the standard variable set over every record (night included).
pub fn summary_stats(series: &TimeSeries) -> Result<SummaryTable> {
    summary_stats_for(series, &Variable::SUMMARY)
}

pub fn summary_stats_for(series: &TimeSeries, variables: &[Variable]) -> Result<SummaryTable> {
    if series.is_empty() {
        return Err(Error::EmptyInput("summary statistics of an empty series".into()));
    }
    let rows = variables
        .iter()
        .map(|&v| {
            let mut values = series.values(v);
            if values.is_empty() {
                return Err(Error::EmptyInput(format!("no values for {v}")));
            }
            values.sort_by(f64::total_cmp);
            Ok(describe(v, &values))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SummaryTable { rows })
}

fn describe(variable: Variable, sorted: &[f64]) -> SummaryRow {
    let n = sorted.len();
    let mean = sorted.iter().sum::<f64>() / n as f64;
    let std = if n > 1 {
        let ss: f64 = sorted.iter().map(|x| (x - mean).powi(2)).sum();
        (ss / (n - 1) as f64).sqrt()
    } else {
        0.0
    };
    SummaryRow {
        variable,
        count: n,
        mean,
        std,
        min: sorted[0],
        q25: quantile(sorted, 0.25),
        median: quantile(sorted, 0.5),
        q75: quantile(sorted, 0.75),
        max: sorted[n - 1],
    }
}

/// Quantile of sorted data, linearly interpolated between the closest ranks.
///
/// Panics on empty input.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}
