//! Correlation matrix and month×hour pivots for exploratory plots.

use std::io::Write;

use serde::Serialize;

use crate::ingest::{TimeSeries, Variable};
use crate::{Error, Result};

/// Pearson coefficients; `None` where a variable has zero variance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationMatrix {
    pub variables: Vec<Variable>,
    pub coef: Vec<Vec<Option<f64>>>,
    /// Rows used (records with every variable present).
    pub n: usize,
}

impl CorrelationMatrix {
    pub fn get(&self, a: Variable, b: Variable) -> Option<f64> {
        let i = self.variables.iter().position(|&v| v == a)?;
        let j = self.variables.iter().position(|&v| v == b)?;
        self.coef[i][j]
    }

    /// Variables whose coefficients are undefined (constant columns).
    pub fn undefined_variables(&self) -> Vec<Variable> {
        self.variables
            .iter()
            .enumerate()
            .filter(|(i, _)| self.coef[*i][*i].is_none())
            .map(|(_, v)| *v)
            .collect()
    }

    /// Long format `var_a,var_b,coef`; undefined coefficients are empty.
    pub fn write_long_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["var_a", "var_b", "coef"])?;
        for (i, a) in self.variables.iter().enumerate() {
            for (j, b) in self.variables.iter().enumerate() {
                let c = self.coef[i][j].map(|c| format!("{c:.6}")).unwrap_or_default();
                out.write_record([a.key(), b.key(), c])?;
            }
        }
        out.flush().map_err(|e| Error::Csv(e.into()))
    }
}

/// Default variable set: every measured quantity except the flag column.
pub fn default_correlation_variables() -> Vec<Variable> {
    Variable::MEASUREMENTS.to_vec()
}

pub fn correlation_matrix(ts: &TimeSeries, variables: &[Variable]) -> Result<CorrelationMatrix> {
    if variables.is_empty() {
        return Err(Error::EmptyInput("correlation variables".into()));
    }
    let columns: Vec<Vec<f64>> = {
        let rows: Vec<Vec<f64>> = ts
            .records()
            .iter()
            .filter_map(|r| variables.iter().map(|&v| r.get(v)).collect::<Option<Vec<f64>>>())
            .collect();
        (0..variables.len()).map(|j| rows.iter().map(|r| r[j]).collect()).collect()
    };
    let n = columns[0].len();
    if n < 2 {
        return Err(Error::EmptyInput("correlation needs at least two complete records".into()));
    }
    let centered: Vec<Vec<f64>> = columns
        .iter()
        .map(|c| {
            let m = c.iter().sum::<f64>() / n as f64;
            c.iter().map(|v| v - m).collect()
        })
        .collect();
    let ss: Vec<f64> = centered.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();

    let k = variables.len();
    let mut coef = vec![vec![None; k]; k];
    for i in 0..k {
        if ss[i] > 0.0 {
            coef[i][i] = Some(1.0);
        }
        for j in i + 1..k {
            if ss[i] > 0.0 && ss[j] > 0.0 {
                let sxy: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
                let r = (sxy / (ss[i] * ss[j]).sqrt()).clamp(-1.0, 1.0);
                coef[i][j] = Some(r);
                coef[j][i] = Some(r);
            }
        }
    }
    for (v, s) in variables.iter().zip(&ss) {
        if *s == 0.0 {
            tracing::warn!(variable = %v, "constant column; correlations undefined");
        }
    }
    Ok(CorrelationMatrix {
        variables: variables.to_vec(),
        coef,
        n,
    })
}

/// Mean of a variable per (month, hour) cell; `None` for empty cells.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonthHourPivot {
    pub variable: Variable,
    /// `cells[month − 1][hour]`.
    pub cells: Vec<Vec<Option<f64>>>,
    pub counts: Vec<Vec<usize>>,
}

impl MonthHourPivot {
    pub fn get(&self, month: u32, hour: u32) -> Option<f64> {
        self.cells[month as usize - 1][hour as usize]
    }

    pub fn populated(&self) -> usize {
        self.counts.iter().flatten().filter(|&&c| c > 0).count()
    }

    /// `(month, hour, mean)` of the largest cell.
    pub fn peak(&self) -> Option<(u32, u32, f64)> {
        let mut best: Option<(u32, u32, f64)> = None;
        for (m, row) in self.cells.iter().enumerate() {
            for (h, cell) in row.iter().enumerate() {
                if let Some(v) = *cell {
                    if best.is_none_or(|b| v > b.2) {
                        best = Some((m as u32 + 1, h as u32, v));
                    }
                }
            }
        }
        best
    }

    /// Long format `month,hour,mean`; empty cells have an empty mean.
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["month", "hour", "mean"])?;
        for (m, row) in self.cells.iter().enumerate() {
            for (h, cell) in row.iter().enumerate() {
                let v = cell.map(|v| format!("{v:.4}")).unwrap_or_default();
                out.write_record([(m + 1).to_string(), h.to_string(), v])?;
            }
        }
        out.flush().map_err(|e| Error::Csv(e.into()))
    }
}

pub fn month_hour_pivot(ts: &TimeSeries, variable: Variable) -> MonthHourPivot {
    let mut sums = vec![vec![0.0; 24]; 12];
    let mut counts = vec![vec![0usize; 24]; 12];
    for r in ts.records() {
        if let Some(v) = r.get(variable) {
            let (m, h) = (r.month() as usize - 1, r.hour() as usize);
            sums[m][h] += v;
            counts[m][h] += 1;
        }
    }
    let cells = sums
        .iter()
        .zip(&counts)
        .map(|(s, c)| {
            s.iter()
                .zip(c)
                .map(|(s, &c)| (c > 0).then(|| s / c as f64))
                .collect()
        })
        .collect();
    MonthHourPivot { variable, cells, counts }
}
