//! Two-stage forecasting: clear-sky irradiance from weather and calendar
//! features, then actual irradiance from the same features plus clear-sky
//! irradiance and cloud type.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::forest::{read_forest, write_forest, ForestHyperParams, ForestModel};
use crate::ingest::{HourlyRecord, TimeSeries, Variable};
use crate::metrics::{persistence_baseline, MetricsReport, TargetMetrics};
use crate::preprocess::{is_daytime_hour, season_filter, FeatureMatrix, Season, SplitSpec};
use crate::{Error, Result};

pub const STAGE1_FEATURES: [Variable; 10] = [
    Variable::Month,
    Variable::Day,
    Variable::Hour,
    Variable::PrecipitableWater,
    Variable::DewPoint,
    Variable::RelativeHumidity,
    Variable::Pressure,
    Variable::Temperature,
    Variable::WindSpeed,
    Variable::WindDirection,
];

pub const STAGE1_TARGETS: [Variable; 3] = [Variable::ClearskyGhi, Variable::ClearskyDni, Variable::ClearskyDhi];

pub const STAGE2_EXTRA: [Variable; 4] = [
    Variable::ClearskyGhi,
    Variable::ClearskyDni,
    Variable::ClearskyDhi,
    Variable::CloudType,
];

pub const STAGE2_TARGETS: [Variable; 3] = [Variable::Ghi, Variable::Dni, Variable::Dhi];

pub fn stage1_feature_names() -> Vec<String> {
    STAGE1_FEATURES.iter().map(|v| v.key()).collect()
}

pub fn stage2_feature_names() -> Vec<String> {
    STAGE1_FEATURES.iter().chain(&STAGE2_EXTRA).map(|v| v.key()).collect()
}

fn stage1_row(r: &HourlyRecord, out: &mut Vec<f64>) {
    out.extend(STAGE1_FEATURES.iter().map(|&v| r.get(v).expect("calendar and weather fields are always present")));
}

/// Stage-2 feature row; `None` when the cloud type is absent.
fn stage2_row(r: &HourlyRecord, clearsky: [f64; 3], out: &mut Vec<f64>) -> Option<()> {
    let cloud = f64::from(r.cloud_type?);
    stage1_row(r, out);
    out.extend_from_slice(&clearsky);
    out.push(cloud);
    Some(())
}

fn observed_clearsky(r: &HourlyRecord) -> [f64; 3] {
    [r.clearsky_ghi, r.clearsky_dni, r.clearsky_dhi]
}

pub fn stage1_matrix(records: &[HourlyRecord]) -> FeatureMatrix {
    let mut values = Vec::with_capacity(records.len() * STAGE1_FEATURES.len());
    for r in records {
        stage1_row(r, &mut values);
    }
    FeatureMatrix::new(stage1_feature_names(), values).expect("row width matches schema")
}

/// Stage-2 matrix with observed clear-sky inputs, skipping rows without a
/// cloud type. Returns the matrix and the indices of the rows used.
pub fn stage2_matrix_observed(records: &[HourlyRecord]) -> (FeatureMatrix, Vec<usize>) {
    let mut values = Vec::with_capacity(records.len() * (STAGE1_FEATURES.len() + STAGE2_EXTRA.len()));
    let mut used = Vec::with_capacity(records.len());
    for (i, r) in records.iter().enumerate() {
        if stage2_row(r, observed_clearsky(r), &mut values).is_some() {
            used.push(i);
        }
    }
    (FeatureMatrix::new(stage2_feature_names(), values).expect("row width matches schema"), used)
}

fn target_values(records: &[HourlyRecord], rows: impl Iterator<Item = usize>, v: Variable) -> Vec<f64> {
    rows.map(|i| records[i].get(v).expect("irradiance fields are always present")).collect()
}

/// Hourly output of both stages. Actual components are `None` for hours
/// without a cloud type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PredictionRow {
    pub timestamp: NaiveDateTime,
    pub clearsky_ghi: f64,
    pub clearsky_dni: f64,
    pub clearsky_dhi: f64,
    pub ghi: Option<f64>,
    pub dni: Option<f64>,
    pub dhi: Option<f64>,
}

/// Six forests (three per stage) trained on one season.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoStagePipeline {
    pub season: Season,
    pub split: SplitSpec,
    /// Clear-sky GHI, DNI, DHI forests.
    pub stage1: Vec<ForestModel>,
    /// Actual GHI, DNI, DHI forests.
    pub stage2: Vec<ForestModel>,
    pub n_train_stage1: usize,
    pub n_train_stage2: usize,
}

impl TwoStagePipeline {
    /// Trains both stages on the `season` slice of `train`. Stage 2 sees the
    /// observed clear-sky values as inputs and skips rows without a cloud type.
    pub fn train(
        train: &TimeSeries,
        season: Season,
        split: &SplitSpec,
        params: &ForestHyperParams,
    ) -> Result<Self> {
        let data = season_filter(train, season, split);
        if data.is_empty() {
            return Err(Error::EmptyInput(format!("{season} training slice")));
        }
        let records = data.records();
        let x1 = stage1_matrix(records);
        let mut stage1 = Vec::with_capacity(3);
        for v in STAGE1_TARGETS {
            let y = target_values(records, 0..records.len(), v);
            tracing::info!(%season, target = %v.key(), rows = y.len(), "training stage 1");
            stage1.push(ForestModel::fit(&x1, &y, v.key(), params).map_err(|e| Error::stage(format!("stage 1 {}", v.key()), e))?);
        }

        let (x2, used) = stage2_matrix_observed(records);
        let dropped = records.len() - used.len();
        if dropped > 0 {
            tracing::info!(rows = dropped, "rows without cloud type left out of stage 2");
        }
        if used.is_empty() {
            return Err(Error::EmptyInput(format!("{season} stage-2 rows with cloud type")));
        }
        let mut stage2 = Vec::with_capacity(3);
        for v in STAGE2_TARGETS {
            let y = target_values(records, used.iter().copied(), v);
            tracing::info!(%season, target = %v.key(), rows = y.len(), "training stage 2");
            stage2.push(ForestModel::fit(&x2, &y, v.key(), params).map_err(|e| Error::stage(format!("stage 2 {}", v.key()), e))?);
        }
        Ok(TwoStagePipeline {
            season,
            split: split.clone(),
            stage1,
            stage2,
            n_train_stage1: records.len(),
            n_train_stage2: used.len(),
        })
    }

    fn check_schema(&self) -> Result<()> {
        if self.stage1.len() != 3 || self.stage2.len() != 3 {
            return Err(Error::ModelFormat("pipeline needs three forests per stage".into()));
        }
        if self.stage1.iter().any(|m| m.feature_names != stage1_feature_names())
            || self.stage2.iter().any(|m| m.feature_names != stage2_feature_names())
        {
            return Err(Error::Schema("pipeline forests do not match the feature schema".into()));
        }
        Ok(())
    }

    /// Runs stage 1, then feeds its clear-sky output to stage 2. All outputs
    /// are clipped at zero.
    pub fn predict(&self, records: &[HourlyRecord]) -> Result<Vec<PredictionRow>> {
        self.predict_inner(records, false)
    }

    /// Stage 2 driven by observed clear-sky values (the training condition).
    pub fn predict_teacher_forced(&self, records: &[HourlyRecord]) -> Result<Vec<PredictionRow>> {
        self.predict_inner(records, true)
    }

    fn predict_inner(&self, records: &[HourlyRecord], observed: bool) -> Result<Vec<PredictionRow>> {
        self.check_schema()?;
        let mut row = Vec::with_capacity(STAGE1_FEATURES.len() + STAGE2_EXTRA.len());
        let mut out = Vec::with_capacity(records.len());
        for r in records {
            row.clear();
            stage1_row(r, &mut row);
            let cs: Vec<f64> = self.stage1.iter().map(|m| m.predict_row(&row).max(0.0)).collect();
            let clearsky = [cs[0], cs[1], cs[2]];
            row.clear();
            let actual = stage2_row(r, if observed { observed_clearsky(r) } else { clearsky }, &mut row)
                .map(|_| {
                    let a: Vec<f64> = self.stage2.iter().map(|m| m.predict_row(&row).max(0.0)).collect();
                    [a[0], a[1], a[2]]
                });
            out.push(PredictionRow {
                timestamp: r.timestamp,
                clearsky_ghi: clearsky[0],
                clearsky_dni: clearsky[1],
                clearsky_dhi: clearsky[2],
                ghi: actual.map(|a| a[0]),
                dni: actual.map(|a| a[1]),
                dhi: actual.map(|a| a[2]),
            });
        }
        Ok(out)
    }

    /// Metrics for all six targets on the daytime `data_season` slice of `ts`.
    ///
    /// A seasonal pipeline refuses data of another season unless `force` is
    /// set; an annual pipeline accepts any slice.
    pub fn evaluate(&self, ts: &TimeSeries, data_season: Season, force: bool) -> Result<Evaluation> {
        if self.season != Season::Annual && self.season != data_season && !force {
            return Err(Error::SeasonMismatch {
                model: self.season.to_string(),
                data: data_season.to_string(),
            });
        }
        let data = season_filter(ts, data_season, &self.split).filter(|r| is_daytime_hour(r.hour()));
        if data.is_empty() {
            return Err(Error::EmptyInput(format!("{data_season} evaluation set")));
        }
        let records = data.records();
        let predicted = self.predict(records)?;
        let forced = self.predict_teacher_forced(records)?;
        let times: Vec<NaiveDateTime> = records.iter().map(|r| r.timestamp).collect();

        let mut metrics = MetricsReport::default();
        let cs_pred = |f: fn(&PredictionRow) -> f64| predicted.iter().map(f).collect::<Vec<_>>();
        let cs_cols: [(Variable, Vec<f64>); 3] = [
            (Variable::ClearskyGhi, cs_pred(|p| p.clearsky_ghi)),
            (Variable::ClearskyDni, cs_pred(|p| p.clearsky_dni)),
            (Variable::ClearskyDhi, cs_pred(|p| p.clearsky_dhi)),
        ];
        for (v, y_hat) in &cs_cols {
            let y = target_values(records, 0..records.len(), *v);
            metrics.rows.push(TargetMetrics::compute(v.key(), &times, &y, y_hat)?);
        }

        let mut teacher_forced = MetricsReport::default();
        let mut persistence = MetricsReport::default();
        let scored: Vec<usize> = (0..records.len()).filter(|&i| predicted[i].ghi.is_some()).collect();
        if scored.is_empty() {
            return Err(Error::EmptyInput("evaluation rows with cloud type".into()));
        }
        let t2: Vec<NaiveDateTime> = scored.iter().map(|&i| times[i]).collect();
        type Pick = fn(&PredictionRow) -> Option<f64>;
        let actual_cols: [(Variable, Pick); 3] =
            [(Variable::Ghi, |p| p.ghi), (Variable::Dni, |p| p.dni), (Variable::Dhi, |p| p.dhi)];
        for (v, pick) in actual_cols {
            let y = target_values(records, scored.iter().copied(), v);
            let y_hat: Vec<f64> = scored.iter().map(|&i| pick(&predicted[i]).expect("scored rows have predictions")).collect();
            let y_tf: Vec<f64> = scored.iter().map(|&i| pick(&forced[i]).expect("scored rows have predictions")).collect();
            metrics.rows.push(TargetMetrics::compute(v.key(), &t2, &y, &y_hat)?);
            teacher_forced.rows.push(TargetMetrics::compute(v.key(), &t2, &y, &y_tf)?);

            let mut order: Vec<usize> = (0..t2.len()).collect();
            order.sort_by_key(|&i| t2[i]);
            let ts_sorted: Vec<NaiveDateTime> = order.iter().map(|&i| t2[i]).collect();
            let y_sorted: Vec<f64> = order.iter().map(|&i| y[i]).collect();
            let baseline = persistence_baseline(&ts_sorted, &y_sorted)?;
            let mut pt = Vec::new();
            let (mut a, mut f) = (Vec::new(), Vec::new());
            for ((t, y), b) in ts_sorted.iter().zip(&y_sorted).zip(baseline) {
                if let Some(b) = b {
                    pt.push(*t);
                    a.push(*y);
                    f.push(b);
                }
            }
            match TargetMetrics::compute(format!("persistence_{}", v.key()), &pt, &a, &f) {
                Ok(m) => persistence.rows.push(m),
                Err(e) => tracing::warn!(target = %v.key(), "persistence baseline not scored: {e}"),
            }
        }

        Ok(Evaluation {
            season: data_season,
            n_rows: records.len(),
            n_scored_actual: scored.len(),
            metrics,
            teacher_forced,
            persistence,
        })
    }

    /// Writes the pipeline model file.
    ///
    /// Layout: magic `SCPL`, version (u32), header length (u64), JSON header,
    /// then the six forests in forest file format.
    pub fn write(&self, mut w: impl Write) -> Result<()> {
        self.check_schema()?;
        let header = PipelineHeader {
            season: self.season,
            split: self.split.clone(),
            n_train_stage1: self.n_train_stage1,
            n_train_stage2: self.n_train_stage2,
            stage1_features: stage1_feature_names(),
            stage2_features: stage2_feature_names(),
        };
        let json = serde_json::to_vec(&header).map_err(|e| Error::ModelFormat(e.to_string()))?;
        let io = |e: std::io::Error| Error::ModelFormat(format!("pipeline stream: {e}"));
        w.write_all(PIPELINE_MAGIC).map_err(io)?;
        w.write_all(&PIPELINE_VERSION.to_le_bytes()).map_err(io)?;
        w.write_all(&(json.len() as u64).to_le_bytes()).map_err(io)?;
        w.write_all(&json).map_err(io)?;
        for m in self.stage1.iter().chain(&self.stage2) {
            write_forest(m, &mut w)?;
        }
        Ok(())
    }

    pub fn read(mut r: impl Read) -> Result<Self> {
        let io = |e: std::io::Error| Error::ModelFormat(format!("pipeline stream: {e}"));
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic).map_err(io)?;
        if &magic != PIPELINE_MAGIC {
            return Err(Error::ModelFormat("not a pipeline model file (bad magic)".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4).map_err(io)?;
        let version = u32::from_le_bytes(b4);
        if version != PIPELINE_VERSION {
            return Err(Error::ModelFormat(format!("unsupported pipeline format version {version}")));
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8).map_err(io)?;
        let len = u64::from_le_bytes(b8);
        if len > 1 << 24 {
            return Err(Error::ModelFormat(format!("implausible header length {len}")));
        }
        let mut json = vec![0u8; len as usize];
        r.read_exact(&mut json).map_err(io)?;
        let header: PipelineHeader =
            serde_json::from_slice(&json).map_err(|e| Error::ModelFormat(format!("pipeline header: {e}")))?;
        let mut forests = Vec::with_capacity(6);
        for _ in 0..6 {
            forests.push(read_forest(&mut r)?);
        }
        let stage2 = forests.split_off(3);
        let p = TwoStagePipeline {
            season: header.season,
            split: header.split,
            stage1: forests,
            stage2,
            n_train_stage1: header.n_train_stage1,
            n_train_stage2: header.n_train_stage2,
        };
        p.check_schema().map_err(|e| Error::ModelFormat(e.to_string()))?;
        Ok(p)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(std::io::BufReader::new(file))
    }
}

const PIPELINE_MAGIC: &[u8; 4] = b"SCPL";
const PIPELINE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct PipelineHeader {
    season: Season,
    split: SplitSpec,
    n_train_stage1: usize,
    n_train_stage2: usize,
    stage1_features: Vec<String>,
    stage2_features: Vec<String>,
}

/// Metrics of one pipeline on one evaluation slice.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub season: Season,
    pub n_rows: usize,
    pub n_scored_actual: usize,
    /// Clear-sky rows from stage 1, actual rows from stage 2 on predicted clear-sky.
    pub metrics: MetricsReport,
    /// Stage 2 on observed clear-sky inputs.
    pub teacher_forced: MetricsReport,
    /// One-step persistence on the same actual series.
    pub persistence: MetricsReport,
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.3}")).unwrap_or_default()
}

/// `timestamp,pred_clearsky_ghi,…,pred_dhi`; absent actual predictions are empty cells.
pub fn write_predictions_csv(rows: &[PredictionRow], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "timestamp",
        "pred_clearsky_ghi",
        "pred_clearsky_dni",
        "pred_clearsky_dhi",
        "pred_ghi",
        "pred_dni",
        "pred_dhi",
    ])?;
    for p in rows {
        out.write_record([
            p.timestamp.format("%Y-%m-%d %H:%M").to_string(),
            format!("{:.3}", p.clearsky_ghi),
            format!("{:.3}", p.clearsky_dni),
            format!("{:.3}", p.clearsky_dhi),
            opt(p.ghi),
            opt(p.dni),
            opt(p.dhi),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}

/// Predictions next to the observations they forecast.
pub fn write_predictions_with_actuals_csv(
    rows: &[PredictionRow],
    records: &[HourlyRecord],
    w: impl Write,
) -> Result<()> {
    if rows.len() != records.len() || rows.iter().zip(records).any(|(p, r)| p.timestamp != r.timestamp) {
        return Err(Error::Misaligned("predictions and observations differ".into()));
    }
    let mut out = csv::Writer::from_writer(w);
    out.write_record([
        "timestamp",
        "pred_clearsky_ghi",
        "pred_clearsky_dni",
        "pred_clearsky_dhi",
        "pred_ghi",
        "pred_dni",
        "pred_dhi",
        "clearsky_ghi",
        "clearsky_dni",
        "clearsky_dhi",
        "ghi",
        "dni",
        "dhi",
    ])?;
    for (p, r) in rows.iter().zip(records) {
        out.write_record([
            p.timestamp.format("%Y-%m-%d %H:%M").to_string(),
            format!("{:.3}", p.clearsky_ghi),
            format!("{:.3}", p.clearsky_dni),
            format!("{:.3}", p.clearsky_dhi),
            opt(p.ghi),
            opt(p.dni),
            opt(p.dhi),
            r.clearsky_ghi.to_string(),
            r.clearsky_dni.to_string(),
            r.clearsky_dhi.to_string(),
            r.ghi.to_string(),
            r.dni.to_string(),
            r.dhi.to_string(),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}

/// Daily sums (Wh/m²) of predicted and observed irradiance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DailyIrradiance {
    pub date: NaiveDate,
    pub hours: usize,
    pub pred_ghi: f64,
    pub pred_dni: f64,
    pub pred_dhi: f64,
    pub ghi: f64,
    pub dni: f64,
    pub dhi: f64,
}

/// Aggregates hours that have actual predictions into calendar days.
pub fn daily_irradiance(rows: &[PredictionRow], records: &[HourlyRecord]) -> Result<Vec<DailyIrradiance>> {
    if rows.len() != records.len() {
        return Err(Error::Misaligned(format!("{} predictions vs {} observations", rows.len(), records.len())));
    }
    let mut days: std::collections::BTreeMap<NaiveDate, DailyIrradiance> = Default::default();
    for (p, r) in rows.iter().zip(records) {
        let (Some(g), Some(n), Some(d)) = (p.ghi, p.dni, p.dhi) else { continue };
        let date = p.timestamp.date();
        let e = days.entry(date).or_insert(DailyIrradiance {
            date,
            hours: 0,
            pred_ghi: 0.0,
            pred_dni: 0.0,
            pred_dhi: 0.0,
            ghi: 0.0,
            dni: 0.0,
            dhi: 0.0,
        });
        e.hours += 1;
        e.pred_ghi += g;
        e.pred_dni += n;
        e.pred_dhi += d;
        e.ghi += r.ghi;
        e.dni += r.dni;
        e.dhi += r.dhi;
    }
    Ok(days.into_values().collect())
}

pub fn write_daily_irradiance_csv(days: &[DailyIrradiance], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["date", "hours", "pred_ghi", "pred_dni", "pred_dhi", "ghi", "dni", "dhi"])?;
    for d in days {
        out.write_record([
            d.date.to_string(),
            d.hours.to_string(),
            format!("{:.3}", d.pred_ghi),
            format!("{:.3}", d.pred_dni),
            format!("{:.3}", d.pred_dhi),
            format!("{:.3}", d.ghi),
            format!("{:.3}", d.dni),
            format!("{:.3}", d.dhi),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::{align_daytime, split_holdout_and_train_test};
    use crate::synthetic;

    fn small_params() -> ForestHyperParams {
        ForestHyperParams { n_trees: 6, seed: 1, ..Default::default() }
    }

    fn data() -> (TimeSeries, SplitSpec) {
        let ts = align_daytime(&synthetic::ibadan_like(2021, 1, 4));
        (ts, SplitSpec::default())
    }

    #[test]
    fn schemas() {
        assert_eq!(stage1_feature_names().len(), 10);
        assert_eq!(stage2_feature_names().len(), 14);
        assert_eq!(stage2_feature_names()[13], "cloud_type");
    }

    #[test]
    fn trains_six_forests_and_round_trips() {
        let (ts, spec) = data();
        let split = split_holdout_and_train_test(&ts, &spec).unwrap();
        let p = TwoStagePipeline::train(&split.train, Season::Annual, &spec, &small_params()).unwrap();
        assert_eq!(p.stage1.len() + p.stage2.len(), 6);
        assert!(p.stage2.iter().all(|m| m.n_features() == 14));
        let mut buf = Vec::new();
        p.write(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"SCPL");
        assert_eq!(TwoStagePipeline::read(buf.as_slice()).unwrap(), p);

        let preds = p.predict(split.test.records()).unwrap();
        assert!(preds.iter().all(|r| r.clearsky_ghi >= 0.0 && r.ghi.unwrap() >= 0.0));
        let eval = p.evaluate(&split.test, Season::Annual, false).unwrap();
        assert_eq!(eval.metrics.rows.len(), 6);
        assert!(eval.metrics.get("ghi").unwrap().nrmse < 0.6);
    }

    #[test]
    fn missing_cloud_type_yields_clearsky_only() {
        let (ts, spec) = data();
        let p = TwoStagePipeline::train(&ts, Season::Dry, &spec, &small_params()).unwrap();
        let mut r = ts.records()[10].clone();
        r.cloud_type = None;
        let out = p.predict(&[r]).unwrap();
        assert!(out[0].ghi.is_none() && out[0].dni.is_none());
        assert!(out[0].clearsky_ghi >= 0.0);
    }

    #[test]
    fn season_mismatch_needs_force() {
        let (ts, spec) = data();
        let p = TwoStagePipeline::train(&ts, Season::Wet, &spec, &small_params()).unwrap();
        assert!(matches!(p.evaluate(&ts, Season::Dry, false), Err(Error::SeasonMismatch { .. })));
        assert!(p.evaluate(&ts, Season::Dry, true).is_ok());
        assert!(p.evaluate(&ts, Season::Wet, false).is_ok());
    }

    #[test]
    fn empty_season_slice_is_an_error() {
        let (ts, spec) = data();
        let wet_only = season_filter(&ts, Season::Wet, &spec);
        assert!(matches!(
            TwoStagePipeline::train(&wet_only, Season::Dry, &spec, &small_params()),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn constant_weather_gives_constant_predictions() {
        let (ts, spec) = data();
        let p = TwoStagePipeline::train(&ts, Season::Annual, &spec, &small_params()).unwrap();
        let template = ts.records()[100].clone();
        let rows = vec![template; 5];
        let out = p.predict(&rows).unwrap();
        assert!(out.windows(2).all(|w| w[0].ghi == w[1].ghi && w[0].clearsky_dni == w[1].clearsky_dni));
    }
}
