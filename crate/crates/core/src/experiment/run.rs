use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use serde::Serialize;

use super::artifacts::{ArtifactWriter, OutputLock, RunManifest};
use super::config::RunConfig;
use crate::eda::{correlation_matrix, default_correlation_variables, month_hour_pivot};
use crate::ingest::{load_path, summary_stats, validate, HourlyRecord, SummaryTable, TimeSeries, ValidationReport, Variable};
use crate::metrics::MetricsReport;
use crate::pipeline::{
    daily_irradiance, write_daily_irradiance_csv, write_predictions_with_actuals_csv, Evaluation, PredictionRow,
    TwoStagePipeline,
};
use crate::preprocess::{
    align_daytime, filter_daytime, season_filter, shift_timestamps, split_holdout_and_train_test, HoldoutSplit,
    Season, SplitSpec,
};
use crate::pv::{simulate_energy, write_daily_csv, write_hourly_csv, DailyEnergy, IrradianceHour, PvSystemSpec};
use crate::{Error, Result};

/// Loaded data with every preprocessing product a run needs.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub raw: TimeSeries,
    pub summary: SummaryTable,
    pub validation_report: ValidationReport,
    /// Aligned and daytime-filtered.
    pub daytime: TimeSeries,
    pub split: HoldoutSplit,
    pub spec: SplitSpec,
}

/// Ingest, summarise, validate, align and split.
pub fn prepare(cfg: &RunConfig) -> Result<Prepared> {
    let spec = cfg.split_spec()?;
    let path = cfg.data_path();
    let raw = load_path(&path, cfg.data.header_mode).map_err(|e| Error::stage("ingest", e))?;
    prepare_series(raw, spec)
}

pub fn prepare_series(raw: TimeSeries, spec: SplitSpec) -> Result<Prepared> {
    let summary = summary_stats(&raw).map_err(|e| Error::stage("summary", e))?;
    let validation_report = validate(&raw);
    if !validation_report.is_clean() {
        tracing::warn!(
            range_violations = validation_report.range_violations.len(),
            missing = validation_report.rows_with_missing_values(),
            duplicates = validation_report.duplicate_timestamps.len(),
            "dataset validation found issues"
        );
    }
    let daytime = align_daytime(&raw);
    let split = split_holdout_and_train_test(&daytime, &spec).map_err(|e| Error::stage("split", e))?;
    tracing::info!(
        raw = raw.len(),
        daytime = daytime.len(),
        train = split.train.len(),
        test = split.test.len(),
        validation = split.validation.len(),
        "data prepared"
    );
    Ok(Prepared {
        raw,
        summary,
        validation_report,
        daytime,
        split,
        spec,
    })
}

/// Test and validation metrics of one seasonal pipeline.
#[derive(Debug, Clone, Serialize)]
pub struct SeasonResult {
    pub season: Season,
    pub test: Evaluation,
    pub validation: Option<Evaluation>,
    pub n_train_stage1: usize,
    pub n_train_stage2: usize,
}

/// One row of the feature-importance table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImportanceRow {
    pub season: Season,
    pub stage: u8,
    pub target: String,
    pub feature: String,
    pub importance: f64,
    pub rank: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub output_dir: PathBuf,
    pub seasons: Vec<SeasonResult>,
    pub importances: Vec<ImportanceRow>,
    /// Daily energy per PV system label.
    pub energy: BTreeMap<String, Vec<DailyEnergy>>,
    pub manifest: PathBuf,
}

pub fn model_file_name(season: Season) -> String {
    format!("models/{season}.model")
}

/// Trains the three seasonal pipelines and writes every artifact.
pub fn run_full_experiment(cfg: &RunConfig) -> Result<RunOutcome> {
    execute(cfg, "run", true)
}

/// Rebuilds all result CSVs from the models cached by an earlier run.
pub fn regenerate_report(cfg: &RunConfig) -> Result<RunOutcome> {
    execute(cfg, "report", false)
}

fn execute(cfg: &RunConfig, command: &str, train: bool) -> Result<RunOutcome> {
    cfg.validate()?;
    let out_dir = cfg.output_path();
    let _lock = OutputLock::acquire(&out_dir)?;
    let mut writer = ArtifactWriter::new(&out_dir)?;
    let mut manifest = RunManifest::start(command, cfg.hash(), Some(cfg.seed));
    let systems = cfg.resolve_systems()?;
    let params = cfg.forest_params();

    let prepared = prepare(cfg)?;
    record_counts(&mut manifest, &prepared);
    writer.write("summary.csv", |w| prepared.summary.write_csv(w))?;
    writer.write("validation_report.json", |w| write_json(w, &prepared.validation_report))?;
    write_eda(&mut writer, &prepared)?;

    let mut seasons = Vec::new();
    let mut importances = Vec::new();
    let mut energy = BTreeMap::new();
    for season in Season::ALL {
        let model_name = model_file_name(season);
        let pipeline = if train {
            let p = TwoStagePipeline::train(&prepared.split.train, season, &prepared.spec, &params)
                .map_err(|e| Error::stage(format!("train {season}"), e))?;
            writer.write(&model_name, |w| p.write(w))?;
            p
        } else {
            let path = writer.path(&model_name);
            if !path.exists() {
                return Err(Error::Config(format!(
                    "cached model {} not found; run the full experiment first",
                    path.display()
                )));
            }
            let p = TwoStagePipeline::load(&path)?;
            if p.split != prepared.spec || p.season != season {
                return Err(Error::Config(format!(
                    "cached model {} was trained with a different split or season",
                    path.display()
                )));
            }
            p
        };

        let result = evaluate_season(&pipeline, &prepared)?;
        writer.write(&format!("metrics_{season}.csv"), |w| result.test.metrics.write_csv(w))?;
        if let Some(v) = &result.validation {
            writer.write(&format!("metrics_{season}_validation.csv"), |w| v.metrics.write_csv(w))?;
        }
        writer.write(&format!("metrics_{season}_diagnostics.csv"), |w| write_diagnostics(w, &result))?;
        record_metrics(&mut manifest, &result);
        importances.extend(importance_rows(&pipeline));

        if season == Season::Annual {
            energy = emit_validation_year(&mut writer, &pipeline, &prepared, &systems)?;
        }
        seasons.push(result);
    }
    writer.write("feature_importance.csv", |w| write_importances(w, &importances))?;
    warn_on_importance_order(&importances);

    let manifest_path = manifest.finish(&mut writer)?;
    Ok(RunOutcome {
        output_dir: out_dir,
        seasons,
        importances,
        energy,
        manifest: manifest_path,
    })
}

fn record_counts(manifest: &mut RunManifest, p: &Prepared) {
    manifest.count("raw", p.raw.len());
    manifest.count("daytime", p.daytime.len());
    manifest.count("train", p.split.train.len());
    manifest.count("test", p.split.test.len());
    manifest.count("validation", p.split.validation.len());
    manifest.count("missing_cloud_type", p.validation_report.missing_cloud_type);
}

fn record_metrics(manifest: &mut RunManifest, result: &SeasonResult) {
    let mut add = |split: &str, report: &MetricsReport| {
        for r in &report.rows {
            let key = format!("{}.{split}.{}", result.season, r.target);
            let mut m = BTreeMap::new();
            m.insert("rmse".to_string(), r.rmse);
            m.insert("mae".to_string(), r.mae);
            m.insert("nrmse".to_string(), r.nrmse);
            m.insert("mase".to_string(), r.mase);
            manifest.metrics.insert(key, m);
        }
    };
    add("test", &result.test.metrics);
    if let Some(v) = &result.validation {
        add("validation", &v.metrics);
    }
    manifest.count(format!("{}.train_stage1", result.season), result.n_train_stage1);
    manifest.count(format!("{}.train_stage2", result.season), result.n_train_stage2);
}

/// Scores a pipeline on its season's slice of the test split and of the
/// validation year.
pub fn evaluate_season(pipeline: &TwoStagePipeline, prepared: &Prepared) -> Result<SeasonResult> {
    let season = pipeline.season;
    let test = pipeline
        .evaluate(&prepared.split.test, season, false)
        .map_err(|e| Error::stage(format!("evaluate {season} test"), e))?;
    let validation = if season_filter(&prepared.split.validation, season, &prepared.spec).is_empty() {
        tracing::warn!(%season, "no validation-year rows for this season");
        None
    } else {
        Some(
            pipeline
                .evaluate(&prepared.split.validation, season, false)
                .map_err(|e| Error::stage(format!("evaluate {season} validation"), e))?,
        )
    };
    Ok(SeasonResult {
        season,
        test,
        validation,
        n_train_stage1: pipeline.n_train_stage1,
        n_train_stage2: pipeline.n_train_stage2,
    })
}

fn emit_validation_year(
    writer: &mut ArtifactWriter,
    pipeline: &TwoStagePipeline,
    prepared: &Prepared,
    systems: &[(String, PvSystemSpec)],
) -> Result<BTreeMap<String, Vec<DailyEnergy>>> {
    let year = prepared.spec.validation_year;
    let records = prepared.split.validation.records();
    if records.is_empty() {
        return Err(Error::stage(
            "predict",
            Error::EmptyInput(format!("validation year {year} is absent from the dataset")),
        ));
    }
    let predictions = pipeline.predict(records).map_err(|e| Error::stage("predict", e))?;
    writer.write(&format!("predictions_{year}_hourly.csv"), |w| {
        write_predictions_with_actuals_csv(&predictions, records, w)
    })?;
    let daily = daily_irradiance(&predictions, records)?;
    writer.write(&format!("predictions_{year}_daily.csv"), |w| write_daily_irradiance_csv(&daily, w))?;

    let (irradiance, weather) = join_weather(&predictions, records)?;
    let mut energy = BTreeMap::new();
    for (label, system) in systems {
        let sim = simulate_energy(&irradiance, &weather, system)
            .map_err(|e| Error::stage(format!("simulate {label}"), e))?;
        writer.write(&format!("energy_hourly_{label}.csv"), |w| write_hourly_csv(&sim.hourly, w))?;
        writer.write(&format!("energy_daily_{label}.csv"), |w| write_daily_csv(&sim.daily, w))?;
        energy.insert(label.clone(), sim.daily);
    }
    Ok(energy)
}

/// Pairs predicted irradiance with the weather of the same hour. Hours
/// without an actual-irradiance prediction are skipped.
pub fn join_weather(predictions: &[PredictionRow], weather: &[HourlyRecord]) -> Result<(Vec<IrradianceHour>, Vec<HourlyRecord>)> {
    let index: HashMap<NaiveDateTime, &HourlyRecord> = weather.iter().map(|r| (r.timestamp, r)).collect();
    let mut irr = Vec::with_capacity(predictions.len());
    let mut wx = Vec::with_capacity(predictions.len());
    let mut skipped = 0usize;
    for p in predictions {
        let (Some(ghi), Some(dni), Some(dhi)) = (p.ghi, p.dni, p.dhi) else {
            skipped += 1;
            continue;
        };
        let r = index
            .get(&p.timestamp)
            .ok_or_else(|| Error::Misaligned(format!("no weather record at {}", p.timestamp)))?;
        irr.push(IrradianceHour {
            timestamp: p.timestamp,
            ghi,
            dni,
            dhi,
        });
        wx.push((*r).clone());
    }
    if skipped > 0 {
        tracing::warn!(hours = skipped, "hours without actual-irradiance predictions left out of the energy simulation");
    }
    Ok((irr, wx))
}

fn write_eda(writer: &mut ArtifactWriter, prepared: &Prepared) -> Result<()> {
    let vars = default_correlation_variables();
    let day = correlation_matrix(&prepared.daytime, &vars).map_err(|e| Error::stage("eda", e))?;
    writer.write("correlation_daytime.csv", |w| day.write_long_csv(w))?;
    let all = correlation_matrix(&prepared.raw, &vars).map_err(|e| Error::stage("eda", e))?;
    writer.write("correlation_all.csv", |w| all.write_long_csv(w))?;
    let aligned = shift_timestamps(&prepared.raw, 30);
    let pivot = month_hour_pivot(&aligned, Variable::Ghi);
    writer.write("pivot_ghi.csv", |w| pivot.write_csv(w))?;
    Ok(())
}

pub fn importance_rows(pipeline: &TwoStagePipeline) -> Vec<ImportanceRow> {
    let mut rows = Vec::new();
    for (stage, models) in [(1u8, &pipeline.stage1), (2u8, &pipeline.stage2)] {
        for m in models {
            for (rank, (feature, importance)) in m.ranked_importances().into_iter().enumerate() {
                rows.push(ImportanceRow {
                    season: pipeline.season,
                    stage,
                    target: m.target.clone(),
                    feature,
                    importance,
                    rank: rank + 1,
                });
            }
        }
    }
    rows
}

pub fn write_importances(w: impl Write, rows: &[ImportanceRow]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["season", "stage", "target", "feature", "importance", "rank"])?;
    for r in rows {
        out.write_record([
            r.season.to_string(),
            r.stage.to_string(),
            r.target.clone(),
            r.feature.clone(),
            format!("{:.6}", r.importance),
            r.rank.to_string(),
        ])?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}

fn warn_on_importance_order(rows: &[ImportanceRow]) {
    let top = rows
        .iter()
        .find(|r| r.season == Season::Annual && r.stage == 2 && r.target == "ghi" && r.rank == 1);
    if let Some(top) = top {
        if top.feature != Variable::ClearskyGhi.key() {
            tracing::warn!(feature = %top.feature, "annual stage-2 GHI model does not rank clearsky_ghi first");
        }
    }
}

fn write_diagnostics(w: impl Write, result: &SeasonResult) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["split", "variant", "target", "rmse", "mae", "nrmse", "mase", "n"])?;
    let mut emit = |split: &str, eval: &Evaluation| -> Result<()> {
        for (variant, report) in [
            ("two_stage", &eval.metrics),
            ("teacher_forced", &eval.teacher_forced),
            ("persistence", &eval.persistence),
        ] {
            for r in &report.rows {
                out.write_record([
                    split.to_string(),
                    variant.to_string(),
                    r.target.clone(),
                    format!("{:.4}", r.rmse),
                    format!("{:.4}", r.mae),
                    format!("{:.4}", r.nrmse),
                    format!("{:.4}", r.mase),
                    r.n.to_string(),
                ])?;
            }
        }
        Ok(())
    };
    emit("test", &result.test)?;
    if let Some(v) = &result.validation {
        emit("validation", v)?;
    }
    out.flush().map_err(|e| Error::Csv(e.into()))
}

pub fn write_json(w: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value).map_err(|e| Error::Config(e.to_string()))?;
    writeln!(w).map_err(|e| Error::io("<json>", e))
}

/// Reads a predictions CSV as written by `predict`.
pub fn read_predictions_csv(path: &Path) -> Result<Vec<PredictionRow>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let cols = [
        col("timestamp")?,
        col("pred_clearsky_ghi")?,
        col("pred_clearsky_dni")?,
        col("pred_clearsky_dhi")?,
        col("pred_ghi")?,
        col("pred_dni")?,
        col("pred_dhi")?,
    ];
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = i as u64 + 2;
        let field = |j: usize| rec.get(cols[j]).unwrap_or("").trim();
        let bad = |what: &str| Error::Row {
            line,
            message: format!("invalid {what} '{}'", field(0)),
        };
        let timestamp = NaiveDateTime::parse_from_str(field(0), "%Y-%m-%d %H:%M").map_err(|_| bad("timestamp"))?;
        let num = |j: usize| -> Result<f64> {
            field(j).parse::<f64>().map_err(|_| Error::Row {
                line,
                message: format!("invalid number '{}'", field(j)),
            })
        };
        let opt = |j: usize| -> Result<Option<f64>> { if field(j).is_empty() { Ok(None) } else { num(j).map(Some) } };
        rows.push(PredictionRow {
            timestamp,
            clearsky_ghi: num(1)?,
            clearsky_dni: num(2)?,
            clearsky_dhi: num(3)?,
            ghi: opt(4)?,
            dni: opt(5)?,
            dhi: opt(6)?,
        });
    }
    Ok(rows)
}

/// Daytime records of a dataset file in model time (aligned to the hour).
pub fn model_inputs(ts: &TimeSeries) -> TimeSeries {
    align_daytime(ts)
}

/// Observed irradiance as energy-simulation input, aligned like model data.
pub fn observed_irradiance(ts: &TimeSeries) -> (Vec<IrradianceHour>, Vec<HourlyRecord>) {
    let aligned = filter_daytime(&shift_timestamps(ts, 30));
    let records = aligned.into_records();
    (records.iter().map(IrradianceHour::observed).collect(), records)
}
