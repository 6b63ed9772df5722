use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use chrono::Datelike;
use solarcast::eda::{correlation_matrix, default_correlation_variables, month_hour_pivot};
use solarcast::experiment::{
    hash_parts, join_weather, model_inputs, observed_irradiance, prepare, prepare_series, read_predictions_csv,
    regenerate_report, run_full_experiment, write_json, ArtifactWriter, OutputLock, RunConfig, RunManifest, SystemRef,
};
use solarcast::ingest::{load_path, summary_stats, validate, write_csv};
use solarcast::pipeline::{write_predictions_csv, TwoStagePipeline};
use solarcast::preprocess::{parse_month_set, shift_timestamps, Season};
use solarcast::pv::{simulate_energy, write_daily_csv, write_hourly_csv};
use solarcast::{synthetic, Error, HeaderMode, Variable};

use crate::{Command, DataArgs, EdaSubset, EvalSplit, RunArgs};

pub fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Ingest { data, summary } => ingest(&data, &summary),
        Command::Preprocess { run } => preprocess(&run),
        Command::Train { run, season, model_out } => train(&run, season, &model_out),
        Command::Evaluate {
            model,
            split,
            report,
            data,
            season,
            force,
        } => evaluate(&model, split, &report, &data, season, force),
        Command::Predict {
            model,
            input,
            out,
            header_mode,
        } => predict(&model, &input, &out, header_mode),
        Command::Simulate {
            module,
            predictions,
            data,
            year,
            out,
        } => simulate(&module, predictions.as_deref(), &data, year, &out),
        Command::Report { run } => {
            let cfg = build_config(&run)?;
            let outcome = regenerate_report(&cfg)?;
            println!("report written to {}", outcome.output_dir.display());
            Ok(())
        }
        Command::Run { run } => {
            let cfg = build_config(&run)?;
            let outcome = run_full_experiment(&cfg)?;
            for s in &outcome.seasons {
                for r in &s.test.metrics.rows {
                    println!(
                        "{:<7} {:<13} rmse {:>8.2}  nrmse {:.3} ({})  mase {:.3}",
                        s.season, r.target, r.rmse, r.nrmse, r.nrmse_rating, r.mase
                    );
                }
            }
            println!("artifacts written to {}", outcome.output_dir.display());
            Ok(())
        }
        Command::Eda {
            data,
            subset,
            variable,
            out,
        } => eda(&data, subset, &variable, &out),
        Command::Synth {
            out,
            first_year,
            years,
            seed,
        } => synth(&out, first_year, years, seed),
    }
}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    Error::Config(msg.into()).into()
}

fn data_path(data: &DataArgs) -> Result<PathBuf> {
    data.data.clone().ok_or_else(|| usage("--data is required"))
}

/// Loads the config file (if any) and applies flag overrides.
fn build_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let data = data_path(&args.data).map_err(|_| usage("--data or --config is required"))?;
            let seed = args
                .seed
                .ok_or_else(|| usage("--seed is required (or set `seed` in a config file)"))?;
            RunConfig::new(data, "output", seed)
        }
    };
    let cwd = PathBuf::from(".");
    // flag paths are relative to the working directory, config paths to the file
    if let Some(d) = &args.data.data {
        cfg.data.path = absolutize(d, &cwd);
    }
    if let Some(m) = args.data.header_mode {
        cfg.data.header_mode = m;
    }
    if let Some(o) = &args.out {
        cfg.output_dir = absolutize(o, &cwd);
    } else if args.config.is_none() {
        cfg.output_dir = absolutize(Path::new("output"), &cwd);
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(y) = args.validation_year {
        cfg.split.validation_year = y;
    }
    if let Some(f) = args.train_fraction {
        cfg.split.train_fraction = f;
    }
    if let Some(w) = &args.wet_months {
        cfg.split.wet_months = parse_month_set(w)?.into_iter().collect();
        if args.dry_months.is_none() {
            cfg.split.dry_months = None;
        }
    }
    if let Some(d) = &args.dry_months {
        cfg.split.dry_months = Some(parse_month_set(d)?.into_iter().collect());
    }
    if let Some(m) = args.split_mode {
        cfg.split.mode = m;
    }
    if let Some(n) = args.n_trees {
        cfg.forest.n_trees = n;
    }
    if let Some(d) = args.max_depth {
        cfg.forest.max_depth = Some(d);
    }
    if let Some(n) = args.min_samples_leaf {
        cfg.forest.min_samples_leaf = n;
    }
    if let Some(n) = args.min_samples_split {
        cfg.forest.min_samples_split = n;
    }
    if let Some(m) = args.max_features {
        cfg.forest.max_features = m;
    }
    if args.no_bootstrap {
        cfg.forest.bootstrap = false;
    }
    if !args.systems.is_empty() {
        cfg.systems = args
            .systems
            .iter()
            .map(|s| {
                if s.parse::<solarcast::pv::BundledSystem>().is_ok() {
                    SystemRef(s.clone())
                } else {
                    SystemRef(absolutize(Path::new(s), &cwd).display().to_string())
                }
            })
            .collect();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn absolutize(p: &Path, base: &Path) -> PathBuf {
    if p.is_absolute() {
        return p.to_path_buf();
    }
    std::path::absolute(base.join(p)).unwrap_or_else(|_| base.join(p))
}

fn parent_dir(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn file_name(path: &Path) -> Result<String> {
    path.file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .ok_or_else(|| usage(format!("{} is not a file path", path.display())))
}

fn ingest(data: &DataArgs, summary_path: &Path) -> Result<()> {
    let path = data_path(data)?;
    let out = parent_dir(summary_path);
    let _lock = OutputLock::acquire(&out)?;
    let mut writer = ArtifactWriter::new(&out)?;
    let mode = data.header_mode.unwrap_or_default();
    let mut manifest = RunManifest::start("ingest", hash_parts([("data", path.display().to_string())]), None);
    let ts = load_path(&path, mode).with_context(|| format!("loading {}", path.display()))?;
    let summary = summary_stats(&ts)?;
    let report = validate(&ts);
    writer.write(&file_name(summary_path)?, |w| summary.write_csv(w))?;
    writer.write("validation_report.json", |w| write_json(w, &report))?;
    manifest.count("records", ts.len());
    manifest.count("missing_cloud_type", report.missing_cloud_type);
    manifest.count("range_violations", report.range_violations.len());
    manifest.finish(&mut writer)?;
    println!(
        "{} records, {} range violations, {} rows with missing values",
        ts.len(),
        report.range_violations.len(),
        report.rows_with_missing_values()
    );
    Ok(())
}

fn preprocess(args: &RunArgs) -> Result<()> {
    let cfg = build_config(args)?;
    let out = cfg.output_path();
    let _lock = OutputLock::acquire(&out)?;
    let mut writer = ArtifactWriter::new(&out)?;
    let mut manifest = RunManifest::start("preprocess", cfg.hash(), Some(cfg.seed));
    let prepared = prepare(&cfg)?;
    for (name, part) in [
        ("train.csv", &prepared.split.train),
        ("test.csv", &prepared.split.test),
        ("validation.csv", &prepared.split.validation),
    ] {
        writer.write(name, |w| write_csv(part, w))?;
        manifest.count(name.trim_end_matches(".csv"), part.len());
    }
    manifest.count("raw", prepared.raw.len());
    manifest.count("daytime", prepared.daytime.len());
    manifest.note("wet_months", format!("{:?}", prepared.spec.wet_months));
    manifest.note("dry_months", format!("{:?}", prepared.spec.dry_months));
    manifest.note("split_mode", format!("{:?}", prepared.spec.mode));
    manifest.note("validation_year", prepared.spec.validation_year.to_string());
    manifest.finish(&mut writer)?;
    Ok(())
}

fn train(args: &RunArgs, season: Season, model_out: &Path) -> Result<()> {
    let cfg = build_config(args)?;
    let dir = parent_dir(model_out);
    let _lock = OutputLock::acquire(&dir)?;
    let mut writer = ArtifactWriter::new(&dir)?;
    let mut manifest = RunManifest::start(format!("train_{season}"), cfg.hash(), Some(cfg.seed));
    let prepared = prepare(&cfg)?;
    let pipeline = TwoStagePipeline::train(&prepared.split.train, season, &prepared.spec, &cfg.forest_params())
        .map_err(|e| Error::stage(format!("train {season}"), e))?;
    writer.write(&file_name(model_out)?, |w| pipeline.write(w))?;
    manifest.count("train_stage1", pipeline.n_train_stage1);
    manifest.count("train_stage2", pipeline.n_train_stage2);
    manifest.finish(&mut writer)?;
    println!("{season} pipeline written to {}", model_out.display());
    Ok(())
}

fn load_model(path: &Path) -> Result<TwoStagePipeline> {
    if !path.exists() {
        return Err(usage(format!("model file {} does not exist", path.display())));
    }
    Ok(TwoStagePipeline::load(path)?)
}

fn evaluate(
    model: &Path,
    split: EvalSplit,
    report: &Path,
    data: &DataArgs,
    season: Option<Season>,
    force: bool,
) -> Result<()> {
    let pipeline = load_model(model)?;
    let path = data_path(data)?;
    let dir = parent_dir(report);
    let _lock = OutputLock::acquire(&dir)?;
    let mut writer = ArtifactWriter::new(&dir)?;
    let hash = hash_parts([
        ("model", model.display().to_string()),
        ("data", path.display().to_string()),
        ("split", format!("{split:?}")),
    ]);
    let mut manifest = RunManifest::start("evaluate", hash, Some(pipeline.split.shuffle_seed));
    let raw = load_path(&path, data.header_mode.unwrap_or_default())?;
    let prepared = prepare_series(raw, pipeline.split.clone())?;
    let slice = match split {
        EvalSplit::Test => &prepared.split.test,
        EvalSplit::Validation => &prepared.split.validation,
    };
    let eval = pipeline.evaluate(slice, season.unwrap_or(pipeline.season), force)?;
    writer.write(&file_name(report)?, |w| eval.metrics.write_csv(w))?;
    manifest.count("rows", eval.n_rows);
    for r in &eval.metrics.rows {
        manifest.metrics.insert(
            r.target.clone(),
            [("rmse", r.rmse), ("mae", r.mae), ("nrmse", r.nrmse), ("mase", r.mase)]
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
        );
    }
    manifest.finish(&mut writer)?;
    Ok(())
}

fn predict(model: &Path, input: &Path, out: &Path, mode: HeaderMode) -> Result<()> {
    let pipeline = load_model(model)?;
    let dir = parent_dir(out);
    let _lock = OutputLock::acquire(&dir)?;
    let mut writer = ArtifactWriter::new(&dir)?;
    let hash = hash_parts([
        ("model", model.display().to_string()),
        ("input", input.display().to_string()),
    ]);
    let mut manifest = RunManifest::start("predict", hash, None);
    let ts = model_inputs(&load_path(input, mode)?);
    let rows = pipeline.predict(ts.records())?;
    writer.write(&file_name(out)?, |w| write_predictions_csv(&rows, w))?;
    manifest.count("rows", rows.len());
    manifest.count("without_actual", rows.iter().filter(|r| r.ghi.is_none()).count());
    manifest.finish(&mut writer)?;
    Ok(())
}

fn simulate(module: &str, predictions: Option<&Path>, data: &DataArgs, year: Option<i32>, out: &Path) -> Result<()> {
    let system_ref = SystemRef(module.to_string());
    let system = system_ref.resolve(Path::new("."))?;
    let label = system_ref.label();
    let path = data_path(data)?;
    let _lock = OutputLock::acquire(out)?;
    let mut writer = ArtifactWriter::new(out)?;
    let hash = hash_parts([
        ("module", module.to_string()),
        ("data", path.display().to_string()),
        ("predictions", predictions.map(|p| p.display().to_string()).unwrap_or_default()),
        ("year", year.map(|y| y.to_string()).unwrap_or_default()),
    ]);
    let mut manifest = RunManifest::start(format!("simulate_{label}"), hash, None);
    let mut ts = load_path(&path, data.header_mode.unwrap_or_default())?;
    let (irradiance, weather) = match predictions {
        Some(p) => {
            let rows = read_predictions_csv(p)?;
            let weather = model_inputs(&ts);
            join_weather(&rows, weather.records())?
        }
        None => {
            if let Some(y) = year {
                ts = ts.filter(|r| (r.timestamp + chrono::Duration::minutes(30)).year() == y);
            }
            observed_irradiance(&ts)
        }
    };
    let sim = simulate_energy(&irradiance, &weather, &system)
        .map_err(|e| Error::stage(format!("simulate {label}"), e))?;
    writer.write(&format!("energy_hourly_{label}.csv"), |w| write_hourly_csv(&sim.hourly, w))?;
    writer.write(&format!("energy_daily_{label}.csv"), |w| write_daily_csv(&sim.daily, w))?;
    manifest.count("hours", sim.hourly.len());
    manifest.count("days", sim.daily.len());
    manifest.note("system", system.name.clone());
    manifest.note("module", system.module.name.clone());
    manifest.finish(&mut writer)?;
    let total: f64 = sim.daily.iter().map(|d| d.energy_kwh).sum();
    println!("{} ({}): {:.1} kWh over {} days", system.name, system.module.name, total, sim.daily.len());
    Ok(())
}

fn eda(data: &DataArgs, subset: EdaSubset, variable: &str, out: &Path) -> Result<()> {
    let var = Variable::from_column_name(variable).ok_or_else(|| usage(format!("unknown variable '{variable}'")))?;
    let path = data_path(data)?;
    let _lock = OutputLock::acquire(out)?;
    let mut writer = ArtifactWriter::new(out)?;
    let subset_name = match subset {
        EdaSubset::Daytime => "daytime",
        EdaSubset::All => "all",
    };
    let hash = hash_parts([
        ("data", path.display().to_string()),
        ("subset", subset_name.to_string()),
        ("variable", var.key()),
    ]);
    let mut manifest = RunManifest::start("eda", hash, None);
    let raw = load_path(&path, data.header_mode.unwrap_or_default())?;
    let ts = match subset {
        EdaSubset::Daytime => model_inputs(&raw),
        EdaSubset::All => raw.clone(),
    };
    let corr = correlation_matrix(&ts, &default_correlation_variables())?;
    for v in corr.undefined_variables() {
        tracing::warn!(variable = %v, "constant column; correlations undefined");
    }
    writer.write(&format!("correlation_{subset_name}.csv"), |w| corr.write_long_csv(w))?;
    let pivot = month_hour_pivot(&shift_timestamps(&raw, 30), var);
    writer.write(&format!("pivot_{}.csv", var.key()), |w| pivot.write_csv(w))?;
    manifest.count("records", ts.len());
    manifest.finish(&mut writer)?;
    Ok(())
}

fn synth(out: &Path, first_year: i32, years: u32, seed: u64) -> Result<()> {
    if years == 0 {
        return Err(usage("--years must be positive"));
    }
    let ts = synthetic::ibadan_like(first_year, years, seed);
    if let Some(dir) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let file = File::create(out).with_context(|| format!("creating {}", out.display()))?;
    write_csv(&ts, BufWriter::new(file))?;
    println!("{} synthetic records written to {}", ts.len(), out.display());
    Ok(())
}
