use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;

use super::{Cli, CliError, Command, GlobalArgs, RunConfig};
use crate::data::{introduce_mcar_with, read_csv, write_csv, write_mask_csv, Dataset, FeatureKind, Mask};
use crate::evaluation::{
    congeniality_experiment, cross_validate, cross_validate_masked, gain_gradcheck, mean_impute, mean_std,
    mlp_gradcheck, oracle_checks, rmse_missing, run_ablation, CheckResult, CvOutcome, CvSettings, GradcheckSettings,
    LogisticConfig, MetricsReport, OracleTrainConfig,
};
use crate::gain::{impute, read_model, train, write_model, GainModel, LossRecord};
use crate::nn::Matrix;
use crate::rng::RngStream;

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    Ok(BufWriter::new(File::create(path).map_err(|e| io_err(path, e))?))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

/// Resolves the effective configuration from file, `--set` pairs and global flags.
fn resolve(global: &GlobalArgs) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    cfg.train.log_every = 1000;
    if let Some(path) = &global.config {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        cfg.apply_text(&text)?;
    }
    for pair in &global.set {
        let (k, v) = pair
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("--set expects KEY=VALUE, got {pair:?}")))?;
        cfg.set(k.trim(), v)?;
    }
    if let Some(seed) = global.seed {
        cfg.train.seed = seed;
    }
    if let Some(dir) = &global.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(token) = &global.missing_token {
        cfg.missing_token = token.clone();
    }
    Ok(cfg)
}

fn dataset_path(cfg: &RunConfig, input: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    input
        .clone()
        .or_else(|| cfg.dataset.clone())
        .ok_or_else(|| CliError::Input("no dataset: pass --input or set dataset= in the config".into()))
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "data".into())
}

/// A dataset with its label column (if configured and present) split off.
struct Loaded {
    features: Dataset,
    label: Option<LabelColumn>,
}

struct LabelColumn {
    name: String,
    index: usize,
    values: Vec<f64>,
    observed: Vec<bool>,
}

impl LabelColumn {
    fn binary_labels(&self) -> Result<Vec<f64>, CliError> {
        if self.observed.iter().any(|&o| !o) || self.values.iter().any(|&v| v != 0.0 && v != 1.0) {
            return Err(CliError::Input(format!(
                "label column {} must be fully observed and 0/1",
                self.name
            )));
        }
        Ok(self.values.clone())
    }
}

fn split_label(ds: Dataset, label: Option<&str>) -> Loaded {
    match label.and_then(|name| ds.column_index(name).map(|i| (name, i))) {
        None => Loaded { features: ds, label: None },
        Some((name, index)) => Loaded {
            label: Some(LabelColumn {
                name: name.to_string(),
                index,
                values: ds.raw().column(index),
                observed: (0..ds.n()).map(|r| ds.mask().get(r, index)).collect(),
            }),
            features: ds.drop_columns(&[index]),
        },
    }
}

fn load(path: &Path, cfg: &RunConfig, kinds: Option<&[FeatureKind]>) -> Result<Loaded, CliError> {
    let ds = read_csv(path, &cfg.missing_token, kinds)?;
    Ok(split_label(ds, cfg.label.as_deref()))
}

/// Loads data for an experiment: either fully observed (masked later) or
/// already masked with a ground-truth file.
fn load_experiment(cfg: &RunConfig, path: &Path) -> Result<Loaded, CliError> {
    let mut loaded = load(path, cfg, None)?;
    if !loaded.features.mask().is_fully_observed() {
        let truth_path = cfg.ground_truth.as_ref().ok_or_else(|| {
            CliError::Input(format!(
                "{} has missing cells; set ground_truth= to a complete copy to compute RMSE",
                path.display()
            ))
        })?;
        let truth = load(truth_path, cfg, Some(&loaded_kinds_with_label(&loaded)))?;
        loaded.features = loaded.features.with_ground_truth(&truth.features)?;
    }
    Ok(loaded)
}

fn loaded_kinds_with_label(loaded: &Loaded) -> Vec<FeatureKind> {
    let mut kinds = loaded.features.kinds();
    if let Some(l) = &loaded.label {
        kinds.insert(l.index, FeatureKind::Binary);
    }
    kinds
}

/// Writes features plus a passed-through label column in their original order.
fn write_with_label(
    path: &Path,
    features: &Dataset,
    feature_mask: &Mask,
    label: Option<&LabelColumn>,
    token: &str,
    ground_truth: bool,
) -> Result<(), CliError> {
    let grid = if ground_truth {
        features
            .raw_ground_truth()
            .ok_or_else(|| CliError::Input("no ground truth to write".into()))?
    } else {
        features.raw()
    };
    let (n, d) = (features.n(), features.d());
    let mut names = features.names();
    let mut columns: Vec<Vec<f64>> = (0..d).map(|c| grid.column(c)).collect();
    let mut observed: Vec<Vec<bool>> = (0..d).map(|c| (0..n).map(|r| feature_mask.get(r, c)).collect()).collect();
    if let Some(l) = label {
        names.insert(l.index, l.name.clone());
        columns.insert(l.index, l.values.clone());
        observed.insert(l.index, l.observed.clone());
    }
    let width = names.len();
    let data: Vec<f64> = (0..n).flat_map(|r| columns.iter().map(move |c| c[r])).collect();
    let bits: Vec<bool> = (0..n).flat_map(|r| observed.iter().map(move |c| c[r])).collect();
    let values = Matrix::new(n, width, data).map_err(|e| CliError::Input(e.to_string()))?;
    let mask = Mask::from_bits(n, width, bits).map_err(|e| CliError::Input(e.to_string()))?;
    write_csv(create(path)?, &names, &values, &mask, token)?;
    Ok(())
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = file_stem(path);
    let stem = stem.strip_suffix(".masked").unwrap_or(&stem).to_string();
    path.with_file_name(format!("{stem}.{suffix}.csv"))
}

fn cmd_mask(
    cfg: &RunConfig,
    input: &Path,
    rate: Option<f64>,
    exact: bool,
    output: &Option<PathBuf>,
) -> Result<(), CliError> {
    let rate = rate.unwrap_or(cfg.mcar_rate);
    let mode = if exact {
        crate::data::McarMode::ExactCount
    } else {
        cfg.mcar_mode
    };
    let loaded = load(input, cfg, None)?;
    let mut rng = RngStream::new(cfg.train.seed).derive("data");
    let masked = introduce_mcar_with(&loaded.features, rate, mode, None, &mut rng)?;
    let out = output
        .clone()
        .unwrap_or_else(|| cfg.out_dir.join(format!("{}.masked.csv", file_stem(input))));
    let label = loaded.label.as_ref();
    write_with_label(&out, &masked, masked.mask(), label, &cfg.missing_token, false)?;
    let full = Mask::all_observed(masked.n(), masked.d());
    write_with_label(&sibling(&out, "truth"), &masked, &full, label, &cfg.missing_token, true)?;
    let mut names = masked.names();
    let mut bits: Vec<Vec<bool>> = (0..masked.n()).map(|r| masked.mask().row(r).to_vec()).collect();
    if let Some(l) = label {
        names.insert(l.index, l.name.clone());
        for (row, &o) in bits.iter_mut().zip(&l.observed) {
            row.insert(l.index, o);
        }
    }
    let mask = Mask::from_bits(masked.n(), names.len(), bits.concat()).map_err(|e| CliError::Input(e.to_string()))?;
    write_mask_csv(create(&sibling(&out, "mask"))?, &names, &mask)?;
    println!(
        "masked {} of {} cells ({:.4}) -> {}",
        masked.mask().missing_count(),
        masked.n() * masked.d(),
        masked.mask().missing_fraction(),
        out.display()
    );
    Ok(())
}

/// Streams a loss history as CSV.
pub struct LossHistoryWriter;

impl LossHistoryWriter {
    pub const HEADER: &'static str = "iteration,d_loss,g_adv_loss,g_recon_loss";

    pub fn write<W: Write>(mut out: W, history: &[LossRecord]) -> std::io::Result<()> {
        writeln!(out, "{}", Self::HEADER)?;
        for (i, r) in history.iter().enumerate() {
            writeln!(out, "{},{},{},{}", i + 1, r.d_loss, r.g_adv_loss, r.g_recon_loss)?;
        }
        out.flush()
    }
}

fn cmd_train(cfg: &RunConfig, input: &Path, model_path: &Option<PathBuf>) -> Result<(), CliError> {
    let loaded = load(input, cfg, None)?;
    let (scaled, _) = crate::data::normalize(&loaded.features);
    let start = Instant::now();
    let model = train(&scaled, &cfg.train)?;
    info!("training took {:.1}s", start.elapsed().as_secs_f64());
    let path = model_path.clone().unwrap_or_else(|| cfg.out_dir.join("model.gain"));
    let mut w = create(&path)?;
    write_model(&model, &mut w)?;
    w.flush().map_err(|e| io_err(&path, e))?;
    let history_path = cfg.out_dir.join("loss_history.csv");
    LossHistoryWriter::write(create(&history_path)?, &model.history).map_err(|e| io_err(&history_path, e))?;
    println!(
        "trained {} iterations on {}x{} -> {}",
        model.history.len(),
        scaled.n(),
        scaled.d(),
        path.display()
    );
    Ok(())
}

fn cmd_impute(cfg: &RunConfig, model_path: &Path, input: &Path, draws: usize) -> Result<(), CliError> {
    let file = File::open(model_path).map_err(|e| io_err(model_path, e))?;
    let model: GainModel = read_model(std::io::BufReader::new(file))?;
    let header = load(input, cfg, None)?;
    // Read again with the model's feature kinds so that inference on a
    // small file cannot disagree with training.
    let mut kinds = Vec::with_capacity(header.features.d() + 1);
    for name in header.features.names() {
        let pos = model
            .feature_names
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| CliError::Input(format!("column {name} is not a model feature")))?;
        kinds.push(model.feature_kinds[pos]);
    }
    if let Some(l) = &header.label {
        kinds.insert(l.index, FeatureKind::Binary);
    }
    let loaded = load(input, cfg, Some(&kinds))?;
    let mut rng = RngStream::new(cfg.train.seed).derive("impute");
    let completed = impute(&model, &loaded.features, &mut rng, draws)?;
    let stem = file_stem(input);
    for (k, ds) in completed.iter().enumerate() {
        let path = cfg.out_dir.join(format!("{stem}.imputed.{k}.csv"));
        write_with_label(&path, ds, ds.mask(), loaded.label.as_ref(), &cfg.missing_token, false)?;
        println!("{}", path.display());
    }
    Ok(())
}

fn settings(cfg: &RunConfig, rate: f64) -> CvSettings {
    CvSettings {
        folds: cfg.folds,
        missing_rate: rate,
        mcar_mode: cfg.mcar_mode,
        logistic: LogisticConfig {
            ridge: cfg.ridge,
            ..LogisticConfig::default()
        },
    }
}

fn mean_of(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Option<Vec<f64>> = values.collect();
    v.filter(|v| !v.is_empty()).map(|v| mean_std(&v).0)
}

fn cmd_evaluate(cfg: &RunConfig, input: &Path, rates: &[f64], record_time: bool) -> Result<(), CliError> {
    let loaded = load_experiment(cfg, input)?;
    let labels = loaded.label.as_ref().map(LabelColumn::binary_labels).transpose()?;
    let premasked = !loaded.features.mask().is_fully_observed();
    if premasked && !rates.is_empty() {
        return Err(CliError::Input("--rates needs a fully observed dataset".into()));
    }
    let rates: Vec<f64> = if rates.is_empty() { vec![cfg.mcar_rate] } else { rates.to_vec() };
    for &rate in &rates {
        let start = Instant::now();
        let s = settings(cfg, rate);
        let mut outcomes: Vec<CvOutcome> = Vec::new();
        for seed in cfg.seeds() {
            let o = if premasked {
                cross_validate_masked(&loaded.features, labels.as_deref(), &cfg.train, &s, seed)?
            } else {
                cross_validate(&loaded.features, labels.as_deref(), &cfg.train, &s, seed)?
            };
            info!("seed {seed}: GAIN rmse {:.5}, mean rmse {:.5}", o.gain_rmse, o.mean_rmse);
            outcomes.push(o);
        }
        let gain: Vec<f64> = outcomes.iter().map(|o| o.gain_rmse).collect();
        let (rmse, std) = mean_std(&gain);
        let mut report = MetricsReport {
            command: "evaluate".into(),
            seeds: cfg.seeds(),
            rmse_missing: rmse,
            rmse_missing_std: Some(std),
            baseline_rmse: Some(mean_std(&outcomes.iter().map(|o| o.mean_rmse).collect::<Vec<_>>()).0),
            auroc: mean_of(outcomes.iter().map(|o| o.gain_auroc)),
            baseline_auroc: mean_of(outcomes.iter().map(|o| o.mean_auroc)),
            config: {
                let mut c = cfg.to_pairs();
                if let Some(v) = c.iter_mut().find(|(k, _)| k == "mcar_rate") {
                    v.1 = rate.to_string();
                }
                c
            },
            ..MetricsReport::default()
        };
        if cfg.congeniality {
            let labels = labels
                .as_deref()
                .ok_or_else(|| CliError::Input("congeniality needs label=".into()))?;
            if premasked {
                return Err(CliError::Input("congeniality needs a fully observed dataset".into()));
            }
            let runs = cfg
                .seeds()
                .into_iter()
                .map(|seed| congeniality_experiment(&loaded.features, labels, &cfg.train, &s, seed))
                .collect::<Result<Vec<_>, _>>()?;
            let avg = |f: fn(&crate::evaluation::CongenialityOutcome) -> f64| {
                Some(runs.iter().map(f).sum::<f64>() / runs.len() as f64)
            };
            report.congeniality_l1 = avg(|r| r.gain.0);
            report.congeniality_l2 = avg(|r| r.gain.1);
            report.baseline_congeniality_l1 = avg(|r| r.mean.0);
            report.baseline_congeniality_l2 = avg(|r| r.mean.1);
        }
        let elapsed = start.elapsed().as_secs_f64();
        let name = if rates.len() > 1 {
            format!("report_rate{rate}.txt")
        } else {
            "report.txt".to_string()
        };
        finish_report(cfg, report, &name, elapsed, record_time)?;
    }
    Ok(())
}

fn finish_report(
    cfg: &RunConfig,
    mut report: MetricsReport,
    name: &str,
    elapsed: f64,
    record_time: bool,
) -> Result<(), CliError> {
    report.validate()?;
    if record_time {
        report.wall_time_secs = Some(elapsed);
    }
    let path = cfg.out_dir.join(name);
    write_text(&path, &report.to_text())?;
    report.wall_time_secs = Some(elapsed);
    print!("{}", report.table());
    println!("report -> {}", path.display());
    Ok(())
}

fn cmd_ablate(cfg: &RunConfig, input: &Path, record_time: bool) -> Result<(), CliError> {
    let start = Instant::now();
    let loaded = load_experiment(cfg, input)?;
    let masked = if loaded.features.mask().is_fully_observed() {
        let mut rng = RngStream::new(cfg.train.seed).derive("data");
        introduce_mcar_with(&loaded.features, cfg.mcar_rate, cfg.mcar_mode, None, &mut rng)?
    } else {
        loaded.features
    };
    let seeds = cfg.seeds();
    let outcome = run_ablation(&masked, &cfg.train, &seeds)?;
    let (scaled, _) = crate::data::normalize(&masked);
    let baseline = mean_impute(&scaled)?;
    let truth = scaled
        .ground_truth()
        .ok_or_else(|| CliError::Input("ground truth required".into()))?;
    let full = outcome
        .get(crate::gain::Variant::Full)
        .ok_or_else(|| CliError::Input("full variant missing".into()))?;
    let report = MetricsReport {
        command: "ablate".into(),
        seeds,
        rmse_missing: full.mean,
        rmse_missing_std: Some(full.std),
        baseline_rmse: rmse_missing(truth, baseline.values(), scaled.mask())?,
        variants: outcome.variants.clone(),
        config: cfg.to_pairs(),
        ..MetricsReport::default()
    };
    finish_report(cfg, report, "ablation.txt", start.elapsed().as_secs_f64(), record_time)
}

fn report_checks(results: &[CheckResult]) -> Result<(), CliError> {
    for r in results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    if failed > 0 {
        return Err(CliError::CheckFailed(format!("{failed} of {} checks failed", results.len())));
    }
    println!("all {} checks passed", results.len());
    Ok(())
}

fn cmd_gradcheck(cfg: &RunConfig, networks: usize, corrupt: Option<f64>) -> Result<(), CliError> {
    let settings = GradcheckSettings {
        networks,
        seed: cfg.train.seed,
        corrupt,
        ..GradcheckSettings::default()
    };
    let mut results = mlp_gradcheck(&settings);
    results.extend(gain_gradcheck(&settings));
    report_checks(&results)
}

fn cmd_oracle(cfg: &RunConfig, iterations: Option<usize>, tolerance: f64) -> Result<(), CliError> {
    let mut config = OracleTrainConfig {
        seed: cfg.train.seed,
        ..OracleTrainConfig::default()
    };
    if let Some(it) = iterations {
        config.iterations = it;
    }
    report_checks(&oracle_checks(&config, tolerance)?)
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let mut cfg = resolve(&cli.global)?;
    match &cli.command {
        Command::Mask {
            input,
            rate,
            exact_count,
            output,
        } => {
            cfg.validate()?;
            cmd_mask(&cfg, input, *rate, *exact_count, output)
        }
        Command::Train {
            input,
            iterations,
            variant,
            model,
        } => {
            if let Some(it) = iterations {
                cfg.train.iterations = *it;
            }
            if let Some(v) = variant {
                cfg.train.set("variant", v)?;
            }
            cfg.validate()?;
            let path = dataset_path(&cfg, input)?;
            cmd_train(&cfg, &path, model)
        }
        Command::Impute { model, input, draws } => {
            if let Some(n) = draws {
                cfg.n_draws = *n;
            }
            cfg.validate()?;
            let path = dataset_path(&cfg, input)?;
            cmd_impute(&cfg, model, &path, cfg.n_draws)
        }
        Command::Evaluate {
            input,
            rates,
            record_time,
        } => {
            cfg.validate()?;
            let path = dataset_path(&cfg, input)?;
            cmd_evaluate(&cfg, &path, rates, *record_time)
        }
        Command::Ablate { input, record_time } => {
            cfg.validate()?;
            let path = dataset_path(&cfg, input)?;
            cmd_ablate(&cfg, &path, *record_time)
        }
        Command::Gradcheck { networks, corrupt } => cmd_gradcheck(&cfg, *networks, *corrupt),
        Command::Oracle { iterations, tolerance } => cmd_oracle(&cfg, *iterations, *tolerance),
    }
}
