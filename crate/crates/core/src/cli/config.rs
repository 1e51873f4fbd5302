use std::path::PathBuf;

use super::CliError;
use crate::data::McarMode;
use crate::gain::TrainConfig;

/// Everything a run needs besides the subcommand, read from a flat
/// `key=value` file with `#` comments. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub train: TrainConfig,
    pub dataset: Option<PathBuf>,
    /// Complete copy of `dataset` when `dataset` already has missing cells.
    pub ground_truth: Option<PathBuf>,
    pub missing_token: String,
    pub mcar_rate: f64,
    pub mcar_mode: McarMode,
    pub folds: usize,
    pub n_draws: usize,
    pub out_dir: PathBuf,
    /// Binary outcome column: never masked or imputed, used for AUROC and
    /// congeniality.
    pub label: Option<String>,
    /// Seeds for evaluate and ablate; empty means just `train.seed`.
    pub seeds: Vec<u64>,
    pub congeniality: bool,
    /// L2 penalty of the downstream logistic regression.
    pub ridge: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            dataset: None,
            ground_truth: None,
            missing_token: String::new(),
            mcar_rate: 0.2,
            mcar_mode: McarMode::Bernoulli,
            folds: 5,
            n_draws: 1,
            out_dir: PathBuf::from("."),
            label: None,
            seeds: Vec::new(),
            congeniality: false,
            ridge: 0.0,
        }
    }
}

pub const RUN_KEYS: [&str; 12] = [
    "dataset",
    "ground_truth",
    "missing_token",
    "mcar_rate",
    "mcar_mode",
    "folds",
    "n_draws",
    "out_dir",
    "label",
    "seeds",
    "congeniality",
    "ridge",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("invalid value {value:?} for {key}")))
}

fn optional(value: &str) -> Option<String> {
    let v = value.trim();
    (!v.is_empty()).then(|| v.to_string())
}

impl RunConfig {
    /// Sets one key; training keys are forwarded to [`TrainConfig::set`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match key {
            "dataset" => self.dataset = optional(value).map(PathBuf::from),
            "ground_truth" => self.ground_truth = optional(value).map(PathBuf::from),
            "missing_token" => self.missing_token = value.trim().to_string(),
            "mcar_rate" => self.mcar_rate = parse(key, value)?,
            "mcar_mode" => {
                self.mcar_mode = match value.trim() {
                    "bernoulli" => McarMode::Bernoulli,
                    "exact" => McarMode::ExactCount,
                    other => return Err(CliError::Input(format!("unknown mcar_mode {other:?}"))),
                }
            }
            "folds" => self.folds = parse(key, value)?,
            "n_draws" => self.n_draws = parse(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value.trim()),
            "label" => self.label = optional(value),
            "seeds" => {
                self.seeds = match optional(value) {
                    None => Vec::new(),
                    Some(v) => v.split(',').map(|s| parse(key, s)).collect::<Result<_, _>>()?,
                }
            }
            "congeniality" => self.congeniality = parse(key, value)?,
            "ridge" => self.ridge = parse(key, value)?,
            _ if TrainConfig::KEYS.contains(&key) => self.train.set(key, value)?,
            _ => return Err(CliError::Input(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Applies a config file's contents on top of the current values.
    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Input(format!("config line {}: expected key=value, got {line:?}", i + 1)))?;
            self.set(key.trim(), value)
                .map_err(|e| CliError::Input(format!("config line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![self.train.seed]
        } else {
            self.seeds.clone()
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.train.validate()?;
        if !(0.0..1.0).contains(&self.mcar_rate) {
            return Err(CliError::Input(format!("mcar_rate must lie in [0, 1), got {}", self.mcar_rate)));
        }
        if self.folds < 2 {
            return Err(CliError::Input("folds must be at least 2".into()));
        }
        if self.n_draws == 0 {
            return Err(CliError::Input("n_draws must be at least 1".into()));
        }
        if !(self.ridge >= 0.0) {
            return Err(CliError::Input("ridge must be non-negative".into()));
        }
        Ok(())
    }

    /// Every key with its current value, in a fixed order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        let mut pairs = vec![
            ("dataset".to_string(), path(&self.dataset)),
            ("ground_truth".to_string(), path(&self.ground_truth)),
            ("missing_token".to_string(), self.missing_token.clone()),
            ("mcar_rate".to_string(), self.mcar_rate.to_string()),
            (
                "mcar_mode".to_string(),
                match self.mcar_mode {
                    McarMode::Bernoulli => "bernoulli",
                    McarMode::ExactCount => "exact",
                }
                .to_string(),
            ),
            ("folds".to_string(), self.folds.to_string()),
            ("n_draws".to_string(), self.n_draws.to_string()),
            ("out_dir".to_string(), self.out_dir.display().to_string()),
            ("label".to_string(), self.label.clone().unwrap_or_default()),
            (
                "seeds".to_string(),
                self.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
            ),
            ("congeniality".to_string(), self.congeniality.to_string()),
            ("ridge".to_string(), self.ridge.to_string()),
        ];
        pairs.extend(self.train.to_pairs());
        pairs
    }

    pub fn to_text(&self) -> String {
        self.to_pairs().into_iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
