use std::fmt::Write as _;

use super::{EvalError, VariantSummary};
use crate::gain::Variant;

pub const REPORT_VERSION: u32 = 1;

/// Results of an evaluate or ablate run, with the configuration that
/// produced them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricsReport {
    pub command: String,
    pub seeds: Vec<u64>,
    /// GAIN RMSE over missing cells on the normalized scale, averaged over seeds.
    pub rmse_missing: f64,
    pub rmse_missing_std: Option<f64>,
    pub baseline_rmse: Option<f64>,
    pub auroc: Option<f64>,
    pub baseline_auroc: Option<f64>,
    pub congeniality_l1: Option<f64>,
    pub congeniality_l2: Option<f64>,
    pub baseline_congeniality_l1: Option<f64>,
    pub baseline_congeniality_l2: Option<f64>,
    pub variants: Vec<VariantSummary>,
    /// Echo of the run configuration as `(key, value)` pairs.
    pub config: Vec<(String, String)>,
    /// Left out of the text form unless set, so reruns stay byte-identical.
    pub wall_time_secs: Option<f64>,
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn parse_f64(key: &str, v: &str) -> Result<f64, EvalError> {
    v.parse()
        .map_err(|_| EvalError::Usage(format!("report: {key} is not a number: {v}")))
}

fn parse_list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, EvalError> {
    if v.is_empty() {
        return Ok(Vec::new());
    }
    v.split(',')
        .map(|s| {
            s.parse()
                .map_err(|_| EvalError::Usage(format!("report: bad list entry in {key}: {s}")))
        })
        .collect()
}

impl MetricsReport {
    pub fn validate(&self) -> Result<(), EvalError> {
        let rmses = std::iter::once(self.rmse_missing)
            .chain(self.baseline_rmse)
            .chain(self.variants.iter().map(|v| v.mean));
        for r in rmses {
            if !(r >= 0.0) {
                return Err(EvalError::Usage(format!("report: negative or NaN RMSE {r}")));
            }
        }
        for a in [self.auroc, self.baseline_auroc].into_iter().flatten() {
            if !(0.0..=1.0).contains(&a) {
                return Err(EvalError::Usage(format!("report: AUROC {a} outside [0, 1]")));
            }
        }
        Ok(())
    }

    fn optional_fields(&self) -> [(&'static str, Option<f64>); 9] {
        [
            ("rmse_missing_std", self.rmse_missing_std),
            ("baseline_rmse", self.baseline_rmse),
            ("auroc", self.auroc),
            ("baseline_auroc", self.baseline_auroc),
            ("congeniality_l1", self.congeniality_l1),
            ("congeniality_l2", self.congeniality_l2),
            ("baseline_congeniality_l1", self.baseline_congeniality_l1),
            ("baseline_congeniality_l2", self.baseline_congeniality_l2),
            ("wall_time_secs", self.wall_time_secs),
        ]
    }

    /// Versioned `key=value` text, one entry per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# gain metrics report");
        let _ = writeln!(out, "format_version={REPORT_VERSION}");
        let _ = writeln!(out, "command={}", self.command);
        let _ = writeln!(out, "seeds={}", join(&self.seeds));
        let _ = writeln!(out, "rmse_missing={}", self.rmse_missing);
        for (key, value) in self.optional_fields() {
            if let Some(v) = value {
                let _ = writeln!(out, "{key}={v}");
            }
        }
        for v in &self.variants {
            let name = v.variant.as_str();
            let _ = writeln!(out, "variant.{name}.rmse_mean={}", v.mean);
            let _ = writeln!(out, "variant.{name}.rmse_std={}", v.std);
            let _ = writeln!(out, "variant.{name}.rmse={}", join(&v.rmse));
        }
        for (k, v) in &self.config {
            let _ = writeln!(out, "config.{k}={v}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, EvalError> {
        let mut report = MetricsReport::default();
        let mut version = None;
        let mut rmse = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| EvalError::Usage(format!("report line {}: expected key=value", i + 1)))?;
            if let Some(k) = key.strip_prefix("config.") {
                report.config.push((k.to_string(), value.to_string()));
                continue;
            }
            if let Some(rest) = key.strip_prefix("variant.") {
                let (name, field) = rest
                    .split_once('.')
                    .ok_or_else(|| EvalError::Usage(format!("report: bad key {key}")))?;
                let variant: Variant = name.parse().map_err(|_| EvalError::Usage(format!("report: unknown variant {name}")))?;
                if !report.variants.iter().any(|v| v.variant == variant) {
                    report.variants.push(VariantSummary {
                        variant,
                        rmse: Vec::new(),
                        mean: f64::NAN,
                        std: f64::NAN,
                    });
                }
                let entry = report.variants.iter_mut().find(|v| v.variant == variant).expect("inserted");
                match field {
                    "rmse_mean" => entry.mean = parse_f64(key, value)?,
                    "rmse_std" => entry.std = parse_f64(key, value)?,
                    "rmse" => entry.rmse = parse_list(key, value)?,
                    _ => return Err(EvalError::Usage(format!("report: unknown key {key}"))),
                }
                continue;
            }
            match key {
                "format_version" => {
                    let v: u32 = value
                        .parse()
                        .map_err(|_| EvalError::Usage(format!("report: bad version {value}")))?;
                    if v != REPORT_VERSION {
                        return Err(EvalError::Usage(format!("report: unsupported version {v}")));
                    }
                    version = Some(v);
                }
                "command" => report.command = value.to_string(),
                "seeds" => report.seeds = parse_list(key, value)?,
                "rmse_missing" => rmse = Some(parse_f64(key, value)?),
                _ => {
                    let v = Some(parse_f64(key, value)?);
                    match key {
                        "rmse_missing_std" => report.rmse_missing_std = v,
                        "baseline_rmse" => report.baseline_rmse = v,
                        "auroc" => report.auroc = v,
                        "baseline_auroc" => report.baseline_auroc = v,
                        "congeniality_l1" => report.congeniality_l1 = v,
                        "congeniality_l2" => report.congeniality_l2 = v,
                        "baseline_congeniality_l1" => report.baseline_congeniality_l1 = v,
                        "baseline_congeniality_l2" => report.baseline_congeniality_l2 = v,
                        "wall_time_secs" => report.wall_time_secs = v,
                        _ => return Err(EvalError::Usage(format!("report: unknown key {key}"))),
                    }
                }
            }
        }
        if version.is_none() {
            return Err(EvalError::Usage("report: missing format_version".into()));
        }
        report.rmse_missing = rmse.ok_or_else(|| EvalError::Usage("report: missing rmse_missing".into()))?;
        report.validate()?;
        Ok(report)
    }

    /// Aligned table for the terminal.
    pub fn table(&self) -> String {
        let mut out = String::new();
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(out, "{} (seeds {})", self.command, join(&self.seeds));
        if self.variants.is_empty() {
            let _ = writeln!(out, "{:<22} {:>10} {:>10} {:>10} {:>10}", "method", "rmse", "auroc", "cong_l1", "cong_l2");
            let gain_rmse = match self.rmse_missing_std {
                Some(s) => format!("{:.4}±{:.4}", self.rmse_missing, s),
                None => format!("{:.4}", self.rmse_missing),
            };
            let _ = writeln!(
                out,
                "{:<22} {:>10} {:>10} {:>10} {:>10}",
                "GAIN",
                gain_rmse,
                cell(self.auroc),
                cell(self.congeniality_l1),
                cell(self.congeniality_l2)
            );
            let _ = writeln!(
                out,
                "{:<22} {:>10} {:>10} {:>10} {:>10}",
                "mean imputation",
                cell(self.baseline_rmse),
                cell(self.baseline_auroc),
                cell(self.baseline_congeniality_l1),
                cell(self.baseline_congeniality_l2)
            );
        } else {
            let _ = writeln!(out, "{:<22} {:>16}", "variant", "rmse (mean±std)");
            for v in &self.variants {
                let _ = writeln!(out, "{:<22} {:>16}", v.variant.label(), format!("{:.4}±{:.4}", v.mean, v.std));
            }
            if let Some(b) = self.baseline_rmse {
                let _ = writeln!(out, "{:<22} {:>16}", "mean imputation", format!("{b:.4}"));
            }
        }
        if let Some(t) = self.wall_time_secs {
            let _ = writeln!(out, "wall time: {t:.1}s");
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MetricsReport {
        MetricsReport {
            command: "ablate".into(),
            seeds: vec![1, 2, 3],
            rmse_missing: 0.0712,
            rmse_missing_std: Some(0.001),
            baseline_rmse: Some(0.16),
            variants: vec![VariantSummary {
                variant: Variant::NoHint,
                rmse: vec![0.07, 0.08, 0.075],
                mean: 0.075,
                std: 0.005,
            }],
            config: vec![("alpha".into(), "10".into()), ("dataset".into(), "data/x.csv".into())],
            ..MetricsReport::default()
        }
    }

    #[test]
    fn text_roundtrip() {
        let r = sample();
        let text = r.to_text();
        assert!(text.contains("format_version=1\n"));
        assert!(!text.contains("wall_time"));
        assert_eq!(MetricsReport::from_text(&text).unwrap(), r);
    }

    #[test]
    fn rejects_out_of_range_values() {
        let mut r = sample();
        r.auroc = Some(1.5);
        assert!(r.validate().is_err());
        let text = sample().to_text().replace("rmse_missing=0.0712", "rmse_missing=-1");
        assert!(MetricsReport::from_text(&text).is_err());
        assert!(MetricsReport::from_text("rmse_missing=0.1\n").is_err());
    }

    #[test]
    fn table_lists_every_variant() {
        let t = sample().table();
        assert!(t.contains("GAIN w/o Hint"));
        assert!(t.contains("mean imputation"));
    }
}
