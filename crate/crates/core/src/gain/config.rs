use std::fmt;
use std::str::FromStr;

use super::GainError;
use crate::nn::OptimizerKind;

/// Which loss terms and inputs are active during training.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Variant {
    #[default]
    Full,
    /// No adversarial term: the generator is a plain denoising autoencoder.
    NoLg,
    /// No reconstruction term.
    NoLm,
    /// Discriminator sees a constant 0.5 hint.
    NoHint,
    NoHintNoLm,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Full,
        Variant::NoLg,
        Variant::NoLm,
        Variant::NoHint,
        Variant::NoHintNoLm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoLg => "no_lg",
            Variant::NoLm => "no_lm",
            Variant::NoHint => "no_hint",
            Variant::NoHintNoLm => "no_hint_no_lm",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Variant::Full => "GAIN",
            Variant::NoLg => "GAIN w/o L_G",
            Variant::NoLm => "GAIN w/o L_M",
            Variant::NoHint => "GAIN w/o Hint",
            Variant::NoHintNoLm => "GAIN w/o Hint & L_M",
        }
    }

    pub fn uses_adversarial(self) -> bool {
        self != Variant::NoLg
    }

    pub fn uses_reconstruction(self) -> bool {
        !matches!(self, Variant::NoLm | Variant::NoHintNoLm)
    }

    pub fn uses_hint(self) -> bool {
        !matches!(self, Variant::NoHint | Variant::NoHintNoLm)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = GainError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| GainError::Config(format!("unknown variant {s:?}")))
    }
}

/// Hyperparameters of the adversarial training loop.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Discriminator mini-batch size (k_D).
    pub batch_d: usize,
    /// Generator mini-batch size (k_G).
    pub batch_g: usize,
    /// Weight of the reconstruction loss.
    pub alpha: f64,
    pub iterations: usize,
    pub learning_rate: f64,
    /// Upper end of the uniform noise fed into missing slots.
    pub noise_high: f64,
    /// Hidden widths shared by generator and discriminator; `None` means `(d, d)`.
    pub hidden: Option<Vec<usize>>,
    pub seed: u64,
    pub variant: Variant,
    pub optimizer: OptimizerKind,
    /// Log a progress line every this many iterations (0 = never).
    pub log_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_d: 128,
            batch_g: 128,
            alpha: 10.0,
            iterations: 10_000,
            learning_rate: 1e-3,
            noise_high: 0.01,
            hidden: None,
            seed: 0,
            variant: Variant::Full,
            optimizer: OptimizerKind::default(),
            log_every: 0,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, GainError> {
    value
        .trim()
        .parse()
        .map_err(|_| GainError::Config(format!("invalid value {value:?} for {key}")))
}

impl TrainConfig {
    pub const KEYS: [&'static str; 14] = [
        "k_d",
        "k_g",
        "alpha",
        "iterations",
        "learning_rate",
        "noise_high",
        "hidden",
        "seed",
        "variant",
        "optimizer",
        "beta1",
        "beta2",
        "adam_eps",
        "log_every",
    ];

    pub fn hidden_for(&self, d: usize) -> Vec<usize> {
        self.hidden.clone().unwrap_or_else(|| vec![d, d])
    }

    pub fn validate(&self) -> Result<(), GainError> {
        let bad = |msg: &str| Err(GainError::Config(msg.to_string()));
        if self.batch_d == 0 || self.batch_g == 0 {
            return bad("k_d and k_g must be at least 1");
        }
        if self.iterations == 0 {
            return bad("iterations must be at least 1");
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be a finite non-negative number");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.noise_high > 0.0 && self.noise_high <= 1.0) {
            return bad("noise_high must lie in (0, 1]");
        }
        if let Some(h) = &self.hidden {
            if h.iter().any(|&w| w == 0) {
                return bad("hidden widths must be at least 1");
            }
        }
        if let OptimizerKind::Adam { beta1, beta2, eps } = self.optimizer {
            if !(0.0..1.0).contains(&beta1) || !(0.0..1.0).contains(&beta2) || !(eps > 0.0) {
                return bad("Adam needs 0 <= beta1, beta2 < 1 and eps > 0");
            }
        }
        Ok(())
    }

    /// Sets one field from its textual key. Unknown keys are an error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), GainError> {
        let (mut beta1, mut beta2, mut eps) = match self.optimizer {
            OptimizerKind::Adam { beta1, beta2, eps } => (beta1, beta2, eps),
            OptimizerKind::Sgd => (0.9, 0.999, 1e-8),
        };
        match key {
            "k_d" => self.batch_d = parse(key, value)?,
            "k_g" => self.batch_g = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "iterations" => self.iterations = parse(key, value)?,
            "learning_rate" => self.learning_rate = parse(key, value)?,
            "noise_high" => self.noise_high = parse(key, value)?,
            "hidden" => {
                let v = value.trim();
                self.hidden = if v.is_empty() || v == "auto" {
                    None
                } else {
                    Some(v.split(',').map(|w| parse(key, w)).collect::<Result<_, _>>()?)
                };
            }
            "seed" => self.seed = parse(key, value)?,
            "variant" => self.variant = value.parse()?,
            "optimizer" => {
                self.optimizer = match value.trim() {
                    "adam" => OptimizerKind::Adam { beta1, beta2, eps },
                    "sgd" => OptimizerKind::Sgd,
                    other => return Err(GainError::Config(format!("unknown optimizer {other:?}"))),
                }
            }
            "beta1" | "beta2" | "adam_eps" => {
                let v: f64 = parse(key, value)?;
                match key {
                    "beta1" => beta1 = v,
                    "beta2" => beta2 = v,
                    _ => eps = v,
                }
                if let OptimizerKind::Adam { .. } = self.optimizer {
                    self.optimizer = OptimizerKind::Adam { beta1, beta2, eps };
                }
            }
            "log_every" => self.log_every = parse(key, value)?,
            _ => return Err(GainError::Config(format!("unknown training key {key:?}"))),
        }
        Ok(())
    }

    /// `key=value` pairs in a fixed order; floats print in shortest round-trip form.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let (opt, b1, b2, eps) = match self.optimizer {
            OptimizerKind::Adam { beta1, beta2, eps } => ("adam", beta1, beta2, eps),
            OptimizerKind::Sgd => ("sgd", 0.9, 0.999, 1e-8),
        };
        let hidden = match &self.hidden {
            None => "auto".to_string(),
            Some(h) => h.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(","),
        };
        vec![
            ("k_d".into(), self.batch_d.to_string()),
            ("k_g".into(), self.batch_g.to_string()),
            ("alpha".into(), self.alpha.to_string()),
            ("iterations".into(), self.iterations.to_string()),
            ("learning_rate".into(), self.learning_rate.to_string()),
            ("noise_high".into(), self.noise_high.to_string()),
            ("hidden".into(), hidden),
            ("seed".into(), self.seed.to_string()),
            ("variant".into(), self.variant.to_string()),
            ("optimizer".into(), opt.into()),
            ("beta1".into(), b1.to_string()),
            ("beta2".into(), b2.to_string()),
            ("adam_eps".into(), eps.to_string()),
            ("log_every".into(), self.log_every.to_string()),
        ]
    }

    pub fn to_text(&self) -> String {
        self.to_pairs()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }

    pub fn from_text(text: &str) -> Result<Self, GainError> {
        let mut cfg = TrainConfig::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| GainError::Config(format!("expected key=value, got {line:?}")))?;
            cfg.set(k.trim(), v)?;
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn text_roundtrip() {
        let mut cfg = TrainConfig::default();
        cfg.alpha = 0.1 + 0.2;
        cfg.hidden = Some(vec![7, 3]);
        cfg.variant = Variant::NoHintNoLm;
        cfg.seed = u64::MAX;
        assert_eq!(TrainConfig::from_text(&cfg.to_text()).unwrap(), cfg);
        let sgd = TrainConfig {
            optimizer: OptimizerKind::Sgd,
            ..TrainConfig::default()
        };
        assert_eq!(TrainConfig::from_text(&sgd.to_text()).unwrap(), sgd);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(TrainConfig::default().set("alfa", "1").is_err());
        assert!(TrainConfig::default().set("variant", "fancy").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = TrainConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.batch_d = 0;
        assert!(cfg.validate().is_err());
        let cfg = TrainConfig {
            noise_high: 0.0,
            ..TrainConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn variant_flags() {
        assert!(Variant::Full.uses_adversarial() && Variant::Full.uses_hint() && Variant::Full.uses_reconstruction());
        assert!(!Variant::NoLg.uses_adversarial());
        assert!(!Variant::NoHintNoLm.uses_hint() && !Variant::NoHintNoLm.uses_reconstruction());
        for v in Variant::ALL {
            assert_eq!(v.as_str().parse::<Variant>().unwrap(), v);
        }
    }
}
