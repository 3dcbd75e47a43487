//! `key = value` run configuration.

use std::path::PathBuf;

use featrend_core::detect::{DetectConfig, FeatureKind, DEFAULT_COROUTINE_KEYWORDS, DEFAULT_RANGE_INFIX};
use featrend_core::trendfit::FitConfig;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub features: Vec<FeatureKind>,
    pub coroutine_keywords: Vec<String>,
    pub range_infix: Vec<String>,
    pub delta: f64,
    pub poly_threshold: f64,
    pub sudden_width: f64,
    pub branch: Option<String>,
    pub jobs: Option<usize>,
    pub out_dir: Option<PathBuf>,
    pub plots: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let fit = FitConfig::<f64>::default();
        RunConfig {
            features: FeatureKind::ALL.to_vec(),
            coroutine_keywords: DEFAULT_COROUTINE_KEYWORDS.iter().map(|s| s.to_string()).collect(),
            range_infix: DEFAULT_RANGE_INFIX.iter().map(|s| s.to_string()).collect(),
            delta: fit.delta,
            poly_threshold: fit.poly_threshold,
            sudden_width: fit.sudden_width,
            branch: None,
            jobs: None,
            out_dir: None,
            plots: None,
        }
    }
}

impl RunConfig {
    /// Applies a config file on top of `self`. Blank lines and `#` comments are ignored.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| CliError::Config(format!("line {}: {msg}", no + 1));
            let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected key = value, got {line:?}")))?;
            self.set(key.trim(), value.trim()).map_err(|e| match e {
                CliError::Config(msg) => bad(msg),
                other => other,
            })?;
        }
        self.validate()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let number = |v: &str| v.parse::<f64>().map_err(|_| CliError::Config(format!("{key}: not a number: {v:?}")));
        match key {
            "features" => self.features = parse_features(value)?,
            "coroutine_keywords" => self.coroutine_keywords = list(value),
            "range_infix" => self.range_infix = list(value),
            "delta" => self.delta = number(value)?,
            "poly_threshold" => self.poly_threshold = number(value)?,
            "sudden_width" => self.sudden_width = number(value)?,
            "branch" => self.branch = Some(value.to_string()),
            "jobs" => {
                self.jobs = Some(value.parse().map_err(|_| CliError::Config(format!("jobs: not a count: {value:?}")))?)
            }
            "out_dir" => self.out_dir = Some(PathBuf::from(value)),
            "plots" => self.plots = Some(PathBuf::from(value)),
            _ => return Err(CliError::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("delta", self.delta)?;
        positive("poly_threshold", self.poly_threshold)?;
        positive("sudden_width", self.sudden_width)?;
        if self.delta >= 1.0 {
            return Err(CliError::Config(format!("delta must be below 1, got {}", self.delta)));
        }
        if self.jobs == Some(0) {
            return Err(CliError::Config("jobs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn detect_config(&self) -> DetectConfig {
        DetectConfig {
            enabled: self.features.clone(),
            coroutine_keywords: self.coroutine_keywords.clone(),
            range_infix: self.range_infix.clone(),
        }
    }

    pub fn fit_config(&self) -> FitConfig<f64> {
        FitConfig {
            delta: self.delta,
            poly_threshold: self.poly_threshold,
            sudden_width: self.sudden_width,
            ..FitConfig::default()
        }
    }
}

fn list(value: &str) -> Vec<String> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect()
}

/// Comma-separated feature names, or `all`.
pub fn parse_features(value: &str) -> Result<Vec<FeatureKind>, CliError> {
    if value.trim().eq_ignore_ascii_case("all") {
        return Ok(FeatureKind::ALL.to_vec());
    }
    let mut kinds = Vec::new();
    for name in list(value) {
        let kind: FeatureKind = name.parse().map_err(|e| CliError::Config(format!("{e}")))?;
        if !kinds.contains(&kind) {
            kinds.push(kind);
        }
    }
    kinds.sort();
    Ok(kinds)
}
