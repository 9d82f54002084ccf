use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::loss::LossKind;
use crate::math::{Activation, RngStream};
use crate::multilayer::MaskMode;
use crate::two_layer::AInit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Gaussian,
    Idx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    TwoLayer,
    Multilayer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussianSection {
    pub d: usize,
    pub delta: f64,
}

impl Default for GaussianSection {
    fn default() -> Self {
        Self { d: 32, delta: 0.5 }
    }
}

/// Location of the four IDX files. Relative file names are resolved
/// against `dir`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdxSection {
    pub dir: Option<PathBuf>,
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
    /// Use only the first `train_limit` training images (0 = all).
    pub train_limit: usize,
}

impl Default for IdxSection {
    fn default() -> Self {
        Self {
            dir: None,
            train_images: "train-images-idx3-ubyte".into(),
            train_labels: "train-labels-idx1-ubyte".into(),
            test_images: "t10k-images-idx3-ubyte".into(),
            test_labels: "t10k-labels-idx1-ubyte".into(),
            train_limit: 0,
        }
    }
}

impl IdxSection {
    pub fn resolve(&self, file: &Path) -> PathBuf {
        match &self.dir {
            Some(dir) if file.is_relative() => dir.join(file),
            _ => file.to_path_buf(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConnectSection {
    pub width: usize,
    pub seed_a: u64,
    pub seed_b: u64,
    /// Output-weight initialization of the second network; `None` reuses
    /// the top-level one.
    pub init_b: Option<AInit>,
    pub loss_points: usize,
    pub error_points: usize,
}

impl Default for ConnectSection {
    fn default() -> Self {
        Self {
            width: 200,
            seed_a: 0,
            seed_b: 1,
            init_b: None,
            loss_points: 101,
            error_points: 51,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleSection {
    /// Particle count; defaults to the largest width.
    pub particles: Option<usize>,
    /// Euler step; defaults to the SGD step `α₀/M` at `M` particles.
    pub dt: Option<f64>,
    pub mc_batch: usize,
}

impl Default for OracleSection {
    fn default() -> Self {
        Self {
            particles: None,
            dt: None,
            mc_batch: 100,
        }
    }
}

/// Everything a harness run needs. Loaded from TOML; every field has a
/// default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub task: TaskKind,
    pub gaussian: GaussianSection,
    pub idx: IdxSection,
    pub model: ModelKind,
    /// Hidden layers `L` of the multilayer model.
    pub hidden_layers: usize,
    pub mask: MaskMode,
    pub widths: Vec<usize>,
    pub seeds: Vec<u64>,
    pub activation: Activation,
    pub loss: LossKind,
    /// Append a constant-1 feature to every input.
    pub bias: bool,
    pub init: AInit,
    /// Per-coordinate std of the first-layer weights (default `1/√d`).
    pub w_std: Option<f64>,
    pub alpha0: f64,
    /// Training length in epochs per unit width: `k0·N` epochs.
    pub k0: f64,
    pub batch: usize,
    /// Samples per epoch; defaults to 10⁴ for the Gaussian task and the
    /// training-set size for IDX data.
    pub epoch_samples: Option<usize>,
    /// Constant learning-rate profile `ξ`.
    pub xi: f64,
    pub eval_size: usize,
    pub eval_seed: u64,
    pub dropout_fraction: f64,
    /// Fractions of the run at which the sweep records the dropout error.
    pub snapshots: Vec<f64>,
    /// Evaluation points of `compare` runs (excluding the start).
    pub log_points: usize,
    pub save_checkpoints: bool,
    /// Worker threads (0 = one per core).
    pub threads: usize,
    pub out_dir: PathBuf,
    pub connect: ConnectSection,
    pub oracle: OracleSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            task: TaskKind::Gaussian,
            gaussian: GaussianSection::default(),
            idx: IdxSection::default(),
            model: ModelKind::TwoLayer,
            hidden_layers: 2,
            mask: MaskMode::Experiment,
            widths: vec![100, 200, 400, 800, 1600],
            seeds: vec![0, 1, 2, 3, 4],
            activation: Activation::Sigmoid,
            loss: LossKind::Square,
            bias: true,
            init: AInit::default(),
            w_std: None,
            alpha0: 40.0,
            k0: 0.05,
            batch: 100,
            epoch_samples: None,
            xi: 1.0,
            eval_size: 10_000,
            eval_seed: 0x00E7_A15E,
            dropout_fraction: 0.5,
            snapshots: vec![0.0, 0.7, 1.0],
            log_points: 20,
            save_checkpoints: true,
            threads: 0,
            out_dir: "out".into(),
            connect: ConnectSection::default(),
            oracle: OracleSection::default(),
        }
    }
}

const DEFAULT_EPOCH: usize = 10_000;

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_toml_with(text, &[])
    }

    /// Parse `text`, then apply `key=value` overrides (dotted keys, TOML
    /// values; bare words are taken as strings) before validation.
    pub fn from_toml_with(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config("<document>", e.message().to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        let cfg: RunConfig = serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<document>".to_string() } else { path };
            Error::config(&field, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_with(&text, overrides)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be a positive number, got {v}")))
            }
        };
        if self.widths.is_empty() {
            return Err(Error::config("widths", "need at least one width"));
        }
        if let Some(i) = self.widths.iter().position(|&n| n == 0) {
            return Err(Error::config(&format!("widths[{i}]"), "width must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "need at least one seed"));
        }
        if self.gaussian.d == 0 {
            return Err(Error::config("gaussian.d", "must be at least 1"));
        }
        if !(self.gaussian.delta > -1.0 && self.gaussian.delta.is_finite()) || self.gaussian.delta == 1.0 {
            return Err(Error::config("gaussian.delta", format!("must be > -1 and != 1, got {}", self.gaussian.delta)));
        }
        if self.task == TaskKind::Idx && self.idx.dir.is_none() {
            return Err(Error::config("idx.dir", "required when task = \"idx\""));
        }
        if self.model == ModelKind::Multilayer && self.hidden_layers == 0 {
            return Err(Error::config("hidden_layers", "must be at least 1"));
        }
        match self.init {
            AInit::Uniform { bound } if !(bound >= 0.0 && bound.is_finite()) => {
                return Err(Error::config("init", format!("uniform bound must be nonnegative, got {bound}")));
            }
            AInit::Bimodal { lo, hi } if !(0.0 <= lo && lo <= hi && hi.is_finite()) => {
                return Err(Error::config("init", format!("bimodal range needs 0 <= lo <= hi, got [{lo}, {hi}]")));
            }
            _ => {}
        }
        if let Some(s) = self.w_std {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::config("w_std", format!("must be nonnegative, got {s}")));
            }
        }
        positive("alpha0", self.alpha0)?;
        if !(self.k0 >= 0.0 && self.k0.is_finite()) {
            return Err(Error::config("k0", format!("must be nonnegative, got {}", self.k0)));
        }
        if self.batch == 0 {
            return Err(Error::config("batch", "must be at least 1"));
        }
        if self.epoch_samples == Some(0) {
            return Err(Error::config("epoch_samples", "must be at least 1"));
        }
        positive("xi", self.xi)?;
        if self.eval_size == 0 {
            return Err(Error::config("eval_size", "must be at least 1"));
        }
        if !(self.dropout_fraction > 0.0 && self.dropout_fraction <= 1.0) {
            return Err(Error::config("dropout_fraction", format!("must lie in (0, 1], got {}", self.dropout_fraction)));
        }
        if let Some(i) = self.snapshots.iter().position(|f| !(0.0..=1.0).contains(f)) {
            return Err(Error::config(&format!("snapshots[{i}]"), format!("must lie in [0, 1], got {}", self.snapshots[i])));
        }
        if self.connect.width < 2 {
            return Err(Error::config("connect.width", "must be at least 2"));
        }
        if self.connect.loss_points < 2 {
            return Err(Error::config("connect.loss_points", "must be at least 2"));
        }
        if self.connect.error_points < 2 {
            return Err(Error::config("connect.error_points", "must be at least 2"));
        }
        if self.oracle.particles == Some(0) {
            return Err(Error::config("oracle.particles", "must be at least 1"));
        }
        if let Some(dt) = self.oracle.dt {
            positive("oracle.dt", dt)?;
        }
        if self.oracle.mc_batch == 0 {
            return Err(Error::config("oracle.mc_batch", "must be at least 1"));
        }
        Ok(())
    }

    /// Samples per epoch, given the training-set size when there is one.
    pub fn epoch_len(&self, train_size: Option<usize>) -> usize {
        self.epoch_samples.or(train_size).unwrap_or(DEFAULT_EPOCH)
    }

    /// Learning rate `α = α₀/N`.
    pub fn alpha(&self, n: usize) -> f64 {
        self.alpha0 / n as f64
    }

    /// SGD steps for width `n`: `k0·N` epochs of `epoch` samples.
    pub fn steps(&self, n: usize, epoch: usize) -> usize {
        (self.k0 * n as f64 * epoch as f64 / self.batch as f64).round() as usize
    }

    /// Continuous-time horizon reached at width `n`.
    pub fn horizon(&self, n: usize, epoch: usize) -> f64 {
        self.steps(n, epoch) as f64 * self.alpha(n)
    }
}

/// Seed of the parameter initialization for run seed `seed`. Independent
/// of the width, so narrower networks are prefixes of wider ones.
pub fn init_seed(seed: u64) -> u64 {
    RngStream::new(seed).child(1).seed()
}

/// Seed of the training-sample stream.
pub fn data_seed(seed: u64) -> u64 {
    RngStream::new(seed).child(2).seed()
}

/// Seed of the Monte-Carlo samples driving the ideal-particle integrator.
pub fn oracle_seed(seed: u64) -> u64 {
    RngStream::new(seed).child(3).seed()
}

fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (key, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::config(spec, "override must look like key=value"))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = parse_value(raw);
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| Error::config(key, "empty key"))?;
    let mut cur = table;
    for p in parts {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = match entry {
            toml::Value::Table(t) => t,
            _ => return Err(Error::config(key, format!("`{p}` is not a table"))),
        };
    }
    cur.insert(last.to_string(), value);
    Ok(())
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap_or_else(|| toml::Value::String(raw.to_string())),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(RunConfig::from_toml_str("").unwrap(), RunConfig::default());
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = RunConfig::default();
        cfg.widths = vec![10, 20];
        cfg.init = AInit::Bimodal { lo: 0.5, hi: 1.0 };
        cfg.oracle.dt = Some(0.01);
        let back = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn errors_name_the_field() {
        let e = RunConfig::from_toml_str("alpha0 = -1.0").unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "alpha0"), "{e}");
        let e = RunConfig::from_toml_str("batch = \"ten\"").unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "batch"), "{e}");
        let e = RunConfig::from_toml_str("[connect]\nloss_points = 1").unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "connect.loss_points"), "{e}");
        let e = RunConfig::from_toml_str("widths = [10, 0]").unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "widths[1]"), "{e}");
    }

    #[test]
    fn unknown_field_rejected() {
        let e = RunConfig::from_toml_str("alhpa0 = 1.0").unwrap_err();
        assert_eq!(e.kind(), "config");
        assert!(e.to_string().contains("alhpa0"));
    }

    #[test]
    fn overrides_apply_before_validation() {
        let ovr = vec!["widths=[4, 8]".to_string(), "connect.seed_b=7".to_string(), "task=gaussian".to_string()];
        let cfg = RunConfig::from_toml_with("alpha0 = 2.0", &ovr).unwrap();
        assert_eq!(cfg.widths, vec![4, 8]);
        assert_eq!(cfg.connect.seed_b, 7);
        assert_eq!(cfg.alpha0, 2.0);
        let e = RunConfig::from_toml_with("", &["k0=-1".to_string()]).unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "k0"));
    }

    #[test]
    fn idx_task_needs_a_directory() {
        let e = RunConfig::from_toml_str("task = \"idx\"").unwrap_err();
        assert!(matches!(&e, Error::Config { field, .. } if field == "idx.dir"));
    }

    #[test]
    fn step_count_and_horizon() {
        let cfg = RunConfig::default();
        // α₀ = 40, k0 = 0.05, 10⁴ samples per epoch, batch 100
        assert_eq!(cfg.steps(200, 10_000), 1000);
        assert!((cfg.horizon(200, 10_000) - 200.0).abs() < 1e-9);
        assert!((cfg.horizon(1600, 10_000) - 200.0).abs() < 1e-9);
    }

    #[test]
    fn derived_seeds_differ() {
        let s = [init_seed(3), data_seed(3), oracle_seed(3), init_seed(4)];
        for i in 0..s.len() {
            for j in 0..i {
                assert_ne!(s[i], s[j]);
            }
        }
    }
}
