//! Versioned TOML experiment configuration.
//!
//! ```toml
//! version = 1
//! method = "sht_auc"            # or "stoiht_logistic"
//! seed = 7
//! trials = 10
//! folds = 5
//!
//! [data]
//! kind = "synthetic"            # or "libsvm" with `path` and optional `d_hint`
//! n = 1000
//! d = 1000
//! k_star = 40
//! r = 0.05
//!
//! [optimizer]
//! sparsity_k = 40
//! step_size = 0.003
//! block_count = 10              # or block_size; m = ⌈n / b⌉
//! epochs = 20                   # or iterations; T = epochs · m
//!
//! [sweep]                       # every axis optional, every grid nonempty
//! r = [0.05, 0.25, 0.5]
//! sparsity_k = [20, 40, 60, 80]
//! ```
//!
//! The `r` and `k_star` axes change the data and need a synthetic source.
//! The `sparsity_k`, `step_size` and `block_size` axes are tuned per outer
//! fold by validation AUC.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::synthetic::{SyntheticSpec, DEFAULT_MU};
use crate::error::{Error, Result};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ShtAuc,
    StoihtLogistic,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::ShtAuc => "sht_auc",
            Method::StoihtLogistic => "stoiht_logistic",
        }
    }
}

fn default_mu() -> f64 {
    DEFAULT_MU
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Synthetic {
        n: usize,
        d: usize,
        k_star: usize,
        r: f64,
        #[serde(default = "default_mu")]
        mu: f64,
    },
    Libsvm {
        /// Relative paths resolve against the config file's directory.
        path: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        d_hint: Option<usize>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub sparsity_k: usize,
    pub step_size: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    /// Iterations between trace records; one epoch when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_every: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_star: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparsity_k: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_size: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_size: Option<Vec<usize>>,
}

fn default_trials() -> usize {
    1
}

fn default_folds() -> usize {
    5
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub method: Method,
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_folds")]
    pub folds: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Weights with `|w_i| <= truncate_eps` count as zero in support metrics.
    #[serde(default)]
    pub truncate_eps: f64,
    /// Write one JSON trace per run.
    #[serde(default = "default_true")]
    pub traces: bool,
    pub data: DataSource,
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub sweep: SweepSection,
}

/// One point of the data grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataCell {
    pub index: usize,
    pub r: Option<f64>,
    pub k_star: Option<usize>,
}

/// One point of the hyperparameter grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperCell {
    pub index: usize,
    pub sparsity_k: usize,
    pub step_size: f64,
    /// `None` means the block size follows from `block_count`.
    pub block_size: Option<usize>,
}

fn nonempty<T>(name: &str, grid: &Option<Vec<T>>) -> Result<()> {
    match grid {
        Some(g) if g.is_empty() => Err(Error::Config(format!("sweep.{name} must not be empty"))),
        _ => Ok(()),
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// FNV-1a of the canonical JSON form, as 16 hex digits.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let h = json.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01B3));
        format!("{h:016x}")
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.folds < 2 {
            return Err(Error::Config("folds must be at least 2".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::Config("threads must be positive".into()));
        }
        if !(self.truncate_eps >= 0.0 && self.truncate_eps.is_finite()) {
            return Err(Error::Config("truncate_eps must be a nonnegative number".into()));
        }

        let opt = &self.optimizer;
        match (opt.block_size, opt.block_count) {
            (Some(_), Some(_)) => return Err(Error::Config("give block_size or block_count, not both".into())),
            (None, None) if self.sweep.block_size.is_none() => {
                return Err(Error::Config("optimizer needs block_size or block_count".into()))
            }
            (_, Some(0)) | (Some(0), _) => return Err(Error::Config("block size and count must be positive".into())),
            _ => {}
        }
        if opt.block_count.is_some() && self.sweep.block_size.is_some() {
            return Err(Error::Config("sweep.block_size conflicts with optimizer.block_count".into()));
        }
        match (opt.epochs, opt.iterations) {
            (Some(_), Some(_)) => return Err(Error::Config("give epochs or iterations, not both".into())),
            (None, None) => return Err(Error::Config("optimizer needs epochs or iterations".into())),
            _ => {}
        }
        if opt.eval_every == Some(0) {
            return Err(Error::Config("eval_every must be positive".into()));
        }

        let sweep = &self.sweep;
        nonempty("r", &sweep.r)?;
        nonempty("k_star", &sweep.k_star)?;
        nonempty("sparsity_k", &sweep.sparsity_k)?;
        nonempty("step_size", &sweep.step_size)?;
        nonempty("block_size", &sweep.block_size)?;
        if matches!(self.data, DataSource::Libsvm { .. }) && (sweep.r.is_some() || sweep.k_star.is_some()) {
            return Err(Error::Config("sweep.r and sweep.k_star need a synthetic data source".into()));
        }
        for cell in self.hyper_cells() {
            if cell.sparsity_k == 0 {
                return Err(Error::Config("sparsity_k must be positive".into()));
            }
            if !(cell.step_size > 0.0 && cell.step_size.is_finite()) {
                return Err(Error::Config(format!("step_size {} must be positive", cell.step_size)));
            }
            if cell.block_size == Some(0) {
                return Err(Error::Config("block_size must be positive".into()));
            }
        }
        if self.hyper_cells().len() > 1 && self.folds < 3 {
            return Err(Error::Config("tuning over a grid needs folds >= 3 (train, validation, test)".into()));
        }
        if let DataSource::Synthetic { n, .. } = self.data {
            for cell in self.data_cells() {
                let spec = self.synthetic_spec(&cell, 0).expect("synthetic source");
                spec.validate().map_err(|e| Error::Config(format!("data cell {}: {e}", cell.index)))?;
                let smallest = spec.n_pos().min(n - spec.n_pos());
                if smallest < self.folds {
                    return Err(Error::Config(format!(
                        "data cell {}: a class has {smallest} samples, fewer than {} folds",
                        cell.index, self.folds
                    )));
                }
            }
        }
        Ok(())
    }

    /// Data grid in row-major order over (`r`, `k_star`).
    pub fn data_cells(&self) -> Vec<DataCell> {
        match &self.data {
            DataSource::Libsvm { .. } => vec![DataCell { index: 0, r: None, k_star: None }],
            DataSource::Synthetic { r, k_star, .. } => {
                let rs = self.sweep.r.clone().unwrap_or_else(|| vec![*r]);
                let ks = self.sweep.k_star.clone().unwrap_or_else(|| vec![*k_star]);
                let mut cells = Vec::with_capacity(rs.len() * ks.len());
                for &r in &rs {
                    for &k_star in &ks {
                        cells.push(DataCell { index: cells.len(), r: Some(r), k_star: Some(k_star) });
                    }
                }
                cells
            }
        }
    }

    /// Hyperparameter grid in row-major order over (`sparsity_k`, `step_size`, `block_size`).
    pub fn hyper_cells(&self) -> Vec<HyperCell> {
        let opt = &self.optimizer;
        let ks = self.sweep.sparsity_k.clone().unwrap_or_else(|| vec![opt.sparsity_k]);
        let steps = self.sweep.step_size.clone().unwrap_or_else(|| vec![opt.step_size]);
        let blocks = match &self.sweep.block_size {
            Some(b) => b.iter().map(|&b| Some(b)).collect(),
            None => vec![opt.block_size],
        };
        let mut cells = Vec::with_capacity(ks.len() * steps.len() * blocks.len());
        for &sparsity_k in &ks {
            for &step_size in &steps {
                for &block_size in &blocks {
                    cells.push(HyperCell { index: cells.len(), sparsity_k, step_size, block_size });
                }
            }
        }
        cells
    }

    /// Generator spec for a data cell and trial seed.
    pub fn synthetic_spec(&self, cell: &DataCell, seed: u64) -> Option<SyntheticSpec> {
        match &self.data {
            DataSource::Synthetic { n, d, k_star, r, mu } => Some(SyntheticSpec {
                n: *n,
                d: *d,
                k_star: cell.k_star.unwrap_or(*k_star),
                r: cell.r.unwrap_or(*r),
                mu: *mu,
                seed,
            }),
            DataSource::Libsvm { .. } => None,
        }
    }

    /// Block size for a training set of `n` samples: explicit, or `⌈n / m⌉`
    /// from a block count `m`.
    pub fn block_size_for(&self, cell: &HyperCell, n: usize) -> usize {
        match (cell.block_size, self.optimizer.block_count) {
            (Some(b), _) => b,
            (None, Some(m)) => n.div_ceil(m.min(n.max(1))),
            (None, None) => unreachable!("validated"),
        }
    }

    /// Iteration budget `T` for a run with `blocks` blocks.
    pub fn iterations_for(&self, blocks: usize) -> usize {
        match (self.optimizer.iterations, self.optimizer.epochs) {
            (Some(t), _) => t,
            (None, Some(e)) => e * blocks,
            (None, None) => unreachable!("validated"),
        }
    }

    pub fn eval_every_for(&self, blocks: usize) -> usize {
        self.optimizer.eval_every.unwrap_or(blocks).max(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
version = 1
method = "sht_auc"
seed = 3
trials = 2
folds = 3

[data]
kind = "synthetic"
n = 200
d = 50
k_star = 5
r = 0.25

[optimizer]
sparsity_k = 5
step_size = 0.01
block_count = 4
epochs = 3
"#;

    #[test]
    fn parses_and_defaults() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        assert_eq!(c.method, Method::ShtAuc);
        assert!(c.traces);
        assert_eq!(c.data_cells().len(), 1);
        assert_eq!(c.hyper_cells().len(), 1);
        let h = c.hyper_cells()[0];
        assert_eq!(c.block_size_for(&h, 130), 33);
        assert_eq!(c.iterations_for(4), 12);
        assert_eq!(c.eval_every_for(4), 4);
        match c.data {
            DataSource::Synthetic { mu, .. } => assert_eq!(mu, DEFAULT_MU),
            _ => panic!(),
        }
    }

    #[test]
    fn grids_expand_in_order() {
        let text = format!(
            "{BASE}\n[sweep]\nr = [0.1, 0.5]\nk_star = [2, 4]\nsparsity_k = [5, 10]\nstep_size = [0.1, 0.2, 0.3]\n"
        );
        let c = ExperimentConfig::from_toml_str(&text).unwrap();
        let d = c.data_cells();
        assert_eq!(d.len(), 4);
        assert_eq!((d[1].r, d[1].k_star), (Some(0.1), Some(4)));
        let h = c.hyper_cells();
        assert_eq!(h.len(), 6);
        assert_eq!((h[4].sparsity_k, h[4].step_size), (10, 0.2));
    }

    #[test]
    fn round_trips_through_toml() {
        let c = ExperimentConfig::from_toml_str(BASE).unwrap();
        let again = ExperimentConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.hash(), again.hash());
        let mut other = c.clone();
        other.seed = 4;
        assert_ne!(c.hash(), other.hash());
    }

    #[test]
    fn rejects_bad_configs() {
        let cases = [
            BASE.replace("version = 1", "version = 2"),
            BASE.replace("trials = 2", "trials = 0"),
            BASE.replace("folds = 3", "folds = 1"),
            BASE.replace("k_star = 5", "k_star = 60"),
            BASE.replace("epochs = 3", ""),
            BASE.replace("block_count = 4", ""),
            BASE.replace("block_count = 4", "block_count = 4\nblock_size = 10"),
            BASE.replace("r = 0.25", "r = 0.7"),
            BASE.replace("seed = 3", "seed = 3\nunknown = 1"),
            format!("{BASE}\n[sweep]\nsparsity_k = []\n"),
            format!("{}\n[sweep]\nstep_size = [0.1, 0.2]\n", BASE.replace("folds = 3", "folds = 2")),
        ];
        for text in cases {
            let err = ExperimentConfig::from_toml_str(&text).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{text}: {err}");
        }
    }

    #[test]
    fn libsvm_source_rejects_data_axes() {
        let text = r#"
version = 1
method = "stoiht_logistic"
seed = 1
[data]
kind = "libsvm"
path = "x.txt"
[optimizer]
sparsity_k = 3
step_size = 0.1
block_size = 10
iterations = 5
[sweep]
r = [0.1]
"#;
        assert!(matches!(ExperimentConfig::from_toml_str(text), Err(Error::Config(_))));
        let ok = text.replace("[sweep]\nr = [0.1]\n", "");
        let c = ExperimentConfig::from_toml_str(&ok).unwrap();
        assert_eq!(c.data_cells().len(), 1);
    }
}
