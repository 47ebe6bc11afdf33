//! Batch generation of synthetic libsvm datasets with truth sidecars.
//!
//! ```toml
//! version = 1
//! n = 1000
//! d = 1000
//! k_star = [20, 40, 60, 80]
//! r = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5]
//! seed = 1
//! ```
//!
//! Dataset `i` in (`k_star`, `r`) row-major order is drawn with seed
//! `derive(seed, "generate", i)` and written as `kstar{k}_r{r}.libsvm` next to
//! `kstar{k}_r{r}.truth.json`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::CONFIG_VERSION;
use super::output::write_json;
use crate::data::libsvm::save_libsvm;
use crate::data::synthetic::{generate_synthetic, SyntheticSpec, DEFAULT_MU};
use crate::error::{Error, Result};
use crate::linalg::SupportSet;
use crate::seed::derive;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    pub fn values(&self) -> Vec<T> {
        match self {
            OneOrMany::One(x) => vec![x.clone()],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

fn default_mu() -> f64 {
    DEFAULT_MU
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenerateSpec {
    pub version: u32,
    pub n: usize,
    pub d: usize,
    pub k_star: OneOrMany<usize>,
    pub r: OneOrMany<f64>,
    #[serde(default = "default_mu")]
    pub mu: f64,
    pub seed: u64,
}

/// Truth sidecar: the planted support and everything needed to regenerate the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthFile {
    pub support: Vec<usize>,
    pub mu: f64,
    pub seed: u64,
    pub n: usize,
    pub d: usize,
    pub k_star: usize,
    pub r: f64,
}

impl TruthFile {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn support_set(&self) -> Result<SupportSet> {
        if let Some(&bad) = self.support.iter().find(|&&i| i >= self.d) {
            return Err(Error::Argument(format!("support index {bad} outside dimension {}", self.d)));
        }
        SupportSet::new(self.support.clone())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratedFile {
    pub data: PathBuf,
    pub truth: PathBuf,
    pub spec: SyntheticSpec,
}

impl GenerateSpec {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let spec: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Specs of every dataset, in output order.
    pub fn specs(&self) -> Vec<SyntheticSpec> {
        let mut out = Vec::new();
        for k_star in self.k_star.values() {
            for r in self.r.values() {
                let seed = derive(self.seed, "generate", out.len() as u64);
                out.push(SyntheticSpec { n: self.n, d: self.d, k_star, r, mu: self.mu, seed });
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!("unsupported spec version {}", self.version)));
        }
        if self.k_star.values().is_empty() || self.r.values().is_empty() {
            return Err(Error::Config("k_star and r grids must not be empty".into()));
        }
        for spec in self.specs() {
            spec.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }
}

pub fn file_stem(spec: &SyntheticSpec) -> String {
    format!("kstar{}_r{}", spec.k_star, spec.r)
}

pub fn generate_files(spec: &GenerateSpec, dir: &Path) -> Result<Vec<GeneratedFile>> {
    spec.validate()?;
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for s in spec.specs() {
        let (data, truth) = generate_synthetic(&s)?;
        let stem = file_stem(&s);
        let data_path = dir.join(format!("{stem}.libsvm"));
        let truth_path = dir.join(format!("{stem}.truth.json"));
        save_libsvm(&data_path, &data)?;
        let sidecar = TruthFile {
            support: truth.support.indices().to_vec(),
            mu: truth.mu,
            seed: s.seed,
            n: s.n,
            d: s.d,
            k_star: s.k_star,
            r: s.r,
        };
        write_json(&truth_path, &sidecar)?;
        written.push(GeneratedFile { data: data_path, truth: truth_path, spec: s });
    }
    Ok(written)
}
