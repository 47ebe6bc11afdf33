//! Imbalanced Gaussian data with a planted support.
//!
//! Negatives are `N(0, I_d)`. Positives are `N(μ, 1)` on the planted support
//! `S` and `N(0, 1)` elsewhere. Rows are laid out positives first.
//!
//! Randomness comes from ChaCha8 seeded with `SyntheticSpec::seed`: the support is
//! drawn first (uniform, without replacement), then the features row by row
//! with the ziggurat standard normal sampler from `rand_distr`. Output is
//! bit-identical for a given seed within one build.

use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::linalg::{SupportSet, Vector};
use crate::seed;

pub const DEFAULT_MU: f64 = 0.3;

fn default_mu() -> f64 {
    DEFAULT_MU
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub d: usize,
    pub k_star: usize,
    pub r: f64,
    #[serde(default = "default_mu")]
    pub mu: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    /// `n₊ = round(r·n)`.
    pub fn n_pos(&self) -> usize {
        (self.r * self.n as f64).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 {
            return Err(Error::Argument("n and d must be positive".into()));
        }
        if !(self.r > 0.0 && self.r <= 0.5) {
            return Err(Error::Argument(format!("imbalance ratio {} outside (0, 1/2]", self.r)));
        }
        if self.k_star == 0 || self.k_star > self.d {
            return Err(Error::Argument(format!("k* = {} must lie in [1, d = {}]", self.k_star, self.d)));
        }
        if self.n_pos() == 0 {
            return Err(Error::Argument(format!("round(r·n) = 0 for r = {}, n = {}", self.r, self.n)));
        }
        if !self.mu.is_finite() {
            return Err(Error::Argument("mu must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub support: SupportSet,
    pub mu: f64,
    pub d: usize,
    pub seed: u64,
}

impl PlantedTruth {
    /// Population minimizer of the least-squares AUC loss for this model.
    ///
    /// `x₊ − x₋ ~ N(μ1_S, 2I)`, so `E[(1 − wᵀ(x₊ − x₋))²]` is minimized by
    /// `w = μ 1_S / (2 + μ² k*)`.
    pub fn reference_weights(&self) -> Vector {
        let k_star = self.support.len() as f64;
        let value = self.mu / (2.0 + self.mu * self.mu * k_star);
        let mut w = vec![0.0; self.d];
        for &i in self.support.indices() {
            w[i] = value;
        }
        Vector::new(w).expect("finite by construction")
    }
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Dataset, PlantedTruth)> {
    spec.validate()?;
    let mut rng = seed::rng(spec.seed);
    let support = SupportSet::new(sample(&mut rng, spec.d, spec.k_star).into_vec())?;
    let mut shift = vec![0.0; spec.d];
    for &i in support.indices() {
        shift[i] = spec.mu;
    }

    let n_pos = spec.n_pos();
    let mut features = Vec::with_capacity(spec.n * spec.d);
    let mut labels = Vec::with_capacity(spec.n);
    for row in 0..spec.n {
        let positive = row < n_pos;
        for &s in &shift {
            let z: f64 = StandardNormal.sample(&mut rng);
            features.push(if positive { z + s } else { z });
        }
        labels.push(if positive { Label::Positive } else { Label::Negative });
    }

    let data = Dataset::new(features, spec.d, labels)?;
    Ok((data, PlantedTruth { support, mu: spec.mu, d: spec.d, seed: spec.seed }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, d: usize, k_star: usize, r: f64, seed: u64) -> SyntheticSpec {
        SyntheticSpec { n, d, k_star, r, mu: DEFAULT_MU, seed }
    }

    #[test]
    fn class_counts_follow_rounding() {
        let (data, truth) = generate_synthetic(&spec(1000, 50, 20, 0.05, 1)).unwrap();
        assert_eq!((data.n_pos(), data.n_neg()), (50, 950));
        assert_eq!(truth.support.len(), 20);
        for r in [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5] {
            assert_eq!(spec(1000, 5, 1, r, 0).n_pos(), (r * 1000.0_f64).round() as usize);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_synthetic(&spec(40, 30, 5, 0.25, 9)).unwrap();
        let b = generate_synthetic(&spec(40, 30, 5, 0.25, 9)).unwrap();
        let c = generate_synthetic(&spec(40, 30, 5, 0.25, 10)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn planted_means_are_close_to_mu() {
        let (data, truth) = generate_synthetic(&spec(1000, 200, 20, 0.5, 4)).unwrap();
        let n_pos = data.n_pos() as f64;
        for &j in truth.support.indices() {
            let mean: f64 = (0..data.n_pos()).map(|i| data.row(i)[j]).sum::<f64>() / n_pos;
            assert!((mean - DEFAULT_MU).abs() <= 3.0 / n_pos.sqrt(), "coordinate {j}: {mean}");
        }
    }

    #[test]
    fn validation() {
        assert!(generate_synthetic(&spec(100, 10, 11, 0.1, 0)).is_err());
        assert!(generate_synthetic(&spec(100, 10, 2, 0.6, 0)).is_err());
        assert!(generate_synthetic(&spec(10, 10, 2, 0.01, 0)).is_err());
    }

    #[test]
    fn reference_weights_sit_on_support() {
        let truth = PlantedTruth { support: SupportSet::new(vec![1, 3]).unwrap(), mu: 0.5, d: 5, seed: 0 };
        let w = truth.reference_weights();
        let v = 0.5 / (2.0 + 0.25 * 2.0);
        assert_eq!(w.as_slice(), &[0.0, v, 0.0, v, 0.0]);
    }
}
