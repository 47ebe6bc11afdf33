//! Sparse AUC maximization by stochastic hard thresholding.
//!
//! The pairwise least-squares AUC surrogate is rewritten as a sum of
//! per-example losses around the class means, which lets a minibatch
//! hard-thresholding loop optimize it at `O(b d)` per iteration. The crate
//! also carries the convergence-theory calculators, a synthetic data
//! generator with a planted support, libsvm ingestion, evaluation metrics,
//! and the sweep runner used by the `sht-auc` binary.

pub mod data;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod metrics;
pub mod objective;
pub mod optimizer;
pub mod seed;
pub mod theory;

pub use dataset::{Dataset, Label};
pub use error::{Error, Result};
pub use linalg::{SupportSet, Vector};
