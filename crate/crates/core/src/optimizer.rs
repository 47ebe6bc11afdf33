//! Minibatch stochastic hard thresholding.
//!
//! Both trainers share one loop: fix a block partition of the samples, then
//! for `T` iterations pick a block uniformly at random, take a gradient step
//! on that block's objective and keep the `k` largest-magnitude weights.
//! `sht_auc_train` plugs in the single-sum AUC objective, and
//! `stoiht_logistic_train` plugs in the mean logistic loss.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, threshold_in_place, Vector};
use crate::metrics;
use crate::objective::{AucObjective, BlockPartition};
use crate::seed;

/// Objectives above this magnitude are treated as divergence.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Relaxed sparsity level `k`.
    pub sparsity_k: usize,
    /// Constant step size `γ`.
    pub step_size: f64,
    /// Block (minibatch) size `b`.
    pub block_size: usize,
    /// Iteration budget `T`.
    pub iterations: usize,
    pub seed: u64,
    /// Iterations between trace records.
    pub eval_every: usize,
}

impl OptimizerConfig {
    pub fn validate(&self, n: usize, d: usize) -> Result<()> {
        if self.sparsity_k == 0 || self.sparsity_k > d {
            return Err(Error::Argument(format!("sparsity_k = {} must lie in [1, {d}]", self.sparsity_k)));
        }
        if self.block_size == 0 || self.block_size > n {
            return Err(Error::Argument(format!("block_size = {} must lie in [1, {n}]", self.block_size)));
        }
        if !(self.step_size.is_finite() && self.step_size > 0.0) {
            return Err(Error::Argument(format!("step_size = {} must be positive", self.step_size)));
        }
        if self.eval_every == 0 {
            return Err(Error::Argument("eval_every must be positive".into()));
        }
        Ok(())
    }
}

/// Optional held-out data and reference model to track during training.
#[derive(Clone, Copy, Debug, Default)]
pub struct Monitor<'a> {
    pub test: Option<&'a Dataset>,
    pub reference: Option<&'a Vector>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    /// `iteration / m`: one epoch is one expected pass over the blocks.
    pub epoch: f64,
    pub objective: f64,
    pub test_auc: Option<f64>,
    pub nnz: usize,
    pub distance: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub blocks: usize,
    pub records: Vec<TraceRecord>,
}

impl TrainTrace {
    /// Record with the highest test AUC (earliest on ties).
    pub fn best_auc_record(&self) -> Option<&TraceRecord> {
        self.records.iter().filter(|r| r.test_auc.is_some()).fold(None, |best: Option<&TraceRecord>, r| match best {
            Some(b) if b.test_auc >= r.test_auc => Some(b),
            _ => Some(r),
        })
    }
}

/// Uniform block index sampling over a partition fixed for the whole run.
///
/// The run seed first shuffles `[0, n)` into the partition, then the same
/// generator draws the block indices `i_t` i.i.d. uniform on `[0, m)`.
#[derive(Debug)]
pub struct BlockSchedule {
    partition: BlockPartition,
    rng: seed::Rng,
}

impl BlockSchedule {
    pub fn new(n: usize, block_size: usize, run_seed: u64) -> Result<Self> {
        let mut rng = seed::rng(run_seed);
        let partition = BlockPartition::shuffled(n, block_size, &mut rng)?;
        Ok(Self { partition, rng })
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn next_index(&mut self) -> usize {
        self.rng.random_range(0..self.partition.len())
    }

    pub fn next_block(&mut self) -> &[usize] {
        let i = self.next_index();
        self.partition.block(i)
    }
}

/// An objective that is an average of block objectives.
pub trait StochasticObjective {
    fn dimension(&self) -> usize;
    fn value(&self, w: &[f64]) -> f64;
    fn block_gradient_into(&self, block: &[usize], w: &[f64], out: &mut [f64]);
}

impl StochasticObjective for AucObjective<'_> {
    fn dimension(&self) -> usize {
        self.d()
    }

    fn value(&self, w: &[f64]) -> f64 {
        AucObjective::value(self, w)
    }

    fn block_gradient_into(&self, block: &[usize], w: &[f64], out: &mut [f64]) {
        AucObjective::block_gradient_into(self, block, w, out)
    }
}

/// Mean logistic loss `1/n Σ log(1 + exp(−yᵢ wᵀxᵢ))`.
#[derive(Clone, Copy, Debug)]
pub struct LogisticObjective<'a> {
    data: &'a Dataset,
}

impl<'a> LogisticObjective<'a> {
    pub fn new(data: &'a Dataset) -> Self {
        Self { data }
    }
}

/// `log(1 + exp(x))` without overflow.
fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl StochasticObjective for LogisticObjective<'_> {
    fn dimension(&self) -> usize {
        self.data.d()
    }

    fn value(&self, w: &[f64]) -> f64 {
        let total: f64 =
            (0..self.data.n()).map(|i| softplus(-self.data.label(i).sign() * dot(w, self.data.row(i)))).sum();
        total / self.data.n() as f64
    }

    fn block_gradient_into(&self, block: &[usize], w: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|x| *x = 0.0);
        let scale = 1.0 / block.len() as f64;
        for &j in block {
            let y = self.data.label(j).sign();
            let row = self.data.row(j);
            let coef = -y * sigmoid(-y * dot(w, row));
            axpy(scale * coef, row, out);
        }
    }
}

/// Runs `T` iterations of `w ← H_k(w − γ∇f_B(w))` on `objective`.
pub fn hard_threshold_sgd<O: StochasticObjective>(
    objective: &O,
    n: usize,
    config: &OptimizerConfig,
    w0: &Vector,
    monitor: Monitor<'_>,
) -> Result<(Vector, TrainTrace)> {
    let d = objective.dimension();
    config.validate(n, d)?;
    if w0.len() != d {
        return Err(Error::Dimension(format!("initial weights have length {}, expected {d}", w0.len())));
    }
    if w0.nnz() > config.sparsity_k {
        return Err(Error::Argument(format!(
            "initial weights have {} nonzeros, above the budget k = {}",
            w0.nnz(),
            config.sparsity_k
        )));
    }
    if let Some(reference) = monitor.reference {
        if reference.len() != d {
            return Err(Error::Dimension("reference model dimension differs from data".into()));
        }
    }

    let mut schedule = BlockSchedule::new(n, config.block_size, config.seed)?;
    let blocks = schedule.partition().len();
    let mut w = w0.as_slice().to_vec();
    let mut grad = vec![0.0; d];
    let mut scratch = Vec::with_capacity(d);
    let mut trace = TrainTrace { blocks, records: Vec::new() };

    trace.records.push(record(objective, &w, 0, blocks, monitor)?);
    for t in 0..config.iterations {
        let block = schedule.next_block();
        objective.block_gradient_into(block, &w, &mut grad);
        axpy(-config.step_size, &grad, &mut w);
        if let Some(bad) = w.iter().find(|x| !x.is_finite()) {
            return Err(Error::Divergence { iteration: t + 1, value: *bad });
        }
        threshold_in_place(&mut w, config.sparsity_k, &mut scratch);

        let done = t + 1;
        if done % config.eval_every == 0 || done == config.iterations {
            trace.records.push(record(objective, &w, done, blocks, monitor)?);
        }
    }
    Ok((Vector::new(w)?, trace))
}

fn record<O: StochasticObjective>(
    objective: &O,
    w: &[f64],
    iteration: usize,
    blocks: usize,
    monitor: Monitor<'_>,
) -> Result<TraceRecord> {
    let value = objective.value(w);
    if !value.is_finite() || value.abs() > DIVERGENCE_LIMIT {
        return Err(Error::Divergence { iteration, value });
    }
    let weights = Vector::new(w.to_vec())?;
    Ok(TraceRecord {
        iteration,
        epoch: iteration as f64 / blocks as f64,
        objective: value,
        test_auc: monitor.test.map(|t| metrics::model_auc(&weights, t)).transpose()?,
        nnz: weights.nnz(),
        distance: monitor.reference.map(|r| weights.distance(r)).transpose()?,
    })
}

/// SHT-AUC: hard-thresholded minibatch descent on the single-sum AUC objective.
/// Class means come from the full training set and stay fixed for the run.
pub fn sht_auc_train(
    data: &Dataset,
    config: &OptimizerConfig,
    w0: Option<&Vector>,
    monitor: Monitor<'_>,
) -> Result<(Vector, TrainTrace)> {
    let objective = AucObjective::from_data(data)?;
    let zero = Vector::zeros(data.d());
    hard_threshold_sgd(&objective, data.n(), config, w0.unwrap_or(&zero), monitor)
}

/// StoIHT baseline: the same loop on the mean logistic loss.
pub fn stoiht_logistic_train(
    data: &Dataset,
    config: &OptimizerConfig,
    w0: Option<&Vector>,
    monitor: Monitor<'_>,
) -> Result<(Vector, TrainTrace)> {
    data.require_both_classes()?;
    let objective = LogisticObjective::new(data);
    let zero = Vector::zeros(data.d());
    hard_threshold_sgd(&objective, data.n(), config, w0.unwrap_or(&zero), monitor)
}
