//! Grid execution: data cells × trials × outer folds × hyperparameter cells.
//!
//! Seeds per trial `t` and outer fold `f`:
//!
//! ```text
//! data  = derive(seed, "data",  t)        shared by every data cell
//! split = derive(seed, "split", t)
//! run   = derive(seed, "run",   t·K + f)  shared by every hyper cell
//! ```
//!
//! so cells that differ only in `r` or `k*` see matched draws. Fold `f` is
//! the test set. With more than one hyper cell, fold `(f + 1) mod K` is held
//! out for validation and the cell with the best validation AUC is selected
//! (earliest on ties).

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DataCell, DataSource, ExperimentConfig, HyperCell, Method};
use crate::data::libsvm::load_libsvm;
use crate::data::split::stratified_assignment;
use crate::data::synthetic::{generate_synthetic, PlantedTruth};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{SupportSet, Vector};
use crate::metrics;
use crate::optimizer::{sht_auc_train, stoiht_logistic_train, Monitor, OptimizerConfig, TrainTrace};
use crate::seed::derive;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

/// One run of the grid. The CSV and JSON outputs serialize this same struct.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub row: usize,
    pub method: Method,
    pub config_hash: String,
    pub seed: u64,
    pub data_cell: usize,
    pub r: Option<f64>,
    pub k_star: Option<usize>,
    pub trial: usize,
    pub fold: usize,
    pub data_seed: Option<u64>,
    pub split_seed: u64,
    pub run_seed: u64,
    pub hyper_cell: usize,
    pub sparsity_k: usize,
    pub step_size: f64,
    pub block_size: Option<usize>,
    pub blocks: Option<usize>,
    pub iterations: Option<usize>,
    pub n_train: Option<usize>,
    pub n_test: Option<usize>,
    pub status: Status,
    pub selected: bool,
    pub validation_auc: Option<f64>,
    pub final_auc: Option<f64>,
    pub best_epoch: Option<f64>,
    pub best_epoch_auc: Option<f64>,
    pub f1: Option<f64>,
    pub jaccard: Option<f64>,
    pub ratio: Option<f64>,
    pub support_size: Option<usize>,
    pub final_objective: Option<f64>,
    pub trace_file: Option<String>,
    pub error: Option<String>,
}

/// Nonzero coordinates of a trained model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseModel {
    pub d: usize,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl SparseModel {
    pub fn from_dense(w: &Vector) -> Self {
        let (indices, values) =
            w.as_slice().iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(i, &x)| (i, x)).unzip();
        Self { d: w.len(), indices, values }
    }

    pub fn to_dense(&self) -> Result<Vector> {
        if self.indices.len() != self.values.len() {
            return Err(Error::Argument("model indices and values differ in length".into()));
        }
        let mut w = vec![0.0; self.d];
        for (&i, &x) in self.indices.iter().zip(&self.values) {
            if i >= self.d {
                return Err(Error::Dimension(format!("model index {i} outside dimension {}", self.d)));
            }
            w[i] = x;
        }
        Vector::new(w)
    }
}

/// Per-run trace file contents.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceArtifact {
    pub row: usize,
    pub method: Method,
    pub config_hash: String,
    pub seed: u64,
    pub data_cell: DataCell,
    pub trial: usize,
    pub fold: usize,
    pub optimizer: OptimizerConfig,
    pub trace: TrainTrace,
    pub model: SparseModel,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub row: usize,
    pub wall_seconds: f64,
}

/// Mean and sample standard deviation over trials of the selected runs,
/// where each trial contributes the mean over its outer folds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub method: Method,
    pub data_cell: usize,
    pub r: Option<f64>,
    pub k_star: Option<usize>,
    pub trials: usize,
    pub selected_runs: usize,
    pub failed_runs: usize,
    pub auc_mean: Option<f64>,
    pub auc_std: Option<f64>,
    pub best_epoch_auc_mean: Option<f64>,
    pub f1_mean: Option<f64>,
    pub f1_std: Option<f64>,
    pub jaccard_mean: Option<f64>,
    pub jaccard_std: Option<f64>,
    pub ratio_mean: Option<f64>,
    pub ratio_std: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOutcome {
    pub config: ExperimentConfig,
    pub config_hash: String,
    pub rows: Vec<ResultRow>,
    pub summary: Vec<SummaryRow>,
    #[serde(skip)]
    pub traces: Vec<TraceArtifact>,
    #[serde(skip)]
    pub timings: Vec<Timing>,
}

impl SweepOutcome {
    pub fn failed_runs(&self) -> usize {
        self.rows.iter().filter(|r| r.status == Status::Failed).count()
    }
}

struct Group<'a> {
    index: usize,
    cell: &'a DataCell,
    trial: usize,
}

struct Prepared {
    data: Dataset,
    truth: Option<PlantedTruth>,
    data_seed: Option<u64>,
    assignment: Vec<usize>,
}

struct RunOutput {
    row: ResultRow,
    trace: Option<TraceArtifact>,
    wall_seconds: f64,
}

/// Runs every cell of the grid. Relative libsvm paths resolve against `base_dir`.
///
/// Configuration and input-loading problems are returned as errors. Failures
/// inside a run become failure rows and leave the other runs untouched.
pub fn run_sweep(config: &ExperimentConfig, base_dir: &Path) -> Result<SweepOutcome> {
    config.validate()?;
    let loaded = match &config.data {
        DataSource::Libsvm { path, d_hint } => {
            let full = if path.is_absolute() { path.clone() } else { base_dir.join(path) };
            let loaded = load_libsvm(&full, *d_hint)?;
            loaded.data.require_both_classes()?;
            Some(loaded.data)
        }
        DataSource::Synthetic { .. } => None,
    };

    let data_cells = config.data_cells();
    let hyper_cells = config.hyper_cells();
    let groups: Vec<Group> = data_cells
        .iter()
        .flat_map(|cell| (0..config.trials).map(move |trial| (cell, trial)))
        .enumerate()
        .map(|(index, (cell, trial))| Group { index, cell, trial })
        .collect();

    let hash = config.hash();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let per_group: Vec<Vec<RunOutput>> = pool
        .install(|| groups.par_iter().map(|g| run_group(config, &hash, g, &hyper_cells, loaded.as_ref())).collect());

    let mut rows = Vec::new();
    let mut traces = Vec::new();
    let mut timings = Vec::new();
    for out in per_group.into_iter().flatten() {
        timings.push(Timing { row: out.row.row, wall_seconds: out.wall_seconds });
        traces.extend(out.trace);
        rows.push(out.row);
    }
    mark_selected(&mut rows, hyper_cells.len());
    let summary = summarize(config, &data_cells, &rows);
    Ok(SweepOutcome { config: config.clone(), config_hash: hash, rows, summary, traces, timings })
}

fn prepare(config: &ExperimentConfig, group: &Group, loaded: Option<&Dataset>) -> Result<Prepared> {
    let (data, truth, data_seed) = match loaded {
        Some(data) => (data.clone(), None, None),
        None => {
            let seed = derive(config.seed, "data", group.trial as u64);
            let spec = config.synthetic_spec(group.cell, seed).expect("synthetic source");
            let (data, truth) = generate_synthetic(&spec)?;
            (data, Some(truth), Some(seed))
        }
    };
    let split_seed = derive(config.seed, "split", group.trial as u64);
    let assignment = stratified_assignment(data.labels(), config.folds, split_seed)?;
    Ok(Prepared { data, truth, data_seed, assignment })
}

fn run_group(
    config: &ExperimentConfig,
    hash: &str,
    group: &Group,
    hyper_cells: &[HyperCell],
    loaded: Option<&Dataset>,
) -> Vec<RunOutput> {
    let prepared = prepare(config, group, loaded);
    let jobs: Vec<(usize, &HyperCell)> =
        (0..config.folds).flat_map(|f| hyper_cells.iter().map(move |h| (f, h))).collect();
    jobs.par_iter()
        .map(|&(fold, hyper)| {
            let row_index = (group.index * config.folds + fold) * hyper_cells.len() + hyper.index;
            let mut row = ResultRow {
                row: row_index,
                method: config.method,
                config_hash: hash.to_string(),
                seed: config.seed,
                data_cell: group.cell.index,
                r: group.cell.r,
                k_star: group.cell.k_star,
                trial: group.trial,
                fold,
                data_seed: None,
                split_seed: derive(config.seed, "split", group.trial as u64),
                run_seed: derive(config.seed, "run", (group.trial * config.folds + fold) as u64),
                hyper_cell: hyper.index,
                sparsity_k: hyper.sparsity_k,
                step_size: hyper.step_size,
                block_size: hyper.block_size,
                blocks: None,
                iterations: None,
                n_train: None,
                n_test: None,
                status: Status::Failed,
                selected: false,
                validation_auc: None,
                final_auc: None,
                best_epoch: None,
                best_epoch_auc: None,
                f1: None,
                jaccard: None,
                ratio: None,
                support_size: None,
                final_objective: None,
                trace_file: None,
                error: None,
            };
            let start = Instant::now();
            let trace = match &prepared {
                Ok(p) => {
                    row.data_seed = p.data_seed;
                    match run_one(config, p, fold, hyper, hyper_cells.len() > 1, &mut row) {
                        Ok(t) => Some(t),
                        Err(e) => {
                            row.error = Some(e.to_string());
                            None
                        }
                    }
                }
                Err(e) => {
                    row.error = Some(e.to_string());
                    None
                }
            };
            let wall_seconds = start.elapsed().as_secs_f64();
            let trace = trace.filter(|_| config.traces).map(|(optimizer, trace, model)| {
                row.trace_file = Some(trace_file_name(row_index));
                TraceArtifact {
                    row: row_index,
                    method: config.method,
                    config_hash: hash.to_string(),
                    seed: config.seed,
                    data_cell: group.cell.clone(),
                    trial: group.trial,
                    fold,
                    optimizer,
                    trace,
                    model,
                }
            });
            RunOutput { row, trace, wall_seconds }
        })
        .collect()
}

pub fn trace_file_name(row: usize) -> String {
    format!("traces/run-{row:05}.json")
}

fn run_one(
    config: &ExperimentConfig,
    p: &Prepared,
    fold: usize,
    hyper: &HyperCell,
    tuning: bool,
    row: &mut ResultRow,
) -> Result<(OptimizerConfig, TrainTrace, SparseModel)> {
    let validation_fold = tuning.then(|| (fold + 1) % config.folds);
    let mut train_idx = Vec::new();
    let mut val_idx = Vec::new();
    let mut test_idx = Vec::new();
    for (i, &a) in p.assignment.iter().enumerate() {
        if a == fold {
            test_idx.push(i);
        } else if Some(a) == validation_fold {
            val_idx.push(i);
        } else {
            train_idx.push(i);
        }
    }
    let train = p.data.subset(&train_idx);
    let test = p.data.subset(&test_idx);
    row.n_train = Some(train.n());
    row.n_test = Some(test.n());

    let block_size = config.block_size_for(hyper, train.n());
    let blocks = train.n().div_ceil(block_size.max(1));
    let optimizer = OptimizerConfig {
        sparsity_k: hyper.sparsity_k,
        step_size: hyper.step_size,
        block_size,
        iterations: config.iterations_for(blocks),
        seed: row.run_seed,
        eval_every: config.eval_every_for(blocks),
    };
    row.block_size = Some(block_size);
    row.blocks = Some(blocks);
    row.iterations = Some(optimizer.iterations);

    let reference = p.truth.as_ref().map(|t| t.reference_weights());
    let monitor = Monitor { test: Some(&test), reference: reference.as_ref() };
    let (w, trace) = match config.method {
        Method::ShtAuc => sht_auc_train(&train, &optimizer, None, monitor)?,
        Method::StoihtLogistic => stoiht_logistic_train(&train, &optimizer, None, monitor)?,
    };

    if validation_fold.is_some() {
        row.validation_auc = Some(metrics::model_auc(&w, &p.data.subset(&val_idx))?);
    }
    let truth: Option<&SupportSet> = p.truth.as_ref().map(|t| &t.support);
    let report = metrics::evaluate(&w, &test, truth, config.truncate_eps)?;
    row.final_auc = Some(report.auc);
    row.f1 = report.f1;
    row.jaccard = report.jaccard;
    row.ratio = report.ratio;
    row.support_size = Some(report.support_size);
    if let Some(best) = trace.best_auc_record() {
        row.best_epoch = Some(best.epoch);
        row.best_epoch_auc = best.test_auc;
    }
    row.final_objective = trace.records.last().map(|r| r.objective);
    row.status = Status::Ok;
    Ok((optimizer, trace, SparseModel::from_dense(&w)))
}

fn mark_selected(rows: &mut [ResultRow], hyper_count: usize) {
    for chunk in rows.chunks_mut(hyper_count) {
        let mut best: Option<usize> = None;
        for (i, row) in chunk.iter().enumerate() {
            if row.status != Status::Ok {
                continue;
            }
            let score = row.validation_auc.unwrap_or(f64::NEG_INFINITY);
            match best {
                Some(b) if chunk[b].validation_auc.unwrap_or(f64::NEG_INFINITY) >= score => {}
                _ => best = Some(i),
            }
        }
        if let Some(b) = best {
            chunk[b].selected = true;
        }
    }
}

/// Mean and sample standard deviation (0 for a single value).
pub fn mean_std(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    Some((mean, std))
}

fn summarize(config: &ExperimentConfig, cells: &[DataCell], rows: &[ResultRow]) -> Vec<SummaryRow> {
    cells
        .iter()
        .map(|cell| {
            let in_cell: Vec<&ResultRow> = rows.iter().filter(|r| r.data_cell == cell.index).collect();
            let selected: Vec<&ResultRow> = in_cell.iter().copied().filter(|r| r.selected).collect();
            let per_trial = |field: fn(&ResultRow) -> Option<f64>| -> Vec<f64> {
                (0..config.trials)
                    .filter_map(|t| {
                        let vals: Vec<f64> =
                            selected.iter().filter(|r| r.trial == t).filter_map(|r| field(r)).collect();
                        mean_std(&vals).map(|(m, _)| m)
                    })
                    .collect()
            };
            let auc = mean_std(&per_trial(|r| r.final_auc));
            let best = mean_std(&per_trial(|r| r.best_epoch_auc));
            let f1 = mean_std(&per_trial(|r| r.f1));
            let jaccard = mean_std(&per_trial(|r| r.jaccard));
            let ratio = mean_std(&per_trial(|r| r.ratio));
            SummaryRow {
                method: config.method,
                data_cell: cell.index,
                r: cell.r,
                k_star: cell.k_star,
                trials: config.trials,
                selected_runs: selected.len(),
                failed_runs: in_cell.iter().filter(|r| r.status == Status::Failed).count(),
                auc_mean: auc.map(|x| x.0),
                auc_std: auc.map(|x| x.1),
                best_epoch_auc_mean: best.map(|x| x.0),
                f1_mean: f1.map(|x| x.0),
                f1_std: f1.map(|x| x.1),
                jaccard_mean: jaccard.map(|x| x.0),
                jaccard_std: jaccard.map(|x| x.1),
                ratio_mean: ratio.map(|x| x.0),
                ratio_std: ratio.map(|x| x.1),
            }
        })
        .collect()
}
