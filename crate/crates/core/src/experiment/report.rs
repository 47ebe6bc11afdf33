//! Theory and evaluation reports for the `theory` and `eval` subcommands.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::CONFIG_VERSION;
use super::sweep::{mean_std, SparseModel};
use crate::data::libsvm::load_libsvm;
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{SupportSet, Vector};
use crate::metrics::{evaluate, EvalReport};
use crate::objective::BlockPartition;
use crate::seed;
use crate::theory::{
    condition_number_curve, empirical_restricted_eigs, gaussian_rsc_rss, kappa, nu, tolerance_contraction,
    tolerance_error, tolerance_numerator, ConditionCurve, GaussianBounds, TheoryParams,
};

fn default_probes() -> usize {
    32
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeRequest {
    pub path: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_hint: Option<usize>,
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default)]
    pub seed: u64,
}

/// ```toml
/// version = 1
/// k = 20
/// k_star = 20
/// d = 1000
/// n = 1000
/// b = 50
/// r = 0.25
/// lambda = 1.0
/// rho = 1.2                 # optional condition number for κ
/// r_grid = [0.05, 0.1, 0.5] # optional
/// norm_w_star = 1.0         # optional, with sigma_spectral_bound
/// sigma_spectral_bound = 1.0
///
/// [probe]                   # optional empirical curvature on a dataset
/// path = "data.libsvm"
/// probes = 32
/// seed = 0
/// ```
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryRequest {
    pub version: u32,
    pub k: usize,
    pub k_star: usize,
    pub d: usize,
    pub n: usize,
    pub b: usize,
    pub r: f64,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub norm_w_star: Option<f64>,
    /// `ρ(Σ)` in the tolerance numerator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma_spectral_bound: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeRequest>,
}

impl TheoryRequest {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let req: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if req.version != CONFIG_VERSION {
            return Err(Error::Config(format!("unsupported params version {}", req.version)));
        }
        req.params().validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(req)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn params(&self) -> TheoryParams {
        TheoryParams { k: self.k, k_star: self.k_star, d: self.d, n: self.n, b: self.b, r: self.r, lambda: self.lambda }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoSource {
    Supplied,
    GaussianBounds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    /// `None` when no condition number is available.
    pub contracts: Option<bool>,
    pub kappa: Option<f64>,
    pub rho: Option<f64>,
    pub rho_source: Option<RhoSource>,
    pub guarantee: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceReport {
    pub contraction: Option<f64>,
    pub numerator: Option<f64>,
    pub error: Option<f64>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalReport {
    pub path: PathBuf,
    pub level: usize,
    pub probes: usize,
    pub seed: u64,
    pub rho_minus_hat: f64,
    pub rho_plus_hat: f64,
    /// `ρ̂⁻ ≤ ρ̂⁺`
    pub ordered: bool,
    pub rho_hat: Option<f64>,
    pub kappa_hat: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryReport {
    pub request: TheoryRequest,
    pub level: usize,
    pub nu: f64,
    pub gaussian: GaussianBounds,
    pub verdict: Verdict,
    pub curve: Option<ConditionCurve>,
    pub tolerance: ToleranceReport,
    pub empirical: Option<EmpiricalReport>,
}

const GUARANTEE: &str = "linear convergence up to the tolerance error when kappa < 1; \
the Gaussian-design constants hold with high probability over the data draw";

pub fn theory_report(req: &TheoryRequest, base_dir: &Path) -> Result<TheoryReport> {
    let params = req.params();
    params.validate()?;
    let nu = nu(params.k, params.k_star)?;
    let gaussian = gaussian_rsc_rss(&params)?;

    let (rho, rho_source) = match (req.rho, gaussian.constants()) {
        (Some(rho), _) => (Some(rho), Some(RhoSource::Supplied)),
        (None, Some(c)) => (Some(c.rho), Some(RhoSource::GaussianBounds)),
        (None, None) => (None, None),
    };
    let kappa_value = rho.map(|rho| kappa(nu, rho)).transpose()?;
    let verdict = Verdict {
        contracts: kappa_value.map(|k| k < 1.0),
        kappa: kappa_value,
        rho,
        rho_source,
        guarantee: GUARANTEE.into(),
    };

    let curve = req.r_grid.as_ref().map(|g| condition_number_curve(&params, g)).transpose()?;

    let contraction = tolerance_contraction(&params);
    let numerator = match (req.norm_w_star, req.sigma_spectral_bound) {
        (Some(w), Some(s)) => Some(tolerance_numerator(&params, w, s)),
        _ => None,
    };
    let (error, note) = match (req.norm_w_star, req.sigma_spectral_bound) {
        (Some(w), Some(s)) => match tolerance_error(&params, w, s) {
            Ok(e) => (Some(e), None),
            Err(e) => (None, Some(e.to_string())),
        },
        _ => (None, Some("norm_w_star and sigma_spectral_bound are needed for the error".into())),
    };
    let tolerance = ToleranceReport {
        contraction: contraction.as_ref().ok().copied(),
        numerator,
        error,
        note: match (&contraction, note) {
            (Err(e), _) => Some(e.to_string()),
            (Ok(_), n) => n,
        },
    };

    let empirical = req.probe.as_ref().map(|p| probe(p, &params, nu, base_dir)).transpose()?;
    Ok(TheoryReport { request: req.clone(), level: params.level(), nu, gaussian, verdict, curve, tolerance, empirical })
}

fn probe(p: &ProbeRequest, params: &TheoryParams, nu: f64, base_dir: &Path) -> Result<EmpiricalReport> {
    let path = if p.path.is_absolute() { p.path.clone() } else { base_dir.join(&p.path) };
    let data = load_libsvm(&path, p.d_hint)?.data;
    data.require_both_classes()?;
    let level = params.level().min(data.d());
    let b = params.b.min(data.n());
    let mut rng = seed::rng(seed::derive(p.seed, "partition", 0));
    let partition = BlockPartition::shuffled(data.n(), b, &mut rng)?;
    let eigs = empirical_restricted_eigs(&data, &partition, level, p.probes, p.seed)?;
    let rho_hat = (eigs.rho_minus_hat > 0.0).then(|| eigs.rho_plus_hat / eigs.rho_minus_hat);
    Ok(EmpiricalReport {
        path: p.path.clone(),
        level,
        probes: p.probes,
        seed: p.seed,
        rho_minus_hat: eigs.rho_minus_hat,
        rho_plus_hat: eigs.rho_plus_hat,
        ordered: eigs.rho_minus_hat <= eigs.rho_plus_hat,
        rho_hat,
        kappa_hat: rho_hat.map(|r| kappa(nu, r)).transpose()?,
    })
}

/// Reads a model from JSON: a dense array, a `SparseModel`, or a trace file.
pub fn load_model(path: impl AsRef<Path>) -> Result<Vector> {
    let value: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if value.is_array() {
        return Vector::new(serde_json::from_value(value)?);
    }
    let sparse: SparseModel = match value.get("model") {
        Some(m) => serde_json::from_value(m.clone())?,
        None => serde_json::from_value(value)?,
    };
    sparse.to_dense()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalAggregate {
    pub models: usize,
    pub auc: MeanStd,
    pub f1: Option<MeanStd>,
    pub jaccard: Option<MeanStd>,
    pub ratio: Option<MeanStd>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOutput {
    pub reports: Vec<EvalReport>,
    /// Present when more than one model is evaluated.
    pub aggregate: Option<EvalAggregate>,
}

fn aggregate_field(reports: &[EvalReport], f: fn(&EvalReport) -> Option<f64>) -> Option<MeanStd> {
    let vals: Vec<f64> = reports.iter().filter_map(f).collect();
    if vals.len() != reports.len() {
        return None;
    }
    mean_std(&vals).map(|(mean, std)| MeanStd { mean, std })
}

pub fn evaluate_models(
    models: &[Vector],
    data: &Dataset,
    truth: Option<&SupportSet>,
    truncate_eps: f64,
) -> Result<EvalOutput> {
    if models.is_empty() {
        return Err(Error::Argument("no models to evaluate".into()));
    }
    let reports = models
        .iter()
        .map(|w| {
            if w.len() != data.d() {
                return Err(Error::Dimension(format!("model has {} weights, data has d = {}", w.len(), data.d())));
            }
            evaluate(w, data, truth, truncate_eps)
        })
        .collect::<Result<Vec<_>>>()?;
    let aggregate = (reports.len() > 1).then(|| EvalAggregate {
        models: reports.len(),
        auc: aggregate_field(&reports, |r| Some(r.auc)).expect("auc always present"),
        f1: aggregate_field(&reports, |r| r.f1),
        jaccard: aggregate_field(&reports, |r| r.jaccard),
        ratio: aggregate_field(&reports, |r| r.ratio),
    });
    Ok(EvalOutput { reports, aggregate })
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "version = 1\nk = 20\nk_star = 20\nd = 1000\nn = 1000\nb = 50\nr = 0.25\nlambda = 1.0\n";

    #[test]
    fn supplied_rho_gives_the_textbook_kappa() {
        let req = TheoryRequest::from_toml_str(&format!("{BASE}rho = 1.2\n")).unwrap();
        let report = theory_report(&req, Path::new(".")).unwrap();
        assert_eq!(report.nu, 3.0);
        assert!((report.verdict.kappa.unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(report.verdict.contracts, Some(true));
        assert_eq!(report.verdict.rho_source, Some(RhoSource::Supplied));
    }

    #[test]
    fn small_n_violates_the_gaussian_regime() {
        let req = TheoryRequest::from_toml_str(BASE).unwrap();
        let report = theory_report(&req, Path::new(".")).unwrap();
        assert!(matches!(report.gaussian, GaussianBounds::RegimeViolated { .. }));
        assert_eq!(report.verdict.contracts, None);
        assert!(report.tolerance.note.is_some());
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(matches!(TheoryRequest::from_toml_str(&BASE.replace("k = 20", "k = 5")), Err(Error::Config(_))));
        assert!(matches!(TheoryRequest::from_toml_str(&BASE.replace("r = 0.25", "r = 0.9")), Err(Error::Config(_))));
    }

    #[test]
    fn aggregate_over_models() {
        let data = Dataset::from_rows(
            &[vec![1.0, 0.0], vec![0.0, 1.0], vec![2.0, 0.0], vec![0.0, 2.0]],
            vec![crate::Label::Positive, crate::Label::Negative, crate::Label::Positive, crate::Label::Negative],
        )
        .unwrap();
        let truth = SupportSet::new(vec![0]).unwrap();
        let good = Vector::new(vec![1.0, 0.0]).unwrap();
        let zero = Vector::zeros(2);
        let out = evaluate_models(&[good, zero], &data, Some(&truth), 0.0).unwrap();
        assert_eq!(out.reports[0].auc, 1.0);
        assert_eq!(out.reports[1].auc, 0.5);
        let agg = out.aggregate.unwrap();
        assert_eq!(agg.auc.mean, 0.75);
        assert_eq!(agg.f1.unwrap().mean, 0.5);
    }
}
