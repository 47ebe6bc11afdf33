//! Convergence constants for SHT-AUC and empirical curvature probes.
//!
//! The Gaussian-design bounds hold with high probability over the draw of
//! the data; the functions here evaluate the deterministic formulas only.
//! With `s = 2k + k*`, `L = ln d` and `M = ½ ln b + ln d`:
//!
//! ```text
//! ν  = 1 + k*/k + √(k*/k)
//! κ  = √(ν (1 − 1/ρ))                       ρ = ρ⁺/ρ⁻
//! ρ⁻ = (λ/2 − 6√2 √(sL/(rn)))² − (32/3) sL/(rn)
//! ρ⁺ = 16 s L M / r
//! ```

use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{hard_threshold, Vector};
use crate::objective::{AucObjective, BlockPartition};
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    /// Relaxed sparsity level.
    pub k: usize,
    /// True sparsity.
    pub k_star: usize,
    pub d: usize,
    pub n: usize,
    /// Block size.
    pub b: usize,
    /// Imbalance ratio `n₊ / n`.
    pub r: f64,
    /// `λ_min(Σ^{1/2})`.
    pub lambda: f64,
}

impl TheoryParams {
    pub fn validate(&self) -> Result<()> {
        if self.k_star == 0 || self.k < self.k_star {
            return Err(Error::Argument(format!("need k >= k* >= 1 (k = {}, k* = {})", self.k, self.k_star)));
        }
        if self.d < 2 || self.n == 0 || self.b == 0 {
            return Err(Error::Argument("need d >= 2, n >= 1 and b >= 1".into()));
        }
        if !(self.r > 0.0 && self.r <= 0.5) {
            return Err(Error::Argument(format!("imbalance ratio {} outside (0, 1/2]", self.r)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::Argument(format!("lambda = {} must be positive", self.lambda)));
        }
        Ok(())
    }

    /// Restricted sparsity level `2k + k*`.
    pub fn level(&self) -> usize {
        2 * self.k + self.k_star
    }

    fn log_d(&self) -> f64 {
        (self.d as f64).ln()
    }

    /// `½ ln b + ln d`
    fn log_factor(&self) -> f64 {
        0.5 * (self.b as f64).ln() + self.log_d()
    }
}

pub fn nu(k: usize, k_star: usize) -> Result<f64> {
    if k_star == 0 || k < k_star {
        return Err(Error::Argument(format!("need k >= k* >= 1 (k = {k}, k* = {k_star})")));
    }
    let q = k_star as f64 / k as f64;
    Ok(1.0 + q + q.sqrt())
}

/// Contraction factor `√(ν (1 − 1/ρ))`. Convergence is linear when it is below 1.
pub fn kappa(nu: f64, rho: f64) -> Result<f64> {
    if rho.is_nan() || rho < 1.0 {
        return Err(Error::Domain(format!("condition number {rho} is below 1")));
    }
    Ok((nu * (1.0 - 1.0 / rho)).sqrt())
}

/// RSS constant `16 s ln d (½ ln b + ln d) / r`.
pub fn rss_constant(level: f64, d: f64, b: f64, r: f64) -> f64 {
    16.0 * level * d.ln() * (0.5 * b.ln() + d.ln()) / r
}

/// Raw RSC expression `(λ/2 − 6√2 √(sL/(rn)))² − (32/3) sL/(rn)` together
/// with the bracket `λ/2 − 6√2 √(sL/(rn))`. The bound only carries meaning
/// when both are positive.
pub fn rsc_expression(level: f64, d: f64, n: f64, r: f64, lambda: f64) -> (f64, f64) {
    let q = level * d.ln() / (r * n);
    let bracket = 0.5 * lambda - 6.0 * std::f64::consts::SQRT_2 * q.sqrt();
    (bracket * bracket - 32.0 / 3.0 * q, bracket)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceConstants {
    pub nu: f64,
    pub rho_minus: f64,
    pub rho_plus: f64,
    pub rho: f64,
    pub kappa: f64,
    /// `κ < 1`
    pub contracts: bool,
    /// `γ = 1/ρ⁺`
    pub step_size_suggestion: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum GaussianBounds {
    Applicable(ConvergenceConstants),
    /// `n` is too small for the RSC bound to be positive.
    RegimeViolated {
        rho_plus: f64,
        rho_minus_expression: f64,
        bracket: f64,
    },
}

impl GaussianBounds {
    pub fn constants(&self) -> Option<&ConvergenceConstants> {
        match self {
            GaussianBounds::Applicable(c) => Some(c),
            GaussianBounds::RegimeViolated { .. } => None,
        }
    }
}

/// High-probability RSC/RSS constants for Gaussian designs at level `2k + k*`.
pub fn gaussian_rsc_rss(params: &TheoryParams) -> Result<GaussianBounds> {
    params.validate()?;
    let s = params.level() as f64;
    let rho_plus = rss_constant(s, params.d as f64, params.b as f64, params.r);
    let (rho_minus, bracket) = rsc_expression(s, params.d as f64, params.n as f64, params.r, params.lambda);
    if bracket <= 0.0 || rho_minus <= 0.0 {
        return Ok(GaussianBounds::RegimeViolated { rho_plus, rho_minus_expression: rho_minus, bracket });
    }
    let nu = nu(params.k, params.k_star)?;
    let rho = rho_plus / rho_minus;
    let kappa = kappa(nu, rho.max(1.0))?;
    Ok(GaussianBounds::Applicable(ConvergenceConstants {
        nu,
        rho_minus,
        rho_plus,
        rho,
        kappa,
        contracts: kappa < 1.0,
        step_size_suggestion: 1.0 / rho_plus,
    }))
}

/// Coefficients of `ρ(r) = 16 / (a r + b √r + c)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveCoefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl CurveCoefficients {
    /// Coefficients at restricted level `s`, block size `b`:
    /// `a = λ²/(4 s L M)`, `b = −6√2 λ / √(n s L M)`, `c = 184 / (3 n M)`.
    pub fn at_level(params: &TheoryParams, level: usize) -> Self {
        let (lambda, n, s) = (params.lambda, params.n as f64, level as f64);
        let lm = params.log_d() * params.log_factor();
        Self {
            a: lambda * lambda / (4.0 * s * lm),
            b: -6.0 * std::f64::consts::SQRT_2 * lambda / (n * s * lm).sqrt(),
            c: 184.0 / (3.0 * n * params.log_factor()),
        }
    }

    pub fn denominator(&self, r: f64) -> f64 {
        self.a * r + self.b * r.sqrt() + self.c
    }

    /// `√r*` minimizing the denominator, `−b / 2a`.
    pub fn sqrt_r_star(&self) -> f64 {
        -self.b / (2.0 * self.a)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r: f64,
    pub denominator: f64,
    /// `None` where the denominator is not positive.
    pub rho: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionCurve {
    pub coefficients: CurveCoefficients,
    pub sqrt_r_star: f64,
    pub points: Vec<CurvePoint>,
}

/// Restricted condition number as a function of the imbalance ratio, at level `2k + k*`.
pub fn condition_number_curve(params: &TheoryParams, r_grid: &[f64]) -> Result<ConditionCurve> {
    params.validate()?;
    if let Some(bad) = r_grid.iter().find(|&&r| !(r > 0.0 && r <= 0.5)) {
        return Err(Error::Argument(format!("grid value {bad} outside (0, 1/2]")));
    }
    let coefficients = CurveCoefficients::at_level(params, params.level());
    let points = r_grid
        .iter()
        .map(|&r| {
            let denominator = coefficients.denominator(r);
            CurvePoint { r, denominator, rho: (denominator > 0.0).then(|| 16.0 / denominator) }
        })
        .collect();
    Ok(ConditionCurve { coefficients, sqrt_r_star: coefficients.sqrt_r_star(), points })
}

/// Numerator of the closed-form tolerance error:
/// `4 r ‖w*‖ + √(r / (2 n ρ(Σ) s ln d))`.
pub fn tolerance_numerator(params: &TheoryParams, norm_w_star: f64, sigma_spectral_bound: f64) -> f64 {
    let (r, n, s) = (params.r, params.n as f64, params.level() as f64);
    4.0 * r * norm_w_star + (r / (2.0 * n * sigma_spectral_bound * s * params.log_d())).sqrt()
}

/// Contraction term of the closed-form tolerance error:
///
/// ```text
/// √((1 + ν)(1 − 3λ²r/(128 k ln d) + (9√2 λ/(16 √(k ln d · n₋)) + 1/n) √r − 27/(4n)))
/// ```
///
/// with `n₋ = (1 − r) n`.
pub fn tolerance_contraction(params: &TheoryParams) -> Result<f64> {
    let nu = nu(params.k, params.k_star)?;
    let (r, n, k, lambda) = (params.r, params.n as f64, params.k as f64, params.lambda);
    let log_d = params.log_d();
    let n_neg = (1.0 - r) * n;
    let inner = 1.0 - 3.0 * lambda * lambda / (128.0 * k * log_d) * r
        + (9.0 * std::f64::consts::SQRT_2 * lambda / (16.0 * (k * log_d * n_neg).sqrt()) + 1.0 / n) * r.sqrt()
        - 27.0 / (4.0 * n);
    let radicand = (1.0 + nu) * inner;
    if radicand < 0.0 {
        return Err(Error::Domain(format!("contraction radicand {radicand} is negative")));
    }
    Ok(radicand.sqrt())
}

/// Closed-form tolerance error `σ_{w*} / (1 − κ)`.
pub fn tolerance_error(params: &TheoryParams, norm_w_star: f64, sigma_spectral_bound: f64) -> Result<f64> {
    params.validate()?;
    if norm_w_star.is_nan() || norm_w_star < 0.0 || sigma_spectral_bound.is_nan() || sigma_spectral_bound <= 0.0 {
        return Err(Error::Argument("need ‖w*‖ >= 0 and ρ(Σ) > 0".into()));
    }
    let kappa = tolerance_contraction(params)?;
    if kappa >= 1.0 {
        return Err(Error::Domain(format!("contraction {kappa} >= 1, the bound is vacuous")));
    }
    Ok(tolerance_numerator(params, norm_w_star, sigma_spectral_bound) / (1.0 - kappa))
}

/// Empirical tolerance parameter `(γ/m) √ν Σᵢ ‖H_s(∇f_{Bᵢ}(w*))‖₂`.
///
/// The largest projection of a vector onto `s` coordinates keeps its `s`
/// largest magnitudes, so the inner maximum is a hard threshold.
pub fn empirical_tolerance_parameter(
    objective: &AucObjective<'_>,
    partition: &BlockPartition,
    w_star: &Vector,
    level: usize,
    step_size: f64,
    nu: f64,
) -> Result<f64> {
    if w_star.len() != objective.d() {
        return Err(Error::Dimension("w* does not match the data dimension".into()));
    }
    let level = level.min(objective.d());
    let mut grad = vec![0.0; objective.d()];
    let mut total = 0.0;
    for block in partition.blocks() {
        objective.block_gradient_into(block, w_star.as_slice(), &mut grad);
        total += hard_threshold(&Vector::new(grad.clone())?, level)?.norm2();
    }
    Ok(step_size / partition.len() as f64 * nu.sqrt() * total)
}

/// Random unit vector with exactly `s` nonzeros: a uniform support, standard
/// normal values, normalized.
pub fn sparse_unit_probe(d: usize, s: usize, rng: &mut seed::Rng) -> Vec<f64> {
    let mut v = vec![0.0; d];
    loop {
        for i in sample(rng, d, s) {
            v[i] = StandardNormal.sample(rng);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
            return v;
        }
        v.iter_mut().for_each(|x| *x = 0.0);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedEigs {
    /// Smallest `vᵀ∇²F v` over the probes.
    pub rho_minus_hat: f64,
    /// Largest block-level `vᵀ∇²f_B v` over probes and blocks.
    pub rho_plus_hat: f64,
}

/// Witness estimates of the restricted curvature along `s`-sparse unit
/// directions. Probe `p` draws from its own derived seed, so the result does
/// not depend on evaluation order.
pub fn empirical_restricted_eigs(
    data: &Dataset,
    partition: &BlockPartition,
    s: usize,
    probes: usize,
    seed_value: u64,
) -> Result<RestrictedEigs> {
    if s == 0 || s > data.d() {
        return Err(Error::Argument(format!("probe sparsity {s} must lie in [1, {}]", data.d())));
    }
    if probes == 0 {
        return Err(Error::Argument("need at least one probe".into()));
    }
    if partition.blocks().iter().flatten().any(|&j| j >= data.n()) {
        return Err(Error::Argument("partition indexes past the dataset".into()));
    }
    let objective = AucObjective::from_data(data)?;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in 0..probes {
        let mut rng = seed::rng(seed::derive(seed_value, "probe", p as u64));
        let v = sparse_unit_probe(data.d(), s, &mut rng);
        lo = lo.min(objective.hessian_quadratic_form(&v));
        for block in partition.blocks() {
            hi = hi.max(objective.block_hessian_quadratic_form(block, &v));
        }
    }
    Ok(RestrictedEigs { rho_minus_hat: lo, rho_plus_hat: hi })
}
