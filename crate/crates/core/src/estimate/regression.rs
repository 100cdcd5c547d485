//! Conditional-density models and the averaged composite score used for
//! regression.

use std::f64::consts::PI;
use std::fmt::Debug;

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use super::optim::{minimize, FitConfig, FitResult};
use crate::affine::{AffineMap, EquivarianceReport};
use crate::density::sample::Sample;
use crate::error::{HolderError, Result};
use crate::rng;
use crate::score::composite::CompositeScore;

/// Nodes of the per-observation y-quadrature.
pub const Y_QUADRATURE_POINTS: usize = 513;

/// A θ-indexed family of conditional densities q(y | x) with scalar y.
pub trait ConditionalModel: Send + Sync + Debug {
    fn name(&self) -> &'static str;

    fn covariate_dim(&self) -> usize;

    fn param_dim(&self) -> usize;

    fn is_valid(&self, theta: &[f64]) -> bool;

    fn cond_log_density(&self, theta: &[f64], y: f64, x: &[f64]) -> f64;

    fn cond_density(&self, theta: &[f64], y: f64, x: &[f64]) -> f64 {
        self.cond_log_density(theta, y, x).exp()
    }

    /// ∂/∂θ log q_θ(y | x).
    fn cond_score(&self, theta: &[f64], y: f64, x: &[f64]) -> Vec<f64>;

    /// Interval outside which q_θ(· | x) is negligible.
    fn y_domain(&self, theta: &[f64], x: &[f64]) -> (f64, f64);

    /// Parameter of the model for y ↦ σ⁻¹(y − μ), when the family is closed
    /// under the map.
    fn transform_params(&self, _theta: &[f64], _map: &AffineMap) -> Option<Vec<f64>> {
        None
    }

    fn initial_guess(&self, sample: &Sample) -> Vec<f64>;

    fn draw_y(&self, theta: &[f64], x: &[f64], rng: &mut rng::StreamRng) -> f64;
}

/// y = a·x + b + s·N(0, 1); θ = (a₁..a_m, b) with s fixed, or (a₁..a_m, b, s).
#[derive(Clone, Debug, PartialEq)]
pub struct LinearGaussian {
    covariates: usize,
    fixed_scale: Option<f64>,
}

impl LinearGaussian {
    pub fn fixed_scale(covariates: usize, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(HolderError::Config(format!("scale must be positive, got {scale}")));
        }
        Self::check(covariates)?;
        Ok(Self { covariates, fixed_scale: Some(scale) })
    }

    pub fn free_scale(covariates: usize) -> Result<Self> {
        Self::check(covariates)?;
        Ok(Self { covariates, fixed_scale: None })
    }

    fn check(m: usize) -> Result<()> {
        if m == 0 {
            Err(HolderError::Config("linear-gaussian needs at least one covariate".into()))
        } else {
            Ok(())
        }
    }

    fn mean(&self, theta: &[f64], x: &[f64]) -> f64 {
        let m = self.covariates;
        theta[..m].iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + theta[m]
    }

    fn sd(&self, theta: &[f64]) -> f64 {
        self.fixed_scale.unwrap_or_else(|| theta[self.covariates + 1])
    }
}

impl ConditionalModel for LinearGaussian {
    fn name(&self) -> &'static str {
        "linear-gaussian"
    }
    fn covariate_dim(&self) -> usize {
        self.covariates
    }
    fn param_dim(&self) -> usize {
        self.covariates + 1 + usize::from(self.fixed_scale.is_none())
    }
    fn is_valid(&self, theta: &[f64]) -> bool {
        theta.len() == self.param_dim() && theta.iter().all(|v| v.is_finite()) && self.sd(theta) > 0.0
    }
    fn cond_log_density(&self, theta: &[f64], y: f64, x: &[f64]) -> f64 {
        let s = self.sd(theta);
        let r = (y - self.mean(theta, x)) / s;
        -0.5 * r * r - s.ln() - 0.5 * (2.0 * PI).ln()
    }
    fn cond_score(&self, theta: &[f64], y: f64, x: &[f64]) -> Vec<f64> {
        let s = self.sd(theta);
        let r = y - self.mean(theta, x);
        let mut g: Vec<f64> = x.iter().map(|v| r * v / (s * s)).collect();
        g.push(r / (s * s));
        if self.fixed_scale.is_none() {
            g.push(-1.0 / s + r * r / (s * s * s));
        }
        g
    }
    fn y_domain(&self, theta: &[f64], x: &[f64]) -> (f64, f64) {
        let m = self.mean(theta, x);
        let w = 8.0 * self.sd(theta);
        (m - w, m + w)
    }
    fn transform_params(&self, theta: &[f64], map: &AffineMap) -> Option<Vec<f64>> {
        if map.dim() != 1 {
            return None;
        }
        let sigma = map.sigma()[(0, 0)];
        let mu = map.mu()[0];
        let m = self.covariates;
        if self.fixed_scale.is_some() && sigma.abs() != 1.0 {
            return None;
        }
        let mut out: Vec<f64> = theta[..m].iter().map(|a| a / sigma).collect();
        out.push((theta[m] - mu) / sigma);
        if self.fixed_scale.is_none() {
            out.push(theta[m + 1] / sigma.abs());
        }
        Some(out)
    }
    /// Least squares for the coefficients and the residual SD for the scale.
    fn initial_guess(&self, sample: &Sample) -> Vec<f64> {
        let m = self.covariates;
        let n = sample.len();
        let Some(xs) = sample.covariates() else {
            return vec![0.0; self.param_dim()];
        };
        let design = DMatrix::from_fn(n, m + 1, |i, j| if j < m { xs[i][j] } else { 1.0 });
        let y = DVector::from_iterator(n, sample.points().iter().map(|p| p[0]));
        let coef = (design.transpose() * &design)
            .lu()
            .solve(&(design.transpose() * &y))
            .unwrap_or_else(|| DVector::zeros(m + 1));
        let mut theta: Vec<f64> = coef.iter().copied().collect();
        if self.fixed_scale.is_none() {
            let resid = &y - &design * &coef;
            let sd = (resid.norm_squared() / n as f64).sqrt();
            theta.push(if sd > 1e-8 { sd } else { 1.0 });
        }
        theta
    }
    fn draw_y(&self, theta: &[f64], x: &[f64], rng: &mut rng::StreamRng) -> f64 {
        let e: f64 = StandardNormal.sample(rng);
        self.mean(theta, x) + self.sd(theta) * e
    }
}

/// Draw y_i ~ q_θ(· | x_i) for the given covariates.
pub fn simulate(model: &dyn ConditionalModel, theta: &[f64], xs: Vec<Vec<f64>>, seed: u64) -> Result<Sample> {
    let mut r = rng::stream(seed, 0);
    let ys = xs.iter().map(|x| vec![model.draw_y(theta, x, &mut r)]).collect();
    Sample::with_covariates(ys, xs)
}

/// ⟨q_θ(· | x)^a⟩ by the trapezoid rule on the model's y-domain.
pub fn y_power_moment(model: &dyn ConditionalModel, theta: &[f64], x: &[f64], a: f64) -> f64 {
    let (lo, hi) = model.y_domain(theta, x);
    let n = Y_QUADRATURE_POINTS;
    let h = (hi - lo) / (n - 1) as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let y = lo + h * i as f64;
        let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        acc += w * (a * model.cond_log_density(theta, y, x)).exp();
    }
    acc * h
}

fn check_regression_inputs(model: &dyn ConditionalModel, sample: &Sample) -> Result<()> {
    let xs = sample
        .covariates()
        .ok_or_else(|| HolderError::Structural("regression needs covariates".into()))?;
    if sample.dim() != 1 {
        return Err(HolderError::Structural("regression outcome must be scalar".into()));
    }
    if xs.first().map_or(0, Vec::len) != model.covariate_dim() {
        return Err(HolderError::Structural("covariate dimension does not match the model".into()));
    }
    Ok(())
}

/// (1/n) Σ T(S₀(y_i, q(·|x_i)), q(·|x_i)): the empirical averaged score.
///
/// Only families whose score is linear in the outcome distribution admit
/// this plug-in average; others are rejected.
pub fn averaged_score(
    score: &CompositeScore,
    model: &dyn ConditionalModel,
    theta: &[f64],
    sample: &Sample,
) -> Result<f64> {
    if !score.is_bregman() {
        return Err(HolderError::UnsupportedFamily(format!(
            "{score} is not a Bregman score; its averaged score over covariates cannot be estimated by a \
             sample average, so regression supports only KL and the Bregman–Hölder family"
        )));
    }
    check_regression_inputs(model, sample)?;
    if !model.is_valid(theta) {
        return Err(HolderError::Domain(format!("invalid parameter {theta:?}")));
    }
    let xs = sample.covariates().unwrap_or_default();
    let a = score.aux_exponent();
    let mut acc = 0.0;
    for (p, x) in sample.points().iter().zip(xs) {
        let c = score.s0_from_log(model.cond_log_density(theta, p[0], x))?;
        acc += score.finish(c, y_power_moment(model, theta, x, a))?;
    }
    Ok(acc / sample.len() as f64)
}

/// Minimise the averaged score of any supported family.
pub fn fit_regression_with(
    score: &CompositeScore,
    model: &dyn ConditionalModel,
    sample: &Sample,
    cfg: &FitConfig,
) -> Result<FitResult> {
    cfg.validate()?;
    if !score.is_bregman() {
        // surface the explanatory error before optimising
        averaged_score(score, model, &model.initial_guess(sample), sample)?;
    }
    check_regression_inputs(model, sample)?;
    let init = cfg.init_theta.clone().unwrap_or_else(|| model.initial_guess(sample));
    if !model.is_valid(&init) {
        return Err(HolderError::Domain(format!("initial θ {init:?} is invalid")));
    }
    let objective = |theta: &[f64]| {
        if !model.is_valid(theta) {
            return f64::INFINITY;
        }
        match averaged_score(score, model, theta, sample) {
            Ok(v) if v.is_finite() => v,
            _ => f64::INFINITY,
        }
    };
    minimize(&objective, &init, cfg)
}

/// Hölder regression estimator with the Bregman–Hölder(γ, κ) score.
pub fn fit_regression(
    gamma: f64,
    kappa: f64,
    model: &dyn ConditionalModel,
    sample: &Sample,
    cfg: &FitConfig,
) -> Result<FitResult> {
    let score = CompositeScore::bregman_holder(gamma, kappa)?;
    fit_regression_with(&score, model, sample, cfg)
}

/// Fit on (x_i, y_i) and on (x_i, σ⁻¹(y_i − μ)), then compare the mapped raw
/// estimate with the direct one.
pub fn verify_regression_equivariance(
    score: &CompositeScore,
    model: &dyn ConditionalModel,
    sample: &Sample,
    map: &AffineMap,
    cfg: &FitConfig,
) -> Result<EquivarianceReport> {
    let raw = fit_regression_with(score, model, sample, cfg)?;
    let theta_mapped = model
        .transform_params(&raw.theta_hat, map)
        .ok_or_else(|| HolderError::UnsupportedFamily(format!("{} is not closed under this map", model.name())))?;
    let mapped = sample.map_points(|y| map.apply(y))?;
    let mut cfg2 = cfg.clone();
    if let Some(init) = &cfg.init_theta {
        cfg2.init_theta = model.transform_params(init, map);
    }
    let transformed = fit_regression_with(score, model, &mapped, &cfg2)?;
    let discrepancy = theta_mapped
        .iter()
        .zip(&transformed.theta_hat)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
        .fold(0.0, f64::max);
    let tolerance = 10.0 * cfg.step_tol.max(cfg.grad_tol);
    Ok(EquivarianceReport {
        theta_raw: raw.theta_hat,
        theta_transformed: transformed.theta_hat,
        theta_mapped,
        discrepancy,
        tolerance,
        converged: raw.converged && transformed.converged,
        passed: discrepancy < tolerance,
    })
}
