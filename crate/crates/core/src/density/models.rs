//! Built-in parametric families p_θ with analytic score functions.

use std::f64::consts::PI;
use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::grid::{Grid, GridDensity};
use super::sample::Sample;
use crate::affine::AffineMap;
use crate::error::{HolderError, Result};
use crate::rng::{self, StreamRng};

/// Number of standard deviations kept on each side of a Gaussian support box.
pub const GAUSSIAN_TRUNCATION_SDS: f64 = 8.0;

/// A θ-indexed family of densities on ℝ^d.
pub trait ParametricModel: Send + Sync + Debug {
    fn name(&self) -> &'static str;

    /// Outcome dimension d.
    fn dim(&self) -> usize;

    /// Parameter dimension k.
    fn param_dim(&self) -> usize;

    fn is_valid(&self, theta: &[f64]) -> bool;

    fn log_density(&self, theta: &[f64], x: &[f64]) -> f64;

    fn density(&self, theta: &[f64], x: &[f64]) -> f64 {
        self.log_density(theta, x).exp()
    }

    /// s_θ(x) = ∂/∂θ log p_θ(x).
    fn score(&self, theta: &[f64], x: &[f64]) -> Vec<f64>;

    fn sample(&self, theta: &[f64], n: usize, rng: &mut StreamRng) -> Vec<Vec<f64>>;

    /// Box outside which p_θ is negligible.
    fn support(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>);

    /// Closed-form ⟨p_θ^a⟩ over all of ℝ^d, when one exists.
    fn power_moment(&self, _theta: &[f64], _a: f64) -> Option<f64> {
        None
    }

    /// Parameter of the pushed-forward density (p_θ)_{σ,μ}, when the family is
    /// closed under the map.
    fn transform_params(&self, _theta: &[f64], _map: &AffineMap) -> Option<Vec<f64>> {
        None
    }

    /// Closed-form maximum-likelihood estimate.
    fn mle(&self, _sample: &Sample) -> Option<Vec<f64>> {
        None
    }

    /// Data-driven starting point for optimisation.
    fn initial_guess(&self, sample: &Sample) -> Vec<f64>;

    fn default_theta(&self) -> Vec<f64>;

    /// Reproducible draw of `n` points from p_θ.
    fn sampler(&self, theta: &[f64], n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut r = rng::stream(seed, 0);
        self.sample(theta, n, &mut r)
    }
}

/// Family tags accepted by [`make_parametric`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    GaussianMean,
    GaussianMeanScale,
    GaussianFull,
    GaussianMixture,
    ExponentialRate,
}

impl std::str::FromStr for ModelKind {
    type Err = HolderError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gaussian-mean" => Ok(Self::GaussianMean),
            "gaussian-mean-scale" => Ok(Self::GaussianMeanScale),
            "gaussian-full-d" => Ok(Self::GaussianFull),
            "gaussian-mixture-fixed-weights" => Ok(Self::GaussianMixture),
            "exponential-rate" => Ok(Self::ExponentialRate),
            other => Err(HolderError::Config(format!("unknown model kind `{other}`"))),
        }
    }
}

/// Hyper-parameters for the built-in families. Unused fields are ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelHyper {
    /// Outcome dimension (gaussian-mean and gaussian-full-d).
    pub dim: usize,
    /// Fixed standard deviation (gaussian-mean and the mixture components).
    pub scale: f64,
    /// Mixture weights.
    pub weights: Vec<f64>,
}

impl Default for ModelHyper {
    fn default() -> Self {
        Self { dim: 1, scale: 1.0, weights: vec![0.5, 0.5] }
    }
}

pub fn make_parametric(kind: ModelKind, hyper: &ModelHyper) -> Result<Arc<dyn ParametricModel>> {
    if !(hyper.scale > 0.0 && hyper.scale.is_finite()) {
        return Err(HolderError::Config(format!("model scale must be positive, got {}", hyper.scale)));
    }
    let check_dim = |max: usize| {
        if hyper.dim == 0 || hyper.dim > max {
            Err(HolderError::Config(format!("dimension {} not supported for this family (max {max})", hyper.dim)))
        } else {
            Ok(())
        }
    };
    Ok(match kind {
        ModelKind::GaussianMean => {
            check_dim(3)?;
            Arc::new(GaussianMean { dim: hyper.dim, scale: hyper.scale })
        }
        ModelKind::GaussianMeanScale => Arc::new(GaussianMeanScale),
        ModelKind::GaussianFull => {
            check_dim(3)?;
            Arc::new(GaussianFull { dim: hyper.dim })
        }
        ModelKind::GaussianMixture => {
            let w = &hyper.weights;
            if w.len() < 2 || w.iter().any(|v| !(*v > 0.0)) {
                return Err(HolderError::Config("mixture needs >= 2 positive weights".into()));
            }
            let total: f64 = w.iter().sum();
            Arc::new(GaussianMixture { weights: w.iter().map(|v| v / total).collect(), scale: hyper.scale })
        }
        ModelKind::ExponentialRate => Arc::new(ExponentialRate),
    })
}

/// Grid on the model's support box with `points` nodes per axis.
pub fn support_grid(model: &dyn ParametricModel, theta: &[f64], points: usize) -> Result<Grid> {
    let (lo, hi) = model.support(theta);
    Grid::uniform(lo, hi, points)
}

/// p_θ sampled on `grid`.
pub fn render(model: &dyn ParametricModel, theta: &[f64], grid: &Grid) -> Result<GridDensity> {
    if !model.is_valid(theta) {
        return Err(HolderError::Domain(format!("invalid parameter {theta:?} for {}", model.name())));
    }
    if grid.dim() != model.dim() {
        return Err(HolderError::Structural("grid and model dimensions differ".into()));
    }
    GridDensity::from_fn(grid.clone(), |x| model.density(theta, x))
}

/// (1−ε)p_θ + εδ_z on `grid`, with δ_z realised as a normalised triangular
/// bump three cells wide along each axis.
pub fn contaminate(model: &dyn ParametricModel, theta: &[f64], eps: f64, z: &[f64], grid: &Grid) -> Result<GridDensity> {
    if !(0.0..1.0).contains(&eps) {
        return Err(HolderError::Domain(format!("contamination fraction must be in [0, 1), got {eps}")));
    }
    if z.len() != grid.dim() || !grid.contains(z) {
        return Err(HolderError::Domain(format!("contamination point {z:?} outside the grid")));
    }
    let base = render(model, theta, grid)?;
    if eps == 0.0 {
        return Ok(base);
    }
    let bump = dirac_bump(grid, z)?;
    let values = base.values().iter().zip(bump.values()).map(|(p, b)| (1.0 - eps) * p + eps * b).collect();
    GridDensity::new(grid.clone(), values)
}

/// Unit-mass triangular bump at `z`, half-width 1.5 cells per axis.
pub fn dirac_bump(grid: &Grid, z: &[f64]) -> Result<GridDensity> {
    let d = grid.dim();
    let half: Vec<f64> = (0..d).map(|k| 1.5 * grid.step(k)).collect();
    let raw = GridDensity::from_fn(grid.clone(), |x| {
        (0..d).map(|k| (1.0 - (x[k] - z[k]).abs() / half[k]).max(0.0)).product()
    })?;
    raw.normalize()
}

/// Box covering both the model support at θ and a point `z` (with margin).
pub fn covering_grid(model: &dyn ParametricModel, theta: &[f64], z: &[f64], points: usize) -> Result<Grid> {
    let (mut lo, mut hi) = model.support(theta);
    for k in 0..lo.len() {
        let margin = 0.05 * (hi[k] - lo[k]);
        lo[k] = lo[k].min(z[k] - margin);
        hi[k] = hi[k].max(z[k] + margin);
    }
    Grid::uniform(lo, hi, points)
}

fn mean_of(sample: &Sample) -> Vec<f64> {
    let d = sample.dim();
    let n = sample.len() as f64;
    (0..d).map(|k| sample.points().iter().map(|p| p[k]).sum::<f64>() / n).collect()
}

fn covariance_of(sample: &Sample, mean: &[f64]) -> DMatrix<f64> {
    let d = mean.len();
    let n = sample.len() as f64;
    let mut c = DMatrix::zeros(d, d);
    for p in sample.points() {
        for i in 0..d {
            for j in 0..d {
                c[(i, j)] += (p[i] - mean[i]) * (p[j] - mean[j]);
            }
        }
    }
    c / n
}

/// Isotropic Gaussian with unknown mean and fixed scale.
#[derive(Debug, Clone)]
pub struct GaussianMean {
    dim: usize,
    scale: f64,
}

impl ParametricModel for GaussianMean {
    fn name(&self) -> &'static str {
        "gaussian-mean"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn param_dim(&self) -> usize {
        self.dim
    }
    fn is_valid(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim && theta.iter().all(|t| t.is_finite())
    }
    fn log_density(&self, theta: &[f64], x: &[f64]) -> f64 {
        let s2 = self.scale * self.scale;
        let r2: f64 = x.iter().zip(theta).map(|(a, m)| (a - m) * (a - m)).sum();
        -0.5 * self.dim as f64 * (2.0 * PI * s2).ln() - 0.5 * r2 / s2
    }
    fn score(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        let s2 = self.scale * self.scale;
        x.iter().zip(theta).map(|(a, m)| (a - m) / s2).collect()
    }
    fn sample(&self, theta: &[f64], n: usize, rng: &mut StreamRng) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| theta.iter().map(|m| m + self.scale * rng.sample::<f64, _>(StandardNormal)).collect())
            .collect()
    }
    fn support(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let w = GAUSSIAN_TRUNCATION_SDS * self.scale;
        (theta.iter().map(|m| m - w).collect(), theta.iter().map(|m| m + w).collect())
    }
    fn power_moment(&self, _theta: &[f64], a: f64) -> Option<f64> {
        let d = self.dim as f64;
        Some((2.0 * PI * self.scale * self.scale).powf(-0.5 * d * (a - 1.0)) * a.powf(-0.5 * d))
    }
    fn transform_params(&self, theta: &[f64], map: &AffineMap) -> Option<Vec<f64>> {
        // Closed only when σ is orthogonal.
        let s = map.sigma();
        let eye = DMatrix::<f64>::identity(self.dim, self.dim);
        if (s.transpose() * s - eye).abs().max() > 1e-12 {
            return None;
        }
        Some(map.apply(theta))
    }
    fn mle(&self, sample: &Sample) -> Option<Vec<f64>> {
        Some(mean_of(sample))
    }
    fn initial_guess(&self, sample: &Sample) -> Vec<f64> {
        mean_of(sample)
    }
    fn default_theta(&self) -> Vec<f64> {
        vec![0.0; self.dim]
    }
}

/// One-dimensional Gaussian, θ = (mean, standard deviation).
#[derive(Debug, Clone)]
pub struct GaussianMeanScale;

impl ParametricModel for GaussianMeanScale {
    fn name(&self) -> &'static str {
        "gaussian-mean-scale"
    }
    fn dim(&self) -> usize {
        1
    }
    fn param_dim(&self) -> usize {
        2
    }
    fn is_valid(&self, theta: &[f64]) -> bool {
        theta.len() == 2 && theta[0].is_finite() && theta[1] > 0.0 && theta[1].is_finite()
    }
    fn log_density(&self, theta: &[f64], x: &[f64]) -> f64 {
        let (m, s) = (theta[0], theta[1]);
        let r = (x[0] - m) / s;
        -0.5 * (2.0 * PI).ln() - s.ln() - 0.5 * r * r
    }
    fn score(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        let (m, s) = (theta[0], theta[1]);
        let r = x[0] - m;
        vec![r / (s * s), r * r / (s * s * s) - 1.0 / s]
    }
    fn sample(&self, theta: &[f64], n: usize, rng: &mut StreamRng) -> Vec<Vec<f64>> {
        (0..n).map(|_| vec![theta[0] + theta[1] * rng.sample::<f64, _>(StandardNormal)]).collect()
    }
    fn support(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let w = GAUSSIAN_TRUNCATION_SDS * theta[1];
        (vec![theta[0] - w], vec![theta[0] + w])
    }
    fn power_moment(&self, theta: &[f64], a: f64) -> Option<f64> {
        let s = theta[1];
        Some((2.0 * PI * s * s).powf(-0.5 * (a - 1.0)) * a.powf(-0.5))
    }
    fn transform_params(&self, theta: &[f64], map: &AffineMap) -> Option<Vec<f64>> {
        if map.dim() != 1 {
            return None;
        }
        let sigma = map.sigma()[(0, 0)];
        Some(vec![map.apply(&theta[..1])[0], theta[1] / sigma.abs()])
    }
    fn mle(&self, sample: &Sample) -> Option<Vec<f64>> {
        if sample.dim() != 1 {
            return None;
        }
        let m = mean_of(sample);
        let v = covariance_of(sample, &m)[(0, 0)];
        Some(vec![m[0], v.sqrt()])
    }
    fn initial_guess(&self, sample: &Sample) -> Vec<f64> {
        let mut ys: Vec<f64> = sample.points().iter().map(|p| p[0]).collect();
        ys.sort_by(f64::total_cmp);
        let med = quantile(&ys, 0.5);
        let iqr = quantile(&ys, 0.75) - quantile(&ys, 0.25);
        vec![med, if iqr > 0.0 { iqr / 1.349 } else { 1.0 }]
    }
    fn default_theta(&self) -> Vec<f64> {
        vec![0.0, 1.0]
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let j = (i + 1).min(sorted.len() - 1);
    sorted[i] + (pos - i as f64) * (sorted[j] - sorted[i])
}

/// d-variate Gaussian, θ = (mean, lower Cholesky factor row by row).
///
/// For d = 2 the parameter is (m₁, m₂, l₁₁, l₂₁, l₂₂) with Σ = L Lᵀ and a
/// positive diagonal.
#[derive(Debug, Clone)]
pub struct GaussianFull {
    dim: usize,
}

impl GaussianFull {
    fn unpack(&self, theta: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let d = self.dim;
        let m = DVector::from_column_slice(&theta[..d]);
        let mut l = DMatrix::zeros(d, d);
        let mut k = d;
        for i in 0..d {
            for j in 0..=i {
                l[(i, j)] = theta[k];
                k += 1;
            }
        }
        (m, l)
    }

    fn pack(&self, m: &DVector<f64>, l: &DMatrix<f64>) -> Vec<f64> {
        let mut out: Vec<f64> = m.iter().copied().collect();
        for i in 0..self.dim {
            for j in 0..=i {
                out.push(l[(i, j)]);
            }
        }
        out
    }

    fn whiten(&self, theta: &[f64], x: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
        let (m, l) = self.unpack(theta);
        let r = DVector::from_column_slice(x) - m;
        let u = l.solve_lower_triangular(&r).expect("valid Cholesky factor");
        (u, l)
    }

    fn from_cov(&self, m: DVector<f64>, cov: DMatrix<f64>) -> Option<Vec<f64>> {
        let l = cov.cholesky()?.l();
        Some(self.pack(&m, &l))
    }
}

impl ParametricModel for GaussianFull {
    fn name(&self) -> &'static str {
        "gaussian-full-d"
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn param_dim(&self) -> usize {
        self.dim + self.dim * (self.dim + 1) / 2
    }
    fn is_valid(&self, theta: &[f64]) -> bool {
        if theta.len() != self.param_dim() || theta.iter().any(|t| !t.is_finite()) {
            return false;
        }
        let (_, l) = self.unpack(theta);
        (0..self.dim).all(|i| l[(i, i)] > 0.0)
    }
    fn log_density(&self, theta: &[f64], x: &[f64]) -> f64 {
        let (u, l) = self.whiten(theta, x);
        let logdet: f64 = (0..self.dim).map(|i| l[(i, i)].ln()).sum();
        -0.5 * self.dim as f64 * (2.0 * PI).ln() - logdet - 0.5 * u.norm_squared()
    }
    fn score(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        let (u, l) = self.whiten(theta, x);
        let w = l.transpose().solve_upper_triangular(&u).expect("valid Cholesky factor");
        let mut out: Vec<f64> = w.iter().copied().collect();
        for i in 0..self.dim {
            for j in 0..=i {
                let diag = if i == j { 1.0 / l[(i, i)] } else { 0.0 };
                out.push(w[i] * u[j] - diag);
            }
        }
        out
    }
    fn sample(&self, theta: &[f64], n: usize, rng: &mut StreamRng) -> Vec<Vec<f64>> {
        let (m, l) = self.unpack(theta);
        (0..n)
            .map(|_| {
                let e = DVector::from_fn(self.dim, |_, _| rng.sample::<f64, _>(StandardNormal));
                (&m + &l * e).iter().copied().collect()
            })
            .collect()
    }
    fn support(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (m, l) = self.unpack(theta);
        let cov = &l * l.transpose();
        let lo = (0..self.dim).map(|i| m[i] - GAUSSIAN_TRUNCATION_SDS * cov[(i, i)].sqrt()).collect();
        let hi = (0..self.dim).map(|i| m[i] + GAUSSIAN_TRUNCATION_SDS * cov[(i, i)].sqrt()).collect();
        (lo, hi)
    }
    fn power_moment(&self, theta: &[f64], a: f64) -> Option<f64> {
        let (_, l) = self.unpack(theta);
        let d = self.dim as f64;
        let det_sqrt: f64 = (0..self.dim).map(|i| l[(i, i)]).product();
        Some((2.0 * PI).powf(-0.5 * d * (a - 1.0)) * det_sqrt.powf(-(a - 1.0)) * a.powf(-0.5 * d))
    }
    fn transform_params(&self, theta: &[f64], map: &AffineMap) -> Option<Vec<f64>> {
        if map.dim() != self.dim {
            return None;
        }
        let (m, l) = self.unpack(theta);
        let sinv = map.sigma_inverse();
        let m2 = DVector::from_vec(map.apply(m.as_slice()));
        let cov = &l * l.transpose();
        let cov2 = sinv * cov * sinv.transpose();
        self.from_cov(m2, 0.5 * (&cov2 + cov2.transpose()))
    }
    fn mle(&self, sample: &Sample) -> Option<Vec<f64>> {
        if sample.dim() != self.dim {
            return None;
        }
        let m = mean_of(sample);
        let cov = covariance_of(sample, &m);
        self.from_cov(DVector::from_vec(m), cov)
    }
    fn initial_guess(&self, sample: &Sample) -> Vec<f64> {
        self.mle(sample).unwrap_or_else(|| self.default_theta())
    }
    fn default_theta(&self) -> Vec<f64> {
        let d = self.dim;
        self.pack(&DVector::zeros(d), &DMatrix::identity(d, d))
    }
}

/// One-dimensional Gaussian mixture with fixed weights and common fixed
/// scale; θ = component means.
#[derive(Debug, Clone)]
pub struct GaussianMixture {
    weights: Vec<f64>,
    scale: f64,
}

impl GaussianMixture {
    fn components(&self, theta: &[f64], x: f64) -> Vec<f64> {
        let s = self.scale;
        let c = 1.0 / ((2.0 * PI).sqrt() * s);
        self.weights
            .iter()
            .zip(theta)
            .map(|(w, m)| {
                let r = (x - m) / s;
                w * c * (-0.5 * r * r).exp()
            })
            .collect()
    }
}

impl ParametricModel for GaussianMixture {
    fn name(&self) -> &'static str {
        "gaussian-mixture-fixed-weights"
    }
    fn dim(&self) -> usize {
        1
    }
    fn param_dim(&self) -> usize {
        self.weights.len()
    }
    fn is_valid(&self, theta: &[f64]) -> bool {
        theta.len() == self.weights.len() && theta.iter().all(|t| t.is_finite())
    }
    fn density(&self, theta: &[f64], x: &[f64]) -> f64 {
        self.components(theta, x[0]).iter().sum()
    }
    fn log_density(&self, theta: &[f64], x: &[f64]) -> f64 {
        // log-sum-exp over components
        let s = self.scale;
        let terms: Vec<f64> = self
            .weights
            .iter()
            .zip(theta)
            .map(|(w, m)| {
                let r = (x[0] - m) / s;
                w.ln() - 0.5 * (2.0 * PI).ln() - s.ln() - 0.5 * r * r
            })
            .collect();
        let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
    }
    fn score(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        let s2 = self.scale * self.scale;
        let c = self.components(theta, x[0]);
        let p: f64 = c.iter().sum();
        c.iter().zip(theta).map(|(ci, m)| ci / p * (x[0] - m) / s2).collect()
    }
    fn sample(&self, theta: &[f64], n: usize, rng: &mut StreamRng) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut j = self.weights.len() - 1;
                for (i, w) in self.weights.iter().enumerate() {
                    acc += w;
                    if u < acc {
                        j = i;
                        break;
                    }
                }
                vec![theta[j] + self.scale * rng.sample::<f64, _>(StandardNormal)]
            })
            .collect()
    }
    fn support(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let w = GAUSSIAN_TRUNCATION_SDS * self.scale;
        let lo = theta.iter().copied().fold(f64::INFINITY, f64::min) - w;
        let hi = theta.iter().copied().fold(f64::NEG_INFINITY, f64::max) + w;
        (vec![lo], vec![hi])
    }
    fn initial_guess(&self, sample: &Sample) -> Vec<f64> {
        let mut ys: Vec<f64> = sample.points().iter().map(|p| p[0]).collect();
        ys.sort_by(f64::total_cmp);
        let k = self.weights.len();
        let mut acc = 0.0;
        self.weights
            .iter()
            .map(|w| {
                let q = acc + 0.5 * w;
                acc += w;
                quantile(&ys, q)
            })
            .take(k)
            .collect()
    }
    fn default_theta(&self) -> Vec<f64> {
        let k = self.weights.len();
        (0..k).map(|i| 3.0 * self.scale * (i as f64 - 0.5 * (k - 1) as f64)).collect()
    }
}

/// Exponential distribution on x ≥ 0 with rate λ.
#[derive(Debug, Clone)]
pub struct ExponentialRate;

/// Support cut-off in units of the mean: e^{-36} ≈ 2e-16.
const EXPONENTIAL_TRUNCATION_MEANS: f64 = 36.0;

impl ParametricModel for ExponentialRate {
    fn name(&self) -> &'static str {
        "exponential-rate"
    }
    fn dim(&self) -> usize {
        1
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn is_valid(&self, theta: &[f64]) -> bool {
        theta.len() == 1 && theta[0] > 0.0 && theta[0].is_finite()
    }
    fn density(&self, theta: &[f64], x: &[f64]) -> f64 {
        if x[0] < 0.0 {
            0.0
        } else {
            theta[0] * (-theta[0] * x[0]).exp()
        }
    }
    fn log_density(&self, theta: &[f64], x: &[f64]) -> f64 {
        if x[0] < 0.0 {
            f64::NEG_INFINITY
        } else {
            theta[0].ln() - theta[0] * x[0]
        }
    }
    fn score(&self, theta: &[f64], x: &[f64]) -> Vec<f64> {
        vec![1.0 / theta[0] - x[0]]
    }
    fn sample(&self, theta: &[f64], n: usize, rng: &mut StreamRng) -> Vec<Vec<f64>> {
        (0..n)
            .map(|_| {
                let u: f64 = rng.random();
                vec![-(1.0 - u).ln() / theta[0]]
            })
            .collect()
    }
    fn support(&self, theta: &[f64]) -> (Vec<f64>, Vec<f64>) {
        (vec![0.0], vec![EXPONENTIAL_TRUNCATION_MEANS / theta[0]])
    }
    fn power_moment(&self, theta: &[f64], a: f64) -> Option<f64> {
        Some(theta[0].powf(a - 1.0) / a)
    }
    fn mle(&self, sample: &Sample) -> Option<Vec<f64>> {
        let m = mean_of(sample)[0];
        (m > 0.0).then(|| vec![1.0 / m])
    }
    fn initial_guess(&self, sample: &Sample) -> Vec<f64> {
        self.mle(sample).unwrap_or_else(|| self.default_theta())
    }
    fn default_theta(&self) -> Vec<f64> {
        vec![1.0]
    }
}
