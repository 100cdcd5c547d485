//! Optimum score estimation for densities: empirical fits and
//! population-level fits against a grid density.

use super::optim::{minimize, FitConfig, FitResult};
use crate::density::grid::GridDensity;
use crate::density::models::{render, ParametricModel};
use crate::density::sample::Sample;
use crate::error::{HolderError, Result};
use crate::score::composite::{
    contaminated_score, empirical_score, expected_score, grid_aux_term, grid_cross_term, CompositeScore, Forecast,
};

/// Map evaluation failures that mean "this θ is infeasible" to +∞ so the
/// optimiser retreats from them.
fn objective_value(r: Result<f64>) -> f64 {
    match r {
        Ok(v) if v.is_finite() => v,
        _ => f64::INFINITY,
    }
}

fn check_init(model: &dyn ParametricModel, theta: &[f64]) -> Result<()> {
    if theta.len() != model.param_dim() {
        return Err(HolderError::Structural(format!(
            "initial θ has {} entries, {} expects {}",
            theta.len(),
            model.name(),
            model.param_dim()
        )));
    }
    if !model.is_valid(theta) {
        return Err(HolderError::Domain(format!("initial θ {theta:?} is invalid for {}", model.name())));
    }
    Ok(())
}

/// Minimise θ ↦ S(p̃, p_θ) over the model.
///
/// KL fits of models with a closed-form maximum-likelihood estimate return it
/// directly (zero iterations).
pub fn fit(score: &CompositeScore, model: &dyn ParametricModel, sample: &Sample, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    if sample.is_empty() {
        return Err(HolderError::Domain("empty sample".into()));
    }
    if sample.dim() != model.dim() {
        return Err(HolderError::Structural(format!(
            "sample dimension {} but model dimension {}",
            sample.dim(),
            model.dim()
        )));
    }
    let objective = |theta: &[f64]| {
        if !model.is_valid(theta) {
            return f64::INFINITY;
        }
        objective_value(empirical_score(score, sample, Forecast::Model(model, theta)))
    };
    if score.is_kl() {
        if let Some(theta) = model.mle(sample).filter(|t| model.is_valid(t)) {
            return Ok(FitResult {
                objective_value: objective(&theta),
                theta_hat: theta,
                iterations: 0,
                converged: true,
                grad_norm: 0.0,
                trace: cfg.keep_trace.then(Vec::new),
            });
        }
    }
    let init = cfg.init_theta.clone().unwrap_or_else(|| model.initial_guess(sample));
    check_init(model, &init)?;
    minimize(&objective, &init, cfg)
}

/// Minimise θ ↦ S(p_true, p_θ), with p_θ rendered on p_true's grid.
/// Starts from `cfg.init_theta` or the model's default parameter.
pub fn population_fit(
    score: &CompositeScore,
    model: &dyn ParametricModel,
    p_true: &GridDensity,
    cfg: &FitConfig,
) -> Result<FitResult> {
    cfg.validate()?;
    if p_true.dim() != model.dim() {
        return Err(HolderError::Structural("p_true and model dimensions differ".into()));
    }
    let grid = p_true.grid();
    let objective = |theta: &[f64]| {
        if !model.is_valid(theta) {
            return f64::INFINITY;
        }
        objective_value(render(model, theta, grid).and_then(|g| expected_score(score, p_true, &g)))
    };
    let init = cfg.init_theta.clone().unwrap_or_else(|| model.default_theta());
    check_init(model, &init)?;
    minimize(&objective, &init, cfg)
}

/// Minimise θ ↦ S((1 − ε) p_base + ε δ_z, p_θ) with an exact point mass at z.
pub fn population_fit_point_mass(
    score: &CompositeScore,
    model: &dyn ParametricModel,
    p_base: &GridDensity,
    eps: f64,
    z: &[f64],
    cfg: &FitConfig,
) -> Result<FitResult> {
    cfg.validate()?;
    if !(0.0..1.0).contains(&eps) {
        return Err(HolderError::Domain(format!("contamination fraction must be in [0, 1), got {eps}")));
    }
    if z.len() != model.dim() || p_base.dim() != model.dim() {
        return Err(HolderError::Structural("contamination point, base density and model dimensions differ".into()));
    }
    let grid = p_base.grid();
    let objective = |theta: &[f64]| {
        if !model.is_valid(theta) {
            return f64::INFINITY;
        }
        let value = render(model, theta, grid).and_then(|g| {
            if eps == 0.0 {
                let c = grid_cross_term(score, p_base, &g)?;
                score.finish(c, grid_aux_term(score, &g))
            } else {
                contaminated_score(score, p_base, eps, model.density(theta, z), &g)
            }
        });
        objective_value(value)
    };
    let init = cfg.init_theta.clone().unwrap_or_else(|| model.default_theta());
    check_init(model, &init)?;
    minimize(&objective, &init, cfg)
}
