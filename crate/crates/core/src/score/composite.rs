//! Composite score families S(f, g) = T(⟨S₀(·, g) f⟩, g) and their
//! divergences.
//!
//! Every family here needs only two numbers per evaluation: the linear
//! functional c = ⟨S₀(·, g) f⟩ and an auxiliary integral of g alone
//! (⟨g⟩ for KL, ⟨g^{1+γ}⟩ otherwise). [`CompositeScore::finish`] is the
//! family's T(c, g). The expected, empirical and point-mass-contaminated
//! versions of a score differ only in how c is obtained.

use std::fmt;

use super::phi::PhiFunction;
use crate::density::grid::{pow, same_grid, GridDensity};
use crate::density::models::{support_grid, ParametricModel};
use crate::density::sample::Sample;
use crate::error::{HolderError, Result};

#[derive(Clone, Debug)]
pub enum CompositeScore {
    /// ⟨−f log g + g⟩
    Kl,
    /// ⟨g^{1+γ}⟩ − (1+γ)/γ ⟨f g^γ⟩
    DensityPower { gamma: f64 },
    /// −⟨f g^γ⟩ / ⟨g^{1+γ}⟩^{γ/(1+γ)}
    Pseudospherical { gamma: f64 },
    /// −(1/γ) log(−pseudospherical)
    Gamma { gamma: f64 },
    /// φ(⟨f g^γ⟩ / ⟨g^{1+γ}⟩) ⟨g^{1+γ}⟩
    Holder { phi: PhiFunction },
    /// ⟨g^{1+γ}⟩^{κ/(1+γ)} (1 − 1/κ − ⟨f g^γ⟩/⟨g^{1+γ}⟩)
    BregmanHolder { gamma: f64, kappa: f64 },
}

impl fmt::Display for CompositeScore {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Kl => write!(f, "kl"),
            Self::DensityPower { gamma } => write!(f, "density-power(gamma={gamma})"),
            Self::Pseudospherical { gamma } => write!(f, "pseudospherical(gamma={gamma})"),
            Self::Gamma { gamma } => write!(f, "gamma(gamma={gamma})"),
            Self::Holder { phi } => write!(f, "holder(gamma={}, phi={})", phi.gamma(), phi.label()),
            Self::BregmanHolder { gamma, kappa } => write!(f, "bregman-holder(gamma={gamma}, kappa={kappa})"),
        }
    }
}

fn check_gamma(gamma: f64) -> Result<f64> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(gamma)
    } else {
        Err(HolderError::Domain(format!("γ must be > 0, got {gamma}")))
    }
}

impl CompositeScore {
    pub fn density_power(gamma: f64) -> Result<Self> {
        Ok(Self::DensityPower { gamma: check_gamma(gamma)? })
    }

    pub fn pseudospherical(gamma: f64) -> Result<Self> {
        Ok(Self::Pseudospherical { gamma: check_gamma(gamma)? })
    }

    pub fn gamma_score(gamma: f64) -> Result<Self> {
        Ok(Self::Gamma { gamma: check_gamma(gamma)? })
    }

    pub fn holder(phi: PhiFunction) -> Self {
        Self::Holder { phi }
    }

    pub fn bregman_holder(gamma: f64, kappa: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(kappa >= 1.0 && kappa.is_finite()) {
            return Err(HolderError::Domain(format!("κ must be >= 1, got {kappa}")));
        }
        Ok(Self::BregmanHolder { gamma, kappa })
    }

    /// Re-check the per-family parameter constraints (useful after building
    /// a variant directly).
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Kl | Self::Holder { .. } => Ok(()),
            Self::DensityPower { gamma } | Self::Pseudospherical { gamma } | Self::Gamma { gamma } => {
                check_gamma(*gamma).map(|_| ())
            }
            Self::BregmanHolder { gamma, kappa } => Self::bregman_holder(*gamma, *kappa).map(|_| ()),
        }
    }

    /// γ of the family; `None` for KL.
    pub fn gamma(&self) -> Option<f64> {
        match self {
            Self::Kl => None,
            Self::DensityPower { gamma }
            | Self::Pseudospherical { gamma }
            | Self::Gamma { gamma }
            | Self::BregmanHolder { gamma, .. } => Some(*gamma),
            Self::Holder { phi } => Some(phi.gamma()),
        }
    }

    pub fn is_kl(&self) -> bool {
        matches!(self, Self::Kl)
    }

    /// Exponent of the auxiliary integral ⟨g^a⟩ used by T.
    pub fn aux_exponent(&self) -> f64 {
        self.gamma().map_or(1.0, |g| 1.0 + g)
    }

    /// S₀(ω, g) as a function of the forecast value g(ω).
    pub fn s0(&self, g_value: f64) -> Result<f64> {
        match self.gamma() {
            None => {
                if g_value > 0.0 {
                    Ok(-g_value.ln())
                } else {
                    Err(HolderError::InfiniteScore("forecast density is zero where the outcome has mass".into()))
                }
            }
            Some(gamma) => Ok(pow(g_value, gamma)),
        }
    }

    /// S₀ from log g(ω); avoids underflow for KL in the tails.
    pub fn s0_from_log(&self, log_g: f64) -> Result<f64> {
        match self.gamma() {
            None if log_g == f64::NEG_INFINITY => {
                Err(HolderError::InfiniteScore("forecast density is zero at an observation".into()))
            }
            None => Ok(-log_g),
            Some(gamma) => Ok((gamma * log_g).exp()),
        }
    }

    /// T(c, g) given c = ⟨S₀(·, g) f⟩ and aux = ⟨g^{aux_exponent}⟩.
    pub fn finish(&self, c: f64, aux: f64) -> Result<f64> {
        if let Self::Kl = self {
            return Ok(c + aux);
        }
        if !(aux > 0.0) {
            return Err(HolderError::Degenerate(format!("⟨g^(1+γ)⟩ = {aux}")));
        }
        Ok(match self {
            Self::Kl => unreachable!(),
            Self::DensityPower { gamma } => aux - (1.0 + gamma) / gamma * c,
            Self::Pseudospherical { gamma } => -c / aux.powf(gamma / (1.0 + gamma)),
            Self::Gamma { gamma } => {
                let ps = -c / aux.powf(gamma / (1.0 + gamma));
                if ps >= 0.0 {
                    return Err(HolderError::InfiniteScore("pseudospherical score is non-negative".into()));
                }
                -(-ps).ln() / gamma
            }
            Self::Holder { phi } => phi.value(c / aux) * aux,
            Self::BregmanHolder { gamma, kappa } => {
                aux.powf(kappa / (1.0 + gamma)) * (1.0 - 1.0 / kappa - c / aux)
            }
        })
    }

    /// True for families whose score is an expectation under f, so that the
    /// averaged score over covariates can be estimated from data.
    pub fn is_bregman(&self) -> bool {
        matches!(
            self,
            Self::Kl | Self::DensityPower { .. } | Self::Pseudospherical { .. } | Self::BregmanHolder { .. }
        )
    }
}

/// S(f, g), its entropy S(f, f) and the divergence D(f, g) = S(f, g) − S(f, f).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreValue {
    pub s_fg: f64,
    pub s_ff: f64,
    pub divergence: f64,
}

/// c = ⟨S₀(·, g) f⟩ on a shared grid. Nodes where f vanishes contribute nothing.
pub fn grid_cross_term(score: &CompositeScore, f: &GridDensity, g: &GridDensity) -> Result<f64> {
    same_grid(f, g)?;
    let mut acc = 0.0;
    for ((&fv, &gv), &w) in f.values().iter().zip(g.values()).zip(f.grid().weights()) {
        if fv > 0.0 {
            acc += w * fv * score.s0(gv)?;
        }
    }
    Ok(acc)
}

/// ⟨g^{aux_exponent}⟩ by quadrature.
pub fn grid_aux_term(score: &CompositeScore, g: &GridDensity) -> f64 {
    let a = score.aux_exponent();
    g.values().iter().zip(g.grid().weights()).map(|(&v, &w)| w * pow(v, a)).sum()
}

/// S(f, g) evaluated by quadrature.
pub fn expected_score(score: &CompositeScore, f: &GridDensity, g: &GridDensity) -> Result<f64> {
    let c = grid_cross_term(score, f, g)?;
    score.finish(c, grid_aux_term(score, g))
}

pub fn divergence(score: &CompositeScore, f: &GridDensity, g: &GridDensity) -> Result<ScoreValue> {
    let s_fg = expected_score(score, f, g)?;
    let s_ff = expected_score(score, f, f)?;
    Ok(ScoreValue { s_fg, s_ff, divergence: s_fg - s_ff })
}

/// S(p_ε, g) for p_ε = (1 − ε) f + ε δ_z with an exact point mass.
pub fn contaminated_score(
    score: &CompositeScore,
    f: &GridDensity,
    eps: f64,
    z_value_of_g: f64,
    g: &GridDensity,
) -> Result<f64> {
    let c = (1.0 - eps) * grid_cross_term(score, f, g)? + eps * score.s0(z_value_of_g)?;
    score.finish(c, grid_aux_term(score, g))
}

/// What the empirical score is evaluated against.
#[derive(Clone, Copy, Debug)]
pub enum Forecast<'a> {
    /// A grid function; g(ω) by multilinear interpolation, ⟨·⟩ by quadrature.
    Grid(&'a GridDensity),
    /// A member p_θ of a parametric family.
    Model(&'a dyn ParametricModel, &'a [f64]),
}

/// Default points per axis when a model integral has no closed form.
pub fn default_points(dim: usize) -> usize {
    match dim {
        1 => 2001,
        2 => 201,
        _ => 61,
    }
}

/// ⟨p_θ^a⟩: closed form when available, quadrature otherwise.
pub fn model_power_moment(model: &dyn ParametricModel, theta: &[f64], a: f64) -> Result<f64> {
    if let Some(v) = model.power_moment(theta, a) {
        return Ok(v);
    }
    let grid = support_grid(model, theta, default_points(model.dim()))?;
    let values = grid.render(|x| pow(model.density(theta, x), a));
    Ok(values.iter().zip(grid.weights()).map(|(v, w)| v * w).sum())
}

/// S(p̃, g) = T((1/n) Σ S₀(ω_i, g), g).
pub fn empirical_score(score: &CompositeScore, sample: &Sample, forecast: Forecast<'_>) -> Result<f64> {
    let n = sample.len() as f64;
    match forecast {
        Forecast::Grid(g) => {
            if g.dim() != sample.dim() {
                return Err(HolderError::Structural("sample and forecast dimensions differ".into()));
            }
            let mut c = 0.0;
            for p in sample.points() {
                c += score.s0(g.eval(p))?;
            }
            score.finish(c / n, grid_aux_term(score, g))
        }
        Forecast::Model(model, theta) => {
            if model.dim() != sample.dim() {
                return Err(HolderError::Structural("sample and model dimensions differ".into()));
            }
            if !model.is_valid(theta) {
                return Err(HolderError::Domain(format!("invalid parameter {theta:?}")));
            }
            let mut c = 0.0;
            for p in sample.points() {
                c += score.s0_from_log(model.log_density(theta, p))?;
            }
            let aux = model_power_moment(model, theta, score.aux_exponent())?;
            score.finish(c / n, aux)
        }
    }
}
