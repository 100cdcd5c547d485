//! Optimum score estimators for densities and conditional densities.

pub mod fit;
pub mod optim;
pub mod regression;

pub use fit::{fit, population_fit, population_fit_point_mass};
pub use optim::{fd_gradient, minimize, FitConfig, FitResult, Optimizer, TraceRow};
pub use regression::{
    averaged_score, fit_regression, fit_regression_with, simulate, verify_regression_equivariance,
    ConditionalModel, LinearGaussian,
};
