//! Grid densities, quadrature, parametric families and samples.

pub mod grid;
pub mod models;
pub mod sample;

pub use grid::{
    cross_moment, integrate, integration_tolerance, power_moment, read_grid, write_grid, Grid, GridDensity,
};
pub use models::{
    contaminate, covering_grid, dirac_bump, make_parametric, render, support_grid, ModelHyper, ModelKind,
    ParametricModel,
};
pub use sample::{read_sample_csv, write_sample_csv, Sample};
