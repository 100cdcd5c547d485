//! Composite scores: φ functions, score families, divergences and
//! equivalence checks.

pub mod composite;
pub mod equivalence;
pub mod phi;

pub use composite::{
    contaminated_score, divergence, empirical_score, expected_score, model_power_moment, CompositeScore, Forecast,
    ScoreValue,
};
pub use equivalence::{check_equivalence_in_probability, kappa_link, EquivalenceReport};
pub use phi::{
    builtin_phi, phi_cubic, phi_density_power, phi_gamma_score, phi_kappa, phi_quadratic, validate_phi, PhiFunction,
    PhiReport,
};
