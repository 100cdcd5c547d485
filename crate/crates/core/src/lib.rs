//! Hölder composite scores on gridded densities: divergences, affine
//! invariance, optimum score estimation and robustness diagnostics.

pub mod affine;
pub mod density;
pub mod error;
pub mod estimate;
pub mod rng;
pub mod robust;
pub mod score;

pub use error::{HolderError, Result};

/// Shortest round-trip decimal; exponent form outside [1e−4, 1e15).
pub fn format_float(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        v.to_string()
    } else {
        format!("{v:e}")
    }
}
