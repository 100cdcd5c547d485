//! Equivalence in probability between score families, tested by order
//! agreement on random (p, q, q′) triples.

use std::f64::consts::PI;

use rand::Rng;

use super::composite::{expected_score, CompositeScore};
use crate::density::grid::{Grid, GridDensity};
use crate::error::Result;
use crate::rng::{self, StreamRng};

/// Strictly increasing map ξ with Holder(phi_kappa(γ, κ)) = ξ(BregmanHolder(γ, κ)):
/// ξ(t) = sign(t) (κ|t|)^{(1+γ)/κ}.
pub fn kappa_link(gamma: f64, kappa: f64, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    t.signum() * (kappa * t.abs()).powf((1.0 + gamma) / kappa)
}

/// Shared 1-d grid for random battery densities. Narrow enough that no
/// battery density underflows to zero at the edges.
pub fn battery_grid() -> Grid {
    Grid::uniform(vec![-12.0], vec![12.0], 1201).expect("static grid")
}

/// A random normalised density from the built-in families: a Gaussian or a
/// two-component Gaussian mixture with random weights.
pub fn random_builtin_density(grid: &Grid, rng: &mut StreamRng) -> GridDensity {
    let normal = |x: f64, m: f64, s: f64| {
        let r = (x - m) / s;
        (-0.5 * r * r).exp() / ((2.0 * PI).sqrt() * s)
    };
    let m1: f64 = rng.random_range(-1.5..1.5);
    let s1: f64 = rng.random_range(0.5..2.0);
    let f = if rng.random_bool(0.5) {
        GridDensity::from_fn(grid.clone(), |x| normal(x[0], m1, s1))
    } else {
        let m2: f64 = rng.random_range(-2.0..2.0);
        let s2: f64 = rng.random_range(0.5..1.5);
        let w: f64 = rng.random_range(0.2..0.8);
        GridDensity::from_fn(grid.clone(), |x| w * normal(x[0], m1, s1) + (1.0 - w) * normal(x[0], m2, s2))
    };
    f.and_then(|f| f.normalize()).expect("battery density")
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceReport {
    pub trials: usize,
    /// Triples where the two scores order q and q′ differently.
    pub violations: usize,
    /// Triples where either difference was too small to order.
    pub ties: usize,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Relative size below which two score values are treated as tied.
const TIE_TOL: f64 = 1e-12;

/// Check sign(S1(p,q) − S1(p,q′)) = sign(S2(p,q) − S2(p,q′)) on `trials`
/// random triples.
pub fn check_equivalence_in_probability(
    s1: &CompositeScore,
    s2: &CompositeScore,
    trials: usize,
    seed: u64,
) -> Result<EquivalenceReport> {
    let grid = battery_grid();
    let mut rng = rng::stream(seed, 0);
    let mut violations = 0;
    let mut ties = 0;
    for _ in 0..trials {
        let p = random_builtin_density(&grid, &mut rng);
        let q = random_builtin_density(&grid, &mut rng);
        let q2 = random_builtin_density(&grid, &mut rng);
        let (a, b) = (expected_score(s1, &p, &q)?, expected_score(s1, &p, &q2)?);
        let (c, d) = (expected_score(s2, &p, &q)?, expected_score(s2, &p, &q2)?);
        let tied = |x: f64, y: f64| (x - y).abs() <= TIE_TOL * x.abs().max(y.abs()).max(1e-300);
        if tied(a, b) || tied(c, d) {
            ties += 1;
        } else if (a < b) != (c < d) {
            violations += 1;
        }
    }
    Ok(EquivalenceReport { trials, violations, ties })
}
