//! The φ functions that parameterise Hölder scores.

use std::fmt;
use std::sync::Arc;

use crate::error::{HolderError, Result};

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Central-difference step used when no analytic derivative is supplied.
pub const FD_STEP: f64 = 1e-5;

/// φ: ℝ₊ → ℝ together with its first two derivatives.
///
/// A valid φ satisfies φ(1) = −1 and φ(z) ≥ −z^{1+γ}; [`validate_phi`]
/// checks both on a lattice. Derivatives are analytic when supplied and
/// central finite differences otherwise. `kink` marks a point where the
/// analytic derivatives are not to be trusted.
#[derive(Clone)]
pub struct PhiFunction {
    gamma: f64,
    label: String,
    value: RealFn,
    d1: Option<RealFn>,
    d2: Option<RealFn>,
    kink: Option<f64>,
}

impl fmt::Debug for PhiFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PhiFunction")
            .field("label", &self.label)
            .field("gamma", &self.gamma)
            .field("analytic_d1", &self.d1.is_some())
            .field("analytic_d2", &self.d2.is_some())
            .field("kink", &self.kink)
            .finish()
    }
}

impl PhiFunction {
    pub fn new<F>(gamma: f64, label: impl Into<String>, value: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(HolderError::Domain(format!("φ needs γ > 0, got {gamma}")));
        }
        Ok(Self { gamma, label: label.into(), value: Arc::new(value), d1: None, d2: None, kink: None })
    }

    pub fn with_derivatives<F1, F2>(mut self, d1: F1, d2: F2) -> Self
    where
        F1: Fn(f64) -> f64 + Send + Sync + 'static,
        F2: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.d1 = Some(Arc::new(d1));
        self.d2 = Some(Arc::new(d2));
        self
    }

    pub fn with_kink(mut self, z: f64) -> Self {
        self.kink = Some(z);
        self
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kink(&self) -> Option<f64> {
        self.kink
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.d1.is_some() && self.d2.is_some()
    }

    pub fn value(&self, z: f64) -> f64 {
        (self.value)(z)
    }

    pub fn d1(&self, z: f64) -> f64 {
        match &self.d1 {
            Some(f) => f(z),
            None => (self.value(z + FD_STEP) - self.value(z - FD_STEP)) / (2.0 * FD_STEP),
        }
    }

    pub fn d2(&self, z: f64) -> f64 {
        match &self.d2 {
            Some(f) => f(z),
            None => (self.value(z + FD_STEP) - 2.0 * self.value(z) + self.value(z - FD_STEP)) / (FD_STEP * FD_STEP),
        }
    }

    /// False within 10 FD steps of a declared kink.
    pub fn derivatives_valid_at(&self, z: f64) -> bool {
        self.kink.is_none_or(|k| (z - k).abs() > 10.0 * FD_STEP)
    }
}

/// φ of the Bregman–Hölder family:
/// φ(z) = −κ^{(1+γ)/κ} |z − 1 + 1/κ|^{(1+γ)/κ} sign(z − 1 + 1/κ).
pub fn phi_kappa(gamma: f64, kappa: f64) -> Result<PhiFunction> {
    if !(kappa >= 1.0 && kappa.is_finite()) {
        return Err(HolderError::Domain(format!("κ must be >= 1, got {kappa}")));
    }
    let a = (1.0 + gamma) / kappa;
    let c = kappa.powf(a);
    let shift = 1.0 - 1.0 / kappa;
    let value = move |z: f64| {
        let w = z - shift;
        -c * w.abs().powf(a) * sign(w)
    };
    let d1 = move |z: f64| {
        let w = z - shift;
        if w == 0.0 && a < 1.0 {
            f64::NEG_INFINITY
        } else {
            -c * a * w.abs().powf(a - 1.0)
        }
    };
    let d2 = move |z: f64| {
        let w = z - shift;
        if w == 0.0 {
            return if a > 2.0 { 0.0 } else { f64::NAN };
        }
        -c * a * (a - 1.0) * w.abs().powf(a - 2.0) * sign(w)
    };
    Ok(PhiFunction::new(gamma, format!("kappa:{kappa}"), value)?.with_derivatives(d1, d2).with_kink(shift))
}

/// φ(z) = −z^{1+γ}: the lower bound itself, equivalent to the γ-score.
pub fn phi_gamma_score(gamma: f64) -> Result<PhiFunction> {
    let a = 1.0 + gamma;
    Ok(PhiFunction::new(gamma, "gamma", move |z: f64| -z.abs().powf(a))?
        .with_derivatives(move |z: f64| -a * z.abs().powf(a - 1.0), move |z: f64| -a * (a - 1.0) * z.abs().powf(a - 2.0)))
}

/// φ(z) = γ − (1+γ)z, whose Hölder score is γ times the density power score.
pub fn phi_density_power(gamma: f64) -> Result<PhiFunction> {
    Ok(PhiFunction::new(gamma, "density-power", move |z: f64| gamma - (1.0 + gamma) * z)?
        .with_derivatives(move |_| -(1.0 + gamma), |_| 0.0))
}

/// φ(z) = −z^{1+γ} + c·max(z − 1, 0)³ with c ≥ 0.
///
/// Matches the γ-score φ in value and first two derivatives at z = 1.
pub fn phi_cubic(gamma: f64, c: f64) -> Result<PhiFunction> {
    if !(c >= 0.0) {
        return Err(HolderError::Domain(format!("cubic coefficient must be >= 0, got {c}")));
    }
    let a = 1.0 + gamma;
    Ok(PhiFunction::new(gamma, format!("cubic:{c}"), move |z: f64| -z.abs().powf(a) + c * (z - 1.0).max(0.0).powi(3))?
        .with_derivatives(
            move |z: f64| -a * z.abs().powf(a - 1.0) + 3.0 * c * (z - 1.0).max(0.0).powi(2),
            move |z: f64| -a * (a - 1.0) * z.abs().powf(a - 2.0) + 6.0 * c * (z - 1.0).max(0.0),
        ))
}

/// φ(z) = −z^{1+γ} + c(z − 1)² with c ≥ 0, so φ″(1) = −γ(1+γ) + 2c.
pub fn phi_quadratic(gamma: f64, c: f64) -> Result<PhiFunction> {
    if !(c >= 0.0) {
        return Err(HolderError::Domain(format!("quadratic coefficient must be >= 0, got {c}")));
    }
    let a = 1.0 + gamma;
    Ok(PhiFunction::new(gamma, format!("quadratic:{c}"), move |z: f64| -z.abs().powf(a) + c * (z - 1.0) * (z - 1.0))?
        .with_derivatives(
            move |z: f64| -a * z.abs().powf(a - 1.0) + 2.0 * c * (z - 1.0),
            move |z: f64| -a * (a - 1.0) * z.abs().powf(a - 2.0) + 2.0 * c,
        ))
}

/// Look up a built-in φ by config name:
/// `gamma`, `density-power`, `kappa:<κ>`, `cubic:<c>`, `quadratic:<c>`.
pub fn builtin_phi(name: &str, gamma: f64) -> Result<PhiFunction> {
    let name = name.trim();
    let (head, arg) = match name.split_once(':') {
        Some((h, a)) => {
            let v = a
                .trim()
                .parse::<f64>()
                .map_err(|_| HolderError::Config(format!("bad φ argument in `{name}`")))?;
            (h.trim(), Some(v))
        }
        None => (name, None),
    };
    match (head, arg) {
        ("gamma", None) => phi_gamma_score(gamma),
        ("density-power", None) => phi_density_power(gamma),
        ("kappa", Some(k)) => phi_kappa(gamma, k),
        ("cubic", Some(c)) => phi_cubic(gamma, c),
        ("quadratic", Some(c)) => phi_quadratic(gamma, c),
        _ => Err(HolderError::Config(format!("unknown φ `{name}`"))),
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Outcome of [`validate_phi`].
#[derive(Clone, Debug, PartialEq)]
pub struct PhiReport {
    pub label: String,
    pub anchor_value: f64,
    pub anchor_ok: bool,
    /// Lattice points (z, φ(z), −z^{1+γ}) where the lower bound fails.
    pub violations: Vec<(f64, f64, f64)>,
    pub points_checked: usize,
}

impl PhiReport {
    pub fn passed(&self) -> bool {
        self.anchor_ok && self.violations.is_empty()
    }
}

pub const VALIDATION_TOL: f64 = 1e-12;
pub const DEFAULT_Z_MAX: f64 = 10.0;
pub const DEFAULT_N_TEST: usize = 10_000;

/// Scan z ∈ [0, z_max] for violations of φ(z) ≥ −z^{1+γ}, and check φ(1) = −1.
///
/// The tolerance is 1e-12, scaled by |z^{1+γ}| once that exceeds one.
pub fn validate_phi(phi: &PhiFunction, z_max: f64, n_test: usize) -> PhiReport {
    let a = 1.0 + phi.gamma();
    let anchor_value = phi.value(1.0);
    let anchor_ok = (anchor_value + 1.0).abs() <= VALIDATION_TOL;
    let n = n_test.max(2);
    let violations = (0..n)
        .map(|i| z_max * i as f64 / (n - 1) as f64)
        .filter_map(|z| {
            let v = phi.value(z);
            let bound = -z.powf(a);
            let tol = VALIDATION_TOL * bound.abs().max(1.0);
            (!(v >= bound - tol)).then_some((z, v, bound))
        })
        .collect();
    PhiReport { label: phi.label().to_string(), anchor_value, anchor_ok, violations, points_checked: n }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd1(phi: &PhiFunction, z: f64) -> f64 {
        let h = 1e-5;
        (phi.value(z + h) - phi.value(z - h)) / (2.0 * h)
    }

    fn fd2(phi: &PhiFunction, z: f64) -> f64 {
        let h = 1e-4;
        (phi.value(z + h) - 2.0 * phi.value(z) + phi.value(z - h)) / (h * h)
    }

    #[test]
    fn kappa_family_anchor_and_special_cases() {
        for (g, k) in [(0.5, 1.0), (0.5, 1.5), (1.0, 2.0), (2.0, 3.0), (0.1, 1.1)] {
            assert!((phi_kappa(g, k).unwrap().value(1.0) + 1.0).abs() < 1e-15, "γ={g} κ={k}");
        }
        let p = phi_kappa(1.0, 2.0).unwrap();
        assert_eq!(p.value(0.5), 0.0);
        let p1 = phi_kappa(0.7, 1.0).unwrap();
        for z in [0.0, 0.3, 1.0, 2.5] {
            assert!((p1.value(z) + z.powf(1.7)).abs() < 1e-14);
        }
        assert!(phi_kappa(0.5, 0.9).is_err());
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let phis = vec![
            phi_kappa(0.5, 1.0).unwrap(),
            phi_kappa(0.5, 1.25).unwrap(),
            phi_kappa(0.5, 1.5).unwrap(),
            phi_kappa(1.0, 2.0).unwrap(),
            phi_gamma_score(0.3).unwrap(),
            phi_density_power(0.5).unwrap(),
            phi_cubic(0.5, 0.4).unwrap(),
            phi_quadratic(0.5, 0.2).unwrap(),
        ];
        for phi in &phis {
            for z in [0.05, 0.4, 0.9, 1.0, 1.3, 2.0, 4.0] {
                if !phi.derivatives_valid_at(z) {
                    continue;
                }
                let (a1, a2) = (phi.d1(z), phi.d2(z));
                let (b1, b2) = (fd1(phi, z), fd2(phi, z));
                assert!((a1 - b1).abs() <= 1e-5 * a1.abs().max(1.0), "{phi:?} d1 at {z}: {a1} vs {b1}");
                assert!((a2 - b2).abs() <= 1e-4 * a2.abs().max(1.0), "{phi:?} d2 at {z}: {a2} vs {b2}");
            }
        }
    }

    #[test]
    fn kappa_second_derivative_at_one() {
        // φ''(1) = −γ(1+γ) + (κ−1)(1+γ)
        for (g, k) in [(0.5, 1.0), (0.5, 1.25), (0.5, 1.5), (1.0, 2.0), (2.0, 2.5)] {
            let p = phi_kappa(g, k).unwrap();
            let want = -g * (1.0 + g) + (k - 1.0) * (1.0 + g);
            assert!((p.d2(1.0) - want).abs() < 1e-12, "γ={g} κ={k}");
            assert!((p.d1(1.0) + 1.0 + g).abs() < 1e-12);
        }
    }

    #[test]
    fn finite_difference_fallback() {
        let p = PhiFunction::new(0.5, "plain", |z: f64| -z.powf(1.5)).unwrap();
        assert!(!p.has_analytic_derivatives());
        assert!((p.d1(1.0) + 1.5).abs() < 1e-8);
        assert!((p.d2(1.0) + 0.75).abs() < 1e-4);
    }

    #[test]
    fn validation_reports() {
        assert!(validate_phi(&phi_kappa(0.5, 1.5).unwrap(), DEFAULT_Z_MAX, DEFAULT_N_TEST).passed());
        assert!(validate_phi(&phi_density_power(0.5).unwrap(), DEFAULT_Z_MAX, DEFAULT_N_TEST).passed());
        assert!(validate_phi(&phi_cubic(0.5, 1.0).unwrap(), DEFAULT_Z_MAX, DEFAULT_N_TEST).passed());

        let bad_anchor = PhiFunction::new(0.5, "-2z", |z| -2.0 * z).unwrap();
        let r = validate_phi(&bad_anchor, DEFAULT_Z_MAX, 1000);
        assert!(!r.anchor_ok && !r.passed());

        let below = PhiFunction::new(0.5, "shifted", |z: f64| -z.powf(1.5) - 0.01).unwrap();
        let r = validate_phi(&below, DEFAULT_Z_MAX, 1000);
        assert!(!r.passed());
        assert_eq!(r.violations[0].0, 0.0);
    }

    #[test]
    fn builtin_names() {
        assert_eq!(builtin_phi("kappa:1.5", 0.5).unwrap().label(), "kappa:1.5");
        assert!(builtin_phi("gamma", 0.5).is_ok());
        assert!(builtin_phi("nonsense", 0.5).is_err());
        assert!(builtin_phi("kappa:x", 0.5).is_err());
    }
}
