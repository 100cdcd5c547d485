//! Affine maps of the outcome space and what they do to densities,
//! divergences and estimators.
//!
//! A map A = (σ, μ) sends an observation ω to σ⁻¹(ω − μ). The density of the
//! mapped variable is p_A(ω) = |det σ| p(σω + μ).

use nalgebra::{DMatrix, DVector};

use crate::density::grid::{Grid, GridDensity};
use crate::density::models::ParametricModel;
use crate::density::sample::Sample;
use crate::error::{HolderError, Result};
use crate::estimate::fit::fit;
use crate::estimate::optim::FitConfig;
use crate::score::composite::{divergence, CompositeScore};

const SINGULAR_TOL: f64 = 1e-12;

/// A density given as a plain function of the outcome.
pub type DensityFn<'a> = dyn Fn(&[f64]) -> f64 + Sync + 'a;

#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    sigma: DMatrix<f64>,
    sigma_inv: DMatrix<f64>,
    mu: DVector<f64>,
    det_sigma: f64,
}

impl AffineMap {
    pub fn new(sigma: DMatrix<f64>, mu: Vec<f64>) -> Result<Self> {
        if !sigma.is_square() || sigma.nrows() != mu.len() || mu.is_empty() {
            return Err(HolderError::Structural(format!(
                "σ is {}×{} but μ has {} entries",
                sigma.nrows(),
                sigma.ncols(),
                mu.len()
            )));
        }
        if sigma.iter().chain(&mu).any(|v| !v.is_finite()) {
            return Err(HolderError::Domain("non-finite entry in affine map".into()));
        }
        let det_sigma = sigma.determinant();
        if det_sigma.abs() <= SINGULAR_TOL {
            return Err(HolderError::Domain(format!("σ is singular (det = {det_sigma})")));
        }
        let sigma_inv = sigma
            .clone()
            .try_inverse()
            .ok_or_else(|| HolderError::Domain("σ is not invertible".into()))?;
        Ok(Self { sigma, sigma_inv, mu: DVector::from_vec(mu), det_sigma })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim), vec![0.0; dim])
    }

    pub fn diagonal(diag: &[f64], mu: Vec<f64>) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)), mu)
    }

    /// σ = s·R(angle) in the plane.
    pub fn rotation_2d(angle: f64, scale: f64, mu: Vec<f64>) -> Result<Self> {
        let (s, c) = angle.sin_cos();
        Self::new(DMatrix::from_row_slice(2, 2, &[scale * c, -scale * s, scale * s, scale * c]), mu)
    }

    /// Parse `sigma=<row-major csv>; mu=<csv>`. A missing `mu` means zero.
    pub fn from_config(spec: &str) -> Result<Self> {
        let mut sigma = None;
        let mut mu = None;
        for part in spec.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| HolderError::Config(format!("expected key=value in affine spec, got `{part}`")))?;
            let nums = parse_csv(value)?;
            match key.trim() {
                "sigma" => sigma = Some(nums),
                "mu" => mu = Some(nums),
                other => return Err(HolderError::Config(format!("unknown affine key `{other}`"))),
            }
        }
        let sigma = sigma.ok_or_else(|| HolderError::Config("affine spec needs sigma=...".into()))?;
        let d = (sigma.len() as f64).sqrt().round() as usize;
        if d * d != sigma.len() || d == 0 {
            return Err(HolderError::Config(format!("sigma has {} entries, not a square matrix", sigma.len())));
        }
        let mu = mu.unwrap_or_else(|| vec![0.0; d]);
        Self::new(DMatrix::from_row_slice(d, d, &sigma), mu)
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    pub fn sigma_inverse(&self) -> &DMatrix<f64> {
        &self.sigma_inv
    }

    pub fn mu(&self) -> &[f64] {
        self.mu.as_slice()
    }

    pub fn det(&self) -> f64 {
        self.det_sigma
    }

    /// ω ↦ σ⁻¹(ω − μ).
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(x) - &self.mu;
        (&self.sigma_inv * v).as_slice().to_vec()
    }

    /// ω ↦ σω + μ, the inverse of [`apply`](Self::apply).
    pub fn unapply(&self, y: &[f64]) -> Vec<f64> {
        let v = &self.sigma * DVector::from_column_slice(y) + &self.mu;
        v.as_slice().to_vec()
    }

    /// The map equal to applying `self` and then `then`.
    pub fn compose(&self, then: &AffineMap) -> Result<AffineMap> {
        if self.dim() != then.dim() {
            return Err(HolderError::Structural("composing maps of different dimension".into()));
        }
        let sigma = &self.sigma * &then.sigma;
        let mu = &self.sigma * &then.mu + &self.mu;
        Self::new(sigma, mu.as_slice().to_vec())
    }

    pub fn inverse(&self) -> Result<AffineMap> {
        let mu = -(&self.sigma_inv * &self.mu);
        Self::new(self.sigma_inv.clone(), mu.as_slice().to_vec())
    }

    fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.sigma[(i, j)] == 0.0))
    }
}

fn parse_csv(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| HolderError::Config(format!("bad number `{}`", t.trim()))))
        .collect()
}

/// Grid with the same number of nodes per axis on the bounding box of the
/// image of `grid` under `map`. For diagonal σ the new nodes are exactly the
/// images of the old ones.
pub fn mapped_grid(grid: &Grid, map: &AffineMap) -> Result<Grid> {
    let d = grid.dim();
    if d != map.dim() {
        return Err(HolderError::Structural("grid and map dimensions differ".into()));
    }
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for mask in 0..(1usize << d) {
        let corner: Vec<f64> =
            (0..d).map(|k| if (mask >> k) & 1 == 1 { grid.hi()[k] } else { grid.lo()[k] }).collect();
        let img = map.apply(&corner);
        for k in 0..d {
            lo[k] = lo[k].min(img[k]);
            hi[k] = hi[k].max(img[k]);
        }
    }
    if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
        return Err(HolderError::Domain("transformed support is not representable".into()));
    }
    Grid::new(lo, hi, grid.points_per_axis().to_vec())
}

/// f_A on the bounding box of the mapped support, by multilinear
/// interpolation of `f`.
pub fn transform_density(f: &GridDensity, map: &AffineMap) -> Result<GridDensity> {
    let target = mapped_grid(f.grid(), map)?;
    transform_density_onto(f, map, &target)
}

/// f_A sampled on a caller-chosen grid.
pub fn transform_density_onto(f: &GridDensity, map: &AffineMap, target: &Grid) -> Result<GridDensity> {
    if f.dim() != map.dim() || target.dim() != map.dim() {
        return Err(HolderError::Structural("density, grid and map dimensions differ".into()));
    }
    let jac = map.det().abs();
    if map.is_diagonal() {
        // Read source nodes directly where the target node maps onto one, so
        // aligned grids are reproduced without interpolation round-off.
        let src = f.grid();
        let n = src.points_per_axis();
        return GridDensity::from_fn(target.clone(), |w| {
            let x = map.unapply(w);
            let mut flat = 0usize;
            for k in 0..x.len() {
                let t = (x[k] - src.lo()[k]) / src.step(k);
                let r = t.round();
                if (t - r).abs() > 1e-9 || r < 0.0 || r > (n[k] - 1) as f64 {
                    return jac * f.eval(&x);
                }
                flat = flat * n[k] + r as usize;
            }
            jac * f.values()[flat]
        });
    }
    GridDensity::from_fn(target.clone(), |w| jac * f.eval(&map.unapply(w)))
}

/// f_A for an analytically known f, on the image of `grid`.
pub fn transform_with(f: &DensityFn<'_>, map: &AffineMap, grid: &Grid) -> Result<GridDensity> {
    let target = mapped_grid(grid, map)?;
    let jac = map.det().abs();
    GridDensity::from_fn(target, |w| jac * f(&map.unapply(w)))
}

/// h(σ, μ) = |det σ|^{−γ}.
pub fn scale_function(gamma: f64, map: &AffineMap) -> f64 {
    map.det().abs().powf(-gamma)
}

/// Exponent e with h = |det σ|^e making the family's divergence invariant.
pub fn scale_exponent(score: &CompositeScore) -> f64 {
    match score {
        CompositeScore::Kl | CompositeScore::Gamma { .. } => 0.0,
        CompositeScore::DensityPower { gamma } => -gamma,
        CompositeScore::Holder { phi } => -phi.gamma(),
        CompositeScore::Pseudospherical { gamma } => -gamma / (1.0 + gamma),
        CompositeScore::BregmanHolder { gamma, kappa } => -gamma * kappa / (1.0 + gamma),
    }
}

/// Families whose scale function |det σ|^{−γ} (or 1) is established in closed form.
pub fn has_closed_form_scale(score: &CompositeScore) -> bool {
    matches!(score, CompositeScore::Kl | CompositeScore::DensityPower { .. } | CompositeScore::Holder { .. })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScaleFit {
    pub exponent: f64,
    /// Largest deviation of ln(D_A / D) from the fitted line; zero when the
    /// divergence scales exactly as a power of |det σ|.
    pub max_deviation: f64,
}

const PROBE_SCALES: [f64; 4] = [0.5, 0.8, 1.25, 2.0];

/// Estimate the scale exponent by least squares on ln(D(p_A, q_A)/D(p, q))
/// against ln|det σ| over isotropic scalings σ = s·I.
pub fn fit_scale_exponent(score: &CompositeScore, p: &GridDensity, q: &GridDensity) -> Result<ScaleFit> {
    let d0 = divergence(score, p, q)?.divergence;
    if !(d0 > 0.0) {
        return Err(HolderError::Degenerate(format!("D(p, q) = {d0}; cannot fit a scale exponent")));
    }
    let dim = p.dim();
    let mut pts = Vec::with_capacity(PROBE_SCALES.len());
    for &s in &PROBE_SCALES {
        let map = AffineMap::diagonal(&vec![s; dim], vec![0.0; dim])?;
        let da = divergence(score, &transform_density(p, &map)?, &transform_density(q, &map)?)?.divergence;
        if !(da > 0.0) {
            return Err(HolderError::Degenerate(format!("D(p_A, q_A) = {da} at scale {s}")));
        }
        pts.push((map.det().abs().ln(), (da / d0).ln()));
    }
    let slope = pts.iter().map(|(x, y)| x * y).sum::<f64>() / pts.iter().map(|(x, _)| x * x).sum::<f64>();
    let max_deviation = pts.iter().map(|(x, y)| (y - slope * x).abs()).fold(0.0, f64::max);
    Ok(ScaleFit { exponent: -slope, max_deviation })
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    /// |h·D(p_A, q_A) − D(p, q)| / max(|D(p, q)|, ε)
    pub residual: f64,
    pub exponent: f64,
    /// Whether `exponent` was estimated rather than taken from the closed form.
    pub exponent_fitted: bool,
    pub d_original: f64,
    pub d_transformed: f64,
}

const RESIDUAL_FLOOR: f64 = 1e-12;

fn residual_report(
    score: &CompositeScore,
    p: &GridDensity,
    q: &GridDensity,
    pa: &GridDensity,
    qa: &GridDensity,
    map: &AffineMap,
    fitted: Option<f64>,
) -> Result<InvarianceReport> {
    let d_original = divergence(score, p, q)?.divergence;
    let d_transformed = divergence(score, pa, qa)?.divergence;
    let exponent = fitted.unwrap_or_else(|| scale_exponent(score));
    let h = map.det().abs().powf(exponent);
    Ok(InvarianceReport {
        residual: (h * d_transformed - d_original).abs() / d_original.abs().max(RESIDUAL_FLOOR),
        exponent,
        exponent_fitted: fitted.is_some(),
        d_original,
        d_transformed,
    })
}

fn exponent_for(score: &CompositeScore, p: &GridDensity, q: &GridDensity) -> Result<Option<f64>> {
    if has_closed_form_scale(score) {
        Ok(None)
    } else {
        fit_scale_exponent(score, p, q).map(|f| Some(f.exponent))
    }
}

/// Invariance residual for grid densities; p_A and q_A come from
/// [`transform_density`].
pub fn verify_invariance(
    score: &CompositeScore,
    p: &GridDensity,
    q: &GridDensity,
    map: &AffineMap,
) -> Result<InvarianceReport> {
    let fitted = exponent_for(score, p, q)?;
    let pa = transform_density(p, map)?;
    let qa = transform_density(q, map)?;
    residual_report(score, p, q, &pa, &qa, map, fitted)
}

/// Invariance residual for analytically known densities; p_A and q_A are
/// evaluated exactly on the image grid, so rotations carry no interpolation
/// error.
pub fn verify_invariance_fn(
    score: &CompositeScore,
    p: &DensityFn<'_>,
    q: &DensityFn<'_>,
    grid: &Grid,
    map: &AffineMap,
) -> Result<InvarianceReport> {
    let pg = GridDensity::from_fn(grid.clone(), p)?;
    let qg = GridDensity::from_fn(grid.clone(), q)?;
    let fitted = exponent_for(score, &pg, &qg)?;
    let pa = transform_with(p, map, grid)?;
    let qa = transform_with(q, map, grid)?;
    residual_report(score, &pg, &qg, &pa, &qa, map, fitted)
}

/// (argmin_j D(p, q_j), argmin_j D(p_A, (q_j)_A)) over a finite candidate set.
pub fn argmin_invariance(
    score: &CompositeScore,
    p: &DensityFn<'_>,
    candidates: &[&DensityFn<'_>],
    grid: &Grid,
    map: &AffineMap,
) -> Result<(usize, usize)> {
    if candidates.is_empty() {
        return Err(HolderError::Domain("empty candidate set".into()));
    }
    let pg = GridDensity::from_fn(grid.clone(), p)?;
    let pa = transform_with(p, map, grid)?;
    let mut raw = Vec::with_capacity(candidates.len());
    let mut mapped = Vec::with_capacity(candidates.len());
    for q in candidates {
        raw.push(divergence(score, &pg, &GridDensity::from_fn(grid.clone(), q)?)?.divergence);
        mapped.push(divergence(score, &pa, &transform_with(*q, map, grid)?)?.divergence);
    }
    Ok((argmin(&raw), argmin(&mapped)))
}

fn argmin(v: &[f64]) -> usize {
    (0..v.len()).min_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquivarianceReport {
    pub theta_raw: Vec<f64>,
    /// Fit on the mapped data.
    pub theta_transformed: Vec<f64>,
    /// `theta_raw` pushed through the map.
    pub theta_mapped: Vec<f64>,
    /// max_i |mapped_i − transformed_i| / max(1, |transformed_i|)
    pub discrepancy: f64,
    pub tolerance: f64,
    pub converged: bool,
    pub passed: bool,
}

/// Fit on the raw sample and on the mapped sample, then compare the mapped
/// raw estimate with the direct one. The pass threshold is ten times the
/// larger optimiser tolerance.
pub fn verify_estimator_equivariance(
    score: &CompositeScore,
    model: &dyn ParametricModel,
    sample: &Sample,
    map: &AffineMap,
    cfg: &FitConfig,
) -> Result<EquivarianceReport> {
    if model.dim() != map.dim() {
        return Err(HolderError::Structural("model and map dimensions differ".into()));
    }
    let raw = fit(score, model, sample, cfg)?;
    let theta_mapped = model.transform_params(&raw.theta_hat, map).ok_or_else(|| {
        HolderError::UnsupportedFamily(format!("{} is not closed under this affine map", model.name()))
    })?;
    let mapped_sample = sample.map_points(|x| map.apply(x))?;
    let mut cfg2 = cfg.clone();
    if let Some(init) = &cfg.init_theta {
        cfg2.init_theta = model.transform_params(init, map);
    }
    let transformed = fit(score, model, &mapped_sample, &cfg2)?;
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::grid::integrate;
    use crate::score::phi::phi_kappa;
    use std::f64::consts::PI;

    fn std_normal(x: &[f64]) -> f64 {
        x.iter().map(|v| (-0.5 * v * v).exp() / (2.0 * PI).sqrt()).product()
    }

    fn grid1() -> Grid {
        Grid::uniform(vec![-10.0], vec![10.0], 2001).unwrap()
    }

    #[test]
    fn scale_function_values() {
        let a = AffineMap::diagonal(&[2.0, 3.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(scale_function(0.0, &a), 1.0);
        assert!((scale_function(0.5, &a) - 0.4082482905).abs() < 1e-10);
        let r = AffineMap::rotation_2d(0.7, 1.0, vec![1.0, -1.0]).unwrap();
        assert!((scale_function(1.0, &r) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn scale_function_is_multiplicative() {
        let a = AffineMap::diagonal(&[2.0, 0.5], vec![1.0, 0.0]).unwrap();
        let b = AffineMap::rotation_2d(0.3, 1.7, vec![0.0, 2.0]).unwrap();
        let c = a.compose(&b).unwrap();
        let lhs = scale_function(0.8, &c);
        assert!((lhs - scale_function(0.8, &a) * scale_function(0.8, &b)).abs() < 1e-12 * lhs);
    }

    #[test]
    fn compose_matches_sequential_application() {
        let a = AffineMap::rotation_2d(0.4, 2.0, vec![1.0, 2.0]).unwrap();
        let b = AffineMap::diagonal(&[3.0, -1.0], vec![0.5, 0.0]).unwrap();
        let c = a.compose(&b).unwrap();
        let x = [0.3, -1.2];
        let seq = b.apply(&a.apply(&x));
        let one = c.apply(&x);
        assert!(seq.iter().zip(&one).all(|(u, v)| (u - v).abs() < 1e-12));
    }

    #[test]
    fn apply_unapply_round_trip() {
        let a = AffineMap::rotation_2d(1.1, 0.3, vec![-4.0, 2.0]).unwrap();
        let x = [1.5, 2.5];
        let back = a.unapply(&a.apply(&x));
        assert!((back[0] - x[0]).abs() < 1e-10 && (back[1] - x[1]).abs() < 1e-10);
    }

    #[test]
    fn singular_and_malformed_maps() {
        assert!(matches!(AffineMap::diagonal(&[1.0, 0.0], vec![0.0, 0.0]), Err(HolderError::Domain(_))));
        assert!(matches!(AffineMap::from_config("sigma=1,2,3"), Err(HolderError::Config(_))));
        assert!(matches!(AffineMap::from_config("sigma=1,2,2,4; mu=0,0"), Err(HolderError::Domain(_))));
        let a = AffineMap::from_config("sigma=2,0,0,3; mu=1,1").unwrap();
        assert_eq!(a.dim(), 2);
        assert_eq!(a.mu(), &[1.0, 1.0]);
        assert!((a.det() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn identity_transform_is_exact() {
        let f = GridDensity::from_fn(grid1(), std_normal).unwrap();
        let g = transform_density(&f, &AffineMap::identity(1).unwrap()).unwrap();
        assert_eq!(f.values(), g.values());
    }

    #[test]
    fn scaling_a_standard_normal() {
        let f = GridDensity::from_fn(grid1(), std_normal).unwrap();
        let g = transform_density(&f, &AffineMap::diagonal(&[2.0], vec![0.0]).unwrap()).unwrap();
        let target = |x: f64| (-2.0 * x * x).exp() / (2.0 * PI * 0.25).sqrt();
        for (x, v) in g.grid().nodes().iter().zip(g.values()) {
            assert!((v - target(x[0])).abs() < 1e-12);
        }
    }

    #[test]
    fn two_dimensional_scaling_keeps_mass_and_multiplies_peak() {
        let grid = Grid::uniform(vec![-8.0, -8.0], vec![10.0, 10.0], 181).unwrap();
        let f = GridDensity::from_fn(grid, std_normal).unwrap();
        let a = AffineMap::diagonal(&[2.0, 3.0], vec![1.0, 1.0]).unwrap();
        let g = transform_density(&f, &a).unwrap();
        assert!((integrate(&g) - 1.0).abs() < 1e-6);
        let peak_f = f.values().iter().cloned().fold(0.0, f64::max);
        let peak_g = g.values().iter().cloned().fold(0.0, f64::max);
        assert!((peak_g / peak_f - 6.0).abs() < 1e-9);
    }

    #[test]
    fn round_trip_on_aligned_grids() {
        let grid = Grid::uniform(vec![-6.0, -6.0], vec![6.0, 6.0], 121).unwrap();
        let f = GridDensity::from_fn(grid, |x| std_normal(&[x[0] - 0.5, 0.7 * x[1]])).unwrap();
        let a = AffineMap::diagonal(&[-2.0, 0.5], vec![1.0, -3.0]).unwrap();
        let back = transform_density(&transform_density(&f, &a).unwrap(), &a.inverse().unwrap()).unwrap();
        for (u, v) in f.values().iter().zip(back.values()) {
            assert!((u - v).abs() < 1e-6);
        }
    }

    #[test]
    fn holder_invariance_under_scaling() {
        let p = GridDensity::from_fn(grid1(), std_normal).unwrap();
        let q = GridDensity::from_fn(grid1(), |x| std_normal(&[(x[0] - 0.7) / 1.3]) / 1.3).unwrap();
        let s = CompositeScore::holder(phi_kappa(1.0, 1.0).unwrap());
        let a = AffineMap::diagonal(&[2.0], vec![0.0]).unwrap();
        let r = verify_invariance(&s, &p, &q, &a).unwrap();
        assert!(r.residual < 1e-5, "{r:?}");
        let id = verify_invariance(&s, &p, &q, &AffineMap::identity(1).unwrap()).unwrap();
        assert!(id.residual < 1e-14);
    }

    #[test]
    fn fitted_exponents_match_derived_values() {
        let p = GridDensity::from_fn(grid1(), std_normal).unwrap();
        let q = GridDensity::from_fn(grid1(), |x| std_normal(&[(x[0] - 0.5) / 0.8]) / 0.8).unwrap();
        for s in [
            CompositeScore::pseudospherical(0.5).unwrap(),
            CompositeScore::gamma_score(0.5).unwrap(),
            CompositeScore::bregman_holder(0.5, 1.3).unwrap(),
        ] {
            let f = fit_scale_exponent(&s, &p, &q).unwrap();
            assert!((f.exponent - scale_exponent(&s)).abs() < 1e-6, "{s}: {f:?}");
            assert!(f.max_deviation < 1e-6);
            let r = verify_invariance(&s, &p, &q, &AffineMap::diagonal(&[0.5], vec![0.3]).unwrap()).unwrap();
            assert!(r.exponent_fitted && r.residual < 1e-5, "{s}: {r:?}");
        }
    }

    #[test]
    fn rotation_invariance_with_exact_densities() {
        let grid = Grid::uniform(vec![-9.0, -9.0], vec![9.0, 9.0], 241).unwrap();
        let p = |x: &[f64]| std_normal(x);
        let q = |x: &[f64]| std_normal(&[x[0] - 0.8, (x[1] + 0.3) / 1.2]) / 1.2;
        let a = AffineMap::rotation_2d(0.6, 1.4, vec![0.2, -0.4]).unwrap();
        let s = CompositeScore::density_power(0.5).unwrap();
        let r = verify_invariance_fn(&s, &p, &q, &grid, &a).unwrap();
        assert!(r.residual < 1e-5, "{r:?}");
    }
}
