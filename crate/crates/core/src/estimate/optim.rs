//! Derivative-free minimisation used by every fit in the crate.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{HolderError, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Optimizer {
    NelderMead,
    /// Steepest descent on central-difference gradients with backtracking.
    GradientDescent,
    /// Nelder–Mead from the initial point plus `k − 1` jittered starts.
    MultiStart(usize),
}

impl std::str::FromStr for Optimizer {
    type Err = HolderError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        match s {
            "nelder-mead" => Ok(Self::NelderMead),
            "gradient-descent" | "gradient-descent-with-fd" => Ok(Self::GradientDescent),
            _ => {
                let k = s
                    .strip_prefix("multi-start(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| s.strip_prefix("multi-start:"))
                    .and_then(|k| k.trim().parse::<usize>().ok())
                    .ok_or_else(|| HolderError::Config(format!("unknown optimizer `{s}`")))?;
                if k == 0 {
                    return Err(HolderError::Config("multi-start needs k >= 1".into()));
                }
                Ok(Self::MultiStart(k))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitConfig {
    /// Starting point; when `None` the caller picks a data-driven one.
    pub init_theta: Option<Vec<f64>>,
    pub max_iters: usize,
    pub grad_tol: f64,
    pub step_tol: f64,
    pub optimizer: Optimizer,
    pub seed: u64,
    pub keep_trace: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            init_theta: None,
            max_iters: 5000,
            grad_tol: 1e-5,
            step_tol: 1e-9,
            optimizer: Optimizer::NelderMead,
            seed: 0,
            keep_trace: false,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(HolderError::Config("max_iters must be >= 1".into()));
        }
        if !(self.grad_tol > 0.0 && self.step_tol > 0.0) {
            return Err(HolderError::Config("tolerances must be positive".into()));
        }
        Ok(())
    }

    pub fn with_init(mut self, theta: Vec<f64>) -> Self {
        self.init_theta = Some(theta);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub best_value: f64,
    pub theta: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitResult {
    pub theta_hat: Vec<f64>,
    pub objective_value: f64,
    pub iterations: usize,
    /// Optimiser stopped on its tolerance *and* the finite-difference
    /// gradient norm at `theta_hat` is below `grad_tol`.
    pub converged: bool,
    pub grad_norm: f64,
    pub trace: Option<Vec<TraceRow>>,
}

impl FitResult {
    /// `theta...,objective,iters,converged`
    pub fn csv_row(&self) -> String {
        let mut fields: Vec<String> = self.theta_hat.iter().map(|v| crate::format_float(*v)).collect();
        fields.push(crate::format_float(self.objective_value));
        fields.push(self.iterations.to_string());
        fields.push(self.converged.to_string());
        fields.join(",")
    }

    pub fn csv_header(k: usize) -> String {
        let mut h: Vec<String> = (1..=k).map(|i| format!("theta{i}")).collect();
        h.extend(["objective".into(), "iters".into(), "converged".into()]);
        h.join(",")
    }
}

pub type Objective<'a> = dyn Fn(&[f64]) -> f64 + Sync + 'a;

fn fd_step(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

/// Central-difference gradient; infinite where a probe leaves the domain.
pub fn fd_gradient(f: &Objective<'_>, x: &[f64]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let h = fd_step(x[i]);
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            (f(&xp) - f(&xm)) / (2.0 * h)
        })
        .collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimise `f` from `x0` according to `cfg.optimizer`.
pub fn minimize(f: &Objective<'_>, x0: &[f64], cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    if x0.is_empty() {
        return Err(HolderError::Domain("empty parameter vector".into()));
    }
    let f0 = f(x0);
    if !f0.is_finite() {
        return Err(HolderError::Numerical(format!("objective is not finite at the initial point {x0:?}")));
    }
    let raw = match cfg.optimizer {
        Optimizer::NelderMead => nelder_mead(f, x0, cfg),
        Optimizer::GradientDescent => gradient_descent(f, x0, cfg),
        Optimizer::MultiStart(k) => multi_start(f, x0, k, cfg),
    };
    Ok(finalize(f, raw, cfg))
}

struct RawResult {
    x: Vec<f64>,
    fx: f64,
    iterations: usize,
    stopped_on_tol: bool,
    trace: Option<Vec<TraceRow>>,
}

fn finalize(f: &Objective<'_>, raw: RawResult, cfg: &FitConfig) -> FitResult {
    let g = fd_gradient(f, &raw.x);
    let grad_norm = norm(&g);
    FitResult {
        converged: raw.stopped_on_tol && grad_norm.is_finite() && grad_norm < cfg.grad_tol,
        theta_hat: raw.x,
        objective_value: raw.fx,
        iterations: raw.iterations,
        grad_norm,
        trace: raw.trace,
    }
}

fn initial_simplex(x0: &[f64]) -> Vec<Vec<f64>> {
    let mut s = vec![x0.to_vec()];
    for i in 0..x0.len() {
        let mut p = x0.to_vec();
        p[i] += if x0[i] != 0.0 { 0.05 * x0[i] } else { 0.1 };
        s.push(p);
    }
    s
}

fn nm_run(f: &Objective<'_>, x0: &[f64], cfg: &FitConfig, budget: usize, trace: &mut Option<Vec<TraceRow>>, offset: usize) -> RawResult {
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;
    let n = x0.len();
    let mut pts = initial_simplex(x0);
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    let mut iterations = 0;
    let mut stopped_on_tol = false;
    while iterations < budget {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        if let Some(t) = trace.as_mut() {
            t.push(TraceRow { iteration: offset + iterations, best_value: vals[0], theta: pts[0].clone() });
        }

        let diameter = pts[1..]
            .iter()
            .map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let spread = vals[n] - vals[0];
        if diameter <= cfg.step_tol && spread <= 1e-13 * vals[0].abs().max(1e-3) {
            stopped_on_tol = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..n).map(|j| pts[..n].iter().map(|p| p[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> { (0..n).map(|j| centroid[j] + t * (pts[n][j] - centroid[j])).collect() };

        let xr = along(-ALPHA);
        let fr = f(&xr);
        if fr < vals[0] {
            let xe = along(-GAMMA);
            let fe = f(&xe);
            if fe < fr {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            pts[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(-RHO);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(RHO);
            let fc = f(&xc);
            (xc, fc)
        };
        if fc < vals[n].min(fr) {
            pts[n] = xc;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            pts[i] = (0..n).map(|j| pts[0][j] + SIGMA * (pts[i][j] - pts[0][j])).collect();
            vals[i] = f(&pts[i]);
        }
    }
    let best = (0..=n).min_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap_or(0);
    RawResult { x: pts[best].clone(), fx: vals[best], iterations, stopped_on_tol, trace: None }
}

/// Nelder–Mead with restarts from the incumbent until a restart no longer
/// improves it; a restart rebuilds a full-size simplex, which undoes
/// premature collapse.
fn nelder_mead(f: &Objective<'_>, x0: &[f64], cfg: &FitConfig) -> RawResult {
    let mut trace = cfg.keep_trace.then(Vec::new);
    let mut used = 0;
    let mut best = nm_run(f, x0, cfg, cfg.max_iters, &mut trace, 0);
    used += best.iterations;
    for _ in 0..8 {
        if used >= cfg.max_iters || !best.stopped_on_tol {
            break;
        }
        let next = nm_run(f, &best.x, cfg, cfg.max_iters - used, &mut trace, used);
        used += next.iterations;
        let moved = next
            .x
            .iter()
            .zip(&best.x)
            .map(|(a, b)| (a - b).abs() / b.abs().max(1.0))
            .fold(0.0, f64::max);
        let improved = next.fx < best.fx;
        if improved {
            best = RawResult { stopped_on_tol: next.stopped_on_tol, ..next };
        }
        if !improved || moved <= cfg.step_tol {
            break;
        }
    }
    RawResult { iterations: used, trace, ..best }
}

fn gradient_descent(f: &Objective<'_>, x0: &[f64], cfg: &FitConfig) -> RawResult {
    let mut trace = cfg.keep_trace.then(Vec::new);
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut step = 1.0;
    let mut stopped_on_tol = false;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        if let Some(t) = trace.as_mut() {
            t.push(TraceRow { iteration: iterations, best_value: fx, theta: x.clone() });
        }
        let g = fd_gradient(f, &x);
        let gn = norm(&g);
        if !gn.is_finite() {
            break;
        }
        if gn < cfg.grad_tol {
            stopped_on_tol = true;
            break;
        }
        iterations += 1;
        // Armijo backtracking along −g
        let mut accepted = false;
        let mut t = step * 2.0;
        while t * gn > cfg.step_tol * 1e-3 {
            let cand: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
            let fc = f(&cand);
            if fc <= fx - 1e-4 * t * gn * gn {
                let moved = t * gn;
                x = cand;
                fx = fc;
                step = t;
                accepted = true;
                if moved <= cfg.step_tol {
                    stopped_on_tol = true;
                }
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            stopped_on_tol = true;
            break;
        }
        if stopped_on_tol {
            break;
        }
    }
    RawResult { x, fx, iterations, stopped_on_tol, trace }
}

fn jittered_start(f: &Objective<'_>, x0: &[f64], seed: u64, branch: u64) -> Option<Vec<f64>> {
    let mut r = rng::stream(seed, 1000 + branch);
    for _ in 0..50 {
        let cand: Vec<f64> = x0
            .iter()
            .map(|&v| {
                let e: f64 = StandardNormal.sample(&mut r);
                v + 0.5 * v.abs().max(1.0) * e
            })
            .collect();
        if f(&cand).is_finite() {
            return Some(cand);
        }
    }
    None
}

fn multi_start(f: &Objective<'_>, x0: &[f64], k: usize, cfg: &FitConfig) -> RawResult {
    let starts: Vec<Option<Vec<f64>>> = (0..k)
        .map(|b| if b == 0 { Some(x0.to_vec()) } else { jittered_start(f, x0, cfg.seed, b as u64) })
        .collect();
    let runs: Vec<Option<RawResult>> =
        starts.into_par_iter().map(|s| s.map(|x| nelder_mead(f, &x, cfg))).collect();
    let mut best: Option<RawResult> = None;
    let mut total = 0;
    for run in runs.into_iter().flatten() {
        total += run.iterations;
        // lowest branch wins ties within step_tol
        let better = best.as_ref().is_none_or(|b| run.fx < b.fx - cfg.step_tol);
        if better {
            best = Some(run);
        }
    }
    let best = best.expect("branch 0 always runs");
    RawResult { iterations: total, ..best }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> f64 {
        (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2)
    }

    #[test]
    fn nelder_mead_solves_rosenbrock() {
        let cfg = FitConfig { max_iters: 20_000, ..Default::default() };
        let r = minimize(&rosenbrock, &[-1.2, 1.0], &cfg).unwrap();
        assert!((r.theta_hat[0] - 1.0).abs() < 1e-6 && (r.theta_hat[1] - 1.0).abs() < 1e-6, "{r:?}");
        assert!(r.converged);
    }

    #[test]
    fn one_dimensional_quadratic() {
        let f = |x: &[f64]| (x[0] - 3.25).powi(2);
        let r = minimize(&f, &[0.0], &FitConfig::default()).unwrap();
        assert!((r.theta_hat[0] - 3.25).abs() < 1e-8);
    }

    #[test]
    fn gradient_descent_on_bowl() {
        let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 2.0 * (x[1] + 0.5).powi(2);
        let cfg = FitConfig { optimizer: Optimizer::GradientDescent, ..Default::default() };
        let r = minimize(&f, &[4.0, 4.0], &cfg).unwrap();
        assert!((r.theta_hat[0] - 1.0).abs() < 1e-5 && (r.theta_hat[1] + 0.5).abs() < 1e-5, "{r:?}");
        assert!(r.converged);
    }

    #[test]
    fn multi_start_never_worse_than_single() {
        // two wells; the start sits in the shallow one
        let f = |x: &[f64]| {
            let a = (x[0] - 2.0).powi(2);
            let b = (x[0] + 2.0).powi(2) - 1.0;
            a.min(b) + 0.01 * x[0] * x[0]
        };
        let single = minimize(&f, &[2.5], &FitConfig::default()).unwrap();
        let multi = minimize(&f, &[2.5], &FitConfig { optimizer: Optimizer::MultiStart(5), seed: 4, ..Default::default() }).unwrap();
        assert!(multi.objective_value <= single.objective_value);
    }

    #[test]
    fn infinite_regions_are_avoided() {
        let f = |x: &[f64]| if x[0] <= 0.0 { f64::INFINITY } else { x[0] - x[0].ln() };
        let r = minimize(&f, &[3.0], &FitConfig::default()).unwrap();
        assert!((r.theta_hat[0] - 1.0).abs() < 1e-6);
        assert!(minimize(&f, &[-1.0], &FitConfig::default()).is_err());
    }

    #[test]
    fn trace_and_iteration_cap() {
        let cfg = FitConfig { max_iters: 3, keep_trace: true, ..Default::default() };
        let r = minimize(&rosenbrock, &[-1.2, 1.0], &cfg).unwrap();
        assert!(!r.converged);
        assert!(r.iterations <= 3);
        assert!(!r.trace.unwrap().is_empty());
    }

    #[test]
    fn optimizer_names() {
        assert_eq!("nelder-mead".parse::<Optimizer>().unwrap(), Optimizer::NelderMead);
        assert_eq!("multi-start(5)".parse::<Optimizer>().unwrap(), Optimizer::MultiStart(5));
        assert_eq!("multi-start:3".parse::<Optimizer>().unwrap(), Optimizer::MultiStart(3));
        assert!("bfgs".parse::<Optimizer>().is_err());
    }
}
