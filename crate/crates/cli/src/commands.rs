//! The experiment commands. Each returns the artifacts to write; the caller
//! owns the output directory.

use holder_core::affine::{scale_exponent, verify_invariance_fn};
use holder_core::density::{covering_grid, render, Grid, GridDensity, ParametricModel};
use holder_core::estimate::{fit, fit_regression_with, population_fit_point_mass, FitConfig, FitResult};
use holder_core::robust::{default_z_grid, redescend_check, write_influence_csv, InfluenceContext, Verdict};
use holder_core::score::composite::default_points;
use holder_core::score::{divergence, empirical_score, expected_score, CompositeScore, Forecast};
use holder_core::{HolderError, Result};
use rayon::prelude::*;

use crate::config::{self, parse_points, Settings};

/// Outputs of one command.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Artifacts {
    pub results: String,
    pub verdict: Option<Verdict>,
    pub report: Vec<String>,
    /// (file stem after `plotdata_`, contents)
    pub plots: Vec<(String, String)>,
    pub extra: Vec<(String, String)>,
    /// Numerical trouble worth exit status 3 after writing everything.
    pub numerical_failure: Option<String>,
}

fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out
}

fn num(v: f64) -> String {
    holder_core::format_float(v)
}

fn plot(comments: &[&str], header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    if rows.len() < 2 {
        return Err(HolderError::Numerical("empty sweep: plot data needs at least two rows".into()));
    }
    let mut out: String = comments.iter().map(|c| format!("# {c}\n")).collect();
    out.push_str(&csv(header, rows));
    Ok(out)
}

fn gammas(s: &Settings) -> Result<Vec<f64>> {
    s.list_or("gamma", &[0.5])
}

/// Grid covering the supports of p_θ and p_θ′.
fn pair_grid(model: &dyn ParametricModel, p: &[f64], q: &[f64]) -> Result<Grid> {
    let (plo, phi) = model.support(p);
    let (qlo, qhi) = model.support(q);
    let lo = plo.iter().zip(&qlo).map(|(a, b)| a.min(*b)).collect();
    let hi = phi.iter().zip(&qhi).map(|(a, b)| a.max(*b)).collect();
    Grid::uniform(lo, hi, default_points(model.dim()))
}

struct Pair {
    p: GridDensity,
    q: GridDensity,
}

fn pair(s: &Settings) -> Result<(std::sync::Arc<dyn ParametricModel>, Vec<f64>, Vec<f64>, Pair)> {
    let model = config::model(s)?;
    let pt = config::theta(s, "p.theta", model.as_ref())?;
    let qt = match s.get("q.theta") {
        Some(_) => config::theta(s, "q.theta", model.as_ref())?,
        None => pt.clone(),
    };
    let grid = pair_grid(model.as_ref(), &pt, &qt)?;
    let p = render(model.as_ref(), &pt, &grid)?;
    let q = render(model.as_ref(), &qt, &grid)?;
    Ok((model, pt, qt, Pair { p, q }))
}

pub fn score(s: &Settings, seed: u64) -> Result<Artifacts> {
    let empirical = s.has("data") || s.has("n");
    let family = s.str_or("family", "gamma");
    let mut rows = Vec::new();
    if empirical {
        let model = config::model(s)?;
        let sample = config::sample(s, model.as_ref(), seed)?;
        let qt = config::theta(s, "q.theta", model.as_ref())?;
        for g in gammas(s)? {
            let sc = config::score_for(s, family, g)?;
            let v = empirical_score(&sc, &sample, Forecast::Model(model.as_ref(), &qt))?;
            rows.push(vec![family.to_string(), num(g), "empirical".into(), num(v)]);
        }
    } else {
        let (_, _, _, pr) = pair(s)?;
        for g in gammas(s)? {
            let sc = config::score_for(s, family, g)?;
            let v = expected_score(&sc, &pr.p, &pr.q)?;
            rows.push(vec![family.to_string(), num(g), "expected".into(), num(v)]);
        }
    }
    Ok(Artifacts {
        results: csv(&["family", "gamma", "mode", "score"], &rows),
        verdict: Some(Verdict::Pass),
        report: vec![format!("rows={}", rows.len())],
        ..Default::default()
    })
}

pub fn divergence_cmd(s: &Settings) -> Result<Artifacts> {
    let (_, _, _, pr) = pair(s)?;
    let family = s.str_or("family", "gamma");
    let mut rows = Vec::new();
    let mut min_d = f64::INFINITY;
    for g in gammas(s)? {
        let sc = config::score_for(s, family, g)?;
        let v = divergence(&sc, &pr.p, &pr.q)?;
        min_d = min_d.min(v.divergence);
        rows.push(vec![family.to_string(), num(g), num(v.s_fg), num(v.s_ff), num(v.divergence)]);
    }
    let ok = min_d >= -1e-7;
    Ok(Artifacts {
        results: csv(&["family", "gamma", "s_fg", "s_ff", "divergence"], &rows),
        verdict: Some(if ok { Verdict::Pass } else { Verdict::Fail }),
        report: vec![format!("min_divergence={min_d}")],
        ..Default::default()
    })
}

fn fit_artifacts(r: &FitResult, extra_report: Vec<String>) -> Artifacts {
    let k = r.theta_hat.len();
    let mut report = vec![
        format!("converged={}", r.converged),
        format!("iterations={}", r.iterations),
        format!("grad_norm={}", r.grad_norm),
    ];
    report.extend(extra_report);
    let mut extra = Vec::new();
    if let Some(trace) = &r.trace {
        let rows: Vec<Vec<String>> = trace
            .iter()
            .map(|t| {
                let mut row = vec![t.iteration.to_string(), num(t.best_value)];
                row.extend(t.theta.iter().map(|v| num(*v)));
                row
            })
            .collect();
        let mut header = vec!["iteration".to_string(), "objective".to_string()];
        header.extend((1..=k).map(|i| format!("theta{i}")));
        let h: Vec<&str> = header.iter().map(String::as_str).collect();
        extra.push(("trace.csv".to_string(), csv(&h, &rows)));
    }
    Artifacts {
        results: format!("{}\n{}\n", FitResult::csv_header(k), r.csv_row()),
        verdict: Some(if r.converged { Verdict::Pass } else { Verdict::Fail }),
        report,
        extra,
        numerical_failure: (!r.converged).then(|| "optimizer did not converge".to_string()),
        ..Default::default()
    }
}

pub fn fit_cmd(s: &Settings, seed: u64) -> Result<Artifacts> {
    let model = config::model(s)?;
    let sample = config::sample(s, model.as_ref(), seed)?;
    let sc = config::score(s)?;
    let cfg = config::fit_config(s, seed)?;
    let r = fit(&sc, model.as_ref(), &sample, &cfg)?;
    Ok(fit_artifacts(&r, vec![format!("score={sc}"), format!("n={}", sample.len())]))
}

pub fn regress(s: &Settings, seed: u64) -> Result<Artifacts> {
    let cmodel = config::conditional_model(s)?;
    let sample = config::regression_sample(s, &cmodel, seed)?;
    let family = s.str_or("family", "bregman-holder");
    let sc = config::score_for(s, family, s.f64_or("gamma", 0.5)?)?;
    let cfg = config::fit_config(s, seed)?;
    let r = fit_regression_with(&sc, &cmodel, &sample, &cfg)?;
    Ok(fit_artifacts(&r, vec![format!("score={sc}"), format!("n={}", sample.len())]))
}

pub fn invariance(s: &Settings) -> Result<Artifacts> {
    let model = config::model(s)?;
    let pt = config::theta(s, "p.theta", model.as_ref())?;
    let qt = config::theta(s, "q.theta", model.as_ref())?;
    let map = config::affine(s)?;
    if map.dim() != model.dim() {
        return Err(HolderError::Config("affine map and model dimensions differ".into()));
    }
    let grid = pair_grid(model.as_ref(), &pt, &qt)?;
    let m = model.as_ref();
    let p = |x: &[f64]| m.density(&pt, x);
    let q = |x: &[f64]| m.density(&qt, x);
    let family = s.str_or("family", "gamma");
    let tol = s.f64_or("tol", 1e-5)?;
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for g in gammas(s)? {
        let sc = config::score_for(s, family, g)?;
        let r = verify_invariance_fn(&sc, &p, &q, &grid, &map)?;
        reports.push((g, sc, r));
    }
    let max_residual = reports.iter().map(|(_, _, r)| r.residual).fold(0.0, f64::max);
    for (g, sc, r) in &reports {
        rows.push(vec![
            family.to_string(),
            num(*g),
            num(map.det()),
            num(r.exponent),
            num(scale_exponent(sc)),
            r.exponent_fitted.to_string(),
            num(r.d_original),
            num(r.d_transformed),
            num(r.residual),
            num(max_residual),
        ]);
    }
    Ok(Artifacts {
        results: csv(
            &[
                "family",
                "gamma",
                "det_sigma",
                "exponent",
                "derived_exponent",
                "exponent_fitted",
                "d_original",
                "d_transformed",
                "residual",
                "max_residual",
            ],
            &rows,
        ),
        verdict: Some(if max_residual < tol { Verdict::Pass } else { Verdict::Fail }),
        report: vec![format!("max_residual={max_residual}"), format!("tolerance={tol}")],
        ..Default::default()
    })
}

fn z_grid(s: &Settings, model: &dyn ParametricModel, theta: &[f64]) -> Result<Vec<Vec<f64>>> {
    match s.get("z") {
        Some(v) => {
            let pts = parse_points("z", v)?;
            if pts.iter().any(|p| p.len() != model.dim()) {
                return Err(HolderError::Config(format!("every `z` point needs {} coordinates", model.dim())));
            }
            Ok(pts)
        }
        None => Ok(default_z_grid(model, theta, s.usize_or("z.points", 50)?)),
    }
}

fn influence_rows(s: &Settings) -> Result<(Vec<holder_core::robust::InfluenceResult>, String)> {
    let phi = config::phi(s)?;
    let model = config::model(s)?;
    let theta = config::theta(s, "theta", model.as_ref())?;
    let zs = z_grid(s, model.as_ref(), &theta)?;
    let ctx = InfluenceContext::new(&phi, model.as_ref(), &theta)?;
    let rows = ctx.sweep(&zs)?;
    let mut buf = Vec::new();
    write_influence_csv(&rows, &mut buf)?;
    Ok((rows, String::from_utf8(buf).map_err(|e| HolderError::Io(e.to_string()))?))
}

pub fn influence(s: &Settings) -> Result<Artifacts> {
    let (rows, text) = influence_rows(s)?;
    let worst = rows.iter().map(|r| r.solve_residual).fold(0.0, f64::max);
    let sup = rows.iter().map(|r| r.norm).fold(0.0, f64::max);
    Ok(Artifacts {
        results: text,
        verdict: Some(if worst < 1e-8 { Verdict::Pass } else { Verdict::Fail }),
        report: vec![format!("gross_error_sensitivity={sup}"), format!("max_solve_residual={worst}")],
        ..Default::default()
    })
}

pub fn redescend(s: &Settings) -> Result<Artifacts> {
    let phi = config::phi(s)?;
    let model = config::model(s)?;
    let theta = config::theta(s, "theta", model.as_ref())?;
    let zs = z_grid(s, model.as_ref(), &theta)?;
    let r = redescend_check(&phi, model.as_ref(), &theta, &zs)?;
    let rows: Vec<Vec<String>> = zs
        .iter()
        .zip(&r.tail_norms)
        .map(|(z, (zn, n))| vec![z.iter().map(|v| num(*v)).collect::<Vec<_>>().join(";"), num(*zn), num(*n)])
        .collect();
    let mut report = vec![
        format!("gamma={}", r.gamma),
        format!("phi_d2_at_1={}", r.phi_d2_at_1),
        format!("condition_met={}", r.condition_met),
        format!("tail_decays={}", r.tail_decays),
        format!("tail_plateaus={}", r.tail_plateaus),
        format!("limit_estimate={}", r.limit_estimate),
        format!("analytic_limit={}", r.analytic_limit),
    ];
    report.extend(r.warnings.iter().map(|w| format!("warning: {w}")));
    Ok(Artifacts {
        results: csv(&["z", "z_norm", "if_norm"], &rows),
        verdict: Some(r.verdict),
        report,
        ..Default::default()
    })
}

pub fn sweep(s: &Settings, seed: u64) -> Result<Artifacts> {
    match s.str_or("sweep", "influence") {
        "influence" => sweep_influence(s),
        "gamma" => sweep_gamma(s),
        "contamination" => sweep_contamination(s, seed),
        other => Err(HolderError::Config(format!("unknown sweep `{other}` (influence, gamma, contamination)"))),
    }
}

fn sweep_influence(s: &Settings) -> Result<Artifacts> {
    let (rows, text) = influence_rows(s)?;
    let pts: Vec<Vec<String>> = rows
        .iter()
        .map(|r| vec![num(r.z.iter().map(|v| v * v).sum::<f64>().sqrt()), num(r.norm)])
        .collect();
    let plotdata = plot(&["influence function norm against contamination point", "columns: z_norm, if_norm"], &["z_norm", "if_norm"], &pts)?;
    Ok(Artifacts {
        results: text,
        verdict: Some(Verdict::Pass),
        report: vec![format!("rows={}", rows.len())],
        plots: vec![("if_norm".into(), plotdata)],
        ..Default::default()
    })
}

fn sweep_gamma(s: &Settings) -> Result<Artifacts> {
    let (_, _, _, pr) = pair(s)?;
    let family = s.str_or("family", "gamma");
    let default: Vec<f64> = (1..=20).map(|i| i as f64 / 10.0).collect();
    let gs = s.list_or("gammas", &default)?;
    let values: Vec<Result<f64>> = gs
        .par_iter()
        .map(|&g| config::score_for(s, family, g).and_then(|sc| divergence(&sc, &pr.p, &pr.q)).map(|v| v.divergence))
        .collect();
    let mut rows = Vec::new();
    for (g, v) in gs.iter().zip(values) {
        rows.push(vec![num(*g), num(v?)]);
    }
    let plotdata = plot(&["divergence against gamma", "columns: gamma, divergence"], &["gamma", "divergence"], &rows)?;
    Ok(Artifacts {
        results: csv(&["gamma", "divergence"], &rows),
        verdict: Some(Verdict::Pass),
        report: vec![format!("family={family}"), format!("rows={}", rows.len())],
        plots: vec![("divergence_vs_gamma".into(), plotdata)],
        ..Default::default()
    })
}

fn sweep_contamination(s: &Settings, seed: u64) -> Result<Artifacts> {
    let model = config::model(s)?;
    let m = model.as_ref();
    let truth = config::theta(s, "theta", m)?;
    let z = s.list_or("z", &vec![10.0; m.dim()])?;
    if z.len() != m.dim() {
        return Err(HolderError::Config(format!("`z` must have {} coordinates", m.dim())));
    }
    let default: Vec<f64> = (0..=10).map(|i| i as f64 * 0.02).collect();
    let eps_list = s.list_or("eps_list", &default)?;
    let family = s.str_or("family", "gamma");
    let robust = config::score(s)?;
    let kl = CompositeScore::Kl;
    let grid = covering_grid(m, &truth, &z, default_points(m.dim()))?;
    let base = render(m, &truth, &grid)?;
    let cfg = FitConfig { init_theta: Some(truth.clone()), ..config::fit_config(s, seed)? };
    let fits: Vec<Result<(FitResult, FitResult)>> = eps_list
        .par_iter()
        .map(|&e| {
            let a = population_fit_point_mass(&robust, m, &base, e, &z, &cfg)?;
            let b = population_fit_point_mass(&kl, m, &base, e, &z, &cfg)?;
            Ok((a, b))
        })
        .collect();
    let k = truth.len();
    let mut rows = Vec::new();
    let mut curve_robust = Vec::new();
    let mut curve_kl = Vec::new();
    let mut all_converged = true;
    let bias = |t: &[f64]| t.iter().zip(&truth).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    for (e, f) in eps_list.iter().zip(fits) {
        let (a, b) = f?;
        all_converged &= a.converged && b.converged;
        let mut row = vec![num(*e)];
        row.extend(a.theta_hat.iter().map(|v| num(*v)));
        row.extend(b.theta_hat.iter().map(|v| num(*v)));
        rows.push(row);
        curve_robust.push(vec![num(*e), num(bias(&a.theta_hat))]);
        curve_kl.push(vec![num(*e), num(bias(&b.theta_hat))]);
    }
    let mut header = vec!["eps".to_string()];
    header.extend((1..=k).map(|i| format!("{family}_theta{i}")));
    header.extend((1..=k).map(|i| format!("kl_theta{i}")));
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let cols = ["eps", "bias"];
    let plots = vec![
        (
            format!("contamination_{family}"),
            plot(&[&format!("parameter bias of the {robust} fit against contamination fraction"), "columns: eps, bias"], &cols, &curve_robust)?,
        ),
        (
            "contamination_kl".to_string(),
            plot(&["parameter bias of the KL fit against contamination fraction", "columns: eps, bias"], &cols, &curve_kl)?,
        ),
    ];
    Ok(Artifacts {
        results: csv(&h, &rows),
        verdict: Some(if all_converged { Verdict::Pass } else { Verdict::Fail }),
        report: vec![format!("rows={}", rows.len()), format!("all_converged={all_converged}")],
        plots,
        numerical_failure: (!all_converged).then(|| "some contamination fits did not converge".to_string()),
        ..Default::default()
    })
}
