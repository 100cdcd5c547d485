//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use holder_core::affine::AffineMap;
use holder_core::density::{make_parametric, read_sample_csv, ModelHyper, ModelKind, ParametricModel, Sample};
use holder_core::estimate::{ConditionalModel, FitConfig, LinearGaussian, Optimizer};
use holder_core::rng;
use holder_core::score::{builtin_phi, phi_density_power, phi_gamma_score, phi_kappa, CompositeScore, PhiFunction};
use holder_core::{HolderError, Result};
use rand::Rng;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            s.set(line).map_err(|_| HolderError::Config(format!("line {}: expected key=value, got `{line}`", i + 1)))?;
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| HolderError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Apply one `key=value` override.
    pub fn set(&mut self, kv: &str) -> Result<()> {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| HolderError::Config(format!("expected key=value, got `{kv}`")))?;
        let k = k.trim();
        if k.is_empty() {
            return Err(HolderError::Config(format!("empty key in `{kv}`")));
        }
        self.values.insert(k.to_string(), v.trim().to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    pub fn str_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => parse_f64(key, v),
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<usize>()
                .map_err(|_| HolderError::Config(format!("`{key}` must be a non-negative integer, got `{v}`"))),
        }
    }

    pub fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.get(key) {
            None => Ok(default),
            Some("true" | "yes" | "1") => Ok(true),
            Some("false" | "no" | "0") => Ok(false),
            Some(v) => Err(HolderError::Config(format!("`{key}` must be true or false, got `{v}`"))),
        }
    }

    pub fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.get(key) {
            None => Ok(default.to_vec()),
            Some(v) => parse_list(key, v),
        }
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.get(key).map(|v| parse_list(key, v)).transpose()
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| HolderError::Config(format!("`{key}` must be a finite number, got `{v}`")))
}

pub fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|t| !t.trim().is_empty()).map(|t| parse_f64(key, t)).collect()
}

/// Points written as `x1,x2;y1,y2;…`.
pub fn parse_points(key: &str, v: &str) -> Result<Vec<Vec<f64>>> {
    v.split(';').filter(|t| !t.trim().is_empty()).map(|t| parse_list(key, t)).collect()
}

pub fn score(s: &Settings) -> Result<CompositeScore> {
    score_for(s, s.str_or("family", "gamma"), s.f64_or("gamma", 0.5)?)
}

pub fn score_for(s: &Settings, family: &str, gamma: f64) -> Result<CompositeScore> {
    match family {
        "kl" => Ok(CompositeScore::Kl),
        "density-power" => CompositeScore::density_power(gamma),
        "pseudospherical" => CompositeScore::pseudospherical(gamma),
        "gamma" => CompositeScore::gamma_score(gamma),
        "bregman-holder" => CompositeScore::bregman_holder(gamma, s.f64_or("kappa", 1.0)?),
        "holder" => Ok(CompositeScore::holder(builtin_phi(s.str_or("phi", "gamma"), gamma)?)),
        other => Err(HolderError::Config(format!("unknown score family `{other}`"))),
    }
}

/// φ for the robustness commands: the `phi` key, or the one implied by `family`.
pub fn phi(s: &Settings) -> Result<PhiFunction> {
    let gamma = s.f64_or("gamma", 0.5)?;
    if let Some(name) = s.get("phi") {
        return builtin_phi(name, gamma);
    }
    match s.str_or("family", "bregman-holder") {
        "bregman-holder" => phi_kappa(gamma, s.f64_or("kappa", 1.0)?),
        "gamma" | "pseudospherical" => phi_gamma_score(gamma),
        "density-power" => phi_density_power(gamma),
        "holder" => Err(HolderError::Config("family=holder needs a `phi` key".into())),
        other => Err(HolderError::Config(format!("family `{other}` has no φ; influence functions need γ > 0"))),
    }
}

pub fn model(s: &Settings) -> Result<Arc<dyn ParametricModel>> {
    let kind: ModelKind = s.str_or("model", "gaussian-mean-scale").parse()?;
    let mut hyper = ModelHyper::default();
    hyper.dim = s.usize_or("model.dim", hyper.dim)?;
    hyper.scale = s.f64_or("model.scale", hyper.scale)?;
    hyper.weights = s.list_or("model.weights", &hyper.weights)?;
    make_parametric(kind, &hyper)
}

pub fn theta(s: &Settings, key: &str, model: &dyn ParametricModel) -> Result<Vec<f64>> {
    let t = s.list(key)?.unwrap_or_else(|| model.default_theta());
    if t.len() != model.param_dim() || !model.is_valid(&t) {
        return Err(HolderError::Config(format!("`{key}` = {t:?} is not a valid parameter for {}", model.name())));
    }
    Ok(t)
}

pub fn fit_config(s: &Settings, seed: u64) -> Result<FitConfig> {
    let d = FitConfig::default();
    let cfg = FitConfig {
        init_theta: s.list("init")?,
        max_iters: s.usize_or("max_iters", d.max_iters)?,
        grad_tol: s.f64_or("grad_tol", d.grad_tol)?,
        step_tol: s.f64_or("step_tol", d.step_tol)?,
        optimizer: match s.get("optimizer") {
            Some(o) => o.parse::<Optimizer>()?,
            None => d.optimizer,
        },
        seed,
        keep_trace: s.bool_or("trace", false)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn contamination(s: &Settings, dim: usize) -> Result<(f64, Vec<f64>)> {
    let eps = s.f64_or("eps", 0.0)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(HolderError::Config(format!("`eps` must be in [0, 1), got {eps}")));
    }
    let z = s.list_or("z", &vec![10.0; dim])?;
    if z.len() != dim {
        return Err(HolderError::Config(format!("`z` must have {dim} coordinates")));
    }
    Ok((eps, z))
}

/// Sample from `data`, or n draws from the model at `theta`, each replaced by
/// the point `z` with probability `eps`.
pub fn sample(s: &Settings, model: &dyn ParametricModel, seed: u64) -> Result<Sample> {
    if let Some(path) = s.get("data") {
        return read_data(path);
    }
    let n = s.usize_or("n", 1000)?;
    if n == 0 {
        return Err(HolderError::Config("`n` must be positive".into()));
    }
    let truth = theta(s, "theta", model)?;
    let (eps, z) = contamination(s, model.dim())?;
    let mut pts = model.sampler(&truth, n, seed);
    let mut r = rng::stream(seed, 1);
    for p in &mut pts {
        if r.random::<f64>() < eps {
            *p = z.clone();
        }
    }
    Sample::new(pts)
}

pub fn read_data(path: &str) -> Result<Sample> {
    let f = fs::File::open(path).map_err(|e| HolderError::Config(format!("cannot open data file {path}: {e}")))?;
    read_sample_csv(std::io::BufReader::new(f))
}

pub fn conditional_model(s: &Settings) -> Result<LinearGaussian> {
    match s.str_or("cmodel", "linear-gaussian") {
        "linear-gaussian" => {
            let m = s.usize_or("cmodel.covariates", 1)?;
            match s.get("cmodel.scale") {
                Some(v) => LinearGaussian::fixed_scale(m, parse_f64("cmodel.scale", v)?),
                None => LinearGaussian::free_scale(m),
            }
        }
        other => Err(HolderError::Config(format!("unknown conditional model `{other}`"))),
    }
}

/// Regression data from `data`, or synthetic: covariates uniform on
/// [−2, 2]^m, responses from the model at `theta`, and with probability
/// `eps` a response replaced by `z`.
pub fn regression_sample(s: &Settings, cmodel: &LinearGaussian, seed: u64) -> Result<Sample> {
    if let Some(path) = s.get("data") {
        return read_data(path);
    }
    let n = s.usize_or("n", 500)?;
    if n == 0 {
        return Err(HolderError::Config("`n` must be positive".into()));
    }
    let truth = s.list("theta")?.ok_or_else(|| HolderError::Config("regress needs `theta`".into()))?;
    if !cmodel.is_valid(&truth) {
        return Err(HolderError::Config(format!("`theta` = {truth:?} is invalid for {}", cmodel.name())));
    }
    let m = cmodel.covariate_dim();
    let mut r = rng::stream(seed, 2);
    let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..m).map(|_| r.random_range(-2.0..2.0)).collect()).collect();
    let clean = holder_core::estimate::simulate(cmodel, &truth, xs, seed)?;
    let eps = s.f64_or("eps", 0.0)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(HolderError::Config(format!("`eps` must be in [0, 1), got {eps}")));
    }
    let z = s.f64_or("z", 20.0)?;
    let mut ru = rng::stream(seed, 3);
    let ys = clean.points().iter().map(|y| if ru.random::<f64>() < eps { vec![z] } else { y.clone() }).collect();
    Sample::with_covariates(ys, clean.covariates().unwrap_or_default().to_vec())
}

/// `affine = sigma=…; mu=…`, or separate `sigma` and `mu` keys.
pub fn affine(s: &Settings) -> Result<AffineMap> {
    if let Some(spec) = s.get("affine") {
        return AffineMap::from_config(spec);
    }
    let sigma = s.get("sigma").ok_or_else(|| HolderError::Config("missing `sigma` (or `affine`)".into()))?;
    let spec = match s.get("mu") {
        Some(mu) => format!("sigma={sigma}; mu={mu}"),
        None => format!("sigma={sigma}"),
    };
    AffineMap::from_config(&spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_override() {
        let mut s = Settings::parse("# comment\nfamily = gamma\ngamma=0.5  # trailing\n\n").unwrap();
        assert_eq!(s.get("family"), Some("gamma"));
        s.set("gamma=1.5").unwrap();
        assert_eq!(s.f64_or("gamma", 0.0).unwrap(), 1.5);
        assert!(Settings::parse("novalue").is_err());
        assert!(s.f64_or("family", 0.0).is_err());
    }

    #[test]
    fn lists_and_points() {
        assert_eq!(parse_list("k", "1, 2,3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_points("k", "1,2; 3,4").unwrap(), vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert!(parse_list("k", "1,x").is_err());
    }

    #[test]
    fn builders() {
        let s = Settings::parse("family=bregman-holder\ngamma=0.5\nkappa=1.5\nmodel=gaussian-mean\n").unwrap();
        assert!(matches!(score(&s).unwrap(), CompositeScore::BregmanHolder { .. }));
        assert_eq!(phi(&s).unwrap().label(), "kappa:1.5");
        assert_eq!(model(&s).unwrap().param_dim(), 1);
        let bad = Settings::parse("family=nope").unwrap();
        assert!(matches!(score(&bad), Err(HolderError::Config(_))));
    }

    #[test]
    fn affine_from_keys() {
        let s = Settings::parse("sigma=2,0,0,3\nmu=1,1").unwrap();
        assert!((affine(&s).unwrap().det() - 6.0).abs() < 1e-12);
        let sing = Settings::parse("sigma=1,1,1,1").unwrap();
        assert!(affine(&sing).is_err());
    }

    #[test]
    fn synthetic_sample_is_reproducible() {
        let s = Settings::parse("model=gaussian-mean\ntheta=0\nn=50\neps=0.2\nz=10").unwrap();
        let m = model(&s).unwrap();
        let a = sample(&s, m.as_ref(), 4).unwrap();
        let b = sample(&s, m.as_ref(), 4).unwrap();
        assert_eq!(a, b);
        assert!(a.points().iter().any(|p| p[0] == 10.0));
    }
}
