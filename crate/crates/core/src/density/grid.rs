//! Tensor-product grids and grid-sampled densities.
//!
//! All ⟨·⟩ integrals in the crate are evaluated with the tensor-product
//! trapezoid rule on a uniform axis-aligned grid. Values are stored in
//! row-major order (last axis varies fastest).

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::sync::Arc;

use crate::error::{HolderError, Result};

/// Largest supported outcome dimension.
pub const MAX_DIM: usize = 3;

/// Default absolute integration tolerance for a `dim`-dimensional grid.
///
/// `HOLDER_TOL` in the environment overrides the per-dimension defaults.
pub fn integration_tolerance(dim: usize) -> f64 {
    if let Some(v) = std::env::var("HOLDER_TOL").ok().and_then(|s| s.trim().parse::<f64>().ok()) {
        if v > 0.0 && v.is_finite() {
            return v;
        }
    }
    match dim {
        0 | 1 => 1e-8,
        2 => 1e-6,
        _ => 1e-4,
    }
}

/// A uniform tensor grid on the box `[lo, hi]` with trapezoid weights.
#[derive(Clone, Debug)]
pub struct Grid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    n: Vec<usize>,
    weights: Arc<[f64]>,
}

impl Grid {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, n: Vec<usize>) -> Result<Self> {
        let d = lo.len();
        if d == 0 || d > MAX_DIM {
            return Err(HolderError::Structural(format!("grid dimension must be 1..={MAX_DIM}, got {d}")));
        }
        if hi.len() != d || n.len() != d {
            return Err(HolderError::Structural("lo, hi and n must have the same length".into()));
        }
        for k in 0..d {
            if !(lo[k].is_finite() && hi[k].is_finite() && hi[k] > lo[k]) {
                return Err(HolderError::Structural(format!("axis {k}: need finite lo < hi")));
            }
            if n[k] < 2 {
                return Err(HolderError::Structural(format!("axis {k}: need at least 2 points")));
            }
        }
        let axis_w: Vec<Vec<f64>> = (0..d)
            .map(|k| {
                let h = (hi[k] - lo[k]) / (n[k] - 1) as f64;
                let mut w = vec![h; n[k]];
                w[0] = 0.5 * h;
                w[n[k] - 1] = 0.5 * h;
                w
            })
            .collect();
        let total: usize = n.iter().product();
        let mut weights = Vec::with_capacity(total);
        let mut idx = vec![0usize; d];
        for _ in 0..total {
            weights.push((0..d).map(|k| axis_w[k][idx[k]]).product());
            advance(&mut idx, &n);
        }
        Ok(Self { lo, hi, n, weights: weights.into() })
    }

    /// Grid with the same number of points on every axis.
    pub fn uniform(lo: Vec<f64>, hi: Vec<f64>, points: usize) -> Result<Self> {
        let d = lo.len();
        Self::new(lo, hi, vec![points; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn points_per_axis(&self) -> &[usize] {
        &self.n
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn step(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / (self.n[axis] - 1) as f64
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.hi[k] - self.lo[k]).product()
    }

    /// Same box and resolution.
    pub fn same_as(&self, other: &Grid) -> bool {
        self.lo == other.lo && self.hi == other.hi && self.n == other.n
    }

    pub fn axis_node(&self, axis: usize, i: usize) -> f64 {
        if i + 1 == self.n[axis] {
            self.hi[axis]
        } else {
            self.lo[axis] + i as f64 * self.step(axis)
        }
    }

    /// Coordinates of every node, in storage order.
    pub fn nodes(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut idx = vec![0usize; d];
        let mut out = Vec::with_capacity(self.len());
        for _ in 0..self.len() {
            out.push((0..d).map(|k| self.axis_node(k, idx[k])).collect());
            advance(&mut idx, &self.n);
        }
        out
    }

    /// Evaluate `f` at every node.
    pub fn render<F: Fn(&[f64]) -> f64>(&self, f: F) -> Vec<f64> {
        let d = self.dim();
        let mut idx = vec![0usize; d];
        let mut x = vec![0.0; d];
        let mut out = Vec::with_capacity(self.len());
        for _ in 0..self.len() {
            for k in 0..d {
                x[k] = self.axis_node(k, idx[k]);
            }
            out.push(f(&x));
            advance(&mut idx, &self.n);
        }
        out
    }

    fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.n).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Multilinear interpolation of node `values` at `x`; zero outside the box.
    pub fn interpolate(&self, values: &[f64], x: &[f64]) -> f64 {
        let d = self.dim();
        let mut base = [0usize; MAX_DIM];
        let mut frac = [0.0f64; MAX_DIM];
        for k in 0..d {
            let h = self.step(k);
            let t = (x[k] - self.lo[k]) / h;
            let last = (self.n[k] - 1) as f64;
            // Tolerate rounding right at the faces.
            if !(t >= -1e-9 && t <= last + 1e-9) {
                return 0.0;
            }
            let t = t.clamp(0.0, last);
            let i = (t.floor() as usize).min(self.n[k] - 2);
            base[k] = i;
            frac[k] = t - i as f64;
        }
        let mut acc = 0.0;
        let mut corner = [0usize; MAX_DIM];
        for mask in 0..(1usize << d) {
            let mut w = 1.0;
            for k in 0..d {
                let up = (mask >> k) & 1 == 1;
                corner[k] = base[k] + usize::from(up);
                w *= if up { frac[k] } else { 1.0 - frac[k] };
            }
            if w != 0.0 {
                acc += w * values[self.flat_index(&corner[..d])];
            }
        }
        acc
    }

    /// Index of the node nearest to `x`, if `x` lies inside the box.
    pub fn nearest_node(&self, x: &[f64]) -> Option<Vec<usize>> {
        (0..self.dim())
            .map(|k| {
                let t = (x[k] - self.lo[k]) / self.step(k);
                if t < -0.5 || t > (self.n[k] - 1) as f64 + 0.5 {
                    None
                } else {
                    Some((t.round().max(0.0) as usize).min(self.n[k] - 1))
                }
            })
            .collect()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && (0..self.dim()).all(|k| x[k] >= self.lo[k] && x[k] <= self.hi[k])
    }
}

fn advance(idx: &mut [usize], n: &[usize]) {
    for k in (0..idx.len()).rev() {
        idx[k] += 1;
        if idx[k] < n[k] {
            return;
        }
        idx[k] = 0;
    }
}

/// A nonnegative, not identically zero function sampled on a [`Grid`].
///
/// This is the numerical stand-in for members of L₀⁺: densities, unnormalised
/// nonnegative functions and contaminated mixtures alike.
#[derive(Clone, Debug)]
pub struct GridDensity {
    grid: Grid,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(HolderError::Structural(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(HolderError::Domain(format!("grid values must be finite and nonnegative, found {v}")));
        }
        if !values.iter().any(|&v| v > 0.0) {
            return Err(HolderError::Domain("grid function is identically zero".into()));
        }
        Ok(Self { grid, values })
    }

    /// Build from raw parts, including an explicit weight array.
    pub fn from_parts(
        lo: Vec<f64>,
        hi: Vec<f64>,
        n: Vec<usize>,
        values: Vec<f64>,
        weights: Vec<f64>,
    ) -> Result<Self> {
        let mut grid = Grid::new(lo, hi, n)?;
        if weights.len() != grid.len() {
            return Err(HolderError::Structural(format!(
                "{} weights for a grid of {} nodes",
                weights.len(),
                grid.len()
            )));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(HolderError::Structural("quadrature weights must be positive".into()));
        }
        grid.weights = weights.into();
        Self::new(grid, values)
    }

    /// Render `f` on `grid`; negative outputs are rejected.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: Grid, f: F) -> Result<Self> {
        let values = grid.render(f);
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    /// Rescale to unit mass.
    pub fn normalize(&self) -> Result<GridDensity> {
        let mass = integrate(self);
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(HolderError::Degenerate(format!("cannot normalise mass {mass}")));
        }
        Ok(self.scaled(1.0 / mass))
    }

    pub fn scaled(&self, c: f64) -> GridDensity {
        GridDensity { grid: self.grid.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    /// Multilinear interpolation; zero outside the grid box.
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.grid.interpolate(&self.values, x)
    }

    /// L¹ distance to `other` on a shared grid.
    pub fn l1_distance(&self, other: &GridDensity) -> Result<f64> {
        same_grid(self, other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .zip(self.grid.weights())
            .map(|((a, b), w)| (a - b).abs() * w)
            .sum())
    }
}

pub(crate) fn same_grid(f: &GridDensity, g: &GridDensity) -> Result<()> {
    if f.grid.same_as(&g.grid) {
        Ok(())
    } else {
        Err(HolderError::Structural("densities live on different grids".into()))
    }
}

/// ⟨f⟩ by the trapezoid rule.
pub fn integrate(f: &GridDensity) -> f64 {
    f.values.iter().zip(f.grid.weights()).map(|(v, w)| v * w).sum()
}

/// ⟨f^a⟩ for a ≥ 1.
pub fn power_moment(f: &GridDensity, a: f64) -> Result<f64> {
    if !(a >= 1.0) {
        return Err(HolderError::Domain(format!("power moment needs a >= 1, got {a}")));
    }
    Ok(weighted_sum(f.grid.weights(), f.values.iter().map(|&v| pow(v, a))))
}

/// ⟨f g^a⟩ for a ≥ 0 on a shared grid.
pub fn cross_moment(f: &GridDensity, g: &GridDensity, a: f64) -> Result<f64> {
    if !(a >= 0.0) {
        return Err(HolderError::Domain(format!("cross moment needs a >= 0, got {a}")));
    }
    same_grid(f, g)?;
    Ok(weighted_sum(
        f.grid.weights(),
        f.values.iter().zip(&g.values).map(|(&fv, &gv)| if fv == 0.0 { 0.0 } else { fv * pow(gv, a) }),
    ))
}

/// v^a with the conventions 0^0 = 1 and 0^a = 0 for a > 0.
#[inline]
pub(crate) fn pow(v: f64, a: f64) -> f64 {
    if a == 1.0 {
        v
    } else if v == 0.0 {
        if a == 0.0 {
            1.0
        } else {
            0.0
        }
    } else {
        v.powf(a)
    }
}

fn weighted_sum<I: Iterator<Item = f64>>(w: &[f64], it: I) -> f64 {
    it.zip(w).map(|(v, w)| v * w).sum()
}

const HEADER_TAG: &str = "holder-grid v1";

fn csv<T: std::fmt::Display>(xs: &[T]) -> String {
    let mut s = String::new();
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "{x}");
    }
    s
}

/// Write `f` in the `holder-grid v1` text format.
///
/// Floats are printed in shortest round-trip form, so reading the file back
/// reproduces every finite value bit for bit.
pub fn write_grid<W: Write>(f: &GridDensity, mut out: W) -> Result<()> {
    let g = &f.grid;
    writeln!(
        out,
        "{HEADER_TAG}; dim={}; lo={}; hi={}; n={}",
        g.dim(),
        csv(&g.lo),
        csv(&g.hi),
        csv(&g.n)
    )?;
    for v in &f.values {
        writeln!(out, "{v}")?;
    }
    Ok(())
}

pub fn read_grid<R: BufRead>(input: R) -> Result<GridDensity> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| HolderError::Structural("empty grid file".into()))??;
    let mut fields = header.split(';').map(str::trim);
    if fields.next() != Some(HEADER_TAG) {
        return Err(HolderError::Structural(format!("bad grid header: {header}")));
    }
    let (mut dim, mut lo, mut hi, mut n) = (None, None, None, None);
    for field in fields.filter(|f| !f.is_empty()) {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| HolderError::Structural(format!("bad header field `{field}`")))?;
        match k.trim() {
            "dim" => dim = Some(parse_num::<usize>(v)?),
            "lo" => lo = Some(parse_list::<f64>(v)?),
            "hi" => hi = Some(parse_list::<f64>(v)?),
            "n" => n = Some(parse_list::<usize>(v)?),
            other => return Err(HolderError::Structural(format!("unknown header key `{other}`"))),
        }
    }
    let missing = |k: &str| HolderError::Structural(format!("grid header missing `{k}`"));
    let (dim, lo, hi, n) =
        (dim.ok_or_else(|| missing("dim"))?, lo.ok_or_else(|| missing("lo"))?, hi.ok_or_else(|| missing("hi"))?, n.ok_or_else(|| missing("n"))?);
    if lo.len() != dim {
        return Err(HolderError::Structural(format!("dim={dim} but lo has {} entries", lo.len())));
    }
    let grid = Grid::new(lo, hi, n)?;
    let mut values = Vec::with_capacity(grid.len());
    for line in lines {
        let line = line?;
        let t = line.trim();
        if !t.is_empty() {
            values.push(parse_num::<f64>(t)?);
        }
    }
    GridDensity::new(grid, values)
}

fn parse_num<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim().parse::<T>().map_err(|_| HolderError::Structural(format!("cannot parse `{}`", s.trim())))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',').map(parse_num).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_interval(points: usize) -> Grid {
        Grid::uniform(vec![0.0], vec![1.0], points).unwrap()
    }

    #[test]
    fn uniform_on_unit_interval_integrates_to_one() {
        let f = GridDensity::from_fn(unit_interval(1001), |_| 1.0).unwrap();
        assert!((integrate(&f) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn weights_sum_to_volume() {
        let g = Grid::new(vec![-1.0, 0.0, 2.0], vec![1.0, 3.0, 2.5], vec![5, 7, 4]).unwrap();
        let s: f64 = g.weights().iter().sum();
        assert!((s - g.volume()).abs() < 1e-12);
    }

    #[test]
    fn single_spike_is_height_times_cell() {
        let g = unit_interval(101);
        let h = 3.5;
        let mut v = vec![0.0; 101];
        v[40] = h;
        let f = GridDensity::new(g.clone(), v).unwrap();
        assert!((integrate(&f) - h * g.step(0)).abs() < 1e-14);
    }

    #[test]
    fn power_moments_of_uniforms() {
        let f = GridDensity::from_fn(unit_interval(11), |_| 1.0).unwrap();
        for a in [1.0, 1.3, 2.0, 3.0] {
            assert!((power_moment(&f, a).unwrap() - 1.0).abs() < 1e-14);
        }
        let half = GridDensity::from_fn(Grid::uniform(vec![0.0], vec![0.5], 21).unwrap(), |_| 2.0).unwrap();
        assert!((power_moment(&half, 2.0).unwrap() - 2.0).abs() < 1e-14);
        assert!(matches!(power_moment(&f, 0.5), Err(HolderError::Domain(_))));
    }

    #[test]
    fn cross_moment_disjoint_and_identical() {
        let g = unit_interval(101);
        let f = GridDensity::from_fn(g.clone(), |x| if x[0] < 0.5 { 2.0 } else { 0.0 }).unwrap();
        let h = GridDensity::from_fn(g.clone(), |x| if x[0] > 0.5 { 2.0 } else { 0.0 }).unwrap();
        assert_eq!(cross_moment(&f, &h, 0.7).unwrap(), 0.0);
        let u = GridDensity::from_fn(g, |_| 1.0).unwrap();
        for a in [0.0, 0.5, 2.0] {
            assert!((cross_moment(&u, &u, a).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn mismatched_shapes_are_structural() {
        let g = unit_interval(11);
        assert!(matches!(GridDensity::new(g, vec![1.0; 10]), Err(HolderError::Structural(_))));
        let r = GridDensity::from_parts(vec![0.0], vec![1.0], vec![11], vec![1.0; 11], vec![0.1; 12]);
        assert!(matches!(r, Err(HolderError::Structural(_))));
        let a = GridDensity::from_fn(unit_interval(11), |_| 1.0).unwrap();
        let b = GridDensity::from_fn(unit_interval(12), |_| 1.0).unwrap();
        assert!(matches!(cross_moment(&a, &b, 1.0), Err(HolderError::Structural(_))));
    }

    #[test]
    fn zero_function_rejected() {
        assert!(matches!(GridDensity::new(unit_interval(5), vec![0.0; 5]), Err(HolderError::Domain(_))));
    }

    #[test]
    fn interpolation_is_exact_for_multilinear_functions() {
        let g = Grid::uniform(vec![0.0, -1.0], vec![2.0, 1.0], 9).unwrap();
        let f = |x: &[f64]| 1.0 + 2.0 * x[0] + 0.5 * x[1] + 0.25 * x[0] * x[1];
        let v = g.render(f);
        for x in [[0.3, 0.1], [1.99, -0.97], [1.0, 0.0], [0.0, 1.0]] {
            assert!((g.interpolate(&v, &x) - f(&x)).abs() < 1e-12);
        }
        assert_eq!(g.interpolate(&v, &[2.5, 0.0]), 0.0);
    }

    #[test]
    fn file_header_layout() {
        let g = Grid::new(vec![-1.5, 0.0], vec![1.0, 2.0], vec![3, 2]).unwrap();
        let f = GridDensity::new(g, vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        let mut buf = Vec::new();
        write_grid(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("holder-grid v1; dim=2; lo=-1.5,0; hi=1,2; n=3,2\n0.1\n0.2\n"));
        assert!(read_grid("not a grid\n1\n".as_bytes()).is_err());
    }
}
