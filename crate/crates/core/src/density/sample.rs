use std::io::{BufRead, Write};

use crate::error::{HolderError, Result};

/// Observed outcomes ω₁,…,ω_n, optionally paired with covariates x_i.
#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    points: Vec<Vec<f64>>,
    covariates: Option<Vec<Vec<f64>>>,
}

impl Sample {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(points, None)
    }

    pub fn with_covariates(points: Vec<Vec<f64>>, covariates: Vec<Vec<f64>>) -> Result<Self> {
        Self::build(points, Some(covariates))
    }

    /// One-dimensional outcomes.
    pub fn from_scalars(ys: &[f64]) -> Result<Self> {
        Self::new(ys.iter().map(|&y| vec![y]).collect())
    }

    fn build(points: Vec<Vec<f64>>, covariates: Option<Vec<Vec<f64>>>) -> Result<Self> {
        let first = points.first().ok_or_else(|| HolderError::Domain("sample must contain at least one point".into()))?;
        let d = first.len();
        if d == 0 {
            return Err(HolderError::Structural("sample points must have dimension >= 1".into()));
        }
        if points.iter().any(|p| p.len() != d) {
            return Err(HolderError::Structural("sample points have inconsistent dimensions".into()));
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(HolderError::Domain("sample contains non-finite values".into()));
        }
        if let Some(cov) = &covariates {
            if cov.len() != points.len() {
                return Err(HolderError::Structural(format!(
                    "{} covariate rows for {} outcomes",
                    cov.len(),
                    points.len()
                )));
            }
            let m = cov[0].len();
            if cov.iter().any(|c| c.len() != m) {
                return Err(HolderError::Structural("covariate rows have inconsistent lengths".into()));
            }
        }
        Ok(Self { points, covariates })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn covariates(&self) -> Option<&[Vec<f64>]> {
        self.covariates.as_deref()
    }

    /// Error unless every point lies in the box `[lo, hi]`.
    pub fn check_domain(&self, lo: &[f64], hi: &[f64]) -> Result<()> {
        for p in &self.points {
            if p.iter().zip(lo.iter().zip(hi)).any(|(v, (l, h))| v < l || v > h) {
                return Err(HolderError::Domain(format!("sample point {p:?} outside the declared domain")));
            }
        }
        Ok(())
    }

    /// Same covariates, outcomes replaced by `f(outcome)`.
    pub fn map_points<F: Fn(&[f64]) -> Vec<f64>>(&self, f: F) -> Result<Self> {
        Self::build(self.points.iter().map(|p| f(p)).collect(), self.covariates.clone())
    }
}

/// Parse a sample CSV.
///
/// The header names the columns: `y` (or `y1..yd`) for outcomes and
/// optionally `x1..xm` for covariates, e.g. `x1,x2,y`.
pub fn read_sample_csv<R: BufRead>(input: R) -> Result<Sample> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| HolderError::Structural("empty sample file".into()))??;
    let cols: Vec<String> = header.split(',').map(|c| c.trim().to_string()).collect();
    let mut x_cols = Vec::new();
    let mut y_cols = Vec::new();
    for (i, c) in cols.iter().enumerate() {
        if c == "y" || (c.starts_with('y') && c[1..].parse::<usize>().is_ok()) {
            y_cols.push(i);
        } else if c.starts_with('x') && c[1..].parse::<usize>().is_ok() {
            x_cols.push(i);
        } else {
            return Err(HolderError::Structural(format!("unknown sample column `{c}`")));
        }
    }
    if y_cols.is_empty() {
        return Err(HolderError::Structural("sample header has no `y` column".into()));
    }
    let mut ys = Vec::new();
    let mut xs = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| HolderError::Structural(format!("line {}: cannot parse `{line}`", lineno + 2)))?;
        if row.len() != cols.len() {
            return Err(HolderError::Structural(format!(
                "line {}: expected {} fields, found {}",
                lineno + 2,
                cols.len(),
                row.len()
            )));
        }
        ys.push(y_cols.iter().map(|&i| row[i]).collect());
        xs.push(x_cols.iter().map(|&i| row[i]).collect::<Vec<f64>>());
    }
    if x_cols.is_empty() {
        Sample::new(ys)
    } else {
        Sample::with_covariates(ys, xs)
    }
}

pub fn write_sample_csv<W: Write>(sample: &Sample, mut out: W) -> Result<()> {
    let m = sample.covariates().map_or(0, |c| c[0].len());
    let d = sample.dim();
    let mut header: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
    if d == 1 {
        header.push("y".into());
    } else {
        header.extend((1..=d).map(|i| format!("y{i}")));
    }
    writeln!(out, "{}", header.join(","))?;
    for (i, p) in sample.points().iter().enumerate() {
        let mut fields: Vec<String> = Vec::with_capacity(m + d);
        if let Some(c) = sample.covariates() {
            fields.extend(c[i].iter().map(|v| crate::format_float(*v)));
        }
        fields.extend(p.iter().map(|v| crate::format_float(*v)));
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sample_rejected() {
        assert!(Sample::new(vec![]).is_err());
    }

    #[test]
    fn csv_with_covariates() {
        let text = "x1,y\n0.5,1.25\n-1,3\n";
        let s = read_sample_csv(text.as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.covariates().unwrap()[1], vec![-1.0]);
        assert_eq!(s.points()[0], vec![1.25]);
        let mut buf = Vec::new();
        write_sample_csv(&s, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
    }

    #[test]
    fn csv_errors() {
        assert!(read_sample_csv("z\n1\n".as_bytes()).is_err());
        assert!(read_sample_csv("x1,y\n1\n".as_bytes()).is_err());
        assert!(read_sample_csv("y\nabc\n".as_bytes()).is_err());
    }

    #[test]
    fn domain_check() {
        let s = Sample::from_scalars(&[0.1, 0.9]).unwrap();
        assert!(s.check_domain(&[0.0], &[1.0]).is_ok());
        assert!(s.check_domain(&[0.0], &[0.5]).is_err());
    }
}
