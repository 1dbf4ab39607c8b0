//! Chart-level Riemannian metrics: domain boxes, pointwise metric values,
//! metric derivatives, conformal rescaling, products of charts and the
//! line-oriented manifest format.
//!
//! A [`MetricSpec`] is a single chart: every global statement produced by
//! the toolkit is local, so a coordinate box with a generic base point
//! suffices. Metric entries are [`Expression`]s in the chart coordinates;
//! all derivatives are obtained by evaluating those expressions in
//! truncated Taylor arithmetic ([`crate::jet`]), which is exact to machine
//! precision at every order (no finite differencing anywhere).

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::expr::{fmt_f64, EvalError, Expression, ParseError};
use crate::jet::{Jet, JetCtx};

/// A chart point, as plain coordinates.
pub type Point = Vec<f64>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum GeometryError {
    #[error("coordinate {index} = {value} outside the chart domain ({lo}, {hi})")]
    DomainViolation {
        index: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("metric is not positive-definite at {point:?}")]
    NotPositiveDefinite { point: Point },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("invalid metric specification: {0}")]
    Invalid(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Errors from reading a manifest file.
#[derive(Debug, Clone, thiserror::Error)]
#[error("manifest line {line}: {message}")]
pub struct ManifestError {
    pub line: usize,
    pub message: String,
}

/// A conformal change of gauge `ĝ = e^{2f} g`, with `Υ = df` recorded
/// componentwise.
#[derive(Debug, Clone)]
pub struct ConformalRescale {
    /// The log-scale: the new metric is `e^{2f} g`.
    pub f: Expression,
    /// `Υ_i = ∂_i f`, exactly `f.differentiate(i)`.
    pub upsilon: Vec<Expression>,
}

impl ConformalRescale {
    /// Evaluate `Υ` as a covector at `p`.
    pub fn upsilon_at(&self, p: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.upsilon.iter().map(|u| u.evaluate(p)).collect()
    }

    /// Evaluate the scale `f` at `p`.
    pub fn f_at(&self, p: &[f64]) -> Result<f64, EvalError> {
        self.f.evaluate(p)
    }
}

/// A chart-level Riemannian metric: dimension, coordinate names, symmetric
/// matrix of expressions, open domain box, base point and a display label.
#[derive(Debug, Clone)]
pub struct MetricSpec {
    dim: usize,
    coords: Vec<String>,
    /// Full symmetric matrix, row-major `n×n`.
    g: Vec<Arc<Expression>>,
    domain: Vec<(f64, f64)>,
    basepoint: Point,
    label: String,
}

impl MetricSpec {
    /// Build a metric from the upper triangle (`entries[(i, j)]` with
    /// `i <= j`, missing entries zero). Validates variable indices, the
    /// domain box, and positive-definiteness at the base point and a few
    /// sampled domain points.
    pub fn new(
        coords: Vec<String>,
        upper: Vec<((usize, usize), Expression)>,
        domain: Vec<(f64, f64)>,
        basepoint: Point,
        label: impl Into<String>,
    ) -> Result<MetricSpec, GeometryError> {
        let dim = coords.len();
        if dim < 2 {
            return Err(GeometryError::Invalid(format!(
                "dimension must be at least 2, got {}",
                dim
            )));
        }
        if domain.len() != dim {
            return Err(GeometryError::Dimension {
                expected: dim,
                got: domain.len(),
            });
        }
        if basepoint.len() != dim {
            return Err(GeometryError::Dimension {
                expected: dim,
                got: basepoint.len(),
            });
        }
        for (lo, hi) in &domain {
            // Negated so NaN endpoints are rejected along with lo >= hi.
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(lo < hi) {
                return Err(GeometryError::Invalid(format!(
                    "empty domain interval ({}, {})",
                    lo, hi
                )));
            }
        }
        let zero = Arc::new(Expression::Const(0.0));
        let mut g = vec![zero; dim * dim];
        for ((i, j), e) in upper {
            if i >= dim || j >= dim {
                return Err(GeometryError::Invalid(format!(
                    "metric index ({}, {}) out of range for dimension {}",
                    i + 1,
                    j + 1,
                    dim
                )));
            }
            if i > j {
                return Err(GeometryError::Invalid(format!(
                    "metric entries must be given with row <= column, got ({}, {})",
                    i + 1,
                    j + 1
                )));
            }
            if e.max_var_bound() > dim {
                return Err(GeometryError::Invalid(format!(
                    "metric entry ({}, {}) references a coordinate index beyond the dimension",
                    i + 1,
                    j + 1
                )));
            }
            let e = Arc::new(e.folded());
            g[i * dim + j] = e.clone();
            g[j * dim + i] = e;
        }
        let spec = MetricSpec {
            dim,
            coords,
            g,
            domain,
            basepoint,
            label: label.into(),
        };
        spec.check_domain(&spec.basepoint)?;
        // Positive-definiteness at the base point and a few domain samples.
        spec.metric_at(&spec.basepoint)?;
        for p in spec.sample_points(6, 0) {
            spec.metric_at(&p)?;
        }
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn coord_refs(&self) -> Vec<&str> {
        self.coords.iter().map(|s| s.as_str()).collect()
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expression {
        &self.g[i * self.dim + j]
    }

    pub fn domain(&self) -> &[(f64, f64)] {
        &self.domain
    }

    pub fn basepoint(&self) -> &Point {
        &self.basepoint
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Replace the base point (must lie in the domain).
    pub fn with_basepoint(mut self, p: Point) -> Result<MetricSpec, GeometryError> {
        self.check_domain(&p)?;
        self.basepoint = p;
        Ok(self)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> MetricSpec {
        self.label = label.into();
        self
    }

    /// Serialize to the manifest format accepted by [`parse_manifest`];
    /// floats are written so they re-parse bit-identically.
    pub fn to_manifest(&self) -> String {
        use std::fmt::Write as _;
        let names = self.coord_refs();
        let mut out = String::new();
        writeln!(out, "dimension = {}", self.dim).unwrap();
        writeln!(out, "coords = {}", self.coords.join(", ")).unwrap();
        for i in 0..self.dim {
            for j in i..self.dim {
                let e = &self.g[i * self.dim + j];
                if matches!(**e, Expression::Const(c) if c == 0.0) {
                    continue;
                }
                writeln!(out, "metric[{}][{}] = {}", i + 1, j + 1, e.print(&names)).unwrap();
            }
        }
        for (i, (lo, hi)) in self.domain.iter().enumerate() {
            writeln!(out, "domain[{}] = {}, {}", i + 1, fmt_f64(*lo), fmt_f64(*hi)).unwrap();
        }
        let bp: Vec<String> = self.basepoint.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(out, "basepoint = {}", bp.join(", ")).unwrap();
        writeln!(out, "label = {}", self.label).unwrap();
        out
    }

    /// Error unless `p` lies inside the (open) domain box.
    pub fn check_domain(&self, p: &[f64]) -> Result<(), GeometryError> {
        if p.len() != self.dim {
            return Err(GeometryError::Dimension {
                expected: self.dim,
                got: p.len(),
            });
        }
        for (i, (&v, &(lo, hi))) in p.iter().zip(&self.domain).enumerate() {
            if !(v > lo && v < hi) {
                return Err(GeometryError::DomainViolation {
                    index: i,
                    value: v,
                    lo,
                    hi,
                });
            }
        }
        Ok(())
    }

    /// The metric matrix at `p` (symmetric positive-definite, enforced).
    pub fn metric_at(&self, p: &[f64]) -> Result<DMatrix<f64>, GeometryError> {
        self.check_domain(p)?;
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.g[i * n + j].evaluate(p)?;
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        if nalgebra::Cholesky::new(m.clone()).is_none() {
            return Err(GeometryError::NotPositiveDefinite { point: p.to_vec() });
        }
        Ok(m)
    }

    /// Inverse metric at `p`; `g · g⁻¹ = I` to machine precision.
    pub fn inverse_metric_at(&self, p: &[f64]) -> Result<DMatrix<f64>, GeometryError> {
        let g = self.metric_at(p)?;
        let chol = nalgebra::Cholesky::new(g.clone())
            .ok_or_else(|| GeometryError::NotPositiveDefinite { point: p.to_vec() })?;
        Ok(chol.inverse())
    }

    /// Evaluate every metric entry as a Taylor jet of the given order at `p`
    /// (row-major `n²` vector).
    pub fn entry_jets(&self, p: &[f64], ctx: &Arc<JetCtx>) -> Result<Vec<Jet>, GeometryError> {
        self.check_domain(p)?;
        let n = self.dim;
        assert_eq!(ctx.nvars, n);
        let vars = Jet::variables(ctx, p);
        let mut out: Vec<Jet> = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                if j < i {
                    out.push(out[j * n + i].clone());
                } else {
                    out.push(self.g[i * n + j].eval_scalar(&vars)?);
                }
            }
        }
        Ok(out)
    }

    /// Metric derivatives at `p` up to `order` (1, 2 or 3): arrays
    /// `∂_k g_ij`, `∂_k ∂_l g_ij`, `∂_k ∂_l ∂_m g_ij`, exact.
    pub fn metric_derivs_at(&self, p: &[f64], order: usize) -> Result<MetricDerivs, GeometryError> {
        assert!((1..=3).contains(&order), "derivative order must be 1..=3");
        let n = self.dim;
        let ctx = JetCtx::new(n, order);
        let jets = self.entry_jets(p, &ctx)?;
        let mut dg = vec![0.0; n * n * n];
        let mut ddg = if order >= 2 {
            vec![0.0; n * n * n * n]
        } else {
            Vec::new()
        };
        let mut dddg = if order >= 3 {
            vec![0.0; n * n * n * n * n]
        } else {
            Vec::new()
        };
        let mut alpha = vec![0u8; n];
        for i in 0..n {
            for j in 0..n {
                let jet = &jets[i * n + j];
                for k in 0..n {
                    alpha.iter_mut().for_each(|a| *a = 0);
                    alpha[k] += 1;
                    dg[(k * n + i) * n + j] = jet.deriv(&alpha);
                    if order >= 2 {
                        for l in 0..n {
                            alpha.iter_mut().for_each(|a| *a = 0);
                            alpha[k] += 1;
                            alpha[l] += 1;
                            ddg[((k * n + l) * n + i) * n + j] = jet.deriv(&alpha);
                            if order >= 3 {
                                for m in 0..n {
                                    alpha.iter_mut().for_each(|a| *a = 0);
                                    alpha[k] += 1;
                                    alpha[l] += 1;
                                    alpha[m] += 1;
                                    dddg[(((k * n + l) * n + m) * n + i) * n + j] =
                                        jet.deriv(&alpha);
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(MetricDerivs {
            n,
            order,
            dg,
            ddg,
            dddg,
        })
    }

    /// Conformal rescale `ĝ = e^{2f} g`; returns the new spec and the
    /// recorded `Υ = df`.
    pub fn rescale(&self, f: Expression) -> Result<(MetricSpec, ConformalRescale), GeometryError> {
        if f.max_var_bound() > self.dim {
            return Err(GeometryError::Invalid(
                "rescale function references a coordinate beyond the dimension".to_string(),
            ));
        }
        let f = f.folded();
        let factor = Expression::unary(
            crate::expr::UnaryOp::Exp,
            Expression::mul(Expression::Const(2.0), f.clone()),
        );
        let n = self.dim;
        let mut upper = Vec::new();
        for i in 0..n {
            for j in i..n {
                let e = self.entry(i, j);
                if matches!(e, Expression::Const(c) if *c == 0.0) {
                    continue;
                }
                upper.push((
                    (i, j),
                    Expression::mul(factor.clone(), e.clone()).folded(),
                ));
            }
        }
        let spec = MetricSpec::new(
            self.coords.clone(),
            upper,
            self.domain.clone(),
            self.basepoint.clone(),
            format!("rescaled({})", self.label),
        )?;
        let upsilon = (0..n).map(|i| f.differentiate(i)).collect();
        Ok((spec, ConformalRescale { f, upsilon }))
    }

    /// Deterministic sample points, uniform in the domain box shrunk by a
    /// 10% margin on each side.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                self.domain
                    .iter()
                    .map(|&(lo, hi)| {
                        let margin = 0.1 * (hi - lo);
                        rng.random_range((lo + margin)..(hi - margin))
                    })
                    .collect()
            })
            .collect()
    }
}

/// Exact metric derivative arrays at a point.
///
/// Layouts (row-major, `n = dim`): `dg[k][i][j]`, `ddg[k][l][i][j]`,
/// `dddg[k][l][m][i][j]`, all fully symmetric in the derivative indices and
/// in `(i, j)`.
#[derive(Debug, Clone)]
pub struct MetricDerivs {
    pub n: usize,
    pub order: usize,
    pub dg: Vec<f64>,
    pub ddg: Vec<f64>,
    pub dddg: Vec<f64>,
}

impl MetricDerivs {
    pub fn dg(&self, k: usize, i: usize, j: usize) -> f64 {
        self.dg[(k * self.n + i) * self.n + j]
    }
    pub fn ddg(&self, k: usize, l: usize, i: usize, j: usize) -> f64 {
        self.ddg[((k * self.n + l) * self.n + i) * self.n + j]
    }
    pub fn dddg(&self, k: usize, l: usize, m: usize, i: usize, j: usize) -> f64 {
        self.dddg[(((k * self.n + l) * self.n + m) * self.n + i) * self.n + j]
    }
}

/// Block-diagonal juxtaposition of two charts.
///
/// Coordinates of the second factor are renamed on clashes (suffix `_2`);
/// its expressions are index-shifted past the first factor's coordinates.
pub fn product(a: &MetricSpec, b: &MetricSpec) -> MetricSpec {
    let l = a.dim;
    let mut coords: Vec<String> = a.coords.clone();
    for c in &b.coords {
        let mut name = c.clone();
        while coords.contains(&name) {
            name.push_str("_2");
        }
        coords.push(name);
    }
    let mut upper = Vec::new();
    for i in 0..l {
        for j in i..l {
            upper.push(((i, j), a.entry(i, j).clone()));
        }
    }
    for i in 0..b.dim {
        for j in i..b.dim {
            let shifted = b.entry(i, j).remap_vars(&|v| v + l);
            upper.push(((l + i, l + j), shifted));
        }
    }
    let mut domain = a.domain.clone();
    domain.extend_from_slice(&b.domain);
    let mut basepoint = a.basepoint.clone();
    basepoint.extend_from_slice(&b.basepoint);
    MetricSpec::new(
        coords,
        upper,
        domain,
        basepoint,
        format!("{} x {}", a.label, b.label),
    )
    .expect("product of valid metrics is valid")
}

/// Parse the manifest format:
///
/// ```text
/// # comment
/// dimension = 2
/// coords = theta, phi
/// metric[1][1] = 1
/// metric[2][2] = sin(theta)^2
/// domain[1] = 0.2, 2.941592653589793
/// domain[2] = 0.2, 6.083185307179587
/// basepoint = 1.5707963267948966, 1.0
/// label = unit sphere
/// ```
///
/// Indices are 1-based; only the upper triangle is given (symmetry is
/// implied) and unset entries are zero.
pub fn parse_manifest(text: &str) -> Result<MetricSpec, ManifestError> {
    let err = |line: usize, message: String| ManifestError { line, message };
    let mut dimension: Option<usize> = None;
    let mut coords: Option<Vec<String>> = None;
    let mut entries: Vec<(usize, (usize, usize), String)> = Vec::new();
    let mut domain: Vec<Option<(f64, f64)>> = Vec::new();
    let mut basepoint: Option<Vec<f64>> = None;
    let mut label: Option<String> = None;
    let mut domain_lines: Vec<(usize, usize, String)> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(lineno, "expected `key = value`".to_string()))?;
        let key = key.trim();
        let value = value.trim();
        if key == "dimension" {
            let d: usize = value
                .parse()
                .map_err(|_| err(lineno, format!("invalid dimension `{}`", value)))?;
            dimension = Some(d);
        } else if key == "coords" {
            let names: Vec<String> = value
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if names.is_empty() {
                return Err(err(lineno, "empty coordinate list".to_string()));
            }
            for (i, a) in names.iter().enumerate() {
                if names[..i].contains(a) {
                    return Err(err(lineno, format!("duplicate coordinate `{}`", a)));
                }
            }
            coords = Some(names);
        } else if let Some(rest) = key.strip_prefix("metric[") {
            let (i, j) = parse_two_indices(rest)
                .ok_or_else(|| err(lineno, format!("malformed metric key `{}`", key)))?;
            entries.push((lineno, (i, j), value.to_string()));
        } else if let Some(rest) = key.strip_prefix("domain[") {
            let i = rest
                .strip_suffix(']')
                .and_then(|s| s.trim().parse::<usize>().ok())
                .ok_or_else(|| err(lineno, format!("malformed domain key `{}`", key)))?;
            domain_lines.push((lineno, i, value.to_string()));
        } else if key == "basepoint" {
            let vals = parse_float_list(value)
                .ok_or_else(|| err(lineno, format!("invalid basepoint `{}`", value)))?;
            basepoint = Some(vals);
        } else if key == "label" {
            label = Some(value.to_string());
        } else {
            return Err(err(lineno, format!("unknown key `{}`", key)));
        }
    }

    let dim = dimension.ok_or_else(|| err(0, "missing `dimension`".to_string()))?;
    let coords = coords.ok_or_else(|| err(0, "missing `coords`".to_string()))?;
    if coords.len() != dim {
        return Err(err(
            0,
            format!("`coords` lists {} names but dimension is {}", coords.len(), dim),
        ));
    }
    domain.resize(dim, None);
    for (lineno, i, value) in domain_lines {
        if i == 0 || i > dim {
            return Err(err(lineno, format!("domain index {} out of range 1..={}", i, dim)));
        }
        let vals = parse_float_list(&value)
            .filter(|v| v.len() == 2)
            .ok_or_else(|| err(lineno, format!("domain needs `lo, hi`, got `{}`", value)))?;
        domain[i - 1] = Some((vals[0], vals[1]));
    }
    let domain: Vec<(f64, f64)> = domain
        .into_iter()
        .enumerate()
        .map(|(i, d)| d.ok_or_else(|| err(0, format!("missing `domain[{}]`", i + 1))))
        .collect::<Result<_, _>>()?;
    let basepoint = basepoint.ok_or_else(|| err(0, "missing `basepoint`".to_string()))?;
    let coord_refs: Vec<&str> = coords.iter().map(|s| s.as_str()).collect();
    let mut upper = Vec::new();
    for (lineno, (i, j), text) in entries {
        if i == 0 || j == 0 || i > dim || j > dim {
            return Err(err(
                lineno,
                format!("metric index ({}, {}) out of range 1..={}", i, j, dim),
            ));
        }
        if i > j {
            return Err(err(
                lineno,
                format!(
                    "metric entries must be given with row <= column, got ({}, {})",
                    i, j
                ),
            ));
        }
        let e = Expression::parse(&text, &coord_refs)
            .map_err(|e: ParseError| err(lineno, e.to_string()))?;
        upper.push(((i - 1, j - 1), e));
    }
    MetricSpec::new(
        coords,
        upper,
        domain,
        basepoint,
        label.unwrap_or_else(|| "manifest".to_string()),
    )
    .map_err(|e| err(0, e.to_string()))
}

fn parse_two_indices(rest: &str) -> Option<(usize, usize)> {
    // rest looks like "1][2]"
    let (a, b) = rest.split_once("][")?;
    let b = b.strip_suffix(']')?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn parse_float_list(s: &str) -> Option<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().ok())
        .collect()
}

/// Emit a manifest that re-parses to the same metric.
pub fn emit_manifest(m: &MetricSpec) -> String {
    use std::fmt::Write;
    let names = m.coord_refs();
    let mut out = String::new();
    writeln!(out, "# {} (dimension {})", m.label(), m.dim()).unwrap();
    writeln!(out, "dimension = {}", m.dim()).unwrap();
    writeln!(out, "coords = {}", m.coords().join(", ")).unwrap();
    for i in 0..m.dim() {
        for j in i..m.dim() {
            let e = m.entry(i, j);
            if matches!(e, Expression::Const(c) if *c == 0.0) {
                continue;
            }
            writeln!(out, "metric[{}][{}] = {}", i + 1, j + 1, e.print(&names)).unwrap();
        }
    }
    for (i, (lo, hi)) in m.domain().iter().enumerate() {
        writeln!(
            out,
            "domain[{}] = {}, {}",
            i + 1,
            crate::expr::fmt_f64(*lo),
            crate::expr::fmt_f64(*hi)
        )
        .unwrap();
    }
    let bp: Vec<String> = m.basepoint().iter().map(|v| crate::expr::fmt_f64(*v)).collect();
    writeln!(out, "basepoint = {}", bp.join(", ")).unwrap();
    writeln!(out, "label = {}", m.label()).unwrap();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;

    #[test]
    fn metric_at_oracles() {
        // Unit S² in polar coordinates at the equator.
        let s2 = catalogue::sphere(2, 1.0);
        let g = s2.metric_at(&[std::f64::consts::FRAC_PI_2, 1.0]).unwrap();
        assert!((g[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((g[(1, 1)] - 1.0).abs() < 1e-15);
        assert!(g[(0, 1)].abs() < 1e-15);

        // Flat ℝ³ is the identity anywhere.
        let f3 = catalogue::flat(3);
        let g = f3.metric_at(&[0.3, -0.2, 1.0]).unwrap();
        assert_eq!(g, DMatrix::identity(3, 3));

        // Hyperbolic half-space H² (curvature −1) at (0, 2): 1/y² = 1/4.
        let h2 = catalogue::hyperbolic(2, -1.0);
        let g = h2.metric_at(&[0.0, 2.0]).unwrap();
        assert!((g[(0, 0)] - 0.25).abs() < 1e-15);
        assert!((g[(1, 1)] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn inverse_metric_oracles() {
        let s2 = catalogue::sphere(2, 1.0);
        let p = [std::f64::consts::FRAC_PI_3, 1.0];
        let inv = s2.inverse_metric_at(&p).unwrap();
        // diag(1, sin²θ)⁻¹ at θ = π/3 → diag(1, 4/3)
        assert!((inv[(0, 0)] - 1.0).abs() < 1e-12);
        assert!((inv[(1, 1)] - 4.0 / 3.0).abs() < 1e-12);

        for m in [catalogue::flat(4), catalogue::eguchi_hanson(1.0)] {
            for p in m.sample_points(5, 1) {
                let g = m.metric_at(&p).unwrap();
                let gi = m.inverse_metric_at(&p).unwrap();
                let id = &g * &gi;
                let err = (&id - DMatrix::identity(m.dim(), m.dim()))
                    .iter()
                    .fold(0.0f64, |a, v| a.max(v.abs()));
                assert!(err < 1e-12, "{}: g·g⁻¹ deviates by {}", m.label(), err);
            }
        }
    }

    #[test]
    fn metric_derivs_oracles() {
        // Flat: all derivative arrays vanish.
        let f3 = catalogue::flat(3);
        let d = f3.metric_derivs_at(&[0.1, 0.2, 0.3], 3).unwrap();
        assert!(d.dg.iter().all(|v| *v == 0.0));
        assert!(d.dddg.iter().all(|v| *v == 0.0));

        // S²: ∂_θ g_φφ = 2 sinθ cosθ = 1 at θ = π/4.
        let s2 = catalogue::sphere(2, 1.0);
        let d = s2
            .metric_derivs_at(&[std::f64::consts::FRAC_PI_4, 1.0], 2)
            .unwrap();
        assert!((d.dg(0, 1, 1) - 1.0).abs() < 1e-12);

        // Symmetry of second derivatives at random points.
        let eh = catalogue::eguchi_hanson(1.0);
        for p in eh.sample_points(3, 2) {
            let d = eh.metric_derivs_at(&p, 2).unwrap();
            let n = eh.dim();
            for k in 0..n {
                for l in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let a = d.ddg(k, l, i, j);
                            let b = d.ddg(l, k, i, j);
                            assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn metric_derivs_match_finite_differences() {
        let eh = catalogue::eguchi_hanson(1.0);
        let p = eh.basepoint().clone();
        let d = eh.metric_derivs_at(&p, 1).unwrap();
        let h = 1e-5;
        for k in 0..eh.dim() {
            let mut pp = p.clone();
            let mut pm = p.clone();
            pp[k] += h;
            pm[k] -= h;
            let gp = eh.metric_at(&pp).unwrap();
            let gm = eh.metric_at(&pm).unwrap();
            for i in 0..eh.dim() {
                for j in 0..eh.dim() {
                    let fd = (gp[(i, j)] - gm[(i, j)]) / (2.0 * h);
                    assert!(
                        (fd - d.dg(k, i, j)).abs() < 1e-6 * (1.0 + fd.abs()),
                        "∂_{} g_{}{}: fd {} vs jet {}",
                        k,
                        i,
                        j,
                        fd,
                        d.dg(k, i, j)
                    );
                }
            }
        }
    }

    #[test]
    fn rescale_identity_and_homothety() {
        let f2 = catalogue::flat(2);
        let (same, r) = f2.rescale(Expression::Const(0.0)).unwrap();
        let p = [0.4, -0.7];
        assert_eq!(same.metric_at(&p).unwrap(), f2.metric_at(&p).unwrap());
        assert!(r.upsilon_at(&p).unwrap().iter().all(|v| *v == 0.0));

        // f = log 2 → metric 4·I, Υ = 0.
        let (four, r) = f2
            .rescale(Expression::Const(2.0f64.ln()))
            .unwrap();
        let g = four.metric_at(&p).unwrap();
        assert!((g[(0, 0)] - 4.0).abs() < 1e-12);
        assert!((g[(1, 1)] - 4.0).abs() < 1e-12);
        assert!(r.upsilon_at(&p).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn product_blocks() {
        let a = catalogue::sphere(2, 1.0);
        let b = catalogue::sphere(2, 2.0);
        let prod = product(&a, &b);
        assert_eq!(prod.dim(), 4);
        // Coordinates de-clash.
        let mut names = prod.coords().to_vec();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 4);
        for p in prod.sample_points(5, 3) {
            let g = prod.metric_at(&p).unwrap();
            let ga = a.metric_at(&p[..2]).unwrap();
            let gb = b.metric_at(&p[2..]).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(g[(i, j)], ga[(i, j)]);
                    assert_eq!(g[(2 + i, 2 + j)], gb[(i, j)]);
                    assert_eq!(g[(i, 2 + j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn domain_violations_are_reported() {
        let s2 = catalogue::sphere(2, 1.0);
        let err = s2.metric_at(&[0.0, 1.0]).unwrap_err();
        assert!(matches!(err, GeometryError::DomainViolation { index: 0, .. }));
    }

    #[test]
    fn manifest_round_trip() {
        for m in [
            catalogue::sphere(3, 1.0),
            catalogue::eguchi_hanson(1.0),
            catalogue::hyperbolic(4, -1.0),
        ] {
            let text = emit_manifest(&m);
            let back = parse_manifest(&text).unwrap_or_else(|e| {
                panic!("round trip of {} failed: {}\n{}", m.label(), e, text)
            });
            assert_eq!(back.dim(), m.dim());
            for p in m.sample_points(100, 4) {
                let a = m.metric_at(&p).unwrap();
                let b = back.metric_at(&p).unwrap();
                let err = (&a - &b).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                let scale = a.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                assert!(err <= 1e-12 * (1.0 + scale));
            }
        }
    }

    #[test]
    fn manifest_errors_carry_line_numbers() {
        let text = "dimension = 2\ncoords = x, y\nmetric[0][1] = 1\ndomain[1] = 0, 1\ndomain[2] = 0, 1\nbasepoint = 0.5, 0.5\n";
        let err = parse_manifest(text).unwrap_err();
        assert_eq!(err.line, 3);
        let text2 = "dimension = 2\ncoords = x, y\nmetric[2][1] = 1\ndomain[1] = 0, 1\ndomain[2] = 0, 1\nbasepoint = 0.5, 0.5\n";
        let err2 = parse_manifest(text2).unwrap_err();
        assert!(err2.message.contains("row <= column"));
        let text3 = "dimension = 2\ncoords = x, y\nmetric[1][1] = foo\ndomain[1] = 0, 1\ndomain[2] = 0, 1\nbasepoint = 0.5, 0.5\n";
        let err3 = parse_manifest(text3).unwrap_err();
        assert_eq!(err3.line, 3);
        assert!(err3.message.contains("unknown identifier"));
    }
}
