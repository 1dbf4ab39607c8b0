//! The metric cone over a positive Einstein base: h = (1/μ)dt² + t²g
//! with μ = λ/(n−1).  The cone is Ricci-flat, its Levi-Civita connection
//! satisfies four closed-form identities, and its metric holonomy matches
//! the tractor holonomy of the base.

use thiserror::Error;

use crate::curvature::{curvature_at, einstein_fit, CurvatureError};
use crate::expr::Expression;
use crate::geometry::{GeometryError, MetricSpec};
use crate::holonomy::{
    classify_at, infinitesimal_algebra, metric_algebra, HolonomyError,
};

#[derive(Debug, Error)]
pub enum ConeError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
    #[error("base is not Einstein: relative spread {0:.3e}")]
    NotEinstein(f64),
    #[error("cone needs a positive Einstein constant, got lambda = {0:.6}")]
    NonPositiveLambda(f64),
}

/// A cone (t ∈ (0.1, 4.0)) × base with h_tt = 1/μ and h_ij = t²·g_ij.
pub struct ConeSpec {
    pub base: MetricSpec,
    pub lambda: f64,
    pub mu: f64,
    pub cone: MetricSpec,
}

/// Build the metric cone over an Einstein base with λ > 0.  The Einstein
/// constant is estimated by a least-squares fit of Ric against g over 20
/// sample points; the cone coordinates are (t, base coordinates) with the
/// domain floor t = 0.1 keeping clear of the tip.
pub fn build_cone(base: &MetricSpec) -> Result<ConeSpec, ConeError> {
    let fit = einstein_fit(base, 20, 0)?;
    if !fit.einstein {
        return Err(ConeError::NotEinstein(fit.spread));
    }
    if fit.lambda <= 0.0 {
        return Err(ConeError::NonPositiveLambda(fit.lambda));
    }
    let n = base.dim();
    let mu = fit.lambda / (n as f64 - 1.0);

    let mut coords = Vec::with_capacity(n + 1);
    let mut t_name = "t".to_string();
    while base.coords().contains(&t_name) {
        t_name.push('_');
    }
    coords.push(t_name);
    coords.extend(base.coords().iter().cloned());

    let t_sq = Expression::pow(Expression::var(0), 2.0);
    let mut upper = vec![((0, 0), Expression::constant(1.0 / mu))];
    for i in 0..n {
        for j in i..n {
            let e = base.entry(i, j).clone().remap_vars(&|v| v + 1);
            upper.push(((i + 1, j + 1), Expression::mul(t_sq.clone(), e)));
        }
    }

    let mut domain = vec![(0.1, 4.0)];
    domain.extend_from_slice(base.domain());
    let mut basepoint = vec![1.0];
    basepoint.extend_from_slice(base.basepoint());
    let label = format!("cone({})", base.label());
    let cone = MetricSpec::new(coords, upper, domain, basepoint, label)?;
    Ok(ConeSpec {
        base: base.clone(),
        lambda: fit.lambda,
        mu,
        cone,
    })
}

/// Residuals of the four cone connection identities at a cone point:
/// ∇_T T = 0, ∇_X T = (1/t)X, ∇_T X = (1/t)X, and
/// ∇_{X_i}X_j = base ∇ − tμ·g_ij·T.
pub struct ChristoffelReport {
    pub residuals: [f64; 4],
    pub max_residual: f64,
}

pub fn verify_cone_christoffels(
    c: &ConeSpec,
    p: &[f64],
) -> Result<ChristoffelReport, ConeError> {
    c.cone.check_domain(p)?;
    let n = c.base.dim();
    let t = p[0];
    let cone = curvature_at(&c.cone, p)?;
    let base = curvature_at(&c.base, &p[1..])?;

    // ∇_T T = 0: every Γ^μ_tt vanishes.
    let mut r1 = 0.0f64;
    for m in 0..=n {
        r1 = r1.max(cone.gamma(m, 0, 0).abs());
    }
    // ∇_{X_i} T = (1/t) X_i: Γ^a_it = δ^a_i/t, Γ^t_it = 0.
    let mut r2 = 0.0f64;
    for i in 1..=n {
        for a in 1..=n {
            let expect = if a == i { 1.0 / t } else { 0.0 };
            r2 = r2.max((cone.gamma(a, i, 0) - expect).abs());
        }
        r2 = r2.max(cone.gamma(0, i, 0).abs());
    }
    // ∇_T X_i = (1/t) X_i: the same with the lower indices swapped.
    let mut r3 = 0.0f64;
    for i in 1..=n {
        for a in 1..=n {
            let expect = if a == i { 1.0 / t } else { 0.0 };
            r3 = r3.max((cone.gamma(a, 0, i) - expect).abs());
        }
        r3 = r3.max(cone.gamma(0, 0, i).abs());
    }
    // ∇_{X_i} X_j = base connection − tμ g(X_i, X_j) T.
    let mut r4 = 0.0f64;
    for i in 1..=n {
        for j in 1..=n {
            for a in 1..=n {
                r4 = r4.max((cone.gamma(a, i, j) - base.gamma(a - 1, i - 1, j - 1)).abs());
            }
            let expect = -t * c.mu * base.g[(i - 1, j - 1)];
            r4 = r4.max((cone.gamma(0, i, j) - expect).abs());
        }
    }
    let residuals = [r1, r2, r3, r4];
    let max_residual = residuals.iter().fold(0.0f64, |m, v| m.max(*v));
    Ok(ChristoffelReport {
        residuals,
        max_residual,
    })
}

/// Max |Ric| of the cone over `npoints` seeded sample points plus the
/// base point.
pub fn verify_ricci_flat(c: &ConeSpec, npoints: usize, seed: u64) -> Result<f64, ConeError> {
    let mut worst = 0.0f64;
    let mut points = vec![c.cone.basepoint().clone()];
    points.extend(c.cone.sample_points(npoints, seed));
    for p in points {
        worst = worst.max(curvature_at(&c.cone, &p)?.ricci_max());
    }
    Ok(worst)
}

/// Max |R^i_jkl| of the cone over entries with any index in the radial
/// direction (the cone curvature has no T components).
pub fn radial_curvature_residual(c: &ConeSpec, p: &[f64]) -> Result<f64, ConeError> {
    let pack = curvature_at(&c.cone, p)?;
    let n = c.cone.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if i == 0 || j == 0 || k == 0 || l == 0 {
                        worst = worst.max(pack.riemann(i, j, k, l).abs());
                    }
                }
            }
        }
    }
    Ok(worst)
}

/// Restricting the cone to {t = 1} recovers the base metric as symbolic
/// expressions.
pub fn restriction_matches_base(c: &ConeSpec) -> bool {
    let n = c.base.dim();
    for i in 0..n {
        for j in 0..n {
            let restricted = c.cone.entry(i + 1, j + 1).clone().substitute(0, 1.0).folded();
            let expected = c.base.entry(i, j).clone().remap_vars(&|v| v + 1).folded();
            if restricted != expected {
                return false;
            }
        }
    }
    true
}

/// Comparison of the base tractor algebra with the cone metric algebra.
pub struct IsomorphismReport {
    pub base_dim: usize,
    pub cone_dim: usize,
    pub agree: bool,
    /// Labels are suppressed for two-dimensional bases.
    pub base_label: Option<String>,
    pub cone_label: Option<String>,
}

/// Estimate both algebras (base tractor bundle, cone tangent bundle) and
/// compare their dimensions; for bases of dimension ≥ 3 also report the
/// classification labels as evidence.
pub fn verify_holonomy_isomorphism(
    base: &MetricSpec,
    max_order: usize,
    tol: f64,
) -> Result<(ConeSpec, IsomorphismReport), ConeError> {
    let c = build_cone(base)?;
    let base_basis = infinitesimal_algebra(base, base.basepoint(), max_order, tol)?;
    let cone_basis = metric_algebra(&c.cone, c.cone.basepoint(), max_order, tol)?;
    let agree = base_basis.dim == cone_basis.dim;
    let (base_label, cone_label) = if base.dim() >= 3 {
        (
            Some(classify_at(base, &base_basis)?.label),
            Some(classify_at(&c.cone, &cone_basis)?.label),
        )
    } else {
        (None, None)
    };
    let report = IsomorphismReport {
        base_dim: base_basis.dim,
        cone_dim: cone_basis.dim,
        agree,
        base_label,
        cone_label,
    };
    Ok((c, report))
}
