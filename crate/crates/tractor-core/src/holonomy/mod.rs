//! Numerical estimation of holonomy Lie algebras — of the tractor
//! connection or of the Levi-Civita connection — together with a
//! classification of the resulting algebra.
//!
//! Two independent estimators are provided behind a common registry:
//! the infinitesimal method (span of curvature and its covariant
//! derivatives at a point) and the shrinking-loop method (matrix
//! logarithms of small-rectangle parallel transports).  Their agreement
//! on every built-in metric is part of the test suite.

pub(crate) mod classify;
mod infinitesimal;
mod loops;

pub use classify::{classify, classify_at, Classification, FixedVector};
pub use infinitesimal::{infinitesimal_algebra, metric_algebra};
pub use loops::{loop_algebra, loop_order_check, LoopLog, LoopReport};

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::curvature::CurvatureError;
use crate::geometry::{GeometryError, MetricSpec};
use crate::linalg::{residual_outside_span, span_reduce, LinalgError};
use crate::tractor::TractorError;

#[derive(Debug, Error)]
pub enum HolonomyError {
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Tractor(#[from] TractorError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("derivative depth {0} exceeds the supported maximum of 3")]
    DepthTooLarge(usize),
    #[error("loop of size {size} in the ({i}, {j}) plane leaves the domain")]
    LoopOutsideDomain { i: usize, j: usize, size: f64 },
    #[error("projection check requires a Ricci-flat metric, max |Ric| = {0:.3e}")]
    NotRicciFlat(f64),
}

/// Which connection the algebra lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bundle {
    /// The rank-(n+2) tractor connection; elements are (n+2)×(n+2).
    Tractor,
    /// The Levi-Civita connection on the tangent bundle; elements n×n.
    Metric,
}

impl Bundle {
    pub fn matrix_size(&self, n: usize) -> usize {
        match self {
            Bundle::Tractor => n + 2,
            Bundle::Metric => n,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Bundle::Tractor => "tractor",
            Bundle::Metric => "metric",
        }
    }
}

/// An estimated holonomy algebra: an orthonormal (Frobenius) basis of the
/// span, with the singular-value audit trail of the spanning process.
#[derive(Debug, Clone)]
pub struct AlgebraBasis {
    pub bundle: Bundle,
    /// Matrix side length (n+2 for tractor, n for metric).
    pub size: usize,
    pub elements: Vec<DMatrix<f64>>,
    pub dim: usize,
    /// Singular values of the raw spanning process, descending.
    pub singular_values: Vec<f64>,
    /// Ratio of the last kept to the first dropped singular value.
    pub gap: f64,
    /// True when the spectral gap around the rank threshold is < 10².
    pub indeterminate: bool,
    /// Relative rank threshold used (σ > tol·σ_max).
    pub tol: f64,
    /// Largest relative residual of a pairwise bracket outside the span.
    pub closure_residual: f64,
}

impl AlgebraBasis {
    /// Fixed vectors: the common kernel of all elements, tagged with
    /// norm signs under `gram` (−1, 0, +1 with a 1e-7 null window).
    pub fn fixed_vectors(&self, gram: &DMatrix<f64>) -> Vec<FixedVector> {
        let kern = crate::linalg::common_kernel(&self.elements, self.size, self.tol.max(1e-9));
        kern.into_iter()
            .map(|v| {
                let norm = (v.transpose() * gram * &v)[(0, 0)];
                let sign = if norm.abs() < 1e-7 {
                    0
                } else if norm > 0.0 {
                    1
                } else {
                    -1
                };
                FixedVector { v, norm, sign }
            })
            .collect()
    }

    /// Largest violation of skewness `BᵀG + GB = 0` over the basis.
    pub fn skewness_residual(&self, gram: &DMatrix<f64>) -> f64 {
        self.elements
            .iter()
            .map(|b| (b.transpose() * gram + gram * b).amax() / b.amax().max(1e-300))
            .fold(0.0, f64::max)
    }
}

pub(crate) fn vectorize(m: &DMatrix<f64>) -> DVector<f64> {
    let (r, c) = m.shape();
    DVector::from_fn(r * c, |i, _| m[(i / c, i % c)])
}

fn unvectorize(v: &DVector<f64>, size: usize) -> DMatrix<f64> {
    DMatrix::from_fn(size, size, |i, j| v[i * size + j])
}

/// Reduce raw candidate matrices to an orthonormal basis, close it under
/// pairwise brackets (at most 3 rounds), and package the result.  The
/// recorded singular spectrum is that of the raw candidates, which is the
/// auditable object; bracket closure normally adds little for a true
/// holonomy algebra.
///
/// `noise` bounds the error of the stacked unit rows (`‖E‖₂`-style);
/// pass 0 for exact inputs.  It widens the rank threshold, and it sets
/// the bracket floor: a basis direction carried by a trailing singular
/// value `σ` is only located to within `noise/σ`, so bracket components
/// below that (times a safety margin) are indistinguishable from noise
/// and must not grow the span.
pub(crate) fn span_basis(
    candidates: &[DMatrix<f64>],
    bundle: Bundle,
    size: usize,
    tol: f64,
    noise: f64,
) -> AlgebraBasis {
    let rows: Vec<DVector<f64>> = candidates.iter().map(vectorize).collect();
    let tol = tol.max(10.0 * noise);
    let raw = span_reduce(&rows, tol);
    let mut basis: Vec<DMatrix<f64>> = raw.basis.iter().map(|v| unvectorize(v, size)).collect();
    let sigma_rel_last = if raw.dim > 0 {
        raw.singular_values[raw.dim - 1] / raw.singular_values[0]
    } else {
        1.0
    };
    let bracket_floor = (25.0 * noise / sigma_rel_last).clamp(1e-8, 1.0);
    // Bracket closure grows the span only by the component of a bracket
    // outside it; normalizing a remnant below the floor would
    // manufacture rank out of round-off.
    for _ in 0..3 {
        let before = basis.len();
        let mut grown: Vec<DVector<f64>> = basis.iter().map(vectorize).collect();
        for i in 0..before {
            for j in i + 1..before {
                let br = &basis[i] * &basis[j] - &basis[j] * &basis[i];
                let mut rem = vectorize(&br);
                for b in &grown {
                    let c = b.dot(&rem);
                    rem -= c * b;
                }
                if rem.norm() > bracket_floor {
                    grown.push(rem.normalize());
                }
            }
        }
        if grown.len() == before {
            break;
        }
        let closed = span_reduce(&grown, tol);
        basis = closed.basis.iter().map(|v| unvectorize(v, size)).collect();
    }
    // Residual of every bracket against the final span; brackets at the
    // floor are zero within working accuracy, hence trivially inside.
    let span: Vec<DVector<f64>> = basis.iter().map(vectorize).collect();
    let mut closure_residual = 0.0f64;
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            let br = &basis[i] * &basis[j] - &basis[j] * &basis[i];
            if br.norm() > bracket_floor {
                let res = residual_outside_span(&span, &vectorize(&br));
                closure_residual = closure_residual.max(res);
            }
        }
    }
    AlgebraBasis {
        bundle,
        size,
        dim: basis.len(),
        elements: basis,
        singular_values: raw.singular_values,
        gap: raw.gap,
        indeterminate: raw.indeterminate,
        tol,
        closure_residual,
    }
}

/// Options consumed by [`AlgebraEstimator`] implementations.
#[derive(Debug, Clone)]
pub struct EstimatorOptions {
    pub bundle: Bundle,
    /// Evaluation point; the chart base point when absent.
    pub point: Option<Vec<f64>>,
    /// Covariant-derivative depth for the infinitesimal method (max 3).
    pub max_order: usize,
    /// Rectangle sizes for the loop method.
    pub sizes: Vec<f64>,
    /// RK4 step count per loop.
    pub steps: usize,
    pub tol: f64,
}

impl Default for EstimatorOptions {
    fn default() -> EstimatorOptions {
        EstimatorOptions {
            bundle: Bundle::Tractor,
            point: None,
            max_order: 2,
            sizes: vec![0.2, 0.1, 0.05],
            steps: 240,
            tol: 1e-7,
        }
    }
}

/// A strategy for estimating the holonomy algebra of a metric.  The two
/// registered strategies can be cross-validated against each other.
pub trait AlgebraEstimator {
    fn name(&self) -> &'static str;
    fn estimate(
        &self,
        m: &MetricSpec,
        opts: &EstimatorOptions,
    ) -> Result<AlgebraBasis, HolonomyError>;
}

struct InfinitesimalEstimator;

impl AlgebraEstimator for InfinitesimalEstimator {
    fn name(&self) -> &'static str {
        "infinitesimal"
    }

    fn estimate(
        &self,
        m: &MetricSpec,
        opts: &EstimatorOptions,
    ) -> Result<AlgebraBasis, HolonomyError> {
        let p = opts.point.clone().unwrap_or_else(|| m.basepoint().clone());
        infinitesimal::tower_algebra(m, &p, opts.max_order, opts.tol, opts.bundle)
    }
}

struct LoopEstimator;

impl AlgebraEstimator for LoopEstimator {
    fn name(&self) -> &'static str {
        "loop"
    }

    fn estimate(
        &self,
        m: &MetricSpec,
        opts: &EstimatorOptions,
    ) -> Result<AlgebraBasis, HolonomyError> {
        let p = opts.point.clone().unwrap_or_else(|| m.basepoint().clone());
        loop_algebra(m, &p, &opts.sizes, opts.steps, opts.tol, opts.bundle)
            .map(|(basis, _)| basis)
    }
}

/// All registered estimators.
pub fn estimators() -> Vec<Box<dyn AlgebraEstimator>> {
    vec![Box::new(InfinitesimalEstimator), Box::new(LoopEstimator)]
}

/// Look up an estimator by name (`"infinitesimal"` or `"loop"`).
pub fn estimator(name: &str) -> Option<Box<dyn AlgebraEstimator>> {
    estimators().into_iter().find(|e| e.name() == name)
}

/// The 𝔠𝔬-block projection of a tractor algebra element: its middle
/// n×n block, acting on the tangent space.
pub fn co_block(b: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    b.view((1, 1), (n, n)).into_owned()
}

/// For a Ricci-flat metric, check that the 𝔠𝔬-block projections of the
/// tractor algebra span exactly the metric algebra (mutual containment
/// with relative residual < tol).  Refuses non-Ricci-flat input.
pub fn projection_check(
    tractor_basis: &AlgebraBasis,
    metric_basis: &AlgebraBasis,
    m: &MetricSpec,
    tol: f64,
) -> Result<bool, HolonomyError> {
    let n = m.dim();
    let mut ric_max = 0.0f64;
    let mut pts = m.sample_points(10, 0);
    pts.push(m.basepoint().clone());
    for p in &pts {
        ric_max = ric_max.max(crate::curvature::ricci(m, p)?.amax());
    }
    if ric_max > 1e-6 {
        return Err(HolonomyError::NotRicciFlat(ric_max));
    }
    let projected: Vec<DVector<f64>> = tractor_basis
        .elements
        .iter()
        .map(|b| vectorize(&co_block(b, n)))
        .filter(|v| v.norm() > 1e-9)
        .map(|v| v.normalize())
        .collect();
    let metric_rows: Vec<DVector<f64>> = metric_basis
        .elements
        .iter()
        .map(|b| vectorize(b).normalize())
        .collect();
    let proj_span = span_reduce(&projected, tol);
    let metric_span = span_reduce(&metric_rows, tol);
    let mut worst = 0.0f64;
    for v in &projected {
        worst = worst.max(residual_outside_span(&metric_span.basis, v));
    }
    for v in &metric_rows {
        worst = worst.max(residual_outside_span(&proj_span.basis, v));
    }
    Ok(worst < tol.max(1e-9) * 10.0 && proj_span.dim == metric_span.dim)
}
