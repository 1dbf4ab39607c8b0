//! Dense linear-algebra helpers shared by the holonomy machinery: matrix
//! exponential and principal logarithm, singular-value span reduction with
//! an auditable spectrum, common kernels, and commutant computation.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LinalgError {
    #[error("matrix square root did not converge")]
    SqrtNonConvergent,
    #[error("matrix logarithm did not converge (spectrum too far from identity)")]
    LogNonConvergent,
}

/// Matrix exponential by scaling and squaring with a truncated Taylor
/// series.
pub fn mat_exp(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.norm();
    let mut squarings = 0u32;
    let mut scaled = a.clone();
    while scaled.norm() > 0.5 && squarings < 32 {
        scaled /= 2.0;
        squarings += 1;
    }
    let _ = norm;
    let mut result = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=24 {
        term = (&term * &scaled) / k as f64;
        result += &term;
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// Square root of a matrix with spectrum in the right half plane, by the
/// Denman–Beavers iteration.
fn mat_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>, LinalgError> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::identity(n, n);
    for _ in 0..60 {
        let yi = y
            .clone()
            .try_inverse()
            .ok_or(LinalgError::SqrtNonConvergent)?;
        let zi = z
            .clone()
            .try_inverse()
            .ok_or(LinalgError::SqrtNonConvergent)?;
        let y_next = 0.5 * (&y + zi);
        let z_next = 0.5 * (&z + yi);
        let delta = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if delta < 1e-15 * (1.0 + y.norm()) {
            return Ok(y);
        }
    }
    // Accept slow convergence if the residual is already at rounding level.
    if (&y * &y - a).norm() < 1e-12 * (1.0 + a.norm()) {
        Ok(y)
    } else {
        Err(LinalgError::SqrtNonConvergent)
    }
}

/// Principal matrix logarithm by inverse scaling and squaring: take square
/// roots until the argument is close to the identity, expand
/// `log(I + X) = Σ (−1)^{m+1} X^m / m`, and scale back.
///
/// Valid for matrices with no eigenvalues on the closed negative real axis;
/// intended for holonomy matrices near the identity.
pub fn mat_log(u: &DMatrix<f64>) -> Result<DMatrix<f64>, LinalgError> {
    let n = u.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut a = u.clone();
    let mut roots = 0u32;
    while (&a - &id).norm() > 0.3 {
        if roots >= 30 {
            return Err(LinalgError::LogNonConvergent);
        }
        a = mat_sqrt(&a)?;
        roots += 1;
    }
    let x = &a - &id;
    let mut result = DMatrix::zeros(n, n);
    let mut power = id.clone();
    for m in 1..=30 {
        power = &power * &x;
        let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
        result += sign / m as f64 * &power;
    }
    Ok(result * 2f64.powi(roots as i32))
}

/// Result of reducing a list of vectors to an orthonormal basis of their
/// span, with the singular-value spectrum kept for auditing.
#[derive(Debug, Clone)]
pub struct SpanReduction {
    /// Orthonormal basis of the span (right singular vectors kept).
    pub basis: Vec<DVector<f64>>,
    /// Full singular-value spectrum, descending.
    pub singular_values: Vec<f64>,
    /// Number of singular values above `tol · σ_max`.
    pub dim: usize,
    /// Ratio between the last kept and first dropped singular value
    /// (`f64::INFINITY` when nothing is dropped or the dropped value is 0).
    pub gap: f64,
    /// True when the gap around the threshold is smaller than 10²,
    /// signalling an unreliable rank decision.
    pub indeterminate: bool,
}

/// Reduce `rows` to an orthonormal basis of their span.
///
/// Rows with norm below `1e-9 · max_norm` are dropped as noise, the rest
/// are normalized, and the rank is read off the singular values at the
/// relative threshold `tol`.
pub fn span_reduce(rows: &[DVector<f64>], tol: f64) -> SpanReduction {
    let max_norm = rows.iter().map(|r| r.norm()).fold(0.0f64, f64::max);
    let kept: Vec<DVector<f64>> = rows
        .iter()
        .filter(|r| r.norm() > 1e-9 * max_norm.max(1.0))
        .map(|r| r / r.norm())
        .collect();
    if kept.is_empty() {
        return SpanReduction {
            basis: Vec::new(),
            singular_values: Vec::new(),
            dim: 0,
            gap: f64::INFINITY,
            indeterminate: false,
        };
    }
    let ncols = kept[0].len();
    // Pad with zero rows so the thin SVD still produces all right singular
    // vectors.
    let nrows = kept.len().max(ncols);
    let mut stacked = DMatrix::zeros(nrows, ncols);
    for (i, r) in kept.iter().enumerate() {
        stacked.set_row(i, &r.transpose());
    }
    let svd = stacked.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let sv: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let smax = sv[0];
    let dim = sv.iter().filter(|&&s| s > tol * smax).count();
    let gap = if dim == 0 {
        f64::INFINITY
    } else if dim < sv.len() && sv[dim] > 0.0 {
        sv[dim - 1] / sv[dim]
    } else {
        f64::INFINITY
    };
    let basis = order[..dim]
        .iter()
        .map(|&i| vt.row(i).transpose())
        .collect();
    SpanReduction {
        basis,
        singular_values: sv,
        dim,
        gap,
        indeterminate: gap < 1e2,
    }
}

/// Frobenius distance from `v` to the span of an orthonormal `basis`,
/// relative to `‖v‖` (0 for the zero vector).
pub fn residual_outside_span(basis: &[DVector<f64>], v: &DVector<f64>) -> f64 {
    let norm = v.norm();
    if norm == 0.0 {
        return 0.0;
    }
    let mut rem = v.clone();
    for b in basis {
        let c = b.dot(&rem);
        rem -= c * b;
    }
    rem.norm() / norm
}

/// Orthonormal basis of the common kernel `{v : M v = 0 for all M}` of a
/// family of `dim × dim` matrices.  An empty family has the whole space as
/// kernel.
pub fn common_kernel(mats: &[DMatrix<f64>], dim: usize, tol: f64) -> Vec<DVector<f64>> {
    if mats.is_empty() {
        return (0..dim)
            .map(|i| {
                let mut v = DVector::zeros(dim);
                v[i] = 1.0;
                v
            })
            .collect();
    }
    let nrows = (mats.len() * dim).max(dim);
    let mut stacked = DMatrix::zeros(nrows, dim);
    for (k, m) in mats.iter().enumerate() {
        let scale = m.norm();
        let mn = if scale > 0.0 { m / scale } else { m.clone() };
        stacked.view_mut((k * dim, 0), (dim, dim)).copy_from(&mn);
    }
    let svd = stacked.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap()
    });
    let smax = svd.singular_values[order[0]].max(1e-300);
    order
        .iter()
        .filter(|&&i| svd.singular_values[i] <= tol * smax)
        .map(|&i| vt.row(i).transpose())
        .collect()
}

/// Orthonormal basis (as matrices) of the commutant
/// `{J : [B, J] = 0 for all B}` of a family of `s × s` matrices.
pub fn commutant(mats: &[DMatrix<f64>], s: usize, tol: f64) -> Vec<DMatrix<f64>> {
    // vec(BJ − JB) = (I ⊗ B − Bᵀ ⊗ I) vec(J), with column-major vec.
    let sylvesters: Vec<DMatrix<f64>> = mats
        .iter()
        .map(|b| {
            let id = DMatrix::<f64>::identity(s, s);
            id.kronecker(b) - b.transpose().kronecker(&id)
        })
        .collect();
    common_kernel(&sylvesters, s * s, tol)
        .into_iter()
        .map(|v| DMatrix::from_column_slice(s, s, v.as_slice()))
        .collect()
}
