//! Products of Einstein manifolds: the decomposition coefficient
//! relation (n−l−1)λ₁ = (1−l)λ₂, the Schouten restriction property, and
//! the block structure of the product's tractor holonomy.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::curvature::{curvature_at, einstein_fit, CurvatureError};
use crate::geometry::{self, GeometryError, MetricSpec};
use crate::holonomy::{self, infinitesimal_algebra, HolonomyError};
use crate::linalg::residual_outside_span;
use crate::tractor;

#[derive(Debug, Error)]
pub enum ProductError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
    #[error("factor '{label}' is not Einstein: relative spread {spread:.3e}")]
    NotEinstein { label: String, spread: f64 },
}

fn einstein_lambda(m: &MetricSpec) -> Result<f64, ProductError> {
    let fit = einstein_fit(m, 20, 0)?;
    if !fit.einstein {
        return Err(ProductError::NotEinstein {
            label: m.label().to_string(),
            spread: fit.spread,
        });
    }
    Ok(fit.lambda)
}

/// The decomposition coefficient relation (n−l−1)λ₁ = (1−l)λ₂ for a
/// product of an l-dimensional and an (n−l)-dimensional Einstein factor.
/// Returns the verdict at tolerance 1e-9·max(|λ₁|,|λ₂|,1) and the
/// residual |(n−l−1)λ₁ − (1−l)λ₂|.
pub fn check_relation(lambda1: f64, l: usize, lambda2: f64, n: usize) -> (bool, f64) {
    assert!(l >= 1 && n > l, "need 1 <= l < n");
    let lhs = (n as f64 - l as f64 - 1.0) * lambda1;
    let rhs = (1.0 - l as f64) * lambda2;
    let residual = (lhs - rhs).abs();
    let tol = 1e-9 * lambda1.abs().max(lambda2.abs()).max(1.0);
    (residual <= tol, residual)
}

/// The Einstein sections v₁ = (1, 0, f) and v₂ = (1, 0, −f) of the
/// product tractor bundle, with f the common value both closed Schouten
/// formulas take when the relation holds.
pub fn einstein_vectors(
    lambda1: f64,
    l: usize,
    lambda2: f64,
    n: usize,
) -> (f64, DVector<f64>, DVector<f64>) {
    let (nf, lf) = (n as f64, l as f64);
    let f = -((2.0 * nf - 2.0 - lf) * lambda1 + (lf - nf) * lambda2)
        / ((nf - 2.0) * (2.0 * nf - 2.0));
    let mut v1 = DVector::zeros(n + 2);
    v1[0] = 1.0;
    v1[n + 1] = f;
    let mut v2 = DVector::zeros(n + 2);
    v2[0] = 1.0;
    v2[n + 1] = -f;
    (f, v1, v2)
}

/// Outcome of the Schouten restriction check on a product of Einstein
/// factors.
pub struct PRestriction {
    pub lambda1: f64,
    pub lambda2: f64,
    pub relation_holds: bool,
    pub relation_residual: f64,
    /// max |P(product) restricted to the first block − P(factor)|.
    pub residual: f64,
    /// max |R(product) − (l·λ₁ + (n−l)·λ₂)| over the samples.
    pub scalar_residual: f64,
}

/// Compare the Schouten tensor of the product, restricted to the first
/// factor's block, with the factor's own Schouten tensor −λ₁/(2l−2)·g₁
/// (factors are certified Einstein first, so the closed form is valid in
/// every dimension, including surfaces).  The residual vanishes exactly
/// when the coefficient relation holds.
pub fn verify_p_restriction(m1: &MetricSpec, m2: &MetricSpec) -> Result<PRestriction, ProductError> {
    let lambda1 = einstein_lambda(m1)?;
    let lambda2 = einstein_lambda(m2)?;
    let l = m1.dim();
    let prod = geometry::product(m1, m2);
    let n = prod.dim();
    let (relation_holds, relation_residual) = check_relation(lambda1, l, lambda2, n);
    let expected_scalar = l as f64 * lambda1 + (n - l) as f64 * lambda2;

    let mut points = vec![prod.basepoint().clone()];
    points.extend(prod.sample_points(9, 1));
    let mut residual = 0.0f64;
    let mut scalar_residual = 0.0f64;
    for p in points {
        let pack = curvature_at(&prod, &p)?;
        let pp = pack.p.as_ref().expect("product dimension is at least 4");
        let factor_coeff = -lambda1 / (2.0 * l as f64 - 2.0);
        for i in 0..l {
            for j in 0..l {
                let expected = factor_coeff * pack.g[(i, j)];
                residual = residual.max((pp[(i, j)] - expected).abs());
            }
        }
        scalar_residual = scalar_residual.max((pack.scalar - expected_scalar).abs());
    }
    Ok(PRestriction {
        lambda1,
        lambda2,
        relation_holds,
        relation_residual,
        residual,
        scalar_residual,
    })
}

/// Block structure of the product's tractor holonomy.
pub struct BlockHolonomyReport {
    pub lambda1: f64,
    pub lambda2: f64,
    pub relation_holds: bool,
    pub relation_residual: f64,
    pub product_dim: usize,
    pub factor_dims: (usize, usize),
    /// dim so(n+1, 1), the irreducible ceiling.
    pub full_dim: usize,
    /// Rank of the preserved non-degenerate subspace, when one is found
    /// (the decomposition predicts rank l+1).
    pub preserved_rank: Option<usize>,
    pub expected_rank: usize,
    /// Algebra dimensions restricted to the preserved block and to its
    /// orthogonal complement.
    pub block_dims: Option<(usize, usize)>,
    pub verdict: String,
}

/// Estimate the tractor holonomy of the product and test the
/// decomposition prediction: when the coefficient relation holds, a
/// non-degenerate rank-(l+1) subspace is preserved and the algebra is
/// block diagonal with blocks matching the factors' tractor algebras;
/// when it fails, the dimension (typically full) is reported.
pub fn verify_block_holonomy(
    m1: &MetricSpec,
    m2: &MetricSpec,
    max_order: usize,
    tol: f64,
) -> Result<BlockHolonomyReport, ProductError> {
    let lambda1 = einstein_lambda(m1)?;
    let lambda2 = einstein_lambda(m2)?;
    let l = m1.dim();
    let prod = geometry::product(m1, m2);
    let n = prod.dim();
    let (relation_holds, relation_residual) = check_relation(lambda1, l, lambda2, n);
    let full_dim = (n + 1) * (n + 2) / 2;
    let expected_rank = l + 1;

    let basis = infinitesimal_algebra(&prod, prod.basepoint(), max_order, tol)?;
    // Surfaces have no Schouten data of their own; an Einstein surface
    // contributes a trivial factor algebra.
    let factor_dim = |m: &MetricSpec| -> Result<usize, ProductError> {
        if m.dim() < 3 {
            return Ok(0);
        }
        Ok(infinitesimal_algebra(m, m.basepoint(), max_order, tol)?.dim)
    };
    let factor_dims = (factor_dim(m1)?, factor_dim(m2)?);
    let product_dim = basis.dim;

    if product_dim == 0 {
        return Ok(BlockHolonomyReport {
            lambda1,
            lambda2,
            relation_holds,
            relation_residual,
            product_dim,
            factor_dims,
            full_dim,
            preserved_rank: Some(expected_rank),
            expected_rank,
            block_dims: Some((0, 0)),
            verdict: "decomposable (trivial blocks)".to_string(),
        });
    }

    if !relation_holds {
        let verdict = if product_dim == full_dim {
            format!("full so({},1)", n + 1)
        } else {
            format!("no decomposition; dimension {}", product_dim)
        };
        return Ok(BlockHolonomyReport {
            lambda1,
            lambda2,
            relation_holds,
            relation_residual,
            product_dim,
            factor_dims,
            full_dim,
            preserved_rank: None,
            expected_rank,
            block_dims: None,
            verdict,
        });
    }

    // Relation holds with a non-trivial algebra: locate the preserved
    // rank-(l+1) block (or its complement) via the invariant-subspace
    // scan, certify invariance, and compare restricted dimensions.
    let g = prod.metric_at(prod.basepoint())?;
    let gram = tractor::gram(&g);
    let scan = holonomy::classify::scan_invariant_subspaces(&basis, &gram);
    let comp_rank = (n + 2) - expected_rank;
    let hit = scan
        .iter()
        .filter(|(_, nondeg)| *nondeg)
        .find(|(w, _)| w.len() == expected_rank || w.len() == comp_rank);
    let Some((w, _)) = hit else {
        return Ok(BlockHolonomyReport {
            lambda1,
            lambda2,
            relation_holds,
            relation_residual,
            product_dim,
            factor_dims,
            full_dim,
            preserved_rank: None,
            expected_rank,
            block_dims: None,
            verdict: "relation holds but no preserved block was found".to_string(),
        });
    };
    let mut invariance = 0.0f64;
    for b in &basis.elements {
        for v in w {
            invariance = invariance.max(residual_outside_span(w, &(b * v)));
        }
    }
    // G-orthogonal complement of the block.
    let mut proj = DMatrix::zeros(n + 2, n + 2);
    for v in w {
        let gv: DVector<f64> = (&gram * v).normalize();
        proj += &gv * gv.transpose();
    }
    let comp = crate::linalg::common_kernel(&[proj], n + 2, 1e-9);
    let d_block = holonomy::classify::restricted_span_dim(&basis, w);
    let d_comp = holonomy::classify::restricted_span_dim(&basis, &comp);
    let (rank, block_dims) = if w.len() == expected_rank {
        (w.len(), (d_block, d_comp))
    } else {
        (comp.len(), (d_comp, d_block))
    };
    let blocks_match = block_dims == factor_dims && d_block + d_comp == product_dim;
    let verdict = if invariance < 100.0 * tol && blocks_match {
        "block diagonal; blocks match the factor tractor algebras".to_string()
    } else {
        format!(
            "preserved block found (invariance residual {:.3e}) but block dims {:?} vs factors {:?}",
            invariance, block_dims, factor_dims
        )
    };
    Ok(BlockHolonomyReport {
        lambda1,
        lambda2,
        relation_holds,
        relation_residual,
        product_dim,
        factor_dims,
        full_dim,
        preserved_rank: Some(rank),
        expected_rank,
        block_dims: Some(block_dims),
        verdict,
    })
}
