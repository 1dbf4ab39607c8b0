//! The infinitesimal estimator: span of the curvature operators and
//! their covariant derivatives up to a fixed depth at one point.
//!
//! Derivatives are exact: the whole tower is evaluated in truncated
//! Taylor-jet arithmetic, one jet order consumed per derivative level,
//!
//! ```text
//! (∇_k F)_{a…ij} = ∂_k F_{a…ij} + [A_k, F_{a…ij}] − Σ_t Γ^m_{k aₜ} F_{…m…}
//! ```
//!
//! with `A_k` the connection matrices of the chosen bundle and one
//! Γ-correction per lower tensor index.

use nalgebra::DMatrix;

use crate::curvature::{curvature_jets, CurvatureJets};
use crate::geometry::MetricSpec;
use crate::jet::{Jet, JetCtx, Scalar};
use crate::tractor::{connection_jets, curvature_elements_jets};

use super::{span_basis, AlgebraBasis, Bundle, HolonomyError};

/// Tractor holonomy algebra at `p`: curvature plus covariant derivatives
/// up to `max_order`, bracket-closed, rank-reduced at relative
/// tolerance `tol`.
pub fn infinitesimal_algebra(
    m: &MetricSpec,
    p: &[f64],
    max_order: usize,
    tol: f64,
) -> Result<AlgebraBasis, HolonomyError> {
    tower_algebra(m, p, max_order, tol, Bundle::Tractor)
}

/// Same machinery on the n×n Levi-Civita curvature.
pub fn metric_algebra(
    m: &MetricSpec,
    p: &[f64],
    max_order: usize,
    tol: f64,
) -> Result<AlgebraBasis, HolonomyError> {
    tower_algebra(m, p, max_order, tol, Bundle::Metric)
}

fn matmul_jets(a: &[Jet], b: &[Jet], s: usize) -> Vec<Jet> {
    let zero = a[0].lift(0.0);
    let mut out = vec![zero; s * s];
    for i in 0..s {
        for k in 0..s {
            let aik = &a[i * s + k];
            for j in 0..s {
                out[i * s + j] = out[i * s + j].add(&aik.mul(&b[k * s + j]));
            }
        }
    }
    out
}

/// Dense (i, j) grid of curvature elements as flat s² jet matrices.
fn base_elements(cj: &CurvatureJets, bundle: Bundle) -> Result<Vec<Vec<Jet>>, HolonomyError> {
    let n = cj.n();
    match bundle {
        Bundle::Tractor => {
            let list = curvature_elements_jets(cj)?;
            let s = n + 2;
            let zero = vec![Jet::constant(&cj.ctx, 0.0); s * s];
            let mut dense = vec![zero; n * n];
            let mut pos = 0;
            for i in 0..n {
                for j in i + 1..n {
                    dense[j * n + i] = list[pos].iter().map(|e| e.neg()).collect();
                    dense[i * n + j] = list.get(pos).unwrap().clone();
                    pos += 1;
                }
            }
            Ok(dense)
        }
        Bundle::Metric => {
            let mut dense = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let mut f = Vec::with_capacity(n * n);
                    for a in 0..n {
                        for b in 0..n {
                            f.push(cj.riemann(a, b, i, j).clone());
                        }
                    }
                    dense.push(f);
                }
            }
            Ok(dense)
        }
    }
}

/// Connection matrices of the bundle as flat s² jet matrices.
fn connection(cj: &CurvatureJets, bundle: Bundle) -> Result<Vec<Vec<Jet>>, HolonomyError> {
    let n = cj.n();
    match bundle {
        Bundle::Tractor => Ok(connection_jets(cj)?),
        Bundle::Metric => Ok((0..n)
            .map(|k| {
                let mut a = Vec::with_capacity(n * n);
                for i in 0..n {
                    for b in 0..n {
                        a.push(cj.gamma(i, k, b).clone());
                    }
                }
                a
            })
            .collect()),
    }
}

pub(crate) fn tower_algebra(
    m: &MetricSpec,
    p: &[f64],
    max_order: usize,
    tol: f64,
    bundle: Bundle,
) -> Result<AlgebraBasis, HolonomyError> {
    if max_order > 3 {
        return Err(HolonomyError::DepthTooLarge(max_order));
    }
    let n = m.dim();
    let s = bundle.matrix_size(n);
    let cj = curvature_jets(m, p, max_order)?;
    let ctxs = JetCtx::chain(n, max_order);
    let conn_top = connection(&cj, bundle)?;
    let gamma_top = &cj.fields.gamma;

    let values = |e: &Vec<Jet>| DMatrix::from_fn(s, s, |i, j| e[i * s + j].value());
    let mut level = base_elements(&cj, bundle)?;
    let mut rows: Vec<DMatrix<f64>> = level.iter().map(&values).collect();

    for r in 0..max_order {
        let idx_len = r + 2; // lower tensor indices at the current level
        let q = max_order - r; // jet order of the current level
        let out_ctx = &ctxs[q - 1];
        let conn_q: Vec<Vec<Jet>> = conn_top
            .iter()
            .map(|a| a.iter().map(|e| e.truncate(out_ctx)).collect())
            .collect();
        let gamma_q: Vec<Jet> = gamma_top.iter().map(|e| e.truncate(out_ctx)).collect();
        let prev: Vec<Vec<Jet>> = level
            .iter()
            .map(|e| e.iter().map(|j| j.truncate(out_ctx)).collect())
            .collect();
        let mut next: Vec<Vec<Jet>> = Vec::with_capacity(n * level.len());
        for k in 0..n {
            for (e_idx, e) in level.iter().enumerate() {
                let et = &prev[e_idx];
                // ∂_k E + [A_k, E]
                let ak_e = matmul_jets(&conn_q[k], et, s);
                let e_ak = matmul_jets(et, &conn_q[k], s);
                let mut out: Vec<Jet> = e
                    .iter()
                    .zip(ak_e.iter().zip(&e_ak))
                    .map(|(entry, (l, r))| entry.d(k, out_ctx).add(&l.sub(r)))
                    .collect();
                // One Γ-correction per lower tensor index.
                for t in 0..idx_len {
                    let place = n.pow((idx_len - 1 - t) as u32);
                    let digit = (e_idx / place) % n;
                    for mm in 0..n {
                        let coeff = &gamma_q[(mm * n + k) * n + digit];
                        let other = &prev[e_idx - digit * place + mm * place];
                        for ab in 0..s * s {
                            out[ab] = out[ab].sub(&coeff.mul(&other[ab]));
                        }
                    }
                }
                next.push(out);
            }
        }
        rows.extend(next.iter().map(&values));
        level = next;
    }
    Ok(span_basis(&rows, bundle, s, tol, 0.0))
}
