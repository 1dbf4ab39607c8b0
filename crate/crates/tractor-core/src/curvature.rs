//! Curvature of a Riemannian metric: Christoffel symbols, Riemann, Ricci
//! and scalar curvature, the Schouten tensor P, the Weyl tensor W, the
//! Cotton–York tensor CY, and the conformal transformation law of P.
//!
//! Everything is computed exactly (to rounding) from the symbolic metric
//! through truncated Taylor (jet) arithmetic; no finite differences enter
//! the pipeline.  The core is generic over the scalar type so the same
//! index work produces plain numbers or jets carrying positional
//! derivatives.
//!
//! Conventions, pinned by the unit-sphere oracles `Ric = (n−1)g` and
//! `P = −g/2`:
//!
//! ```text
//! R^i_jkl  = ∂_k Γ^i_lj − ∂_l Γ^i_kj + Γ^i_km Γ^m_lj − Γ^i_lm Γ^m_kj
//! Ric_jl   = R^i_jil,   R = g^{jl} Ric_jl
//! P_ij     = −1/(n−2) · (Ric_ij − R/(2n−2) · g_ij)
//! W^a_bkl  = R^a_bkl + P_k{}^a g_lb − P_l{}^a g_kb + δ^a_k P_lb − δ^a_l P_kb
//! CY_ijk   = ∇_i P_jk − ∇_j P_ik
//! ```

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::geometry::{GeometryError, MetricSpec};
use crate::jet::{Jet, JetCtx, NumError, Scalar};

#[derive(Debug, Error)]
pub enum CurvatureError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("numeric failure in curvature assembly: {0}")]
    Numeric(#[from] NumError),
    #[error("operation requires dimension >= 3, got {n}")]
    DimensionTooSmall { n: usize },
}

#[inline]
fn i2(n: usize, i: usize, j: usize) -> usize {
    i * n + j
}

#[inline]
fn i3(n: usize, k: usize, i: usize, j: usize) -> usize {
    (k * n + i) * n + j
}

#[inline]
fn i4(n: usize, k: usize, l: usize, i: usize, j: usize) -> usize {
    ((k * n + l) * n + i) * n + j
}

/// Invert a symmetric positive matrix given as a flat row-major `n × n`
/// slice of scalars, by Gauss–Jordan elimination with partial pivoting on
/// the point values.
fn invert_matrix<S: Scalar>(n: usize, m: &[S]) -> Result<Vec<S>, NumError> {
    let zero = m[0].lift(0.0);
    let one = m[0].lift(1.0);
    let w = 2 * n;
    let mut aug: Vec<S> = Vec::with_capacity(n * w);
    for i in 0..n {
        for j in 0..n {
            aug.push(m[i2(n, i, j)].clone());
        }
        for j in 0..n {
            aug.push(if i == j { one.clone() } else { zero.clone() });
        }
    }
    for col in 0..n {
        let mut piv = col;
        let mut best = aug[col * w + col].value().abs();
        for r in col + 1..n {
            let v = aug[r * w + col].value().abs();
            if v > best {
                best = v;
                piv = r;
            }
        }
        if best == 0.0 {
            return Err(NumError::DivisionByZero);
        }
        if piv != col {
            for j in 0..w {
                aug.swap(col * w + j, piv * w + j);
            }
        }
        let d = aug[col * w + col].clone();
        for j in 0..w {
            aug[col * w + j] = aug[col * w + j].div(&d)?;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = aug[r * w + col].clone();
            for j in col..w {
                let t = f.mul(&aug[col * w + j]);
                aug[r * w + j] = aug[r * w + j].sub(&t);
            }
        }
    }
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(aug[i * w + n + j].clone());
        }
    }
    Ok(out)
}

/// All curvature fields assembled from the metric and its first and second
/// coordinate derivatives, over any scalar type.
///
/// Layouts (flat, row-major in the listed index order):
/// `g`, `ginv`, `ric`, `p`: `[i][j]`; `gamma`: `[k][i][j] = Γ^k_ij`;
/// `dgamma`: `[k][i][j][l] = ∂_k Γ^i_jl`; `riemann`: `[i][j][k][l] =
/// R^i_jkl`; `weyl`: `[a][b][k][l] = W^a_bkl`.
pub struct CurvatureFields<S: Scalar> {
    pub n: usize,
    pub g: Vec<S>,
    pub ginv: Vec<S>,
    pub gamma: Vec<S>,
    pub dgamma: Vec<S>,
    pub riemann: Vec<S>,
    pub ric: Vec<S>,
    pub scalar: S,
    /// Schouten tensor; `None` when `n < 3`.
    pub p: Option<Vec<S>>,
    /// Weyl tensor `W^a_bkl`; `None` when `n < 3`.
    pub weyl: Option<Vec<S>>,
}

/// Assemble the curvature fields from the metric 2-jet data.
///
/// `dg[k][i][j] = ∂_k g_ij` and `ddg[k][l][i][j] = ∂_k ∂_l g_ij`, both flat
/// and row-major in the listed order.
pub fn curvature_fields<S: Scalar>(
    n: usize,
    g: &[S],
    dg: &[S],
    ddg: &[S],
) -> Result<CurvatureFields<S>, NumError> {
    assert_eq!(g.len(), n * n);
    assert_eq!(dg.len(), n * n * n);
    assert_eq!(ddg.len(), n * n * n * n);
    let zero = g[0].lift(0.0);
    let ginv = invert_matrix(n, g)?;

    // Γ^k_ij = ½ g^{km} (∂_i g_mj + ∂_j g_mi − ∂_m g_ij), symmetric in i,j.
    let mut gamma = vec![zero.clone(); n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut acc = zero.clone();
                for m in 0..n {
                    let s = dg[i3(n, i, m, j)]
                        .add(&dg[i3(n, j, m, i)])
                        .sub(&dg[i3(n, m, i, j)]);
                    acc = acc.add(&ginv[i2(n, k, m)].mul(&s));
                }
                let v = acc.scale(0.5);
                gamma[i3(n, k, i, j)] = v.clone();
                gamma[i3(n, k, j, i)] = v;
            }
        }
    }

    // ∂_k g^{ab} = −g^{ac} (∂_k g_cd) g^{db}.
    let mut dginv = vec![zero.clone(); n * n * n];
    for k in 0..n {
        // t[c][b] = (∂_k g_cd) g^{db}
        let mut t = vec![zero.clone(); n * n];
        for c in 0..n {
            for b in 0..n {
                let mut acc = zero.clone();
                for d in 0..n {
                    acc = acc.add(&dg[i3(n, k, c, d)].mul(&ginv[i2(n, d, b)]));
                }
                t[i2(n, c, b)] = acc;
            }
        }
        for a in 0..n {
            for b in a..n {
                let mut acc = zero.clone();
                for c in 0..n {
                    acc = acc.add(&ginv[i2(n, a, c)].mul(&t[i2(n, c, b)]));
                }
                let v = acc.neg();
                dginv[i3(n, k, a, b)] = v.clone();
                dginv[i3(n, k, b, a)] = v;
            }
        }
    }

    // ∂_k Γ^i_jl, symmetric in j,l.
    let mut dgamma = vec![zero.clone(); n * n * n * n];
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                for l in j..n {
                    let mut acc = zero.clone();
                    for m in 0..n {
                        let s = dg[i3(n, j, m, l)]
                            .add(&dg[i3(n, l, m, j)])
                            .sub(&dg[i3(n, m, j, l)]);
                        acc = acc.add(&dginv[i3(n, k, i, m)].mul(&s));
                        let ds = ddg[i4(n, k, j, m, l)]
                            .add(&ddg[i4(n, k, l, m, j)])
                            .sub(&ddg[i4(n, k, m, j, l)]);
                        acc = acc.add(&ginv[i2(n, i, m)].mul(&ds));
                    }
                    let v = acc.scale(0.5);
                    dgamma[i4(n, k, i, j, l)] = v.clone();
                    dgamma[i4(n, k, i, l, j)] = v;
                }
            }
        }
    }

    // R^i_jkl, antisymmetric in k,l.
    let mut riemann = vec![zero.clone(); n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in k + 1..n {
                    let mut acc = dgamma[i4(n, k, i, l, j)].sub(&dgamma[i4(n, l, i, k, j)]);
                    for m in 0..n {
                        let a = gamma[i3(n, i, k, m)].mul(&gamma[i3(n, m, l, j)]);
                        let b = gamma[i3(n, i, l, m)].mul(&gamma[i3(n, m, k, j)]);
                        acc = acc.add(&a.sub(&b));
                    }
                    riemann[i4(n, i, j, k, l)] = acc.clone();
                    riemann[i4(n, i, j, l, k)] = acc.neg();
                }
            }
        }
    }

    let mut ric = vec![zero.clone(); n * n];
    for j in 0..n {
        for l in 0..n {
            let mut acc = zero.clone();
            for i in 0..n {
                acc = acc.add(&riemann[i4(n, i, j, i, l)]);
            }
            ric[i2(n, j, l)] = acc;
        }
    }

    let mut scalar = zero.clone();
    for j in 0..n {
        for l in 0..n {
            scalar = scalar.add(&ginv[i2(n, j, l)].mul(&ric[i2(n, j, l)]));
        }
    }

    let (p, weyl) = if n >= 3 {
        let cp = -1.0 / (n as f64 - 2.0);
        let ct = 1.0 / (2.0 * n as f64 - 2.0);
        let mut p = vec![zero.clone(); n * n];
        for i in 0..n {
            for j in 0..n {
                let t = scalar.mul(&g[i2(n, i, j)]).scale(ct);
                p[i2(n, i, j)] = ric[i2(n, i, j)].sub(&t).scale(cp);
            }
        }
        // P_k{}^a = g^{am} P_km.
        let mut praised = vec![zero.clone(); n * n];
        for k in 0..n {
            for a in 0..n {
                let mut acc = zero.clone();
                for m in 0..n {
                    acc = acc.add(&ginv[i2(n, a, m)].mul(&p[i2(n, k, m)]));
                }
                praised[i2(n, k, a)] = acc;
            }
        }
        let mut weyl = vec![zero.clone(); n * n * n * n];
        for a in 0..n {
            for b in 0..n {
                for k in 0..n {
                    for l in k + 1..n {
                        let mut acc = riemann[i4(n, a, b, k, l)].clone();
                        acc = acc.add(&praised[i2(n, k, a)].mul(&g[i2(n, l, b)]));
                        acc = acc.sub(&praised[i2(n, l, a)].mul(&g[i2(n, k, b)]));
                        if a == k {
                            acc = acc.add(&p[i2(n, l, b)]);
                        }
                        if a == l {
                            acc = acc.sub(&p[i2(n, k, b)]);
                        }
                        weyl[i4(n, a, b, k, l)] = acc.clone();
                        weyl[i4(n, a, b, l, k)] = acc.neg();
                    }
                }
            }
        }
        (Some(p), Some(weyl))
    } else {
        (None, None)
    };

    Ok(CurvatureFields {
        n,
        g: g.to_vec(),
        ginv,
        gamma,
        dgamma,
        riemann,
        ric,
        scalar,
        p,
        weyl,
    })
}

/// Curvature fields of a metric as jets of a chosen order at a point,
/// including the Schouten derivative and the Cotton–York tensor.
///
/// All jets share the context `ctx` of the requested order, so positional
/// derivatives up to that order of every field are available exactly.
pub struct CurvatureJets {
    pub order: usize,
    pub ctx: Arc<JetCtx>,
    pub point: Vec<f64>,
    pub fields: CurvatureFields<Jet>,
    /// `dp[k][i][j] = ∂_k P_ij`; `None` when `n < 3`.
    pub dp: Option<Vec<Jet>>,
    /// `cy[i][j][k] = CY_ijk`; `None` when `n < 3`.
    pub cy: Option<Vec<Jet>>,
}

impl CurvatureJets {
    pub fn n(&self) -> usize {
        self.fields.n
    }
    pub fn g(&self, i: usize, j: usize) -> &Jet {
        &self.fields.g[i2(self.fields.n, i, j)]
    }
    pub fn ginv(&self, i: usize, j: usize) -> &Jet {
        &self.fields.ginv[i2(self.fields.n, i, j)]
    }
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> &Jet {
        &self.fields.gamma[i3(self.fields.n, k, i, j)]
    }
    /// `R^i_jkl`.
    pub fn riemann(&self, i: usize, j: usize, k: usize, l: usize) -> &Jet {
        &self.fields.riemann[i4(self.fields.n, i, j, k, l)]
    }
    /// Schouten tensor entry; requires `n ≥ 3`.
    pub fn p(&self, i: usize, j: usize) -> &Jet {
        &self.fields.p.as_ref().expect("Schouten needs n >= 3")[i2(self.fields.n, i, j)]
    }
    /// `W^a_bkl`; requires `n ≥ 3`.
    pub fn weyl(&self, a: usize, b: usize, k: usize, l: usize) -> &Jet {
        &self.fields.weyl.as_ref().expect("Weyl needs n >= 3")[i4(self.fields.n, a, b, k, l)]
    }
    /// `CY_ijk`; requires `n ≥ 3`.
    pub fn cy(&self, i: usize, j: usize, k: usize) -> &Jet {
        &self.cy.as_ref().expect("Cotton-York needs n >= 3")[i3(self.fields.n, i, j, k)]
    }
}

/// Evaluate the curvature fields of `m` at `p` as jets of the given order.
pub fn curvature_jets(
    m: &MetricSpec,
    p: &[f64],
    order: usize,
) -> Result<CurvatureJets, CurvatureError> {
    m.check_domain(p)?;
    let n = m.dim();
    // The metric enters through second derivatives, and the Schouten
    // derivative takes one more; computing the chain three orders above the
    // target makes every requested coefficient exact.
    let chain = JetCtx::chain(n, order + 3);
    let g_top = m.entry_jets(p, &chain[order + 3])?;
    let c2 = &chain[order + 2];
    let c1 = &chain[order + 1];
    let c0 = &chain[order];

    let mut dg = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for gj in &g_top {
            dg.push(gj.d(k, c2));
        }
    }
    let mut ddg = Vec::with_capacity(n * n * n * n);
    for k in 0..n {
        for l in 0..n {
            for ij in 0..n * n {
                ddg.push(dg[k * n * n + ij].d(l, c1));
            }
        }
    }
    let g1: Vec<Jet> = g_top.iter().map(|j| j.truncate(c1)).collect();
    let dg1: Vec<Jet> = dg.iter().map(|j| j.truncate(c1)).collect();
    let f1 = curvature_fields(n, &g1, &dg1, &ddg)?;

    let (dp, cy) = match f1.p.as_ref() {
        Some(p1) => {
            let mut dp = Vec::with_capacity(n * n * n);
            for k in 0..n {
                for pj in p1 {
                    dp.push(pj.d(k, c0));
                }
            }
            let zero = Jet::constant(c0, 0.0);
            let mut cy = vec![zero.clone(); n * n * n];
            for i in 0..n {
                for j in i + 1..n {
                    for k in 0..n {
                        let mut acc = dp[i3(n, i, j, k)].sub(&dp[i3(n, j, i, k)]);
                        for mm in 0..n {
                            let ga_i = f1.gamma[i3(n, mm, i, k)].truncate(c0);
                            let ga_j = f1.gamma[i3(n, mm, j, k)].truncate(c0);
                            let p_jm = p1[i2(n, j, mm)].truncate(c0);
                            let p_im = p1[i2(n, i, mm)].truncate(c0);
                            acc = acc.sub(&ga_i.mul(&p_jm));
                            acc = acc.add(&ga_j.mul(&p_im));
                        }
                        cy[i3(n, i, j, k)] = acc.clone();
                        cy[i3(n, j, i, k)] = acc.neg();
                    }
                }
            }
            (Some(dp), Some(cy))
        }
        None => (None, None),
    };

    let tr = |v: &Vec<Jet>| -> Vec<Jet> { v.iter().map(|j| j.truncate(c0)).collect() };
    let fields = CurvatureFields {
        n,
        g: tr(&f1.g),
        ginv: tr(&f1.ginv),
        gamma: tr(&f1.gamma),
        dgamma: tr(&f1.dgamma),
        riemann: tr(&f1.riemann),
        ric: tr(&f1.ric),
        scalar: f1.scalar.truncate(c0),
        p: f1.p.as_ref().map(tr),
        weyl: f1.weyl.as_ref().map(tr),
    };
    Ok(CurvatureJets {
        order,
        ctx: c0.clone(),
        point: p.to_vec(),
        fields,
        dp,
        cy,
    })
}

/// Point values of every curvature field of a metric at a point.
pub struct CurvaturePack {
    pub n: usize,
    pub point: Vec<f64>,
    pub g: DMatrix<f64>,
    pub ginv: DMatrix<f64>,
    pub ric: DMatrix<f64>,
    pub scalar: f64,
    /// Schouten tensor; `None` when `n < 3`.
    pub p: Option<DMatrix<f64>>,
    gamma: Vec<f64>,
    dgamma: Vec<f64>,
    riemann: Vec<f64>,
    dp: Option<Vec<f64>>,
    weyl: Option<Vec<f64>>,
    cy: Option<Vec<f64>>,
}

impl CurvaturePack {
    /// `Γ^k_ij`.
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[i3(self.n, k, i, j)]
    }
    /// `∂_k Γ^i_jl`.
    pub fn dgamma(&self, k: usize, i: usize, j: usize, l: usize) -> f64 {
        self.dgamma[i4(self.n, k, i, j, l)]
    }
    /// `R^i_jkl`.
    pub fn riemann(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.riemann[i4(self.n, i, j, k, l)]
    }
    /// `R_ijkl = g_ia R^a_jkl`.
    pub fn riemann_lower(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        (0..self.n)
            .map(|a| self.g[(i, a)] * self.riemann(a, j, k, l))
            .sum()
    }
    /// `∂_k P_ij`; requires `n ≥ 3`.
    pub fn dp(&self, k: usize, i: usize, j: usize) -> f64 {
        self.dp.as_ref().expect("Schouten needs n >= 3")[i3(self.n, k, i, j)]
    }
    /// `W^a_bkl`; requires `n ≥ 3`.
    pub fn weyl(&self, a: usize, b: usize, k: usize, l: usize) -> f64 {
        self.weyl.as_ref().expect("Weyl needs n >= 3")[i4(self.n, a, b, k, l)]
    }
    /// `W_ijkl = g_ia W^a_jkl`; requires `n ≥ 3`.
    pub fn weyl_lower(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        (0..self.n)
            .map(|a| self.g[(i, a)] * self.weyl(a, j, k, l))
            .sum()
    }
    /// `CY_ijk`; requires `n ≥ 3`.
    pub fn cy(&self, i: usize, j: usize, k: usize) -> f64 {
        self.cy.as_ref().expect("Cotton-York needs n >= 3")[i3(self.n, i, j, k)]
    }
    /// Largest |W^a_bkl| (0 in dimensions < 3 where W is not defined).
    pub fn weyl_max(&self) -> f64 {
        self.weyl
            .as_ref()
            .map(|w| w.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .unwrap_or(0.0)
    }
    /// Largest |CY_ijk| (0 in dimensions < 3).
    pub fn cy_max(&self) -> f64 {
        self.cy
            .as_ref()
            .map(|c| c.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .unwrap_or(0.0)
    }
    /// Largest |R^i_jkl|.
    pub fn riemann_max(&self) -> f64 {
        self.riemann.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
    /// Largest |Ric_ij|.
    pub fn ricci_max(&self) -> f64 {
        self.ric.iter().fold(0.0f64, |m, &v| m.max(v.abs()))
    }
}

/// Evaluate all curvature fields of `m` at the point `p`.
pub fn curvature_at(m: &MetricSpec, p: &[f64]) -> Result<CurvaturePack, CurvatureError> {
    let cj = curvature_jets(m, p, 0)?;
    let n = cj.n();
    let vals = |v: &Vec<Jet>| -> Vec<f64> { v.iter().map(|j| j.value()).collect() };
    let mat = |v: &Vec<Jet>| -> DMatrix<f64> {
        DMatrix::from_fn(n, n, |i, j| v[i2(n, i, j)].value())
    };
    Ok(CurvaturePack {
        n,
        point: p.to_vec(),
        g: mat(&cj.fields.g),
        ginv: mat(&cj.fields.ginv),
        ric: mat(&cj.fields.ric),
        scalar: cj.fields.scalar.value(),
        p: cj.fields.p.as_ref().map(&mat),
        gamma: vals(&cj.fields.gamma),
        dgamma: vals(&cj.fields.dgamma),
        riemann: vals(&cj.fields.riemann),
        dp: cj.dp.as_ref().map(&vals),
        weyl: cj.fields.weyl.as_ref().map(&vals),
        cy: cj.cy.as_ref().map(&vals),
    })
}

/// Christoffel symbols `Γ^k_ij` as a flat `[k][i][j]` array.
pub fn christoffel(m: &MetricSpec, p: &[f64]) -> Result<Vec<f64>, CurvatureError> {
    Ok(curvature_at(m, p)?.gamma)
}

/// Levi-Civita connection matrices `(A_k)^a_b = Γ^a_kb` evaluated
/// directly from first metric derivatives (fast path for transport).
pub fn christoffel_matrices(
    m: &MetricSpec,
    p: &[f64],
) -> Result<Vec<DMatrix<f64>>, CurvatureError> {
    let n = m.dim();
    let g = m.metric_at(p)?;
    let der = m.metric_derivs_at(p, 1)?;
    let gv: Vec<f64> = (0..n * n).map(|i| g[(i / n, i % n)]).collect();
    let ginv = invert_matrix(n, &gv)?;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut a = DMatrix::zeros(n, n);
        for i in 0..n {
            for b in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += ginv[i2(n, i, l)]
                        * (der.dg(k, l, b) + der.dg(b, l, k) - der.dg(l, k, b));
                }
                a[(i, b)] = 0.5 * s;
            }
        }
        out.push(a);
    }
    Ok(out)
}

/// Riemann tensor `R^i_jkl` as a flat `[i][j][k][l]` array.
pub fn riemann(m: &MetricSpec, p: &[f64]) -> Result<Vec<f64>, CurvatureError> {
    Ok(curvature_at(m, p)?.riemann)
}

/// Ricci tensor `Ric_ij`.
pub fn ricci(m: &MetricSpec, p: &[f64]) -> Result<DMatrix<f64>, CurvatureError> {
    Ok(curvature_at(m, p)?.ric)
}

/// Scalar curvature `R`.
pub fn scalar(m: &MetricSpec, p: &[f64]) -> Result<f64, CurvatureError> {
    Ok(curvature_at(m, p)?.scalar)
}

/// Schouten tensor `P_ij`; requires `n ≥ 3`.
pub fn schouten(m: &MetricSpec, p: &[f64]) -> Result<DMatrix<f64>, CurvatureError> {
    if m.dim() < 3 {
        return Err(CurvatureError::DimensionTooSmall { n: m.dim() });
    }
    Ok(curvature_at(m, p)?.p.unwrap())
}

/// Fully lowered Weyl tensor `W_ijkl = g_ia W^a_jkl` as a flat array;
/// requires `n ≥ 3`.
pub fn weyl(m: &MetricSpec, p: &[f64]) -> Result<Vec<f64>, CurvatureError> {
    if m.dim() < 3 {
        return Err(CurvatureError::DimensionTooSmall { n: m.dim() });
    }
    let pack = curvature_at(m, p)?;
    let n = pack.n;
    let mut out = vec![0.0; n * n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    out[i4(n, i, j, k, l)] = pack.weyl_lower(i, j, k, l);
                }
            }
        }
    }
    Ok(out)
}

/// Cotton–York tensor `CY_ijk` as a flat `[i][j][k]` array; requires `n ≥ 3`.
pub fn cotton_york(m: &MetricSpec, p: &[f64]) -> Result<Vec<f64>, CurvatureError> {
    if m.dim() < 3 {
        return Err(CurvatureError::DimensionTooSmall { n: m.dim() });
    }
    Ok(curvature_at(m, p)?.cy.unwrap())
}

/// Conformal change of the Schouten tensor.  For the rescaled metric
/// `ĝ = e^{2f} g` with `Υ = df`:
///
/// ```text
/// P̂_ij = P_ij + ∇_j Υ_i − Υ_i Υ_j + ½ |Υ|²_g g_ij
/// ```
///
/// `nabla_upsilon[(i, j)] = ∇_j Υ_i` (the g-covariant derivative; symmetric
/// for a gradient).  The inputs and the output are all expressed in the
/// original gauge `g`.
pub fn transform_schouten(
    p: &DMatrix<f64>,
    upsilon: &DVector<f64>,
    nabla_upsilon: &DMatrix<f64>,
    g: &DMatrix<f64>,
    ginv: &DMatrix<f64>,
) -> DMatrix<f64> {
    let up2 = (ginv * upsilon).dot(upsilon);
    let n = p.nrows();
    DMatrix::from_fn(n, n, |i, j| {
        p[(i, j)] + nabla_upsilon[(i, j)] - upsilon[i] * upsilon[j] + 0.5 * up2 * g[(i, j)]
    })
}

/// Υ = df and its g-covariant derivative at the point of `pack`, computed
/// symbolically from the scale expression `f`.
pub fn upsilon_of_scale(
    f: &crate::expr::Expression,
    pack: &CurvaturePack,
) -> Result<(DVector<f64>, DMatrix<f64>), CurvatureError> {
    let n = pack.n;
    let pt = &pack.point;
    let mut up = DVector::zeros(n);
    let grads: Vec<crate::expr::Expression> = (0..n).map(|i| f.differentiate(i)).collect();
    for i in 0..n {
        up[i] = grads[i].evaluate(pt).map_err(GeometryError::from)?;
    }
    let mut nab = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let dd = grads[i]
                .differentiate(j)
                .evaluate(pt)
                .map_err(GeometryError::from)?;
            let mut v = dd;
            for k in 0..n {
                v -= pack.gamma(k, j, i) * up[k];
            }
            nab[(i, j)] = v;
        }
    }
    Ok((up, nab))
}

/// Result of fitting `Ric = λ g` over sample points.
#[derive(Debug, Clone, Copy)]
pub struct EinsteinFit {
    /// Least-squares Einstein constant.
    pub lambda: f64,
    /// Largest deviation `|Ric − λ g|` relative to `max(1, |λ|)`.
    pub spread: f64,
    /// True when the spread is below `1e-6`.
    pub einstein: bool,
}

/// Least-squares fit of the Einstein constant over the base point plus
/// `npoints` seeded samples.
pub fn einstein_fit(m: &MetricSpec, npoints: usize, seed: u64) -> Result<EinsteinFit, CurvatureError> {
    let mut pts = vec![m.basepoint().clone()];
    pts.extend(m.sample_points(npoints, seed));
    let mut packs = Vec::with_capacity(pts.len());
    for p in &pts {
        packs.push(curvature_at(m, p)?);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for pack in &packs {
        for i in 0..pack.n {
            for j in 0..pack.n {
                num += pack.ric[(i, j)] * pack.g[(i, j)];
                den += pack.g[(i, j)] * pack.g[(i, j)];
            }
        }
    }
    let lambda = num / den;
    let mut spread = 0.0f64;
    for pack in &packs {
        for i in 0..pack.n {
            for j in 0..pack.n {
                spread = spread.max((pack.ric[(i, j)] - lambda * pack.g[(i, j)]).abs());
            }
        }
    }
    let spread = spread / 1.0f64.max(lambda.abs());
    Ok(EinsteinFit {
        lambda,
        spread,
        einstein: spread < 1e-6,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;
    use crate::expr::Expression;
    use approx::assert_abs_diff_eq;

    /// A generic (non-Einstein, not conformally flat) 3-metric for tests.
    fn bumpy3() -> MetricSpec {
        let c = ["x", "y", "z"];
        let e = |s: &str| Expression::parse(s, &c).unwrap();
        MetricSpec::new(
            vec!["x".into(), "y".into(), "z".into()],
            vec![
                ((0, 0), e("1 + 0.3*sin(y)")),
                ((0, 1), e("0.1*z^2")),
                ((1, 1), e("1 + 0.2*cos(x)")),
                ((1, 2), e("0.05*x")),
                ((2, 2), e("1 + 0.1*x*y")),
            ],
            vec![(-0.8, 0.8); 3],
            vec![0.1, -0.2, 0.3],
            "bumpy3",
        )
        .unwrap()
    }

    #[test]
    fn flat_space_is_flat() {
        let m = catalogue::flat(3);
        let pack = curvature_at(&m, &[0.4, -1.1, 2.0]).unwrap();
        assert_eq!(pack.gamma.iter().fold(0.0f64, |a, v| a.max(v.abs())), 0.0);
        assert_eq!(pack.riemann_max(), 0.0);
        assert_eq!(pack.scalar, 0.0);
        assert_eq!(pack.weyl_max(), 0.0);
        assert_eq!(pack.cy_max(), 0.0);
    }

    #[test]
    fn sphere2_christoffel_oracles() {
        let m = catalogue::sphere(2, 1.0);
        let th = std::f64::consts::PI / 3.0;
        let pack = curvature_at(&m, &[th, 1.0]).unwrap();
        // Γ^θ_φφ = −sinθ cosθ, Γ^φ_θφ = cotθ.
        assert_abs_diff_eq!(pack.gamma(0, 1, 1), -3.0f64.sqrt() / 4.0, epsilon = 1e-13);
        assert_abs_diff_eq!(pack.gamma(1, 0, 1), 1.0 / 3.0f64.sqrt(), epsilon = 1e-13);
        assert_abs_diff_eq!(pack.gamma(1, 1, 0), 1.0 / 3.0f64.sqrt(), epsilon = 1e-13);
        // Gauss curvature 1: R = 2.
        assert_abs_diff_eq!(pack.scalar, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn spheres_are_einstein_with_expected_constants() {
        for (n, r) in [(3usize, 1.0f64), (4, 1.0), (3, 2.0)] {
            let m = catalogue::sphere(n, r);
            let lam = (n as f64 - 1.0) / (r * r);
            for p in m.sample_points(10, 7) {
                let pack = curvature_at(&m, &p).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        assert_abs_diff_eq!(
                            pack.ric[(i, j)],
                            lam * pack.g[(i, j)],
                            epsilon = 1e-8
                        );
                    }
                }
                assert_abs_diff_eq!(pack.scalar, n as f64 * lam, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn unit_sphere_schouten_is_minus_half_g() {
        for n in [3usize, 4, 5] {
            let m = catalogue::sphere(n, 1.0);
            for p in m.sample_points(5, 3) {
                let pack = curvature_at(&m, &p).unwrap();
                let ps = pack.p.as_ref().unwrap();
                for i in 0..n {
                    for j in 0..n {
                        assert_abs_diff_eq!(ps[(i, j)], -0.5 * pack.g[(i, j)], epsilon = 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn hyperbolic4_ricci_and_schouten() {
        let m = catalogue::hyperbolic(4, -1.0);
        for p in m.sample_points(10, 11) {
            let pack = curvature_at(&m, &p).unwrap();
            let ps = pack.p.as_ref().unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    assert_abs_diff_eq!(pack.ric[(i, j)], -3.0 * pack.g[(i, j)], epsilon = 1e-9);
                    assert_abs_diff_eq!(ps[(i, j)], 0.5 * pack.g[(i, j)], epsilon = 1e-9);
                }
            }
        }
    }

    #[test]
    fn riemann_symmetries_and_first_bianchi() {
        for name in ["sphere3", "hyperbolic4", "s2xs2r2", "eguchi-hanson"] {
            let m = catalogue::lookup(name).unwrap();
            let n = m.dim();
            let p = m.sample_points(2, 5).pop().unwrap();
            let pack = curvature_at(&m, &p).unwrap();
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        for l in 0..n {
                            let low = pack.riemann_lower(i, j, k, l);
                            assert_abs_diff_eq!(
                                low,
                                -pack.riemann_lower(j, i, k, l),
                                epsilon = 1e-9
                            );
                            assert_abs_diff_eq!(
                                low,
                                -pack.riemann_lower(i, j, l, k),
                                epsilon = 1e-9
                            );
                            assert_abs_diff_eq!(
                                low,
                                pack.riemann_lower(k, l, i, j),
                                epsilon = 1e-9
                            );
                            let cyc = pack.riemann(i, j, k, l)
                                + pack.riemann(i, k, l, j)
                                + pack.riemann(i, l, j, k);
                            assert_abs_diff_eq!(cyc, 0.0, epsilon = 1e-9);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn weyl_vanishes_in_dimension_three_and_on_space_forms() {
        for m in [bumpy3(), catalogue::sphere(4, 1.0), catalogue::hyperbolic(4, -1.0)] {
            for p in m.sample_points(4, 9) {
                let pack = curvature_at(&m, &p).unwrap();
                assert!(pack.weyl_max() < 1e-8, "{}: {}", m.label(), pack.weyl_max());
            }
        }
    }

    #[test]
    fn weyl_nonzero_on_unbalanced_product() {
        let m = catalogue::lookup("s2xs2r2").unwrap();
        let pack = curvature_at(&m, m.basepoint()).unwrap();
        assert!(pack.weyl_max() > 1e-3);
    }

    #[test]
    fn weyl_is_trace_free() {
        for name in ["sphere4", "s2xs2r2", "eguchi-hanson", "s4xh4"] {
            let m = catalogue::lookup(name).unwrap();
            let n = m.dim();
            let p = m.sample_points(1, 13).pop().unwrap();
            let pack = curvature_at(&m, &p).unwrap();
            // All independent traces of W_ijkl with g⁻¹.
            let mut worst = 0.0f64;
            for a in 0..n {
                for b in 0..n {
                    let mut t1 = 0.0;
                    let mut t2 = 0.0;
                    let mut t3 = 0.0;
                    for i in 0..n {
                        for j in 0..n {
                            let gij = pack.ginv[(i, j)];
                            t1 += gij * pack.weyl_lower(i, j, a, b);
                            t2 += gij * pack.weyl_lower(i, a, j, b);
                            t3 += gij * pack.weyl_lower(i, a, b, j);
                        }
                    }
                    worst = worst.max(t1.abs()).max(t2.abs()).max(t3.abs());
                }
            }
            assert!(worst < 1e-8, "{}: trace {}", name, worst);
        }
    }

    #[test]
    fn riemann_reconstructs_from_weyl_and_schouten() {
        for name in ["sphere4", "hyperbolic4", "s2xs2r2", "eguchi-hanson", "s3xs3"] {
            let m = catalogue::lookup(name).unwrap();
            let n = m.dim();
            for p in m.sample_points(4, 17) {
                let pack = curvature_at(&m, &p).unwrap();
                let ps = pack.p.as_ref().unwrap();
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                let rec = pack.weyl_lower(i, j, k, l)
                                    - ps[(k, i)] * pack.g[(l, j)]
                                    + ps[(l, i)] * pack.g[(k, j)]
                                    - pack.g[(i, k)] * ps[(l, j)]
                                    + pack.g[(i, l)] * ps[(k, j)];
                                assert_abs_diff_eq!(
                                    rec,
                                    pack.riemann_lower(i, j, k, l),
                                    epsilon = 1e-8
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn cotton_york_vanishes_for_einstein_and_conformally_flat() {
        for name in ["sphere4", "hyperbolic4", "s3xs3", "eguchi-hanson"] {
            let m = catalogue::lookup(name).unwrap();
            let p = m.sample_points(1, 19).pop().unwrap();
            let pack = curvature_at(&m, &p).unwrap();
            assert!(pack.cy_max() < 1e-8, "{}: {}", name, pack.cy_max());
        }
        // A conformal rescaling of flat space is conformally flat, so its
        // whole tractor curvature — W and CY both — must vanish even though
        // the metric is no longer Einstein.
        let f = Expression::parse("0.1*x1*x2^2", &["x1", "x2", "x3", "x4"]).unwrap();
        let (m, _) = catalogue::flat(4).rescale(f).unwrap();
        for p in m.sample_points(3, 21) {
            let pack = curvature_at(&m, &p).unwrap();
            assert!(pack.weyl_max() < 1e-9);
            assert!(pack.cy_max() < 1e-9, "cy = {}", pack.cy_max());
        }
    }

    #[test]
    fn cotton_york_nonzero_for_generic_metric() {
        let m = bumpy3();
        let pack = curvature_at(&m, m.basepoint()).unwrap();
        assert!(pack.cy_max() > 1e-6, "cy = {}", pack.cy_max());
        // Antisymmetry in the first index pair.
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    assert_abs_diff_eq!(pack.cy(i, j, k), -pack.cy(j, i, k), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn schouten_derivative_matches_finite_differences() {
        let m = bumpy3();
        let p = m.basepoint().clone();
        let pack = curvature_at(&m, &p).unwrap();
        let h = 1e-5;
        for k in 0..3 {
            let mut pp = p.clone();
            let mut pm = p.clone();
            pp[k] += h;
            pm[k] -= h;
            let sp = schouten(&m, &pp).unwrap();
            let sm = schouten(&m, &pm).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let fd = (sp[(i, j)] - sm[(i, j)]) / (2.0 * h);
                    assert_abs_diff_eq!(pack.dp(k, i, j), fd, epsilon = 1e-6);
                }
            }
        }
    }

    #[test]
    fn dgamma_matches_finite_differences() {
        let m = catalogue::eguchi_hanson(1.0);
        let p = m.basepoint().clone();
        let pack = curvature_at(&m, &p).unwrap();
        let h = 1e-5;
        for k in 0..4 {
            let mut pp = p.clone();
            let mut pm = p.clone();
            pp[k] += h;
            pm[k] -= h;
            let gp = christoffel(&m, &pp).unwrap();
            let gm = christoffel(&m, &pm).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    for l in 0..4 {
                        let fd = (gp[i3(4, i, j, l)] - gm[i3(4, i, j, l)]) / (2.0 * h);
                        assert_abs_diff_eq!(pack.dgamma(k, i, j, l), fd, epsilon = 1e-6);
                    }
                }
            }
        }
    }

    #[test]
    fn weyl_upper_is_conformally_invariant() {
        for (name, fsrc) in [("s2xs2r2", "0.1*sin(theta)"), ("eguchi-hanson", "0.1*sin(theta)")] {
            let m = catalogue::lookup(name).unwrap();
            let coords = m.coord_refs();
            let f = Expression::parse(fsrc, &coords).unwrap();
            let (mh, _) = m.rescale(f).unwrap();
            let n = m.dim();
            for p in m.sample_points(3, 23) {
                let a = curvature_at(&m, &p).unwrap();
                let b = curvature_at(&mh, &p).unwrap();
                for i in 0..n {
                    for j in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                assert_abs_diff_eq!(
                                    a.weyl(i, j, k, l),
                                    b.weyl(i, j, k, l),
                                    epsilon = 1e-7
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn second_bianchi_spot_check() {
        // ∇_[m R^i_|j|kl] = 0, with ∂R by one central finite-difference
        // level on top of the symbolic Christoffel terms.
        for m in [catalogue::eguchi_hanson(1.0), bumpy3()] {
            let n = m.dim();
            let p = m.basepoint().clone();
            let pack = curvature_at(&m, &p).unwrap();
            let h = 1e-5;
            let mut dr = vec![0.0; n * n * n * n * n];
            for mm in 0..n {
                let mut pp = p.clone();
                let mut pm = p.clone();
                pp[mm] += h;
                pm[mm] -= h;
                let rp = riemann(&m, &pp).unwrap();
                let rm = riemann(&m, &pm).unwrap();
                for x in 0..n * n * n * n {
                    dr[mm * n * n * n * n + x] = (rp[x] - rm[x]) / (2.0 * h);
                }
            }
            let nabla = |mv: usize, i: usize, j: usize, k: usize, l: usize| -> f64 {
                let mut v = dr[mv * n * n * n * n + i4(n, i, j, k, l)];
                for a in 0..n {
                    v += pack.gamma(i, mv, a) * pack.riemann(a, j, k, l);
                    v -= pack.gamma(a, mv, j) * pack.riemann(i, a, k, l);
                    v -= pack.gamma(a, mv, k) * pack.riemann(i, j, a, l);
                    v -= pack.gamma(a, mv, l) * pack.riemann(i, j, k, a);
                }
                v
            };
            for i in 0..n {
                for j in 0..n {
                    for mv in 0..n {
                        for k in 0..n {
                            for l in 0..n {
                                let s = nabla(mv, i, j, k, l)
                                    + nabla(k, i, j, l, mv)
                                    + nabla(l, i, j, mv, k);
                                assert!(
                                    s.abs() < 1e-7,
                                    "{}: bianchi residual {} at ({},{},{},{},{})",
                                    m.label(),
                                    s,
                                    mv,
                                    i,
                                    j,
                                    k,
                                    l
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn transform_schouten_identity_and_flat_oracle() {
        // Υ = 0 is the identity.
        let m = catalogue::sphere(4, 1.0);
        let p = m.basepoint().clone();
        let pack = curvature_at(&m, &p).unwrap();
        let ps = pack.p.clone().unwrap();
        let zero_u = DVector::zeros(4);
        let zero_n = DMatrix::zeros(4, 4);
        let got = transform_schouten(&ps, &zero_u, &zero_n, &pack.g, &pack.ginv);
        assert!((got - &ps).amax() < 1e-15);

        // Flat R⁴ with f = 0.3 x₁: the transformed P matches a direct
        // recomputation from the rescaled metric.
        let m = catalogue::flat(4);
        let f = Expression::parse("0.3*x1", &["x1", "x2", "x3", "x4"]).unwrap();
        let (mh, _) = m.rescale(f.clone()).unwrap();
        for p in m.sample_points(10, 29) {
            let pack = curvature_at(&m, &p).unwrap();
            let (up, nab) = upsilon_of_scale(&f, &pack).unwrap();
            let got = transform_schouten(
                pack.p.as_ref().unwrap(),
                &up,
                &nab,
                &pack.g,
                &pack.ginv,
            );
            let want = schouten(&mh, &p).unwrap();
            assert!(
                (got - want).amax() < 1e-9,
                "transform_schouten mismatch at {:?}",
                p
            );
        }
    }

    #[test]
    fn transform_schouten_matches_recomputation_on_curved_metrics() {
        for (name, fsrc) in [("sphere4", "0.2*sin(theta1)"), ("hyperbolic4", "0.1*x1*y")] {
            let m = catalogue::lookup(name).unwrap();
            let coords = m.coord_refs();
            let f = Expression::parse(fsrc, &coords).unwrap();
            let (mh, _) = m.rescale(f.clone()).unwrap();
            for p in m.sample_points(4, 31) {
                let pack = curvature_at(&m, &p).unwrap();
                let (up, nab) = upsilon_of_scale(&f, &pack).unwrap();
                let got = transform_schouten(
                    pack.p.as_ref().unwrap(),
                    &up,
                    &nab,
                    &pack.g,
                    &pack.ginv,
                );
                let want = schouten(&mh, &p).unwrap();
                assert!((got - want).amax() < 1e-8, "{name}: mismatch at {:?}", p);
            }
        }
    }

    #[test]
    fn generic_core_agrees_between_f64_and_jets() {
        let m = catalogue::eguchi_hanson(1.0);
        let n = 4;
        let p = m.basepoint().clone();
        let der = m.metric_derivs_at(&p, 2).unwrap();
        let g = m.metric_at(&p).unwrap();
        let mut gv = vec![0.0; n * n];
        let mut dgv = vec![0.0; n * n * n];
        let mut ddgv = vec![0.0; n * n * n * n];
        for i in 0..n {
            for j in 0..n {
                gv[i2(n, i, j)] = g[(i, j)];
                for k in 0..n {
                    dgv[i3(n, k, i, j)] = der.dg(k, i, j);
                    for l in 0..n {
                        ddgv[i4(n, k, l, i, j)] = der.ddg(k, l, i, j);
                    }
                }
            }
        }
        let ff = curvature_fields(n, &gv, &dgv, &ddgv).unwrap();
        let pack = curvature_at(&m, &p).unwrap();
        for x in 0..n * n * n * n {
            assert_abs_diff_eq!(ff.riemann[x], pack.riemann[x], epsilon = 1e-12);
            assert_abs_diff_eq!(
                ff.weyl.as_ref().unwrap()[x],
                pack.weyl.as_ref().unwrap()[x],
                epsilon = 1e-12
            );
        }
        assert_abs_diff_eq!(ff.scalar, pack.scalar, epsilon = 1e-12);
    }

    #[test]
    fn einstein_fit_detects_einstein_metrics() {
        let fit = einstein_fit(&catalogue::sphere(4, 1.0), 10, 1).unwrap();
        assert!(fit.einstein);
        assert_abs_diff_eq!(fit.lambda, 3.0, epsilon = 1e-9);

        let fit = einstein_fit(&catalogue::lookup("s3xs3").unwrap(), 10, 1).unwrap();
        assert!(fit.einstein);
        assert_abs_diff_eq!(fit.lambda, 2.0, epsilon = 1e-9);

        let fit = einstein_fit(&catalogue::eguchi_hanson(1.0), 10, 1).unwrap();
        assert!(fit.einstein);
        assert_abs_diff_eq!(fit.lambda, 0.0, epsilon = 1e-9);

        let fit = einstein_fit(&catalogue::lookup("s2xs2r2").unwrap(), 10, 1).unwrap();
        assert!(!fit.einstein);

        let fit = einstein_fit(&bumpy3(), 10, 1).unwrap();
        assert!(!fit.einstein);
    }

    #[test]
    fn schouten_rejects_small_dimensions() {
        let m = catalogue::sphere(2, 1.0);
        let p = m.basepoint().clone();
        assert!(matches!(
            schouten(&m, &p),
            Err(CurvatureError::DimensionTooSmall { n: 2 })
        ));
        assert!(weyl(&m, &p).is_err());
        assert!(cotton_york(&m, &p).is_err());
        // But the plain curvature still works in dimension 2.
        let pack = curvature_at(&m, &p).unwrap();
        assert_abs_diff_eq!(pack.scalar, 2.0, epsilon = 1e-12);
    }
}
