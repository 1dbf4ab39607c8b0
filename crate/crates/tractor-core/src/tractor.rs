//! The rank-(n+2) standard tractor bundle in the splitting of a fixed
//! metric: inner product, connection, parallel transport, curvature,
//! change of splitting under conformal rescaling, and detection of
//! parallel tractors.
//!
//! Components are ordered `(x, Y¹..Yⁿ, z)`; the weight bundles are
//! trivialized by the fixed metric, so all slots are plain reals.  The
//! connection acts as `∇̄_k u = ∂_k u + A_k u` with
//!
//! ```text
//!        ⎛ 0        −g_kb     0    ⎞
//! A_k =  ⎜ −P_k{}^a  Γ^a_kb   δ^a_k ⎟ ,
//!        ⎝ 0         P_kb     0    ⎠
//! ```
//!
//! and parallel transport solves `du/dt = −A(ẋ) u` along curves.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::curvature::{curvature_fields, CurvatureError, CurvatureJets, CurvaturePack};
use crate::geometry::{GeometryError, MetricSpec};
use crate::jet::{Jet, Scalar};

#[derive(Debug, Error)]
pub enum TractorError {
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("parallel transport needs at least 4 steps, got {0}")]
    TooFewSteps(usize),
    #[error("curve needs at least one waypoint")]
    EmptyCurve,
    #[error("tractor has {got} components, expected {expected}")]
    ComponentCount { expected: usize, got: usize },
}

/// A tractor in the fixed splitting: `x` (weight 1 slot), `Y` (tangent
/// slot), `z` (weight −1 slot).
#[derive(Debug, Clone)]
pub struct TractorVec {
    pub x: f64,
    pub y: DVector<f64>,
    pub z: f64,
}

impl TractorVec {
    pub fn new(x: f64, y: DVector<f64>, z: f64) -> TractorVec {
        TractorVec { x, y, z }
    }

    /// Underlying manifold dimension.
    pub fn dim(&self) -> usize {
        self.y.len()
    }

    /// Flatten to an `(n+2)`-vector in slot order `(x, Y, z)`.
    pub fn to_vector(&self) -> DVector<f64> {
        let n = self.y.len();
        let mut v = DVector::zeros(n + 2);
        v[0] = self.x;
        v.rows_mut(1, n).copy_from(&self.y);
        v[n + 1] = self.z;
        v
    }

    pub fn from_vector(v: &DVector<f64>) -> TractorVec {
        let n = v.len() - 2;
        TractorVec {
            x: v[0],
            y: v.rows(1, n).into_owned(),
            z: v[n + 1],
        }
    }
}

/// Gram matrix of the tractor metric in slot order `(x, Y, z)`:
/// `⟨(x,Y,z),(x',Y',z')⟩ = x z' + x' z + g(Y,Y')`.
pub fn gram(g: &DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    let mut gg = DMatrix::zeros(n + 2, n + 2);
    gg[(0, n + 1)] = 1.0;
    gg[(n + 1, 0)] = 1.0;
    gg.view_mut((1, 1), (n, n)).copy_from(g);
    gg
}

/// Tractor inner product of two component vectors with respect to the
/// metric `g` at the point.
pub fn tractor_inner(u: &DVector<f64>, v: &DVector<f64>, g: &DMatrix<f64>) -> f64 {
    let n = g.nrows();
    let uy = u.rows(1, n);
    let vy = v.rows(1, n);
    u[0] * v[n + 1] + v[0] * u[n + 1] + (g * vy).dot(&uy)
}

/// Assemble the connection matrices from flat curvature-field arrays
/// (generic so the same block layout serves values and jets).
fn assemble_connection<S: Scalar>(
    n: usize,
    g: &[S],
    ginv: &[S],
    gamma: &[S],
    p: &[S],
) -> Vec<Vec<S>> {
    let s = n + 2;
    let zero = g[0].lift(0.0);
    let one = g[0].lift(1.0);
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut a = vec![zero.clone(); s * s];
        for b in 0..n {
            // x row: −g(∂_k, ·).
            a[1 + b] = g[k * n + b].neg();
            // z row: P(∂_k, ·).
            a[(n + 1) * s + 1 + b] = p[k * n + b].clone();
        }
        for i in 0..n {
            // Y rows: −P(∂_k)♯, Levi-Civita part, z·∂_k.
            let mut pr = zero.clone();
            for m in 0..n {
                pr = pr.add(&ginv[i * n + m].mul(&p[k * n + m]));
            }
            a[(1 + i) * s] = pr.neg();
            for b in 0..n {
                a[(1 + i) * s + 1 + b] = gamma[(i * n + k) * n + b].clone();
            }
            if i == k {
                a[(1 + i) * s + n + 1] = one.clone();
            }
        }
        out.push(a);
    }
    out
}

/// Connection matrices `A_k` at a point, evaluated directly from the
/// metric (fast path used by transport).
pub fn connection_at(m: &MetricSpec, pt: &[f64]) -> Result<Vec<DMatrix<f64>>, TractorError> {
    let n = m.dim();
    if n < 3 {
        return Err(CurvatureError::DimensionTooSmall { n }.into());
    }
    let der = m.metric_derivs_at(pt, 2)?;
    let mut gv = vec![0.0; n * n];
    let mut dgv = vec![0.0; n * n * n];
    let mut ddgv = vec![0.0; n * n * n * n];
    let g = m.metric_at(pt)?;
    for i in 0..n {
        for j in 0..n {
            gv[i * n + j] = g[(i, j)];
            for k in 0..n {
                dgv[(k * n + i) * n + j] = der.dg(k, i, j);
                for l in 0..n {
                    ddgv[((k * n + l) * n + i) * n + j] = der.ddg(k, l, i, j);
                }
            }
        }
    }
    let f = curvature_fields(n, &gv, &dgv, &ddgv).map_err(CurvatureError::from)?;
    let p = f.p.as_ref().expect("n >= 3 checked");
    let flat = assemble_connection(n, &f.g, &f.ginv, &f.gamma, p);
    Ok(flat
        .into_iter()
        .map(|a| DMatrix::from_row_slice(n + 2, n + 2, &a))
        .collect())
}

/// Connection matrices `A_k` from an already-computed curvature pack.
pub fn connection_matrices(pack: &CurvaturePack) -> Result<Vec<DMatrix<f64>>, TractorError> {
    let n = pack.n;
    let p = pack
        .p
        .as_ref()
        .ok_or(CurvatureError::DimensionTooSmall { n })?;
    let mut gv = vec![0.0; n * n];
    let mut ginvv = vec![0.0; n * n];
    let mut gammav = vec![0.0; n * n * n];
    let mut pv = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            gv[i * n + j] = pack.g[(i, j)];
            ginvv[i * n + j] = pack.ginv[(i, j)];
            pv[i * n + j] = p[(i, j)];
            for k in 0..n {
                gammav[(i * n + j) * n + k] = pack.gamma(i, j, k);
            }
        }
    }
    let flat = assemble_connection(n, &gv, &ginvv, &gammav, &pv);
    Ok(flat
        .into_iter()
        .map(|a| DMatrix::from_row_slice(n + 2, n + 2, &a))
        .collect())
}

/// Connection matrices as jets (flat `(n+2)²` row-major entries per
/// coordinate direction), for covariant-derivative towers.
pub fn connection_jets(cj: &CurvatureJets) -> Result<Vec<Vec<Jet>>, CurvatureError> {
    let n = cj.n();
    let p = cj
        .fields
        .p
        .as_ref()
        .ok_or(CurvatureError::DimensionTooSmall { n })?;
    Ok(assemble_connection(
        n,
        &cj.fields.g,
        &cj.fields.ginv,
        &cj.fields.gamma,
        p,
    ))
}

/// Largest violation of metric compatibility `A_kᵀ G + G A_k = ∂_k G`
/// over the coordinate directions at a point.  (In a coordinate gauge the
/// matrices `A_k` are skew with respect to G only where `∂g` vanishes; the
/// compatibility identity is the invariant statement.)
pub fn compatibility_residual(m: &MetricSpec, pt: &[f64]) -> Result<f64, TractorError> {
    let n = m.dim();
    let conn = connection_at(m, pt)?;
    let g = m.metric_at(pt)?;
    let der = m.metric_derivs_at(pt, 1)?;
    let gg = gram(&g);
    let mut worst = 0.0f64;
    for (k, a) in conn.iter().enumerate() {
        let mut dgram = DMatrix::zeros(n + 2, n + 2);
        for i in 0..n {
            for j in 0..n {
                dgram[(1 + i, 1 + j)] = der.dg(k, i, j);
            }
        }
        let res = a.transpose() * &gg + &gg * a - dgram;
        worst = worst.max(res.amax());
    }
    Ok(worst)
}

/// Result of a parallel transport.
#[derive(Debug, Clone)]
pub struct Transported {
    /// Transported components at the end of the curve.
    pub u: DVector<f64>,
    /// ⟨u,u⟩ at the start point.
    pub start_norm: f64,
    /// ⟨u,u⟩ at the end point.
    pub end_norm: f64,
    /// |end_norm − start_norm|.
    pub norm_drift: f64,
    /// Difference against a half-step-count run, when requested.
    pub richardson: Option<f64>,
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(&x, &y)| x + t * (y - x)).collect()
}

/// Fundamental matrix of `U' = M(x(t)) U`, `U(0) = I`, along the
/// piecewise-linear curve through `waypoints` with a fixed-step RK4
/// (`steps` overall, at least one per segment).  `eval(pos, dx)` supplies
/// the generator `M` for a segment of constant velocity `dx`.
pub(crate) fn rk4_linear<E>(
    waypoints: &[Vec<f64>],
    size: usize,
    steps: usize,
    mut eval: impl FnMut(&[f64], &[f64]) -> Result<DMatrix<f64>, E>,
) -> Result<DMatrix<f64>, E> {
    let nseg = waypoints.len() - 1;
    let per = steps.div_ceil(nseg.max(1)).max(1);
    let h = 1.0 / per as f64;
    let mut u = DMatrix::identity(size, size);
    for seg in 0..nseg {
        let a = &waypoints[seg];
        let b = &waypoints[seg + 1];
        let dx: Vec<f64> = b.iter().zip(a).map(|(&y, &x)| y - x).collect();
        if dx.iter().all(|&v| v == 0.0) {
            continue;
        }
        // The end matrix of one step is the start matrix of the next.
        let mut m_start = eval(a, &dx)?;
        for i in 0..per {
            let t0 = i as f64 * h;
            let m_mid = eval(&lerp(a, b, t0 + 0.5 * h), &dx)?;
            let m_end = eval(&lerp(a, b, t0 + h), &dx)?;
            let k1 = &m_start * &u;
            let k2 = &m_mid * &(&u + (0.5 * h) * &k1);
            let k3 = &m_mid * &(&u + (0.5 * h) * &k2);
            let k4 = &m_end * &(&u + h * &k3);
            u += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            m_start = m_end;
        }
    }
    Ok(u)
}

/// −Σ_k ẋ^k A_k of the tractor connection at a position.
fn tractor_generator(
    m: &MetricSpec,
    pos: &[f64],
    dx: &[f64],
) -> Result<DMatrix<f64>, TractorError> {
    let n = m.dim();
    let conn = connection_at(m, pos)?;
    let mut acc = DMatrix::zeros(n + 2, n + 2);
    for (k, a) in conn.iter().enumerate() {
        if dx[k] != 0.0 {
            acc += -dx[k] * a;
        }
    }
    Ok(acc)
}

fn transport_once(
    m: &MetricSpec,
    waypoints: &[Vec<f64>],
    u0: &DVector<f64>,
    steps: usize,
) -> Result<DVector<f64>, TractorError> {
    let n = m.dim();
    let fund = rk4_linear(waypoints, n + 2, steps, |pos, dx| {
        tractor_generator(m, pos, dx)
    })?;
    Ok(fund * u0)
}

/// Fundamental matrix of tractor transport along a piecewise-linear curve.
pub fn transport_matrix(
    m: &MetricSpec,
    waypoints: &[Vec<f64>],
    steps: usize,
) -> Result<DMatrix<f64>, TractorError> {
    if waypoints.is_empty() {
        return Err(TractorError::EmptyCurve);
    }
    if steps < 4 {
        return Err(TractorError::TooFewSteps(steps));
    }
    for w in waypoints {
        m.check_domain(w)?;
    }
    rk4_linear(waypoints, m.dim() + 2, steps, |pos, dx| {
        tractor_generator(m, pos, dx)
    })
}

/// Parallel-transport `u0` along the piecewise-linear curve through
/// `waypoints` with fixed-step RK4 (`steps` steps overall, at least one
/// per segment).  Set `richardson` to also run at half the step count and
/// report the difference as a consistency measure.
pub fn transport(
    m: &MetricSpec,
    waypoints: &[Vec<f64>],
    u0: &DVector<f64>,
    steps: usize,
    richardson: bool,
) -> Result<Transported, TractorError> {
    if waypoints.is_empty() {
        return Err(TractorError::EmptyCurve);
    }
    if steps < 4 {
        return Err(TractorError::TooFewSteps(steps));
    }
    let n = m.dim();
    if u0.len() != n + 2 {
        return Err(TractorError::ComponentCount {
            expected: n + 2,
            got: u0.len(),
        });
    }
    for w in waypoints {
        m.check_domain(w)?;
    }
    let start_norm = tractor_inner(u0, u0, &m.metric_at(&waypoints[0])?);
    let u = if waypoints.len() == 1 {
        u0.clone()
    } else {
        transport_once(m, waypoints, u0, steps)?
    };
    let end_norm = tractor_inner(&u, &u, &m.metric_at(waypoints.last().unwrap())?);
    let richardson = if richardson && waypoints.len() > 1 {
        let half = transport_once(m, waypoints, u0, (steps / 2).max(4))?;
        Some((&u - half).norm())
    } else {
        None
    };
    Ok(Transported {
        u,
        start_norm,
        end_norm,
        norm_drift: (end_norm - start_norm).abs(),
        richardson,
    })
}

/// Waypoints of the `s × s` coordinate-rectangle loop in the `(i, j)`
/// plane based at `base`.
pub fn coord_rectangle(base: &[f64], i: usize, j: usize, s: f64) -> Vec<Vec<f64>> {
    let mut p0 = base.to_vec();
    let mut p1 = base.to_vec();
    let mut p2 = base.to_vec();
    let mut p3 = base.to_vec();
    p1[i] += s;
    p2[i] += s;
    p2[j] += s;
    p3[j] += s;
    let _ = &mut p0;
    vec![p0.clone(), p1, p2, p3, p0]
}

/// Curvature endomorphisms keyed by coordinate plane `(i, j)`, `i < j`.
pub type PlaneCurvatures = Vec<((usize, usize), DMatrix<f64>)>;

/// Tractor curvature `F_ij = R̄(∂_i, ∂_j)` for all `i < j`, as
/// `(n+2)×(n+2)` algebra elements with block structure
///
/// ```text
///        ⎛ 0          0        0 ⎞
/// F_ij = ⎜ −(CY_ij)♯  W(∂_i,∂_j) 0 ⎟ .
///        ⎝ 0          CY_ij    0 ⎠
/// ```
pub fn tractor_curvature(pack: &CurvaturePack) -> Result<PlaneCurvatures, TractorError> {
    let n = pack.n;
    if pack.p.is_none() {
        return Err(CurvatureError::DimensionTooSmall { n }.into());
    }
    let s = n + 2;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut f = DMatrix::zeros(s, s);
            for a in 0..n {
                let mut sharp = 0.0;
                for mm in 0..n {
                    sharp += pack.ginv[(a, mm)] * pack.cy(i, j, mm);
                }
                f[(1 + a, 0)] = -sharp;
                for b in 0..n {
                    f[(1 + a, 1 + b)] = pack.weyl(a, b, i, j);
                }
            }
            for b in 0..n {
                f[(n + 1, 1 + b)] = pack.cy(i, j, b);
            }
            out.push(((i, j), f));
        }
    }
    Ok(out)
}

/// Largest tractor-curvature component at a point.
pub fn tractor_curvature_max(pack: &CurvaturePack) -> Result<f64, TractorError> {
    Ok(tractor_curvature(pack)?
        .iter()
        .map(|(_, f)| f.amax())
        .fold(0.0, f64::max))
}

/// Tractor curvature elements as jets (flat `(n+2)²` row-major), for all
/// `i < j` in lexicographic order.
pub fn curvature_elements_jets(cj: &CurvatureJets) -> Result<Vec<Vec<Jet>>, CurvatureError> {
    let n = cj.n();
    if cj.fields.p.is_none() {
        return Err(CurvatureError::DimensionTooSmall { n });
    }
    let s = n + 2;
    let zero = cj.fields.g[0].lift(0.0);
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let mut f = vec![zero.clone(); s * s];
            for a in 0..n {
                let mut sharp = zero.clone();
                for mm in 0..n {
                    sharp = sharp.add(&cj.ginv(a, mm).mul(cj.cy(i, j, mm)));
                }
                f[(1 + a) * s] = sharp.neg();
                for b in 0..n {
                    f[(1 + a) * s + 1 + b] = cj.weyl(a, b, i, j).clone();
                }
            }
            for b in 0..n {
                f[(n + 1) * s + 1 + b] = cj.cy(i, j, b).clone();
            }
            out.push(f);
        }
    }
    Ok(out)
}

/// The weighted change of splitting for `Υ`:
/// `(x, Y, z) ↦ (x, Y + Υ♯ x, z − Υ(Y) − ½ g⁻¹(Υ,Υ) x)` as a matrix.
pub fn change_of_splitting_matrix(upsilon: &DVector<f64>, ginv: &DMatrix<f64>) -> DMatrix<f64> {
    let n = ginv.nrows();
    let sharp = ginv * upsilon;
    let up2 = sharp.dot(upsilon);
    let mut m = DMatrix::identity(n + 2, n + 2);
    for a in 0..n {
        m[(1 + a, 0)] = sharp[a];
        m[(n + 1, 1 + a)] = -upsilon[a];
    }
    m[(n + 1, 0)] = -0.5 * up2;
    m
}

/// Apply the change of splitting to a tractor.
pub fn change_of_splitting(
    u: &TractorVec,
    upsilon: &DVector<f64>,
    ginv: &DMatrix<f64>,
) -> TractorVec {
    let v = change_of_splitting_matrix(upsilon, ginv) * u.to_vector();
    TractorVec::from_vector(&v)
}

/// Full component transfer from the gauge `g` to `ĝ = e^{2f} g`: the
/// weighted change of splitting with `Υ = df` followed by the re-scaling
/// of the weighted slots, `diag(e^{f}, e^{−f} I, e^{−f})`.
///
/// Transport in the rescaled gauge equals this matrix conjugating
/// transport in the original gauge.
pub fn gauge_transfer(
    f_val: f64,
    upsilon: &DVector<f64>,
    ginv: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = ginv.nrows();
    let mut d = DMatrix::identity(n + 2, n + 2);
    d[(0, 0)] = f_val.exp();
    for a in 0..n {
        d[(1 + a, 1 + a)] = (-f_val).exp();
    }
    d[(n + 1, n + 1)] = (-f_val).exp();
    d * change_of_splitting_matrix(upsilon, ginv)
}

/// A parallel tractor candidate: common kernel vector of the holonomy
/// algebra, with its tractor norm and norm sign (−1, 0, +1).
#[derive(Debug, Clone)]
pub struct ParallelTractor {
    pub v: DVector<f64>,
    pub norm: f64,
    pub sign: i8,
}

/// Detect parallel tractors as the common kernel of the estimated
/// infinitesimal tractor holonomy algebra at the base point.
pub fn detect_parallel_tractors(
    m: &MetricSpec,
    max_order: usize,
    tol: f64,
) -> Result<Vec<ParallelTractor>, crate::holonomy::HolonomyError> {
    let basis = crate::holonomy::infinitesimal_algebra(m, m.basepoint(), max_order, tol)?;
    Ok(fixed_vectors_of(&basis.elements, m, tol)?)
}

/// Common kernel of a family of tractor algebra elements, tagged with
/// norm signs with respect to the base-point metric.
pub(crate) fn fixed_vectors_of(
    elements: &[DMatrix<f64>],
    m: &MetricSpec,
    tol: f64,
) -> Result<Vec<ParallelTractor>, GeometryError> {
    let n = m.dim();
    let g0 = m.metric_at(m.basepoint())?;
    let kern = crate::linalg::common_kernel(elements, n + 2, tol.max(1e-9));
    Ok(kern
        .into_iter()
        .map(|v| {
            let norm = tractor_inner(&v, &v, &g0);
            let sign = if norm.abs() < 1e-7 {
                0
            } else if norm > 0.0 {
                1
            } else {
                -1
            };
            ParallelTractor { v, norm, sign }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;
    use crate::curvature::curvature_at;
    use crate::expr::Expression;
    use crate::jet::JetCtx;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn rand_vec(rng: &mut impl Rng, len: usize) -> DVector<f64> {
        DVector::from_fn(len, |_, _| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn inner_product_oracles() {
        let m = catalogue::sphere(4, 1.0);
        let g = m.metric_at(m.basepoint()).unwrap();
        let n = 4;
        let e_xx = TractorVec::new(1.0, DVector::zeros(n), 0.0).to_vector();
        assert_eq!(tractor_inner(&e_xx, &e_xx, &g), 0.0);
        let s = TractorVec::new(1.0, DVector::zeros(n), -0.5).to_vector();
        assert_abs_diff_eq!(tractor_inner(&s, &s, &g), -1.0, epsilon = 1e-15);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let y = rand_vec(&mut rng, n);
        let u = TractorVec::new(0.0, y.clone(), 0.0).to_vector();
        let gy = (&g * &y).dot(&y);
        assert_abs_diff_eq!(tractor_inner(&u, &u, &g), gy, epsilon = 1e-14);
        assert!(gy > 0.0);
    }

    #[test]
    fn flat_connection_structure() {
        let m = catalogue::flat(4);
        let conn = connection_at(&m, &[0.0; 4]).unwrap();
        let a1 = &conn[0];
        // x row: −g(∂_1, ·) = −e₁ᵀ on the Y block.
        assert_eq!(a1[(0, 1)], -1.0);
        // Y row 1 gets z: +1 in the z column; P and Γ parts vanish.
        assert_eq!(a1[(1, 5)], 1.0);
        assert_eq!(a1[(1, 0)], 0.0);
        // z row vanishes entirely for flat space.
        assert_eq!(a1.row(5).amax(), 0.0);
    }

    #[test]
    fn connection_is_pointwise_skew_where_metric_is_critical() {
        // At the sphere chart base point all ∂g vanish, so the A_k are
        // honestly skew for the Gram matrix there; same for flat space.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for m in [catalogue::flat(4), catalogue::sphere(4, 1.0)] {
            let p = m.basepoint().clone();
            let g = m.metric_at(&p).unwrap();
            let gg = gram(&g);
            let conn = connection_at(&m, &p).unwrap();
            for a in &conn {
                for _ in 0..100 {
                    let u = rand_vec(&mut rng, 6);
                    let v = rand_vec(&mut rng, 6);
                    let au = a * &u;
                    let av = a * &v;
                    let lhs = (au.transpose() * &gg * &v)[(0, 0)]
                        + (u.transpose() * &gg * &av)[(0, 0)];
                    assert!(lhs.abs() < 1e-10, "{}: ⟨Au,v⟩+⟨u,Av⟩ = {}", m.label(), lhs);
                }
            }
        }
    }

    #[test]
    fn connection_satisfies_metric_compatibility() {
        for name in ["sphere4", "hyperbolic4", "eguchi-hanson", "s3xs3"] {
            let m = catalogue::lookup(name).unwrap();
            for p in m.sample_points(4, 5) {
                let r = compatibility_residual(&m, &p).unwrap();
                assert!(r < 1e-10, "{}: compatibility residual {}", name, r);
            }
        }
    }

    #[test]
    fn connection_matrices_match_fast_path() {
        let m = catalogue::eguchi_hanson(1.0);
        let p = m.sample_points(1, 7).pop().unwrap();
        let pack = curvature_at(&m, &p).unwrap();
        let a = connection_matrices(&pack).unwrap();
        let b = connection_at(&m, &p).unwrap();
        for k in 0..4 {
            assert!((&a[k] - &b[k]).amax() < 1e-12);
        }
    }

    #[test]
    fn einstein_section_is_parallel() {
        // Unit spheres: A_k (1,0,−½) = 0.  S³×S³ (λ = 2, n = 6):
        // A_k (1,0,−λ/(2n−2)) = A_k (1,0,−0.2) = 0.
        for (m, zslot) in [
            (catalogue::sphere(3, 1.0), -0.5),
            (catalogue::sphere(5, 1.0), -0.5),
            (catalogue::lookup("s3xs3").unwrap(), -0.2),
        ] {
            let n = m.dim();
            let s = TractorVec::new(1.0, DVector::zeros(n), zslot).to_vector();
            for p in m.sample_points(10, 11) {
                for a in connection_at(&m, &p).unwrap() {
                    assert!(
                        (a * &s).amax() < 1e-9,
                        "{}: section not parallel",
                        m.label()
                    );
                }
            }
        }
    }

    #[test]
    fn transport_trivial_cases() {
        let m = catalogue::sphere(4, 1.0);
        let p = m.basepoint().clone();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let u0 = rand_vec(&mut rng, 6);
        // Single waypoint: exact identity.
        let t = transport(&m, std::slice::from_ref(&p), &u0, 100, false).unwrap();
        assert_eq!(t.u, u0);
        // Zero-length segment: exact identity.
        let t = transport(&m, &[p.clone(), p.clone()], &u0, 100, false).unwrap();
        assert_eq!(t.u, u0);
        // Too few steps rejected.
        assert!(matches!(
            transport(&m, std::slice::from_ref(&p), &u0, 3, false),
            Err(TractorError::TooFewSteps(3))
        ));
    }

    #[test]
    fn transport_around_loops() {
        // A conformal rescaling of flat space has a non-constant connection
        // but trivial holonomy: loops return the input.
        let f = Expression::parse("0.2*x1 + 0.1*x2^2", &["x1", "x2", "x3", "x4"]).unwrap();
        let (m, _) = catalogue::flat(4).rescale(f).unwrap();
        let loop_wps = coord_rectangle(&[0.3, -0.2, 0.1, 0.0], 0, 1, 0.5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let u0 = rand_vec(&mut rng, 6);
        let t = transport(&m, &loop_wps, &u0, 1200, true).unwrap();
        assert!((&t.u - &u0).norm() < 1e-9, "flat-gauge loop: {}", (&t.u - &u0).norm());
        assert!(t.richardson.unwrap() < 1e-8);

        // The parallel tractor of the unit sphere returns exactly.
        let m = catalogue::sphere(4, 1.0);
        let s = TractorVec::new(1.0, DVector::zeros(4), -0.5).to_vector();
        let wps = coord_rectangle(m.basepoint(), 0, 2, 0.4);
        let t = transport(&m, &wps, &s, 1000, false).unwrap();
        assert!((&t.u - &s).norm() < 1e-6);

        // A non-parallel tractor on the sphere still preserves its norm.
        let u0 = rand_vec(&mut rng, 6);
        let t = transport(&m, &wps, &u0, 1000, false).unwrap();
        assert!(t.norm_drift < 1e-8 * (1.0 + t.start_norm.abs()));
    }

    #[test]
    fn norm_preserved_along_curved_transport() {
        let m = catalogue::eguchi_hanson(1.0);
        let base = m.basepoint().clone();
        let mut target = base.clone();
        target[0] += 0.8;
        target[1] += 0.4;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        for _ in 0..3 {
            let u0 = rand_vec(&mut rng, 6);
            let t = transport(&m, &[base.clone(), target.clone()], &u0, 1000, false).unwrap();
            assert!(
                t.norm_drift < 1e-8 * (1.0 + t.start_norm.abs()),
                "drift {}",
                t.norm_drift
            );
        }
    }

    #[test]
    fn tractor_curvature_vanishes_for_conformally_flat() {
        for m in [
            catalogue::flat(4),
            catalogue::sphere(4, 1.0),
            catalogue::hyperbolic(4, -1.0),
        ] {
            for p in m.sample_points(5, 13) {
                let pack = curvature_at(&m, &p).unwrap();
                let fmax = tractor_curvature_max(&pack).unwrap();
                assert!(fmax < 1e-8, "{}: |F| = {}", m.label(), fmax);
            }
        }
    }

    #[test]
    fn tractor_curvature_block_structure_and_skewness() {
        let m = catalogue::lookup("s3xs3").unwrap();
        let p = m.basepoint().clone();
        let pack = curvature_at(&m, &p).unwrap();
        let gg = gram(&pack.g);
        let elems = tractor_curvature(&pack).unwrap();
        let mut nonzero = 0.0f64;
        for (_, f) in &elems {
            // x row exactly zero by construction; z column too.
            assert_eq!(f.row(0).amax(), 0.0);
            assert_eq!(f.column(7).amax(), 0.0);
            nonzero = nonzero.max(f.amax());
            // Algebra elements are honestly G-skew.
            let res = f.transpose() * &gg + &gg * f;
            assert!(res.amax() < 1e-12);
        }
        assert!(nonzero > 1e-3, "curvature unexpectedly small: {}", nonzero);
    }

    #[test]
    fn tractor_curvature_matches_connection_commutator() {
        // F_ij = ∂_i A_j − ∂_j A_i + [A_i, A_j], with ∂A from exact jets.
        for name in ["sphere3", "hyperbolic4", "s2xs2r2", "s3xs3", "eguchi-hanson"] {
            let m = catalogue::lookup(name).unwrap();
            let n = m.dim();
            let p = m.sample_points(1, 17).pop().unwrap();
            let cj = crate::curvature::curvature_jets(&m, &p, 1).unwrap();
            let conn = connection_jets(&cj).unwrap();
            let s = n + 2;
            let value_mat = |a: &Vec<Jet>| {
                DMatrix::from_fn(s, s, |r, c| a[r * s + c].value())
            };
            let deriv_mat = |a: &Vec<Jet>, k: usize| {
                let mut alpha = vec![0u8; n];
                alpha[k] = 1;
                DMatrix::from_fn(s, s, |r, c| a[r * s + c].deriv(&alpha))
            };
            let pack = curvature_at(&m, &p).unwrap();
            let elems = tractor_curvature(&pack).unwrap();
            let mut idx = 0;
            for i in 0..n {
                for j in i + 1..n {
                    let ai = value_mat(&conn[i]);
                    let aj = value_mat(&conn[j]);
                    let commutator = deriv_mat(&conn[j], i) - deriv_mat(&conn[i], j)
                        + &ai * &aj
                        - &aj * &ai;
                    let (pair, f) = &elems[idx];
                    assert_eq!(*pair, (i, j));
                    assert!(
                        (f - commutator).amax() < 1e-7,
                        "{}: commutator mismatch at ({}, {})",
                        name,
                        i,
                        j
                    );
                    idx += 1;
                }
            }
        }
    }

    #[test]
    fn change_of_splitting_preserves_inner_product() {
        let m = catalogue::sphere(4, 1.0);
        let p = m.basepoint().clone();
        let g = m.metric_at(&p).unwrap();
        let ginv = m.inverse_metric_at(&p).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for _ in 0..100 {
            let u = rand_vec(&mut rng, 6);
            let v = rand_vec(&mut rng, 6);
            let ups = rand_vec(&mut rng, 4);
            let c = change_of_splitting_matrix(&ups, &ginv);
            let lhs = tractor_inner(&(&c * &u), &(&c * &v), &g);
            let rhs = tractor_inner(&u, &v, &g);
            assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
        }
        // Υ = 0 is the identity.
        let c = change_of_splitting_matrix(&DVector::zeros(4), &ginv);
        assert!((c - DMatrix::<f64>::identity(6, 6)).amax() < 1e-15);
        // (1,0,0) ↦ (1, Υ♯, −½|Υ|²).
        let ups = rand_vec(&mut rng, 4);
        let got = change_of_splitting(
            &TractorVec::new(1.0, DVector::zeros(4), 0.0),
            &ups,
            &ginv,
        );
        let sharp = &ginv * &ups;
        assert!((got.y.clone() - &sharp).norm() < 1e-14);
        assert_abs_diff_eq!(got.z, -0.5 * sharp.dot(&ups), epsilon = 1e-14);
        assert_eq!(got.x, 1.0);
    }

    #[test]
    fn gauge_transfer_conjugates_the_connection() {
        // Â_k(ĝ) = (C A_k − ∂_k C) C⁻¹ for C = gauge_transfer(f, df, g⁻¹).
        for (name, fsrc) in [("sphere4", "0.2*sin(theta1)"), ("eguchi-hanson", "0.1*sin(theta)")] {
            let m = catalogue::lookup(name).unwrap();
            let n = m.dim();
            let coords = m.coord_refs();
            let f = Expression::parse(fsrc, &coords).unwrap();
            let (mh, _) = m.rescale(f.clone()).unwrap();
            for p in m.sample_points(3, 19) {
                let cj = crate::curvature::curvature_jets(&m, &p, 1).unwrap();
                let ctx2 = JetCtx::new(n, 2);
                let vars = Jet::variables(&ctx2, &p);
                let fj = f.eval_scalar(&vars).unwrap();
                let ups: Vec<Jet> = (0..n).map(|a| fj.d(a, &cj.ctx)).collect();
                let fj1 = fj.truncate(&cj.ctx);
                // C as jets of order 1.
                let s = n + 2;
                let zero = fj1.lift(0.0);
                let mut c = vec![zero.clone(); s * s];
                let ef = fj1.exp();
                let emf = fj1.neg().exp();
                let mut sharp = vec![zero.clone(); n];
                let mut up2 = zero.clone();
                for a in 0..n {
                    for (b, up) in ups.iter().enumerate() {
                        sharp[a] = sharp[a].add(&cj.ginv(a, b).mul(up));
                    }
                    up2 = up2.add(&sharp[a].mul(&ups[a]));
                }
                c[0] = ef.clone();
                for a in 0..n {
                    c[(1 + a) * s] = emf.mul(&sharp[a]);
                    c[(1 + a) * s + 1 + a] = emf.clone();
                    c[(n + 1) * s + 1 + a] = emf.mul(&ups[a]).neg();
                }
                c[(n + 1) * s] = emf.mul(&up2).scale(-0.5);
                c[(n + 1) * s + n + 1] = emf.clone();

                let cval = DMatrix::from_fn(s, s, |r, cc| c[r * s + cc].value());
                let cinv = cval.clone().try_inverse().unwrap();
                let conn = connection_at(&m, &p).unwrap();
                let conn_hat = connection_at(&mh, &p).unwrap();
                for k in 0..n {
                    let mut alpha = vec![0u8; n];
                    alpha[k] = 1;
                    let dck = DMatrix::from_fn(s, s, |r, cc| c[r * s + cc].deriv(&alpha));
                    let expected = (&cval * &conn[k] - &dck) * &cinv;
                    assert!(
                        (&conn_hat[k] - &expected).amax() < 1e-9,
                        "{}: gauge conjugation failed in direction {} at {:?} ({})",
                        name,
                        k,
                        p,
                        (&conn_hat[k] - &expected).amax()
                    );
                }
            }
        }
    }

    #[test]
    fn transport_commutes_with_gauge_transfer() {
        let m = catalogue::sphere(4, 1.0);
        let coords = m.coord_refs();
        let f = Expression::parse("0.2*sin(theta1) + 0.1*theta2", &coords).unwrap();
        let (mh, resc) = m.rescale(f.clone()).unwrap();
        let p0 = m.basepoint().clone();
        let mut p1 = p0.clone();
        p1[0] += 0.5;
        p1[2] -= 0.3;
        let curve = vec![p0.clone(), p1.clone()];
        let transfer_at = |pt: &Vec<f64>| {
            let fv = resc.f_at(pt).unwrap();
            let ups = DVector::from_vec(resc.upsilon_at(pt).unwrap());
            let ginv = m.inverse_metric_at(pt).unwrap();
            gauge_transfer(fv, &ups, &ginv)
        };
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let u0 = rand_vec(&mut rng, 6);
        let direct = transport(&mh, &curve, &(transfer_at(&p0) * &u0), 1000, false).unwrap();
        let conjugated = transfer_at(&p1) * transport(&m, &curve, &u0, 1000, false).unwrap().u;
        assert!(
            (&direct.u - &conjugated).norm() < 1e-6,
            "gauge covariance broken: {}",
            (&direct.u - &conjugated).norm()
        );
    }
}
