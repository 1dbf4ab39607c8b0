//! The loop estimator: principal matrix logarithms of parallel
//! transports around small coordinate rectangles, span-reduced and
//! bracket-closed.  For a rectangle of size `s` in the `(i, j)` plane the
//! transport is `exp(−s² R(∂_i, ∂_j) + O(s³))`, which both feeds the span
//! and gives an order-of-convergence cross-check against the curvature.

use nalgebra::DMatrix;

use crate::curvature::{christoffel_matrices, curvature_at};
use crate::geometry::MetricSpec;
use crate::linalg::mat_log;
use crate::tractor::{self, coord_rectangle, rk4_linear, TractorError};

use super::{span_basis, AlgebraBasis, Bundle, HolonomyError};

/// One transported loop: distance of the holonomy from the identity and
/// the norm of its logarithm.
#[derive(Debug, Clone)]
pub struct LoopLog {
    pub plane: (usize, usize),
    pub size: f64,
    pub hol_dist: f64,
    pub log_norm: f64,
}

#[derive(Debug, Clone)]
pub struct LoopReport {
    pub logs: Vec<LoopLog>,
}

fn generator_at(
    m: &MetricSpec,
    bundle: Bundle,
    pos: &[f64],
    dx: &[f64],
) -> Result<DMatrix<f64>, HolonomyError> {
    let n = m.dim();
    let conn = match bundle {
        Bundle::Tractor => tractor::connection_at(m, pos)?,
        Bundle::Metric => christoffel_matrices(m, pos)?,
    };
    let size = bundle.matrix_size(n);
    let mut acc = DMatrix::zeros(size, size);
    for (k, a) in conn.iter().enumerate() {
        if dx[k] != 0.0 {
            acc += -dx[k] * a;
        }
    }
    Ok(acc)
}

fn check_rectangle_fits(
    m: &MetricSpec,
    p: &[f64],
    i: usize,
    j: usize,
    size: f64,
) -> Result<(), HolonomyError> {
    let d = m.domain();
    if p[i] + size < d[i].1 && p[j] + size < d[j].1 {
        Ok(())
    } else {
        Err(HolonomyError::LoopOutsideDomain { i, j, size })
    }
}

/// Transport around one coordinate rectangle and return the holonomy.
pub(crate) fn loop_holonomy(
    m: &MetricSpec,
    p: &[f64],
    i: usize,
    j: usize,
    size: f64,
    steps: usize,
    bundle: Bundle,
) -> Result<DMatrix<f64>, HolonomyError> {
    check_rectangle_fits(m, p, i, j, size)?;
    let wps = coord_rectangle(p, i, j, size);
    rk4_linear(&wps, bundle.matrix_size(m.dim()), steps, |pos, dx| {
        generator_at(m, bundle, pos, dx)
    })
}

/// Holonomy algebra estimate from rectangle loops of the given sizes in
/// every coordinate plane, based at `p`.
///
/// Each loop is integrated twice (full and half step count) and the
/// Richardson gap calibrates the integration noise; a log that does not
/// rise above that floor is indistinguishable from the identity and is
/// dropped, so flat planes contribute nothing instead of unit-normalized
/// noise.
pub fn loop_algebra(
    m: &MetricSpec,
    p: &[f64],
    sizes: &[f64],
    steps: usize,
    tol: f64,
    bundle: Bundle,
) -> Result<(AlgebraBasis, LoopReport), HolonomyError> {
    m.check_domain(p)?;
    if steps < 4 {
        return Err(TractorError::TooFewSteps(steps).into());
    }
    let n = m.dim();
    let s = bundle.matrix_size(n);
    let ident = DMatrix::<f64>::identity(s, s);
    let mut candidates = Vec::new();
    let mut logs = Vec::new();
    let mut rel_noise = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            for &size in sizes {
                let u = loop_holonomy(m, p, i, j, size, steps, bundle)?;
                let coarse = loop_holonomy(m, p, i, j, size, (steps / 2).max(4), bundle)?;
                // RK4 halves the step count → ~16× the error, so the
                // fine run is off by about the gap over 2⁴ − 1.
                let noise = ((&u - &coarse).norm() / 15.0).max(1e-14);
                let hol_dist = (&u - &ident).norm();
                let l = mat_log(&u)?;
                logs.push(LoopLog {
                    plane: (i, j),
                    size,
                    hol_dist,
                    log_norm: l.norm(),
                });
                // A log less than 100× above the integration noise holds
                // no direction the span arithmetic could resolve.
                if l.norm() > 100.0 * noise {
                    rel_noise = rel_noise.max(noise / l.norm());
                    candidates.push(l);
                }
            }
        }
    }
    let stack_noise = rel_noise * (candidates.len() as f64).sqrt();
    Ok((
        span_basis(&candidates, bundle, s, tol, stack_noise),
        LoopReport { logs },
    ))
}

/// Fit the observed convergence order of `log Hol(s) → −s²·R(∂_i, ∂_j)`
/// over the given sizes: returns the least-squares slope of
/// `ln ‖log Hol(s) + s² R(∂_i,∂_j)‖` against `ln s` (3 for an exact RK4
/// transport; anything ≥ 2.5 certifies the quadratic leading term).
pub fn loop_order_check(
    m: &MetricSpec,
    p: &[f64],
    i: usize,
    j: usize,
    sizes: &[f64],
    steps: usize,
    bundle: Bundle,
) -> Result<f64, HolonomyError> {
    let n = m.dim();
    let pack = curvature_at(m, p)?;
    let f = match bundle {
        Bundle::Metric => DMatrix::from_fn(n, n, |a, b| pack.riemann(a, b, i, j)),
        Bundle::Tractor => {
            let elems = tractor::tractor_curvature(&pack)?;
            elems
                .into_iter()
                .find(|(pair, _)| *pair == (i, j))
                .expect("plane indices are in range")
                .1
        }
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &size in sizes {
        let u = loop_holonomy(m, p, i, j, size, steps, bundle)?;
        let err = (mat_log(&u)? + size * size * &f).norm();
        xs.push(size.ln());
        ys.push(err.max(1e-300).ln());
    }
    let xbar = xs.iter().sum::<f64>() / xs.len() as f64;
    let ybar = ys.iter().sum::<f64>() / ys.len() as f64;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    let den: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue;

    #[test]
    fn flat_loops_are_trivial() {
        let m = catalogue::flat(4);
        let (basis, report) =
            loop_algebra(&m, m.basepoint(), &[0.2, 0.1], 60, 1e-7, Bundle::Tractor).unwrap();
        assert_eq!(basis.dim, 0);
        for log in &report.logs {
            assert!(log.hol_dist < 1e-12);
        }
    }

    #[test]
    fn sphere_metric_loops_recover_so3() {
        let m = catalogue::sphere(3, 1.0);
        let (basis, report) =
            loop_algebra(&m, m.basepoint(), &[0.2, 0.1, 0.05], 160, 1e-7, Bundle::Metric)
                .unwrap();
        assert_eq!(basis.dim, 3);
        for log in &report.logs {
            assert!(log.hol_dist < 0.5, "loop too large: {}", log.hol_dist);
        }
    }

    #[test]
    fn loop_log_matches_curvature_at_quadratic_order() {
        let m = catalogue::lookup("s2xs2r2").unwrap();
        let slope =
            loop_order_check(&m, m.basepoint(), 0, 1, &[0.2, 0.1, 0.05], 400, Bundle::Metric)
                .unwrap();
        assert!(slope >= 2.5, "observed order {}", slope);
    }

    #[test]
    fn oversized_loops_are_rejected() {
        let m = catalogue::sphere(3, 1.0);
        let err = loop_algebra(&m, m.basepoint(), &[10.0], 60, 1e-7, Bundle::Metric);
        assert!(matches!(
            err,
            Err(HolonomyError::LoopOutsideDomain { .. })
        ));
    }

    /// Diagnostic: per-plane log magnitude, Richardson gap, and true
    /// integration error (against a 16× oversampled run) for a metric
    /// named in `LOOP_PROBE` (default `s2xs2`).  `cargo test -p
    /// tractor-core loop_error_table -- --ignored --nocapture`.
    #[test]
    #[ignore = "diagnostic table, run with --ignored --nocapture"]
    fn loop_error_table() {
        let name = std::env::var("LOOP_PROBE").unwrap_or_else(|_| "s2xs2".to_string());
        let m = catalogue::lookup(&name).expect("catalogue metric");
        let p = m.basepoint().clone();
        let n = m.dim();
        for i in 0..n {
            for j in i + 1..n {
                for &size in &[0.2f64, 0.1, 0.05] {
                    let run = |steps| {
                        loop_holonomy(&m, &p, i, j, size, steps, Bundle::Tractor).unwrap()
                    };
                    let lf = mat_log(&run(240)).unwrap();
                    let lc = mat_log(&run(120)).unwrap();
                    let lt = mat_log(&run(3840)).unwrap();
                    let lstar = (16.0 * &lf - &lc) / 15.0;
                    let g = m.metric_at(&p).unwrap();
                    let gram = crate::tractor::gram(&g);
                    let skew = (lf.transpose() * &gram + &gram * &lf).amax();
                    println!(
                        "plane ({i},{j}) s={size:4}: |l|={:9.2e} rich={:9.2e} err={:9.2e} err*={:9.2e} skew={:9.2e}",
                        lf.norm(),
                        (&lf - &lc).norm() / 15.0,
                        (&lf - &lt).norm(),
                        (&lstar - &lt).norm(),
                        skew
                    );
                }
            }
        }
    }
}
