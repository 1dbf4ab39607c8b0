//! Built-in example metrics and the name → builder registry used by the
//! CLI and the test-suite.
//!
//! Constructors are ordinary functions (`flat`, `sphere`, `hyperbolic`,
//! `eguchi_hanson`, plus [`crate::geometry::product`]); the registry maps
//! stable names to zero-argument builders for the fixed parameter choices
//! exercised throughout the toolkit.

use std::f64::consts::PI;

use crate::expr::{Expression, UnaryOp};
use crate::geometry::{product, MetricSpec};

/// Flat ℝⁿ in Cartesian coordinates.
pub fn flat(n: usize) -> MetricSpec {
    let coords: Vec<String> = (1..=n).map(|i| format!("x{}", i)).collect();
    let upper = (0..n)
        .map(|i| ((i, i), Expression::Const(1.0)))
        .collect();
    MetricSpec::new(
        coords,
        upper,
        vec![(-3.0, 3.0); n],
        vec![0.0; n],
        format!("flat{}", n),
    )
    .expect("flat metric is valid")
}

/// Round sphere Sⁿ of the given radius, in nested polar coordinates
/// `g_kk = r² Π_{i<k} sin²θ_i`, with the domain shrunk away from the poles
/// and the base point on the equatorial torus (all polar angles π/2).
pub fn sphere(n: usize, radius: f64) -> MetricSpec {
    assert!(n >= 2 && radius > 0.0);
    let coords: Vec<String> = if n == 2 {
        vec!["theta".to_string(), "phi".to_string()]
    } else {
        (1..=n)
            .map(|i| {
                if i == n {
                    "phi".to_string()
                } else {
                    format!("theta{}", i)
                }
            })
            .collect()
    };
    let r2 = Expression::Const(radius * radius);
    let mut upper = Vec::new();
    for k in 0..n {
        let mut e = r2.clone();
        for i in 0..k {
            e = Expression::mul(
                e,
                Expression::pow(Expression::unary(UnaryOp::Sin, Expression::Var(i)), 2.0),
            );
        }
        upper.push(((k, k), e));
    }
    let mut domain = vec![(0.2, PI - 0.2); n];
    domain[n - 1] = (0.2, 2.0 * PI - 0.2);
    let mut basepoint = vec![PI / 2.0; n];
    basepoint[n - 1] = 1.0;
    let label = if (radius - 1.0).abs() < 1e-15 {
        format!("sphere{}", n)
    } else {
        format!("sphere{}(r={})", n, radius)
    };
    MetricSpec::new(coords, upper, domain, basepoint, label).expect("sphere metric is valid")
}

/// Hyperbolic space Hⁿ of constant sectional curvature `curvature < 0`, in
/// half-space coordinates `g = (−1/curvature)·δ / y²` with `y` the last
/// coordinate.
pub fn hyperbolic(n: usize, curvature: f64) -> MetricSpec {
    assert!(n >= 2 && curvature < 0.0);
    let mut coords: Vec<String> = (1..n).map(|i| format!("x{}", i)).collect();
    coords.push("y".to_string());
    let scale = -1.0 / curvature;
    let entry = Expression::div(
        Expression::Const(scale),
        Expression::pow(Expression::Var(n - 1), 2.0),
    );
    let upper = (0..n).map(|i| ((i, i), entry.clone())).collect();
    let mut domain = vec![(-2.0, 2.0); n - 1];
    domain.push((0.3, 3.0));
    let mut basepoint = vec![0.0; n];
    basepoint[n - 1] = 1.0;
    let label = if (curvature + 1.0).abs() < 1e-15 {
        format!("hyperbolic{}", n)
    } else {
        format!("hyperbolic{}(k={})", n, curvature)
    };
    MetricSpec::new(coords, upper, domain, basepoint, label).expect("hyperbolic metric is valid")
}

/// The Eguchi–Hanson metric with bolt parameter `a`, in radial/Euler
/// coordinates `(r, θ, φ, ψ)`:
///
/// ```text
/// g = Δ⁻¹ dr² + (r²/4)(dθ² + sin²θ dφ²) + (r²/4) Δ (dψ + cosθ dφ)²,
/// Δ = 1 − a⁴/r⁴
/// ```
///
/// Ricci-flat with irreducible 4-dimensional geometry; the domain keeps
/// clear of the bolt at `r = a`.
pub fn eguchi_hanson(a: f64) -> MetricSpec {
    assert!(a > 0.0);
    let coords = ["r", "theta", "phi", "psi"];
    let a4 = crate::expr::fmt_f64(a.powi(4));
    let parse = |s: &str| Expression::parse(s, &coords).expect("catalogue expression parses");
    let upper = vec![
        ((0, 0), parse(&format!("1/(1 - {}/r^4)", a4))),
        ((1, 1), parse("r^2/4")),
        (
            (2, 2),
            parse(&format!(
                "r^2/4*(sin(theta)^2 + (1 - {}/r^4)*cos(theta)^2)",
                a4
            )),
        ),
        ((2, 3), parse(&format!("r^2/4*(1 - {}/r^4)*cos(theta)", a4))),
        ((3, 3), parse(&format!("r^2/4*(1 - {}/r^4)", a4))),
    ];
    MetricSpec::new(
        coords.iter().map(|s| s.to_string()).collect(),
        upper,
        vec![
            (1.3 * a, 4.0 * a),
            (0.3, PI - 0.3),
            (0.2, 2.0 * PI - 0.2),
            (0.2, 2.0 * PI - 0.2),
        ],
        vec![2.0 * a, 1.2, 1.0, 1.0],
        "eguchi-hanson",
    )
    .expect("eguchi-hanson metric is valid")
}

/// A named entry of the built-in registry.
pub struct CatalogueEntry {
    pub name: &'static str,
    pub summary: &'static str,
    pub build: fn() -> MetricSpec,
}

/// The registry of fixed example metrics.
pub fn entries() -> &'static [CatalogueEntry] {
    &[
        CatalogueEntry {
            name: "flat2",
            summary: "flat R^2, Cartesian",
            build: || flat(2),
        },
        CatalogueEntry {
            name: "flat3",
            summary: "flat R^3, Cartesian",
            build: || flat(3),
        },
        CatalogueEntry {
            name: "flat4",
            summary: "flat R^4, Cartesian",
            build: || flat(4),
        },
        CatalogueEntry {
            name: "sphere2",
            summary: "unit S^2, polar chart",
            build: || sphere(2, 1.0),
        },
        CatalogueEntry {
            name: "sphere3",
            summary: "unit S^3, nested polar chart",
            build: || sphere(3, 1.0),
        },
        CatalogueEntry {
            name: "sphere4",
            summary: "unit S^4, nested polar chart",
            build: || sphere(4, 1.0),
        },
        CatalogueEntry {
            name: "sphere5",
            summary: "unit S^5, nested polar chart",
            build: || sphere(5, 1.0),
        },
        CatalogueEntry {
            name: "sphere6",
            summary: "unit S^6, nested polar chart",
            build: || sphere(6, 1.0),
        },
        CatalogueEntry {
            name: "hyperbolic2",
            summary: "H^2 of curvature -1, half-space chart",
            build: || hyperbolic(2, -1.0),
        },
        CatalogueEntry {
            name: "hyperbolic4",
            summary: "H^4 of curvature -1, half-space chart",
            build: || hyperbolic(4, -1.0),
        },
        CatalogueEntry {
            name: "s2xs2",
            summary: "S^2(1) x S^2(1) product",
            build: || product(&sphere(2, 1.0), &sphere(2, 1.0)).with_label("s2xs2"),
        },
        CatalogueEntry {
            name: "s2xs2r2",
            summary: "S^2(1) x S^2(2) product",
            build: || product(&sphere(2, 1.0), &sphere(2, 2.0)).with_label("s2xs2r2"),
        },
        CatalogueEntry {
            name: "s3xs3",
            summary: "S^3(1) x S^3(1) product",
            build: || product(&sphere(3, 1.0), &sphere(3, 1.0)).with_label("s3xs3"),
        },
        CatalogueEntry {
            name: "s4xh4",
            summary: "S^4(1) x H^4(-1) product",
            build: || product(&sphere(4, 1.0), &hyperbolic(4, -1.0)).with_label("s4xh4"),
        },
        CatalogueEntry {
            name: "s4xr4",
            summary: "S^4(1) x flat R^4 product",
            build: || product(&sphere(4, 1.0), &flat(4)).with_label("s4xr4"),
        },
        CatalogueEntry {
            name: "eguchi-hanson",
            summary: "Eguchi-Hanson metric, a = 1",
            build: || eguchi_hanson(1.0),
        },
    ]
}

/// Look up a registry entry by name.
pub fn lookup(name: &str) -> Option<MetricSpec> {
    entries()
        .iter()
        .find(|e| e.name == name)
        .map(|e| (e.build)())
}
