//! Conformal tractor calculus on closed-form Riemannian metrics.
//!
//! The toolkit takes a chart-level metric whose entries are symbolic
//! expressions in the chart coordinates and computes, numerically but with
//! exact (symbolic / Taylor-jet) derivatives:
//!
//! * curvature tensors: Christoffel symbols, Riemann, Ricci, scalar
//!   curvature, the Schouten tensor P, the Weyl tensor and the Cotton-York
//!   tensor ([`curvature`]);
//! * the tractor bundle of the conformal class in the splitting of the
//!   chosen metric: tractor inner product, tractor connection, parallel
//!   transport, tractor curvature and changes of splitting ([`tractor`]);
//! * estimates of the tractor (or Levi-Civita) holonomy Lie algebra at a
//!   point, by the infinitesimal method and by shrinking-loop transport,
//!   together with a classification of the resulting algebra
//!   ([`holonomy`]);
//! * the metric cone over an Einstein base and the cone/tractor holonomy
//!   correspondence ([`cone`]);
//! * products of Einstein manifolds and the conformal decomposition
//!   coefficient relation ([`product`]).
//!
//! Charts, domains and the built-in example metrics live in [`geometry`]
//! and [`catalogue`]; the small expression language used for metric
//! entries lives in [`expr`]; [`jet`] provides truncated multivariate
//! Taylor arithmetic used for exact higher derivatives.

/// Re-export of the linear-algebra crate whose types appear throughout
/// the public API.
pub use nalgebra;

pub mod catalogue;
pub mod cone;
pub mod curvature;
pub mod expr;
pub mod geometry;
pub mod holonomy;
pub mod jet;
pub mod linalg;
pub mod product;
pub mod report;
pub mod tractor;
