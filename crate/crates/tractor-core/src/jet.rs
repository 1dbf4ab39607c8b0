//! Truncated multivariate Taylor arithmetic ("jets").
//!
//! A [`Jet`] stores the Taylor coefficients of a smooth function at a point,
//! truncated at a fixed total degree. Evaluating a metric entry on jets
//! seeded with the chart coordinates yields every partial derivative up to
//! the truncation order in one pass, exactly (no finite-difference noise):
//! the arithmetic below implements the exact recurrences for sums, products,
//! quotients and the elementary functions on truncated Taylor series.
//!
//! The [`Scalar`] trait abstracts over plain `f64` and [`Jet`] so that the
//! curvature pipeline can be written once and run in either mode.

use std::collections::HashMap;
use std::sync::Arc;

/// Numeric singularities surfaced by scalar operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum NumError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of a non-positive value")]
    LogDomain,
    #[error("sqrt of a negative value")]
    SqrtDomain,
    #[error("fractional or negative power of an invalid base")]
    PowDomain,
    #[error("non-finite result")]
    NonFinite,
}

/// Common interface of `f64` and [`Jet`] used by expression evaluation and
/// the curvature pipeline.
pub trait Scalar: Clone + std::fmt::Debug {
    /// A constant with the same "shape" as `self` (same jet context).
    fn lift(&self, v: f64) -> Self;
    /// The zeroth-order (point value) part.
    fn value(&self) -> f64;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, v: f64) -> Self;
    fn div(&self, o: &Self) -> Result<Self, NumError>;
    fn powc(&self, c: f64) -> Result<Self, NumError>;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Result<Self, NumError>;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn tanh(&self) -> Self;
    fn exp(&self) -> Self;
    fn log(&self) -> Result<Self, NumError>;
    fn sqrt(&self) -> Result<Self, NumError>;
}

impl Scalar for f64 {
    fn lift(&self, v: f64) -> f64 {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn add(&self, o: &f64) -> f64 {
        self + o
    }
    fn sub(&self, o: &f64) -> f64 {
        self - o
    }
    fn mul(&self, o: &f64) -> f64 {
        self * o
    }
    fn neg(&self) -> f64 {
        -self
    }
    fn scale(&self, v: f64) -> f64 {
        self * v
    }
    fn div(&self, o: &f64) -> Result<f64, NumError> {
        if *o == 0.0 {
            Err(NumError::DivisionByZero)
        } else {
            Ok(self / o)
        }
    }
    fn powc(&self, c: f64) -> Result<f64, NumError> {
        let r = self.powf(c);
        if r.is_finite() {
            Ok(r)
        } else if *self == 0.0 && c < 0.0 {
            Err(NumError::DivisionByZero)
        } else {
            Err(NumError::PowDomain)
        }
    }
    fn sin(&self) -> f64 {
        f64::sin(*self)
    }
    fn cos(&self) -> f64 {
        f64::cos(*self)
    }
    fn tan(&self) -> Result<f64, NumError> {
        Ok(f64::tan(*self))
    }
    fn sinh(&self) -> f64 {
        f64::sinh(*self)
    }
    fn cosh(&self) -> f64 {
        f64::cosh(*self)
    }
    fn tanh(&self) -> f64 {
        f64::tanh(*self)
    }
    fn exp(&self) -> f64 {
        f64::exp(*self)
    }
    fn log(&self) -> Result<f64, NumError> {
        if *self <= 0.0 {
            Err(NumError::LogDomain)
        } else {
            Ok(self.ln())
        }
    }
    fn sqrt(&self) -> Result<f64, NumError> {
        if *self < 0.0 {
            Err(NumError::SqrtDomain)
        } else {
            Ok(f64::sqrt(*self))
        }
    }
}

/// Shared context of a jet space: variable count, truncation order, the
/// monomial enumeration and the multiplication table.
///
/// Monomials are enumerated by total degree, lexicographically within a
/// degree, so the enumeration for a lower order is a prefix of the one for
/// any higher order (this makes truncation a slice copy).
pub struct JetCtx {
    pub nvars: usize,
    pub order: usize,
    pub monomials: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, u32>,
    /// (i, j, k) triples: product accumulates `c[k] += a[i] * b[j]`.
    triples: Vec<(u32, u32, u32)>,
}

impl JetCtx {
    pub fn new(nvars: usize, order: usize) -> Arc<JetCtx> {
        assert!(nvars >= 1);
        let mut monomials = Vec::new();
        for d in 0..=order {
            let mut alpha = vec![0u8; nvars];
            gen_degree(&mut monomials, &mut alpha, 0, d as u8);
        }
        let index: HashMap<Vec<u8>, u32> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i as u32))
            .collect();
        let degree: Vec<u8> = monomials.iter().map(|m| m.iter().sum()).collect();
        let mut triples = Vec::new();
        let mut sum = vec![0u8; nvars];
        for i in 0..monomials.len() {
            for j in 0..monomials.len() {
                if degree[i] + degree[j] > order as u8 {
                    continue;
                }
                for v in 0..nvars {
                    sum[v] = monomials[i][v] + monomials[j][v];
                }
                let k = index[&sum];
                triples.push((i as u32, j as u32, k));
            }
        }
        Arc::new(JetCtx {
            nvars,
            order,
            monomials,
            index,
            triples,
        })
    }

    /// Contexts for orders `0..=max_order` over the same variables.
    pub fn chain(nvars: usize, max_order: usize) -> Vec<Arc<JetCtx>> {
        (0..=max_order).map(|k| JetCtx::new(nvars, k)).collect()
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn compatible(&self, other: &JetCtx) -> bool {
        self.nvars == other.nvars && self.order == other.order
    }
}

/// Fill `out` with all exponent vectors of total degree exactly `remaining`,
/// assigning positions `from..`, in lexicographic order.
fn gen_degree(out: &mut Vec<Vec<u8>>, alpha: &mut Vec<u8>, from: usize, remaining: u8) {
    if from + 1 == alpha.len() {
        alpha[from] = remaining;
        out.push(alpha.clone());
        alpha[from] = 0;
        return;
    }
    for d in (0..=remaining).rev() {
        alpha[from] = d;
        gen_degree(out, alpha, from + 1, remaining - d);
        alpha[from] = 0;
    }
}

/// A truncated Taylor expansion in the variables of its context.
#[derive(Clone)]
pub struct Jet {
    pub ctx: Arc<JetCtx>,
    pub c: Vec<f64>,
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Jet(n={}, K={}, c0={})", self.ctx.nvars, self.ctx.order, self.c[0])
    }
}

impl Jet {
    pub fn constant(ctx: &Arc<JetCtx>, v: f64) -> Jet {
        let mut c = vec![0.0; ctx.len()];
        c[0] = v;
        Jet { ctx: ctx.clone(), c }
    }

    /// The coordinate jets `x_i = p_i + ε_i` at the point `p`.
    pub fn variables(ctx: &Arc<JetCtx>, p: &[f64]) -> Vec<Jet> {
        assert_eq!(p.len(), ctx.nvars);
        (0..ctx.nvars)
            .map(|i| {
                let mut j = Jet::constant(ctx, p[i]);
                if ctx.order >= 1 {
                    // The linear monomial e_i appears right after the
                    // constant; find it via the index map to stay robust.
                    let mut e = vec![0u8; ctx.nvars];
                    e[i] = 1;
                    j.c[ctx.index[&e] as usize] = 1.0;
                }
                j
            })
            .collect()
    }

    /// Taylor coefficient of the monomial `alpha`.
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        self.c[self.ctx.index[alpha] as usize]
    }

    /// Partial derivative value `∂^α f (p)` (coefficient times `α!`).
    pub fn deriv(&self, alpha: &[u8]) -> f64 {
        let mut fact = 1.0;
        for &a in alpha {
            for k in 2..=a as u64 {
                fact *= k as f64;
            }
        }
        self.coeff(alpha) * fact
    }

    /// Derivative with respect to variable `k`, emitted into a context one
    /// order lower.
    pub fn d(&self, k: usize, out_ctx: &Arc<JetCtx>) -> Jet {
        assert_eq!(out_ctx.nvars, self.ctx.nvars);
        assert!(out_ctx.order < self.ctx.order || self.ctx.order == 0);
        let mut c = vec![0.0; out_ctx.len()];
        let mut shifted = vec![0u8; self.ctx.nvars];
        for (i, alpha) in out_ctx.monomials.iter().enumerate() {
            shifted.copy_from_slice(alpha);
            shifted[k] += 1;
            let src = self.ctx.index[&shifted] as usize;
            c[i] = self.c[src] * (alpha[k] as f64 + 1.0);
        }
        Jet {
            ctx: out_ctx.clone(),
            c,
        }
    }

    /// Truncate to the (lower-order) context `out_ctx`.
    pub fn truncate(&self, out_ctx: &Arc<JetCtx>) -> Jet {
        assert_eq!(out_ctx.nvars, self.ctx.nvars);
        assert!(out_ctx.order <= self.ctx.order);
        Jet {
            ctx: out_ctx.clone(),
            c: self.c[..out_ctx.len()].to_vec(),
        }
    }

    /// Composition `Σ_m coef(m) · (self − value)^m`, the engine behind the
    /// elementary functions (`coef(m)` = m-th Taylor coefficient of the
    /// outer function at the inner value).
    fn compose(&self, coef: &[f64]) -> Jet {
        let k = self.ctx.order;
        let mut hat = self.clone();
        hat.c[0] = 0.0;
        // Horner evaluation in jet arithmetic.
        let mut r = Jet::constant(&self.ctx, coef[k]);
        for m in (0..k).rev() {
            r = r.mul(&hat);
            r.c[0] += coef[m];
        }
        r
    }
}

fn series_coeffs(order: usize, f: impl Fn(usize) -> f64) -> Vec<f64> {
    (0..=order).map(f).collect()
}

fn factorial(m: usize) -> f64 {
    (1..=m as u64).map(|k| k as f64).product::<f64>().max(1.0)
}

impl Scalar for Jet {
    fn lift(&self, v: f64) -> Jet {
        Jet::constant(&self.ctx, v)
    }

    fn value(&self) -> f64 {
        self.c[0]
    }

    fn add(&self, o: &Jet) -> Jet {
        debug_assert!(self.ctx.compatible(&o.ctx));
        let mut r = self.clone();
        for (a, b) in r.c.iter_mut().zip(&o.c) {
            *a += b;
        }
        r
    }

    fn sub(&self, o: &Jet) -> Jet {
        debug_assert!(self.ctx.compatible(&o.ctx));
        let mut r = self.clone();
        for (a, b) in r.c.iter_mut().zip(&o.c) {
            *a -= b;
        }
        r
    }

    fn mul(&self, o: &Jet) -> Jet {
        debug_assert!(self.ctx.compatible(&o.ctx));
        let mut c = vec![0.0; self.ctx.len()];
        for &(i, j, k) in &self.ctx.triples {
            c[k as usize] += self.c[i as usize] * o.c[j as usize];
        }
        Jet {
            ctx: self.ctx.clone(),
            c,
        }
    }

    fn neg(&self) -> Jet {
        let mut r = self.clone();
        for a in r.c.iter_mut() {
            *a = -*a;
        }
        r
    }

    fn scale(&self, v: f64) -> Jet {
        let mut r = self.clone();
        for a in r.c.iter_mut() {
            *a *= v;
        }
        r
    }

    fn div(&self, o: &Jet) -> Result<Jet, NumError> {
        let u0 = o.value();
        if u0 == 0.0 {
            return Err(NumError::DivisionByZero);
        }
        // 1/u as a series around u0, then multiply.
        let recip = o.compose(&series_coeffs(o.ctx.order, |m| {
            (if m % 2 == 0 { 1.0 } else { -1.0 }) / u0.powi(m as i32 + 1)
        }));
        Ok(self.mul(&recip))
    }

    fn powc(&self, c: f64) -> Result<Jet, NumError> {
        let u0 = self.value();
        if c.fract() == 0.0 && c.abs() <= 64.0 {
            let m = c.abs() as u32;
            let mut r = Jet::constant(&self.ctx, 1.0);
            for _ in 0..m {
                r = r.mul(self);
            }
            if c >= 0.0 {
                return Ok(r);
            }
            return Jet::constant(&self.ctx, 1.0).div(&r);
        }
        if u0 <= 0.0 {
            return Err(NumError::PowDomain);
        }
        // Binomial series: u^c = Σ (c choose m) u0^{c-m} û^m.
        let mut coefs = Vec::with_capacity(self.ctx.order + 1);
        let mut falling = 1.0;
        for m in 0..=self.ctx.order {
            if m > 0 {
                falling *= c - (m as f64 - 1.0);
            }
            coefs.push(falling / factorial(m) * u0.powf(c - m as f64));
        }
        Ok(self.compose(&coefs))
    }

    fn sin(&self) -> Jet {
        let u0 = self.value();
        let (s, co) = (u0.sin(), u0.cos());
        self.compose(&series_coeffs(self.ctx.order, |m| {
            let v = match m % 4 {
                0 => s,
                1 => co,
                2 => -s,
                _ => -co,
            };
            v / factorial(m)
        }))
    }

    fn cos(&self) -> Jet {
        let u0 = self.value();
        let (s, co) = (u0.sin(), u0.cos());
        self.compose(&series_coeffs(self.ctx.order, |m| {
            let v = match m % 4 {
                0 => co,
                1 => -s,
                2 => -co,
                _ => s,
            };
            v / factorial(m)
        }))
    }

    fn tan(&self) -> Result<Jet, NumError> {
        self.sin().div(&self.cos())
    }

    fn sinh(&self) -> Jet {
        let u0 = self.value();
        let (sh, ch) = (u0.sinh(), u0.cosh());
        self.compose(&series_coeffs(self.ctx.order, |m| {
            (if m % 2 == 0 { sh } else { ch }) / factorial(m)
        }))
    }

    fn cosh(&self) -> Jet {
        let u0 = self.value();
        let (sh, ch) = (u0.sinh(), u0.cosh());
        self.compose(&series_coeffs(self.ctx.order, |m| {
            (if m % 2 == 0 { ch } else { sh }) / factorial(m)
        }))
    }

    fn tanh(&self) -> Jet {
        // cosh is positive everywhere; the division cannot fail.
        self.sinh().div(&self.cosh()).expect("cosh > 0")
    }

    fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(&series_coeffs(self.ctx.order, |m| e / factorial(m)))
    }

    fn log(&self) -> Result<Jet, NumError> {
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(NumError::LogDomain);
        }
        Ok(self.compose(&series_coeffs(self.ctx.order, |m| {
            if m == 0 {
                u0.ln()
            } else {
                (if m % 2 == 1 { 1.0 } else { -1.0 }) / (m as f64 * u0.powi(m as i32))
            }
        })))
    }

    fn sqrt(&self) -> Result<Jet, NumError> {
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(NumError::SqrtDomain);
        }
        self.powc(0.5)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Expression;
    use rand::{Rng, SeedableRng};

    fn binom(n: usize, k: usize) -> usize {
        let mut r = 1usize;
        for i in 0..k {
            r = r * (n - i) / (i + 1);
        }
        r
    }

    #[test]
    fn monomial_counts_and_prefix_property() {
        for (n, k) in [(2, 3), (3, 4), (8, 5)] {
            let ctx = JetCtx::new(n, k);
            assert_eq!(ctx.len(), binom(n + k, k));
            let lower = JetCtx::new(n, k - 1);
            assert_eq!(
                &ctx.monomials[..lower.len()],
                &lower.monomials[..],
                "lower-order enumeration must be a prefix"
            );
        }
    }

    /// Jet coefficients must equal the symbolic partial derivatives.
    #[test]
    fn jets_match_symbolic_derivatives() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let names = ["u", "v"];
        let sources = [
            "sin(u*v) + u^3",
            "exp(0.3*u - 0.1*v^2)",
            "sqrt(1 + u^2 + v^2)",
            "1/(2 + sin(u))",
            "log(2 + u*v)",
            "tanh(u)*cos(v)",
            "tan(0.4*u + 0.1)",
            "u^0.5 + v",
        ];
        let ctx = JetCtx::new(2, 3);
        for src in sources {
            let e = Expression::parse(src, &names).unwrap();
            for _ in 0..5 {
                let p = [rng.random_range(0.2..1.2), rng.random_range(0.2..1.2)];
                let vars = Jet::variables(&ctx, &p);
                let jet = e.eval_scalar(&vars).unwrap();
                for alpha in &ctx.monomials {
                    let mut d = e.clone();
                    for (i, &a) in alpha.iter().enumerate() {
                        for _ in 0..a {
                            d = d.differentiate(i);
                        }
                    }
                    let exact = d.evaluate(&p).unwrap();
                    let got = jet.deriv(alpha);
                    assert!(
                        (exact - got).abs() <= 1e-9 * (1.0 + exact.abs()),
                        "{} at {:?}, alpha {:?}: symbolic {} vs jet {}",
                        src,
                        p,
                        alpha,
                        exact,
                        got
                    );
                }
            }
        }
    }

    #[test]
    fn d_agrees_with_symbolic_differentiate() {
        let names = ["u", "v"];
        let e = Expression::parse("cos(u)*sinh(v) + u^2*v", &names).unwrap();
        let chain = JetCtx::chain(2, 3);
        let p = [0.6, -0.4];
        let vars = Jet::variables(&chain[3], &p);
        let jet = e.eval_scalar(&vars).unwrap();
        let de = e.differentiate(0);
        let d_jet = jet.d(0, &chain[2]);
        let vars2 = Jet::variables(&chain[2], &p);
        let d_direct = de.eval_scalar(&vars2).unwrap();
        for (a, b) in d_jet.c.iter().zip(&d_direct.c) {
            assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn truncate_is_prefix_copy() {
        let chain = JetCtx::chain(3, 4);
        let e = Expression::parse("exp(x)*sin(y) + z^3", &["x", "y", "z"]).unwrap();
        let vars = Jet::variables(&chain[4], &[0.1, 0.2, 0.3]);
        let jet = e.eval_scalar(&vars).unwrap();
        let t = jet.truncate(&chain[2]);
        assert_eq!(t.c[..], jet.c[..chain[2].len()]);
    }

    #[test]
    fn singularities_reported() {
        let ctx = JetCtx::new(1, 2);
        let zero = Jet::constant(&ctx, 0.0);
        let one = Jet::constant(&ctx, 1.0);
        assert_eq!(one.div(&zero).unwrap_err(), NumError::DivisionByZero);
        assert_eq!(zero.log().unwrap_err(), NumError::LogDomain);
        assert_eq!(
            Jet::constant(&ctx, -1.0).sqrt().unwrap_err(),
            NumError::SqrtDomain
        );
        assert_eq!(
            Jet::constant(&ctx, -1.0).powc(0.5).unwrap_err(),
            NumError::PowDomain
        );
        // integer powers work at any base point, including zero
        let x = &Jet::variables(&ctx, &[0.0])[0];
        let sq = x.powc(2.0).unwrap();
        assert_eq!(sq.value(), 0.0);
        assert_eq!(sq.deriv(&[2]), 2.0);
    }
}
