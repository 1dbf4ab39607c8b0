//! A small expression language for metric entries.
//!
//! Expressions are immutable trees over chart coordinates supporting exact
//! symbolic differentiation (to any order) and numeric evaluation, either on
//! plain floats or on truncated Taylor jets (see [`crate::jet`]). The parser
//! implements the grammar
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | base ('^' number)?
//! base   := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! with `pow` binding tighter than unary minus (`-x^2` is `-(x^2)`), and
//! `pow` exponents restricted to numeric literals so that differentiation
//! stays closed-form. Identifiers resolve first against coordinate names,
//! then against the function table.

use std::fmt;
use std::sync::Arc;

use crate::jet::{NumError, Scalar};

/// Unary operations available in the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Tan,
    Sinh,
    Cosh,
    Tanh,
    Exp,
    Log,
    Sqrt,
}

impl UnaryOp {
    fn name(self) -> &'static str {
        match self {
            UnaryOp::Neg => "-",
            UnaryOp::Sin => "sin",
            UnaryOp::Cos => "cos",
            UnaryOp::Tan => "tan",
            UnaryOp::Sinh => "sinh",
            UnaryOp::Cosh => "cosh",
            UnaryOp::Tanh => "tanh",
            UnaryOp::Exp => "exp",
            UnaryOp::Log => "log",
            UnaryOp::Sqrt => "sqrt",
        }
    }

    fn from_name(name: &str) -> Option<UnaryOp> {
        Some(match name {
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            "tan" => UnaryOp::Tan,
            "sinh" => UnaryOp::Sinh,
            "cosh" => UnaryOp::Cosh,
            "tanh" => UnaryOp::Tanh,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sqrt" => UnaryOp::Sqrt,
            _ => return None,
        })
    }
}

/// Binary operations available in the language.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

/// A symbolic scalar function of the chart coordinates.
///
/// Variables are stored as indices into the coordinate list supplied at
/// parse time; the tree itself carries no names. Subtrees are shared via
/// `Arc`, so cloning is cheap and expressions are safe to evaluate from
/// concurrent contexts.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Const(f64),
    Var(usize),
    Unary(UnaryOp, Arc<Expression>),
    Binary(BinaryOp, Arc<Expression>, Arc<Expression>),
}

/// Errors produced by [`Expression::parse`].
#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("non-constant exponent at byte {offset}: `^` must be followed by a numeric literal")]
    NonConstantExponent { offset: usize },
}

/// Errors produced by evaluation (numeric singularities).
#[derive(Debug, Clone, thiserror::Error, PartialEq)]
#[error("numeric singularity ({kind}) in `{node}`")]
pub struct EvalError {
    pub kind: NumError,
    /// Rendering of the offending subexpression (generic coordinate names).
    pub node: String,
}

const FALLBACK_NAMES: [&str; 12] = [
    "x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9", "x10", "x11", "x12",
];

fn fallback_name(i: usize) -> String {
    FALLBACK_NAMES
        .get(i)
        .map(|s| s.to_string())
        .unwrap_or_else(|| format!("x{}", i + 1))
}

// The arithmetic names are AST constructors (no receiver), not operator
// methods; the std operator traits do not apply.
#[allow(clippy::should_implement_trait)]
impl Expression {
    pub fn constant(v: f64) -> Expression {
        Expression::Const(v)
    }

    pub fn var(i: usize) -> Expression {
        Expression::Var(i)
    }

    pub fn unary(op: UnaryOp, e: Expression) -> Expression {
        Expression::Unary(op, Arc::new(e))
    }

    pub fn binary(op: BinaryOp, a: Expression, b: Expression) -> Expression {
        Expression::Binary(op, Arc::new(a), Arc::new(b))
    }

    pub fn add(a: Expression, b: Expression) -> Expression {
        Expression::binary(BinaryOp::Add, a, b)
    }

    pub fn sub(a: Expression, b: Expression) -> Expression {
        Expression::binary(BinaryOp::Sub, a, b)
    }

    pub fn mul(a: Expression, b: Expression) -> Expression {
        Expression::binary(BinaryOp::Mul, a, b)
    }

    pub fn div(a: Expression, b: Expression) -> Expression {
        Expression::binary(BinaryOp::Div, a, b)
    }

    /// `a^c` with a constant exponent.
    pub fn pow(a: Expression, c: f64) -> Expression {
        Expression::binary(BinaryOp::Pow, a, Expression::Const(c))
    }

    pub fn neg(a: Expression) -> Expression {
        Expression::unary(UnaryOp::Neg, a)
    }

    /// Parse `source` against the coordinate list `coords`.
    pub fn parse(source: &str, coords: &[&str]) -> Result<Expression, ParseError> {
        let mut p = Parser {
            src: source.as_bytes(),
            pos: 0,
            coords,
        };
        p.skip_ws();
        let e = p.parse_expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(ParseError::Syntax {
                offset: p.pos,
                message: format!("unexpected `{}`", p.peek_char()),
            });
        }
        Ok(e.folded())
    }

    /// Exact partial derivative with respect to coordinate `i`.
    ///
    /// The result is constant-folded but otherwise unsimplified; repeated
    /// application to any order is permitted.
    pub fn differentiate(&self, i: usize) -> Expression {
        self.diff(i).folded()
    }

    fn diff(&self, i: usize) -> Expression {
        match self {
            Expression::Const(_) => Expression::Const(0.0),
            Expression::Var(j) => Expression::Const(if *j == i { 1.0 } else { 0.0 }),
            Expression::Unary(op, u) => {
                let du = u.diff(i);
                let u = Expression::clone(u);
                match op {
                    UnaryOp::Neg => Expression::neg(du),
                    UnaryOp::Sin => Expression::mul(Expression::unary(UnaryOp::Cos, u), du),
                    UnaryOp::Cos => {
                        Expression::neg(Expression::mul(Expression::unary(UnaryOp::Sin, u), du))
                    }
                    UnaryOp::Tan => Expression::div(
                        du,
                        Expression::pow(Expression::unary(UnaryOp::Cos, u), 2.0),
                    ),
                    UnaryOp::Sinh => Expression::mul(Expression::unary(UnaryOp::Cosh, u), du),
                    UnaryOp::Cosh => Expression::mul(Expression::unary(UnaryOp::Sinh, u), du),
                    UnaryOp::Tanh => Expression::div(
                        du,
                        Expression::pow(Expression::unary(UnaryOp::Cosh, u), 2.0),
                    ),
                    UnaryOp::Exp => Expression::mul(Expression::unary(UnaryOp::Exp, u), du),
                    UnaryOp::Log => Expression::div(du, u),
                    UnaryOp::Sqrt => Expression::div(
                        du,
                        Expression::mul(
                            Expression::Const(2.0),
                            Expression::unary(UnaryOp::Sqrt, u),
                        ),
                    ),
                }
            }
            Expression::Binary(op, a, b) => {
                let (a, b) = (Expression::clone(a), Expression::clone(b));
                match op {
                    BinaryOp::Add => Expression::add(a.diff(i), b.diff(i)),
                    BinaryOp::Sub => Expression::sub(a.diff(i), b.diff(i)),
                    BinaryOp::Mul => Expression::add(
                        Expression::mul(a.diff(i), b.clone()),
                        Expression::mul(a, b.diff(i)),
                    ),
                    BinaryOp::Div => {
                        let da = a.diff(i);
                        let db = b.diff(i);
                        Expression::div(
                            Expression::sub(
                                Expression::mul(da, b.clone()),
                                Expression::mul(a, db),
                            ),
                            Expression::pow(b, 2.0),
                        )
                    }
                    BinaryOp::Pow => {
                        let c = match b {
                            Expression::Const(c) => c,
                            // Construction enforces constant exponents.
                            _ => unreachable!("pow exponent is always a constant node"),
                        };
                        if c == 0.0 {
                            return Expression::Const(0.0);
                        }
                        Expression::mul(
                            Expression::mul(Expression::Const(c), Expression::pow(a.clone(), c - 1.0)),
                            a.diff(i),
                        )
                    }
                }
            }
        }
    }

    /// Evaluate on IEEE doubles at the point `p`.
    pub fn evaluate(&self, p: &[f64]) -> Result<f64, EvalError> {
        if p.is_empty() {
            // Constant-only expressions may be evaluated without bindings.
            self.eval_scalar(&[0.0f64])
        } else {
            self.eval_scalar(p)
        }
    }

    /// Evaluate over any [`Scalar`] (floats or Taylor jets).
    ///
    /// `vals` holds the scalar value bound to each coordinate; its length
    /// must be at least one and cover every variable index in the tree
    /// (constants are lifted into the scalar type of `vals[0]`).
    pub fn eval_scalar<S: Scalar>(&self, vals: &[S]) -> Result<S, EvalError> {
        assert!(!vals.is_empty(), "eval_scalar needs at least one binding");
        let r = self.eval_inner(vals)?;
        if !r.value().is_finite() {
            return Err(self.eval_error(NumError::NonFinite));
        }
        Ok(r)
    }

    fn eval_inner<S: Scalar>(&self, vals: &[S]) -> Result<S, EvalError> {
        match self {
            Expression::Const(c) => Ok(vals[0].lift(*c)),
            Expression::Var(i) => Ok(vals[*i].clone()),
            Expression::Unary(op, u) => {
                let v = u.eval_inner(vals)?;
                let r = match op {
                    UnaryOp::Neg => Ok(v.neg()),
                    UnaryOp::Sin => Ok(v.sin()),
                    UnaryOp::Cos => Ok(v.cos()),
                    UnaryOp::Tan => v.tan(),
                    UnaryOp::Sinh => Ok(v.sinh()),
                    UnaryOp::Cosh => Ok(v.cosh()),
                    UnaryOp::Tanh => Ok(v.tanh()),
                    UnaryOp::Exp => Ok(v.exp()),
                    UnaryOp::Log => v.log(),
                    UnaryOp::Sqrt => v.sqrt(),
                };
                r.map_err(|kind| self.eval_error(kind))
            }
            Expression::Binary(op, a, b) => {
                let x = a.eval_inner(vals)?;
                let y = b.eval_inner(vals)?;
                let r = match op {
                    BinaryOp::Add => Ok(x.add(&y)),
                    BinaryOp::Sub => Ok(x.sub(&y)),
                    BinaryOp::Mul => Ok(x.mul(&y)),
                    BinaryOp::Div => x.div(&y),
                    BinaryOp::Pow => x.powc(y.value()),
                };
                r.map_err(|kind| self.eval_error(kind))
            }
        }
    }

    fn eval_error(&self, kind: NumError) -> EvalError {
        EvalError {
            kind,
            node: self.print_generic(),
        }
    }

    /// Render with the given coordinate names; the output re-parses to an
    /// expression with identical values.
    pub fn print(&self, names: &[&str]) -> String {
        let mut out = String::new();
        self.print_prec(names, 0, &mut out);
        out
    }

    /// Render with generic names `x1, x2, ...`.
    pub fn print_generic(&self) -> String {
        let mut out = String::new();
        self.print_prec(&[], 0, &mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            Expression::Const(c) if *c < 0.0 => 3, // prints as -(abs)
            Expression::Const(_) | Expression::Var(_) => 5,
            Expression::Unary(UnaryOp::Neg, _) => 3,
            Expression::Unary(..) => 5, // function call
            Expression::Binary(BinaryOp::Add, ..) | Expression::Binary(BinaryOp::Sub, ..) => 1,
            Expression::Binary(BinaryOp::Mul, ..) | Expression::Binary(BinaryOp::Div, ..) => 2,
            Expression::Binary(BinaryOp::Pow, ..) => 4,
        }
    }

    fn print_prec(&self, names: &[&str], min_prec: u8, out: &mut String) {
        let prec = self.precedence();
        let parens = prec < min_prec;
        if parens {
            out.push('(');
        }
        match self {
            Expression::Const(c) => {
                if *c < 0.0 {
                    out.push('-');
                    out.push_str(&fmt_f64(-*c));
                } else {
                    out.push_str(&fmt_f64(*c));
                }
            }
            Expression::Var(i) => match names.get(*i) {
                Some(n) => out.push_str(n),
                None => out.push_str(&fallback_name(*i)),
            },
            Expression::Unary(UnaryOp::Neg, u) => {
                out.push('-');
                u.print_prec(names, 3, out);
            }
            Expression::Unary(op, u) => {
                out.push_str(op.name());
                out.push('(');
                u.print_prec(names, 0, out);
                out.push(')');
            }
            Expression::Binary(op, a, b) => match op {
                BinaryOp::Add | BinaryOp::Sub => {
                    a.print_prec(names, 1, out);
                    out.push_str(if *op == BinaryOp::Add { " + " } else { " - " });
                    b.print_prec(names, 2, out);
                }
                BinaryOp::Mul | BinaryOp::Div => {
                    a.print_prec(names, 2, out);
                    out.push(if *op == BinaryOp::Mul { '*' } else { '/' });
                    b.print_prec(names, 3, out);
                }
                BinaryOp::Pow => {
                    let c = match b.as_ref() {
                        Expression::Const(c) => *c,
                        _ => unreachable!("pow exponent is always a constant node"),
                    };
                    if c < 0.0 {
                        // The grammar has no negative exponents; render as a
                        // reciprocal instead.
                        out.push_str("1/");
                        Expression::pow(Expression::clone(a), -c).print_prec(names, 3, out);
                    } else {
                        a.print_prec(names, 5, out);
                        out.push('^');
                        out.push_str(&fmt_f64(c));
                    }
                }
            },
        }
        if parens {
            out.push(')');
        }
    }

    /// Constant folding plus 0/1 identities; no other rewriting.
    pub fn folded(&self) -> Expression {
        match self {
            Expression::Const(_) | Expression::Var(_) => self.clone(),
            Expression::Unary(op, u) => {
                let u = u.folded();
                if let Expression::Const(c) = u {
                    let v = match op {
                        UnaryOp::Neg => -c,
                        UnaryOp::Sin => c.sin(),
                        UnaryOp::Cos => c.cos(),
                        UnaryOp::Tan => c.tan(),
                        UnaryOp::Sinh => c.sinh(),
                        UnaryOp::Cosh => c.cosh(),
                        UnaryOp::Tanh => c.tanh(),
                        UnaryOp::Exp => c.exp(),
                        UnaryOp::Log => c.ln(),
                        UnaryOp::Sqrt => c.sqrt(),
                    };
                    if v.is_finite() {
                        return Expression::Const(v);
                    }
                    return Expression::unary(*op, Expression::Const(c));
                }
                if *op == UnaryOp::Neg {
                    if let Expression::Unary(UnaryOp::Neg, inner) = &u {
                        return Expression::clone(inner);
                    }
                }
                Expression::unary(*op, u)
            }
            Expression::Binary(op, a, b) => {
                let a = a.folded();
                let b = b.folded();
                if let (Expression::Const(x), Expression::Const(y)) = (&a, &b) {
                    let v = match op {
                        BinaryOp::Add => x + y,
                        BinaryOp::Sub => x - y,
                        BinaryOp::Mul => x * y,
                        BinaryOp::Div => x / y,
                        BinaryOp::Pow => x.powf(*y),
                    };
                    if v.is_finite() {
                        return Expression::Const(v);
                    }
                }
                match op {
                    BinaryOp::Add => {
                        if a.is_const(0.0) {
                            return b;
                        }
                        if b.is_const(0.0) {
                            return a;
                        }
                    }
                    BinaryOp::Sub => {
                        if b.is_const(0.0) {
                            return a;
                        }
                        if a.is_const(0.0) {
                            return Expression::neg(b).folded();
                        }
                    }
                    BinaryOp::Mul => {
                        if a.is_const(0.0) || b.is_const(0.0) {
                            return Expression::Const(0.0);
                        }
                        if a.is_const(1.0) {
                            return b;
                        }
                        if b.is_const(1.0) {
                            return a;
                        }
                    }
                    BinaryOp::Div => {
                        if a.is_const(0.0) {
                            return Expression::Const(0.0);
                        }
                        if b.is_const(1.0) {
                            return a;
                        }
                    }
                    BinaryOp::Pow => {
                        if b.is_const(1.0) {
                            return a;
                        }
                        if b.is_const(0.0) {
                            return Expression::Const(1.0);
                        }
                    }
                }
                Expression::binary(*op, a, b)
            }
        }
    }

    fn is_const(&self, v: f64) -> bool {
        matches!(self, Expression::Const(c) if *c == v)
    }

    /// Remap every variable index through `f` (used when juxtaposing charts).
    pub fn remap_vars(&self, f: &dyn Fn(usize) -> usize) -> Expression {
        match self {
            Expression::Const(_) => self.clone(),
            Expression::Var(i) => Expression::Var(f(*i)),
            Expression::Unary(op, u) => Expression::unary(*op, u.remap_vars(f)),
            Expression::Binary(op, a, b) => {
                Expression::binary(*op, a.remap_vars(f), b.remap_vars(f))
            }
        }
    }

    /// Replace variable `i` by the constant `v` (no simplification beyond
    /// the usual constructors; call [`Expression::folded`] afterwards).
    pub fn substitute(&self, i: usize, v: f64) -> Expression {
        match self {
            Expression::Const(_) => self.clone(),
            Expression::Var(j) if *j == i => Expression::Const(v),
            Expression::Var(_) => self.clone(),
            Expression::Unary(op, u) => Expression::unary(*op, u.substitute(i, v)),
            Expression::Binary(op, a, b) => {
                Expression::binary(*op, a.substitute(i, v), b.substitute(i, v))
            }
        }
    }

    /// Largest variable index + 1 appearing in the tree (0 for constants).
    pub fn max_var_bound(&self) -> usize {
        match self {
            Expression::Const(_) => 0,
            Expression::Var(i) => i + 1,
            Expression::Unary(_, u) => u.max_var_bound(),
            Expression::Binary(_, a, b) => a.max_var_bound().max(b.max_var_bound()),
        }
    }
}

/// Format a float so that it parses back to the identical bit pattern.
pub fn fmt_f64(v: f64) -> String {
    format!("{:?}", v)
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.print_generic())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    coords: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && (self.src[self.pos] as char).is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek_char(&self) -> String {
        match self.peek() {
            Some(c) => (c as char).to_string(),
            None => "end of input".to_string(),
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_expr(&mut self) -> Result<Expression, ParseError> {
        let mut e = self.parse_term()?;
        loop {
            self.skip_ws();
            if self.eat(b'+') {
                let t = self.parse_term()?;
                e = Expression::add(e, t);
            } else if self.eat(b'-') {
                let t = self.parse_term()?;
                e = Expression::sub(e, t);
            } else {
                return Ok(e);
            }
        }
    }

    fn parse_term(&mut self) -> Result<Expression, ParseError> {
        let mut e = self.parse_factor()?;
        loop {
            self.skip_ws();
            if self.eat(b'*') {
                let t = self.parse_factor()?;
                e = Expression::mul(e, t);
            } else if self.eat(b'/') {
                let t = self.parse_factor()?;
                e = Expression::div(e, t);
            } else {
                return Ok(e);
            }
        }
    }

    fn parse_factor(&mut self) -> Result<Expression, ParseError> {
        self.skip_ws();
        if self.eat(b'-') {
            // Unary minus binds looser than `^`: -x^2 = -(x^2).
            let f = self.parse_factor()?;
            return Ok(Expression::neg(f));
        }
        let base = self.parse_base()?;
        self.skip_ws();
        if self.eat(b'^') {
            self.skip_ws();
            let off = self.pos;
            match self.peek() {
                Some(c) if c.is_ascii_digit() => {
                    let num = self.parse_number()?;
                    Ok(Expression::pow(base, num))
                }
                _ => Err(ParseError::NonConstantExponent { offset: off }),
            }
        } else {
            Ok(base)
        }
    }

    fn parse_base(&mut self) -> Result<Expression, ParseError> {
        self.skip_ws();
        match self.peek() {
            None => Err(ParseError::Syntax {
                offset: self.pos,
                message: "unexpected end of input".to_string(),
            }),
            Some(b'(') => {
                self.pos += 1;
                let e = self.parse_expr()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(ParseError::Syntax {
                        offset: self.pos,
                        message: format!("expected `)`, found `{}`", self.peek_char()),
                    });
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => {
                let v = self.parse_number()?;
                Ok(Expression::Const(v))
            }
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => {
                let start = self.pos;
                while self
                    .peek()
                    .map(|c| c.is_ascii_alphanumeric() || c == b'_')
                    .unwrap_or(false)
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                // Coordinates shadow function names.
                if let Some(i) = self.coords.iter().position(|c| *c == name) {
                    return Ok(Expression::Var(i));
                }
                if let Some(op) = UnaryOp::from_name(name) {
                    self.skip_ws();
                    if !self.eat(b'(') {
                        return Err(ParseError::Syntax {
                            offset: self.pos,
                            message: format!("expected `(` after function `{}`", name),
                        });
                    }
                    let arg = self.parse_expr()?;
                    self.skip_ws();
                    if !self.eat(b')') {
                        return Err(ParseError::Syntax {
                            offset: self.pos,
                            message: format!("expected `)`, found `{}`", self.peek_char()),
                        });
                    }
                    return Ok(Expression::unary(op, arg));
                }
                Err(ParseError::UnknownIdentifier {
                    name: name.to_string(),
                    offset: start,
                })
            }
            Some(_) => Err(ParseError::Syntax {
                offset: self.pos,
                message: format!("unexpected `{}`", self.peek_char()),
            }),
        }
    }

    fn parse_number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                    self.pos += 1;
                }
            } else {
                // Not an exponent after all (e.g. `2*exp(x)` tokenizes the
                // `e` separately); back off.
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map_err(|_| ParseError::Syntax {
            offset: start,
            message: format!("invalid number `{}`", text),
        })
    }
}
