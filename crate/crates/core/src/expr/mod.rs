//! Single-variable arithmetic expressions.
//!
//! Static characteristics are written in a small infix language:
//! `+ - * / ^`, `sqrt(..)`, `pow(.., ..)`, parentheses, decimal literals,
//! one variable and any number of named constants. Exponents are rational
//! literals. Numeric-literal subtrees are folded while parsing, so the
//! printed form of a parsed tree parses back to the same tree.

mod deriv;
mod parse;
mod print;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

pub use parse::{parse, parse_with, ParseError};
pub use print::Sig;

/// Rational power exponent.
pub type Exponent = Ratio<i64>;

/// Expression tree node.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Named constant, bound at evaluation or substitution time.
    Const(String),
    /// The free variable.
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Exponent),
    Sqrt(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound symbol `{0}`")]
    Unbound(String),
    #[error("negative argument {value} in `{subexpr}`")]
    Domain { subexpr: String, value: f64 },
}

impl Expr {
    pub fn num(v: f64) -> Self {
        Expr::Num(v)
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn constant(name: impl Into<String>) -> Self {
        Expr::Const(name.into())
    }

    // The constructors below fold numeric operands when the result is finite
    // and real; everything else is kept structurally.

    #[allow(clippy::should_implement_trait)]
    pub fn add(a: Expr, b: Expr) -> Self {
        match (&a, &b) {
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
            _ => Expr::Add(Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(a: Expr, b: Expr) -> Self {
        match (&a, &b) {
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
            _ => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(a: Expr, b: Expr) -> Self {
        match (&a, &b) {
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
            _ => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(a: Expr, b: Expr) -> Self {
        match (&a, &b) {
            (Expr::Num(x), Expr::Num(y)) if (x / y).is_finite() => Expr::Num(x / y),
            _ => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn pow(base: Expr, exp: Exponent) -> Self {
        if let Expr::Num(x) = base {
            if let Some(v) = real_pow(x, exp).filter(|v| v.is_finite()) {
                return Expr::Num(v);
            }
        }
        Expr::Pow(Box::new(base), exp)
    }

    pub fn sqrt(a: Expr) -> Self {
        match a {
            Expr::Num(x) if x >= 0.0 => Expr::Num(x.sqrt()),
            _ => Expr::Sqrt(Box::new(a)),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(a: Expr) -> Self {
        match a {
            Expr::Num(x) => Expr::Num(-x),
            _ => Expr::mul(Expr::Num(-1.0), a),
        }
    }

    /// The free variable, if any.
    pub fn variable(&self) -> Option<&str> {
        let mut found = None;
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                found.get_or_insert(v.as_str());
            }
        });
        found
    }

    /// Every distinct free-variable name in the tree.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                out.insert(v.clone());
            }
        });
        out
    }

    /// Every distinct named constant in the tree.
    pub fn constants(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e| {
            if let Expr::Const(c) = e {
                out.insert(c.clone());
            }
        });
        out
    }

    pub fn is_constant(&self) -> bool {
        self.variable().is_none()
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Num(_) | Expr::Const(_) | Expr::Var(_) => {}
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Expr::Pow(a, _) | Expr::Sqrt(a) => a.visit(f),
        }
    }

    /// Rebuilds the tree bottom-up through the folding constructors,
    /// replacing leaves with `leaf`.
    fn rebuild(&self, leaf: &impl Fn(&Expr) -> Expr) -> Expr {
        match self {
            Expr::Num(_) | Expr::Const(_) | Expr::Var(_) => leaf(self),
            Expr::Add(a, b) => Expr::add(a.rebuild(leaf), b.rebuild(leaf)),
            Expr::Sub(a, b) => Expr::sub(a.rebuild(leaf), b.rebuild(leaf)),
            Expr::Mul(a, b) => Expr::mul(a.rebuild(leaf), b.rebuild(leaf)),
            Expr::Div(a, b) => Expr::div(a.rebuild(leaf), b.rebuild(leaf)),
            Expr::Pow(a, k) => Expr::pow(a.rebuild(leaf), *k),
            Expr::Sqrt(a) => Expr::sqrt(a.rebuild(leaf)),
        }
    }

    /// Replaces bound named constants by their values and refolds.
    pub fn bind_constants(&self, values: &BTreeMap<String, f64>) -> Expr {
        self.rebuild(&|leaf| match leaf {
            Expr::Const(c) => values.get(c).map_or_else(|| leaf.clone(), |v| Expr::Num(*v)),
            _ => leaf.clone(),
        })
    }

    /// Replaces the free variable by `with` and refolds.
    pub fn substitute(&self, with: &Expr) -> Expr {
        self.rebuild(&|leaf| match leaf {
            Expr::Var(_) => with.clone(),
            _ => leaf.clone(),
        })
    }

    /// Renames the free variable.
    pub fn rename_variable(&self, name: &str) -> Expr {
        self.substitute(&Expr::Var(name.to_string()))
    }

    /// Evaluates with every symbol (variable and constants) looked up in
    /// `bindings`.
    pub fn evaluate(&self, bindings: &BTreeMap<String, f64>) -> Result<f64, EvalError> {
        self.eval_with(&|name| bindings.get(name).copied())
    }

    /// Evaluates a constant-free expression at `x`.
    pub fn eval_at(&self, x: f64) -> Result<f64, EvalError> {
        let var = self.variable();
        self.eval_with(&|name| (Some(name) == var).then_some(x))
    }

    /// Evaluates with `var` bound to `x`; named constants must already be
    /// substituted.
    pub fn eval_var(&self, var: &str, x: f64) -> Result<f64, EvalError> {
        self.eval_with(&|name| (name == var).then_some(x))
    }

    fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<f64>) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Const(name) | Expr::Var(name) => lookup(name).ok_or_else(|| EvalError::Unbound(name.clone()))?,
            Expr::Add(a, b) => a.eval_with(lookup)? + b.eval_with(lookup)?,
            Expr::Sub(a, b) => a.eval_with(lookup)? - b.eval_with(lookup)?,
            Expr::Mul(a, b) => a.eval_with(lookup)? * b.eval_with(lookup)?,
            Expr::Div(a, b) => a.eval_with(lookup)? / b.eval_with(lookup)?,
            Expr::Pow(a, k) => {
                let base = a.eval_with(lookup)?;
                real_pow(base, *k).ok_or_else(|| EvalError::Domain { subexpr: self.to_string(), value: base })?
            }
            Expr::Sqrt(a) => {
                let arg = a.eval_with(lookup)?;
                if arg < 0.0 {
                    return Err(EvalError::Domain { subexpr: self.to_string(), value: arg });
                }
                arg.sqrt()
            }
        })
    }

    /// Symbolic derivative with respect to `var`, constant-folded.
    pub fn differentiate(&self, var: &str) -> Expr {
        deriv::derivative(self, var)
    }

    /// Display adapter printing numbers with `digits` significant digits.
    pub fn display_sig(&self, digits: usize) -> Sig<'_> {
        Sig { expr: self, digits }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        print::write_expr(f, self, None)
    }
}

/// `base^k` on the reals. Fractional exponents need a non-negative base.
pub(crate) fn real_pow(base: f64, k: Exponent) -> Option<f64> {
    if k.is_integer() {
        let n = *k.numer();
        return Some(match i32::try_from(n) {
            Ok(n) => base.powi(n),
            Err(_) => base.powf(n as f64),
        });
    }
    if base < 0.0 {
        return None;
    }
    if *k.denom() == 2 && *k.numer() == 1 {
        return Some(base.sqrt());
    }
    Some(base.powf(ratio_to_f64(k)))
}

pub(crate) fn ratio_to_f64(k: Exponent) -> f64 {
    *k.numer() as f64 / *k.denom() as f64
}

/// Best rational approximation with a small denominator, if `x` is
/// within 1e-12 of one.
pub fn rational_from_f64(x: f64) -> Option<Exponent> {
    const MAX_DENOM: i64 = 10_000;
    if !x.is_finite() || x.abs() > 1e9 {
        return None;
    }
    // continued fraction convergents
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..40 {
        let a = r.floor();
        let ai = a as i64;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > MAX_DENOM {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (h1 as f64 / k1 as f64 - x).abs() <= 1e-12 * x.abs().max(1.0) {
            return Some(Ratio::new(h1, k1));
        }
        let frac = r - a;
        if frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    None
}
