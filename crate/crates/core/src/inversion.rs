//! Inverse characteristics.
//!
//! Positive-coefficient monomials `a*d^k` are inverted in closed form as
//! `(y/a)^(1/k)`; any other strictly increasing characteristic falls back to
//! bisection. Decreasing characteristics are rejected.

use std::fmt;

use num_rational::Ratio;
use thiserror::Error;

use crate::expr::{real_pow, EvalError, Exponent, Expr};
use crate::model::Range;

/// Uniform sample count of the monotonicity check.
pub const MONOTONE_SAMPLES: usize = 1024;
/// Default relative tolerance of numeric inversion.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const MAX_ITERATIONS: u32 = 200;
/// Grid size used to certify a closed-form inverse.
const CERTIFY_POINTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InversionError {
    #[error("characteristic is {0}")]
    NonMonotone(Witness),
    #[error("characteristic is decreasing on {0}; only increasing characteristics are supported")]
    Decreasing(Range),
    #[error("target {target} outside reachable interval [{low}, {high}]")]
    OutOfReach { target: f64, low: f64, high: f64 },
    #[error("monotonicity violated near {at} during bisection")]
    MonotonicityViolation { at: f64 },
    #[error("bisection did not converge within {MAX_ITERATIONS} iterations")]
    IterationLimit,
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Two sample points whose values break monotonicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Witness {
    pub a: f64,
    pub b: f64,
    pub fa: f64,
    pub fb: f64,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "non-monotone between {} and {} (values {} and {})", self.a, self.b, self.fa, self.fb)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Monotonicity {
    Increasing,
    Decreasing,
    NonMonotone(Witness),
}

impl fmt::Display for Monotonicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Monotonicity::Increasing => f.write_str("increasing"),
            Monotonicity::Decreasing => f.write_str("decreasing"),
            Monotonicity::NonMonotone(w) => w.fmt(f),
        }
    }
}

/// Classifies `expr` on `domain` from [`MONOTONE_SAMPLES`] uniform samples
/// and the sign of the symbolic derivative at each of them.
pub fn check_monotone(expr: &Expr, var: &str, domain: &Range) -> Result<Monotonicity, EvalError> {
    let n = MONOTONE_SAMPLES;
    let (lo, hi) = (domain.min(), domain.max());
    let step = (hi - lo) / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|k| if k == n - 1 { hi } else { lo + step * k as f64 }).collect();
    let ys = xs.iter().map(|&x| expr.eval_var(var, x)).collect::<Result<Vec<_>, _>>()?;

    let Some(direction) = ys.windows(2).map(|w| w[1] - w[0]).find(|d| *d != 0.0) else {
        return Ok(Monotonicity::NonMonotone(Witness { a: xs[0], b: xs[1], fa: ys[0], fb: ys[1] }));
    };
    let sign = direction.signum();
    for k in 0..n - 1 {
        if (ys[k + 1] - ys[k]) * sign <= 0.0 {
            let w = Witness { a: xs[k], b: xs[k + 1], fa: ys[k], fb: ys[k + 1] };
            return Ok(Monotonicity::NonMonotone(w));
        }
    }

    // A derivative of the wrong sign exposes a dip narrower than the grid.
    let slope = expr.differentiate(var);
    for (k, &x) in xs.iter().enumerate() {
        let Ok(d) = slope.eval_var(var, x) else { continue };
        if !d.is_finite() || d * sign >= 0.0 {
            continue;
        }
        if let Some(w) = local_witness(expr, var, x, ys[k], sign, step, k == n - 1) {
            return Ok(Monotonicity::NonMonotone(w));
        }
    }
    Ok(if sign > 0.0 { Monotonicity::Increasing } else { Monotonicity::Decreasing })
}

fn local_witness(expr: &Expr, var: &str, x: f64, fx: f64, sign: f64, step: f64, last: bool) -> Option<Witness> {
    let mut h = step / 2.0;
    for _ in 0..40 {
        let (a, b) = if last { (x - h, x) } else { (x, x + h) };
        let (fa, fb) = if last { (expr.eval_var(var, a).ok()?, fx) } else { (fx, expr.eval_var(var, b).ok()?) };
        if (fb - fa) * sign <= 0.0 {
            return Some(Witness { a, b, fa, fb });
        }
        h /= 2.0;
    }
    None
}

/// `(a, k)` such that `expr == a*var^k`, if `expr` normalizes to a monomial.
pub fn monomial(expr: &Expr, var: &str) -> Option<(f64, Exponent)> {
    let zero = Ratio::from_integer(0);
    let m = match expr {
        Expr::Num(c) => (*c, zero),
        Expr::Var(v) if v == var => (1.0, Ratio::from_integer(1)),
        Expr::Var(_) | Expr::Const(_) => return None,
        Expr::Mul(a, b) => {
            let ((ca, ka), (cb, kb)) = (monomial(a, var)?, monomial(b, var)?);
            (ca * cb, ka + kb)
        }
        Expr::Div(a, b) => {
            let ((ca, ka), (cb, kb)) = (monomial(a, var)?, monomial(b, var)?);
            if cb == 0.0 {
                return None;
            }
            (ca / cb, ka - kb)
        }
        Expr::Pow(a, r) => {
            let (ca, ka) = monomial(a, var)?;
            (real_pow(ca, *r)?, ka * r)
        }
        Expr::Sqrt(a) => {
            let (ca, ka) = monomial(a, var)?;
            if ca < 0.0 {
                return None;
            }
            (ca.sqrt(), ka / 2)
        }
        Expr::Add(a, b) | Expr::Sub(a, b) => {
            let ((ca, ka), (cb, kb)) = (monomial(a, var)?, monomial(b, var)?);
            let cb = if matches!(expr, Expr::Sub(..)) { -cb } else { cb };
            if ka == kb {
                (ca + cb, ka)
            } else if cb == 0.0 {
                (ca, ka)
            } else if ca == 0.0 {
                (cb, kb)
            } else {
                return None;
            }
        }
    };
    m.0.is_finite().then_some(m)
}

/// Canonical expression for `coeff*var^k`: `sqrt` for one half, bare
/// variable for one, unit coefficients dropped.
pub fn monomial_expr(coeff: f64, k: Exponent, var: &str) -> Expr {
    let v = Expr::var(var);
    let base = if k == Ratio::from_integer(1) {
        v
    } else if k == Ratio::new(1, 2) {
        Expr::sqrt(v)
    } else {
        Expr::pow(v, k)
    };
    if coeff == 1.0 {
        base
    } else {
        Expr::mul(Expr::Num(coeff), base)
    }
}

/// Closed-form inverse (in `inverse_var`) of a positive-coefficient
/// monomial with positive exponent on a non-negative domain.
pub fn invert_analytic(expr: &Expr, var: &str, inverse_var: &str, domain: &Range) -> Option<Expr> {
    if domain.min() < 0.0 {
        return None;
    }
    let (a, k) = monomial(expr, var)?;
    if a <= 0.0 || k <= Ratio::from_integer(0) {
        return None;
    }
    let inv_k = k.recip();
    let c = real_pow(1.0 / a, inv_k)?;
    c.is_finite().then(|| monomial_expr(c, inv_k, inverse_var))
}

/// Result of a bisection solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericRoot {
    pub value: f64,
    pub iterations: u32,
}

/// Solves `expr(d) = target` on `domain` by bisection.
///
/// Stops once the bracket half-width is within `tolerance*max(1,|d|)/2`
/// and the residual within `tolerance*max(1,|target|)`, or when the bracket
/// can no longer be split.
pub fn invert_numeric(
    expr: &Expr,
    var: &str,
    domain: &Range,
    target: f64,
    tolerance: f64,
) -> Result<NumericRoot, InversionError> {
    bisect(expr, var, domain, target, tolerance, (1.0, 1.0))
}

/// Bisection with tolerances relative to `max(floor, |.|)`, floors given
/// for the argument and the value.
fn bisect(
    expr: &Expr,
    var: &str,
    domain: &Range,
    target: f64,
    tolerance: f64,
    (x_floor, y_floor): (f64, f64),
) -> Result<NumericRoot, InversionError> {
    let f = |x: f64| expr.eval_var(var, x);
    let (mut lo, mut hi) = (domain.min(), domain.max());
    let (mut flo, mut fhi) = (f(lo)?, f(hi)?);
    if flo > fhi {
        return Err(InversionError::Decreasing(*domain));
    }
    if flo == fhi {
        let w = Witness { a: lo, b: hi, fa: flo, fb: fhi };
        return Err(InversionError::NonMonotone(w));
    }
    let slack = tolerance * target.abs().max(y_floor);
    if target < flo - slack || target > fhi + slack {
        return Err(InversionError::OutOfReach { target, low: flo, high: fhi });
    }
    if target <= flo {
        return Ok(NumericRoot { value: lo, iterations: 0 });
    }
    if target >= fhi {
        return Ok(NumericRoot { value: hi, iterations: 0 });
    }
    for iterations in 1..=MAX_ITERATIONS {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            return Ok(NumericRoot { value: mid, iterations });
        }
        let fm = f(mid)?;
        if fm < flo || fm > fhi {
            return Err(InversionError::MonotonicityViolation { at: mid });
        }
        let converged = (hi - lo) / 2.0 <= 0.5 * tolerance * mid.abs().max(x_floor);
        if fm == target || (converged && (fm - target).abs() <= slack) {
            return Ok(NumericRoot { value: mid, iterations });
        }
        if fm < target {
            (lo, flo) = (mid, fm);
        } else {
            (hi, fhi) = (mid, fm);
        }
    }
    Err(InversionError::IterationLimit)
}

/// Reusable numeric inverse: solves `expr(var) = y` on `domain` per call.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericInverse {
    pub expr: Expr,
    pub var: String,
    pub domain: Range,
    pub tolerance: f64,
    /// Converge relative to the solution itself rather than to
    /// `max(1, |x|)`, down to a floor of `1e-12` times the interval width.
    pub relative: bool,
}

impl NumericInverse {
    pub fn eval(&self, y: f64) -> Result<f64, InversionError> {
        let floors = if self.relative {
            let fw = |r: &Range| RELATIVE_FLOOR * (r.max() - r.min());
            let lo = self.expr.eval_var(&self.var, self.domain.min())?;
            let hi = self.expr.eval_var(&self.var, self.domain.max())?;
            (fw(&self.domain), RELATIVE_FLOOR * (hi - lo).abs())
        } else {
            (1.0, 1.0)
        };
        bisect(&self.expr, &self.var, &self.domain, y, self.tolerance, floors).map(|r| r.value)
    }
}

const RELATIVE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum InverseForm {
    Closed(Expr),
    Numeric(NumericInverse),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Closed form when recognized, bisection otherwise.
    #[default]
    Auto,
    NumericOnly,
}

/// An inverse characteristic together with the interval it accepts
/// (`source`) and the interval it produces (`target`).
#[derive(Debug, Clone, PartialEq)]
pub struct InverseResult {
    pub form: InverseForm,
    pub source: Range,
    pub target: Range,
}

impl InverseResult {
    pub fn closed_form(&self) -> Option<&Expr> {
        match &self.form {
            InverseForm::Closed(e) => Some(e),
            InverseForm::Numeric(_) => None,
        }
    }

    pub fn eval(&self, y: f64) -> Result<f64, InversionError> {
        match &self.form {
            InverseForm::Closed(e) => Ok(e.eval_at(y)?),
            InverseForm::Numeric(n) => n.eval(y),
        }
    }
}

/// Inverts a strictly increasing characteristic on `domain`.
pub fn invert(
    expr: &Expr,
    var: &str,
    inverse_var: &str,
    domain: &Range,
    strategy: Strategy,
) -> Result<InverseResult, InversionError> {
    match check_monotone(expr, var, domain)? {
        Monotonicity::Increasing => {}
        Monotonicity::Decreasing => return Err(InversionError::Decreasing(*domain)),
        Monotonicity::NonMonotone(w) => return Err(InversionError::NonMonotone(w)),
    }
    let (ylo, yhi) = (expr.eval_var(var, domain.min())?, expr.eval_var(var, domain.max())?);
    let source = Range::new(ylo, yhi).map_err(|_| InversionError::Decreasing(*domain))?;
    let closed = match strategy {
        Strategy::Auto => {
            invert_analytic(expr, var, inverse_var, domain).filter(|inv| certify(expr, var, inv, &source))
        }
        Strategy::NumericOnly => None,
    };
    let form = match closed {
        Some(inv) => InverseForm::Closed(inv),
        None => InverseForm::Numeric(NumericInverse {
            expr: expr.clone(),
            var: var.to_string(),
            domain: *domain,
            tolerance: DEFAULT_TOLERANCE,
            relative: false,
        }),
    };
    Ok(InverseResult { form, source, target: *domain })
}

/// `expr(inv(y)) == y` within relative 1e-9 over a uniform grid.
fn certify(expr: &Expr, var: &str, inv: &Expr, source: &Range) -> bool {
    let step = (source.max() - source.min()) / (CERTIFY_POINTS - 1) as f64;
    (0..CERTIFY_POINTS).all(|k| {
        let y = source.min() + step * k as f64;
        inv.eval_at(y)
            .and_then(|x| expr.eval_var(var, x))
            .is_ok_and(|back| (back - y).abs() <= 1e-9 * y.abs().max(f64::MIN_POSITIVE) + 1e-15)
    })
}
