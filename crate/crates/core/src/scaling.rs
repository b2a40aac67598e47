//! Scaling-function synthesis: `q = g(f^-1(h^-1(dN)))` and its absolute
//! form `x*(N)`.

use std::fmt;

use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::inversion::{invert, monomial, monomial_expr, InverseForm, InverseResult, InversionError, Strategy};
use crate::model::{validate, DeltaConvention, DmsSpec, Range, ValidationReport};

/// Significant digits used when displaying folded coefficients.
pub const DISPLAY_DIGITS: usize = 12;
/// Relative slack admitted when chaining interval endpoints.
const DOMAIN_SLACK: f64 = 1e-9;
/// Bisection tolerance inside a composite; two chained solves at the
/// default 1e-9 would overrun a 1e-9 end-to-end budget.
pub const COMPOSITE_TOLERANCE: f64 = 1e-12;

fn tighten(mut inv: InverseResult) -> InverseResult {
    if let InverseForm::Numeric(n) = &mut inv.form {
        n.tolerance = COMPOSITE_TOLERANCE;
        n.relative = true;
    }
    inv
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalingError {
    #[error("spec failed validation: {}", failures(.0))]
    Invalid(ValidationReport),
    #[error(transparent)]
    Inversion(#[from] InversionError),
    #[error("f^-1 h^-1 produces {produced}, outside the domain {expected} of the next stage")]
    DomainMismatch { produced: Range, expected: Range },
    #[error("code {code} outside the window [{min}, {max}]")]
    OutsideWindow { code: f64, min: f64, max: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

fn failures(report: &ValidationReport) -> String {
    let all: Vec<String> = report.failures().map(|c| format!("{}: {}", c.property, c.detail)).collect();
    all.join("; ")
}

/// Delta-space scaling function `dx* = q(dN)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DeltaForm {
    /// Folded closed form in `dN`.
    Closed(Expr),
    /// `g` evaluated on the composed inverses, each closed or numeric.
    Composite { h_inv: Box<InverseResult>, f_inv: Box<InverseResult>, g: Expr, g_var: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormKind {
    Closed,
    /// Closed-form inverses under a numerically evaluated `g`.
    Hybrid,
    Numeric,
}

impl fmt::Display for FormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FormKind::Closed => "closed form",
            FormKind::Hybrid => "hybrid composite",
            FormKind::Numeric => "numeric composite",
        })
    }
}

/// Synthesized scaling function. Immutable; evaluation is pure.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFunction {
    delta: DeltaForm,
    convention: DeltaConvention,
    window: Range,
    dn_max: f64,
    output: Range,
    unit: String,
}

impl ScalingFunction {
    pub fn delta_form(&self) -> &DeltaForm {
        &self.delta
    }

    pub fn kind(&self) -> FormKind {
        match &self.delta {
            DeltaForm::Closed(_) => FormKind::Closed,
            DeltaForm::Composite { h_inv, f_inv, .. } => {
                if h_inv.closed_form().is_some() && f_inv.closed_form().is_some() {
                    FormKind::Hybrid
                } else {
                    FormKind::Numeric
                }
            }
        }
    }

    pub fn closed_form(&self) -> Option<&Expr> {
        match &self.delta {
            DeltaForm::Closed(e) => Some(e),
            DeltaForm::Composite { .. } => None,
        }
    }

    /// Leading coefficient of a monomial closed form.
    pub fn coefficient(&self) -> Option<f64> {
        monomial(self.closed_form()?, "dN").map(|(c, _)| c)
    }

    pub fn convention(&self) -> DeltaConvention {
        self.convention
    }

    /// Code window `[N_min, N_max]`.
    pub fn window(&self) -> Range {
        self.window
    }

    pub fn output_range(&self) -> Range {
        self.output
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    /// `q(dN)` for `dN` in `[0, dN_max]`.
    pub fn eval_delta(&self, dn: f64) -> Result<f64, ScalingError> {
        let dn = dn.max(0.0).min(self.dn_max);
        match &self.delta {
            DeltaForm::Closed(e) => Ok(e.eval_at(dn)?),
            DeltaForm::Composite { h_inv, f_inv, g, g_var } => {
                let di = h_inv.eval(dn)?;
                let dx = f_inv.eval(clamp_to(di, &f_inv.source))?;
                Ok(g.eval_var(g_var, dx)?)
            }
        }
    }

    /// Physical value for code `n`; codes outside the window are an error.
    pub fn eval(&self, n: f64) -> Result<f64, ScalingError> {
        if !self.window.contains(n) {
            return Err(ScalingError::OutsideWindow { code: n, min: self.window.min(), max: self.window.max() });
        }
        let dn = match self.convention {
            DeltaConvention::FromMin => n - self.window.min(),
            DeltaConvention::FromMax => self.window.max() - n,
        };
        let q = self.eval_delta(dn)?;
        Ok(self.convention.value(q, &self.output))
    }

    /// Absolute closed form `x*(N)` over variable `var`, e.g.
    /// `1.04866903495*sqrt(N - 204.6)`.
    pub fn absolute_expr(&self, var: &str) -> Option<Expr> {
        let q = self.closed_form()?;
        let n = Expr::var(var);
        Some(match self.convention {
            DeltaConvention::FromMin => {
                let body = q.substitute(&Expr::sub(n, Expr::Num(self.window.min())));
                if self.output.min() == 0.0 {
                    body
                } else {
                    Expr::add(Expr::Num(self.output.min()), body)
                }
            }
            DeltaConvention::FromMax => {
                let body = q.substitute(&Expr::sub(Expr::Num(self.window.max()), n));
                Expr::sub(Expr::Num(self.output.max()), body)
            }
        })
    }
}

fn clamp_to(v: f64, r: &Range) -> f64 {
    v.max(r.min()).min(r.max())
}

/// Synthesizes the scaling function, folding to a closed form when both
/// inverses and `g` are recognized monomials.
pub fn synthesize(spec: &DmsSpec) -> Result<ScalingFunction, ScalingError> {
    synthesize_with(spec, Strategy::Auto)
}

pub fn synthesize_with(spec: &DmsSpec, strategy: Strategy) -> Result<ScalingFunction, ScalingError> {
    let report = validate(spec);
    if !report.passed() {
        return Err(ScalingError::Invalid(report));
    }
    let (f, h, g) = spec.bound_characteristics();
    let bounds = spec.bounds();
    let sensor_var = spec.symbols.sensor_var();
    let current_var = spec.symbols.current_var();
    let code_var = spec.symbols.code_var();

    let current_domain = Range::new(0.0, spec.di_max()).expect("validated range");
    let sensor_domain = Range::new(0.0, spec.dx_max()).expect("validated range");
    let h_inv = tighten(invert(&h, current_var, code_var, &current_domain, strategy)?);
    let f_inv = tighten(invert(&f, &sensor_var, current_var, &sensor_domain, strategy)?);

    // h^-1 over [0, dN_max] must land inside the domain of f^-1
    let produced = Range::new(h_inv.eval(0.0)?, h_inv.eval(bounds.dn_max)?)
        .map_err(|_| InversionError::Decreasing(h_inv.source))?;
    if !within(&produced, &f_inv.source) {
        return Err(ScalingError::DomainMismatch { produced, expected: f_inv.source });
    }

    let closed = match (h_inv.closed_form(), f_inv.closed_form()) {
        (Some(hi), Some(fi)) => {
            let composed = g.substitute(fi).substitute(hi);
            match monomial(&composed, code_var) {
                Some((c, k)) if monomial(&g, &sensor_var).is_some() => Some(monomial_expr(c, k, code_var)),
                _ => None,
            }
        }
        _ => None,
    };
    let delta = match closed {
        Some(e) => DeltaForm::Closed(e),
        None => DeltaForm::Composite { h_inv: Box::new(h_inv), f_inv: Box::new(f_inv), g, g_var: sensor_var },
    };
    Ok(ScalingFunction {
        delta,
        convention: spec.convention,
        window: bounds.window(),
        dn_max: bounds.dn_max,
        output: spec.output_range,
        unit: spec.unit.clone(),
    })
}

fn within(inner: &Range, outer: &Range) -> bool {
    let slack = DOMAIN_SLACK * outer.max().abs().max(outer.min().abs()).max(1.0);
    inner.min() >= outer.min() - slack && inner.max() <= outer.max() + slack
}
