//! Measurement-chain domain model: ranges, delta conventions, converter
//! bounds and the complete system description.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::inversion::{check_monotone, Monotonicity};

/// Absolute tolerance for the zero-at-zero boundary conditions.
pub const ZERO_TOLERANCE: f64 = 1e-12;
/// Relative tolerance for the full-scale endpoint conditions.
pub const ENDPOINT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid range [{min}, {max}]: min must be strictly below max")]
    EmptyRange { min: f64, max: f64 },
    #[error("value {value} outside [{min}, {max}]")]
    OutOfRange { value: f64, min: f64, max: f64 },
    #[error("ADC resolution {0} bits outside 1..=32")]
    Resolution(u32),
    #[error("ADC current range must start at or above 0 mA, got {0}")]
    NegativeCurrent(f64),
    #[error("characteristic `{expr}` must use variable `{expected}`, found `{found}`")]
    WrongVariable { expr: String, expected: String, found: String },
    #[error("characteristic `{expr}` uses unknown constant `{name}`")]
    UnknownConstant { expr: String, name: String },
}

/// Closed interval `[min, max]` with `min < max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    min: f64,
    max: f64,
}

impl Range {
    pub fn new(min: f64, max: f64) -> Result<Self, ModelError> {
        if min.is_finite() && max.is_finite() && min < max {
            Ok(Range { min, max })
        } else {
            Err(ModelError::EmptyRange { min, max })
        }
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn contains(&self, v: f64) -> bool {
        self.min <= v && v <= self.max
    }

    fn check(&self, v: f64) -> Result<(), ModelError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(ModelError::OutOfRange { value: v, min: self.min, max: self.max })
        }
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.min, self.max)
    }
}

/// How the variation of a quantity is measured inside its range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeltaConvention {
    /// `dz = z_max - z`
    FromMax,
    /// `dz = z - z_min`
    #[default]
    FromMin,
}

impl DeltaConvention {
    pub fn opposite(self) -> Self {
        match self {
            DeltaConvention::FromMax => DeltaConvention::FromMin,
            DeltaConvention::FromMin => DeltaConvention::FromMax,
        }
    }

    /// Maps a delta back to an absolute value in `range`.
    pub fn value(self, delta: f64, range: &Range) -> f64 {
        match self {
            DeltaConvention::FromMax => range.max - delta,
            DeltaConvention::FromMin => range.min + delta,
        }
    }
}

impl fmt::Display for DeltaConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DeltaConvention::FromMax => "from-max",
            DeltaConvention::FromMin => "from-min",
        })
    }
}

/// Variation of `value` inside `range` under `convention`.
pub fn delta(value: f64, range: &Range, convention: DeltaConvention) -> Result<f64, ModelError> {
    range.check(value)?;
    Ok(match convention {
        DeltaConvention::FromMax => range.max - value,
        DeltaConvention::FromMin => value - range.min,
    })
}

pub fn delta_max(range: &Range) -> f64 {
    range.max - range.min
}

/// Converter resolution and the current span mapped onto its full scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcSpec {
    bits: u32,
    current: Range,
}

impl AdcSpec {
    pub fn new(bits: u32, current: Range) -> Result<Self, ModelError> {
        if !(1..=32).contains(&bits) {
            return Err(ModelError::Resolution(bits));
        }
        if current.min < 0.0 {
            return Err(ModelError::NegativeCurrent(current.min));
        }
        Ok(AdcSpec { bits, current })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn current(&self) -> &Range {
        &self.current
    }
}

/// Code-space bounds implied by an [`AdcSpec`]. `n_min` is kept exact
/// (e.g. 204.6), never rounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdcBounds {
    pub n_min: f64,
    pub n_max: f64,
    pub dn_max: f64,
}

impl AdcBounds {
    pub fn window(&self) -> Range {
        Range { min: self.n_min, max: self.n_max }
    }
}

pub fn adc_bounds(adc: &AdcSpec) -> AdcBounds {
    let n_max = ((1u64 << adc.bits) - 1) as f64;
    let (i_min, i_max) = (adc.current.min, adc.current.max);
    // one rounding per quantity: 1023*4/20 and 1023*16/20 land on the
    // nearest doubles to 204.6 and 818.4
    AdcBounds { n_min: n_max * i_min / i_max, n_max, dn_max: n_max * (i_max - i_min) / i_max }
}

/// Symbol naming for the built-in constants of a spec.
///
/// With quantity symbol `Q` the sensor and system characteristics are
/// written over `dQ`, the converter characteristic over `di`, and the
/// constants `dQmax`, `dQmaxstar`, `Qmin`, `Qmax`, `Qminstar`, `Qmaxstar`,
/// `imin`, `imax`, `dimax`, `Nmin`, `Nmax`, `dNmax` and `n` are predefined.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Symbols {
    quantity: String,
}

impl Symbols {
    pub fn new(quantity: impl Into<String>) -> Self {
        Symbols { quantity: quantity.into() }
    }

    pub fn quantity(&self) -> &str {
        &self.quantity
    }

    /// Variable of the sensor and system characteristics.
    pub fn sensor_var(&self) -> String {
        format!("d{}", self.quantity)
    }

    pub fn current_var(&self) -> &'static str {
        "di"
    }

    pub fn code_var(&self) -> &'static str {
        "dN"
    }

    pub fn constant_names(&self) -> Vec<String> {
        let q = &self.quantity;
        vec![
            format!("d{q}max"),
            format!("d{q}maxstar"),
            format!("{q}min"),
            format!("{q}max"),
            format!("{q}minstar"),
            format!("{q}maxstar"),
            "imin".into(),
            "imax".into(),
            "dimax".into(),
            "Nmin".into(),
            "Nmax".into(),
            "dNmax".into(),
            "n".into(),
        ]
    }
}

impl Default for Symbols {
    fn default() -> Self {
        Symbols::new("x")
    }
}

/// Complete description of a digital measurement system.
#[derive(Debug, Clone, PartialEq)]
pub struct DmsSpec {
    pub symbols: Symbols,
    pub unit: String,
    /// Measuring range of the sensor.
    pub sensor_range: Range,
    /// Range of the reconstructed quantity; the sensor range unless stated.
    pub output_range: Range,
    /// `di = f(dx)`
    pub sensor: Expr,
    pub adc: AdcSpec,
    /// `dN = h(di)`
    pub converter: Expr,
    /// `dx* = g(dx)`
    pub system: Expr,
    pub convention: DeltaConvention,
}

impl DmsSpec {
    /// Builds a spec and checks that every characteristic is written over
    /// its expected variable and only uses predefined constants.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        symbols: Symbols,
        unit: impl Into<String>,
        sensor_range: Range,
        output_range: Option<Range>,
        sensor: Expr,
        adc: AdcSpec,
        converter: Expr,
        system: Expr,
        convention: DeltaConvention,
    ) -> Result<Self, ModelError> {
        let spec = DmsSpec {
            unit: unit.into(),
            sensor_range,
            output_range: output_range.unwrap_or(sensor_range),
            sensor,
            adc,
            converter,
            system,
            convention,
            symbols,
        };
        let known = spec.constants();
        let sensor_var = spec.symbols.sensor_var();
        for (expr, var) in [
            (&spec.sensor, sensor_var.as_str()),
            (&spec.converter, spec.symbols.current_var()),
            (&spec.system, sensor_var.as_str()),
        ] {
            if let Some(found) = expr.variable() {
                if found != var {
                    return Err(ModelError::WrongVariable {
                        expr: expr.to_string(),
                        expected: var.into(),
                        found: found.into(),
                    });
                }
            }
            if let Some(name) = expr.constants().into_iter().find(|c| !known.contains_key(c)) {
                return Err(ModelError::UnknownConstant { expr: expr.to_string(), name });
            }
        }
        Ok(spec)
    }

    pub fn bounds(&self) -> AdcBounds {
        adc_bounds(&self.adc)
    }

    pub fn dx_max(&self) -> f64 {
        delta_max(&self.sensor_range)
    }

    pub fn di_max(&self) -> f64 {
        delta_max(&self.adc.current)
    }

    pub fn dx_star_max(&self) -> f64 {
        delta_max(&self.output_range)
    }

    /// Values of the predefined constants.
    pub fn constants(&self) -> BTreeMap<String, f64> {
        let b = self.bounds();
        let names = self.symbols.constant_names();
        let values = [
            self.dx_max(),
            self.dx_star_max(),
            self.sensor_range.min,
            self.sensor_range.max,
            self.output_range.min,
            self.output_range.max,
            self.adc.current.min,
            self.adc.current.max,
            self.di_max(),
            b.n_min,
            b.n_max,
            b.dn_max,
            self.adc.bits as f64,
        ];
        names.into_iter().zip(values).collect()
    }

    /// Characteristics with all constants substituted and folded:
    /// `(f, h, g)`.
    pub fn bound_characteristics(&self) -> (Expr, Expr, Expr) {
        let c = self.constants();
        (self.sensor.bind_constants(&c), self.converter.bind_constants(&c), self.system.bind_constants(&c))
    }
}

/// Which block a validation check concerns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Sensor,
    Converter,
    System,
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Block::Sensor => "sensor f",
            Block::Converter => "converter h",
            Block::System => "system g",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Property {
    ZeroAtZero(Block),
    FullScale(Block),
    Increasing(Block),
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::ZeroAtZero(b) => write!(f, "{b}(0) = 0"),
            Property::FullScale(b) => write!(f, "{b} maps full scale to full scale"),
            Property::Increasing(b) => write!(f, "{b} strictly increasing"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub property: Property,
    pub passed: bool,
    /// Measured residual (absolute for zero checks, relative for full
    /// scale); `None` for qualitative checks.
    pub residual: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, property: Property) -> Option<&Check> {
        self.checks.iter().find(|c| c.property == property)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let verdict = if c.passed { "pass" } else { "FAIL" };
            write!(f, "{verdict:4} {}", c.property)?;
            if let Some(r) = c.residual {
                write!(f, " (residual {r:e})")?;
            }
            if !c.detail.is_empty() {
                write!(f, ": {}", c.detail)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Checks the boundary, full-scale and monotonicity conditions of every
/// characteristic. Failures are reported, not raised.
pub fn validate(spec: &DmsSpec) -> ValidationReport {
    let (f, h, g) = spec.bound_characteristics();
    let blocks = [
        (Block::Sensor, &f, spec.dx_max(), spec.di_max()),
        (Block::Converter, &h, spec.di_max(), spec.bounds().dn_max),
        (Block::System, &g, spec.dx_max(), spec.dx_star_max()),
    ];
    let mut report = ValidationReport::default();
    for (block, expr, in_max, out_max) in blocks {
        report.checks.push(match expr.eval_at(0.0) {
            Ok(v) => Check {
                property: Property::ZeroAtZero(block),
                passed: v.abs() <= ZERO_TOLERANCE,
                residual: Some(v.abs()),
                detail: format!("{block}(0) = {v}"),
            },
            Err(e) => eval_failure(Property::ZeroAtZero(block), e),
        });
        report.checks.push(match expr.eval_at(in_max) {
            Ok(v) => {
                let rel = (v - out_max).abs() / out_max.abs();
                Check {
                    property: Property::FullScale(block),
                    passed: rel <= ENDPOINT_TOLERANCE,
                    residual: Some(rel),
                    detail: format!("{block}({in_max}) = {v}, expected {out_max}"),
                }
            }
            Err(e) => eval_failure(Property::FullScale(block), e),
        });
        if block == Block::System {
            continue;
        }
        let domain = Range { min: 0.0, max: in_max };
        let var = expr.variable().unwrap_or("_");
        report.checks.push(match check_monotone(expr, var, &domain) {
            Ok(Monotonicity::Increasing) => {
                Check { property: Property::Increasing(block), passed: true, residual: None, detail: String::new() }
            }
            Ok(m) => {
                Check { property: Property::Increasing(block), passed: false, residual: None, detail: m.to_string() }
            }
            Err(e) => eval_failure(Property::Increasing(block), e),
        });
    }
    report
}

fn eval_failure(property: Property, e: EvalError) -> Check {
    Check { property, passed: false, residual: None, detail: e.to_string() }
}
