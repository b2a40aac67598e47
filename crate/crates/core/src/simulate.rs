//! Forward-chain simulation `x -> i -> N -> x*` and reconstruction error
//! reports.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr};
use crate::lut::{build_lut, LookupTable, LutError};
use crate::model::{delta, DmsSpec, ModelError};
use crate::numfmt::fmt_sig;
use crate::scaling::ScalingFunction;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Lut(#[from] LutError),
    #[error("sweep needs at least 2 samples, got {0}")]
    Sweep(usize),
}

/// Rounding rule of the converter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Quantizer {
    #[default]
    Nearest,
    Floor,
}

impl Quantizer {
    pub fn apply(self, exact: f64) -> f64 {
        match self {
            Quantizer::Nearest => exact.round(),
            Quantizer::Floor => exact.floor(),
        }
    }
}

impl FromStr for Quantizer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "nearest" => Ok(Quantizer::Nearest),
            "floor" => Ok(Quantizer::Floor),
            _ => Err(format!("unknown quantizer `{s}` (expected nearest or floor)")),
        }
    }
}

impl fmt::Display for Quantizer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Quantizer::Nearest => "nearest",
            Quantizer::Floor => "floor",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainSample {
    pub x: f64,
    /// Loop current in mA.
    pub current: f64,
    pub exact_code: f64,
    pub code: i64,
    /// The quantized code was pulled back into the table window.
    pub clamped: bool,
    pub x_star: f64,
    pub error: f64,
}

/// Forward model of a spec with its characteristics bound, reusable across
/// samples.
#[derive(Debug, Clone)]
pub struct ForwardChain<'a> {
    spec: &'a DmsSpec,
    sensor: Expr,
    converter: Expr,
    sensor_var: String,
    first_code: f64,
}

impl<'a> ForwardChain<'a> {
    pub fn new(spec: &'a DmsSpec) -> Self {
        let (sensor, converter, _) = spec.bound_characteristics();
        ForwardChain {
            spec,
            sensor,
            converter,
            sensor_var: spec.symbols.sensor_var(),
            first_code: spec.bounds().n_min.ceil(),
        }
    }

    /// Exact (unquantized) code for `x` and the loop current.
    pub fn exact(&self, x: f64) -> Result<(f64, f64), SimError> {
        let spec = self.spec;
        let conv = spec.convention;
        let dx = delta(x, &spec.sensor_range, conv)?;
        let di = self.sensor.eval_var(&spec.symbols.sensor_var(), dx)?;
        let dn = self.converter.eval_var(spec.symbols.current_var(), di)?;
        let current = conv.value(di, spec.adc.current());
        let code = conv.value(dn, &spec.bounds().window());
        Ok((current, code))
    }

    /// Sample without reconstruction (`x_star` and `error` are NaN).
    pub fn forward(&self, x: f64, quantizer: Quantizer) -> Result<ChainSample, SimError> {
        let (current, exact_code) = self.exact(x)?;
        let raw = quantizer.apply(exact_code);
        let last = self.spec.bounds().n_max;
        let code = raw.clamp(self.first_code, last);
        Ok(ChainSample {
            x,
            current,
            exact_code,
            code: code as i64,
            clamped: code != raw,
            x_star: f64::NAN,
            error: f64::NAN,
        })
    }

    pub fn sensor_var(&self) -> &str {
        &self.sensor_var
    }
}

pub fn forward(x: f64, spec: &DmsSpec, quantizer: Quantizer) -> Result<ChainSample, SimError> {
    ForwardChain::new(spec).forward(x, quantizer)
}

/// Samples plus aggregate error statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub samples: Vec<ChainSample>,
    pub max_abs_error: f64,
    pub rms_error: f64,
    /// Index of the sample with the largest absolute error.
    pub worst: usize,
    pub unit: String,
}

impl ChainReport {
    fn from_samples(samples: Vec<ChainSample>, unit: String) -> Self {
        let (mut worst, mut max_abs, mut sq) = (0, 0.0f64, 0.0f64);
        for (k, s) in samples.iter().enumerate() {
            let e = s.error.abs();
            if e > max_abs {
                (worst, max_abs) = (k, e);
            }
            sq += s.error * s.error;
        }
        let rms = (sq / samples.len().max(1) as f64).sqrt();
        ChainReport { samples, max_abs_error: max_abs, rms_error: rms, worst, unit }
    }

    pub fn worst_sample(&self) -> Option<&ChainSample> {
        self.samples.get(self.worst)
    }

    /// Pretty JSON; unreconstructed fields become `null`.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,i,exact_code,code,x_star,error\n");
        for s in &self.samples {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                fmt_sig(s.x, 10),
                fmt_sig(s.current, 10),
                fmt_sig(s.exact_code, 10),
                s.code,
                fmt_sig(s.x_star, 10),
                fmt_sig(s.error, 10),
            ));
        }
        out
    }
}

impl fmt::Display for ChainReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples={}", self.samples.len())?;
        writeln!(f, "max_abs_error={} {}", fmt_sig(self.max_abs_error, 10), self.unit)?;
        writeln!(f, "rms_error={} {}", fmt_sig(self.rms_error, 10), self.unit)?;
        if let Some(w) = self.worst_sample() {
            writeln!(
                f,
                "worst: x={} code={} x_star={}{}",
                fmt_sig(w.x, 10),
                w.code,
                fmt_sig(w.x_star, 10),
                if w.clamped { " (clamped)" } else { "" }
            )?;
        }
        let clamped = self.samples.iter().filter(|s| s.clamped).count();
        writeln!(f, "clamped={clamped}")
    }
}

/// Forward-chains every value of `xs` (in the order given), reconstructs
/// through `table` and reports the error. Accepts pre-distorted inputs.
pub fn roundtrip_values(
    spec: &DmsSpec,
    table: &LookupTable,
    xs: impl IntoIterator<Item = f64>,
    quantizer: Quantizer,
) -> Result<ChainReport, SimError> {
    let chain = ForwardChain::new(spec);
    let samples = xs
        .into_iter()
        .map(|x| {
            let mut s = chain.forward(x, quantizer)?;
            s.x_star = table.lookup(s.code)?;
            s.error = s.x_star - s.x;
            Ok(s)
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    Ok(ChainReport::from_samples(samples, spec.unit.clone()))
}

/// Uniform sweep of `sweep` points across the sensor range, reconstructed
/// through the lookup table of `sf`.
pub fn roundtrip(
    spec: &DmsSpec,
    sf: &ScalingFunction,
    sweep: usize,
    quantizer: Quantizer,
) -> Result<ChainReport, SimError> {
    if sweep < 2 {
        return Err(SimError::Sweep(sweep));
    }
    let table = build_lut(sf, &spec.bounds())?;
    let r = spec.sensor_range;
    let step = (r.max() - r.min()) / (sweep - 1) as f64;
    let xs = (0..sweep).map(move |k| if k == sweep - 1 { r.max() } else { r.min() + step * k as f64 });
    roundtrip_values(spec, &table, xs, quantizer)
}
