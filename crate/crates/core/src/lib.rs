//! Scaling-function synthesis for digital measurement systems.
//!
//! A system is a sensor `di = f(dx)`, a converter `dN = h(di)` and a system
//! characteristic `dx* = g(dx)`, each written over deltas from one end of
//! its range. The scaling function `q = g(f^-1(h^-1(dN)))` turns raw
//! converter codes back into physical units; from it this crate builds a
//! lookup table, embedded C source and forward-chain error reports.
//!
//! ```
//! use adcscale::{presets, synthesize, build_lut};
//!
//! let spec = presets::flow_case_study();
//! let sf = synthesize(&spec).unwrap();
//! assert_eq!(sf.closed_form().unwrap().display_sig(12).to_string(), "1.04866903495*sqrt(dN)");
//! let table = build_lut(&sf, &spec.bounds()).unwrap();
//! assert_eq!(table.len(), 819);
//! ```

pub mod codegen;
pub mod config;
pub mod expr;
pub mod inversion;
pub mod lut;
pub mod model;
pub mod numfmt;
pub mod presets;
pub mod scaling;
pub mod simulate;

use thiserror::Error;

pub use codegen::{emit, CodegenError, CodegenOptions, InitMode};
pub use config::{load, Config, ConfigError};
pub use expr::{parse, parse_with, EvalError, Expr, ParseError};
pub use inversion::{invert, InversionError, Monotonicity, Strategy};
pub use lut::{build_lut, code_window, ExportFormat, LookupTable, LutError};
pub use model::{
    adc_bounds, delta, delta_max, validate, AdcBounds, AdcSpec, DeltaConvention, DmsSpec, ModelError, Range, Symbols,
    ValidationReport,
};
pub use scaling::{synthesize, synthesize_with, FormKind, ScalingError, ScalingFunction};
pub use simulate::{forward, roundtrip, roundtrip_values, ChainReport, ChainSample, Quantizer, SimError};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Lut(#[from] LutError),
    #[error(transparent)]
    Codegen(#[from] CodegenError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
