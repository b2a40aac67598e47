//! Dense lookup tables over the integer code window.

use std::fs;
use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::AdcBounds;
use crate::numfmt::fmt_sig;
use crate::scaling::{ScalingError, ScalingFunction};

/// Significant digits of CSV values.
pub const CSV_DIGITS: usize = 10;
/// Largest window a table will materialize.
pub const MAX_ENTRIES: u64 = 1 << 24;

#[derive(Debug, Error)]
pub enum LutError {
    #[error("code window [{first}, {last}] is empty")]
    EmptyWindow { first: f64, last: f64 },
    #[error("code window holds {0} entries, more than {MAX_ENTRIES}")]
    WindowTooLarge(u64),
    #[error("table values must be strictly increasing (code {code})")]
    NotIncreasing { code: u64 },
    #[error("code {code} outside table window [{first}, {last}]")]
    OutOfWindow { code: i64, first: u64, last: u64 },
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Json,
}

/// Physical values for every integer code of a window. Immutable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LookupTable {
    first_code: u64,
    unit: String,
    values: Vec<f64>,
}

impl LookupTable {
    pub fn new(first_code: u64, values: Vec<f64>, unit: impl Into<String>) -> Result<Self, LutError> {
        if values.is_empty() {
            return Err(LutError::EmptyWindow { first: first_code as f64, last: first_code as f64 - 1.0 });
        }
        if let Some(k) = values.windows(2).position(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return Err(LutError::NotIncreasing { code: first_code + k as u64 + 1 });
        }
        Ok(LookupTable { first_code, unit: unit.into(), values })
    }

    pub fn first_code(&self) -> u64 {
        self.first_code
    }

    pub fn last_code(&self) -> u64 {
        self.first_code + self.values.len() as u64 - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn unit(&self) -> &str {
        &self.unit
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(code, value)` pairs in code order.
    pub fn entries(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        (self.first_code..).zip(self.values.iter().copied())
    }

    pub fn lookup(&self, code: i64) -> Result<f64, LutError> {
        let out = || LutError::OutOfWindow { code, first: self.first_code, last: self.last_code() };
        let offset = u64::try_from(code).ok().and_then(|c| c.checked_sub(self.first_code)).ok_or_else(out)?;
        self.values.get(offset as usize).copied().ok_or_else(out)
    }

    /// Value at `code` rounded to `decimals` places, for display only.
    pub fn display(&self, code: i64, decimals: usize) -> Result<String, LutError> {
        Ok(format!("{:.*}", decimals, self.lookup(code)?))
    }

    /// `code,value` header plus one row per entry, values with 10
    /// significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 20);
        out.push_str("code,value\n");
        for (code, v) in self.entries() {
            out.push_str(&format!("{code},{}\n", fmt_sig(v, CSV_DIGITS)));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("table serializes");
        s.push('\n');
        s
    }

    pub fn export(&self, format: ExportFormat, destination: &Path) -> Result<(), LutError> {
        let text = match format {
            ExportFormat::Csv => self.to_csv(),
            ExportFormat::Json => self.to_json(),
        };
        fs::write(destination, text)?;
        Ok(())
    }
}

/// Integer code window `[ceil(N_min), N_max]`.
pub fn code_window(bounds: &AdcBounds) -> Result<(u64, u64), LutError> {
    let first = bounds.n_min.ceil();
    let last = bounds.n_max.floor();
    if first.is_nan() || last.is_nan() || first > last || first < 0.0 {
        return Err(LutError::EmptyWindow { first, last });
    }
    let len = (last - first) as u64 + 1;
    if len > MAX_ENTRIES {
        return Err(LutError::WindowTooLarge(len));
    }
    Ok((first as u64, last as u64))
}

/// One entry per integer code of the window, each `sf.eval(code)`.
pub fn build_lut(sf: &ScalingFunction, bounds: &AdcBounds) -> Result<LookupTable, LutError> {
    let (first, last) = code_window(bounds)?;
    let values = (first..=last).map(|c| sf.eval(c as f64)).collect::<Result<Vec<_>, _>>()?;
    LookupTable::new(first, values, sf.unit())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::flow_case_study;
    use crate::scaling::synthesize;

    fn case_table() -> LookupTable {
        let spec = flow_case_study();
        build_lut(&synthesize(&spec).unwrap(), &spec.bounds()).unwrap()
    }

    #[test]
    fn window_and_edges() {
        let t = case_table();
        assert_eq!((t.first_code(), t.last_code(), t.len()), (205, 1023, 819));
        let shown: Vec<_> = [205, 206, 207, 1021, 1022, 1023].iter().map(|&c| t.display(c, 2).unwrap()).collect();
        assert_eq!(shown, ["0.66", "1.24", "1.62", "29.96", "29.98", "30.00"]);
    }

    #[test]
    fn lookup_bounds() {
        let t = case_table();
        assert!((t.lookup(1023).unwrap() - 30.0).abs() < 1e-12);
        let v = t.lookup(409).unwrap();
        assert!(v > 14.99 && v < 15.0, "{v}");
        assert!(matches!(t.lookup(204), Err(LutError::OutOfWindow { .. })));
        assert!(matches!(t.lookup(1024), Err(LutError::OutOfWindow { .. })));
        assert!(matches!(t.lookup(-1), Err(LutError::OutOfWindow { .. })));
    }

    #[test]
    fn integral_lower_edge_is_kept() {
        let b = AdcBounds { n_min: 819.0, n_max: 4095.0, dn_max: 3276.0 };
        assert_eq!(code_window(&b).unwrap(), (819, 4095));
        let b = AdcBounds { n_min: 204.6, n_max: 1023.0, dn_max: 818.4 };
        assert_eq!(code_window(&b).unwrap(), (205, 1023));
        let b = AdcBounds { n_min: 3.2, n_max: 3.0, dn_max: 0.0 };
        assert!(matches!(code_window(&b), Err(LutError::EmptyWindow { .. })));
    }

    #[test]
    fn constructor_guards() {
        assert!(matches!(LookupTable::new(5, vec![], "u"), Err(LutError::EmptyWindow { .. })));
        assert!(matches!(LookupTable::new(5, vec![1.0, 1.0], "u"), Err(LutError::NotIncreasing { code: 6 })));
    }

    #[test]
    fn csv_rows() {
        let csv = case_table().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("code,value"));
        // 1.0486690349524177*sqrt(0.4) = 0.66323653242807...
        assert_eq!(lines.next(), Some("205,0.6632365324"));
        assert_eq!(csv.lines().last(), Some("1023,30"));
        assert_eq!(csv.lines().count(), 820);
        assert!(csv.ends_with('\n'));
    }

    #[test]
    fn json_shape() {
        let t = case_table();
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["first_code"], 205);
        assert_eq!(v["unit"], "m3/h");
        assert_eq!(v["values"].as_array().unwrap().len(), 819);
        let back: LookupTable = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn export_is_byte_deterministic() {
        let t = case_table();
        let dir = tempfile::tempdir().unwrap();
        for (format, name) in [(ExportFormat::Csv, "t.csv"), (ExportFormat::Json, "t.json")] {
            let (a, b) = (dir.path().join(format!("a{name}")), dir.path().join(format!("b{name}")));
            t.export(format, &a).unwrap();
            t.clone().export(format, &b).unwrap();
            assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());
        }
        assert!(t.export(ExportFormat::Csv, &dir.path().join("missing/t.csv")).is_err());
    }
}
