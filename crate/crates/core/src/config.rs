//! TOML system descriptions.

use std::fs;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use crate::codegen::{CodegenOptions, InitMode};
use crate::expr::{parse_with, Expr, ParseError};
use crate::model::{AdcSpec, DeltaConvention, DmsSpec, ModelError, Range, Symbols};
use crate::simulate::Quantizer;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("[{section}] characteristic, offset {}: {source}", source.offset())]
    Expression { section: &'static str, source: ParseError },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    sensor: SensorSection,
    adc: AdcSection,
    system: SystemSection,
    #[serde(default)]
    options: OptionsSection,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SensorSection {
    #[serde(default = "default_symbol")]
    symbol: String,
    #[serde(default)]
    unit: String,
    min: f64,
    max: f64,
    characteristic: String,
}

fn default_symbol() -> String {
    "x".into()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AdcSection {
    bits: u32,
    current_min: f64,
    current_max: f64,
    characteristic: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemSection {
    characteristic: String,
    min: Option<f64>,
    max: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OptionsSection {
    #[serde(default)]
    convention: DeltaConvention,
    #[serde(default)]
    quantizer: Quantizer,
    sleep_seconds: Option<u32>,
    #[serde(default)]
    init_mode: InitMode,
    array_name: Option<String>,
    analog_pin: Option<String>,
}

/// A loaded description: the system plus tool options.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub spec: DmsSpec,
    pub quantizer: Quantizer,
    pub codegen: CodegenOptions,
}

impl std::str::FromStr for Config {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let doc: Document = toml::from_str(text).map_err(|e| ConfigError::Syntax {
            line: e.span().map_or(1, |s| text[..s.start].matches('\n').count() + 1),
            message: e.message().trim_end().to_string(),
        })?;
        let symbols = Symbols::new(doc.sensor.symbol);
        let names = symbols.constant_names();
        let names: Vec<&str> = names.iter().map(String::as_str).collect();
        let expr = |section, src: &str| -> Result<Expr, ConfigError> {
            parse_with(src, &names).map_err(|source| ConfigError::Expression { section, source })
        };
        let sensor = expr("sensor", &doc.sensor.characteristic)?;
        let converter = expr("adc", &doc.adc.characteristic)?;
        let system = expr("system", &doc.system.characteristic)?;

        let sensor_range = Range::new(doc.sensor.min, doc.sensor.max)?;
        let output_range = match (doc.system.min, doc.system.max) {
            (None, None) => None,
            (min, max) => Some(Range::new(min.unwrap_or(sensor_range.min()), max.unwrap_or(sensor_range.max()))?),
        };
        let adc = AdcSpec::new(doc.adc.bits, Range::new(doc.adc.current_min, doc.adc.current_max)?)?;
        let spec = DmsSpec::new(
            symbols,
            doc.sensor.unit,
            sensor_range,
            output_range,
            sensor,
            adc,
            converter,
            system,
            doc.options.convention,
        )?;

        let defaults = CodegenOptions::default();
        let o = doc.options;
        let codegen = CodegenOptions {
            init_mode: o.init_mode,
            sleep_seconds: o.sleep_seconds.unwrap_or(defaults.sleep_seconds),
            array_name: o.array_name.unwrap_or(defaults.array_name),
            analog_pin: o.analog_pin.unwrap_or(defaults.analog_pin),
        };
        Ok(Config { spec, quantizer: o.quantizer, codegen })
    }
}

pub fn load(path: impl AsRef<Path>) -> Result<Config, ConfigError> {
    let path = path.as_ref();
    let text =
        fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
    text.parse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{flow_case_study, FLOW_CONFIG};

    #[test]
    fn flow_config_matches_preset() {
        let cfg: Config = FLOW_CONFIG.parse().unwrap();
        assert_eq!(cfg.spec, flow_case_study());
        assert_eq!(cfg.quantizer, Quantizer::Nearest);
        assert_eq!(cfg.codegen, CodegenOptions::default());
    }

    #[test]
    fn options_are_optional() {
        let text = FLOW_CONFIG.split("[options]").next().unwrap();
        let cfg: Config = text.parse().unwrap();
        assert_eq!(cfg.spec.convention, DeltaConvention::FromMin);
        assert_eq!(cfg.codegen.sleep_seconds, 60);
    }

    #[test]
    fn option_values() {
        let text = FLOW_CONFIG
            .replace("\"from-min\"", "\"from-max\"")
            .replace("\"nearest\"", "\"floor\"")
            .replace("\"runtime-formula\"", "\"constant-table\"")
            + "array_name = \"table\"\n";
        let cfg: Config = text.parse().unwrap();
        assert_eq!(cfg.spec.convention, DeltaConvention::FromMax);
        assert_eq!(cfg.quantizer, Quantizer::Floor);
        assert_eq!(cfg.codegen.init_mode, InitMode::ConstantTable);
        assert_eq!(cfg.codegen.array_name, "table");
    }

    #[test]
    fn output_range_override() {
        let text = FLOW_CONFIG.replace("[system]\n", "[system]\nmax = 60\n");
        let cfg: Config = text.parse().unwrap();
        assert_eq!(cfg.spec.output_range, Range::new(0.0, 60.0).unwrap());
    }

    #[test]
    fn errors() {
        let bad_expr = FLOW_CONFIG.replace("dimax*dQ^2/dQmax^2", "dimax*dQ^");
        let err = bad_expr.parse::<Config>().unwrap_err();
        assert!(matches!(err, ConfigError::Expression { section: "sensor", .. }), "{err}");
        assert!(err.to_string().contains("offset 9"), "{err}");

        let unknown = FLOW_CONFIG.replace("bits = 10", "bits = 10\nvref = 3.3");
        let err = unknown.parse::<Config>().unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 11, .. }), "{err}");
        assert!(!err.to_string().contains('\n'));

        let inverted = FLOW_CONFIG.replace("max = 30", "max = -1");
        assert!(matches!(inverted.parse::<Config>(), Err(ConfigError::Model(_))));

        let missing = load("/nonexistent/system.toml").unwrap_err();
        assert!(matches!(missing, ConfigError::Io { .. }));
    }
}
