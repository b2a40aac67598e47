//! Ready-made system descriptions.

use crate::expr::parse_with;
use crate::model::{AdcSpec, DeltaConvention, DmsSpec, Range, Symbols};
use crate::Error;

/// Sensor characteristic of the square-law flow transducer.
pub const FLOW_SENSOR: &str = "dimax*dQ^2/dQmax^2";
/// Linear converter characteristic.
pub const FLOW_CONVERTER: &str = "dNmax/dimax*di";
/// Linear system characteristic.
pub const FLOW_SYSTEM: &str = "dQmaxstar/dQmax*dQ";

/// Configuration document for the flow measurement system: 0..30 m3/h
/// square-law transducer on a 4..20 mA loop read by a 10-bit converter.
pub const FLOW_CONFIG: &str = r#"# square-law flow transducer on a 4-20 mA loop, 10-bit ADC
[sensor]
symbol = "Q"
unit = "m3/h"
min = 0
max = 30
characteristic = "dimax*dQ^2/dQmax^2"

[adc]
bits = 10
current_min = 4
current_max = 20
characteristic = "dNmax/dimax*di"

[system]
characteristic = "dQmaxstar/dQmax*dQ"

[options]
convention = "from-min"
quantizer = "nearest"
sleep_seconds = 60
init_mode = "runtime-formula"
"#;

/// The flow system with its square-law sensor, read from-min.
pub fn flow_case_study() -> DmsSpec {
    spec_from_sources(FLOW_SENSOR, FLOW_CONVERTER, FLOW_SYSTEM).expect("built-in spec is valid")
}

/// The flow system's ranges (0..30 m3/h, 4..20 mA, 10 bits) with custom
/// characteristics written over `dQ`, `di` and `dQ`.
pub fn spec_from_sources(sensor: &str, converter: &str, system: &str) -> Result<DmsSpec, Error> {
    let symbols = Symbols::new("Q");
    let names = symbols.constant_names();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    Ok(DmsSpec::new(
        symbols,
        "m3/h",
        Range::new(0.0, 30.0)?,
        None,
        parse_with(sensor, &names)?,
        AdcSpec::new(10, Range::new(4.0, 20.0)?)?,
        parse_with(converter, &names)?,
        parse_with(system, &names)?,
        DeltaConvention::FromMin,
    )?)
}
