//! Embedded C emission.
//!
//! The generated translation unit has a direct-indexed conversion table of
//! `2^n` doubles, a `setup` that fills it, and a read/convert/send `loop`
//! scaffold. Platform calls (ADC read, radio, deep sleep) are emitted as
//! inert stubs and comments so the file builds with any C89 compiler and
//! only needs `<math.h>`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::Expr;
use crate::lut::LookupTable;
use crate::model::DmsSpec;
use crate::scaling::{ScalingFunction, DISPLAY_DIGITS};

/// Widest converter whose table is emitted as a literal array.
pub const MAX_BITS: u32 = 20;

const C_KEYWORDS: &[&str] = &[
    "auto", "break", "case", "char", "const", "continue", "default", "do", "double", "else", "enum", "extern", "float",
    "for", "goto", "if", "int", "long", "register", "return", "short", "signed", "sizeof", "static", "struct",
    "switch", "typedef", "union", "unsigned", "void", "volatile", "while",
];

/// Names the generated code defines or calls itself.
const RESERVED: &[&str] = &[
    "setup",
    "loop",
    "send_data",
    "read_adc",
    "scale_code",
    "analogInPin",
    "outputValue",
    "N",
    "i",
    "code",
    "pin",
    "out",
    "sqrt",
    "pow",
    "main",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodegenError {
    #[error("runtime-formula initialization needs a closed-form scaling function")]
    NoClosedForm,
    #[error("`{0}` is not a valid C identifier")]
    BadIdentifier(String),
    #[error("identifier `{0}` collides with another generated name")]
    Collision(String),
    #[error("sleep interval must be positive")]
    ZeroSleep,
    #[error("{0}-bit converter is too wide for a literal table (max {MAX_BITS})")]
    TooWide(u32),
    #[error("table window [{first}, {last}] does not fit a {bits}-bit code space")]
    WindowMismatch { first: u64, last: u64, bits: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitMode {
    /// Boot-time loop evaluating the closed form.
    #[default]
    RuntimeFormula,
    /// Precomputed literal initializer.
    ConstantTable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodegenOptions {
    pub init_mode: InitMode,
    pub sleep_seconds: u32,
    pub array_name: String,
    pub analog_pin: String,
}

impl Default for CodegenOptions {
    fn default() -> Self {
        CodegenOptions {
            init_mode: InitMode::RuntimeFormula,
            sleep_seconds: 60,
            array_name: "Q_star".into(),
            analog_pin: "A0".into(),
        }
    }
}

impl CodegenOptions {
    pub fn validate(&self) -> Result<(), CodegenError> {
        if self.sleep_seconds == 0 {
            return Err(CodegenError::ZeroSleep);
        }
        for name in [&self.array_name, &self.analog_pin] {
            if !is_identifier(name) {
                return Err(CodegenError::BadIdentifier(name.clone()));
            }
            if RESERVED.contains(&name.as_str()) {
                return Err(CodegenError::Collision(name.clone()));
            }
        }
        if self.array_name == self.analog_pin {
            return Err(CodegenError::Collision(self.array_name.clone()));
        }
        Ok(())
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !C_KEYWORDS.contains(&s)
}

/// Generates the C translation unit. Output is byte-identical for
/// identical inputs.
pub fn emit(
    spec: &DmsSpec,
    sf: &ScalingFunction,
    table: &LookupTable,
    options: &CodegenOptions,
) -> Result<String, CodegenError> {
    options.validate()?;
    let bits = spec.adc.bits();
    if bits > MAX_BITS {
        return Err(CodegenError::TooWide(bits));
    }
    let slots = 1u64 << bits;
    let (first, last) = (table.first_code(), table.last_code());
    if last >= slots {
        return Err(CodegenError::WindowMismatch { first, last, bits });
    }
    let formula = match options.init_mode {
        InitMode::RuntimeFormula => Some(sf.absolute_expr("i").ok_or(CodegenError::NoClosedForm)?),
        InitMode::ConstantTable => None,
    };
    let arr = &options.array_name;
    let pin = &options.analog_pin;
    let symbol = spec.symbols.quantity();

    let mut out = String::new();
    // writes into a String cannot fail
    let w = &mut out;
    let _ = writeln!(w, "/*");
    let _ = writeln!(w, " * Scaling module: {symbol} [{}] from {bits}-bit ADC codes.", spec.unit);
    let _ = writeln!(w, " * Generated by adcscale; do not edit.");
    if let Some(abs) = sf.absolute_expr("N") {
        let _ = writeln!(w, " *");
        let _ = writeln!(w, " * {symbol}*(N) = {}, N in [{first}, {last}]", abs.display_sig(DISPLAY_DIGITS));
    }
    let _ = writeln!(w, " */");
    let _ = writeln!(w, "#include <math.h>");
    let _ = writeln!(w);
    let _ = writeln!(w, "#ifndef {pin}");
    let _ = writeln!(w, "#define {pin} 0");
    let _ = writeln!(w, "#endif");
    let _ = writeln!(w);

    match &formula {
        Some(f) => {
            let _ = writeln!(w, "double {arr}[{slots}]; /* conversion table indexed by ADC code */");
            write_globals(w, pin, first);
            let _ = writeln!(w, "void setup(void)");
            let _ = writeln!(w, "{{");
            let _ = writeln!(w, "    /* initialization zone */");
            let _ = writeln!(w, "    int i;");
            let _ = writeln!(w, "    for (i = {first}; i <= {last}; i++) {{");
            let _ = writeln!(w, "        /* array initialization with the conversion table */");
            let _ = writeln!(w, "        {arr}[i] = {};", c_expr(f));
            let _ = writeln!(w, "    }}");
            let _ = writeln!(w, "}}");
        }
        None => {
            let _ = writeln!(w, "double {arr}[{slots}] = {{ /* conversion table indexed by ADC code */");
            let literals: Vec<String> = (0..slots)
                .map(|code| {
                    let v = if code < first { 0.0 } else { table.values()[(code - first) as usize] };
                    c_double(v)
                })
                .collect();
            for (k, row) in literals.chunks(8).enumerate() {
                let sep = if (k + 1) * 8 >= literals.len() { "" } else { "," };
                let _ = writeln!(w, "    {}{sep}", row.join(", "));
            }
            let _ = writeln!(w, "}};");
            write_globals(w, pin, first);
            let _ = writeln!(w, "void setup(void)");
            let _ = writeln!(w, "{{");
            let _ = writeln!(w, "    /* initialization zone: table is initialized statically */");
            let _ = writeln!(w, "}}");
        }
    }

    let _ = writeln!(w);
    let _ = writeln!(w, "static int read_adc(int pin)");
    let _ = writeln!(w, "{{");
    let _ = writeln!(w, "    /* platform call: analogRead(pin) */");
    let _ = writeln!(w, "    (void)pin;");
    let _ = writeln!(w, "    return {first};");
    let _ = writeln!(w, "}}");
    let _ = writeln!(w);
    let _ = writeln!(w, "void send_data(float out)");
    let _ = writeln!(w, "{{");
    let _ = writeln!(w, "    /* code for wireless data sending or printing on serial console */");
    let _ = writeln!(w, "    (void)out;");
    let _ = writeln!(w, "}}");
    let _ = writeln!(w);
    let _ = writeln!(w, "/* codes outside {first}..{last} read the nearest table edge */");
    let _ = writeln!(w, "double scale_code(int code)");
    let _ = writeln!(w, "{{");
    let _ = writeln!(w, "    if (code < {first}) {{");
    let _ = writeln!(w, "        return {arr}[{first}];");
    let _ = writeln!(w, "    }}");
    let _ = writeln!(w, "    if (code > {last}) {{");
    let _ = writeln!(w, "        return {arr}[{last}];");
    let _ = writeln!(w, "    }}");
    let _ = writeln!(w, "    return {arr}[code];");
    let _ = writeln!(w, "}}");
    let _ = writeln!(w);
    let _ = writeln!(w, "void loop(void)");
    let _ = writeln!(w, "{{");
    let _ = writeln!(w, "    /* reading measured value from ADC in ADC units */");
    let _ = writeln!(w, "    N = read_adc(analogInPin);");
    let _ = writeln!(w, "    /* conversion from ADC units to physical units */");
    let _ = writeln!(w, "    outputValue = scale_code(N);");
    let _ = writeln!(w, "    /* routine to send data to the datalogger or to serial console */");
    let _ = writeln!(w, "    send_data((float)outputValue);");
    let _ = writeln!(w, "    /* platform sleep: ESP.deepSleep({}e6) */", options.sleep_seconds);
    let _ = writeln!(w, "}}");
    Ok(out)
}

fn write_globals(w: &mut String, pin: &str, first: u64) {
    let _ = writeln!(w, "const int analogInPin = {pin}; /* analog input pin */");
    let _ = writeln!(w, "double outputValue = 0;");
    let _ = writeln!(w, "int N = {first};");
    let _ = writeln!(w);
}

/// Shortest round-tripping double literal; always carries a `.` or an
/// exponent so C never treats it as an integer.
pub fn c_double(v: f64) -> String {
    let s = format!("{v:?}");
    if s.starts_with('-') {
        format!("({s})")
    } else {
        s
    }
}

/// Renders an expression as a C expression over doubles.
pub fn c_expr(e: &Expr) -> String {
    fn prec(e: &Expr) -> u8 {
        match e {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            _ => 3,
        }
    }
    fn wrap(e: &Expr, parens: bool) -> String {
        if parens {
            format!("({})", c_expr(e))
        } else {
            c_expr(e)
        }
    }
    let bin = |a: &Expr, op: &str, b: &Expr, p: u8| format!("{}{op}{}", wrap(a, prec(a) < p), wrap(b, prec(b) <= p));
    match e {
        Expr::Num(v) => c_double(*v),
        Expr::Const(n) | Expr::Var(n) => n.clone(),
        Expr::Add(a, b) => bin(a, " + ", b, 1),
        Expr::Sub(a, b) => bin(a, " - ", b, 1),
        Expr::Mul(a, b) => bin(a, "*", b, 2),
        Expr::Div(a, b) => bin(a, "/", b, 2),
        Expr::Pow(a, k) => format!("pow({}, {})", c_expr(a), c_double(crate::expr::ratio_to_f64(*k))),
        Expr::Sqrt(a) => format!("sqrt({})", c_expr(a)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::lut::build_lut;
    use crate::presets::flow_case_study;
    use crate::scaling::synthesize;

    fn case() -> (DmsSpec, ScalingFunction, LookupTable) {
        let spec = flow_case_study();
        let sf = synthesize(&spec).unwrap();
        let t = build_lut(&sf, &spec.bounds()).unwrap();
        (spec, sf, t)
    }

    #[test]
    fn runtime_formula_mirrors_reference_program() {
        let (spec, sf, t) = case();
        let src = emit(&spec, &sf, &t, &CodegenOptions::default()).unwrap();
        assert!(src.contains("double Q_star[1024];"));
        assert!(src.contains("for (i = 205; i <= 1023; i++)"));
        let c = c_double(sf.coefficient().unwrap());
        assert!(c.starts_with("1.04866903495"), "{c}");
        assert!(src.contains(&format!("Q_star[i] = {c}*sqrt(i - 204.6);")));
        assert!(src.contains("Q*(N) = 1.04866903495*sqrt(N - 204.6), N in [205, 1023]"));
        assert!(src.contains("ESP.deepSleep(60e6)"));
        assert!(!src.contains("//"));
        assert!(!src.contains('\r'));
    }

    #[test]
    fn option_validation() {
        let mut o = CodegenOptions { array_name: "2bad".into(), ..CodegenOptions::default() };
        assert_eq!(o.validate(), Err(CodegenError::BadIdentifier("2bad".into())));
        o.array_name = "double".into();
        assert_eq!(o.validate(), Err(CodegenError::BadIdentifier("double".into())));
        o.array_name = "A0".into();
        assert_eq!(o.validate(), Err(CodegenError::Collision("A0".into())));
        o.array_name = "loop".into();
        assert_eq!(o.validate(), Err(CodegenError::Collision("loop".into())));
        let o = CodegenOptions { sleep_seconds: 0, ..Default::default() };
        assert_eq!(o.validate(), Err(CodegenError::ZeroSleep));
    }

    #[test]
    fn numeric_composite_cannot_use_runtime_formula() {
        let spec = flow_case_study();
        let sf = crate::scaling::synthesize_with(&spec, crate::inversion::Strategy::NumericOnly).unwrap();
        let t = build_lut(&sf, &spec.bounds()).unwrap();
        assert_eq!(emit(&spec, &sf, &t, &CodegenOptions::default()), Err(CodegenError::NoClosedForm));
        let o = CodegenOptions { init_mode: InitMode::ConstantTable, ..Default::default() };
        assert!(emit(&spec, &sf, &t, &o).is_ok());
    }

    #[test]
    fn c_rendering() {
        assert_eq!(c_double(30.0), "30.0");
        assert_eq!(c_double(-2.5), "(-2.5)");
        assert_eq!(c_expr(&parse("30 - 2*sqrt(1023 - i)").unwrap()), "30.0 - 2.0*sqrt(1023.0 - i)");
        assert_eq!(c_expr(&parse("3*i^(1/3)").unwrap()), "3.0*pow(i, 0.3333333333333333)");
        assert_eq!(c_expr(&parse("1/(i + 1)").unwrap()), "1.0/(i + 1.0)");
    }
}
