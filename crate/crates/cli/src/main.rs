//! `adcscale` command-line front end.
//!
//! Exit codes: 0 success, 2 config error, 3 validation failure, 4 I/O
//! error, 5 code generation error, 64 usage error, 1 internal error.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adcscale::lut::ExportFormat;
use adcscale::scaling::DISPLAY_DIGITS;
use adcscale::{
    build_lut, emit, load, roundtrip, synthesize, CodegenError, Config, ConfigError, FormKind, LutError, Quantizer,
    ScalingError, SimError,
};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "adcscale", version, about = "Scaling functions from ADC codes to physical units")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the scaling function and the converter bounds.
    Derive(Args),
    /// Write the lookup table.
    Lut(Args),
    /// Write the embedded C source.
    Codegen(Args),
    /// Sweep the forward chain and report reconstruction error.
    Simulate(Args),
}

#[derive(clap::Args)]
struct Args {
    /// System description (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Overrides the quantizer from the config.
    #[arg(long)]
    quantizer: Option<Quantizer>,
    /// Sweep length for `simulate`.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

struct Failure {
    category: &'static str,
    code: u8,
    message: String,
}

impl Failure {
    fn new(category: &'static str, code: u8, message: impl ToString) -> Self {
        Failure { category, code, message: message.to_string() }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        match e {
            ConfigError::Io { .. } => Failure::new("io", 4, e),
            _ => Failure::new("config", 2, e),
        }
    }
}

impl From<ScalingError> for Failure {
    fn from(e: ScalingError) -> Self {
        match e {
            ScalingError::Invalid(_) | ScalingError::Inversion(_) | ScalingError::DomainMismatch { .. } => {
                Failure::new("validation", 3, e)
            }
            _ => Failure::new("internal", 1, e),
        }
    }
}

impl From<LutError> for Failure {
    fn from(e: LutError) -> Self {
        match e {
            LutError::Scaling(e) => e.into(),
            LutError::Io(_) => Failure::new("io", 4, e),
            LutError::EmptyWindow { .. } | LutError::WindowTooLarge(_) | LutError::NotIncreasing { .. } => {
                Failure::new("validation", 3, e)
            }
            LutError::OutOfWindow { .. } => Failure::new("internal", 1, e),
        }
    }
}

impl From<CodegenError> for Failure {
    fn from(e: CodegenError) -> Self {
        Failure::new("codegen", 5, e)
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Lut(e) => e.into(),
            SimError::Sweep(_) => Failure::new("usage", 64, e),
            _ => Failure::new("internal", 1, e),
        }
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    let res = match out {
        Some(path) => fs::write(path, text),
        None => io::stdout().lock().write_all(text.as_bytes()),
    };
    res.map_err(|e| {
        let target = out.map_or_else(|| "standard output".to_string(), |p| p.display().to_string());
        Failure::new("io", 4, format!("cannot write {target}: {e}"))
    })
}

fn derive(cfg: &Config) -> Result<String, Failure> {
    let spec = &cfg.spec;
    let sf = synthesize(spec)?;
    let b = spec.bounds();
    let q = spec.symbols.quantity();
    let mut out = String::new();
    match sf.kind() {
        FormKind::Closed => {
            let delta = sf.closed_form().expect("closed kind");
            let abs = sf.absolute_expr("N").expect("closed kind");
            out += &format!("q(dN) = {}\n", delta.display_sig(DISPLAY_DIGITS));
            out += &format!("{q}*(N) = {}\n", abs.display_sig(DISPLAY_DIGITS));
        }
        kind => out += &format!("q(dN) = {kind}\n"),
    }
    out += &format!("Nmin={} Nmax={} dNmax={}\n", b.n_min, b.n_max, b.dn_max);
    let w = sf.window();
    out += &format!("window=[{}, {}] convention={}\n", w.min().ceil(), w.max().floor(), sf.convention());
    Ok(out)
}

fn run(command: Command) -> Result<(), Failure> {
    let (Command::Derive(args) | Command::Lut(args) | Command::Codegen(args) | Command::Simulate(args)) = &command;
    let cfg = load(&args.config)?;
    let out = args.out.as_deref();
    match &command {
        Command::Derive(_) => write_output(out, &derive(&cfg)?),
        Command::Lut(_) => {
            let sf = synthesize(&cfg.spec)?;
            let table = build_lut(&sf, &cfg.spec.bounds())?;
            let format = match args.format {
                Format::Csv => ExportFormat::Csv,
                Format::Json => ExportFormat::Json,
            };
            match (out, format) {
                (Some(path), _) => Ok(table.export(format, path)?),
                (None, ExportFormat::Csv) => write_output(None, &table.to_csv()),
                (None, ExportFormat::Json) => write_output(None, &table.to_json()),
            }
        }
        Command::Codegen(_) => {
            let sf = synthesize(&cfg.spec)?;
            let table = build_lut(&sf, &cfg.spec.bounds())?;
            write_output(out, &emit(&cfg.spec, &sf, &table, &cfg.codegen)?)
        }
        Command::Simulate(_) => {
            let sf = synthesize(&cfg.spec)?;
            let quantizer = args.quantizer.unwrap_or(cfg.quantizer);
            let report = roundtrip(&cfg.spec, &sf, args.samples, quantizer)?;
            let text = match args.format {
                Format::Csv => report.to_csv(),
                Format::Json => report.to_json(),
            };
            write_output(out, &text)?;
            // keep stdout clean when it carries the samples
            match out {
                Some(_) => write_output(None, &report.to_string()),
                None => {
                    eprint!("{report}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let lines: Vec<&str> = text.lines().take_while(|l| !l.is_empty()).map(str::trim).collect();
            eprintln!("error[usage]: {}", lines.join(" ").trim_start_matches("error: "));
            return ExitCode::from(64);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error[{}]: {}", f.category, f.message.replace('\n', "; "));
            ExitCode::from(f.code)
        }
    }
}
