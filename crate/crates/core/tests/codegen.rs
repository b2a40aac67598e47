use std::process::Command;

use adcscale::expr::parse;
use adcscale::presets::{flow_case_study, spec_from_sources};
use adcscale::{build_lut, emit, synthesize, CodegenOptions, DmsSpec, InitMode, LookupTable, ScalingFunction};

fn flow() -> (DmsSpec, ScalingFunction, LookupTable) {
    let spec = flow_case_study();
    let sf = synthesize(&spec).unwrap();
    let t = build_lut(&sf, &spec.bounds()).unwrap();
    (spec, sf, t)
}

fn source(mode: InitMode) -> String {
    let (spec, sf, t) = flow();
    let options = CodegenOptions { init_mode: mode, ..CodegenOptions::default() };
    emit(&spec, &sf, &t, &options).unwrap()
}

/// The right-hand side of the table fill statement.
fn fill_formula(src: &str) -> &str {
    let line = src.lines().find(|l| l.trim_start().starts_with("Q_star[i] = ")).expect("fill statement");
    line.trim().trim_start_matches("Q_star[i] = ").trim_end_matches(';')
}

#[test]
fn emission_is_deterministic() {
    for mode in [InitMode::RuntimeFormula, InitMode::ConstantTable] {
        assert_eq!(source(mode), source(mode));
    }
}

#[test]
fn formula_reparses_onto_the_table() {
    let (_, _, t) = flow();
    let src = source(InitMode::RuntimeFormula);
    let formula = parse(fill_formula(&src)).unwrap();
    assert_eq!(formula.variable(), Some("i"));
    for (code, value) in t.entries() {
        let got = formula.eval_at(code as f64).unwrap();
        assert!((got - value).abs() <= 1e-12, "code {code}: {got} vs {value}");
    }
}

#[test]
fn loop_bounds_follow_the_window() {
    let src = source(InitMode::RuntimeFormula);
    assert!(src.contains("for (i = 205; i <= 1023; i++)"));
    assert!(fill_formula(&src).starts_with("1.04866903495"));
}

fn initializer(src: &str) -> Vec<f64> {
    let start = src.find("= {").unwrap();
    let body = &src[start + 3..];
    let body = &body[..body.find("};").unwrap()];
    let body = body.split("*/").last().unwrap();
    body.split(',').map(|v| v.trim().parse().unwrap()).collect()
}

#[test]
fn constant_table_covers_the_code_space() {
    let (_, _, t) = flow();
    let src = source(InitMode::ConstantTable);
    let values = initializer(&src);
    assert_eq!(values.len(), 1024);
    assert!(values[..205].iter().all(|&v| v == 0.0));
    for (code, value) in t.entries() {
        assert_eq!(values[code as usize], value, "code {code}");
    }
    assert!(!src.contains("for (i ="));
}

#[test]
fn table_and_formula_agree() {
    let runtime = source(InitMode::RuntimeFormula);
    let formula = parse(fill_formula(&runtime)).unwrap();
    let table = initializer(&source(InitMode::ConstantTable));
    for (code, &value) in table.iter().enumerate().skip(205) {
        let a = formula.eval_at(code as f64).unwrap();
        assert!((a - value).abs() <= 1e-9);
    }
}

#[test]
fn sleep_interval_touches_one_line() {
    let (spec, sf, t) = flow();
    let a = emit(&spec, &sf, &t, &CodegenOptions::default()).unwrap();
    let options = CodegenOptions { sleep_seconds: 300, ..CodegenOptions::default() };
    let b = emit(&spec, &sf, &t, &options).unwrap();
    let changed: Vec<_> = a.lines().zip(b.lines()).filter(|(x, y)| x != y).collect();
    assert_eq!(a.lines().count(), b.lines().count());
    assert_eq!(changed.len(), 1);
    let (x, y) = changed[0];
    let tokens: Vec<_> = x.split_whitespace().zip(y.split_whitespace()).filter(|(p, q)| p != q).collect();
    assert_eq!(tokens, [("ESP.deepSleep(60e6)", "ESP.deepSleep(300e6)")]);
}

#[test]
fn structure_checklist() {
    for mode in [InitMode::RuntimeFormula, InitMode::ConstantTable] {
        let src = source(mode);
        for needle in [
            "#include <math.h>",
            "#ifndef A0",
            "double Q_star[1024]",
            "const int analogInPin = A0;",
            "void setup(void)",
            "void loop(void)",
            "N = read_adc(analogInPin);",
            "outputValue = scale_code(N);",
            "send_data((float)outputValue);",
        ] {
            assert!(src.contains(needle), "{mode:?}: missing {needle}");
        }
        for once in ["double Q_star[", "void setup(void)", "void loop(void)", "void send_data(float out)"] {
            assert_eq!(src.matches(once).count(), 1, "{mode:?}: {once}");
        }
        assert!(!src.contains("//"), "C89 has no line comments");
        assert_eq!(src.matches('{').count(), src.matches('}').count());
        assert_eq!(src.matches("/*").count(), src.matches("*/").count());
        assert!(src.is_ascii());
    }
}

#[test]
fn numeric_composite_needs_a_table() {
    let spec = spec_from_sources("dimax*dQ^2/dQmax^2", "dNmax/dimax*di", "dQ/2 + dQ^2/60").unwrap();
    let sf = synthesize(&spec).unwrap();
    let t = build_lut(&sf, &spec.bounds()).unwrap();
    assert!(emit(&spec, &sf, &t, &CodegenOptions::default()).is_err());
    let options = CodegenOptions { init_mode: InitMode::ConstantTable, ..CodegenOptions::default() };
    assert_eq!(initializer(&emit(&spec, &sf, &t, &options).unwrap()).len(), 1024);
}

/// Syntax-checks the output with the host C compiler when one is present.
#[test]
fn compiles_as_c89() {
    let dir = tempfile::tempdir().unwrap();
    for (mode, name) in [(InitMode::RuntimeFormula, "runtime.c"), (InitMode::ConstantTable, "table.c")] {
        let path = dir.path().join(name);
        std::fs::write(&path, source(mode)).unwrap();
        let out = match Command::new("cc")
            .args(["-std=c89", "-pedantic", "-Wall", "-Werror", "-fsyntax-only"])
            .arg(&path)
            .output()
        {
            Ok(out) => out,
            Err(_) => {
                eprintln!("cc not found, skipping");
                return;
            }
        };
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

/// Builds the emitted file with a dump `main` and compares the table it
/// prints against the CSV export.
#[test]
fn compiled_table_matches_csv_export() {
    let (_, _, t) = flow();
    let expected: Vec<(u64, f64)> = t
        .to_csv()
        .lines()
        .skip(1)
        .map(|l| {
            let (c, v) = l.split_once(',').unwrap();
            (c.parse().unwrap(), v.parse().unwrap())
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    for (mode, name) in [(InitMode::RuntimeFormula, "runtime"), (InitMode::ConstantTable, "table")] {
        std::fs::write(dir.path().join(format!("{name}.c")), source(mode)).unwrap();
        let harness = dir.path().join(format!("{name}_dump.c"));
        std::fs::write(
            &harness,
            format!(
                "#include <stdio.h>\n#include \"{name}.c\"\nint main(void)\n{{\n    int i;\n    setup();\n    \
                 printf(\"code,value\\n\");\n    for (i = 205; i <= 1023; i++) {{\n        \
                 printf(\"%d,%.10g\\n\", i, Q_star[i]);\n    }}\n    return 0;\n}}\n"
            ),
        )
        .unwrap();
        let exe = dir.path().join(name);
        let Ok(out) = Command::new("cc").arg("-std=c89").arg("-o").arg(&exe).arg(&harness).arg("-lm").output() else {
            eprintln!("cc not found, skipping");
            return;
        };
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        let dump = String::from_utf8(Command::new(&exe).output().unwrap().stdout).unwrap();
        let rows: Vec<(u64, f64)> = dump
            .lines()
            .skip(1)
            .map(|l| {
                let (c, v) = l.split_once(',').unwrap();
                (c.parse().unwrap(), v.parse().unwrap())
            })
            .collect();
        assert_eq!(rows.len(), 819);
        for ((c, v), (ec, ev)) in rows.iter().zip(&expected) {
            assert_eq!(c, ec);
            assert!((v - ev).abs() <= 1e-6, "{name}: code {c}: {v} vs {ev}");
        }
    }
}
