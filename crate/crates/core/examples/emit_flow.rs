fn main() {
    let spec = adcscale::presets::flow_case_study();
    let sf = adcscale::synthesize(&spec).unwrap();
    let t = adcscale::build_lut(&sf, &spec.bounds()).unwrap();
    let mut o = adcscale::CodegenOptions::default();
    if std::env::args().nth(1).as_deref() == Some("table") {
        o.init_mode = adcscale::InitMode::ConstantTable;
    }
    print!("{}", adcscale::emit(&spec, &sf, &t, &o).unwrap());
}
