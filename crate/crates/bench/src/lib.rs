//! Fixtures shared by the pipeline benchmarks.

use adcscale::{presets, synthesize, DmsSpec, ScalingFunction};

/// The flow system and its synthesized scaling function.
pub fn flow() -> (DmsSpec, ScalingFunction) {
    let spec = presets::flow_case_study();
    let sf = synthesize(&spec).expect("flow system synthesizes");
    (spec, sf)
}
