//! Fixtures shared by the benchmarks.

use hornet_core::scenario::bos::{build_bos_model, BosParams};
use hornet_core::stochastic::Limits;
use hornet_core::{bundled, NestedMarking, SystemNet};

pub fn bundled_model(name: &str) -> (SystemNet, NestedMarking) {
    let m = bundled::load(name).expect("bundled model");
    (m.system, m.marking)
}

pub fn bos() -> (SystemNet, NestedMarking) {
    build_bos_model(&BosParams::default()).expect("default parameters are valid")
}

/// Depth-bounded exploration; the BoS chain is infinite.
pub fn depth(d: usize) -> Limits {
    Limits {
        max_states: 1_000_000,
        max_depth: Some(d),
    }
}
