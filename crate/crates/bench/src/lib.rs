//! Shared fixtures for the benchmarks.

use jointex::{ConfigDocument, Preset, SystemSpec};

/// Circuit operating point of the exchange benchmarks.
pub const OPERATING_POINT_GHZ: f64 = 7.9655;

pub fn circuit() -> (ConfigDocument, SystemSpec) {
    let doc = Preset::Fig6.document();
    let spec = doc.system_spec().expect("preset is valid").with_cavity_frequency(OPERATING_POINT_GHZ);
    (doc, spec)
}
