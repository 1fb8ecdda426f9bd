//! Embedded scenario configurations. Presets are plain configuration
//! documents, so each is also a valid input to every command.

use std::fmt;
use std::str::FromStr;

use crate::config::ConfigDocument;
use crate::error::{Error, Result};
use crate::model::{AtomKind, AtomSpec, CavitySpec, Level, SystemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    Fig5,
    Fig6,
    Fig7,
    Ghz,
    TwoPhoton,
}

pub const ALL_PRESETS: [Preset; 5] = [Preset::Fig5, Preset::Fig6, Preset::Fig7, Preset::Ghz, Preset::TwoPhoton];

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Ghz => "ghz",
            Preset::TwoPhoton => "two_photon",
        }
    }

    pub fn json(self) -> &'static str {
        match self {
            Preset::Fig5 => include_str!("../presets/fig5.json"),
            Preset::Fig6 => include_str!("../presets/fig6.json"),
            Preset::Fig7 => include_str!("../presets/fig7.json"),
            Preset::Ghz => include_str!("../presets/ghz.json"),
            Preset::TwoPhoton => include_str!("../presets/two_photon.json"),
        }
    }

    pub fn document(self) -> ConfigDocument {
        ConfigDocument::from_json(self.json()).expect("embedded presets are valid")
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ALL_PRESETS
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown preset '{s}'")))
    }
}

/// The two-Delta circuit model at its reference operating point.
pub fn circuit_spec() -> SystemSpec {
    Preset::Fig5.document().system_spec().expect("valid preset")
}

/// Lambda atom (`e` 4.0, `i` 9.5 GHz) and a 4.2 GHz two-level atom, with
/// couplings `[g_p, g_s, g_2]`. Reference model for checks of the Lambda family.
pub fn lambda_spec(w_c: f64, g: [f64; 3]) -> SystemSpec {
    SystemSpec {
        cavity: CavitySpec { frequency: w_c, n_max: 3, decay: 0.0 },
        atoms: vec![
            AtomSpec::new(AtomKind::Lambda)
                .with_level(Level::E, 4.0)
                .with_level(Level::I, 9.5)
                .with_coupling(Level::I, Level::G, g[0])
                .with_coupling(Level::I, Level::E, g[1]),
            AtomSpec::new(AtomKind::TwoLevel).with_level(Level::E, 4.2).with_coupling(Level::E, Level::G, g[2]),
        ],
        relaxation: vec![],
    }
}

/// V atom (`i` at zero, `g` 3.0, `e` 7.1 GHz) and a 4.0 GHz two-level atom.
pub fn vee_spec(w_c: f64, g: [f64; 3]) -> SystemSpec {
    SystemSpec {
        cavity: CavitySpec { frequency: w_c, n_max: 3, decay: 0.0 },
        atoms: vec![
            AtomSpec::new(AtomKind::Vee)
                .with_level(Level::G, 3.0)
                .with_level(Level::E, 7.1)
                .with_coupling(Level::E, Level::I, g[0])
                .with_coupling(Level::G, Level::I, g[1]),
            AtomSpec::new(AtomKind::TwoLevel).with_level(Level::E, 4.0).with_coupling(Level::E, Level::G, g[2]),
        ],
        relaxation: vec![],
    }
}
