//! JSON configuration document.
//!
//! ```json
//! {
//!   "cavity": {"frequency": 7.9655, "n_max": 3},
//!   "atoms": [{"kind": "delta", "frequencies": {"e": 4.0, "i": 7.0},
//!              "couplings": [{"transition": ["e", "g"], "g": 0.12}]}],
//!   "dissipation": {"kappa": 1e-5, "relaxation": []},
//!   "grid": {"t_start": 0.0, "t_end": 2000.0, "n_samples": 4001},
//!   "solver": {"rtol": 1e-9, "atol": 1e-12}
//! }
//! ```
//!
//! Frequencies and rates are linear GHz, times are ns.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::TimeGrid;
use crate::error::{Error, Result};
use crate::integrate::{Method, SolverOptions};
use crate::model::{AtomSpec, BareLabel, CavitySpec, Relaxation, SystemSpec};
use crate::scan::{Objective, ScanParameter};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub frequency: f64,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
}

fn default_n_max() -> usize {
    3
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipationSection {
    /// Use the master equation by default for this document.
    #[serde(default)]
    pub enabled: bool,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default)]
    pub relaxation: Vec<Relaxation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    #[serde(default)]
    pub t_start: f64,
    #[serde(default = "default_t_end")]
    pub t_end: f64,
    #[serde(default = "default_samples")]
    pub n_samples: usize,
}

fn default_t_end() -> f64 {
    2000.0
}

fn default_samples() -> usize {
    4001
}

impl Default for GridSection {
    fn default() -> Self {
        Self { t_start: 0.0, t_end: default_t_end(), n_samples: default_samples() }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    #[default]
    Adaptive,
    Fixed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default = "default_rtol")]
    pub rtol: f64,
    #[serde(default = "default_atol")]
    pub atol: f64,
    #[serde(default)]
    pub method: MethodName,
    /// Step of the fixed-step mode, ns.
    #[serde(default = "default_fixed_step")]
    pub fixed_step_ns: f64,
}

fn default_rtol() -> f64 {
    1e-9
}

fn default_atol() -> f64 {
    1e-12
}

fn default_fixed_step() -> f64 {
    1e-3
}

impl Default for SolverSection {
    fn default() -> Self {
        Self { rtol: default_rtol(), atol: default_atol(), method: MethodName::Adaptive, fixed_step_ns: default_fixed_step() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    /// `[lo, hi]` in GHz.
    pub range: [f64; 2],
    #[serde(default)]
    pub objective: Objective,
    #[serde(default)]
    pub parameter: ScanParameter,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Trial window of the transfer objective, ns; derived from the analytic
    /// coupling when absent.
    #[serde(default)]
    pub window_ns: Option<f64>,
}

fn default_points() -> usize {
    41
}

fn default_initial() -> String {
    "1gg".into()
}

fn default_target() -> String {
    "0ee".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub cavity: CavitySection,
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub dissipation: DissipationSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub solver: SolverSection,
    /// Bare initial state label such as `1gg`.
    #[serde(default = "default_initial")]
    pub initial_state: String,
    /// Bare state the exchange is expected to reach.
    #[serde(default = "default_target")]
    pub target_state: String,
    /// Extra population columns beyond initial and target.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_populations: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
}

impl ConfigDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Self = serde_json::from_str(text)?;
        doc.check()?;
        Ok(doc)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    fn check(&self) -> Result<()> {
        self.system_spec()?.validate()?;
        self.time_grid()?;
        self.solver_options()?;
        self.initial_label()?;
        self.target_label()?;
        for p in &self.extra_populations {
            p.parse::<BareLabel>()?;
        }
        if let Some(s) = &self.scan {
            if !(s.range[0] < s.range[1]) {
                return Err(Error::Config(format!("scan range {:?} is empty", s.range)));
            }
            if s.points < 3 {
                return Err(Error::Config("scan needs at least 3 grid points".into()));
            }
        }
        Ok(())
    }

    pub fn system_spec(&self) -> Result<SystemSpec> {
        let spec = SystemSpec {
            cavity: CavitySpec { frequency: self.cavity.frequency, n_max: self.cavity.n_max, decay: self.dissipation.kappa },
            atoms: self.atoms.clone(),
            relaxation: self.dissipation.relaxation.clone(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Replaces the physical sections with `spec`, keeping everything else.
    pub fn with_spec(&self, spec: &SystemSpec) -> Self {
        let mut doc = self.clone();
        doc.cavity = CavitySection { frequency: spec.cavity.frequency, n_max: spec.cavity.n_max };
        doc.atoms = spec.atoms.clone();
        doc.dissipation.kappa = spec.cavity.decay;
        doc.dissipation.relaxation = spec.relaxation.clone();
        doc
    }

    pub fn time_grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.grid.t_start, self.grid.t_end, self.grid.n_samples)
    }

    pub fn solver_options(&self) -> Result<SolverOptions> {
        let method = match self.solver.method {
            MethodName::Adaptive => Method::Adaptive,
            MethodName::Fixed => Method::FixedStep { dt: self.solver.fixed_step_ns },
        };
        let opts = SolverOptions { rtol: self.solver.rtol, atol: self.solver.atol, method, ..SolverOptions::default() };
        opts.validate()?;
        Ok(opts)
    }

    pub fn initial_label(&self) -> Result<BareLabel> {
        self.initial_state.parse()
    }

    pub fn target_label(&self) -> Result<BareLabel> {
        self.target_state.parse()
    }

    /// Population columns: initial, target, then extras, without duplicates.
    pub fn population_labels(&self) -> Result<Vec<BareLabel>> {
        let mut out = vec![self.initial_label()?, self.target_label()?];
        for p in &self.extra_populations {
            let l: BareLabel = p.parse()?;
            if !out.contains(&l) {
                out.push(l);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::{Preset, ALL_PRESETS};

    #[test]
    fn presets_parse_and_round_trip() {
        for p in ALL_PRESETS {
            let doc = p.document();
            let back = ConfigDocument::from_json(&doc.to_json()).unwrap();
            assert_eq!(doc, back, "{}", p.name());
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let mut v: serde_json::Value = serde_json::from_str(&Preset::Fig5.document().to_json()).unwrap();
        v["cavity"]["omega"] = 1.0.into();
        assert!(ConfigDocument::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn defaults_fill_optional_sections() {
        let text = r#"{"cavity": {"frequency": 5.0},
                       "atoms": [{"kind": "two_level", "frequencies": {"e": 5.0}}]}"#;
        let doc = ConfigDocument::from_json(text).unwrap();
        assert_eq!(doc.cavity.n_max, 3);
        assert_eq!(doc.grid, GridSection::default());
        assert_eq!(doc.solver.rtol, 1e-9);
        assert!(!doc.dissipation.enabled);
    }

    #[test]
    fn invalid_documents() {
        assert!(ConfigDocument::from_json("{").is_err());
        let bad = r#"{"cavity": {"frequency": 5.0},
                      "atoms": [{"kind": "two_level", "frequencies": {"e": 5.0},
                                 "couplings": [{"transition": ["i", "g"], "g": 0.1}]}]}"#;
        assert!(ConfigDocument::from_json(bad).is_err());
        let bad_grid = r#"{"cavity": {"frequency": 5.0}, "grid": {"t_end": -1.0},
                           "atoms": [{"kind": "two_level", "frequencies": {"e": 5.0}}]}"#;
        assert!(ConfigDocument::from_json(bad_grid).is_err());
    }
}
