//! Cavity QED simulator for photon-mediated joint excitation of two atoms.
//!
//! One cavity photon excites two atoms at once through a third-order process
//! in which the cavity field and an auxiliary level act as Raman partners.
//! The crate builds the full multi-level Hamiltonians, derives the effective
//! couplings both in closed form and by an explicit Schrieffer-Wolff
//! transformation, integrates unitary and dissipative dynamics and extracts
//! the traces of interest.
//!
//! Frequencies in public specs are linear (GHz, `ω/2π`); operators are in
//! angular units (rad/ns) and times in ns.

pub mod analysis;
pub mod config;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod export;
pub mod integrate;
pub mod model;
pub mod observables;
pub mod operator;
pub mod presets;
pub mod scan;
pub mod scenario;
pub mod sparse;
pub mod validation;

pub use config::ConfigDocument;
pub use dynamics::{evolve_lindblad, evolve_schrodinger, propagator_expm, EvolveOptions, TimeGrid, Trajectory};
pub use effective::{
    build_effective_hamiltonian, chi_circuit, chi_drive, chi_lambda, chi_vee, effective_params, EffectiveModel,
    EffectiveOptions, EffectiveParams,
};
pub use error::{Error, Result};
pub use integrate::{Method, SolverOptions, SolverStats};
pub use model::{
    AtomKind, AtomSpec, BareLabel, CavitySpec, Coupling, DriveSpec, HilbertLayout, Level, Relaxation, SystemSpec,
};
pub use observables::Observable;
pub use operator::{
    create, destroy, eig_herm, expectation, transition, DimSignature, OperatorMatrix, QuantumState, C64,
};
pub use presets::Preset;
pub use scan::{Objective, ScanParameter, ScanResult, ScanSettings};
pub use scenario::{run_document, run_scenario, ModelKind, Run, RunOptions, ScenarioReport};
pub use validation::{validate, ValidationReport, Validator};
