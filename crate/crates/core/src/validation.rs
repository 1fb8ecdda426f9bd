//! Invariant suite: algebraic identities, conservation laws and oracle
//! comparisons that every correct build satisfies. A failing check is a
//! bug; dispersive-regime warnings are advisory.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dynamics::{apply_propagator, evolve_lindblad, evolve_schrodinger, propagator_expm, EvolveOptions, TimeGrid};
use crate::effective::{
    build_effective_hamiltonian, chi_analytic, chi_drive, chi_lambda, chi_vee, dispersive_ratios, generator_residual,
    mechanical_effective_hamiltonian, model_family, path_families, sw_generator, Detunings, DriveDetunings,
    EffectiveOptions, DISPERSIVE_WARN_RATIO, SECULAR_WINDOW_GHZ,
};
use crate::error::Result;
use crate::model::{
    build_collapse_channels, build_static_hamiltonian, lambda_excitation_number, split_hamiltonian, AtomKind,
    AtomSpec, BareLabel, CavitySpec, Level, SystemSpec,
};
use crate::observables::{mean_photon, population, qubit_excitation};
use crate::operator::OperatorMatrix;
use crate::presets::{circuit_spec, lambda_spec, vee_spec, ALL_PRESETS};
use crate::scan::{scan_full, Objective, ScanSettings};

/// Coupling oracle under test; the default is the closed form.
pub type ChiFn = fn(&SystemSpec) -> Result<f64>;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }

    fn bound(name: &str, value: f64, limit: f64) -> Self {
        Self::new(name, value <= limit, format!("{value:.3e} <= {limit:.1e}"))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Fixed-width table, one line per check, followed by the warnings.
    pub fn table(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status}  {:width$}  {}", c.name, c.detail);
        }
        for w in &self.warnings {
            let _ = writeln!(out, "WARN  {w}");
        }
        out
    }
}

pub const ORACLE_TOL: f64 = 0.1;

#[derive(Clone, Copy, Debug)]
pub struct Validator {
    pub chi: ChiFn,
    /// Randomized parameter sets per model family for the generator identity.
    pub random_sets: usize,
    pub seed: u64,
}

impl Default for Validator {
    fn default() -> Self {
        Self { chi: chi_analytic, random_sets: 20, seed: 0x5eed }
    }
}

fn reference_specs() -> [(&'static str, SystemSpec); 3] {
    [
        ("lambda", lambda_spec(8.2, [0.1, 0.15, 0.12])),
        ("vee", vee_spec(8.1, [0.1, 0.15, 0.12])),
        ("delta", circuit_spec()),
    ]
}

fn random_specs(rng: &mut ChaCha8Rng, n: usize) -> Vec<SystemSpec> {
    let mut out = Vec::with_capacity(3 * n);
    for _ in 0..n {
        let mut g = || [rng.random_range(0.01..0.2), rng.random_range(0.01..0.2), rng.random_range(0.01..0.2)];
        let (gl, gv) = (g(), g());
        out.push(lambda_spec(rng.random_range(7.5..8.8), gl));
        out.push(vee_spec(rng.random_range(7.5..8.8), gv));
        let mut c = circuit_spec().with_cavity_frequency(rng.random_range(7.5..8.8));
        for atom in &mut c.atoms {
            for coupling in &mut atom.couplings {
                coupling.g = rng.random_range(0.01..0.2);
            }
        }
        out.push(c);
    }
    out
}

fn label(s: &str) -> BareLabel {
    s.parse().expect("static label")
}

fn failed(name: &str, e: crate::error::Error) -> Check {
    Check::new(name, false, format!("error: {e}"))
}

impl Validator {
    /// Runs the suite; `config` adds its own checks and dispersive warnings.
    pub fn run(&self, config: Option<&SystemSpec>) -> ValidationReport {
        let mut report = ValidationReport::default();
        let checks: [(&str, fn(&Self) -> Result<Check>); 13] = [
            ("hamiltonian hermitian", Self::hermitian),
            ("generator identity", Self::generator_identity),
            ("generator anti-hermitian", Self::generator_anti_hermitian),
            ("lambda excitation conserved", Self::lambda_conservation),
            ("delta excitation not conserved", Self::delta_nonconservation),
            ("chi formula identities", Self::formula_identities),
            ("chi cubic scaling", Self::cubic_scaling),
            ("oracle exact splitting", Self::oracle_splitting),
            ("oracle third-order element", Self::oracle_bch),
            ("propagator group property", Self::propagator_group),
            ("effective two-state flop", Self::effective_flop),
            ("closed-form rabi oscillation", Self::rabi),
            ("cavity decay", Self::cavity_decay),
        ];
        for (name, f) in checks {
            report.checks.push(f(self).unwrap_or_else(|e| failed(name, e)));
        }
        if let Some(spec) = config {
            self.config_checks(spec, &mut report);
        }
        report
    }

    fn config_checks(&self, spec: &SystemSpec, report: &mut ValidationReport) {
        let name = "config hamiltonian hermitian";
        report.checks.push(match build_static_hamiltonian(spec) {
            Ok(h) => Check::new(name, h.is_hermitian(1e-12), format!("dimension {}", h.dim())),
            Err(e) => failed(name, e),
        });
        if model_family(spec).is_ok() {
            let name = "config generator identity";
            let r = split_hamiltonian(spec)
                .and_then(|(h0, hi)| sw_generator(spec).and_then(|x| generator_residual(&h0, &hi, &x)));
            report.checks.push(match r {
                Ok(r) => Check::bound(name, r, 1e-9),
                Err(e) => failed(name, e),
            });
        }
        for r in dispersive_ratios(spec) {
            if r.ratio > DISPERSIVE_WARN_RATIO {
                report.warnings.push(format!(
                    "{}: g/|Delta| = {:.3} exceeds {DISPERSIVE_WARN_RATIO}; dispersive approximation is doubtful",
                    r.label, r.ratio
                ));
            }
        }
    }

    fn hermitian(&self) -> Result<Check> {
        let mut specs: Vec<SystemSpec> = reference_specs().into_iter().map(|(_, s)| s).collect();
        for p in ALL_PRESETS {
            specs.push(p.document().system_spec()?);
        }
        let mut worst: f64 = 0.0;
        for s in &specs {
            let h = build_static_hamiltonian(s)?;
            worst = worst.max(h.sub(&h.dagger())?.max_abs() / h.max_abs());
        }
        Ok(Check::bound("hamiltonian hermitian", worst, 1e-12))
    }

    fn generator_identity(&self) -> Result<Check> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut specs: Vec<SystemSpec> = reference_specs().into_iter().map(|(_, s)| s).collect();
        specs.extend(random_specs(&mut rng, self.random_sets));
        let mut worst: f64 = 0.0;
        for s in &specs {
            let (h0, hi) = split_hamiltonian(s)?;
            worst = worst.max(generator_residual(&h0, &hi, &sw_generator(s)?)?);
        }
        let mut c = Check::bound("generator identity", worst, 1e-9);
        c.detail = format!("{} over {} parameter sets", c.detail, specs.len());
        Ok(c)
    }

    fn generator_anti_hermitian(&self) -> Result<Check> {
        let mut worst: f64 = 0.0;
        for (_, s) in reference_specs() {
            let x = sw_generator(&s)?;
            worst = worst.max(x.add(&x.dagger())?.max_abs());
        }
        Ok(Check::bound("generator anti-hermitian", worst, 1e-14))
    }

    fn commutator_with_lambda_number(spec: &SystemSpec) -> Result<f64> {
        let h = build_static_hamiltonian(spec)?;
        let n = lambda_excitation_number(&spec.layout()?)?;
        Ok(h.commutator(&n)?.frobenius_norm() / h.frobenius_norm())
    }

    fn lambda_conservation(&self) -> Result<Check> {
        let r = Self::commutator_with_lambda_number(&lambda_spec(8.2, [0.1, 0.15, 0.12]))?;
        Ok(Check::bound("lambda excitation conserved", r, 1e-12))
    }

    fn delta_nonconservation(&self) -> Result<Check> {
        let r = Self::commutator_with_lambda_number(&circuit_spec())?;
        Ok(Check::new("delta excitation not conserved", r > 1e-6, format!("||[H,N]||/||H|| = {r:.3e} > 1e-6")))
    }

    fn formula_identities(&self) -> Result<Check> {
        let d = Detunings { delta_p: 1.3, delta_s: -2.1, delta_2: 0.8 };
        let dd = DriveDetunings { delta_d: 1.3, delta_d_prime: -0.7, delta_s: -2.1, delta_2: 0.8 };
        let lambda = chi_lambda(0.11, 0.07, 0.13, &d)?;
        let drive = (chi_drive(0.11, 0.07, 0.13, &dd)? - lambda).abs();
        let vee = (chi_vee(0.11, 0.07, 0.13, &d)? - lambda).abs();
        let spec = circuit_spec();
        let p = path_families(&spec)?[0];
        let single = chi_lambda(p.g_p, p.g_s, p.g_2, &p.detunings)?;
        let circuit = ((self.chi)(&spec)? - 2.0 * single).abs() / single.abs();
        let worst = (drive / lambda.abs()).max(vee / lambda.abs()).max(circuit);
        Ok(Check::bound("chi formula identities", worst, 1e-12))
    }

    fn cubic_scaling(&self) -> Result<Check> {
        let mut worst: f64 = 0.0;
        for (_, spec) in reference_specs() {
            let base = (self.chi)(&spec)?;
            for s in [0.5, 0.8, 1.25] {
                let scaled = (self.chi)(&spec.scale_couplings(s))?;
                let expected = s * s * s * base;
                worst = worst.max((scaled - expected).abs() / expected.abs());
            }
        }
        Ok(Check::bound("chi cubic scaling", worst, 1e-12))
    }

    /// Exact doublet splitting at the resonance against `2 |chi|`.
    fn oracle_splitting(&self) -> Result<Check> {
        let spec = circuit_spec();
        let mut settings = ScanSettings::new(7.95, 7.98, Objective::MinGap, label("1gg"), label("0ee"));
        settings.points = 13;
        let r = scan_full(&spec, &settings)?;
        let chi = (self.chi)(&spec.with_cavity_frequency(r.best.omega))?;
        let rel = (r.best.objective - 2.0 * chi.abs()).abs() / (2.0 * chi.abs());
        let mut c = Check::bound("oracle exact splitting", rel, ORACLE_TOL);
        c.detail = format!("splitting {:.6e} GHz vs 2chi {:.6e} GHz, relative {}", r.best.objective, 2.0 * chi.abs(), c.detail);
        Ok(c)
    }

    /// Mechanical third-order matrix element against the signed closed form.
    fn oracle_bch(&self) -> Result<Check> {
        let mut worst: f64 = 0.0;
        for (_, spec) in reference_specs() {
            let layout = spec.layout()?;
            let h = mechanical_effective_hamiltonian(&spec, SECULAR_WINDOW_GHZ)?;
            let a = layout.index_of(&label("1gg"))?;
            let b = layout.index_of(&label("0ee"))?;
            let elem = h.get(b, a).re / TAU;
            let expected = model_family(&spec)?.coupling_sign() * (self.chi)(&spec)?;
            worst = worst.max((elem - expected).abs() / expected.abs());
        }
        Ok(Check::bound("oracle third-order element", worst, ORACLE_TOL))
    }

    fn propagator_group(&self) -> Result<Check> {
        let h = build_static_hamiltonian(&circuit_spec())?;
        let u1 = propagator_expm(&h, 123.0)?;
        let u2 = propagator_expm(&h, 456.0)?;
        let u12 = propagator_expm(&h, 579.0)?;
        let group = u1.matmul(&u2)?.sub(&u12)?.max_abs();
        let id = OperatorMatrix::identity(h.sig());
        let unitary = u12.matmul(&u12.dagger())?.sub(&id)?.max_abs();
        Ok(Check::bound("propagator group property", group.max(unitary), 1e-10))
    }

    /// Effective model at resonance: complete transfer after half a period.
    fn effective_flop(&self) -> Result<Check> {
        let model = build_effective_hamiltonian(&circuit_spec(), &EffectiveOptions::default())?;
        let model = model.with_cavity_frequency(model.matching_frequency());
        let layout = model.layout().clone();
        let t = PI / (2.0 * TAU * model.chi.abs());
        let psi = apply_propagator(&propagator_expm(&model.hamiltonian(), t)?, &layout.bare_state(&label("1gg"))?)?;
        let p = population(&layout, &label("0ee"))?.expect(&psi)?;
        Ok(Check::bound("effective two-state flop", 1.0 - p, 1e-9))
    }

    /// One-photon vacuum Rabi oscillation against `sin^2(2 pi g t)`.
    fn rabi(&self) -> Result<Check> {
        let g = 1e-3;
        let spec = SystemSpec {
            cavity: CavitySpec { frequency: 5.0, n_max: 1, decay: 0.0 },
            atoms: vec![AtomSpec::new(AtomKind::TwoLevel).with_level(Level::E, 5.0).with_coupling(Level::E, Level::G, g)],
            relaxation: vec![],
        };
        let layout = spec.layout()?;
        let h = build_static_hamiltonian(&spec)?;
        let grid = TimeGrid::new(0.0, 1000.0, 201)?;
        let tr = evolve_schrodinger(
            &h,
            &[],
            &layout.bare_state(&BareLabel::new(1, &[Level::G]))?,
            &grid,
            &[qubit_excitation(&layout, 0)],
            &EvolveOptions::default(),
        )?;
        let worst = tr
            .times
            .iter()
            .zip(&tr.traces[0].values)
            .map(|(t, p)| (p - (TAU * g * t).sin().powi(2)).abs())
            .fold(0.0, f64::max);
        Ok(Check::bound("closed-form rabi oscillation", worst, 1e-6))
    }

    /// Photon decay of an uncoupled cavity against `exp(-kappa t)`.
    fn cavity_decay(&self) -> Result<Check> {
        let kappa = 1e-3;
        let spec = SystemSpec {
            cavity: CavitySpec { frequency: 5.0, n_max: 1, decay: kappa },
            atoms: vec![AtomSpec::new(AtomKind::TwoLevel).with_level(Level::E, 4.0)],
            relaxation: vec![],
        };
        let layout = spec.layout()?;
        let h = build_static_hamiltonian(&spec)?;
        let rho0 = layout.bare_state(&BareLabel::new(1, &[Level::G]))?.to_density();
        let grid = TimeGrid::new(0.0, 500.0, 101)?;
        let tr = evolve_lindblad(
            &h,
            &[],
            &build_collapse_channels(&spec)?,
            &rho0,
            &grid,
            &[mean_photon(&layout)],
            &EvolveOptions::default(),
        )?;
        let worst = tr
            .times
            .iter()
            .zip(&tr.traces[0].values)
            .map(|(t, n)| (n - (-TAU * kappa * t).exp()).abs())
            .fold(0.0, f64::max);
        Ok(Check::bound("cavity decay", worst, 1e-6))
    }
}

/// Suite with the default closed-form oracle.
pub fn validate(config: Option<&SystemSpec>) -> ValidationReport {
    Validator::default().run(config)
}
