//! Resonance search: coarse grid followed by golden-section refinement.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve_schrodinger, EvolveOptions, TimeGrid};
use crate::effective::{chi_analytic, doublet_splitting, drive_params, EffectiveModel};
use crate::error::{Error, Result};
use crate::model::{build_drive_terms, build_static_hamiltonian, BareLabel, SystemSpec};
use crate::observables::population;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Maximum target population over a short trial run (maximized).
    #[default]
    PeakTransfer,
    /// Dressed splitting of the resonant doublet (minimized).
    MinGap,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanParameter {
    #[default]
    CavityFrequency,
    /// Common frequency of every drive.
    DriveFrequency,
}

/// Environment variable capping the number of scan threads.
pub const THREADS_ENV: &str = "SIM_THREADS";

#[derive(Clone, Debug, PartialEq)]
pub struct ScanSettings {
    /// GHz.
    pub lo: f64,
    /// GHz.
    pub hi: f64,
    pub points: usize,
    pub objective: Objective,
    pub parameter: ScanParameter,
    /// Golden-section stopping width, GHz.
    pub resolution: f64,
    /// Trial window of the transfer objective, ns.
    pub window_ns: Option<f64>,
    /// Relative tolerance of the trial runs.
    pub trial_rtol: f64,
    /// Trial sampling interval, ns.
    pub trial_dt: f64,
    pub initial: BareLabel,
    pub target: BareLabel,
}

impl ScanSettings {
    pub fn new(lo: f64, hi: f64, objective: Objective, initial: BareLabel, target: BareLabel) -> Self {
        Self {
            lo,
            hi,
            points: 41,
            objective,
            parameter: ScanParameter::CavityFrequency,
            resolution: 1e-5,
            window_ns: None,
            trial_rtol: 1e-7,
            trial_dt: 0.25,
            initial,
            target,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(Error::Config(format!("scan range [{}, {}] is empty", self.lo, self.hi)));
        }
        if self.points < 3 {
            return Err(Error::Config("scan needs at least 3 grid points".into()));
        }
        if !(self.resolution > 0.0) {
            return Err(Error::Config("scan resolution must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanSample {
    /// GHz.
    pub omega: f64,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    /// Every evaluated point, sorted by frequency.
    pub samples: Vec<ScanSample>,
    pub best: ScanSample,
    pub objective: Objective,
    pub parameter: ScanParameter,
    pub coarse_points: usize,
    /// Best value after the coarse grid and after each refinement step.
    pub refinement: Vec<ScanSample>,
    pub evaluations: usize,
}

fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0) {
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Scan(format!("thread pool: {e}")))
}

/// Grid plus golden-section search of a scalar function. `maximize` selects
/// the direction; values are reported as returned by `f`.
pub fn search<F>(f: F, settings: &ScanSettings, maximize: bool) -> Result<ScanResult>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    settings.validate()?;
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let n = settings.points;
    let grid: Vec<f64> = (0..n)
        .map(|k| if k == n - 1 { settings.hi } else { settings.lo + (settings.hi - settings.lo) * k as f64 / (n - 1) as f64 })
        .collect();
    let values: Vec<f64> = thread_pool()?.install(|| grid.par_iter().map(|&x| f(x)).collect::<Result<Vec<_>>>())?;
    let mut samples: Vec<ScanSample> = grid.iter().zip(&values).map(|(&omega, &objective)| ScanSample { omega, objective }).collect();
    let mut k_best = 0;
    for k in 1..n {
        if better(values[k], values[k_best]) {
            k_best = k;
        }
    }
    if k_best == 0 || k_best == n - 1 {
        return Err(Error::Scan(format!(
            "no bracketing extremum in [{}, {}]: best grid point {} lies on the boundary",
            settings.lo, settings.hi, grid[k_best]
        )));
    }
    let mut best = samples[k_best];
    let mut history = vec![best];

    // Golden section on the bracketing interval.
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (grid[k_best - 1], grid[k_best + 1]);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    samples.push(ScanSample { omega: c, objective: fc });
    samples.push(ScanSample { omega: d, objective: fd });
    for s in [ScanSample { omega: c, objective: fc }, ScanSample { omega: d, objective: fd }] {
        if better(s.objective, best.objective) {
            best = s;
        }
    }
    history.push(best);
    while b - a > settings.resolution {
        if better(fc, fd) || fc == fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
            samples.push(ScanSample { omega: c, objective: fc });
            if better(fc, best.objective) {
                best = ScanSample { omega: c, objective: fc };
            }
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
            samples.push(ScanSample { omega: d, objective: fd });
            if better(fd, best.objective) {
                best = ScanSample { omega: d, objective: fd };
            }
        }
        history.push(best);
    }
    samples.sort_by(|x, y| x.omega.total_cmp(&y.omega));
    let evaluations = samples.len();
    Ok(ScanResult {
        samples,
        best,
        objective: settings.objective,
        parameter: settings.parameter,
        coarse_points: n,
        refinement: history,
        evaluations,
    })
}

/// `spec` with the scanned parameter set to `x`.
pub fn apply_parameter(spec: &SystemSpec, parameter: ScanParameter, x: f64) -> SystemSpec {
    match parameter {
        ScanParameter::CavityFrequency => spec.with_cavity_frequency(x),
        ScanParameter::DriveFrequency => spec.with_drive_frequency(x),
    }
}

/// Trial window `1.5 pi / |chi|` from the closed-form coupling.
fn default_window(spec: &SystemSpec) -> Result<f64> {
    let chi = if spec.has_drives() { drive_params(spec)?.chi_d } else { chi_analytic(spec)? };
    if chi == 0.0 {
        return Err(Error::Scan("coupling vanishes; no trial window".into()));
    }
    Ok(1.5 * PI / (TAU * chi.abs()))
}

/// Maximum target population over `[0, window]` of the full model.
pub fn peak_transfer(spec: &SystemSpec, settings: &ScanSettings, window: f64) -> Result<f64> {
    let layout = spec.layout()?;
    let h = build_static_hamiltonian(spec)?;
    let drives = build_drive_terms(spec)?;
    let psi0 = layout.bare_state(&settings.initial)?;
    let obs = [population(&layout, &settings.target)?];
    let samples = ((window / settings.trial_dt).ceil() as usize).max(2) + 1;
    let grid = TimeGrid::new(0.0, window, samples)?;
    let opts = EvolveOptions::trial(settings.trial_rtol);
    let tr = evolve_schrodinger(&h, &drives, &psi0, &grid, &obs, &opts)?;
    Ok(tr.traces[0].values.iter().copied().fold(0.0, f64::max))
}

/// Dressed splitting of the resonant doublet of the full model, GHz.
pub fn min_gap(spec: &SystemSpec, settings: &ScanSettings) -> Result<f64> {
    if spec.has_drives() {
        return Err(Error::Scan("the gap objective needs a time-independent Hamiltonian".into()));
    }
    let layout = spec.layout()?;
    let h = build_static_hamiltonian(spec)?;
    Ok(doublet_splitting(&h, &layout, &settings.initial, &settings.target)?.0 / TAU)
}

/// Scans the full model.
pub fn scan_full(spec: &SystemSpec, settings: &ScanSettings) -> Result<ScanResult> {
    spec.validate()?;
    if settings.parameter == ScanParameter::DriveFrequency && !spec.has_drives() {
        return Err(Error::Scan("drive-frequency scan of an undriven system".into()));
    }
    match settings.objective {
        Objective::PeakTransfer => {
            let window = match settings.window_ns {
                Some(w) => w,
                None => default_window(spec)?,
            };
            search(|x| peak_transfer(&apply_parameter(spec, settings.parameter, x), settings, window), settings, true)
        }
        Objective::MinGap => search(|x| min_gap(&apply_parameter(spec, settings.parameter, x), settings), settings, false),
    }
}

/// Scans the cavity frequency of the qubit-reduced effective model.
pub fn scan_effective(model: &EffectiveModel, settings: &ScanSettings) -> Result<ScanResult> {
    if model.pump_phase.is_some() || settings.parameter != ScanParameter::CavityFrequency {
        return Err(Error::Scan("effective scans vary the cavity frequency of an undriven model".into()));
    }
    let layout = model.layout().clone();
    match settings.objective {
        Objective::PeakTransfer => {
            let window = match settings.window_ns {
                Some(w) => w,
                None if model.chi != 0.0 => 1.5 * PI / (TAU * model.chi.abs()),
                None => return Err(Error::Scan("coupling vanishes; no trial window".into())),
            };
            let psi0 = layout.bare_state(&settings.initial)?;
            let obs = [population(&layout, &settings.target)?];
            let samples = ((window / settings.trial_dt).ceil() as usize).max(2) + 1;
            let grid = TimeGrid::new(0.0, window, samples)?;
            let opts = EvolveOptions::trial(settings.trial_rtol);
            search(
                |x| {
                    let h = model.with_cavity_frequency(x).hamiltonian();
                    let tr = evolve_schrodinger(&h, &[], &psi0, &grid, &obs, &opts)?;
                    Ok(tr.traces[0].values.iter().copied().fold(0.0, f64::max))
                },
                settings,
                true,
            )
        }
        Objective::MinGap => search(
            |x| {
                let h = model.with_cavity_frequency(x).hamiltonian();
                Ok(doublet_splitting(&h, &layout, &settings.initial, &settings.target)?.0 / TAU)
            },
            settings,
            false,
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::effective::{build_effective_hamiltonian, EffectiveOptions};
    use crate::presets;

    fn labels() -> (BareLabel, BareLabel) {
        ("1gg".parse().unwrap(), "0ee".parse().unwrap())
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (i, t) = labels();
        let s = ScanSettings::new(0.0, 1.0, Objective::MinGap, i, t);
        let r = search(|x| Ok((x - 0.3141).powi(2)), &s, false).unwrap();
        assert!((r.best.omega - 0.3141).abs() < 1e-5);
        assert!(r.refinement.windows(2).all(|w| w[1].objective <= w[0].objective));
        assert!(r.samples.windows(2).all(|w| w[0].omega <= w[1].omega));
    }

    #[test]
    fn boundary_extremum_is_an_error() {
        let (i, t) = labels();
        let s = ScanSettings::new(0.0, 1.0, Objective::MinGap, i, t);
        assert!(matches!(search(|x| Ok(x), &s, false), Err(Error::Scan(_))));
    }

    #[test]
    fn effective_scan_optimum_is_frequency_sum() {
        let spec = presets::circuit_spec();
        let model = build_effective_hamiltonian(&spec, &EffectiveOptions::default()).unwrap();
        let (i, t) = labels();
        let s = ScanSettings::new(7.9, 8.1, Objective::MinGap, i, t);
        let r = scan_effective(&model, &s).unwrap();
        assert_eq!(r.best.omega, 8.0);
        let gap = r.best.objective;
        assert!((gap - 2.0 * model.chi.abs()).abs() < 1e-12);
    }

    #[test]
    fn min_gap_scan_is_deterministic() {
        let spec = presets::circuit_spec();
        let (i, t) = labels();
        let mut s = ScanSettings::new(7.95, 7.98, Objective::MinGap, i, t);
        s.points = 13;
        let a = scan_full(&spec, &s).unwrap();
        let b = scan_full(&spec, &s).unwrap();
        assert_eq!(a, b);
        assert!((a.best.omega - 7.9655).abs() < 0.005, "{}", a.best.omega);
    }
}
