//! Unitary and Lindblad time evolution with harmonic drive terms.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::integrate::{integrate, SolverOptions, SolverStats};
use crate::model::{CollapseChannel, DriveTerm};
use crate::observables::Observable;
use crate::operator::{eig_herm, DimSignature, OperatorMatrix, QuantumState, C64, I, ONE, ZERO};
use crate::sparse::{CsrMatrix, RotatingCsr};

/// Largest tolerated deviation of the norm (kets) or trace (density matrices).
pub const NORM_DRIFT_TOL: f64 = 1e-8;
/// Most negative tolerated density-matrix eigenvalue.
pub const POSITIVITY_TOL: f64 = 1e-8;
/// Top Fock-level population above which a run is flagged as truncation-limited.
pub const TOP_FOCK_TOL: f64 = 1e-6;

/// Output sampling grid, ns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_samples: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_samples: usize) -> Result<Self> {
        if !(t_end > t_start) || !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::Config(format!("time grid needs t_end > t_start, got [{t_start}, {t_end}]")));
        }
        if n_samples < 2 {
            return Err(Error::Config("time grid needs at least 2 samples".into()));
        }
        Ok(Self { t_start, t_end, n_samples })
    }

    pub fn times(&self) -> Vec<f64> {
        let n = self.n_samples - 1;
        let span = self.t_end - self.t_start;
        (0..=n).map(|k| if k == n { self.t_end } else { self.t_start + span * k as f64 / n as f64 }).collect()
    }

    pub fn spacing(&self) -> f64 {
        (self.t_end - self.t_start) / (self.n_samples - 1) as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub name: String,
    pub values: Vec<f64>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    /// Largest `|norm - 1|` (kets) or `|tr rho - 1|` over the samples.
    pub max_norm_drift: f64,
    /// Smallest density-matrix eigenvalue over the samples (zero for kets).
    pub min_eigenvalue: f64,
    pub max_top_fock_population: f64,
    /// Top Fock population exceeded the truncation tolerance.
    pub truncation_flag: bool,
}

/// Sampled observables of one evolution.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub traces: Vec<Trace>,
    pub final_state: QuantumState,
    /// Full states at every sample when requested.
    pub states: Option<Vec<QuantumState>>,
    pub stats: SolverStats,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn trace(&self, name: &str) -> Option<&[f64]> {
        self.traces.iter().find(|t| t.name == name).map(|t| t.values.as_slice())
    }

    pub fn names(&self) -> Vec<&str> {
        self.traces.iter().map(|t| t.name.as_str()).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    pub solver: SolverOptions,
    /// Store the state at every sample.
    pub keep_states: bool,
    /// Norm (kets) or trace (density matrices) drift that aborts the run.
    pub norm_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self::new(SolverOptions::default())
    }
}

impl EvolveOptions {
    pub fn new(solver: SolverOptions) -> Self {
        Self { solver, keep_states: false, norm_tol: NORM_DRIFT_TOL }
    }

    /// Loose-tolerance trial runs: the drift limit follows the solver.
    pub fn trial(rtol: f64) -> Self {
        Self { norm_tol: NORM_DRIFT_TOL.max(1e3 * rtol), ..Self::new(SolverOptions::with_tolerances(rtol, rtol * 1e-3)) }
    }
}

/// `H` split into its real diagonal and a sparse off-diagonal remainder.
/// The diagonal is applied elementwise, which keeps the sparse products small.
fn split_diagonal(h: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let energies: Vec<f64> = (0..h.nrows()).map(|k| h[(k, k)].re).collect();
    let mut off = h.clone();
    for k in 0..off.nrows() {
        off[(k, k)] = ZERO;
    }
    (energies, off)
}

/// Frame of the integration. States are carried as `P psi` with
/// `P = diag(e^{i s_k (t - t0)})`. A uniform `s` is a global phase, which
/// keeps the resonant pair of an undriven run nearly static; `s = diag(H)` is
/// the interaction picture, in which a resonant drive becomes a slow
/// coupling and the integrator does not have to follow optical phases.
struct Frame {
    shift: Vec<f64>,
    rotating: bool,
    t0: f64,
    phases: Vec<C64>,
}

impl Frame {
    fn uniform(n: usize, e_ref: f64, t0: f64) -> Self {
        Self { shift: vec![e_ref; n], rotating: false, t0, phases: vec![ONE; n] }
    }

    fn interaction(energies: &[f64], t0: f64) -> Self {
        Self { shift: energies.to_vec(), rotating: true, t0, phases: vec![ONE; energies.len()] }
    }

    fn set_time(&mut self, t: f64) {
        if self.rotating {
            let tau = t - self.t0;
            for (p, &e) in self.phases.iter_mut().zip(&self.shift) {
                *p = C64::from_polar(1.0, e * tau);
            }
        }
    }

    /// Refreshes a frame-rotated operator at the current time.
    fn rotate(&self, op: &mut RotatingCsr, factor: C64) {
        if self.rotating {
            op.update(&self.phases, factor);
        } else {
            op.update_static(factor);
        }
    }

    fn ket_to_lab(&self, t: f64, y: &[C64]) -> DVector<C64> {
        let tau = t - self.t0;
        DVector::from_iterator(y.len(), y.iter().zip(&self.shift).map(|(z, &s)| z * C64::from_polar(1.0, -s * tau)))
    }

    fn density_to_lab(&self, t: f64, rho: DMatrix<C64>) -> DMatrix<C64> {
        if !self.rotating {
            return rho;
        }
        let tau = t - self.t0;
        let n = rho.nrows();
        DMatrix::from_fn(n, n, |r, c| rho[(r, c)] * C64::from_polar(1.0, -(self.shift[r] - self.shift[c]) * tau))
    }
}

/// True when every nonzero `L_qa` connects levels with the same energy
/// difference, so `L rho L†` is invariant under the interaction picture.
fn single_bohr_frequency(l: &DMatrix<C64>, energies: &[f64]) -> bool {
    let scale = energies.iter().fold(1.0f64, |m, e| m.max(e.abs()));
    let mut freq: Option<f64> = None;
    for q in 0..l.nrows() {
        for a in 0..l.ncols() {
            if l[(q, a)] != ZERO {
                let w = energies[q] - energies[a];
                match freq {
                    None => freq = Some(w),
                    Some(f) if (f - w).abs() > 1e-9 * scale => return false,
                    _ => {}
                }
            }
        }
    }
    true
}

struct SparseDrive {
    op: RotatingCsr,
    op_dag: RotatingCsr,
    omega: f64,
    phase: f64,
}

impl SparseDrive {
    fn refresh(&mut self, t: f64, frame: &Frame) {
        let c = C64::from_polar(1.0, -(self.omega * t + self.phase));
        frame.rotate(&mut self.op, c);
        frame.rotate(&mut self.op_dag, c.conj());
    }
}

fn sparse_drives(drives: &[DriveTerm], sig: &DimSignature) -> Result<Vec<SparseDrive>> {
    drives
        .iter()
        .map(|d| {
            if d.op.sig() != sig {
                return Err(Error::SignatureMismatch { left: d.op.sig().dims().to_vec(), right: sig.dims().to_vec() });
            }
            Ok(SparseDrive {
                op: RotatingCsr::new(CsrMatrix::from_operator(&d.op)),
                op_dag: RotatingCsr::new(CsrMatrix::from_operator(&d.op.dagger())),
                omega: d.omega,
                phase: d.phase,
            })
        })
        .collect()
}

fn top_fock_diag(sig: &DimSignature) -> Vec<f64> {
    let top = sig.dims()[0] - 1;
    (0..sig.total()).map(|k| if sig.labels_of(k)[0] == top { 1.0 } else { 0.0 }).collect()
}

struct Recorder<'a> {
    observables: &'a [Observable],
    values: Vec<Vec<f64>>,
    top: Vec<f64>,
    diag: Diagnostics,
}

impl<'a> Recorder<'a> {
    fn new(observables: &'a [Observable], sig: &DimSignature, n: usize) -> Result<Self> {
        for o in observables {
            if o.diagonal().len() != sig.total() {
                return Err(Error::DimensionMismatch { expected: sig.total(), found: o.diagonal().len() });
            }
        }
        Ok(Self {
            observables,
            values: vec![Vec::with_capacity(n); observables.len()],
            top: top_fock_diag(sig),
            diag: Diagnostics::default(),
        })
    }

    fn record(&mut self, pops: &[f64]) {
        for (o, v) in self.observables.iter().zip(&mut self.values) {
            v.push(o.from_populations(pops));
        }
        let top: f64 = self.top.iter().zip(pops).map(|(a, b)| a * b).sum();
        self.diag.max_top_fock_population = self.diag.max_top_fock_population.max(top);
    }

    fn finish(mut self) -> (Vec<Trace>, Diagnostics) {
        self.diag.truncation_flag = self.diag.max_top_fock_population > TOP_FOCK_TOL;
        let traces = self
            .observables
            .iter()
            .zip(self.values)
            .map(|(o, values)| Trace { name: o.name().to_string(), values })
            .collect();
        (traces, self.diag)
    }
}

fn check_hamiltonian(h: &OperatorMatrix, sig: &DimSignature) -> Result<()> {
    if h.sig() != sig {
        return Err(Error::SignatureMismatch { left: h.sig().dims().to_vec(), right: sig.dims().to_vec() });
    }
    if !h.is_hermitian(1e-12) {
        return Err(Error::NotHermitian);
    }
    Ok(())
}

/// Integrates `i dpsi/dt = (H + sum_k A_k e^{-i(w_k t + phi_k)} + h.c.) psi`.
///
/// Undriven runs shift `H` by `Re <psi0|H|psi0>`; driven runs integrate in
/// the interaction picture of `diag(H)`. Returned states are lab-frame.
pub fn evolve_schrodinger(
    h: &OperatorMatrix,
    drives: &[DriveTerm],
    psi0: &QuantumState,
    grid: &TimeGrid,
    observables: &[Observable],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let QuantumState::Ket { sig, data: psi } = psi0 else {
        return Err(Error::InvalidState("Schrodinger evolution needs a ket".into()));
    };
    check_hamiltonian(h, sig)?;
    let n = sig.total();
    let (energies, off) = split_diagonal(h.data());
    let mut frame = if drives.is_empty() {
        Frame::uniform(n, psi.dotc(&(h.data() * psi)).re, grid.t_start)
    } else {
        Frame::interaction(&energies, grid.t_start)
    };
    let residual: Vec<f64> = energies.iter().zip(&frame.shift).map(|(e, s)| e - s).collect();
    let mut coupling = RotatingCsr::new(CsrMatrix::from_dense(&off));
    let mut sd = sparse_drives(drives, sig)?;
    let lab = Frame { shift: frame.shift.clone(), rotating: frame.rotating, t0: frame.t0, phases: Vec::new() };
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        for ((d, z), &e) in dy.iter_mut().zip(y).zip(&residual) {
            *d = z * C64::new(0.0, -e);
        }
        if frame.rotating {
            frame.set_time(t);
            frame.rotate(&mut coupling, ONE);
        }
        coupling.current().mul_vec_acc(-I, y, dy);
        for d in &mut sd {
            d.refresh(t, &frame);
            d.op.current().mul_vec_acc(-I, y, dy);
            d.op_dag.current().mul_vec_acc(-I, y, dy);
        }
    };

    let times = grid.times();
    let mut rec = Recorder::new(observables, sig, times.len())?;
    let mut states = opts.keep_states.then(|| Vec::with_capacity(times.len()));
    let mut y: Vec<C64> = psi.iter().copied().collect();
    let stats = integrate(rhs, grid.t_start, &mut y, &times, &opts.solver, |_, t, y| {
        let pops: Vec<f64> = y.iter().map(|z| z.norm_sqr()).collect();
        let norm2: f64 = pops.iter().sum();
        let drift = (norm2.sqrt() - 1.0).abs();
        rec.diag.max_norm_drift = rec.diag.max_norm_drift.max(drift);
        if drift > opts.norm_tol {
            return Err(Error::Integration { t, reason: format!("norm drift {drift:e} exceeds {:e}", opts.norm_tol) });
        }
        rec.record(&pops);
        if let Some(s) = states.as_mut() {
            s.push(QuantumState::Ket { sig: sig.clone(), data: lab.ket_to_lab(t, y) });
        }
        Ok(())
    })?;
    let final_state = QuantumState::Ket { sig: sig.clone(), data: lab.ket_to_lab(grid.t_end, &y) };
    let (traces, diagnostics) = rec.finish();
    Ok(Trajectory { times, traces, final_state, states, stats, diagnostics })
}

/// Integrates the Lindblad master equation
/// `drho/dt = -i[H(t), rho] + sum_k gamma_k (L rho L† - {L†L, rho}/2)`.
/// Kets are promoted to density matrices.
///
/// With `H_eff = H - (i/2) sum gamma L†L` the right-hand side is
/// `-i H_eff rho + h.c. + sum gamma L rho L†`. The Hamiltonian part is a
/// sparse-times-dense product with the diagonal of `H` applied elementwise;
/// the jump part is a sparse superoperator assembled once per run. The
/// interaction picture of `diag(H)` is used when every jump operator has a
/// single Bohr frequency, and the lab frame otherwise. Coherences then vary
/// at coupling rates rather than at optical ones, which keeps the zero
/// eigenvalues of a pure state well inside the positivity tolerance.
pub fn evolve_lindblad(
    h: &OperatorMatrix,
    drives: &[DriveTerm],
    channels: &[CollapseChannel],
    rho0: &QuantumState,
    grid: &TimeGrid,
    observables: &[Observable],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let sig = rho0.sig().clone();
    check_hamiltonian(h, &sig)?;
    let n = sig.total();
    let rho = rho0.density_matrix();

    let (energies, mut h_eff) = split_diagonal(h.data());
    let mut jumps = Vec::with_capacity(channels.len());
    let mut frame_invariant = true;
    for ch in channels {
        if ch.op.sig() != &sig {
            return Err(Error::SignatureMismatch { left: ch.op.sig().dims().to_vec(), right: sig.dims().to_vec() });
        }
        if !(ch.rate >= 0.0) {
            return Err(Error::InvalidSpec("collapse rates must be >= 0".into()));
        }
        let l = ch.op.data();
        h_eff -= (l.adjoint() * l) * C64::new(0.0, 0.5 * ch.rate);
        if ch.rate > 0.0 {
            frame_invariant &= single_bohr_frequency(l, &energies);
            jumps.push((CsrMatrix::from_dense(l), ch.rate));
        }
    }
    let mut frame = if frame_invariant {
        Frame::interaction(&energies, grid.t_start)
    } else {
        Frame::uniform(n, 0.0, grid.t_start)
    };
    let residual: Vec<f64> = energies.iter().zip(&frame.shift).map(|(e, s)| e - s).collect();
    let mut he = RotatingCsr::new(CsrMatrix::from_dense(&h_eff));
    let jump_super = CsrMatrix::jump_superoperator(&jumps);
    let mut sd = sparse_drives(drives, &sig)?;
    let lab = Frame { shift: frame.shift.clone(), rotating: frame.rotating, t0: frame.t0, phases: Vec::new() };
    let mut m = vec![ZERO; n * n];
    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        if frame.rotating {
            frame.set_time(t);
            frame.rotate(&mut he, ONE);
        }
        m.fill(ZERO);
        he.current().mul_mat_acc(ONE, y, &mut m);
        for d in &mut sd {
            d.refresh(t, &frame);
            d.op.current().mul_mat_acc(ONE, y, &mut m);
            d.op_dag.current().mul_mat_acc(ONE, y, &mut m);
        }
        // column-major: element (r, c) at c * n + r
        for c in 0..n {
            for r in 0..n {
                let k = c * n + r;
                let z = m[k] - m[r * n + c].conj() + y[k] * (residual[r] - residual[c]);
                dy[k] = C64::new(z.im, -z.re);
            }
        }
        if !jumps.is_empty() {
            jump_super.mul_vec_acc(ONE, y, dy);
        }
    };

    let times = grid.times();
    let mut rec = Recorder::new(observables, &sig, times.len())?;
    rec.diag.min_eigenvalue = f64::INFINITY;
    let mut states = opts.keep_states.then(|| Vec::with_capacity(times.len()));
    let mut y: Vec<C64> = rho.as_slice().to_vec();
    let stats = integrate(rhs, grid.t_start, &mut y, &times, &opts.solver, |_, t, y| {
        let raw = DMatrix::from_column_slice(n, n, y);
        let repaired = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
        let tr = repaired.trace().re;
        let drift = (tr - 1.0).abs();
        rec.diag.max_norm_drift = rec.diag.max_norm_drift.max(drift);
        if drift > opts.norm_tol {
            return Err(Error::Integration { t, reason: format!("trace drift {drift:e} exceeds {:e}", opts.norm_tol) });
        }
        // the frame change is unitary, so the spectrum is frame independent
        let op = OperatorMatrix::new(sig.clone(), repaired)?;
        let (evals, _) = eig_herm(&op)?;
        rec.diag.min_eigenvalue = rec.diag.min_eigenvalue.min(evals[0]);
        if evals[0] < -POSITIVITY_TOL {
            return Err(Error::Integration { t, reason: format!("negative eigenvalue {:e}", evals[0]) });
        }
        let pops: Vec<f64> = (0..n).map(|k| op.data()[(k, k)].re).collect();
        rec.record(&pops);
        if let Some(s) = states.as_mut() {
            s.push(QuantumState::Density { sig: sig.clone(), data: lab.density_to_lab(t, op.into_data()) });
        }
        Ok(())
    })?;
    let raw = DMatrix::from_column_slice(n, n, &y);
    let repaired = (&raw + raw.adjoint()) * C64::new(0.5, 0.0);
    let final_state = QuantumState::Density { sig: sig.clone(), data: lab.density_to_lab(grid.t_end, repaired) };
    let (traces, diagnostics) = rec.finish();
    Ok(Trajectory { times, traces, final_state, states, stats, diagnostics })
}

/// `U = exp(-i H t)` from the eigendecomposition of a time-independent `H`.
pub fn propagator_expm(h: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    let (vals, vecs) = eig_herm(h)?;
    let phases = DMatrix::from_diagonal(&DVector::from_iterator(vals.len(), vals.iter().map(|&e| C64::from_polar(1.0, -e * t))));
    OperatorMatrix::new(h.sig().clone(), &vecs * phases * vecs.adjoint())
}

/// Applies `U` to a ket or conjugates a density matrix.
pub fn apply_propagator(u: &OperatorMatrix, state: &QuantumState) -> Result<QuantumState> {
    if u.sig() != state.sig() {
        return Err(Error::SignatureMismatch { left: u.sig().dims().to_vec(), right: state.sig().dims().to_vec() });
    }
    Ok(match state {
        QuantumState::Ket { sig, data } => QuantumState::Ket { sig: sig.clone(), data: u.data() * data },
        QuantumState::Density { sig, data } => {
            QuantumState::Density { sig: sig.clone(), data: u.data() * data * u.data().adjoint() }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AtomKind, AtomSpec, CavitySpec, Level, SystemSpec};
    use crate::observables::{mean_photon, population, state_fidelity};
    use crate::operator::{destroy, transition};
    use std::f64::consts::TAU;

    fn rabi_spec(g: f64) -> SystemSpec {
        SystemSpec {
            cavity: CavitySpec { frequency: 5.0, n_max: 1, decay: 0.0 },
            atoms: vec![AtomSpec::new(AtomKind::TwoLevel).with_level(Level::E, 5.0).with_coupling(Level::E, Level::G, g)],
            relaxation: vec![],
        }
    }

    #[test]
    fn grid_times() {
        let g = TimeGrid::new(0.0, 1.0, 5).unwrap();
        assert_eq!(g.times(), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert!(TimeGrid::new(1.0, 1.0, 5).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
    }

    #[test]
    fn zero_hamiltonian_keeps_state() {
        let sig = DimSignature::new(vec![3]).unwrap();
        let h = OperatorMatrix::zeros(&sig);
        let psi = QuantumState::ket_normalized(sig.clone(), DVector::from_vec(vec![ONE, I, ONE])).unwrap();
        let grid = TimeGrid::new(0.0, 100.0, 11).unwrap();
        let tr = evolve_schrodinger(&h, &[], &psi, &grid, &[], &EvolveOptions::default()).unwrap();
        assert_eq!(tr.final_state, psi);
    }

    #[test]
    fn vacuum_rabi_closed_form() {
        // Resonant one-excitation exchange: P_e(t) = sin^2(2 pi g t), period 500 ns at g = 1 MHz.
        let spec = rabi_spec(1e-3);
        let h = crate::model::build_static_hamiltonian(&spec).unwrap();
        let layout = spec.layout().unwrap();
        let psi0 = layout.bare_state(&"1g".parse().unwrap()).unwrap();
        let pe = population(&layout, &"0e".parse().unwrap()).unwrap();
        let grid = TimeGrid::new(0.0, 1000.0, 201).unwrap();
        let tr = evolve_schrodinger(&h, &[], &psi0, &grid, &[pe], &EvolveOptions::default()).unwrap();
        for (t, p) in tr.times.iter().zip(tr.trace("pop_0e").unwrap()) {
            assert!((p - (TAU * 1e-3 * t).sin().powi(2)).abs() < 1e-8);
        }
        assert!(tr.diagnostics.max_norm_drift < 1e-8);
    }

    #[test]
    fn cavity_decay_is_exponential() {
        let sig = DimSignature::new(vec![3]).unwrap();
        let a = destroy(2);
        let h = a.dagger().matmul(&a).unwrap().scale_real(TAU * 5.0);
        let kappa = 0.01;
        let rho0 = QuantumState::Density {
            sig: sig.clone(),
            data: DMatrix::from_fn(3, 3, |r, c| if r == 1 && c == 1 { ONE } else { ZERO }),
        };
        let layout = crate::model::HilbertLayout::new(2, vec![]).unwrap();
        let grid = TimeGrid::new(0.0, 200.0, 41).unwrap();
        let ch = [CollapseChannel { op: a, rate: kappa }];
        let tr = evolve_lindblad(&h, &[], &ch, &rho0, &grid, &[mean_photon(&layout)], &EvolveOptions::default()).unwrap();
        for (t, n) in tr.times.iter().zip(tr.trace("n_cav").unwrap()) {
            assert!((n - (-kappa * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn lindblad_without_channels_matches_schrodinger() {
        let spec = rabi_spec(2e-3);
        let h = crate::model::build_static_hamiltonian(&spec).unwrap();
        let layout = spec.layout().unwrap();
        let psi0 = layout.bare_state(&"1g".parse().unwrap()).unwrap();
        let grid = TimeGrid::new(0.0, 300.0, 31).unwrap();
        let opts = EvolveOptions { keep_states: true, ..EvolveOptions::default() };
        let a = evolve_schrodinger(&h, &[], &psi0, &grid, &[], &opts).unwrap();
        let b = evolve_lindblad(&h, &[], &[], &psi0, &grid, &[], &opts).unwrap();
        for (x, y) in a.states.unwrap().iter().zip(b.states.unwrap().iter()) {
            assert!(state_fidelity(y, x).unwrap() >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn inert_drive_leaves_trajectory_unchanged() {
        let spec = rabi_spec(1e-3);
        let h = crate::model::build_static_hamiltonian(&spec).unwrap();
        let layout = spec.layout().unwrap();
        let psi0 = layout.bare_state(&"1g".parse().unwrap()).unwrap();
        let grid = TimeGrid::new(0.0, 100.0, 11).unwrap();
        let obs = [population(&layout, &"0e".parse().unwrap()).unwrap()];
        let plain = evolve_schrodinger(&h, &[], &psi0, &grid, &obs, &EvolveOptions::default()).unwrap();
        let sp = transition(2, 1, 0).unwrap().embed(1, layout.sig()).unwrap().scale_real(0.0);
        let drive = [DriveTerm { op: sp, omega: TAU * 5.0, phase: 0.0 }];
        let driven = evolve_schrodinger(&h, &drive, &psi0, &grid, &obs, &EvolveOptions::default()).unwrap();
        for (a, b) in plain.trace("pop_0e").unwrap().iter().zip(driven.trace("pop_0e").unwrap()) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn driven_two_level_resonance() {
        // Resonant drive eps (|e><g| e^{-i w t} + h.c.) gives P_e = sin^2(eps t).
        let sig = DimSignature::new(vec![1, 2]).unwrap();
        let w = TAU * 4.0;
        let h = OperatorMatrix::from_diagonal(&sig, &[0.0, w]).unwrap();
        let eps = TAU * 2e-3;
        let op = transition(2, 1, 0).unwrap().embed(1, &sig).unwrap().scale_real(eps);
        let psi0 = QuantumState::ket(sig.clone(), DVector::from_vec(vec![ONE, ZERO])).unwrap();
        let layout = crate::model::HilbertLayout::new(0, vec![vec![Level::G, Level::E]]).unwrap();
        let obs = [population(&layout, &"0e".parse().unwrap()).unwrap()];
        let grid = TimeGrid::new(0.0, 100.0, 21).unwrap();
        let tr = evolve_schrodinger(&h, &[DriveTerm { op, omega: w, phase: 0.3 }], &psi0, &grid, &obs, &EvolveOptions::default())
            .unwrap();
        for (t, p) in tr.times.iter().zip(tr.trace("pop_0e").unwrap()) {
            // counter-rotating terms are absent, so this is exact
            assert!((p - (eps * t).sin().powi(2)).abs() < 1e-7, "{t} {p}");
        }
    }

    #[test]
    fn driven_lindblad_matches_schrodinger_with_phases() {
        let sig = DimSignature::new(vec![1, 2]).unwrap();
        let w = TAU * 4.0;
        let h = OperatorMatrix::from_diagonal(&sig, &[0.0, w]).unwrap();
        let op = transition(2, 1, 0).unwrap().embed(1, &sig).unwrap().scale_real(TAU * 3e-3);
        let drives = [DriveTerm { op, omega: w + TAU * 1e-3, phase: -0.4 }];
        let psi0 = QuantumState::ket_normalized(sig.clone(), DVector::from_vec(vec![ONE, C64::new(0.2, 0.5)])).unwrap();
        let grid = TimeGrid::new(0.0, 60.0, 13).unwrap();
        let mut opts = EvolveOptions::default();
        opts.keep_states = true;
        let a = evolve_schrodinger(&h, &drives, &psi0, &grid, &[], &opts).unwrap();
        let b = evolve_lindblad(&h, &drives, &[], &psi0, &grid, &[], &opts).unwrap();
        for (x, y) in a.states.unwrap().iter().zip(b.states.unwrap().iter()) {
            assert!(state_fidelity(y, x).unwrap() > 1.0 - 1e-9);
        }
        assert!(state_fidelity(&b.final_state, &a.final_state).unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn propagator_group_property_and_identity() {
        let spec = rabi_spec(0.05);
        let h = crate::model::build_static_hamiltonian(&spec).unwrap();
        let u0 = propagator_expm(&h, 0.0).unwrap();
        assert!(u0.sub(&OperatorMatrix::identity(h.sig())).unwrap().max_abs() < 1e-12);
        let u1 = propagator_expm(&h, 3.7).unwrap();
        let u2 = propagator_expm(&h, 1.9).unwrap();
        let u12 = propagator_expm(&h, 5.6).unwrap();
        assert!(u1.matmul(&u2).unwrap().sub(&u12).unwrap().max_abs() < 1e-10);
        let unit = u1.matmul(&u1.dagger()).unwrap().sub(&OperatorMatrix::identity(h.sig())).unwrap();
        assert!(unit.max_abs() < 1e-10);
    }
}
