//! Dispersive effective theory: closed-form couplings and frequency shifts,
//! the Schrieffer-Wolff generator, and a mechanical third-order expansion
//! used to cross-check the closed forms.
//!
//! Closed-form quantities are returned in linear GHz like the configuration;
//! operators are in rad/ns like the rest of the crate.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{split_hamiltonian, AtomKind, AtomSpec, BareLabel, HilbertLayout, Level, SystemSpec};
use crate::operator::{eig_herm, OperatorMatrix, C64};

/// Relative residual accepted for `[H0, X] = -H_I`.
pub const GENERATOR_TOL: f64 = 1e-9;
/// Default secular window for the post-expansion RWA projection, GHz.
pub const SECULAR_WINDOW_GHZ: f64 = 0.05;
/// Ratio `g / |Delta|` above which a dispersive warning is raised.
pub const DISPERSIVE_WARN_RATIO: f64 = 0.25;

/// Cavity detunings of one Raman path family, GHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Detunings {
    pub delta_p: f64,
    pub delta_s: f64,
    pub delta_2: f64,
}

/// Detunings entering the classically driven coupling, GHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DriveDetunings {
    pub delta_d: f64,
    pub delta_d_prime: f64,
    pub delta_s: f64,
    pub delta_2: f64,
}

fn nonzero(value: f64, name: &str) -> Result<f64> {
    if value == 0.0 || !value.is_finite() {
        Err(Error::Singular(name.to_string()))
    } else {
        Ok(value)
    }
}

fn raman_chi(g_p: f64, g_s: f64, g_2: f64, d_p: f64, d_s: f64, d_2: f64) -> f64 {
    g_s * g_2 / 3.0 * (1.0 / d_s + 1.0 / d_2) * (g_p / d_p) + g_p * g_s / 3.0 * (1.0 / d_p + 1.0 / d_s) * (g_2 / d_2)
}

/// Third-order one-photon two-atom coupling of the Lambda plus two-level model.
pub fn chi_lambda(g_p: f64, g_s: f64, g_2: f64, d: &Detunings) -> Result<f64> {
    let d_p = nonzero(d.delta_p, "delta_p")?;
    let d_s = nonzero(d.delta_s, "delta_s")?;
    let d_2 = nonzero(d.delta_2, "delta_2")?;
    Ok(raman_chi(g_p, g_s, g_2, d_p, d_s, d_2))
}

/// V-type counterpart; detunings are `omega_e - omega_c`, `omega_g - omega_c`
/// and `omega_2 - omega_c` with `omega_i = 0`.
pub fn chi_vee(g_p: f64, g_s: f64, g_2: f64, d: &Detunings) -> Result<f64> {
    let d_p = nonzero(d.delta_p, "delta_p")?;
    let d_s = nonzero(d.delta_s, "delta_s")?;
    let d_2 = nonzero(d.delta_2, "delta_2")?;
    Ok(g_s * g_p / 3.0 * (1.0 / d_p + 1.0 / d_s) * (g_2 / d_2)
        + g_s * g_2 / 3.0 * (1.0 / d_s + 1.0 / d_2) * (g_p / d_p))
}

/// Coupling `chi_d` of the classical two-photon pump.
pub fn chi_drive(epsilon: f64, g_s: f64, g_2: f64, d: &DriveDetunings) -> Result<f64> {
    let d_d = nonzero(d.delta_d, "delta_d")?;
    let d_s = nonzero(d.delta_s, "delta_s")?;
    let d_2 = nonzero(d.delta_2, "delta_2")?;
    Ok(raman_chi(epsilon, g_s, g_2, d_d, d_s, d_2))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    /// Lambda atom followed by a two-level atom.
    LambdaTwoLevel,
    /// V atom followed by a two-level atom.
    VeeTwoLevel,
    /// Two Delta atoms.
    DeltaPair,
}

impl ModelFamily {
    /// Sign relating the closed-form coupling to the resonant matrix element
    /// `<0ee|H_eff|1gg>` in the bare basis, fixed by the BCH oracle.
    pub fn coupling_sign(self) -> f64 {
        match self {
            ModelFamily::LambdaTwoLevel | ModelFamily::DeltaPair => -1.0,
            ModelFamily::VeeTwoLevel => 1.0,
        }
    }
}

pub fn model_family(spec: &SystemSpec) -> Result<ModelFamily> {
    let kinds: Vec<AtomKind> = spec.atoms.iter().map(|a| a.kind).collect();
    match kinds.as_slice() {
        [AtomKind::Lambda, AtomKind::TwoLevel] => Ok(ModelFamily::LambdaTwoLevel),
        [AtomKind::Vee, AtomKind::TwoLevel] => Ok(ModelFamily::VeeTwoLevel),
        [AtomKind::Delta, AtomKind::Delta] => Ok(ModelFamily::DeltaPair),
        _ => Err(Error::UnsupportedFamily(
            kinds.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(" + "),
        )),
    }
}

/// Couplings `(g_p, g_s, g_2)` and detunings of one Raman path family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathFamily {
    pub g_p: f64,
    pub g_s: f64,
    pub g_2: f64,
    pub detunings: Detunings,
}

/// Path family in which `pump` plays the three-level role and `partner`
/// supplies the two-level transition `e <-> g`.
fn delta_path(pump: &AtomSpec, partner: &AtomSpec, omega_c: f64) -> PathFamily {
    let (w_e, w_i) = (pump.frequency(Level::E), pump.frequency(Level::I));
    let w_2 = partner.frequency(Level::E) - partner.frequency(Level::G);
    PathFamily {
        g_p: pump.coupling(Level::I, Level::G),
        g_s: pump.coupling(Level::I, Level::E),
        g_2: partner.coupling(Level::E, Level::G),
        detunings: Detunings { delta_p: w_i - omega_c, delta_s: w_i - w_e - omega_c, delta_2: w_2 - omega_c },
    }
}

fn vee_path(atom: &AtomSpec, partner: &AtomSpec, omega_c: f64) -> PathFamily {
    let w_i = atom.frequency(Level::I);
    PathFamily {
        g_p: atom.coupling(Level::E, Level::I),
        g_s: atom.coupling(Level::G, Level::I),
        g_2: partner.coupling(Level::E, Level::G),
        detunings: Detunings {
            delta_p: atom.frequency(Level::E) - w_i - omega_c,
            delta_s: atom.frequency(Level::G) - w_i - omega_c,
            delta_2: partner.frequency(Level::E) - partner.frequency(Level::G) - omega_c,
        },
    }
}

/// Raman path families contributing to the coupling; one for Lambda and V
/// models, two (one per pumped atom) for the Delta pair.
pub fn path_families(spec: &SystemSpec) -> Result<Vec<PathFamily>> {
    let w_c = spec.cavity.frequency;
    Ok(match model_family(spec)? {
        ModelFamily::LambdaTwoLevel => vec![delta_path(&spec.atoms[0], &spec.atoms[1], w_c)],
        ModelFamily::DeltaPair => vec![
            delta_path(&spec.atoms[0], &spec.atoms[1], w_c),
            delta_path(&spec.atoms[1], &spec.atoms[0], w_c),
        ],
        ModelFamily::VeeTwoLevel => vec![vee_path(&spec.atoms[0], &spec.atoms[1], w_c)],
    })
}

/// The four path terms of the two-Delta coupling, in the order
/// (atom 1 pumped: two terms, atom 2 pumped: two terms).
pub fn chi_circuit_terms(spec: &SystemSpec) -> Result<[f64; 4]> {
    if model_family(spec)? != ModelFamily::DeltaPair {
        return Err(Error::UnsupportedFamily("circuit coupling needs two Delta atoms".into()));
    }
    let mut out = [0.0; 4];
    for (k, p) in path_families(spec)?.iter().enumerate() {
        let d = &p.detunings;
        let (d_p, d_s, d_2) = (
            nonzero(d.delta_p, "delta_p")?,
            nonzero(d.delta_s, "delta_s")?,
            nonzero(d.delta_2, "delta_2")?,
        );
        out[2 * k] = p.g_s * p.g_2 / 3.0 * (1.0 / d_s + 1.0 / d_2) * (p.g_p / d_p);
        out[2 * k + 1] = p.g_p * p.g_s / 3.0 * (1.0 / d_p + 1.0 / d_s) * (p.g_2 / d_2);
    }
    Ok(out)
}

/// Effective coupling of the two-Delta circuit model, GHz.
pub fn chi_circuit(spec: &SystemSpec) -> Result<f64> {
    Ok(chi_circuit_terms(spec)?.iter().sum())
}

/// Closed-form coupling for any supported family, GHz.
pub fn chi_analytic(spec: &SystemSpec) -> Result<f64> {
    match model_family(spec)? {
        ModelFamily::DeltaPair => chi_circuit(spec),
        ModelFamily::LambdaTwoLevel => {
            let p = path_families(spec)?[0];
            chi_lambda(p.g_p, p.g_s, p.g_2, &p.detunings)
        }
        ModelFamily::VeeTwoLevel => {
            let p = path_families(spec)?[0];
            chi_vee(p.g_p, p.g_s, p.g_2, &p.detunings)
        }
    }
}

/// Pump drive of a Lambda plus two-level model, with its coupling.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DriveParams {
    pub epsilon: f64,
    pub epsilon_prime: f64,
    /// GHz.
    pub frequency: f64,
    pub phase: f64,
    pub detunings: DriveDetunings,
    /// GHz.
    pub chi_d: f64,
    /// `pi / (4 chi_d)` in ns.
    pub ghz_time_ns: f64,
}

/// Driven coupling of a Lambda plus two-level model whose Lambda atom carries
/// an `i <-> g` pump drive (and optionally an `i <-> e` drive at the same frequency).
pub fn drive_params(spec: &SystemSpec) -> Result<DriveParams> {
    if model_family(spec)? != ModelFamily::LambdaTwoLevel {
        return Err(Error::UnsupportedFamily("driven coupling needs a Lambda plus two-level model".into()));
    }
    let atom = &spec.atoms[0];
    let partner = &spec.atoms[1];
    let pump = atom
        .drives
        .iter()
        .find(|d| atom.kind.canonical_transition(d.transition) == Some((Level::I, Level::G)))
        .ok_or_else(|| Error::InvalidSpec("no i-g pump drive on the Lambda atom".into()))?;
    let eps_prime = atom
        .drives
        .iter()
        .filter(|d| atom.kind.canonical_transition(d.transition) == Some((Level::I, Level::E)))
        .map(|d| d.amplitude)
        .sum();
    let (w_e, w_i) = (atom.frequency(Level::E), atom.frequency(Level::I));
    let w_c = spec.cavity.frequency;
    let detunings = DriveDetunings {
        delta_d: w_i - pump.frequency,
        delta_d_prime: w_i - w_e - pump.frequency,
        delta_s: w_i - w_e - w_c,
        delta_2: partner.frequency(Level::E) - w_c,
    };
    let chi_d = chi_drive(pump.amplitude, atom.coupling(Level::I, Level::E), partner.coupling(Level::E, Level::G), &detunings)?;
    Ok(DriveParams {
        epsilon: pump.amplitude,
        epsilon_prime: eps_prime,
        frequency: pump.frequency,
        phase: pump.phase,
        detunings,
        chi_d,
        ghz_time_ns: if chi_d == 0.0 { f64::INFINITY } else { std::f64::consts::PI / (4.0 * TAU * chi_d.abs()) },
    })
}

/// Frequency written as a constant plus a coefficient of `a†a`, GHz.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Renormalized {
    pub constant: f64,
    pub per_photon: f64,
}

impl Renormalized {
    pub fn at(&self, photons: usize) -> f64 {
        self.constant + self.per_photon * photons as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RenormalizedFrequencies {
    pub cavity: Renormalized,
    pub atom1: Renormalized,
    pub atom2: Renormalized,
    /// Auxiliary level of the Lambda atom; absent for V atoms.
    pub aux: Option<Renormalized>,
}

/// Dispersively shifted frequencies of the Lambda and V models.
pub fn renormalized_frequencies(spec: &SystemSpec) -> Result<RenormalizedFrequencies> {
    let family = model_family(spec)?;
    if family == ModelFamily::DeltaPair {
        return Err(Error::UnsupportedFamily("closed-form shifts exist for Lambda and V models only".into()));
    }
    let p = path_families(spec)?[0];
    let d = p.detunings;
    let sp = p.g_p * p.g_p / nonzero(d.delta_p, "delta_p")?;
    let ss = p.g_s * p.g_s / nonzero(d.delta_s, "delta_s")?;
    let s2 = p.g_2 * p.g_2 / nonzero(d.delta_2, "delta_2")?;
    let w_c = spec.cavity.frequency;
    let atom = &spec.atoms[0];
    let w_2 = spec.atoms[1].frequency(Level::E) - spec.atoms[1].frequency(Level::G);
    let atom2 = Renormalized { constant: w_2 + s2, per_photon: 2.0 * s2 };
    Ok(match family {
        ModelFamily::LambdaTwoLevel => RenormalizedFrequencies {
            cavity: Renormalized { constant: w_c - sp - s2, per_photon: 0.0 },
            atom1: Renormalized { constant: atom.frequency(Level::E), per_photon: sp - ss },
            atom2,
            aux: Some(Renormalized { constant: atom.frequency(Level::I) + sp + ss, per_photon: sp + ss }),
        },
        ModelFamily::VeeTwoLevel => RenormalizedFrequencies {
            cavity: Renormalized { constant: w_c + ss - s2, per_photon: 0.0 },
            atom1: Renormalized {
                constant: atom.frequency(Level::E) - atom.frequency(Level::G) + sp - ss,
                per_photon: sp - ss,
            },
            atom2,
            aux: None,
        },
        ModelFamily::DeltaPair => unreachable!(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DispersiveRatio {
    pub label: String,
    pub ratio: f64,
}

/// `g / |Delta|` for every cavity coupling, with `Delta` the detuning of the
/// photon-absorbing transition.
pub fn dispersive_ratios(spec: &SystemSpec) -> Vec<DispersiveRatio> {
    let mut out = Vec::new();
    for (q, atom) in spec.atoms.iter().enumerate() {
        for c in &atom.couplings {
            if let Some((up, low)) = atom.kind.canonical_transition(c.transition) {
                let delta = atom.frequency(up) - atom.frequency(low) - spec.cavity.frequency;
                out.push(DispersiveRatio {
                    label: format!("atom{} {}{}", q + 1, up, low),
                    ratio: if delta == 0.0 { f64::INFINITY } else { c.g / delta.abs() },
                });
            }
        }
    }
    for (q, atom) in spec.atoms.iter().enumerate() {
        for d in &atom.drives {
            if let Some((up, low)) = atom.kind.canonical_transition(d.transition) {
                let delta = atom.frequency(up) - atom.frequency(low) - d.frequency;
                out.push(DispersiveRatio {
                    label: format!("atom{} drive {}{}", q + 1, up, low),
                    ratio: if delta == 0.0 { f64::INFINITY } else { d.amplitude / delta.abs() },
                });
            }
        }
    }
    out
}

/// Report of the closed-form effective theory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EffectiveParams {
    pub family: ModelFamily,
    /// GHz.
    pub chi: f64,
    pub paths: Vec<PathFamily>,
    pub renormalized: Option<RenormalizedFrequencies>,
    pub drive: Option<DriveParams>,
    pub dispersive_ratios: Vec<DispersiveRatio>,
    /// Every ratio below one.
    pub dispersive: bool,
    pub warnings: Vec<String>,
}

impl EffectiveParams {
    /// Exchange period `pi / chi` in ns, `None` for a non-interacting system.
    pub fn period_ns(&self) -> Option<f64> {
        (self.chi != 0.0).then(|| std::f64::consts::PI / (TAU * self.chi.abs()))
    }
}

pub fn effective_params(spec: &SystemSpec) -> Result<EffectiveParams> {
    spec.validate()?;
    let family = model_family(spec)?;
    let chi = chi_analytic(spec)?;
    let renormalized = match family {
        ModelFamily::DeltaPair => None,
        _ => Some(renormalized_frequencies(spec)?),
    };
    let drive = if spec.has_drives() && family == ModelFamily::LambdaTwoLevel {
        Some(drive_params(spec)?)
    } else {
        None
    };
    let ratios = dispersive_ratios(spec);
    let dispersive = ratios.iter().all(|r| r.ratio < 1.0);
    let warnings = ratios
        .iter()
        .filter(|r| r.ratio > DISPERSIVE_WARN_RATIO)
        .map(|r| format!("{}: g/|Delta| = {:.3} is outside the dispersive regime", r.label, r.ratio))
        .collect();
    Ok(EffectiveParams { family, chi, paths: path_families(spec)?, renormalized, drive, dispersive_ratios: ratios, dispersive, warnings })
}

/// Generator `X` with `[H0, X] = -H_I`, built per coupling as
/// `(g / Delta)(a† |low><up| - a |up><low|)`.
pub fn sw_generator(spec: &SystemSpec) -> Result<OperatorMatrix> {
    model_family(spec)?;
    sw_generator_any(spec)
}

/// Generator for any atom mix; the closed forms only exist for the supported
/// families, so callers outside them are on their own.
pub(crate) fn sw_generator_any(spec: &SystemSpec) -> Result<OperatorMatrix> {
    spec.validate()?;
    let layout = spec.layout()?;
    let a = layout.destroy();
    let ad = a.dagger();
    let mut x = OperatorMatrix::zeros(layout.sig());
    for (q, atom) in spec.atoms.iter().enumerate() {
        for c in &atom.couplings {
            if c.g == 0.0 {
                continue;
            }
            let (up, low) = atom.kind.canonical_transition(c.transition).expect("validated");
            let delta = atom.frequency(up) - atom.frequency(low) - spec.cavity.frequency;
            let ratio = c.g / nonzero(delta, &format!("atom {} transition {up}{low}", q + 1))?;
            let lower = ad.matmul(&layout.atom_op(q, low, up)?)?;
            let term = lower.sub(&lower.dagger())?.scale_real(ratio);
            x.accumulate(&term)?;
        }
    }
    Ok(x)
}

/// `||[H0, X] + H_I||_F / ||H_I||_F` (zero when `H_I` vanishes and the identity holds).
pub fn generator_residual(h0: &OperatorMatrix, hi: &OperatorMatrix, x: &OperatorMatrix) -> Result<f64> {
    let r = h0.commutator(x)?.add(hi)?.frobenius_norm();
    let n = hi.frobenius_norm();
    Ok(if n == 0.0 { r } else { r / n })
}

/// `H0 + [H_I, X]/2 + [[H_I, X], X]/3`; refuses generators that violate the
/// defining identity.
pub fn bch_effective(h0: &OperatorMatrix, hi: &OperatorMatrix, x: &OperatorMatrix) -> Result<OperatorMatrix> {
    let residual = generator_residual(h0, hi, x)?;
    if residual > GENERATOR_TOL {
        return Err(Error::GeneratorIdentity(residual));
    }
    let c1 = hi.commutator(x)?;
    let c2 = c1.commutator(x)?;
    h0.add(&c1.scale_real(0.5))?.add(&c2.scale_real(1.0 / 3.0))
}

/// Drops every element between bare states whose unperturbed energies
/// differ by more than `window` (rad/ns).
pub fn secular_projection(h: &OperatorMatrix, h0: &OperatorMatrix, window: f64) -> OperatorMatrix {
    let e = h0.diagonal_real();
    let n = h.dim();
    let mut data = h.data().clone();
    for r in 0..n {
        for c in 0..n {
            if (e[r] - e[c]).abs() > window {
                data[(r, c)] = C64::new(0.0, 0.0);
            }
        }
    }
    OperatorMatrix::new(h.sig().clone(), data).expect("same shape")
}

/// Third-order effective Hamiltonian of the full model after the secular
/// projection, in rad/ns on the full space.
pub fn mechanical_effective_hamiltonian(spec: &SystemSpec, window_ghz: f64) -> Result<OperatorMatrix> {
    let (h0, hi) = split_hamiltonian(spec)?;
    let x = sw_generator(spec)?;
    let h = bch_effective(&h0, &hi, &x)?;
    Ok(secular_projection(&h, &h0, TAU * window_ghz))
}

/// Second-order energy of a bare state, GHz: `E0 + sum_m |<m|H_I|s>|^2 / (E_s - E_m)`.
/// Terms within `1e-9` GHz of degeneracy are skipped.
pub fn second_order_energy(spec: &SystemSpec, label: &BareLabel) -> Result<f64> {
    let (h0, hi) = split_hamiltonian(spec)?;
    let layout = spec.layout()?;
    let s = layout.index_of(label)?;
    let e = h0.diagonal_real();
    let mut total = e[s];
    for m in 0..layout.dim() {
        let v = hi.get(m, s);
        let gap = e[s] - e[m];
        if m != s && v.norm_sqr() > 0.0 && gap.abs() > TAU * 1e-9 {
            total += v.norm_sqr() / gap;
        }
    }
    Ok(total / TAU)
}

/// Cavity frequency at which `initial` and `target` are degenerate including
/// second-order dispersive shifts, GHz. Fixed-point iteration starting from
/// the bare matching point; converges quickly in the dispersive regime.
pub fn analytic_matching_frequency(spec: &SystemSpec, initial: &BareLabel, target: &BareLabel) -> Result<f64> {
    let dn = initial.photons as f64 - target.photons as f64;
    if dn == 0.0 {
        return Err(Error::InvalidSpec("matching pair must differ in photon number".into()));
    }
    let atomic = |s: &SystemSpec, label: &BareLabel| -> f64 {
        label.levels.iter().zip(&s.atoms).map(|(l, a)| a.frequency(*l)).sum()
    };
    let mut w = (atomic(spec, target) - atomic(spec, initial)) / dn;
    for _ in 0..50 {
        let s = spec.with_cavity_frequency(w);
        let shift_i = second_order_energy(&s, initial)? - (w * initial.photons as f64 + atomic(&s, initial));
        let shift_t = second_order_energy(&s, target)? - (w * target.photons as f64 + atomic(&s, target));
        let next = (atomic(spec, target) + shift_t - atomic(spec, initial) - shift_i) / dn;
        if (next - w).abs() < 1e-13 {
            return Ok(next);
        }
        w = next;
    }
    Ok(w)
}

/// Exact splitting (rad/ns) of the dressed pair with the largest weight in
/// span{initial, target}, together with the two weights.
pub fn doublet_splitting(h: &OperatorMatrix, layout: &HilbertLayout, initial: &BareLabel, target: &BareLabel) -> Result<(f64, [f64; 2])> {
    let (vals, vecs) = eig_herm(h)?;
    let (a, b) = (layout.index_of(initial)?, layout.index_of(target)?);
    let mut weights: Vec<(f64, usize)> =
        (0..vals.len()).map(|k| (vecs[(a, k)].norm_sqr() + vecs[(b, k)].norm_sqr(), k)).collect();
    weights.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let (w0, k0) = weights[0];
    let (w1, k1) = weights[1];
    if w1 < 0.5 {
        return Err(Error::Scan(format!(
            "ambiguous dressed-state identification: weights {w0:.3}, {w1:.3}"
        )));
    }
    Ok(((vals[k0] - vals[k1]).abs(), [w0, w1]))
}

/// Construction options of the qubit-reduced effective model.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct EffectiveOptions {
    /// Substitute dispersively shifted frequencies (Lambda and V only).
    pub renormalized: bool,
}

/// Qubit-reduced effective model. The coupling is fixed at construction so
/// that the cavity frequency can be swept independently.
#[derive(Clone, Debug)]
pub struct EffectiveModel {
    layout: HilbertLayout,
    /// Closed-form coupling, GHz.
    pub chi: f64,
    /// Signed matrix element of the resonant exchange, GHz.
    pub coupling: f64,
    pub cavity: Renormalized,
    pub atom1: Renormalized,
    pub atom2: Renormalized,
    /// Drive phase; the model is the interaction-picture pump model when set.
    pub pump_phase: Option<f64>,
}

impl EffectiveModel {
    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn with_cavity_frequency(&self, freq: f64) -> Self {
        let mut m = self.clone();
        m.cavity.constant = freq;
        m
    }

    pub fn with_pump_phase(&self, phase: f64) -> Self {
        let mut m = self.clone();
        m.pump_phase = Some(phase);
        m
    }

    /// Bare frequency sum at which the model is resonant, GHz.
    pub fn matching_frequency(&self) -> f64 {
        self.atom1.constant + self.atom2.constant
    }

    /// Hamiltonian in rad/ns.
    pub fn hamiltonian(&self) -> OperatorMatrix {
        let layout = &self.layout;
        let sig = layout.sig();
        let mut diag = vec![0.0; layout.dim()];
        if self.pump_phase.is_none() {
            for (idx, d) in diag.iter_mut().enumerate() {
                let l = sig.labels_of(idx);
                let n = l[0];
                *d = TAU
                    * (self.cavity.at(0) * n as f64
                        + l[1] as f64 * self.atom1.at(n)
                        + l[2] as f64 * self.atom2.at(n));
            }
        }
        let mut h = OperatorMatrix::from_diagonal(sig, &diag).expect("layout diagonal");
        let s1 = layout.atom_op(0, Level::E, Level::G).expect("two atoms");
        let s2 = layout.atom_op(1, Level::E, Level::G).expect("two atoms");
        let pair = s1.matmul(&s2).expect("same signature");
        let coupling = match self.pump_phase {
            Some(phi) => pair.scale(C64::from_polar(TAU * self.coupling, -phi)),
            None => layout.destroy().matmul(&pair).expect("same signature").scale_real(TAU * self.coupling),
        };
        h.accumulate(&coupling).expect("same signature");
        h.accumulate(&coupling.dagger()).expect("same signature");
        h
    }
}

/// Qubit-reduced model `w_c a†a + w_1 s1+s1- + w_2 s2+s2- + chi (a s1+ s2+ + h.c.)`.
/// For a driven Lambda model the interaction-picture pump model
/// `chi_d (e^{-i phi} s1+ s2+ + h.c.)` is returned on a photon-free space.
pub fn build_effective_hamiltonian(spec: &SystemSpec, opts: &EffectiveOptions) -> Result<EffectiveModel> {
    spec.validate()?;
    let family = model_family(spec)?;
    let two_level = vec![Level::G, Level::E];
    if spec.has_drives() {
        let d = drive_params(spec)?;
        let layout = HilbertLayout::new(0, vec![two_level.clone(), two_level])?;
        let w1 = spec.atoms[0].frequency(Level::E);
        let w2 = spec.atoms[1].frequency(Level::E);
        return Ok(EffectiveModel {
            layout,
            chi: d.chi_d,
            coupling: family.coupling_sign() * d.chi_d,
            cavity: Renormalized { constant: 0.0, per_photon: 0.0 },
            atom1: Renormalized { constant: w1, per_photon: 0.0 },
            atom2: Renormalized { constant: w2, per_photon: 0.0 },
            pump_phase: Some(d.phase),
        });
    }
    let chi = chi_analytic(spec)?;
    let layout = HilbertLayout::new(spec.cavity.n_max, vec![two_level.clone(), two_level])?;
    let plain = |v: f64| Renormalized { constant: v, per_photon: 0.0 };
    let transition = |a: &AtomSpec| a.frequency(Level::E) - a.frequency(Level::G);
    let (cavity, atom1, atom2) = if opts.renormalized {
        if family == ModelFamily::DeltaPair {
            return Err(Error::UnsupportedFamily("renormalized frequencies need a Lambda or V model".into()));
        }
        let r = renormalized_frequencies(spec)?;
        (r.cavity, r.atom1, r.atom2)
    } else {
        (
            plain(spec.cavity.frequency),
            plain(transition(&spec.atoms[0])),
            plain(transition(&spec.atoms[1])),
        )
    };
    Ok(EffectiveModel { layout, chi, coupling: family.coupling_sign() * chi, cavity, atom1, atom2, pump_phase: None })
}
