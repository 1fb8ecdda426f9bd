//! Declarative system description and the full RWA Hamiltonians built from it.
//!
//! Configuration values are linear frequencies in GHz (`omega / 2pi`);
//! every operator produced here is in angular units (rad/ns), so time is in
//! nanoseconds throughout the crate.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{destroy, transition, DimSignature, OperatorMatrix, QuantumState, C64, ZERO};

/// Atomic level label. Every atom stores its levels as `g, e, i` at indices
/// 0, 1, 2 regardless of configuration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    G,
    E,
    I,
}

impl Level {
    pub fn index(self) -> usize {
        match self {
            Level::G => 0,
            Level::E => 1,
            Level::I => 2,
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'g' => Some(Level::G),
            'e' => Some(Level::E),
            'i' => Some(Level::I),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Level::G => 'g',
            Level::E => 'e',
            Level::I => 'i',
        }
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomKind {
    TwoLevel,
    Lambda,
    Vee,
    Xi,
    Delta,
}

impl AtomKind {
    pub fn levels(self) -> &'static [Level] {
        match self {
            AtomKind::TwoLevel => &[Level::G, Level::E],
            _ => &[Level::G, Level::E, Level::I],
        }
    }

    pub fn level_count(self) -> usize {
        self.levels().len()
    }

    pub fn has_level(self, level: Level) -> bool {
        self.levels().contains(&level)
    }

    /// Level whose energy is pinned to zero.
    pub fn reference_level(self) -> Level {
        match self {
            AtomKind::Vee => Level::I,
            _ => Level::G,
        }
    }

    /// Dipole-allowed transitions as `(upper, lower)`: the cavity term is
    /// `g a |upper><lower| + h.c.`.
    pub fn allowed_transitions(self) -> &'static [(Level, Level)] {
        use Level::*;
        match self {
            AtomKind::TwoLevel => &[(E, G)],
            AtomKind::Lambda => &[(I, G), (I, E)],
            AtomKind::Vee => &[(E, I), (G, I)],
            AtomKind::Xi => &[(I, G), (E, I)],
            AtomKind::Delta => &[(E, G), (I, G), (I, E)],
        }
    }

    /// Orients an unordered level pair as an allowed `(upper, lower)` transition.
    pub fn canonical_transition(self, pair: (Level, Level)) -> Option<(Level, Level)> {
        let allowed = self.allowed_transitions();
        if allowed.contains(&pair) {
            Some(pair)
        } else if allowed.contains(&(pair.1, pair.0)) {
            Some((pair.1, pair.0))
        } else {
            None
        }
    }
}

impl fmt::Display for AtomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AtomKind::TwoLevel => "two-level",
            AtomKind::Lambda => "Lambda",
            AtomKind::Vee => "V",
            AtomKind::Xi => "Xi",
            AtomKind::Delta => "Delta",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    pub transition: (Level, Level),
    /// GHz.
    pub g: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub transition: (Level, Level),
    /// GHz.
    pub amplitude: f64,
    /// GHz.
    pub frequency: f64,
    /// Radians.
    #[serde(default)]
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    pub kind: AtomKind,
    /// Level energies in GHz; the reference level defaults to zero.
    pub frequencies: BTreeMap<Level, f64>,
    #[serde(default)]
    pub couplings: Vec<Coupling>,
    #[serde(default)]
    pub drives: Vec<DriveSpec>,
}

impl AtomSpec {
    pub fn new(kind: AtomKind) -> Self {
        Self { kind, frequencies: BTreeMap::new(), couplings: Vec::new(), drives: Vec::new() }
    }

    pub fn with_level(mut self, level: Level, freq: f64) -> Self {
        self.frequencies.insert(level, freq);
        self
    }

    pub fn with_coupling(mut self, a: Level, b: Level, g: f64) -> Self {
        self.couplings.push(Coupling { transition: (a, b), g });
        self
    }

    pub fn with_drive(mut self, drive: DriveSpec) -> Self {
        self.drives.push(drive);
        self
    }

    /// Level energy in GHz.
    pub fn frequency(&self, level: Level) -> f64 {
        self.frequencies.get(&level).copied().unwrap_or(0.0)
    }

    /// Coupling strength on a transition (either orientation), zero when absent.
    pub fn coupling(&self, a: Level, b: Level) -> f64 {
        self.couplings
            .iter()
            .filter(|c| c.transition == (a, b) || c.transition == (b, a))
            .map(|c| c.g)
            .sum()
    }

    pub fn set_coupling(&mut self, a: Level, b: Level, g: f64) {
        self.couplings.retain(|c| c.transition != (a, b) && c.transition != (b, a));
        self.couplings.push(Coupling { transition: (a, b), g });
    }

    fn validate(&self, q: usize) -> Result<()> {
        for level in self.frequencies.keys() {
            if !self.kind.has_level(*level) {
                return Err(Error::InvalidSpec(format!(
                    "atom {q}: {} atom has no level {level}",
                    self.kind
                )));
            }
        }
        for level in self.kind.levels() {
            if *level != self.kind.reference_level() && !self.frequencies.contains_key(level) {
                return Err(Error::InvalidSpec(format!("atom {q}: missing frequency of level {level}")));
            }
        }
        for c in &self.couplings {
            if self.kind.canonical_transition(c.transition).is_none() {
                return Err(Error::InvalidSpec(format!(
                    "atom {q}: transition {}-{} not allowed for a {} atom",
                    c.transition.0, c.transition.1, self.kind
                )));
            }
            if !(c.g >= 0.0) || !c.g.is_finite() {
                return Err(Error::InvalidSpec(format!("atom {q}: coupling must be >= 0, got {}", c.g)));
            }
        }
        for d in &self.drives {
            if self.kind.canonical_transition(d.transition).is_none() {
                return Err(Error::InvalidSpec(format!(
                    "atom {q}: drive on transition {}-{} not allowed for a {} atom",
                    d.transition.0, d.transition.1, self.kind
                )));
            }
            if !(d.amplitude >= 0.0) {
                return Err(Error::InvalidSpec(format!("atom {q}: drive amplitude must be >= 0")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CavitySpec {
    /// GHz.
    pub frequency: f64,
    pub n_max: usize,
    /// Photon decay rate kappa, GHz.
    #[serde(default)]
    pub decay: f64,
}

/// Relaxation channel `|to><from|` on one atom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Relaxation {
    pub atom: usize,
    pub from: Level,
    pub to: Level,
    /// GHz.
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec {
    pub cavity: CavitySpec,
    pub atoms: Vec<AtomSpec>,
    #[serde(default)]
    pub relaxation: Vec<Relaxation>,
}

impl SystemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() {
            return Err(Error::InvalidSpec("at least one atom is required".into()));
        }
        if !(self.cavity.decay >= 0.0) {
            return Err(Error::InvalidSpec("cavity decay must be >= 0".into()));
        }
        for (q, atom) in self.atoms.iter().enumerate() {
            atom.validate(q)?;
        }
        for r in &self.relaxation {
            let atom = self.atoms.get(r.atom).ok_or_else(|| {
                Error::InvalidSpec(format!("relaxation refers to missing atom {}", r.atom))
            })?;
            if r.from == r.to || !atom.kind.has_level(r.from) || !atom.kind.has_level(r.to) {
                return Err(Error::InvalidSpec(format!(
                    "atom {}: invalid relaxation {} -> {}",
                    r.atom, r.from, r.to
                )));
            }
            if !(r.rate >= 0.0) {
                return Err(Error::InvalidSpec("relaxation rates must be >= 0".into()));
            }
        }
        Ok(())
    }

    pub fn layout(&self) -> Result<HilbertLayout> {
        HilbertLayout::new(self.cavity.n_max, self.atoms.iter().map(|a| a.kind.levels().to_vec()).collect())
    }

    pub fn with_cavity_frequency(&self, freq: f64) -> Self {
        let mut s = self.clone();
        s.cavity.frequency = freq;
        s
    }

    pub fn with_n_max(&self, n_max: usize) -> Self {
        let mut s = self.clone();
        s.cavity.n_max = n_max;
        s
    }

    /// Sets every drive frequency to `freq`.
    pub fn with_drive_frequency(&self, freq: f64) -> Self {
        let mut s = self.clone();
        for atom in &mut s.atoms {
            for d in &mut atom.drives {
                d.frequency = freq;
            }
        }
        s
    }

    /// Multiplies every cavity coupling by `factor`.
    pub fn scale_couplings(&self, factor: f64) -> Self {
        let mut s = self.clone();
        for atom in &mut s.atoms {
            for c in &mut atom.couplings {
                c.g *= factor;
            }
        }
        s
    }

    pub fn has_drives(&self) -> bool {
        self.atoms.iter().any(|a| !a.drives.is_empty())
    }
}

/// Tensor layout: cavity slot plus the level list of every atom.
#[derive(Clone, Debug, PartialEq)]
pub struct HilbertLayout {
    sig: DimSignature,
    n_max: usize,
    atom_levels: Vec<Vec<Level>>,
}

impl HilbertLayout {
    pub fn new(n_max: usize, atom_levels: Vec<Vec<Level>>) -> Result<Self> {
        let mut dims = vec![n_max + 1];
        for (q, levels) in atom_levels.iter().enumerate() {
            for (k, l) in levels.iter().enumerate() {
                if l.index() != k {
                    return Err(Error::InvalidSpec(format!("atom {q}: levels must be ordered g, e, i")));
                }
            }
            dims.push(levels.len());
        }
        Ok(Self { sig: DimSignature::new(dims)?, n_max, atom_levels })
    }

    pub fn sig(&self) -> &DimSignature {
        &self.sig
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn atom_count(&self) -> usize {
        self.atom_levels.len()
    }

    pub fn atom_levels(&self, q: usize) -> &[Level] {
        &self.atom_levels[q]
    }

    pub fn dim(&self) -> usize {
        self.sig.total()
    }

    pub fn index_of(&self, label: &BareLabel) -> Result<usize> {
        if label.photons > self.n_max {
            return Err(Error::InvalidState(format!(
                "photon number {} exceeds truncation {}",
                label.photons, self.n_max
            )));
        }
        if label.levels.len() != self.atom_count() {
            return Err(Error::InvalidState(format!(
                "label {label} names {} atoms, system has {}",
                label.levels.len(),
                self.atom_count()
            )));
        }
        let mut idx = vec![label.photons];
        for (q, l) in label.levels.iter().enumerate() {
            if !self.atom_levels[q].contains(l) {
                return Err(Error::InvalidState(format!("atom {q} has no level {l}")));
            }
            idx.push(l.index());
        }
        self.sig.index_of(&idx)
    }

    pub fn label_of(&self, idx: usize) -> BareLabel {
        let labels = self.sig.labels_of(idx);
        BareLabel {
            photons: labels[0],
            levels: labels[1..].iter().enumerate().map(|(q, &k)| self.atom_levels[q][k]).collect(),
        }
    }

    /// Cavity annihilation operator on the full space.
    pub fn destroy(&self) -> OperatorMatrix {
        destroy(self.n_max).embed(0, &self.sig).expect("cavity slot matches layout")
    }

    /// `|to><from|` on atom `q`.
    pub fn atom_op(&self, q: usize, to: Level, from: Level) -> Result<OperatorMatrix> {
        let n = self.atom_levels.get(q).map(Vec::len).ok_or(Error::IndexOutOfRange {
            index: q,
            dim: self.atom_count(),
        })?;
        transition(n, to.index(), from.index())?.embed(q + 1, &self.sig)
    }

    pub fn has_level(&self, q: usize, level: Level) -> bool {
        self.atom_levels.get(q).is_some_and(|l| l.contains(&level))
    }

    /// Diagonal of the projector onto level `level` of atom `q` (zero when the
    /// atom lacks that level).
    pub fn level_projector_diag(&self, q: usize, level: Level) -> Vec<f64> {
        (0..self.dim())
            .map(|idx| {
                let labels = self.sig.labels_of(idx);
                let k = labels[q + 1];
                if self.atom_levels[q].get(k) == Some(&level) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect()
    }

    pub fn photon_number_diag(&self) -> Vec<f64> {
        (0..self.dim()).map(|idx| self.sig.labels_of(idx)[0] as f64).collect()
    }

    pub fn bare_state(&self, label: &BareLabel) -> Result<QuantumState> {
        let idx = self.index_of(label)?;
        let mut v = DVector::from_element(self.dim(), ZERO);
        v[idx] = C64::new(1.0, 0.0);
        QuantumState::ket(self.sig.clone(), v)
    }

    /// Normalized superposition of bare states.
    pub fn superposition(&self, terms: &[(C64, BareLabel)]) -> Result<QuantumState> {
        let mut v = DVector::from_element(self.dim(), ZERO);
        for (amp, label) in terms {
            v[self.index_of(label)?] += *amp;
        }
        QuantumState::ket_normalized(self.sig.clone(), v)
    }
}

/// Product basis label `|n, j, k, ...>`, written compactly as e.g. `1gg`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BareLabel {
    pub photons: usize,
    pub levels: Vec<Level>,
}

impl BareLabel {
    pub fn new(photons: usize, levels: &[Level]) -> Self {
        Self { photons, levels: levels.to_vec() }
    }
}

impl fmt::Display for BareLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.photons)?;
        for l in &self.levels {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for BareLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let digits: String = s.chars().take_while(|c| c.is_ascii_digit()).collect();
        let photons = digits
            .parse()
            .map_err(|_| Error::InvalidState(format!("bad bare-state label '{s}'")))?;
        let levels = s[digits.len()..]
            .chars()
            .map(|c| Level::from_char(c).ok_or_else(|| Error::InvalidState(format!("bad level '{c}' in '{s}'"))))
            .collect::<Result<Vec<_>>>()?;
        if levels.is_empty() {
            return Err(Error::InvalidState(format!("bare-state label '{s}' names no atoms")));
        }
        Ok(Self { photons, levels })
    }
}

/// Free part `H0` and cavity interaction `H_I` of the static Hamiltonian.
pub fn split_hamiltonian(spec: &SystemSpec) -> Result<(OperatorMatrix, OperatorMatrix)> {
    spec.validate()?;
    let layout = spec.layout()?;
    let sig = layout.sig();
    let mut diag = vec![0.0; layout.dim()];
    for (idx, d) in diag.iter_mut().enumerate() {
        let labels = sig.labels_of(idx);
        let mut e = spec.cavity.frequency * labels[0] as f64;
        for (q, atom) in spec.atoms.iter().enumerate() {
            let level = atom.kind.levels()[labels[q + 1]];
            e += atom.frequency(level);
        }
        *d = TAU * e;
    }
    let h0 = OperatorMatrix::from_diagonal(sig, &diag)?;

    let a = layout.destroy();
    let mut hi = OperatorMatrix::zeros(sig);
    for (q, atom) in spec.atoms.iter().enumerate() {
        for c in &atom.couplings {
            if c.g == 0.0 {
                continue;
            }
            let (up, low) = atom.kind.canonical_transition(c.transition).expect("validated");
            let term = a.matmul(&layout.atom_op(q, up, low)?)?.scale_real(TAU * c.g);
            hi.accumulate(&term)?;
            hi.accumulate(&term.dagger())?;
        }
    }
    Ok((h0, hi))
}

/// Full static RWA Hamiltonian in rad/ns (drives excluded).
pub fn build_static_hamiltonian(spec: &SystemSpec) -> Result<OperatorMatrix> {
    let (h0, hi) = split_hamiltonian(spec)?;
    h0.add(&hi)
}

/// Harmonic drive contribution `op e^{-i(omega t + phase)} + h.c.`.
#[derive(Clone, Debug)]
pub struct DriveTerm {
    /// Raising part, amplitude already in rad/ns.
    pub op: OperatorMatrix,
    /// rad/ns.
    pub omega: f64,
    pub phase: f64,
}

pub fn build_drive_terms(spec: &SystemSpec) -> Result<Vec<DriveTerm>> {
    spec.validate()?;
    let layout = spec.layout()?;
    let mut terms = Vec::new();
    for (q, atom) in spec.atoms.iter().enumerate() {
        for d in &atom.drives {
            let (up, low) = atom.kind.canonical_transition(d.transition).expect("validated");
            terms.push(DriveTerm {
                op: layout.atom_op(q, up, low)?.scale_real(TAU * d.amplitude),
                omega: TAU * d.frequency,
                phase: d.phase,
            });
        }
    }
    Ok(terms)
}

/// Lindblad jump operator with its angular rate.
#[derive(Clone, Debug)]
pub struct CollapseChannel {
    pub op: OperatorMatrix,
    /// rad/ns.
    pub rate: f64,
}

/// Channels with zero rate are omitted.
pub fn build_collapse_channels(spec: &SystemSpec) -> Result<Vec<CollapseChannel>> {
    spec.validate()?;
    let layout = spec.layout()?;
    let mut channels = Vec::new();
    if spec.cavity.decay > 0.0 {
        channels.push(CollapseChannel { op: layout.destroy(), rate: TAU * spec.cavity.decay });
    }
    for r in &spec.relaxation {
        if r.rate > 0.0 {
            channels.push(CollapseChannel { op: layout.atom_op(r.atom, r.to, r.from)?, rate: TAU * r.rate });
        }
    }
    Ok(channels)
}

pub fn bare_state(spec: &SystemSpec, photon_n: usize, atom_levels: &[Level]) -> Result<QuantumState> {
    spec.layout()?.bare_state(&BareLabel::new(photon_n, atom_levels))
}

/// Diagonal operator `a†a + sum_q sum_j w_q(j) |j><j|_q`.
pub fn number_operator(layout: &HilbertLayout, weights: &[&[(Level, f64)]]) -> Result<OperatorMatrix> {
    let mut diag = layout.photon_number_diag();
    for (q, w) in weights.iter().enumerate() {
        for &(level, weight) in w.iter() {
            for (d, p) in diag.iter_mut().zip(layout.level_projector_diag(q, level)) {
                *d += weight * p;
            }
        }
    }
    OperatorMatrix::from_diagonal(layout.sig(), &diag)
}

/// `N = a†a + |i><i|_1 + |e><e|_2`, conserved by the Lambda plus two-level model.
pub fn lambda_excitation_number(layout: &HilbertLayout) -> Result<OperatorMatrix> {
    number_operator(layout, &[&[(Level::I, 1.0)], &[(Level::E, 1.0)]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    fn lambda_spec() -> SystemSpec {
        SystemSpec {
            cavity: CavitySpec { frequency: 8.0, n_max: 3, decay: 0.0 },
            atoms: vec![
                AtomSpec::new(AtomKind::Lambda)
                    .with_level(Level::E, 4.0)
                    .with_level(Level::I, 7.0)
                    .with_coupling(Level::I, Level::G, 0.1)
                    .with_coupling(Level::I, Level::E, 0.15),
                AtomSpec::new(AtomKind::TwoLevel).with_level(Level::E, 4.1).with_coupling(Level::E, Level::G, 0.12),
            ],
            relaxation: vec![],
        }
    }

    #[test]
    fn zero_coupling_hamiltonian_is_bare_spectrum() {
        let spec = lambda_spec().scale_couplings(0.0);
        let h = build_static_hamiltonian(&spec).unwrap();
        assert!(h.is_diagonal());
        let layout = spec.layout().unwrap();
        let idx = layout.index_of(&"2ie".parse().unwrap()).unwrap();
        assert!((h.get(idx, idx).re - TAU * (16.0 + 7.0 + 4.1)).abs() < 1e-12);
    }

    #[test]
    fn lambda_matrix_element_matches_hand_indexing() {
        let spec = lambda_spec();
        let h = build_static_hamiltonian(&spec).unwrap();
        let layout = spec.layout().unwrap();
        // a|i><e| takes |1,e,g> to |0,i,g>; the spec's 1gg -> 0ig uses g_p.
        let from = layout.index_of(&"1eg".parse().unwrap()).unwrap();
        let to = layout.index_of(&"0ig".parse().unwrap()).unwrap();
        assert!((h.get(to, from).re - TAU * 0.15).abs() < 1e-14);
        let from = layout.index_of(&"1gg".parse().unwrap()).unwrap();
        assert!((h.get(to, from).re - TAU * 0.1).abs() < 1e-14);
        let to2 = layout.index_of(&"0ge".parse().unwrap()).unwrap();
        assert!((h.get(to2, from).re - TAU * 0.12).abs() < 1e-14);
        // sqrt(2) from the photon ladder
        let from = layout.index_of(&"2gg".parse().unwrap()).unwrap();
        let to = layout.index_of(&"1ig".parse().unwrap()).unwrap();
        assert!((h.get(to, from).re - TAU * 0.1 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn circuit_hamiltonian_is_54_dim_hermitian() {
        let spec = presets::circuit_spec().with_n_max(5);
        let h = build_static_hamiltonian(&spec).unwrap();
        assert_eq!(h.dim(), 54);
        assert!(h.is_hermitian(1e-12));
    }

    #[test]
    fn excitation_number_conserved_only_for_lambda() {
        let spec = lambda_spec();
        let layout = spec.layout().unwrap();
        let h = build_static_hamiltonian(&spec).unwrap();
        let n = lambda_excitation_number(&layout).unwrap();
        assert!(h.commutator(&n).unwrap().frobenius_norm() <= 1e-12 * h.frobenius_norm());

        let delta = presets::circuit_spec();
        let layout = delta.layout().unwrap();
        let h = build_static_hamiltonian(&delta).unwrap();
        let n = lambda_excitation_number(&layout).unwrap();
        assert!(h.commutator(&n).unwrap().frobenius_norm() > 1e-3 * h.frobenius_norm());
    }

    #[test]
    fn invalid_transition_rejected() {
        let mut spec = lambda_spec();
        spec.atoms[0].couplings.push(Coupling { transition: (Level::E, Level::G), g: 0.1 });
        assert!(matches!(build_static_hamiltonian(&spec), Err(Error::InvalidSpec(_))));
        let mut spec = lambda_spec();
        spec.atoms[1].couplings[0].g = -0.1;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn reversed_transition_is_canonicalized() {
        let mut spec = lambda_spec();
        spec.atoms[0].couplings[0].transition = (Level::G, Level::I);
        assert_eq!(build_static_hamiltonian(&spec).unwrap(), build_static_hamiltonian(&lambda_spec()).unwrap());
    }

    #[test]
    fn drive_terms() {
        let spec = lambda_spec();
        assert!(build_drive_terms(&spec).unwrap().is_empty());
        let drive = |t, amp| DriveSpec { transition: t, amplitude: amp, frequency: 8.1, phase: 0.0 };
        let mut spec = lambda_spec();
        spec.atoms[0] = spec.atoms[0]
            .clone()
            .with_drive(drive((Level::I, Level::G), 0.1))
            .with_drive(drive((Level::I, Level::E), 0.05));
        let terms = build_drive_terms(&spec).unwrap();
        assert_eq!(terms.len(), 2);
        assert!((terms[0].omega - TAU * 8.1).abs() < 1e-12);
        assert!((terms[1].op.max_abs() - TAU * 0.05).abs() < 1e-12);
    }

    #[test]
    fn collapse_channels() {
        assert!(build_collapse_channels(&lambda_spec()).unwrap().is_empty());
        let spec = presets::circuit_spec();
        let ch = build_collapse_channels(&spec).unwrap();
        assert_eq!(ch.len(), 7);
        assert!((ch[0].rate - TAU * 1e-5).abs() < 1e-18);

        let single = SystemSpec {
            cavity: CavitySpec { frequency: 5.0, n_max: 1, decay: 0.0 },
            atoms: vec![AtomSpec::new(AtomKind::TwoLevel).with_level(Level::E, 5.0)],
            relaxation: vec![Relaxation { atom: 0, from: Level::E, to: Level::G, rate: 1e-3 }],
        };
        let ch = build_collapse_channels(&single).unwrap();
        assert_eq!(ch.len(), 1);
        let layout = single.layout().unwrap();
        let e = layout.index_of(&"0e".parse().unwrap()).unwrap();
        let g = layout.index_of(&"0g".parse().unwrap()).unwrap();
        assert_eq!(ch[0].op.get(g, e).re, 1.0);
    }

    #[test]
    fn bare_states_are_orthonormal() {
        let spec = lambda_spec();
        let a = bare_state(&spec, 1, &[Level::G, Level::G]).unwrap();
        let b = bare_state(&spec, 0, &[Level::E, Level::E]).unwrap();
        let (QuantumState::Ket { data: va, .. }, QuantumState::Ket { data: vb, .. }) = (&a, &b) else {
            panic!("kets expected")
        };
        assert_eq!(va.dotc(vb), ZERO);
        assert!(bare_state(&spec, 4, &[Level::G, Level::G]).is_err());
        assert!(bare_state(&spec, 0, &[Level::G, Level::I]).is_err());
    }

    #[test]
    fn label_round_trip() {
        let l: BareLabel = "0ee".parse().unwrap();
        assert_eq!(l, BareLabel::new(0, &[Level::E, Level::E]));
        assert_eq!(l.to_string(), "0ee");
        assert!("xgg".parse::<BareLabel>().is_err());
        assert!("1gq".parse::<BareLabel>().is_err());
    }

    #[test]
    fn serde_round_trip_rebuilds_identical_hamiltonian() {
        let spec = presets::circuit_spec();
        let json = serde_json::to_string(&spec).unwrap();
        let back: SystemSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(build_static_hamiltonian(&spec).unwrap(), build_static_hamiltonian(&back).unwrap());
    }
}
