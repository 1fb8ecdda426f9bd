//! Named observables, all diagonal in the bare basis.

use crate::error::{Error, Result};
use crate::model::{BareLabel, HilbertLayout, Level};
use crate::operator::{OperatorMatrix, QuantumState};

/// Diagonal observable registered under a fixed trace name.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    name: String,
    diag: Vec<f64>,
}

impl Observable {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn operator(&self, layout: &HilbertLayout) -> OperatorMatrix {
        OperatorMatrix::from_diagonal(layout.sig(), &self.diag).expect("diagonal matches layout")
    }

    /// Expectation from basis populations.
    pub fn from_populations(&self, pops: &[f64]) -> f64 {
        self.diag.iter().zip(pops).map(|(d, p)| d * p).sum()
    }

    pub fn expect(&self, state: &QuantumState) -> Result<f64> {
        if state.sig().total() != self.diag.len() {
            return Err(Error::DimensionMismatch { expected: self.diag.len(), found: state.sig().total() });
        }
        Ok(self.from_populations(&state.populations()))
    }
}

/// `<a†a>`, trace `n_cav`.
pub fn mean_photon(layout: &HilbertLayout) -> Observable {
    Observable { name: "n_cav".into(), diag: layout.photon_number_diag() }
}

/// Excited-level population of atom `q` (0-based), trace `exc_q{q+1}`.
pub fn qubit_excitation(layout: &HilbertLayout, q: usize) -> Observable {
    Observable { name: format!("exc_q{}", q + 1), diag: layout.level_projector_diag(q, Level::E) }
}

/// Auxiliary-level population of atom `q`, trace `leak_q{q+1}`; identically
/// zero for atoms without an `i` level.
pub fn leakage(layout: &HilbertLayout, q: usize) -> Observable {
    Observable { name: format!("leak_q{}", q + 1), diag: layout.level_projector_diag(q, Level::I) }
}

/// Equal-time joint excitation of atoms 1 and 2, trace `g2`.
pub fn g2_qubits(layout: &HilbertLayout) -> Observable {
    let a = layout.level_projector_diag(0, Level::E);
    let b = layout.level_projector_diag(1, Level::E);
    Observable { name: "g2".into(), diag: a.iter().zip(&b).map(|(x, y)| x * y).collect() }
}

/// Bare-state population, trace `pop_<label>`.
pub fn population(layout: &HilbertLayout, label: &BareLabel) -> Result<Observable> {
    let idx = layout.index_of(label)?;
    let mut diag = vec![0.0; layout.dim()];
    diag[idx] = 1.0;
    Ok(Observable { name: format!("pop_{label}"), diag })
}

/// Population of the highest retained Fock level (truncation diagnostic).
pub fn top_fock_population(layout: &HilbertLayout) -> Observable {
    let top = layout.n_max() as f64;
    let diag = layout.photon_number_diag().iter().map(|&n| if n == top { 1.0 } else { 0.0 }).collect();
    Observable { name: "top_fock".into(), diag }
}

/// Standard trace set of a two-atom system:
/// `n_cav, exc_q1, exc_q2, leak_q1, leak_q2, g2` followed by the populations.
pub fn standard_set(layout: &HilbertLayout, populations: &[BareLabel]) -> Result<Vec<Observable>> {
    if layout.atom_count() != 2 {
        return Err(Error::InvalidSpec(format!(
            "standard traces need two atoms, system has {}",
            layout.atom_count()
        )));
    }
    let mut out = vec![
        mean_photon(layout),
        qubit_excitation(layout, 0),
        qubit_excitation(layout, 1),
        leakage(layout, 0),
        leakage(layout, 1),
        g2_qubits(layout),
    ];
    for p in populations {
        out.push(population(layout, p)?);
    }
    Ok(out)
}

/// `|<target|psi>|^2` or `<target|rho|target>` for a pure target; for a mixed
/// target, `tr(rho sigma)` when one side is pure.
pub fn state_fidelity(state: &QuantumState, target: &QuantumState) -> Result<f64> {
    if state.sig() != target.sig() {
        return Err(Error::SignatureMismatch { left: state.sig().dims().to_vec(), right: target.sig().dims().to_vec() });
    }
    let f = match (state, target) {
        (QuantumState::Ket { data: a, .. }, QuantumState::Ket { data: b, .. }) => b.dotc(a).norm_sqr(),
        (QuantumState::Density { data: rho, .. }, QuantumState::Ket { data: v, .. })
        | (QuantumState::Ket { data: v, .. }, QuantumState::Density { data: rho, .. }) => v.dotc(&(rho * v)).re,
        (QuantumState::Density { data: r, .. }, QuantumState::Density { data: s, .. }) => {
            (r * s).trace().re
        }
    };
    Ok(f.clamp(0.0, 1.0))
}
