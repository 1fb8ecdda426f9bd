//! Complex operators and states on tensor-product Hilbert spaces.
//!
//! Subsystem 0 is the cavity Fock space (dimension `n_max + 1`), every
//! following subsystem is an atom. Basis ordering is row-major over the
//! subsystems, so the last atom index varies fastest.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Ordered subsystem dimensions of a tensor-product space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DimSignature {
    dims: Vec<usize>,
}

impl DimSignature {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidSignature("empty dimension list".into()));
        }
        for (slot, &d) in dims.iter().enumerate() {
            let min = if slot == 0 { 1 } else { 2 };
            if d < min {
                return Err(Error::InvalidSignature(format!(
                    "slot {slot} has dimension {d}, need at least {min}"
                )));
            }
        }
        Ok(Self { dims })
    }

    /// Signature of a single (cavity-like) subsystem of dimension `d >= 1`.
    pub fn single(d: usize) -> Result<Self> {
        Self::new(vec![d])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    /// Flat basis index of a product state.
    pub fn index_of(&self, labels: &[usize]) -> Result<usize> {
        if labels.len() != self.dims.len() {
            return Err(Error::InvalidSignature(format!(
                "{} labels for {} subsystems",
                labels.len(),
                self.dims.len()
            )));
        }
        let mut idx = 0;
        for (&l, &d) in labels.iter().zip(&self.dims) {
            if l >= d {
                return Err(Error::IndexOutOfRange { index: l, dim: d });
            }
            idx = idx * d + l;
        }
        Ok(idx)
    }

    /// Inverse of [`DimSignature::index_of`].
    pub fn labels_of(&self, mut idx: usize) -> Vec<usize> {
        let mut labels = vec![0; self.dims.len()];
        for (slot, &d) in self.dims.iter().enumerate().rev() {
            labels[slot] = idx % d;
            idx /= d;
        }
        labels
    }
}

/// Dense complex square matrix tagged with the space it acts on.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    sig: DimSignature,
    data: DMatrix<C64>,
}

impl OperatorMatrix {
    pub fn new(sig: DimSignature, data: DMatrix<C64>) -> Result<Self> {
        let n = sig.total();
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: data.nrows().max(data.ncols()),
            });
        }
        Ok(Self { sig, data })
    }

    pub fn zeros(sig: &DimSignature) -> Self {
        let n = sig.total();
        Self { sig: sig.clone(), data: DMatrix::zeros(n, n) }
    }

    pub fn identity(sig: &DimSignature) -> Self {
        let n = sig.total();
        Self { sig: sig.clone(), data: DMatrix::identity(n, n) }
    }

    /// Real diagonal operator.
    pub fn from_diagonal(sig: &DimSignature, diag: &[f64]) -> Result<Self> {
        let n = sig.total();
        if diag.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: diag.len() });
        }
        let v = DVector::from_iterator(n, diag.iter().map(|&x| C64::new(x, 0.0)));
        Ok(Self { sig: sig.clone(), data: DMatrix::from_diagonal(&v) })
    }

    pub fn sig(&self) -> &DimSignature {
        &self.sig
    }

    pub fn data(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<C64> {
        self.data
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[(row, col)]
    }

    fn check_sig(&self, other: &Self) -> Result<()> {
        if self.sig != other.sig {
            return Err(Error::SignatureMismatch {
                left: self.sig.dims().to_vec(),
                right: other.sig.dims().to_vec(),
            });
        }
        Ok(())
    }

    pub fn dagger(&self) -> Self {
        Self { sig: self.sig.clone(), data: self.data.adjoint() }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.check_sig(other)?;
        Ok(Self { sig: self.sig.clone(), data: &self.data * &other.data })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_sig(other)?;
        Ok(Self { sig: self.sig.clone(), data: &self.data + &other.data })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_sig(other)?;
        Ok(Self { sig: self.sig.clone(), data: &self.data - &other.data })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { sig: self.sig.clone(), data: &self.data * factor }
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    /// `[A, B] = AB - BA`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.check_sig(other)?;
        let data = &self.data * &other.data - &other.data * &self.data;
        Ok(Self { sig: self.sig.clone(), data })
    }

    /// In-place `self += other`.
    pub fn accumulate(&mut self, other: &Self) -> Result<()> {
        self.check_sig(other)?;
        self.data += &other.data;
        Ok(())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max|A - A†| <= tol * max|A|`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self.max_abs();
        let n = self.dim();
        for r in 0..n {
            for c in r..n {
                if (self.data[(r, c)] - self.data[(c, r)].conj()).norm() > tol * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|r| (0..n).all(|c| r == c || self.data[(r, c)] == ZERO))
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.data[(i, i)].re).collect()
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    /// Kronecker product; the signature is the concatenation of both.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let mut dims = self.sig.dims().to_vec();
        dims.extend_from_slice(other.sig.dims());
        let sig = DimSignature::new(dims)?;
        Ok(Self { sig, data: self.data.kronecker(&other.data) })
    }

    /// Embed a single-subsystem operator into `slot` of `sig`, acting as the
    /// identity on every other subsystem.
    pub fn embed(&self, slot: usize, sig: &DimSignature) -> Result<Self> {
        if slot >= sig.len() {
            return Err(Error::IndexOutOfRange { index: slot, dim: sig.len() });
        }
        let d = sig.dims()[slot];
        if self.dim() != d {
            return Err(Error::DimensionMismatch { expected: d, found: self.dim() });
        }
        let left: usize = sig.dims()[..slot].iter().product();
        let right: usize = sig.dims()[slot + 1..].iter().product();
        let n = sig.total();
        let mut data = DMatrix::zeros(n, n);
        // Entry (l, r, c) of I_left (x) op (x) I_right.
        for l in 0..left {
            for r in 0..d {
                for c in 0..d {
                    let v = self.data[(r, c)];
                    if v == ZERO {
                        continue;
                    }
                    for k in 0..right {
                        let row = (l * d + r) * right + k;
                        let col = (l * d + c) * right + k;
                        data[(row, col)] = v;
                    }
                }
            }
        }
        Ok(Self { sig: sig.clone(), data })
    }

    /// Restriction to the subspace spanned by the given basis indices.
    pub fn submatrix(&self, indices: &[usize]) -> DMatrix<C64> {
        DMatrix::from_fn(indices.len(), indices.len(), |r, c| {
            self.data[(indices[r], indices[c])]
        })
    }
}

/// Lowering operator on a Fock space truncated at `n_max` photons.
///
/// On the truncated space `[a, a†]` equals the identity except for the
/// corner entry `(n_max, n_max)`, which is `-n_max`.
pub fn destroy(n_max: usize) -> OperatorMatrix {
    let n = n_max + 1;
    let mut data = DMatrix::zeros(n, n);
    for k in 1..n {
        data[(k - 1, k)] = C64::new((k as f64).sqrt(), 0.0);
    }
    OperatorMatrix { sig: DimSignature { dims: vec![n] }, data }
}

pub fn create(n_max: usize) -> OperatorMatrix {
    destroy(n_max).dagger()
}

/// `|j><k|` on a `level_count`-dimensional space.
pub fn transition(level_count: usize, j: usize, k: usize) -> Result<OperatorMatrix> {
    for idx in [j, k] {
        if idx >= level_count {
            return Err(Error::IndexOutOfRange { index: idx, dim: level_count });
        }
    }
    let mut data = DMatrix::zeros(level_count, level_count);
    data[(j, k)] = ONE;
    Ok(OperatorMatrix { sig: DimSignature { dims: vec![level_count] }, data })
}

/// Pure ket or density matrix.
#[derive(Clone, Debug, PartialEq)]
pub enum QuantumState {
    Ket { sig: DimSignature, data: DVector<C64> },
    Density { sig: DimSignature, data: DMatrix<C64> },
}

pub const KET_NORM_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

impl QuantumState {
    pub fn ket(sig: DimSignature, data: DVector<C64>) -> Result<Self> {
        if data.len() != sig.total() {
            return Err(Error::DimensionMismatch { expected: sig.total(), found: data.len() });
        }
        let norm = data.norm();
        if (norm - 1.0).abs() > KET_NORM_TOL {
            return Err(Error::InvalidState(format!("ket norm {norm}")));
        }
        Ok(Self::Ket { sig, data })
    }

    /// Normalizes `data` before wrapping it.
    pub fn ket_normalized(sig: DimSignature, data: DVector<C64>) -> Result<Self> {
        let norm = data.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::ket(sig, data / C64::new(norm, 0.0))
    }

    pub fn density(sig: DimSignature, data: DMatrix<C64>) -> Result<Self> {
        let n = sig.total();
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: data.nrows() });
        }
        let tr = data.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr}")));
        }
        let op = OperatorMatrix { sig: sig.clone(), data };
        if !op.is_hermitian(1e-10) {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let (evals, _) = eig_herm(&op)?;
        if evals[0] < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {}", evals[0])));
        }
        Ok(Self::Density { sig, data: op.data })
    }

    /// Maximally mixed state.
    pub fn maximally_mixed(sig: DimSignature) -> Self {
        let n = sig.total();
        let data = DMatrix::identity(n, n) / C64::new(n as f64, 0.0);
        Self::Density { sig, data }
    }

    pub fn sig(&self) -> &DimSignature {
        match self {
            Self::Ket { sig, .. } | Self::Density { sig, .. } => sig,
        }
    }

    pub fn is_ket(&self) -> bool {
        matches!(self, Self::Ket { .. })
    }

    pub fn to_density(&self) -> Self {
        match self {
            Self::Ket { sig, data } => Self::Density { sig: sig.clone(), data: data * data.adjoint() },
            d @ Self::Density { .. } => d.clone(),
        }
    }

    pub fn density_matrix(&self) -> DMatrix<C64> {
        match self {
            Self::Ket { data, .. } => data * data.adjoint(),
            Self::Density { data, .. } => data.clone(),
        }
    }

    /// Probability weight of each basis state.
    pub fn populations(&self) -> Vec<f64> {
        match self {
            Self::Ket { data, .. } => data.iter().map(|z| z.norm_sqr()).collect(),
            Self::Density { data, .. } => (0..data.nrows()).map(|i| data[(i, i)].re).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        match self {
            Self::Ket { data, .. } => data.norm_squared(),
            Self::Density { data, .. } => data.trace().re,
        }
    }
}

/// `<psi|O|psi>` or `tr(rho O)`.
pub fn expectation(op: &OperatorMatrix, state: &QuantumState) -> Result<C64> {
    if op.sig() != state.sig() {
        return Err(Error::SignatureMismatch {
            left: op.sig().dims().to_vec(),
            right: state.sig().dims().to_vec(),
        });
    }
    Ok(match state {
        QuantumState::Ket { data, .. } => data.dotc(&(op.data() * data)),
        QuantumState::Density { data, .. } => {
            let n = data.nrows();
            let mut acc = ZERO;
            for r in 0..n {
                for c in 0..n {
                    acc += data[(r, c)] * op.data()[(c, r)];
                }
            }
            acc
        }
    })
}

/// Spectral decomposition of a Hermitian operator, eigenvalues ascending.
/// Column `k` of the returned matrix is the eigenvector of eigenvalue `k`.
pub fn eig_herm(op: &OperatorMatrix) -> Result<(Vec<f64>, DMatrix<C64>)> {
    if !op.is_hermitian(1e-10) {
        return Err(Error::NotHermitian);
    }
    // Symmetrize so roundoff asymmetry never reaches the solver.
    let sym = (op.data() + op.data().adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let n = op.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(dims: &[usize]) -> DimSignature {
        DimSignature::new(dims.to_vec()).unwrap()
    }

    #[test]
    fn destroy_entries() {
        let a = destroy(1);
        assert_eq!(a.dim(), 2);
        assert_eq!(a.get(0, 1), ONE);
        assert_eq!(a.get(1, 0), ZERO);
        let a2 = destroy(2);
        assert!((a2.get(1, 2).re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn number_operator_diagonal() {
        let a = destroy(3);
        let n = a.dagger().matmul(&a).unwrap();
        for k in 0..4 {
            assert!((n.get(k, k).re - k as f64).abs() < 1e-14);
        }
        assert!(n.is_diagonal());
    }

    #[test]
    fn truncated_canonical_commutator_corner() {
        let n_max = 4;
        let a = destroy(n_max);
        let c = a.commutator(&a.dagger()).unwrap();
        for k in 0..n_max {
            assert!((c.get(k, k) - ONE).norm() < 1e-14);
        }
        assert!((c.get(n_max, n_max).re + n_max as f64).abs() < 1e-14);
    }

    #[test]
    fn transition_and_adjoint() {
        let sp = transition(2, 1, 0).unwrap();
        assert_eq!(sp.get(1, 0), ONE);
        let ig = transition(3, 2, 0).unwrap();
        assert_eq!(ig.get(2, 0), ONE);
        assert_eq!(ig.dagger(), transition(3, 0, 2).unwrap());
        assert!(matches!(transition(3, 3, 0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn sigma_commutator_is_sigma_z() {
        let sp = transition(2, 1, 0).unwrap();
        let sm = transition(2, 0, 1).unwrap();
        let c = sp.commutator(&sm).unwrap();
        assert_eq!(c.get(1, 1), ONE);
        assert_eq!(c.get(0, 0), -ONE);
        assert!(sp.commutator(&sp).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn embed_shapes_and_identity() {
        let s = sig(&[2, 2, 2]);
        let sp = transition(2, 1, 0).unwrap();
        let e = sp.embed(1, &s).unwrap();
        assert_eq!(e.dim(), 8);
        // |0,0,1> -> |0,1,1>
        let from = s.index_of(&[0, 0, 1]).unwrap();
        let to = s.index_of(&[0, 1, 1]).unwrap();
        assert_eq!(e.get(to, from), ONE);
        let id = OperatorMatrix::identity(&sig(&[2])).embed(2, &s).unwrap();
        assert_eq!(id, OperatorMatrix::identity(&s));
        assert!(matches!(sp.embed(0, &sig(&[3, 2])), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn signature_mismatch_is_error() {
        let a = OperatorMatrix::identity(&sig(&[2, 2]));
        let b = OperatorMatrix::identity(&sig(&[4]));
        assert!(matches!(a.matmul(&b), Err(Error::SignatureMismatch { .. })));
    }

    #[test]
    fn signature_rules() {
        assert!(DimSignature::new(vec![1, 2]).is_ok());
        assert!(DimSignature::new(vec![3, 1]).is_err());
        let s = sig(&[4, 3, 3]);
        assert_eq!(s.total(), 36);
        let idx = s.index_of(&[1, 2, 0]).unwrap();
        assert_eq!(s.labels_of(idx), vec![1, 2, 0]);
    }

    #[test]
    fn expectations_on_basis_states() {
        let s = sig(&[2, 2, 2]);
        let a = destroy(1).embed(0, &s).unwrap();
        let n = a.dagger().matmul(&a).unwrap();
        let mut v = DVector::zeros(8);
        v[s.index_of(&[1, 0, 0]).unwrap()] = ONE;
        let psi = QuantumState::ket(s.clone(), v).unwrap();
        assert!((expectation(&n, &psi).unwrap() - ONE).norm() < 1e-14);

        let mixed = QuantumState::maximally_mixed(sig(&[2]));
        let n1 = destroy(1).dagger().matmul(&destroy(1)).unwrap();
        assert!((expectation(&n1, &mixed).unwrap().re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn eig_herm_basic() {
        let s = sig(&[3]);
        let d = OperatorMatrix::from_diagonal(&s, &[3.0, 1.0, 2.0]).unwrap();
        let (vals, _) = eig_herm(&d).unwrap();
        assert_eq!(vals.len(), 3);
        for (v, e) in vals.iter().zip([1.0, 2.0, 3.0]) {
            assert!((v - e).abs() < 1e-14);
        }
        let g = 0.3;
        let jc = OperatorMatrix::new(
            sig(&[2]),
            DMatrix::from_row_slice(2, 2, &[ZERO, C64::new(g, 0.0), C64::new(g, 0.0), ZERO]),
        )
        .unwrap();
        let (vals, _) = eig_herm(&jc).unwrap();
        assert!((vals[0] + g).abs() < 1e-14 && (vals[1] - g).abs() < 1e-14);
    }

    #[test]
    fn eig_herm_rejects_non_hermitian() {
        let sp = transition(2, 1, 0).unwrap();
        assert!(matches!(eig_herm(&sp), Err(Error::NotHermitian)));
    }

    #[test]
    fn density_validation() {
        let s = sig(&[2]);
        let bad = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(1.5, 0.0), C64::new(-0.5, 0.0)]));
        assert!(QuantumState::density(s.clone(), bad).is_err());
        let good = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(0.25, 0.0), C64::new(0.75, 0.0)]));
        assert!(QuantumState::density(s, good).is_ok());
    }
}
