//! Dense complex matrices over labelled tensor-product spaces.
//!
//! Flat indices are row-major over subsystems: subsystem 0 is the most
//! significant Kronecker factor.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::Error;
use crate::math;
use crate::C64;

/// Entrywise tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Tolerance on the minimum eigenvalue for PSD checks.
pub const PSD_TOL: f64 = 1e-8;

/// Name of one tensor factor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsystemLabel(String);

impl SubsystemLabel {
    pub fn new(name: impl Into<String>) -> Self {
        Self(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SubsystemLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for SubsystemLabel {
    fn from(s: &str) -> Self {
        Self::new(s)
    }
}

/// A labelled tensor factor with its dimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subsystem {
    pub label: SubsystemLabel,
    pub dim: usize,
}

impl Subsystem {
    pub fn new(label: impl Into<String>, dim: usize) -> Self {
        Self {
            label: SubsystemLabel::new(label),
            dim,
        }
    }
}

/// Square complex matrix together with its tensor-factor structure.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    data: DMatrix<C64>,
    subsystems: Vec<Subsystem>,
}

fn check_subsystems(subsystems: &[Subsystem]) -> Result<usize, Error> {
    for (i, s) in subsystems.iter().enumerate() {
        if s.dim == 0 {
            return Err(Error::DimensionMismatch(alloc::format!("subsystem {} has dimension 0", s.label)));
        }
        if subsystems[..i].iter().any(|t| t.label == s.label) {
            return Err(Error::DuplicateLabel(s.label.to_string()));
        }
    }
    Ok(subsystems.iter().map(|s| s.dim).product())
}

impl ComplexMatrix {
    pub fn new(data: DMatrix<C64>, subsystems: Vec<Subsystem>) -> Result<Self, Error> {
        let n = check_subsystems(&subsystems)?;
        if data.nrows() != n || data.ncols() != n {
            return Err(Error::DimensionMismatch(alloc::format!(
                "matrix is {}x{} but subsystems multiply to {}",
                data.nrows(),
                data.ncols(),
                n
            )));
        }
        Ok(Self { data, subsystems })
    }

    /// A matrix with a single anonymous factor named `label`.
    pub fn single(data: DMatrix<C64>, label: &str) -> Result<Self, Error> {
        if data.nrows() != data.ncols() {
            return Err(Error::DimensionMismatch("matrix is not square".into()));
        }
        let n = data.nrows();
        Self::new(data, vec![Subsystem::new(label, n)])
    }

    pub fn from_fn(subsystems: Vec<Subsystem>, f: impl FnMut(usize, usize) -> C64) -> Result<Self, Error> {
        let n = check_subsystems(&subsystems)?;
        Ok(Self {
            data: DMatrix::from_fn(n, n, f),
            subsystems,
        })
    }

    pub fn zeros(subsystems: Vec<Subsystem>) -> Result<Self, Error> {
        Self::from_fn(subsystems, |_, _| C64::new(0.0, 0.0))
    }

    pub fn identity(subsystems: Vec<Subsystem>) -> Result<Self, Error> {
        Self::from_fn(subsystems, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    /// Scalar 1x1 matrix with no tensor factors.
    pub fn scalar(value: C64) -> Self {
        Self {
            data: DMatrix::from_element(1, 1, value),
            subsystems: Vec::new(),
        }
    }

    /// `|psi><psi|` for a state vector over the given factors.
    pub fn projector(psi: &[C64], subsystems: Vec<Subsystem>) -> Result<Self, Error> {
        let n = check_subsystems(&subsystems)?;
        if psi.len() != n {
            return Err(Error::DimensionMismatch("state vector length".into()));
        }
        Self::from_fn(subsystems, |i, j| psi[i] * psi[j].conj())
    }

    pub fn data(&self) -> &DMatrix<C64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<C64> {
        self.data
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.subsystems.iter().map(|s| s.label.as_str()).collect()
    }

    /// Side length.
    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[(i, j)]
    }

    pub fn position(&self, label: &str) -> Result<usize, Error> {
        self.subsystems
            .iter()
            .position(|s| s.label.as_str() == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize, Error> {
        Ok(self.subsystems[self.position(label)?].dim)
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.position(label).is_ok()
    }

    /// Same data with new factor structure (the side length must match).
    pub fn with_subsystems(self, subsystems: Vec<Subsystem>) -> Result<Self, Error> {
        Self::new(self.data, subsystems)
    }

    pub fn relabel(mut self, from: &str, to: &str) -> Result<Self, Error> {
        let p = self.position(from)?;
        if from != to && self.has_label(to) {
            return Err(Error::DuplicateLabel(to.to_string()));
        }
        self.subsystems[p].label = SubsystemLabel::new(to);
        Ok(self)
    }

    pub fn trace(&self) -> C64 {
        self.data.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            data: self.data.adjoint(),
            subsystems: self.subsystems.clone(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            data: self.data.transpose(),
            subsystems: self.subsystems.clone(),
        }
    }

    pub fn conjugate(&self) -> Self {
        Self {
            data: self.data.map(|z| z.conj()),
            subsystems: self.subsystems.clone(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            data: self.data.map(|z| z * s),
            subsystems: self.subsystems.clone(),
        }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self {
            data: self.data.map(|z| z * s),
            subsystems: self.subsystems.clone(),
        }
    }

    /// Matrix product; factor structure is taken from `self`.
    pub fn matmul(&self, other: &Self) -> Result<Self, Error> {
        self.same_shape(other)?;
        Ok(Self {
            data: &self.data * &other.data,
            subsystems: self.subsystems.clone(),
        })
    }

    /// `U self U^dagger`.
    pub fn conjugate_by(&self, u: &Self) -> Result<Self, Error> {
        self.same_shape(u)?;
        Ok(Self {
            data: &u.data * &self.data * u.data.adjoint(),
            subsystems: self.subsystems.clone(),
        })
    }

    fn same_shape(&self, other: &Self) -> Result<(), Error> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch(alloc::format!("dims {:?} vs {:?}", self.dims(), other.dims())));
        }
        Ok(())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "side lengths differ");
        self.data.iter().zip(other.data.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    pub fn kron(&self, other: &Self) -> Result<Self, Error> {
        let mut subsystems = self.subsystems.clone();
        subsystems.extend(other.subsystems.iter().cloned());
        check_subsystems(&subsystems)?;
        Ok(Self {
            data: self.data.kronecker(&other.data),
            subsystems,
        })
    }

    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.subsystems.len()];
        for k in (0..self.subsystems.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.subsystems[k + 1].dim;
        }
        strides
    }

    /// Flat offsets of every multi-index over the chosen factors, enumerated
    /// in row-major order of those factors.
    fn offsets(&self, positions: &[usize]) -> Vec<usize> {
        let strides = self.strides();
        let mut out = vec![0usize];
        for &p in positions {
            let d = self.subsystems[p].dim;
            let mut next = Vec::with_capacity(out.len() * d);
            for &o in &out {
                for k in 0..d {
                    next.push(o + k * strides[p]);
                }
            }
            out = next;
        }
        out
    }

    fn positions_of(&self, labels: &[&str]) -> Result<Vec<usize>, Error> {
        let mut pos = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l)?;
            if pos.contains(&p) {
                return Err(Error::DuplicateLabel(l.to_string()));
            }
            pos.push(p);
        }
        Ok(pos)
    }

    /// Trace out everything except `keep`; kept factors stay in their
    /// original order.
    pub fn partial_trace(&self, keep: &[&str]) -> Result<Self, Error> {
        let mut keep_pos = self.positions_of(keep)?;
        keep_pos.sort_unstable();
        let traced: Vec<usize> = (0..self.subsystems.len()).filter(|p| !keep_pos.contains(p)).collect();
        let ko = self.offsets(&keep_pos);
        let to = self.offsets(&traced);
        let n = ko.len();
        let data = DMatrix::from_fn(n, n, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &to {
                acc += self.data[(ko[i] + t, ko[j] + t)];
            }
            acc
        });
        let subsystems = keep_pos.iter().map(|&p| self.subsystems[p].clone()).collect();
        Ok(Self { data, subsystems })
    }

    /// Trace out the listed factors.
    pub fn trace_out(&self, remove: &[&str]) -> Result<Self, Error> {
        let rm = self.positions_of(remove)?;
        let keep: Vec<&str> = self
            .subsystems
            .iter()
            .enumerate()
            .filter(|(p, _)| !rm.contains(p))
            .map(|(_, s)| s.label.as_str())
            .collect();
        self.partial_trace(&keep)
    }

    /// Transpose the listed factors only.
    pub fn partial_transpose(&self, on: &[&str]) -> Result<Self, Error> {
        let pos = self.positions_of(on)?;
        let strides = self.strides();
        let n = self.dim();
        let digit = |idx: usize, p: usize| (idx / strides[p]) % self.subsystems[p].dim;
        let mut data = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
        for i in 0..n {
            for j in 0..n {
                let (mut ii, mut jj) = (i, j);
                for &p in &pos {
                    let (di, dj) = (digit(i, p), digit(j, p));
                    ii = ii - di * strides[p] + dj * strides[p];
                    jj = jj - dj * strides[p] + di * strides[p];
                }
                data[(ii, jj)] = self.data[(i, j)];
            }
        }
        Ok(Self {
            data,
            subsystems: self.subsystems.clone(),
        })
    }

    /// Reorder factors so that they appear in the order given by `order`,
    /// which must list every label exactly once.
    pub fn permute(&self, order: &[&str]) -> Result<Self, Error> {
        let pos = self.positions_of(order)?;
        if pos.len() != self.subsystems.len() {
            return Err(Error::DimensionMismatch("permutation must list every factor".into()));
        }
        let map = self.offsets(&pos);
        let n = self.dim();
        let data = DMatrix::from_fn(n, n, |i, j| self.data[(map[i], map[j])]);
        let subsystems = pos.iter().map(|&p| self.subsystems[p].clone()).collect();
        Ok(Self { data, subsystems })
    }

    /// Contract shared factors: `(A*B)[(a,b),(a',b')] = sum_{c,c''} A[(a,c''),(a',c)] B[(c'',b),(c,b')]`.
    /// The result carries the unshared factors of `self` followed by those of
    /// `other`. No normalisation factor is applied.
    pub fn link(&self, other: &Self) -> Result<Self, Error> {
        let shared: Vec<&str> = self.labels().into_iter().filter(|l| other.has_label(l)).collect();
        for l in &shared {
            if self.dim_of(l)? != other.dim_of(l)? {
                return Err(Error::DimensionMismatch(alloc::format!("shared factor {l} differs in dimension")));
            }
        }
        let rest_a: Vec<&str> = self.labels().into_iter().filter(|l| !shared.contains(l)).collect();
        let rest_b: Vec<&str> = other.labels().into_iter().filter(|l| !shared.contains(l)).collect();
        let mut order_a = rest_a.clone();
        order_a.extend(shared.iter().copied());
        let mut order_b = shared.clone();
        order_b.extend(rest_b.iter().copied());
        let a = self.permute(&order_a)?;
        let b = other.permute(&order_b)?;
        let dc: usize = shared.iter().map(|l| self.dim_of(l).unwrap()).product();
        let da = a.dim() / dc;
        let db = b.dim() / dc;
        let mut data = DMatrix::from_element(da * db, da * db, C64::new(0.0, 0.0));
        for ap in 0..da {
            for a2 in 0..da {
                for c2 in 0..dc {
                    for c in 0..dc {
                        let av = a.data[(ap * dc + c2, a2 * dc + c)];
                        if av == C64::new(0.0, 0.0) {
                            continue;
                        }
                        for bp in 0..db {
                            for b2 in 0..db {
                                data[(ap * db + bp, a2 * db + b2)] += av * b.data[(c2 * db + bp, c * db + b2)];
                            }
                        }
                    }
                }
            }
        }
        let mut subsystems: Vec<Subsystem> = rest_a.iter().map(|l| self.subsystems[self.position(l).unwrap()].clone()).collect();
        subsystems.extend(rest_b.iter().map(|l| other.subsystems[other.position(l).unwrap()].clone()));
        Ok(Self { data, subsystems })
    }

    /// Largest entrywise modulus of `M - M^dagger`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(M + M^dagger) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self {
            data: (&self.data + self.data.adjoint()).map(|z| z * 0.5),
            subsystems: self.subsystems.clone(),
        }
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let herm = self.hermitian_part();
        let eig = SymmetricEigen::new(herm.data);
        let mut ev: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    /// True iff the matrix is Hermitian within `tol` and its minimum
    /// eigenvalue is at least `-tol`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.is_hermitian(tol.max(HERMITIAN_TOL)) && self.min_eigenvalue() >= -tol
    }

    /// `[[Re h, -Im h], [Im h, Re h]]`.
    pub fn real_embed(&self) -> Result<DMatrix<f64>, Error> {
        let defect = self.hermiticity_defect();
        if defect > HERMITIAN_TOL {
            return Err(Error::NotHermitian(defect));
        }
        let n = self.dim();
        Ok(DMatrix::from_fn(2 * n, 2 * n, |i, j| {
            let z = self.data[(i % n, j % n)];
            match (i < n, j < n) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        }))
    }

    /// Inverse of [`ComplexMatrix::real_embed`] applied to an arbitrary real
    /// symmetric matrix, averaging the redundant blocks.
    pub fn from_real_embedding(y: &DMatrix<f64>, subsystems: Vec<Subsystem>) -> Result<Self, Error> {
        let n = check_subsystems(&subsystems)?;
        if y.nrows() != 2 * n || y.ncols() != 2 * n {
            return Err(Error::DimensionMismatch("embedding has wrong size".into()));
        }
        Self::from_fn(subsystems, |p, q| {
            C64::new(0.5 * (y[(p, q)] + y[(n + p, n + q)]), 0.5 * (y[(n + p, q)] - y[(p, n + q)]))
        })
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dims(), rhs.dims(), "adding matrices with different factors");
        ComplexMatrix {
            data: &self.data + &rhs.data,
            subsystems: self.subsystems.clone(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dims(), rhs.dims(), "subtracting matrices with different factors");
        ComplexMatrix {
            data: &self.data - &rhs.data,
            subsystems: self.subsystems.clone(),
        }
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, s: f64) -> ComplexMatrix {
        self.scale(s)
    }
}

/// Common single-qubit operators.
pub mod qubit {
    use super::*;

    fn m2(label: &str, e: [[C64; 2]; 2]) -> ComplexMatrix {
        ComplexMatrix::single(DMatrix::from_fn(2, 2, |i, j| e[i][j]), label).expect("2x2")
    }

    const O: C64 = C64::new(0.0, 0.0);
    const L: C64 = C64::new(1.0, 0.0);
    const I: C64 = C64::new(0.0, 1.0);

    pub fn identity(label: &str) -> ComplexMatrix {
        m2(label, [[L, O], [O, L]])
    }

    pub fn pauli_x(label: &str) -> ComplexMatrix {
        m2(label, [[O, L], [L, O]])
    }

    pub fn pauli_y(label: &str) -> ComplexMatrix {
        m2(label, [[O, -I], [I, O]])
    }

    pub fn pauli_z(label: &str) -> ComplexMatrix {
        m2(label, [[L, O], [O, -L]])
    }

    /// Pauli operator by index 0..3 = X, Y, Z.
    pub fn pauli(index: usize, label: &str) -> ComplexMatrix {
        match index {
            0 => pauli_x(label),
            1 => pauli_y(label),
            _ => pauli_z(label),
        }
    }

    /// `|k><k|` in the computational basis.
    pub fn basis_projector(k: usize, label: &str) -> ComplexMatrix {
        m2(label, [[if k == 0 { L } else { O }, O], [O, if k == 1 { L } else { O }]])
    }

    /// `exp(-i theta sigma / 2)` about Pauli axis `axis` (0..3 = x, y, z).
    pub fn rotation(axis: usize, theta: f64, label: &str) -> ComplexMatrix {
        let c = math::cos(theta / 2.0);
        let s = math::sin(theta / 2.0);
        let id = identity(label);
        let p = pauli(axis, label);
        &id.scale(c) + &p.scale_complex(C64::new(0.0, -s))
    }

    /// Projective measurement `(I + (-1)^a sigma) / 2` along a Pauli axis.
    pub fn pauli_effect(axis: usize, outcome: usize, label: &str) -> ComplexMatrix {
        let sign = if outcome == 0 { 1.0 } else { -1.0 };
        (&identity(label) + &pauli(axis, label).scale(sign)).scale(0.5)
    }

    /// `(|00> + |11>) / sqrt 2` as a density matrix on factors `a`, `b`.
    pub fn bell_state(a: &str, b: &str) -> ComplexMatrix {
        let h = 1.0 / math::sqrt(2.0);
        let psi = [C64::new(h, 0.0), O, O, C64::new(h, 0.0)];
        ComplexMatrix::projector(&psi, vec![Subsystem::new(a, 2), Subsystem::new(b, 2)]).expect("bell")
    }
}
