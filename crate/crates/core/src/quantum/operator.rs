use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::kernel::DenseRegister;
use super::qubit::check_distinct;
use super::QubitId;
use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Operator on an ordered qubit support. Support entry `k` is bit `k` of the
/// matrix index (the first listed qubit varies fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseOperator {
    support: Vec<QubitId>,
    matrix: CMatrix,
}

impl DenseOperator {
    pub fn new(support: Vec<QubitId>, matrix: CMatrix) -> Result<Self> {
        check_distinct(&support)?;
        let d = 1usize << support.len();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::InvalidOperator(format!(
                "{}x{} matrix on {} qubits",
                matrix.nrows(),
                matrix.ncols(),
                support.len()
            )));
        }
        Ok(Self { support, matrix })
    }

    pub(crate) fn new_unchecked(support: Vec<QubitId>, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), 1 << support.len());
        Self { support, matrix }
    }

    pub fn identity(support: Vec<QubitId>) -> Self {
        let d = 1 << support.len();
        Self { support, matrix: CMatrix::identity(d, d) }
    }

    pub fn scalar(v: C64) -> Self {
        Self { support: Vec::new(), matrix: CMatrix::from_element(1, 1, v) }
    }

    pub fn support(&self) -> &[QubitId] {
        &self.support
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_parts(self) -> (Vec<QubitId>, CMatrix) {
        (self.support, self.matrix)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self { support: self.support.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { support: self.support.clone(), matrix: &self.matrix * s }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.matrix - self.matrix.adjoint()).camax() <= tol
    }

    /// `self (x) other` on `self.support ++ other.support`.
    pub fn tensor(&self, other: &DenseOperator) -> DenseOperator {
        let mut support = self.support.clone();
        support.extend_from_slice(&other.support);
        debug_assert!(check_distinct(&support).is_ok());
        Self { support, matrix: other.matrix.kronecker(&self.matrix) }
    }

    /// Returns `self (x) I` with legs ordered as `target`.
    pub fn embed(&self, target: &[QubitId]) -> Result<DenseOperator> {
        check_distinct(target)?;
        if let Some(q) = self.support.iter().find(|q| !target.contains(q)) {
            return Err(Error::SupportMismatch(format!("{q} is not in the target support")));
        }
        let mut reg = DenseRegister::from_matrix(self.support.clone(), &self.matrix);
        let id = CMatrix::identity(2, 2);
        for q in target.iter().filter(|q| !self.support.contains(q)) {
            reg.push(*q, &id);
        }
        reg.permute(target)?;
        Ok(Self { support: target.to_vec(), matrix: reg.to_matrix() })
    }

    /// Traces out everything outside `keep`; the result keeps this operator's leg order.
    pub fn partial_trace(&self, keep: &[QubitId]) -> Result<DenseOperator> {
        if let Some(q) = keep.iter().find(|q| !self.support.contains(q)) {
            return Err(Error::SupportMismatch(format!("{q} is not in the support")));
        }
        let mut reg = DenseRegister::from_matrix(self.support.clone(), &self.matrix);
        for q in self.support.iter().filter(|q| !keep.contains(q)) {
            reg.trace_out(q)?;
        }
        Ok(Self { support: reg.qubits.clone(), matrix: reg.to_matrix() })
    }

    /// Same operator with legs reordered; `order` must be a permutation of the support.
    pub fn permuted(&self, order: &[QubitId]) -> Result<DenseOperator> {
        if order.len() != self.support.len() || order.iter().any(|q| !self.support.contains(q)) {
            return Err(Error::SupportMismatch("not a permutation of the support".into()));
        }
        let mut reg = DenseRegister::from_matrix(self.support.clone(), &self.matrix);
        reg.permute(order)?;
        Ok(Self { support: order.to_vec(), matrix: reg.to_matrix() })
    }

    /// Embeds both operands on the union of supports (self's legs first).
    fn aligned(&self, other: &DenseOperator) -> (Vec<QubitId>, CMatrix, CMatrix) {
        let mut union = self.support.clone();
        union.extend(other.support.iter().filter(|q| !self.support.contains(q)));
        let a = self.embed(&union).expect("union contains support");
        let b = other.embed(&union).expect("union contains support");
        (union, a.matrix, b.matrix)
    }

    pub fn add(&self, other: &DenseOperator) -> DenseOperator {
        let (support, a, b) = self.aligned(other);
        Self { support, matrix: a + b }
    }

    pub fn sub(&self, other: &DenseOperator) -> DenseOperator {
        let (support, a, b) = self.aligned(other);
        Self { support, matrix: a - b }
    }

    pub fn mul(&self, other: &DenseOperator) -> DenseOperator {
        let (support, a, b) = self.aligned(other);
        Self { support, matrix: a * b }
    }

    /// Largest singular value, from the top eigenvalue of `O^dagger O`.
    pub fn operator_norm(&self) -> f64 {
        matrix_operator_norm(&self.matrix)
    }

    /// Sum of singular values.
    pub fn trace_norm(&self) -> f64 {
        self.matrix.clone().singular_values().iter().sum()
    }

    /// Whether `self` commutes with every operator on qubit `q`, within `tol`.
    /// Qubits outside the support trivially commute.
    pub fn acts_trivially_on(&self, q: &QubitId, tol: f64) -> bool {
        let Some(_) = self.support.iter().position(|x| x == q) else {
            return true;
        };
        super::pauli::Pauli::NON_IDENTITY.iter().all(|p| {
            let s = DenseOperator::new_unchecked(vec![*q], p.matrix());
            let c = self.mul(&s).sub(&s.mul(self));
            c.matrix.camax() <= tol
        })
    }

    /// Qubits on which the operator acts nontrivially.
    pub fn numerical_support(&self, tol: f64) -> Vec<QubitId> {
        self.support
            .iter()
            .filter(|q| !self.acts_trivially_on(q, tol))
            .copied()
            .collect()
    }

    /// Restricts an operator of the form `A (x) I` to the given qubits.
    pub fn restrict_to(&self, keep: &[QubitId]) -> Result<DenseOperator> {
        let traced = self.support.len() - keep.iter().filter(|q| self.support.contains(q)).count();
        let op = self.partial_trace(keep)?;
        Ok(op.scale(C64::new(1.0 / (1u64 << traced) as f64, 0.0)))
    }
}

pub(crate) fn matrix_operator_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let g = m.adjoint() * m;
    let g = (&g + g.adjoint()) * C64::new(0.5, 0.0);
    let top = g.symmetric_eigen().eigenvalues.max();
    top.max(0.0).sqrt()
}

/// Validated density matrix: Hermitian, PSD and unit trace within `1e-12`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(DenseOperator);

pub const STATE_TOL: f64 = 1e-12;

impl DensityMatrix {
    pub fn new(support: Vec<QubitId>, matrix: CMatrix) -> Result<Self> {
        let op = DenseOperator::new(support, matrix)?;
        Self::from_operator(op)
    }

    pub fn from_operator(op: DenseOperator) -> Result<Self> {
        let m = op.matrix();
        let dev = (m - m.adjoint()).camax();
        if dev > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {dev:e})")));
        }
        let tr = m.trace();
        if (tr - ONE).norm() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let min = h.symmetric_eigen().eigenvalues.min();
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self(op))
    }

    pub fn pure(support: Vec<QubitId>, psi: &DVector<C64>) -> Result<Self> {
        let n = psi.norm();
        if n == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        let psi = psi / C64::new(n, 0.0);
        Self::new(support, &psi * psi.adjoint())
    }

    pub fn zero(q: QubitId) -> Self {
        Self(DenseOperator::new_unchecked(vec![q], basis_projector(0)))
    }

    pub fn one(q: QubitId) -> Self {
        Self(DenseOperator::new_unchecked(vec![q], basis_projector(1)))
    }

    pub fn plus(q: QubitId) -> Self {
        Self(DenseOperator::new_unchecked(vec![q], CMatrix::from_element(2, 2, C64::new(0.5, 0.0))))
    }

    pub fn maximally_mixed(support: Vec<QubitId>) -> Self {
        let d = 1 << support.len();
        Self(DenseOperator::new_unchecked(support, CMatrix::identity(d, d) / C64::new(d as f64, 0.0)))
    }

    /// Tensor product of states, legs in argument order.
    pub fn product(factors: &[DensityMatrix]) -> Result<Self> {
        let mut it = factors.iter();
        let first = it.next().ok_or_else(|| Error::InvalidState("empty product".into()))?;
        let mut out = first.0.clone();
        for f in it {
            let mut s = out.support().to_vec();
            s.extend_from_slice(f.support());
            check_distinct(&s)?;
            out = out.tensor(&f.0);
        }
        Ok(Self(out))
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self(self.0.tensor(&other.0))
    }

    pub fn support(&self) -> &[QubitId] {
        self.0.support()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.0.matrix()
    }

    pub fn as_operator(&self) -> &DenseOperator {
        &self.0
    }

    pub fn into_operator(self) -> DenseOperator {
        self.0
    }

    pub fn partial_trace(&self, keep: &[QubitId]) -> Result<DensityMatrix> {
        Ok(Self(self.0.partial_trace(keep)?))
    }

    pub fn permuted(&self, order: &[QubitId]) -> Result<DensityMatrix> {
        Ok(Self(self.0.permuted(order)?))
    }

    /// `Tr[rho O]` for `O` supported inside this state's support.
    pub fn expectation(&self, obs: &DenseOperator) -> Result<C64> {
        let reg = DenseRegister::from_matrix(self.support().to_vec(), self.matrix());
        let pos = reg.positions(obs.support())?;
        Ok(reg.trace_with(&pos, obs.matrix()))
    }

    /// Real part of `Tr[rho O]`, rejecting imaginary parts above `1e-10`.
    pub fn expectation_real(&self, obs: &DenseOperator) -> Result<f64> {
        real_part(self.expectation(obs)?)
    }
}

pub(crate) fn real_part(v: C64) -> Result<f64> {
    if v.im.abs() > 1e-10 {
        return Err(Error::NonRealExpectation(v.im));
    }
    Ok(v.re)
}

fn basis_projector(k: usize) -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(k, k)] = ONE;
    m
}
