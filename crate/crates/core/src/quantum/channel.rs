use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::operator::{CMatrix, DenseOperator, DensityMatrix, ONE, ZERO};
use super::pauli::pauli_basis_matrix;
use super::qubit::check_distinct;
use super::QubitId;
use crate::error::{Error, Result};

/// Completeness tolerance for Kraus families.
pub const KRAUS_TOL: f64 = 1e-12;

/// CPTP map in Kraus form. Each Kraus operator maps `domain` legs to `codomain` legs.
#[derive(Clone, Debug)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    domain: Vec<QubitId>,
    codomain: Vec<QubitId>,
}

/// Hilbert-Schmidt adjoint of a channel: `O -> sum_k K_k^dagger O K_k`.
#[derive(Clone, Debug)]
pub struct DualChannel {
    /// Adjoint Kraus operators, mapping the channel codomain to its domain.
    adjoints: Vec<CMatrix>,
    domain: Vec<QubitId>,
    codomain: Vec<QubitId>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>, domain: Vec<QubitId>, codomain: Vec<QubitId>) -> Result<Self> {
        check_distinct(&domain)?;
        check_distinct(&codomain)?;
        let (dd, dc) = (1usize << domain.len(), 1usize << codomain.len());
        if kraus.is_empty() {
            return Err(Error::InvalidChannel("no Kraus operators".into()));
        }
        if let Some(k) = kraus.iter().find(|k| k.nrows() != dc || k.ncols() != dd) {
            return Err(Error::InvalidChannel(format!(
                "Kraus shape {}x{}, expected {dc}x{dd}",
                k.nrows(),
                k.ncols()
            )));
        }
        let ch = Self { kraus, domain, codomain };
        let err = ch.completeness_error();
        if err > KRAUS_TOL {
            return Err(Error::InvalidChannel(format!("completeness error {err:e}")));
        }
        Ok(ch)
    }

    pub fn identity(support: Vec<QubitId>) -> Self {
        let d = 1 << support.len();
        Self { kraus: vec![CMatrix::identity(d, d)], domain: support.clone(), codomain: support }
    }

    pub fn unitary(u: CMatrix, support: Vec<QubitId>) -> Result<Self> {
        Self::new(vec![u], support.clone(), support)
    }

    /// `rho -> rho (x) omega`, with the state's legs appended after `domain`.
    pub fn append_state(domain: Vec<QubitId>, omega: &DensityMatrix) -> Result<Self> {
        let mut codomain = domain.clone();
        codomain.extend_from_slice(omega.support());
        check_distinct(&codomain)?;
        let dd = 1 << domain.len();
        let eig = omega.matrix().clone().symmetric_eigen();
        let id = CMatrix::identity(dd, dd);
        let kraus: Vec<CMatrix> = eig
            .eigenvalues
            .iter()
            .zip(eig.eigenvectors.column_iter())
            .filter(|(l, _)| **l > 1e-15)
            .map(|(l, v)| v.into_owned().kronecker(&id) * C64::new(l.sqrt(), 0.0))
            .collect();
        Self::new(kraus, domain, codomain)
    }

    /// Partial trace over `traced`; remaining legs keep their order.
    pub fn trace_out(domain: Vec<QubitId>, traced: &[QubitId]) -> Result<Self> {
        if let Some(q) = traced.iter().find(|q| !domain.contains(q)) {
            return Err(Error::SupportMismatch(format!("{q} not in domain")));
        }
        let kept: Vec<QubitId> = domain.iter().filter(|q| !traced.contains(q)).copied().collect();
        let tpos: Vec<usize> = domain.iter().enumerate().filter(|(_, q)| traced.contains(q)).map(|(i, _)| i).collect();
        let kpos: Vec<usize> = domain.iter().enumerate().filter(|(_, q)| !traced.contains(q)).map(|(i, _)| i).collect();
        let (dd, dk) = (1usize << domain.len(), 1usize << kept.len());
        let kraus = (0..1usize << tpos.len())
            .map(|k| {
                let mut m = CMatrix::zeros(dk, dd);
                for a in 0..dd {
                    let tk = tpos.iter().enumerate().fold(0, |o, (j, &p)| o | (((a >> p) & 1) << j));
                    if tk == k {
                        let ak = kpos.iter().enumerate().fold(0, |o, (j, &p)| o | (((a >> p) & 1) << j));
                        m[(ak, a)] = ONE;
                    }
                }
                m
            })
            .collect();
        Self::new(kraus, domain, kept)
    }

    /// Completely depolarizing channel on `support`.
    pub fn depolarizing_projector(support: Vec<QubitId>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::SupportMismatch("empty support".into()));
        }
        let n = support.len();
        let d = (1u64 << n) as f64;
        let kraus = (0..1usize << (2 * n))
            .map(|i| pauli_basis_matrix(n, i) / C64::new(d, 0.0))
            .collect();
        Self::new(kraus, support.clone(), support)
    }

    /// Builds the Kraus form of a linear CP map given by its action on matrix
    /// units of the domain, via the Choi matrix.
    pub fn from_action<F>(domain: Vec<QubitId>, codomain: Vec<QubitId>, mut f: F) -> Result<Self>
    where
        F: FnMut(&CMatrix) -> Result<CMatrix>,
    {
        let (dd, dc) = (1usize << domain.len(), 1usize << codomain.len());
        let mut choi = CMatrix::zeros(dc * dd, dc * dd);
        for a in 0..dd {
            for b in 0..dd {
                let mut e = CMatrix::zeros(dd, dd);
                e[(a, b)] = ONE;
                let out = f(&e)?;
                for i in 0..dc {
                    for j in 0..dc {
                        choi[(i + dc * a, j + dc * b)] = out[(i, j)];
                    }
                }
            }
        }
        let choi = (&choi + choi.adjoint()) * C64::new(0.5, 0.0);
        let eig = choi.symmetric_eigen();
        let top = eig.eigenvalues.max().max(0.0);
        let kraus = eig
            .eigenvalues
            .iter()
            .zip(eig.eigenvectors.column_iter())
            .filter(|(l, _)| **l > 1e-13 * top.max(1.0))
            .map(|(l, v)| CMatrix::from_fn(dc, dd, |i, a| v[i + dc * a] * C64::new(l.sqrt(), 0.0)))
            .collect();
        Self::new(kraus, domain, codomain)
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn domain(&self) -> &[QubitId] {
        &self.domain
    }

    pub fn codomain(&self) -> &[QubitId] {
        &self.codomain
    }

    /// `|| sum_k K^dagger K - I ||` in the max-entry norm.
    pub fn completeness_error(&self) -> f64 {
        let dd = 1 << self.domain.len();
        let s = self.kraus.iter().fold(CMatrix::zeros(dd, dd), |acc, k| acc + k.adjoint() * k);
        (s - CMatrix::identity(dd, dd)).camax()
    }

    /// Applies the channel to an operator whose support contains the domain.
    pub fn apply_operator(&self, op: &DenseOperator) -> Result<DenseOperator> {
        apply_kraus(&self.kraus, &self.domain, &self.codomain, op)
    }

    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let out = self.apply_operator(rho.as_operator())?;
        let (support, m) = out.into_parts();
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        DensityMatrix::new(support, m)
    }

    /// `next` after `self`; `next.domain` must lie in `self.codomain`.
    pub fn then(&self, next: &QuantumChannel) -> Result<QuantumChannel> {
        if let Some(q) = next.domain.iter().find(|q| !self.codomain.contains(q)) {
            return Err(Error::SupportMismatch(format!("{q} not produced by the first channel")));
        }
        let rest: Vec<QubitId> = self.codomain.iter().filter(|q| !next.domain.contains(q)).copied().collect();
        let mut mid = next.domain.clone();
        mid.extend_from_slice(&rest);
        let mut codomain = next.codomain.clone();
        codomain.extend_from_slice(&rest);
        check_distinct(&codomain)?;
        let p = permutation_matrix(&self.codomain, &mid);
        let id = CMatrix::identity(1 << rest.len(), 1 << rest.len());
        let mut kraus = Vec::with_capacity(self.kraus.len() * next.kraus.len());
        for n in &next.kraus {
            let np = id.kronecker(n) * &p;
            for k in &self.kraus {
                kraus.push(&np * k);
            }
        }
        let kraus = prune_kraus(kraus);
        Ok(Self { kraus, domain: self.domain.clone(), codomain })
    }

    pub fn dual(&self) -> DualChannel {
        DualChannel {
            adjoints: self.kraus.iter().map(|k| k.adjoint()).collect(),
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
        }
    }

    /// Superoperator acting on vectorizations indexed `row + d * col`.
    pub fn superoperator(&self) -> CMatrix {
        let (dd, dc) = (1usize << self.domain.len(), 1usize << self.codomain.len());
        self.kraus
            .iter()
            .fold(CMatrix::zeros(dc * dc, dd * dd), |acc, k| acc + k.conjugate().kronecker(k))
    }

    /// Frobenius distance between superoperators; legs must be listed identically.
    pub fn superoperator_distance(&self, other: &QuantumChannel) -> Result<f64> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::SupportMismatch("channels act on different legs".into()));
        }
        Ok((self.superoperator() - other.superoperator()).norm())
    }
}

impl DualChannel {
    /// Domain of the dual, i.e. the codomain of the channel.
    pub fn domain(&self) -> &[QubitId] {
        &self.domain
    }

    pub fn codomain(&self) -> &[QubitId] {
        &self.codomain
    }

    /// Applies the dual; the operator is implicitly extended by identity to the domain.
    pub fn apply(&self, op: &DenseOperator) -> Result<DenseOperator> {
        let mut support = op.support().to_vec();
        support.extend(self.domain.iter().filter(|q| !op.support().contains(q)));
        let op = op.embed(&support)?;
        apply_kraus(&self.adjoints, &self.domain, &self.codomain, &op)
    }

    pub fn unitality_error(&self) -> f64 {
        let out = self.apply(&DenseOperator::identity(self.domain.clone())).expect("own domain");
        let d = out.matrix().nrows();
        (out.matrix() - CMatrix::identity(d, d)).camax()
    }
}

/// `sum_k K X K^dagger` with `K` mapping `domain` to `codomain` legs of `op`.
fn apply_kraus(kraus: &[CMatrix], domain: &[QubitId], codomain: &[QubitId], op: &DenseOperator) -> Result<DenseOperator> {
    if let Some(q) = domain.iter().find(|q| !op.support().contains(q)) {
        return Err(Error::SupportMismatch(format!("channel domain qubit {q} missing from operand")));
    }
    let rest: Vec<QubitId> = op.support().iter().filter(|q| !domain.contains(q)).copied().collect();
    if let Some(q) = rest.iter().find(|q| codomain.contains(q)) {
        return Err(Error::SupportMismatch(format!("codomain qubit {q} already present")));
    }
    let mut order = domain.to_vec();
    order.extend_from_slice(&rest);
    let x = op.permuted(&order)?;
    let x = x.matrix();
    let (dd, dc, r) = (1usize << domain.len(), 1usize << codomain.len(), 1usize << rest.len());
    let mut out = CMatrix::zeros(dc * r, dc * r);
    for r2 in 0..r {
        for r1 in 0..r {
            let block = x.view((r1 * dd, r2 * dd), (dd, dd));
            let mut acc = CMatrix::zeros(dc, dc);
            for k in kraus {
                acc += k * block * k.adjoint();
            }
            out.view_mut((r1 * dc, r2 * dc), (dc, dc)).copy_from(&acc);
        }
    }
    let mut support = codomain.to_vec();
    support.extend_from_slice(&rest);
    let out = DenseOperator::new(support, out)?;
    let same_set = domain.len() == codomain.len() && domain.iter().all(|q| codomain.contains(q));
    if same_set {
        out.permuted(op.support())
    } else {
        Ok(out)
    }
}

/// Matrix taking a vector with legs ordered `from` to the same vector with legs ordered `to`.
pub(crate) fn permutation_matrix(from: &[QubitId], to: &[QubitId]) -> CMatrix {
    let d = 1 << from.len();
    let src: Vec<usize> = to.iter().map(|q| from.iter().position(|x| x == q).expect("same set")).collect();
    let mut m = DMatrix::from_element(d, d, ZERO);
    for a in 0..d {
        let b = src.iter().enumerate().fold(0, |o, (k, &p)| o | (((a >> p) & 1) << k));
        m[(b, a)] = ONE;
    }
    m
}

fn prune_kraus(kraus: Vec<CMatrix>) -> Vec<CMatrix> {
    let kept: Vec<CMatrix> = kraus.iter().filter(|k| k.camax() > 1e-15).cloned().collect();
    if kept.is_empty() { kraus } else { kept }
}

/// Applies `ch` to `rho`.
pub fn apply_channel(ch: &QuantumChannel, rho: &DensityMatrix) -> Result<DensityMatrix> {
    ch.apply(rho)
}

pub fn dual_channel(ch: &QuantumChannel) -> DualChannel {
    ch.dual()
}

pub fn depolarizing_projector(support: Vec<QubitId>) -> Result<QuantumChannel> {
    QuantumChannel::depolarizing_projector(support)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::pauli::Pauli;
    use crate::quantum::random::{haar_unitary, random_channel, random_density, random_operator};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(i: usize) -> QubitId {
        QubitId::bath(i)
    }

    #[test]
    fn identity_and_depolarizing() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = random_density(&[q(0), q(1)], &mut rng);
        let id = QuantumChannel::identity(vec![q(1)]);
        assert!((id.apply(&rho).unwrap().matrix() - rho.matrix()).norm() < 1e-14);

        let phi = depolarizing_projector(vec![q(0)]).unwrap();
        let out = phi.apply(&DensityMatrix::zero(q(0))).unwrap();
        assert!((out.matrix() - CMatrix::identity(2, 2) * C64::new(0.5, 0.0)).norm() < 1e-15);
        let out = phi.apply(&DensityMatrix::one(q(0))).unwrap();
        assert!((out.matrix() - CMatrix::identity(2, 2) * C64::new(0.5, 0.0)).norm() < 1e-15);
        let z = DenseOperator::new(vec![q(0)], Pauli::Z.matrix()).unwrap();
        assert!(phi.dual().apply(&z).unwrap().matrix().camax() < 1e-15);

        let phi2 = depolarizing_projector(vec![q(0), q(1)]).unwrap();
        let once = phi2.apply(&rho).unwrap();
        let twice = phi2.apply(&once).unwrap();
        assert!((once.matrix() - twice.matrix()).camax() < 1e-12);
        assert!(depolarizing_projector(vec![]).is_err());
    }

    #[test]
    fn random_channel_outputs_are_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..20 {
            let ch = random_channel(&[q(0), q(1)], &[q(0), q(1)], 3, &mut rng);
            let rho = random_density(&[q(1), q(0), q(2)], &mut rng);
            let out = ch.apply(&rho).unwrap();
            assert!((out.matrix().trace() - ONE).norm() < 1e-12);
            assert_eq!(out.support(), rho.support());
        }
    }

    #[test]
    fn unitary_dual_is_heisenberg_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u = haar_unitary(4, &mut rng);
        let ch = QuantumChannel::unitary(u.clone(), vec![q(0), q(1)]).unwrap();
        let o = random_operator(4, &mut rng);
        let op = DenseOperator::new(vec![q(0), q(1)], o.clone()).unwrap();
        let got = ch.dual().apply(&op).unwrap();
        assert!((got.matrix() - u.adjoint() * o * &u).norm() < 1e-12);
    }

    #[test]
    fn dual_of_append_is_weighted_partial_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let omega = random_density(&[q(5)], &mut rng);
        let ch = QuantumChannel::append_state(vec![q(0)], &omega).unwrap();
        let o = random_operator(4, &mut rng);
        let op = DenseOperator::new(vec![q(0), q(5)], o.clone()).unwrap();
        let got = ch.dual().apply(&op).unwrap();
        // Tr_5[(I (x) omega) O], qubit 5 is the high bit.
        let w = omega.matrix();
        let mut want = CMatrix::zeros(2, 2);
        for r in 0..2 {
            for c in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        want[(r, c)] += w[(a, b)] * o[(r + 2 * b, c + 2 * a)];
                    }
                }
            }
        }
        assert!((got.matrix() - want).norm() < 1e-12);
    }

    #[test]
    fn duality_holds_for_random_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..30 {
            let ch = random_channel(&[q(0), q(1)], &[q(2)], 4, &mut rng);
            let rho = random_density(&[q(0), q(1), q(3)], &mut rng);
            let o = DenseOperator::new(vec![q(3), q(2)], random_operator(4, &mut rng)).unwrap();
            let lhs = ch.apply(&rho).unwrap().expectation(&o).unwrap();
            let rhs = rho.expectation(&ch.dual().apply(&o).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
            assert!(ch.dual().unitality_error() < 1e-12);
        }
    }

    #[test]
    fn composition_and_trace_out() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let omega = random_density(&[q(1)], &mut rng);
        let u = haar_unitary(4, &mut rng);
        let prep = QuantumChannel::append_state(vec![q(0)], &omega).unwrap();
        let gate = QuantumChannel::unitary(u, vec![q(1), q(0)]).unwrap();
        let tr = QuantumChannel::trace_out(vec![q(0), q(1)], &[q(0)]).unwrap();
        let full = prep.then(&gate).unwrap().then(&tr).unwrap();
        assert_eq!(full.codomain(), &[q(1)]);
        let rho = random_density(&[q(0)], &mut rng);
        let step = tr.apply(&gate.apply(&prep.apply(&rho).unwrap()).unwrap()).unwrap();
        assert!((full.apply(&rho).unwrap().matrix() - step.matrix()).norm() < 1e-12);
        assert!(QuantumChannel::trace_out(vec![q(0)], &[q(3)]).is_err());
    }

    #[test]
    fn rejects_bad_kraus() {
        let k = CMatrix::identity(2, 2) * C64::new(0.9, 0.0);
        assert!(matches!(
            QuantumChannel::new(vec![k], vec![q(0)], vec![q(0)]),
            Err(Error::InvalidChannel(_))
        ));
        let rho = DensityMatrix::zero(q(1));
        let id = QuantumChannel::identity(vec![q(0)]);
        assert!(id.apply(&rho).is_err());
    }

    #[test]
    fn superoperator_convention() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let ch = random_channel(&[q(0)], &[q(0)], 2, &mut rng);
        let rho = random_density(&[q(0)], &mut rng);
        let v = nalgebra::DVector::from_column_slice(rho.matrix().as_slice());
        let out = ch.superoperator() * v;
        let want = ch.apply(&rho).unwrap();
        assert!((out - nalgebra::DVector::from_column_slice(want.matrix().as_slice())).norm() < 1e-12);
    }
}
