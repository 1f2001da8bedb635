//! Random operators, states and channels for randomized checks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{DensityMatrix, QuantumChannel, QubitId};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn random_operator<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |_, _| gaussian(rng))
}

pub fn random_rect<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let g = random_operator(dim, rng);
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Haar-distributed unitary via QR with the phase correction of Mezzadri.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<C64> {
    let qr = random_operator(dim, rng).qr();
    let (q, r) = qr.unpack();
    let phases = DVector::from_fn(dim, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) }
    });
    q * DMatrix::from_diagonal(&phases)
}

pub fn random_pure_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<C64> {
    let v = DVector::from_fn(dim, |_, _| gaussian(rng));
    let n = v.norm();
    v / C64::new(n, 0.0)
}

/// Full-rank mixed state from the Ginibre ensemble.
pub fn random_density<R: Rng + ?Sized>(support: &[QubitId], rng: &mut R) -> DensityMatrix {
    let d = 1 << support.len();
    let g = random_operator(d, rng);
    let mut rho = &g * g.adjoint();
    let tr = rho.trace();
    rho /= tr;
    DensityMatrix::new(support.to_vec(), hermitize(rho)).expect("Ginibre state is valid")
}

/// Product of independent random single-qubit states.
pub fn random_product_density<R: Rng + ?Sized>(support: &[QubitId], rng: &mut R) -> DensityMatrix {
    let mut it = support.iter();
    let first = it.next().expect("nonempty support");
    let mut rho = random_density(std::slice::from_ref(first), rng);
    for q in it {
        rho = rho.tensor(&random_density(std::slice::from_ref(q), rng));
    }
    rho
}

/// Random channel with `n_kraus` Kraus operators from a random isometry.
///
/// Panics unless `n_kraus * 2^|codomain| >= 2^|domain|`; fewer Kraus
/// operators cannot preserve the trace.
pub fn random_channel<R: Rng + ?Sized>(
    domain: &[QubitId],
    codomain: &[QubitId],
    n_kraus: usize,
    rng: &mut R,
) -> QuantumChannel {
    let dd = 1 << domain.len();
    let dc = 1 << codomain.len();
    assert!(n_kraus * dc >= dd, "{n_kraus} Kraus operators cannot map dimension {dd} to {dc} trace-preservingly");
    let g = random_rect(n_kraus * dc, dd, rng);
    let v = &g * inverse_sqrt_psd(&(g.adjoint() * &g));
    let kraus = (0..n_kraus)
        .map(|k| v.rows(k * dc, dc).into_owned())
        .collect();
    QuantumChannel::new(kraus, domain.to_vec(), codomain.to_vec())
        .expect("isometry gives a trace-preserving channel")
}

fn inverse_sqrt_psd(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = hermitize(m.clone()).symmetric_eigen();
    let inv = eig.eigenvalues.map(|l| C64::new(1.0 / l.sqrt(), 0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.adjoint()
}

pub(crate) fn hermitize(m: DMatrix<C64>) -> DMatrix<C64> {
    (&m + m.adjoint()) * C64::new(0.5, 0.0)
}
