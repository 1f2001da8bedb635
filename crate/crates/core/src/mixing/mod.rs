//! Contraction of the bath dynamics at a length scale: the Heisenberg bath
//! map on a segment of the bath, and a certified interval for
//! `sup ||(id - Phi) T^*(O)||` over `||O|| <= 1`.

mod fit;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{out_of_range, Error, Result};
use crate::fcs::PreparationPlan;
use crate::quantum::kernel::DenseRegister;
use crate::quantum::{matrix_operator_norm, pauli_basis_matrix, CMatrix, QubitId};

pub use fit::{fit_mixing, predicted_bound, EtaPoint, MixingFit, MixingReport};

/// `O -> T^*_{[t, t']}(O)` for `O` on `ball`, in the normalized Pauli basis:
/// column `j` holds the coefficients `Tr[Q T^*(P_j)] / d` over Pauli strings
/// `Q` on the whole bath.
#[derive(Clone, Debug)]
pub struct BathSuperoperator {
    pub matrix: DMatrix<f64>,
    pub window: (usize, usize),
    pub ball: Vec<QubitId>,
    pub bath: Vec<QubitId>,
}

fn basis_coefficients(m: &CMatrix, n: usize) -> DVector<C64> {
    let d = (1usize << n) as f64;
    DVector::from_iterator(
        1 << (2 * n),
        (0..1usize << (2 * n)).map(|i| (pauli_basis_matrix(n, i) * m).trace() / d),
    )
}

fn from_coefficients(c: &DVector<C64>, n: usize) -> CMatrix {
    let d = 1usize << n;
    let mut m = CMatrix::zeros(d, d);
    for (i, v) in c.iter().enumerate() {
        if v.norm() > 0.0 {
            m += pauli_basis_matrix(n, i) * *v;
        }
    }
    m
}

/// Builds the bath map for transitions `t..=t_prime`; `t_prime = t - 1` is the
/// empty window.
pub fn bath_superoperator(plan: &PreparationPlan, t: usize, t_prime: usize, ball: &[QubitId]) -> Result<BathSuperoperator> {
    let bath = plan.bath().to_vec();
    if t == 0 || t_prime + 1 < t || t_prime > plan.ly() {
        return Err(out_of_range("window end", t_prime as f64, (t.max(1) - 1) as f64, plan.ly() as f64));
    }
    if ball.is_empty() || ball.iter().any(|q| !bath.contains(q)) {
        return Err(Error::SupportMismatch("ball must be a nonempty subset of the bath".into()));
    }
    let nb = bath.len();
    if nb > plan.ceiling() {
        return Err(Error::DenseCeiling { needed: nb, ceiling: plan.ceiling() });
    }
    let k = ball.len();
    let cols: Vec<DVector<f64>> = (0..1usize << (2 * k))
        .into_par_iter()
        .map(|j| -> Result<DVector<f64>> {
            let mut reg = DenseRegister::from_matrix(ball.to_vec(), &pauli_basis_matrix(k, j));
            for tm in plan.transitions()[t - 1..t_prime].iter().rev() {
                tm.dual(&mut reg, plan.ceiling())?;
            }
            if let Some(q) = reg.qubits.iter().find(|q| !bath.contains(q)) {
                return Err(Error::SupportGrowth(format!("pulled-back operator reaches {q}")));
            }
            for q in &bath {
                if reg.pos(q).is_none() {
                    reg.push(*q, &CMatrix::identity(2, 2));
                }
            }
            reg.permute(&bath)?;
            Ok(basis_coefficients(&reg.to_matrix(), nb).map(|c| c.re))
        })
        .collect::<Result<_>>()?;
    let mut matrix = DMatrix::zeros(1 << (2 * nb), cols.len());
    for (j, c) in cols.iter().enumerate() {
        matrix.set_column(j, c);
    }
    Ok(BathSuperoperator { matrix, window: (t, t_prime), ball: ball.to_vec(), bath })
}

impl BathSuperoperator {
    /// `||T^*(I) - I||` in coefficient space.
    pub fn unitality_error(&self) -> f64 {
        let mut col = self.matrix.column(0).clone_owned();
        col[0] -= 1.0;
        col.amax()
    }

    /// Window length `t' - t + 1`.
    pub fn elapsed(&self) -> usize {
        self.window.1 + 1 - self.window.0
    }

    /// `(id - Phi) T^*` in coefficient space: the identity row removed.
    fn traceless_part(&self) -> DMatrix<f64> {
        let mut m = self.matrix.clone();
        m.row_mut(0).fill(0.0);
        m
    }
}

/// Certified interval for the contraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaInterval {
    pub lower: f64,
    pub upper: f64,
    /// Best value found with Hermitian witnesses only.
    pub hermitian_lower: f64,
}

/// Settings for the witness search.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AscentOptions {
    pub restarts: usize,
    pub iterations: usize,
    pub step: f64,
    pub seed: u64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        Self { restarts: 64, iterations: 200, step: 0.1, seed: 0 }
    }
}

pub fn eta(sop: &BathSuperoperator) -> EtaInterval {
    eta_with(sop, &AscentOptions::default())
}

pub fn eta_with(sop: &BathSuperoperator, opts: &AscentOptions) -> EtaInterval {
    let m = sop.traceless_part();
    let k = sop.ball.len();
    let nb = sop.bath.len();
    let images: Vec<CMatrix> =
        (0..m.ncols()).map(|j| from_coefficients(&m.column(j).map(|v| C64::new(v, 0.0)), nb)).collect();
    let lin = Linear { k, paulis: (0..images.len()).map(|j| pauli_basis_matrix(k, j)).collect(), images };

    // Pauli witnesses have unit norm
    let pauli_best = lin.images.iter().map(matrix_operator_norm).fold(0.0, f64::max);

    let runs: Vec<(bool, f64)> = (0..opts.restarts)
        .into_par_iter()
        .map(|r| {
            let hermitian = r % 2 == 0;
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (r as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            (hermitian, lin.ascend(hermitian, opts, &mut rng))
        })
        .collect();
    let best = |herm_only: bool| runs.iter().filter(|r| !herm_only || r.0).map(|r| r.1).fold(0.0, f64::max);
    let lower = pauli_best.max(best(false));
    let hermitian_lower = pauli_best.max(best(true));

    // ||X|| <= ||X||_2 = sqrt(d_B) |x|, and |o| = ||O||_2 / sqrt(d_A) <= ||O||
    let sigma = m.singular_values().max();
    let d = (1u64 << nb) as f64;
    let upper = (d.sqrt() * sigma).min(2.0).max(lower);
    EtaInterval { lower, upper, hermitian_lower }
}

/// `O -> sum_j Tr[P_j O] / d_A * images[j]`.
struct Linear {
    k: usize,
    paulis: Vec<CMatrix>,
    images: Vec<CMatrix>,
}

impl Linear {
    fn coefficients(&self, o: &CMatrix) -> Vec<C64> {
        let d = (1usize << self.k) as f64;
        self.paulis.iter().map(|p| (p * o).trace() / d).collect()
    }

    fn apply(&self, o: &CMatrix) -> CMatrix {
        let n = self.images[0].nrows();
        let mut x = CMatrix::zeros(n, n);
        for (c, img) in self.coefficients(o).into_iter().zip(&self.images) {
            if c.norm() > 0.0 {
                x += img * c;
            }
        }
        x
    }

    /// Direction of steepest ascent of `Re Tr[G^dag L(O)]` in the Frobenius inner product.
    fn adjoint(&self, g: &CMatrix) -> CMatrix {
        let d = 1usize << self.k;
        let mut a = CMatrix::zeros(d, d);
        for (p, img) in self.paulis.iter().zip(&self.images) {
            let w = g.dotc(img);
            a += p * w.conj();
        }
        a / C64::new(d as f64, 0.0)
    }

    /// Projected gradient ascent of `||L(O)||` over `||O|| <= 1`.
    fn ascend(&self, hermitian: bool, opts: &AscentOptions, rng: &mut ChaCha8Rng) -> f64 {
        let d = 1usize << self.k;
        let mut o = CMatrix::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        if hermitian {
            o = hermitize(&o);
        }
        o = normalize(o);
        let mut best = 0.0f64;
        for _ in 0..opts.iterations {
            let x = self.apply(&o);
            let svd = x.svd(true, true);
            let i = svd.singular_values.imax();
            best = best.max(svd.singular_values[i]);
            let (Some(u), Some(v_t)) = (svd.u, svd.v_t) else { break };
            // the top singular pair gives a supergradient of the operator norm
            let g = u.column(i) * v_t.row(i);
            let mut next = &o + self.adjoint(&g) * C64::new(opts.step, 0.0);
            if hermitian {
                next = hermitize(&next);
            }
            o = normalize(next);
        }
        best.max(matrix_operator_norm(&self.apply(&o)))
    }
}

fn hermitize(o: &CMatrix) -> CMatrix {
    (o + o.adjoint()) * C64::new(0.5, 0.0)
}

fn normalize(o: CMatrix) -> CMatrix {
    let n = matrix_operator_norm(&o);
    if n > 0.0 { o / C64::new(n, 0.0) } else { o }
}

/// All contiguous bath segments of length `ell`.
pub fn segments(bath: &[QubitId], ell: usize) -> Vec<Vec<QubitId>> {
    if ell == 0 || ell > bath.len() {
        return Vec::new();
    }
    bath.windows(ell).map(|w| w.to_vec()).collect()
}

/// `eta^ell` of the window `t..=t_prime`: the worst segment of length `ell`.
pub fn eta_at_scale(plan: &PreparationPlan, t: usize, t_prime: usize, ell: usize, opts: &AscentOptions) -> Result<EtaInterval> {
    let segs = segments(plan.bath(), ell);
    if segs.is_empty() {
        return Err(out_of_range("ell", ell as f64, 1.0, plan.bath().len() as f64));
    }
    let mut out = EtaInterval { lower: 0.0, upper: 0.0, hermitian_lower: 0.0 };
    for seg in segs {
        let e = eta_with(&bath_superoperator(plan, t, t_prime, &seg)?, opts);
        out.lower = out.lower.max(e.lower);
        out.upper = out.upper.max(e.upper);
        out.hermitian_lower = out.hermitian_lower.max(e.hermitian_lower);
    }
    Ok(out)
}

/// `eta^ell` for windows `t0..=t0 + len - 1`, `len = 1..=max_len`, and every `ell` given.
pub fn eta_series(plan: &PreparationPlan, t0: usize, max_len: usize, ells: &[usize], opts: &AscentOptions) -> Result<Vec<EtaPoint>> {
    let mut out = Vec::new();
    for &ell in ells {
        for len in 1..=max_len {
            let e = eta_at_scale(plan, t0, t0 + len - 1, ell, opts)?;
            out.push(EtaPoint { ell, elapsed: len, lower: e.lower, upper: e.upper });
        }
    }
    Ok(out)
}
