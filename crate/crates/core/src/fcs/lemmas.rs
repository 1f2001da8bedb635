//! Numerical forms of the perturbation and locality bounds.

use std::collections::BTreeSet;

use crate::circuits::{noisy_pauli, NoiseSpec, TransitionMap};
use crate::error::{Error, Result};
use crate::locality::InteractionGraph;
use crate::quantum::{DenseOperator, DensityMatrix, PauliString, QubitId};

/// Observed quantity against its bound.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// `|Tr[(rho - rho~) O]|` against `eps ||O|| |Supp(O)|` for product states,
/// where `eps` is the largest factor trace distance on the support of `O`.
pub fn product_perturbation_check(
    rho: &[DensityMatrix],
    rho_noisy: &[DensityMatrix],
    op: &DenseOperator,
) -> Result<BoundCheck> {
    if rho.len() != rho_noisy.len() || rho.iter().zip(rho_noisy).any(|(a, b)| a.support() != b.support()) {
        return Err(Error::SupportMismatch("states are not paired factor by factor".into()));
    }
    let mut eps: f64 = 0.0;
    for (a, b) in rho.iter().zip(rho_noisy) {
        if a.support().iter().any(|q| op.support().contains(q)) {
            eps = eps.max(a.as_operator().sub(b.as_operator()).trace_norm());
        }
    }
    let support = op.support().to_vec();
    let reduce = |factors: &[DensityMatrix]| -> Result<DensityMatrix> {
        let used: Vec<DensityMatrix> =
            factors.iter().filter(|f| f.support().iter().any(|q| support.contains(q))).cloned().collect();
        DensityMatrix::product(&used)
    };
    let (r, rn) = (reduce(rho)?, reduce(rho_noisy)?);
    let lhs = (r.expectation(op)? - rn.expectation(op)?).norm();
    Ok(BoundCheck { lhs, rhs: eps * op.operator_norm() * op.support().len() as f64 })
}

/// `||Tr_X[(omega - omega~) O]||` against `eps ||O|| |Supp(O)|`, where `X` is
/// the support of the product state and the remaining legs of `O` stay open.
pub fn partial_perturbation_check(
    omega: &[DensityMatrix],
    omega_noisy: &[DensityMatrix],
    op: &DenseOperator,
) -> Result<BoundCheck> {
    if omega.len() != omega_noisy.len() || omega.iter().zip(omega_noisy).any(|(a, b)| a.support() != b.support()) {
        return Err(Error::SupportMismatch("states are not paired factor by factor".into()));
    }
    let used: Vec<usize> =
        (0..omega.len()).filter(|&i| omega[i].support().iter().any(|q| op.support().contains(q))).collect();
    if used.is_empty() {
        return Ok(BoundCheck { lhs: 0.0, rhs: 0.0 });
    }
    let eps = used
        .iter()
        .map(|&i| omega[i].as_operator().sub(omega_noisy[i].as_operator()).trace_norm())
        .fold(0.0, f64::max);
    let pick = |f: &[DensityMatrix]| DensityMatrix::product(&used.iter().map(|&i| f[i].clone()).collect::<Vec<_>>());
    let diff = pick(omega)?.as_operator().sub(pick(omega_noisy)?.as_operator());
    let traced: Vec<QubitId> = diff.support().to_vec();
    let open: Vec<QubitId> = op.support().iter().filter(|q| !traced.contains(q)).copied().collect();
    let lhs = diff.mul(op).partial_trace(&open)?.operator_norm();
    Ok(BoundCheck { lhs, rhs: eps * op.operator_norm() * op.support().len() as f64 })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportCheck {
    pub actual: BTreeSet<QubitId>,
    pub predicted: BTreeSet<QubitId>,
}

impl SupportCheck {
    pub fn holds(&self) -> bool {
        self.actual.is_subset(&self.predicted)
    }
}

/// Numerical support of `T^*(O)` against the light cone of `Supp(O)` of
/// radius equal to the circuit depth.
pub fn support_growth_check(
    tm: &TransitionMap,
    op: &DenseOperator,
    graph: &InteractionGraph,
    ceiling: usize,
) -> Result<SupportCheck> {
    let pulled = tm.pullback(op, ceiling)?;
    let actual = pulled.numerical_support(1e-10).into_iter().collect();
    let support = op.support().iter().copied().collect();
    let predicted = graph.grow_support(&support, tm.depth())?;
    Ok(SupportCheck { actual, predicted })
}

/// `||T^*(O) - T~^*(O)||` in operator norm.
pub fn dual_deviation(ideal: &TransitionMap, noisy: &TransitionMap, op: &DenseOperator, ceiling: usize) -> Result<f64> {
    let a = ideal.pullback(op, ceiling)?;
    let b = noisy.pullback(op, ceiling)?;
    Ok(a.sub(&b).operator_norm())
}

/// `||O - O~||` against `|Supp(O)| eps`.
pub fn noisy_pauli_check(p: &PauliString, spec: &NoiseSpec) -> Result<BoundCheck> {
    let noisy = noisy_pauli(p, spec)?;
    let lhs = p.to_operator().sub(&noisy).operator_norm();
    Ok(BoundCheck { lhs, rhs: p.weight() as f64 * spec.epsilon })
}
