//! Dense operators, states and channels on explicit qubit supports.

mod channel;
pub(crate) mod kernel;
mod operator;
mod pauli;
mod qubit;
pub mod random;

pub use channel::{apply_channel, depolarizing_projector, dual_channel, DualChannel, QuantumChannel, KRAUS_TOL};
pub use operator::{CMatrix, DenseOperator, DensityMatrix, STATE_TOL};
pub(crate) use operator::{matrix_operator_norm, real_part, ONE, ZERO};
pub use pauli::{pauli_basis_matrix, Pauli, PauliString, Phase};
pub use qubit::{QubitId, Register};
pub(crate) use qubit::check_distinct as qubit_check_distinct;

/// `op (x) I`, legs ordered as `target`.
pub fn embed(op: &DenseOperator, target: &[QubitId]) -> crate::Result<DenseOperator> {
    op.embed(target)
}

pub fn partial_trace(op: &DenseOperator, keep: &[QubitId]) -> crate::Result<DenseOperator> {
    op.partial_trace(keep)
}

pub fn operator_norm(op: &DenseOperator) -> f64 {
    op.operator_norm()
}

pub fn trace_norm(op: &DenseOperator) -> f64 {
    op.trace_norm()
}
