//! Layered circuits, transition maps, the surface-code and trivial-state
//! families, certified noise and the shared circuit text format.

mod gate;
pub mod lattice;
mod noise;
pub mod surface;
pub mod text;
mod transition;
pub mod trivial;

pub use gate::{Gate, GateKind, LayeredCircuit, UNITARY_TOL};
pub use lattice::{Generator, StabilizerKind, SurfaceCodeLattice};
pub use noise::{
    noisy_pauli, noisy_pauli_factor, noisy_state, GateNoise, MeasurementNoise, NoiseAction, NoiseSpec, NoiseTargets,
    NoisyGate, NoisyGateKind, StateNoise,
};
pub use surface::{surface_code_transition, surface_code_transition_with, StabilizerOrder};
pub use text::{export_preparation, export_transition, parse_circuit, CircuitOp, InitBasis, ParsedCircuit};
pub use transition::{build_transition_map, NoiseRecord, Partition, TransitionMap};
pub use trivial::{no_swap_transition, preparation_unitary, trivial_state_transition};

/// `tm` with every gate and initial state replaced by its noisy counterpart.
pub fn apply_noise(tm: &TransitionMap, spec: &NoiseSpec) -> crate::Result<TransitionMap> {
    tm.apply_noise(spec)
}
