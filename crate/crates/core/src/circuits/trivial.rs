//! Product-state preparation: swap the bath row out, then rotate each bath
//! qubit into the next row's target state.

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::gate::{Gate, GateKind, LayeredCircuit};
use super::transition::{build_transition_map, Partition, TransitionMap};
use crate::error::{Error, Result};
use crate::quantum::{CMatrix, DensityMatrix, QubitId};

/// Unitary whose first column is the normalized `psi`.
pub fn preparation_unitary(psi: &DVector<C64>) -> Result<CMatrix> {
    if psi.len() != 2 {
        return Err(Error::InvalidState("single-qubit targets only".into()));
    }
    let n = psi.norm();
    if n == 0.0 {
        return Err(Error::InvalidState("zero target vector".into()));
    }
    let (a, b) = (psi[0] / n, psi[1] / n);
    Ok(CMatrix::from_row_slice(2, 2, &[a, -b.conj(), b, a.conj()]))
}

fn registers(lx: usize, t: usize) -> (Vec<QubitId>, Vec<QubitId>) {
    ((0..lx).map(QubitId::bath).collect(), (0..lx).map(|c| QubitId::system(t, c)).collect())
}

/// Transition `t` of the trivial family; `target` holds one single-qubit
/// vector per column, prepared on the bath for the next row.
pub fn trivial_state_transition(lx: usize, t: usize, target: &[DVector<C64>]) -> Result<TransitionMap> {
    if target.len() != lx {
        return Err(Error::InvalidState(format!("{} target factors for lx = {lx}", target.len())));
    }
    let (bath, system) = registers(lx, t);
    let swaps = bath.iter().zip(&system).map(|(b, s)| Gate::swap(*b, *s)).collect();
    let preps = bath
        .iter()
        .zip(target)
        .map(|(b, psi)| Gate::new(GateKind::Unitary1(preparation_unitary(psi)?), vec![*b]))
        .collect::<Result<Vec<_>>>()?;
    let omega_system = system.iter().map(|q| DensityMatrix::zero(*q)).collect();
    build_transition_map(
        LayeredCircuit::new(vec![swaps, preps])?,
        omega_system,
        Vec::new(),
        Partition { bath, system, sink: Vec::new() },
        t,
    )
}

/// Negative control: the system row is initialized but never swapped in, and
/// the bath only undergoes a fixed unitary (single-qubit rotations followed by
/// a brickwork of CNOTs).
pub fn no_swap_transition(lx: usize, t: usize, rotation: &[DVector<C64>]) -> Result<TransitionMap> {
    if rotation.len() != lx {
        return Err(Error::InvalidState(format!("{} rotation factors for lx = {lx}", rotation.len())));
    }
    let (bath, system) = registers(lx, t);
    let rot = bath
        .iter()
        .zip(rotation)
        .map(|(b, psi)| Gate::new(GateKind::Unitary1(preparation_unitary(psi)?), vec![*b]))
        .collect::<Result<Vec<_>>>()?;
    let mut layers = vec![rot];
    for parity in 0..2 {
        let layer: Vec<Gate> = (parity..lx.saturating_sub(1))
            .step_by(2)
            .map(|c| Gate::cnot(bath[c], bath[c + 1]))
            .collect();
        if !layer.is_empty() {
            layers.push(layer);
        }
    }
    let omega_system = system.iter().map(|q| DensityMatrix::zero(*q)).collect();
    build_transition_map(
        LayeredCircuit::new(layers)?,
        omega_system,
        Vec::new(),
        Partition { bath, system, sink: Vec::new() },
        t,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::random::{random_density, random_pure_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn preparation_unitary_is_unitary_with_target_column() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let psi = random_pure_vector(2, &mut rng);
            let u = preparation_unitary(&psi).unwrap();
            assert!((u.adjoint() * &u - CMatrix::identity(2, 2)).camax() < 1e-14);
            assert!((u.column(0) - &psi).norm() < 1e-14);
        }
        assert!(preparation_unitary(&DVector::zeros(2)).is_err());
    }

    #[test]
    fn zero_target_resets_bath_regardless_of_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let zero = DVector::from_vec(vec![crate::quantum::ONE, crate::quantum::ZERO]);
        let tm = trivial_state_transition(2, 1, &[zero.clone(), zero]).unwrap();
        let bath = [QubitId::bath(0), QubitId::bath(1)];
        for _ in 0..3 {
            let rho = random_density(&bath, &mut rng);
            let out = tm.apply(&rho, 13).unwrap().partial_trace(&bath).unwrap();
            let mut want = CMatrix::zeros(4, 4);
            want[(0, 0)] = crate::quantum::ONE;
            assert!((out.matrix() - want).camax() < 1e-14);
        }
    }
}
