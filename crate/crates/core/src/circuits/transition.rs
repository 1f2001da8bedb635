use std::collections::HashMap;

use num_complex::Complex64 as C64;

use super::gate::LayeredCircuit;
use super::noise::{noisy_state, NoiseSpec, NoisyGate};
use crate::error::{Error, Result};
use crate::quantum::kernel::DenseRegister;
use crate::quantum::qubit_check_distinct;
use crate::quantum::{CMatrix, DenseOperator, DensityMatrix, QuantumChannel, QubitId};

/// Bath, system and sink registers of one transition. Ancillas belong to the sink.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub bath: Vec<QubitId>,
    pub system: Vec<QubitId>,
    pub sink: Vec<QubitId>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Role {
    Bath,
    System,
    Sink,
}

/// Noise drawn for a transition: per-gate noisy channels paired with the
/// ideal gates, and the trace distances of the noisy initial states.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseRecord {
    pub spec: NoiseSpec,
    pub gates: Vec<Vec<NoisyGate>>,
    pub state_distances: Vec<f64>,
}

/// The map `rho -> Tr_sink[U(rho (x) omega_sink (x) omega_system)]` from the
/// bath to bath and system.
#[derive(Clone, Debug)]
pub struct TransitionMap {
    row: usize,
    partition: Partition,
    omega_system: Vec<DensityMatrix>,
    omega_sink: Vec<DensityMatrix>,
    circuit: LayeredCircuit,
    noise: Option<NoiseRecord>,
    roles: HashMap<QubitId, Role>,
}

/// Assembles and validates a transition map. `omega_system[i]` is the
/// single-qubit initial state of `partition.system[i]`, likewise for the sink.
pub fn build_transition_map(
    circuit: LayeredCircuit,
    omega_system: Vec<DensityMatrix>,
    omega_sink: Vec<DensityMatrix>,
    partition: Partition,
    row: usize,
) -> Result<TransitionMap> {
    let mut all = partition.bath.clone();
    all.extend_from_slice(&partition.system);
    all.extend_from_slice(&partition.sink);
    qubit_check_distinct(&all)
        .map_err(|_| Error::SupportMismatch("bath, system and sink registers overlap".into()))?;
    for (states, qubits, what) in [
        (&omega_system, &partition.system, "system"),
        (&omega_sink, &partition.sink, "sink"),
    ] {
        if states.len() != qubits.len() {
            return Err(Error::InvalidState(format!("{what} state has the wrong number of factors")));
        }
        for (s, q) in states.iter().zip(qubits) {
            if s.support() != [*q] {
                return Err(Error::InvalidState(format!("{what} factor for {q} has support {:?}", s.support())));
            }
        }
    }
    let mut roles = HashMap::new();
    for q in &partition.bath {
        roles.insert(*q, Role::Bath);
    }
    for q in &partition.system {
        roles.insert(*q, Role::System);
    }
    for q in &partition.sink {
        roles.insert(*q, Role::Sink);
    }
    if let Some(q) = circuit.qubits().into_iter().find(|q| !roles.contains_key(q)) {
        return Err(Error::InvalidCircuit(format!("gate acts on {q} outside the partition")));
    }
    Ok(TransitionMap { row, partition, omega_system, omega_sink, circuit, noise: None, roles })
}

impl TransitionMap {
    pub fn row(&self) -> usize {
        self.row
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn circuit(&self) -> &LayeredCircuit {
        &self.circuit
    }

    pub fn depth(&self) -> usize {
        self.circuit.depth()
    }

    pub fn omega_system(&self) -> &[DensityMatrix] {
        &self.omega_system
    }

    pub fn omega_sink(&self) -> &[DensityMatrix] {
        &self.omega_sink
    }

    pub fn noise(&self) -> Option<&NoiseRecord> {
        self.noise.as_ref()
    }

    pub fn is_noisy(&self) -> bool {
        self.noise.is_some()
    }

    fn omega(&self, q: &QubitId) -> Option<&DensityMatrix> {
        match self.roles.get(q)? {
            Role::System => self.partition.system.iter().position(|x| x == q).map(|i| &self.omega_system[i]),
            Role::Sink => self.partition.sink.iter().position(|x| x == q).map(|i| &self.omega_sink[i]),
            Role::Bath => None,
        }
    }

    /// Replaces every gate and initial state factor by its noisy version.
    /// Draws depend only on `(spec.seed, row, layer, gate)`.
    pub fn apply_noise(&self, spec: &NoiseSpec) -> Result<TransitionMap> {
        spec.validate()?;
        let gates = self
            .circuit
            .layers()
            .iter()
            .enumerate()
            .map(|(l, layer)| {
                layer
                    .iter()
                    .enumerate()
                    .map(|(i, g)| {
                        if spec.targets.gates {
                            NoisyGate::draw(g.matrix(), spec, &[self.row as u64, l as u64, i as u64])
                        } else {
                            NoisyGate::exact(g.matrix())
                        }
                    })
                    .collect()
            })
            .collect();
        let mut distances = Vec::new();
        let mut noisy_factors = |states: &[DensityMatrix]| -> Result<Vec<DensityMatrix>> {
            states
                .iter()
                .map(|s| {
                    if !spec.targets.states {
                        return Ok(s.clone());
                    }
                    let (n, d) = noisy_state(s, spec)?;
                    distances.push(d);
                    Ok(n)
                })
                .collect()
        };
        let omega_system = noisy_factors(&self.omega_system)?;
        let omega_sink = noisy_factors(&self.omega_sink)?;
        Ok(TransitionMap {
            omega_system,
            omega_sink,
            noise: Some(NoiseRecord { spec: *spec, gates, state_distances: distances }),
            ..self.clone()
        })
    }

    fn apply_gate(&self, reg: &mut DenseRegister, at: (usize, usize), dual: bool) -> Result<()> {
        let g = self.circuit.gate(at);
        let pos = reg.positions(&g.qubits)?;
        match &self.noise {
            Some(rec) => {
                let ng = &rec.gates[at.0][at.1];
                if dual { ng.apply_dual(reg, &pos) } else { ng.apply_forward(reg, &pos) }
            }
            None => {
                let u = g.matrix();
                if dual { reg.heisenberg(&pos, &u) } else { reg.conjugate(&pos, &u) }
            }
        }
        Ok(())
    }

    fn check_ceiling(reg: &DenseRegister, ceiling: usize) -> Result<()> {
        if reg.n() + 1 > ceiling {
            return Err(Error::DenseCeiling { needed: reg.n() + 1, ceiling });
        }
        Ok(())
    }

    /// Schrödinger step on a register holding the bath (and possibly other
    /// qubits). System qubits for which `retain` holds stay in the register;
    /// everything else introduced here is traced out after its last use.
    pub(crate) fn forward(
        &self,
        reg: &mut DenseRegister,
        retain: &dyn Fn(&QubitId) -> bool,
        ceiling: usize,
    ) -> Result<()> {
        if let Some(q) = self.partition.bath.iter().find(|q| reg.pos(q).is_none()) {
            return Err(Error::SupportMismatch(format!("bath qubit {q} missing from the register")));
        }
        let order = self.circuit.simulation_order(&reg.qubits);
        let mut last = HashMap::new();
        for (k, at) in order.iter().enumerate() {
            for q in &self.circuit.gate(*at).qubits {
                last.insert(*q, k);
            }
        }
        for (k, at) in order.iter().enumerate() {
            let g = self.circuit.gate(*at);
            for q in &g.qubits {
                if reg.pos(q).is_none() {
                    let omega = self
                        .omega(q)
                        .ok_or_else(|| Error::SupportMismatch(format!("{q} has no initial state")))?;
                    Self::check_ceiling(reg, ceiling)?;
                    reg.push(*q, omega.matrix());
                }
            }
            self.apply_gate(reg, *at, false)?;
            for q in &g.qubits {
                let discard = match self.roles[q] {
                    Role::Sink => true,
                    Role::System => !retain(q),
                    Role::Bath => false,
                };
                if discard && last[q] == k {
                    reg.trace_out(q)?;
                }
            }
        }
        for (q, omega) in self.partition.system.iter().zip(&self.omega_system) {
            if retain(q) && reg.pos(q).is_none() {
                Self::check_ceiling(reg, ceiling)?;
                reg.push(*q, omega.matrix());
            }
        }
        Ok(())
    }

    /// Heisenberg step: the register holds an operator on bath, system and
    /// possibly unrelated qubits; afterwards system and sink legs are gone.
    pub(crate) fn dual(&self, reg: &mut DenseRegister, ceiling: usize) -> Result<()> {
        if let Some(q) = reg.qubits.iter().find(|q| self.roles.get(q) == Some(&Role::Sink)) {
            return Err(Error::SupportMismatch(format!("operator acts on sink qubit {q}")));
        }
        let mut order = self.circuit.simulation_order(&self.partition.bath);
        order.reverse();
        let mut first = HashMap::new();
        for (k, at) in order.iter().enumerate() {
            for q in &self.circuit.gate(*at).qubits {
                first.insert(*q, k);
            }
        }
        let id = CMatrix::identity(2, 2);
        for (k, at) in order.iter().enumerate() {
            let g = self.circuit.gate(*at);
            for q in &g.qubits {
                if reg.pos(q).is_none() {
                    Self::check_ceiling(reg, ceiling)?;
                    reg.push(*q, &id);
                }
            }
            self.apply_gate(reg, *at, true)?;
            for q in &g.qubits {
                if first[q] == k && self.roles[q] != Role::Bath {
                    let p = reg.pos(q).expect("just used");
                    reg.contract(p, self.omega(q).expect("non-bath").matrix());
                }
            }
        }
        for (q, omega) in self.partition.system.iter().zip(&self.omega_system) {
            if let Some(p) = reg.pos(q) {
                reg.contract(p, omega.matrix());
            }
        }
        Ok(())
    }

    /// Applies the map to a state on (at least) the bath; the result carries
    /// the system row after the input's legs.
    pub fn apply(&self, rho: &DensityMatrix, ceiling: usize) -> Result<DensityMatrix> {
        let mut reg = DenseRegister::from_matrix(rho.support().to_vec(), rho.matrix());
        self.forward(&mut reg, &|_| true, ceiling)?;
        let m = reg.to_matrix();
        let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        DensityMatrix::new(reg.qubits.clone(), m)
    }

    /// `T^*(O)` for an operator on bath and system; the result lives on the bath
    /// plus any unrelated legs of `op`.
    pub fn pullback(&self, op: &DenseOperator, ceiling: usize) -> Result<DenseOperator> {
        let mut reg = DenseRegister::from_matrix(op.support().to_vec(), op.matrix());
        self.dual(&mut reg, ceiling)?;
        DenseOperator::new(reg.qubits.clone(), reg.to_matrix())
    }

    /// Kraus form from bath to `bath ++ system`, assembled from the Choi matrix.
    pub fn to_channel(&self, ceiling: usize) -> Result<QuantumChannel> {
        let bath = self.partition.bath.clone();
        let mut codomain = bath.clone();
        codomain.extend_from_slice(&self.partition.system);
        QuantumChannel::from_action(bath.clone(), codomain.clone(), |e| {
            let mut reg = DenseRegister::from_matrix(bath.clone(), e);
            self.forward(&mut reg, &|_| true, ceiling)?;
            reg.permute(&codomain)?;
            Ok(reg.to_matrix())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::gate::{Gate, GateKind};
    use crate::quantum::random::{haar_unitary, random_density, random_operator};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const CEIL: usize = 13;

    fn b(i: usize) -> QubitId {
        QubitId::bath(i)
    }
    fn s(i: usize) -> QubitId {
        QubitId::system(1, i)
    }
    fn k(i: usize) -> QubitId {
        QubitId::sink(1, i)
    }

    fn small_map(circuit: LayeredCircuit) -> TransitionMap {
        build_transition_map(
            circuit,
            vec![DensityMatrix::zero(s(0))],
            vec![DensityMatrix::plus(k(0))],
            Partition { bath: vec![b(0)], system: vec![s(0)], sink: vec![k(0)] },
            1,
        )
        .unwrap()
    }

    #[test]
    fn identity_circuit_appends_system_state() {
        let tm = small_map(LayeredCircuit::empty());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rho = random_density(&[b(0)], &mut rng);
        let out = tm.apply(&rho, CEIL).unwrap();
        let want = rho.tensor(&DensityMatrix::zero(s(0)));
        assert!((out.matrix() - want.matrix()).camax() < 1e-14);
    }

    #[test]
    fn swap_resets_bath_and_emits_its_state() {
        let tm = small_map(LayeredCircuit::new(vec![vec![Gate::swap(b(0), s(0))]]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(&[b(0)], &mut rng);
        let out = tm.apply(&rho, CEIL).unwrap();
        assert!((out.partial_trace(&[b(0)]).unwrap().matrix() - DensityMatrix::zero(b(0)).matrix()).camax() < 1e-14);
        assert!((out.partial_trace(&[s(0)]).unwrap().matrix() - rho.matrix()).camax() < 1e-14);
    }

    #[test]
    fn random_circuit_matches_step_by_step_channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..5 {
            let u1 = haar_unitary(4, &mut rng);
            let u2 = haar_unitary(4, &mut rng);
            let circuit = LayeredCircuit::new(vec![
                vec![Gate::new(GateKind::Unitary2(u1.clone()), vec![b(0), s(0)]).unwrap()],
                vec![Gate::new(GateKind::Unitary2(u2.clone()), vec![k(0), b(0)]).unwrap()],
            ])
            .unwrap();
            let tm = small_map(circuit);
            let rho = random_density(&[b(0)], &mut rng);
            // Oracle: explicit composition of elementary channels.
            let step = QuantumChannel::append_state(vec![b(0)], &DensityMatrix::plus(k(0))).unwrap();
            let step = step.then(&QuantumChannel::append_state(vec![b(0), k(0)], &DensityMatrix::zero(s(0))).unwrap()).unwrap();
            let step = step.then(&QuantumChannel::unitary(u1, vec![b(0), s(0)]).unwrap()).unwrap();
            let step = step.then(&QuantumChannel::unitary(u2, vec![k(0), b(0)]).unwrap()).unwrap();
            let step = step.then(&QuantumChannel::trace_out(vec![b(0), k(0), s(0)], &[k(0)]).unwrap()).unwrap();
            let want = step.apply(&rho).unwrap().permuted(&[b(0), s(0)]).unwrap();
            let got = tm.apply(&rho, CEIL).unwrap().permuted(&[b(0), s(0)]).unwrap();
            assert!((got.matrix() - want.matrix()).camax() < 1e-12);
            let ch = tm.to_channel(CEIL).unwrap();
            assert!(ch.completeness_error() < 1e-12);
            assert!((ch.apply(&rho).unwrap().matrix() - want.matrix()).camax() < 1e-12);

            // Duality between the register paths.
            let o = DenseOperator::new(vec![b(0), s(0)], random_operator(4, &mut rng)).unwrap();
            let lhs = got.expectation(&o).unwrap();
            let rhs = rho.expectation(&tm.pullback(&o, CEIL).unwrap()).unwrap();
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn rejects_bad_partitions() {
        let p = Partition { bath: vec![b(0)], system: vec![b(0)], sink: vec![] };
        assert!(build_transition_map(LayeredCircuit::empty(), vec![DensityMatrix::zero(b(0))], vec![], p, 1).is_err());
        let p = Partition { bath: vec![b(0)], system: vec![s(0)], sink: vec![] };
        let c = LayeredCircuit::new(vec![vec![Gate::swap(b(0), b(1))]]).unwrap();
        assert!(build_transition_map(c, vec![DensityMatrix::zero(s(0))], vec![], p, 1).is_err());
    }

    #[test]
    fn ceiling_is_enforced() {
        let tm = small_map(LayeredCircuit::new(vec![vec![Gate::swap(b(0), s(0))], vec![Gate::cnot(b(0), k(0))]]).unwrap());
        let rho = DensityMatrix::zero(b(0));
        assert!(matches!(tm.apply(&rho, 1), Err(Error::DenseCeiling { .. })));
    }

    #[test]
    fn zero_noise_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = haar_unitary(4, &mut rng);
        let tm = small_map(LayeredCircuit::new(vec![vec![Gate::new(GateKind::Unitary2(u), vec![b(0), s(0)]).unwrap()]]).unwrap());
        let noisy = tm.apply_noise(&NoiseSpec::new(0.0)).unwrap();
        let a = tm.to_channel(CEIL).unwrap();
        let b2 = noisy.to_channel(CEIL).unwrap();
        assert!((a.superoperator() - b2.superoperator()).norm() < 1e-12);
    }
}
