use std::collections::{HashMap, HashSet};
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::quantum::{CMatrix, QubitId, ONE, ZERO};

/// Unitarity tolerance for gate matrices.
pub const UNITARY_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub enum GateKind {
    /// Qubits are `[control, target]`.
    Cnot,
    Swap,
    H,
    S,
    X,
    Z,
    /// Arbitrary single-qubit unitary, e.g. a state preparation.
    Unitary1(CMatrix),
    /// Arbitrary two-qubit unitary over `[q0, q1]` (q0 is the low bit).
    Unitary2(CMatrix),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::Cnot => "CNOT",
            GateKind::Swap => "SWAP",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::Unitary1(_) => "U1",
            GateKind::Unitary2(_) => "U2",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Swap | GateKind::Unitary2(_) => 2,
            _ => 1,
        }
    }

    pub fn is_clifford(&self) -> bool {
        !matches!(self, GateKind::Unitary1(_) | GateKind::Unitary2(_))
    }

    pub fn matrix(&self) -> CMatrix {
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            GateKind::Cnot => {
                // |c t> at index c + 2t; flips t when c = 1.
                let mut m = CMatrix::zeros(4, 4);
                m[(0, 0)] = ONE;
                m[(2, 2)] = ONE;
                m[(3, 1)] = ONE;
                m[(1, 3)] = ONE;
                m
            }
            GateKind::Swap => {
                let mut m = CMatrix::zeros(4, 4);
                m[(0, 0)] = ONE;
                m[(3, 3)] = ONE;
                m[(1, 2)] = ONE;
                m[(2, 1)] = ONE;
                m
            }
            GateKind::H => CMatrix::from_row_slice(2, 2, &[h, h, h, -h]),
            GateKind::S => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, C64::new(0.0, 1.0)]),
            GateKind::X => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            GateKind::Z => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
            GateKind::Unitary1(m) | GateKind::Unitary2(m) => m.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<QubitId>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: Vec<QubitId>) -> Result<Self> {
        if qubits.len() != kind.arity() {
            return Err(Error::InvalidCircuit(format!("{} takes {} qubits", kind.name(), kind.arity())));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return Err(Error::InvalidCircuit(format!("{} on a repeated qubit", kind.name())));
        }
        let m = kind.matrix();
        let d = 1 << qubits.len();
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::InvalidCircuit(format!("{} matrix has the wrong shape", kind.name())));
        }
        let err = (m.adjoint() * &m - CMatrix::identity(d, d)).camax();
        if err > UNITARY_TOL {
            return Err(Error::InvalidCircuit(format!("{} is not unitary ({err:e})", kind.name())));
        }
        Ok(Self { kind, qubits })
    }

    pub fn cnot(control: QubitId, target: QubitId) -> Self {
        Self::new(GateKind::Cnot, vec![control, target]).expect("distinct qubits")
    }

    pub fn swap(a: QubitId, b: QubitId) -> Self {
        Self::new(GateKind::Swap, vec![a, b]).expect("distinct qubits")
    }

    pub fn single(kind: GateKind, q: QubitId) -> Result<Self> {
        Self::new(kind, vec![q])
    }

    pub fn matrix(&self) -> CMatrix {
        self.kind.matrix()
    }
}

/// Layers of gates with pairwise disjoint supports inside each layer.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LayeredCircuit {
    layers: Vec<Vec<Gate>>,
}

impl LayeredCircuit {
    pub fn new(layers: Vec<Vec<Gate>>) -> Result<Self> {
        for (l, layer) in layers.iter().enumerate() {
            let mut seen = HashSet::new();
            for g in layer {
                for q in &g.qubits {
                    if !seen.insert(*q) {
                        return Err(Error::InvalidCircuit(format!("layer {l} uses {q} twice")));
                    }
                }
            }
        }
        Ok(Self { layers })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn layers(&self) -> &[Vec<Gate>] {
        &self.layers
    }

    pub fn gate_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    /// Gates in layer order with their `(layer, index)` coordinates.
    pub fn gates(&self) -> impl Iterator<Item = ((usize, usize), &Gate)> {
        self.layers
            .iter()
            .enumerate()
            .flat_map(|(l, layer)| layer.iter().enumerate().map(move |(i, g)| ((l, i), g)))
    }

    pub fn qubits(&self) -> Vec<QubitId> {
        let mut out: Vec<QubitId> = Vec::new();
        for (_, g) in self.gates() {
            for q in &g.qubits {
                if !out.contains(q) {
                    out.push(*q);
                }
            }
        }
        out
    }

    /// A serialization of the gates that respects every qubit's gate order and
    /// greedily keeps few qubits alive, starting from `live`.
    pub fn simulation_order(&self, live: &[QubitId]) -> Vec<(usize, usize)> {
        let flat: Vec<((usize, usize), &Gate)> = self.gates().collect();
        let mut per_qubit: HashMap<QubitId, Vec<usize>> = HashMap::new();
        for (k, (_, g)) in flat.iter().enumerate() {
            for q in &g.qubits {
                per_qubit.entry(*q).or_default().push(k);
            }
        }
        let mut next: HashMap<QubitId, usize> = per_qubit.keys().map(|q| (*q, 0)).collect();
        let mut alive: HashSet<QubitId> = live.iter().copied().collect();
        let mut done = vec![false; flat.len()];
        let mut order = Vec::with_capacity(flat.len());
        for _ in 0..flat.len() {
            let mut best: Option<(usize, usize)> = None;
            for (k, (_, g)) in flat.iter().enumerate() {
                if done[k] {
                    continue;
                }
                let ready = g.qubits.iter().all(|q| per_qubit[q][next[q]] == k);
                if !ready {
                    continue;
                }
                let cost = g.qubits.iter().filter(|q| !alive.contains(q)).count();
                if best.is_none_or(|(c, _)| cost < c) {
                    best = Some((cost, k));
                    if cost == 0 {
                        break;
                    }
                }
            }
            let (_, k) = best.expect("dependency graph is acyclic");
            done[k] = true;
            for q in &flat[k].1.qubits {
                alive.insert(*q);
                *next.get_mut(q).expect("known qubit") += 1;
                if next[q] == per_qubit[q].len() {
                    alive.remove(q);
                }
            }
            order.push(flat[k].0);
        }
        order
    }

    pub fn gate(&self, at: (usize, usize)) -> &Gate {
        &self.layers[at.0][at.1]
    }
}
