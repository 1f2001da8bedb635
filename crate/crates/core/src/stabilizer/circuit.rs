use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::tableau::StabilizerTableau;
use crate::circuits::{
    export_preparation, parse_circuit, CircuitOp, GateNoise, InitBasis, MeasurementNoise, NoiseSpec, ParsedCircuit,
    StateNoise,
};
use crate::error::{Error, Result};
use crate::fcs::PreparationPlan;
use crate::quantum::{Pauli, PauliString, QubitId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CliffordOp {
    Prep(usize, InitBasis),
    Cnot(usize, usize),
    Swap(usize, usize),
    H(usize),
    S(usize),
    X(usize),
    Z(usize),
}

impl CliffordOp {
    fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            CliffordOp::Cnot(a, b) | CliffordOp::Swap(a, b) => (a, Some(b)),
            CliffordOp::Prep(a, _) | CliffordOp::H(a) | CliffordOp::S(a) | CliffordOp::X(a) | CliffordOp::Z(a) => {
                (a, None)
            }
        }
    }
}

/// Clifford circuit on fresh `|0>` qubits; every qubit is prepared at most
/// once, before any gate touches it.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerCircuit {
    pub qubits: Vec<QubitId>,
    pub ops: Vec<CliffordOp>,
}

impl StabilizerCircuit {
    pub fn from_parsed(pc: &ParsedCircuit) -> Result<Self> {
        let ops = pc
            .ops
            .iter()
            .map(|op| {
                Ok(match op {
                    CircuitOp::Init { basis: InitBasis::Other, qubit } => {
                        return Err(Error::NonClifford(format!("initial state of {}", pc.qubits[*qubit])))
                    }
                    CircuitOp::Init { qubit, basis } => CliffordOp::Prep(*qubit, *basis),
                    CircuitOp::Gate { name, qubits, .. } => match (name.as_str(), qubits.as_slice()) {
                        ("CNOT", [a, b]) => CliffordOp::Cnot(*a, *b),
                        ("SWAP", [a, b]) => CliffordOp::Swap(*a, *b),
                        ("H", [a]) => CliffordOp::H(*a),
                        ("S", [a]) => CliffordOp::S(*a),
                        ("X", [a]) => CliffordOp::X(*a),
                        ("Z", [a]) => CliffordOp::Z(*a),
                        (other, _) => return Err(Error::NonClifford(other.to_string())),
                    },
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self { qubits: pc.qubits.clone(), ops })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_parsed(&parse_circuit(text)?)
    }

    /// Goes through the shared text format, so anything the dense engine runs
    /// is read back exactly as exported.
    pub fn from_plan(plan: &PreparationPlan) -> Result<Self> {
        Self::parse(&export_preparation(plan.bath_init(), plan.transitions()))
    }

    pub fn index_of(&self, q: &QubitId) -> Option<usize> {
        self.qubits.iter().position(|x| x == q)
    }

    fn locate(&self, p: &PauliString) -> Result<(Vec<usize>, Vec<Pauli>)> {
        let mut idx = Vec::new();
        let mut letters = Vec::new();
        for (q, l) in p.letters() {
            idx.push(self.index_of(q).ok_or_else(|| Error::SupportMismatch(format!("{q} is not in the circuit")))?);
            letters.push(*l);
        }
        Ok((idx, letters))
    }

    pub fn run(&self) -> Result<StabilizerTableau> {
        let mut t = StabilizerTableau::new(self.qubits.len());
        for op in &self.ops {
            match *op {
                CliffordOp::Prep(a, basis) => match basis {
                    InitBasis::Zero => {}
                    InitBasis::One => t.pauli(a, Pauli::X)?,
                    InitBasis::Plus => t.h(a)?,
                    InitBasis::Minus => {
                        t.h(a)?;
                        t.pauli(a, Pauli::Z)?;
                    }
                    InitBasis::Other => unreachable!("rejected at construction"),
                },
                CliffordOp::Cnot(a, b) => t.cnot(a, b)?,
                CliffordOp::Swap(a, b) => t.swap(a, b)?,
                CliffordOp::H(a) => t.h(a)?,
                CliffordOp::S(a) => t.s(a)?,
                CliffordOp::X(a) => t.pauli(a, Pauli::X)?,
                CliffordOp::Z(a) => t.pauli(a, Pauli::Z)?,
            }
        }
        Ok(t)
    }

    /// `<P>` in the noiseless output state: `+1`, `-1` or `0`.
    pub fn pauli_expectation(&self, tab: &StabilizerTableau, p: &PauliString) -> Result<i8> {
        if !p.is_hermitian() {
            return Err(Error::InvalidOperator("expectation of a non-Hermitian Pauli string".into()));
        }
        let (idx, letters) = self.locate(p)?;
        tab.expectation(&idx, &letters, p.sign.value().re < 0.0)
    }

    /// For every fault location, the probability that the fault flips the
    /// sign of `p` at the end of the circuit. Faults are pulled back from the
    /// observable with the Pauli frame conjugated through the gates.
    fn flip_probabilities(&self, p: &PauliString, model: &PauliNoiseModel) -> Result<Vec<f64>> {
        let n = self.qubits.len();
        let (idx, letters) = self.locate(p)?;
        let mut fx = vec![false; n];
        let mut fz = vec![false; n];
        for (&q, l) in idx.iter().zip(&letters) {
            (fx[q], fz[q]) = l.bits();
        }
        let mut out = Vec::new();
        for op in self.ops.iter().rev() {
            let (a, b) = op.qubits();
            let active = |q: usize| fx[q] || fz[q];
            match *op {
                CliffordOp::Prep(a, basis) => {
                    // flips are X on Z-basis states and Z on X-basis states
                    let hit = match basis {
                        InitBasis::Zero | InitBasis::One => fz[a],
                        _ => fx[a],
                    };
                    if hit && model.state_flip > 0.0 {
                        out.push(model.state_flip);
                    }
                    fx[a] = false;
                    fz[a] = false;
                    continue;
                }
                _ => {
                    // a uniformly random Pauli on the gate anticommutes with a
                    // nontrivial restriction half of the time
                    if model.gate_p > 0.0 && (active(a) || b.is_some_and(active)) {
                        out.push(model.gate_p / 2.0);
                    }
                }
            }
            match *op {
                CliffordOp::Cnot(c, t) => {
                    fx[t] ^= fx[c];
                    fz[c] ^= fz[t];
                }
                CliffordOp::Swap(a, b) => {
                    fx.swap(a, b);
                    fz.swap(a, b);
                }
                CliffordOp::H(a) => std::mem::swap(&mut fx[a], &mut fz[a]),
                CliffordOp::S(a) => fz[a] ^= fx[a],
                _ => {}
            }
        }
        Ok(out)
    }

    /// Noisy `<P>` averaged exactly over all fault configurations.
    pub fn noisy_expectation_exact(&self, tab: &StabilizerTableau, p: &PauliString, model: &PauliNoiseModel) -> Result<f64> {
        let ideal = self.pauli_expectation(tab, p)? as f64;
        let flips = self.flip_probabilities(p, model)?;
        Ok(ideal * model.observable_scale(p) * flips.iter().map(|q| 1.0 - 2.0 * q).product::<f64>())
    }

    /// Monte Carlo estimate of the noisy `<P>`: faults are sampled
    /// independently per location, shot `k` drawing from the stream
    /// `(seed, k)`.
    pub fn monte_carlo(
        &self,
        tab: &StabilizerTableau,
        p: &PauliString,
        model: &PauliNoiseModel,
        shots: u64,
        seed: u64,
    ) -> Result<McEstimate> {
        if shots == 0 {
            return Err(Error::OutOfRange { what: "shots", value: 0.0, lo: 1.0, hi: f64::INFINITY });
        }
        let ideal = self.pauli_expectation(tab, p)? as f64 * model.observable_scale(p);
        let flips = self.flip_probabilities(p, model)?;
        let odd: u64 = (0..shots)
            .into_par_iter()
            .map(|k| {
                let mut rng = ChaCha8Rng::seed_from_u64(shot_seed(seed, k));
                flips.iter().fold(false, |acc, &q| acc ^ rng.random_bool(q)) as u64
            })
            .sum();
        let f = odd as f64 / shots as f64;
        let mean = ideal * (1.0 - 2.0 * f);
        let var = if shots > 1 { 4.0 * ideal * ideal * f * (1.0 - f) * shots as f64 / (shots - 1) as f64 } else { 0.0 };
        Ok(McEstimate { shots, mean, stderr: (var / shots as f64).sqrt() })
    }
}

fn shot_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Pauli-channel reading of a [`NoiseSpec`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PauliNoiseModel {
    /// Probability of a uniformly random Pauli (identity included) after each gate.
    pub gate_p: f64,
    /// Probability of the orthogonal flip after each preparation.
    pub state_flip: f64,
    /// Per-factor shrink of the measured Pauli.
    pub meas_scale: f64,
}

impl PauliNoiseModel {
    pub fn noiseless() -> Self {
        Self { gate_p: 0.0, state_flip: 0.0, meas_scale: 1.0 }
    }

    /// Only depolarizing gates and shrunk measurements are Pauli channels;
    /// both state families are.
    pub fn from_spec(spec: &NoiseSpec) -> Result<Self> {
        spec.validate()?;
        let t = spec.targets;
        if t.gates && spec.epsilon > 0.0 && spec.gate_family != GateNoise::DepolarizeAfterGate {
            return Err(Error::NonClifford(format!("{:?} gate noise", spec.gate_family)));
        }
        if t.measurement && spec.epsilon > 0.0 && spec.meas_family != MeasurementNoise::Shrink {
            return Err(Error::NonClifford(format!("{:?} measurement noise", spec.meas_family)));
        }
        let q = spec.state_mixing_weight();
        Ok(Self {
            gate_p: if t.gates { spec.gate_mixing_weight() } else { 0.0 },
            state_flip: match (t.states, spec.state_family) {
                (false, _) => 0.0,
                (true, StateNoise::MixWithOrthogonal) => q,
                (true, StateNoise::MixWithMaximallyMixed) => q / 2.0,
            },
            meas_scale: if t.measurement { 1.0 - spec.epsilon } else { 1.0 },
        })
    }

    fn observable_scale(&self, p: &PauliString) -> f64 {
        self.meas_scale.powi(p.weight() as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub shots: u64,
    pub mean: f64,
    pub stderr: f64,
}

pub const MC_CSV_HEADER: &str = "shots,mean,stderr,p,lx,ly,observable";

impl McEstimate {
    pub fn csv_row(&self, p: f64, lx: usize, ly: usize, observable: &str) -> String {
        let mut s = String::new();
        let _ = write!(s, "{},{:.12e},{:.12e},{:e},{},{},\"{}\"", self.shots, self.mean, self.stderr, p, lx, ly, observable);
        s
    }
}
