//! Plain-text circuit description shared by the dense engine and the
//! stabilizer oracle.
//!
//! ```text
//! # comment
//! INIT_Z bath:_:0          initial bath state
//! ROW 1                    start of a transition
//! INIT_X anc:1:0           initial system/sink states of the transition
//! 0 SWAP bath:_:0 sys:1:0  <layer> <gate> <qubit> [<qubit>]
//! ```
//! Two-qubit gates list the control first. Initial states are `INIT_Z`
//! (|0>), `INIT_ONE`, `INIT_X` (|+>), `INIT_MINUS` or `INIT_STATE` (anything
//! else, not representable in the stabilizer formalism).

use std::collections::HashMap;
use std::fmt::Write as _;

use num_complex::Complex64 as C64;

use super::transition::TransitionMap;
use crate::error::{Error, Result};
use crate::quantum::{CMatrix, DensityMatrix, QubitId};

pub const FORMAT_HEADER: &str = "# hqs-circuit v1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitBasis {
    Zero,
    One,
    Plus,
    Minus,
    Other,
}

impl InitBasis {
    pub fn of(state: &DensityMatrix) -> Self {
        let m = state.matrix();
        let h = C64::new(0.5, 0.0);
        let close = |v: [C64; 4]| (m - CMatrix::from_row_slice(2, 2, &v)).camax() < 1e-12;
        let (o, z) = (C64::new(1.0, 0.0), C64::new(0.0, 0.0));
        if close([o, z, z, z]) {
            InitBasis::Zero
        } else if close([z, z, z, o]) {
            InitBasis::One
        } else if close([h, h, h, h]) {
            InitBasis::Plus
        } else if close([h, -h, -h, h]) {
            InitBasis::Minus
        } else {
            InitBasis::Other
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            InitBasis::Zero => "INIT_Z",
            InitBasis::One => "INIT_ONE",
            InitBasis::Plus => "INIT_X",
            InitBasis::Minus => "INIT_MINUS",
            InitBasis::Other => "INIT_STATE",
        }
    }

    fn from_keyword(s: &str) -> Option<Self> {
        Some(match s {
            "INIT_Z" => InitBasis::Zero,
            "INIT_ONE" => InitBasis::One,
            "INIT_X" => InitBasis::Plus,
            "INIT_MINUS" => InitBasis::Minus,
            "INIT_STATE" => InitBasis::Other,
            _ => return None,
        })
    }
}

fn write_transition(out: &mut String, tm: &TransitionMap) {
    let _ = writeln!(out, "ROW {}", tm.row());
    let p = tm.partition();
    for (q, s) in p.system.iter().zip(tm.omega_system()).chain(p.sink.iter().zip(tm.omega_sink())) {
        let _ = writeln!(out, "{} {}", InitBasis::of(s).keyword(), q);
    }
    for ((layer, _), g) in tm.circuit().gates() {
        let qs: Vec<String> = g.qubits.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "{} {} {}", layer, g.kind.name(), qs.join(" "));
    }
}

/// Text of a single transition.
pub fn export_transition(tm: &TransitionMap) -> String {
    let mut out = format!("{FORMAT_HEADER}\n");
    write_transition(&mut out, tm);
    out
}

/// Text of a whole preparation: initial bath state, then each transition.
pub fn export_preparation(bath_init: &[DensityMatrix], transitions: &[TransitionMap]) -> String {
    let mut out = format!("{FORMAT_HEADER}\n");
    for s in bath_init {
        for q in s.support() {
            let _ = writeln!(out, "{} {}", InitBasis::of(s).keyword(), q);
        }
    }
    for tm in transitions {
        write_transition(&mut out, tm);
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub enum CircuitOp {
    Init { qubit: usize, basis: InitBasis },
    Gate { name: String, qubits: Vec<usize>, row: usize, layer: usize },
}

/// A parsed circuit; qubit indices refer to `qubits`, in order of first appearance.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParsedCircuit {
    pub qubits: Vec<QubitId>,
    pub ops: Vec<CircuitOp>,
}

impl ParsedCircuit {
    pub fn index_of(&self, q: &QubitId) -> Option<usize> {
        self.qubits.iter().position(|x| x == q)
    }
}

pub fn parse_circuit(text: &str) -> Result<ParsedCircuit> {
    let mut pc = ParsedCircuit::default();
    let mut index: HashMap<QubitId, usize> = HashMap::new();
    let mut row = 0;
    for (n, raw) in text.lines().enumerate() {
        let line = n + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line, msg };
        let toks: Vec<&str> = body.split_whitespace().collect();
        let mut qubit = |s: &str| -> Result<usize> {
            let q: QubitId = s.parse().map_err(|_| err(format!("bad qubit `{s}`")))?;
            let next = pc.qubits.len();
            let i = *index.entry(q).or_insert(next);
            if i == next {
                pc.qubits.push(q);
            }
            Ok(i)
        };
        if toks[0] == "ROW" {
            row = toks
                .get(1)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err("ROW needs an integer".into()))?;
            continue;
        }
        if let Some(basis) = InitBasis::from_keyword(toks[0]) {
            if toks.len() != 2 {
                return Err(err(format!("{} takes one qubit", toks[0])));
            }
            let q = qubit(toks[1])?;
            pc.ops.push(CircuitOp::Init { qubit: q, basis });
            continue;
        }
        let layer: usize = toks[0].parse().map_err(|_| err(format!("unknown directive `{}`", toks[0])))?;
        let name = toks.get(1).ok_or_else(|| err("missing gate name".into()))?.to_string();
        let arity = match name.as_str() {
            "CNOT" | "SWAP" | "U2" => 2,
            "H" | "S" | "X" | "Z" | "U1" => 1,
            other => return Err(err(format!("unknown gate `{other}`"))),
        };
        if toks.len() != 2 + arity {
            return Err(err(format!("{name} takes {arity} qubits")));
        }
        let qubits = toks[2..].iter().map(|s| qubit(s)).collect::<Result<Vec<_>>>()?;
        if arity == 2 && qubits[0] == qubits[1] {
            return Err(err(format!("{name} on a repeated qubit")));
        }
        pc.ops.push(CircuitOp::Gate { name, qubits, row, layer });
    }
    Ok(pc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::surface::{surface_code_bath_init, surface_code_transition};

    #[test]
    fn round_trip_preserves_gates() {
        let tms: Vec<_> = (1..=3).map(|t| surface_code_transition(3, t, 3).unwrap()).collect();
        let text = export_preparation(&surface_code_bath_init(3), &tms);
        let pc = parse_circuit(&text).unwrap();
        let gates: Vec<_> = pc.ops.iter().filter_map(|o| match o {
            CircuitOp::Gate { name, qubits, row, .. } => Some((name.clone(), qubits.iter().map(|i| pc.qubits[*i]).collect::<Vec<_>>(), *row)),
            _ => None,
        }).collect();
        let want: Vec<_> = tms.iter().flat_map(|tm| tm.circuit().gates().map(move |(_, g)| (g.kind.name().to_string(), g.qubits.clone(), tm.row()))).collect();
        assert_eq!(gates, want);
        let inits = pc.ops.iter().filter(|o| matches!(o, CircuitOp::Init { .. })).count();
        let want_inits: usize = 3 + tms.iter().map(|t| t.partition().system.len() + t.partition().sink.len()).sum::<usize>();
        assert_eq!(inits, want_inits);
    }

    #[test]
    fn init_keywords() {
        let q = QubitId::bath(0);
        assert_eq!(InitBasis::of(&DensityMatrix::zero(q)), InitBasis::Zero);
        assert_eq!(InitBasis::of(&DensityMatrix::plus(q)), InitBasis::Plus);
        assert_eq!(InitBasis::of(&DensityMatrix::one(q)), InitBasis::One);
        assert_eq!(InitBasis::of(&DensityMatrix::maximally_mixed(vec![q])), InitBasis::Other);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = parse_circuit("# x\n0 CNOT bath:_:0\n").unwrap_err();
        assert_eq!(e, Error::Parse { line: 2, msg: "CNOT takes 2 qubits".into() });
        assert!(parse_circuit("0 FOO bath:_:0").is_err());
        assert!(parse_circuit("0 CNOT bath:_:0 bath:_:0").is_err());
        assert!(parse_circuit("ROW x").is_err());
        assert!(parse_circuit("INIT_Z nowhere").is_err());
    }
}
