use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;

use super::operator::{CMatrix, DenseOperator, ONE, ZERO};
use super::QubitId;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    pub const NON_IDENTITY: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> CMatrix {
        let i = C64::new(0.0, 1.0);
        let v = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -i, i, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        CMatrix::from_row_slice(2, 2, &v)
    }

    /// Symplectic bits `(x, z)`; `Y` is `(1, 1)`.
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Index in `ALL`; digit `k` of a Pauli-basis index.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn commutes_with(self, other: Pauli) -> bool {
        self == Pauli::I || other == Pauli::I || self == other
    }

    pub fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

/// Global phase of a Pauli string.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Phase {
    #[default]
    PlusOne,
    MinusOne,
    PlusI,
    MinusI,
}

impl Phase {
    pub fn value(self) -> C64 {
        match self {
            Phase::PlusOne => ONE,
            Phase::MinusOne => -ONE,
            Phase::PlusI => C64::new(0.0, 1.0),
            Phase::MinusI => C64::new(0.0, -1.0),
        }
    }
}

/// Tensor product of Pauli letters with a phase; identity letters are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PauliString {
    letters: BTreeMap<QubitId, Pauli>,
    pub sign: Phase,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    pub fn new<I: IntoIterator<Item = (QubitId, Pauli)>>(letters: I) -> Self {
        let letters = letters.into_iter().filter(|(_, p)| *p != Pauli::I).collect();
        Self { letters, sign: Phase::PlusOne }
    }

    pub fn with_sign(mut self, sign: Phase) -> Self {
        self.sign = sign;
        self
    }

    pub fn single(q: QubitId, p: Pauli) -> Self {
        Self::new([(q, p)])
    }

    pub fn get(&self, q: &QubitId) -> Pauli {
        self.letters.get(q).copied().unwrap_or(Pauli::I)
    }

    pub fn letters(&self) -> impl Iterator<Item = (&QubitId, &Pauli)> {
        self.letters.iter()
    }

    /// Qubits with a non-identity letter, in `QubitId` order.
    pub fn support(&self) -> Vec<QubitId> {
        self.letters.keys().copied().collect()
    }

    pub fn weight(&self) -> usize {
        self.letters.len()
    }

    pub fn is_hermitian(&self) -> bool {
        matches!(self.sign, Phase::PlusOne | Phase::MinusOne)
    }

    /// Always 1: Pauli strings are unitary.
    pub fn norm(&self) -> f64 {
        1.0
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        self.letters
            .iter()
            .filter(|(q, p)| !p.commutes_with(other.get(q)))
            .count()
            % 2
            == 0
    }

    pub fn to_operator(&self) -> DenseOperator {
        self.to_operator_on(&self.support()).expect("own support")
    }

    /// Dense matrix with legs ordered as `support`, which must contain every letter.
    pub fn to_operator_on(&self, support: &[QubitId]) -> Result<DenseOperator> {
        if let Some(q) = self.letters.keys().find(|q| !support.contains(q)) {
            return Err(Error::SupportMismatch(format!("{q} missing from target support")));
        }
        let mut m = CMatrix::from_element(1, 1, self.sign.value());
        for q in support {
            m = self.get(q).matrix().kronecker(&m);
        }
        DenseOperator::new(support.to_vec(), m)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            Phase::PlusOne => "",
            Phase::MinusOne => "-",
            Phase::PlusI => "i",
            Phase::MinusI => "-i",
        };
        write!(f, "{s}")?;
        if self.letters.is_empty() {
            return write!(f, "I");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|(q, p)| format!("{}@{}", p.letter(), q))
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses `X@sys:2:0,Z@sys:2:1` with an optional leading `-`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (Phase::MinusOne, rest),
            None => (Phase::PlusOne, s),
        };
        if body == "I" {
            return Ok(Self::identity().with_sign(sign));
        }
        let mut letters = Vec::new();
        for part in body.split(',') {
            let bad = || Error::Parse { line: 0, msg: format!("bad Pauli factor `{part}`") };
            let (l, q) = part.trim().split_once('@').ok_or_else(bad)?;
            let mut chars = l.chars();
            let p = chars.next().and_then(Pauli::from_letter).ok_or_else(bad)?;
            if chars.next().is_some() {
                return Err(bad());
            }
            letters.push((q.parse::<QubitId>()?, p));
        }
        Ok(Self::new(letters).with_sign(sign))
    }
}

/// Basis operator on `n` qubits for Pauli-basis index `idx` (base-4 digit `k` is qubit `k`).
pub fn pauli_basis_matrix(n: usize, idx: usize) -> CMatrix {
    let mut m = CMatrix::from_element(1, 1, ONE);
    for k in 0..n {
        m = Pauli::ALL[(idx >> (2 * k)) & 3].matrix().kronecker(&m);
    }
    m
}
