use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Role of a physical or virtual qubit. Rows are 1-based lattice rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Register {
    Bath,
    System(usize),
    Sink(usize),
    /// Ancilla slot belonging to the transition of the given row.
    Ancilla(usize),
}

/// A qubit identified by its register and column (slot index for ancillas).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QubitId {
    pub register: Register,
    pub position: usize,
}

impl QubitId {
    pub const fn bath(position: usize) -> Self {
        Self { register: Register::Bath, position }
    }

    pub const fn system(row: usize, position: usize) -> Self {
        Self { register: Register::System(row), position }
    }

    pub const fn sink(row: usize, position: usize) -> Self {
        Self { register: Register::Sink(row), position }
    }

    pub const fn ancilla(row: usize, slot: usize) -> Self {
        Self { register: Register::Ancilla(row), position: slot }
    }

    pub fn is_bath(&self) -> bool {
        matches!(self.register, Register::Bath)
    }

    pub fn system_row(&self) -> Option<usize> {
        match self.register {
            Register::System(r) => Some(r),
            _ => None,
        }
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.register {
            Register::Bath => write!(f, "bath:_:{}", self.position),
            Register::System(r) => write!(f, "sys:{}:{}", r, self.position),
            Register::Sink(r) => write!(f, "sink:{}:{}", r, self.position),
            Register::Ancilla(r) => write!(f, "anc:{}:{}", r, self.position),
        }
    }
}

impl FromStr for QubitId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse { line: 0, msg: format!("bad qubit id `{s}`") };
        let mut parts = s.trim().split(':');
        let (kind, row, col) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(k), Some(r), Some(c), None) => (k, r, c),
            _ => return Err(bad()),
        };
        let position: usize = col.parse().map_err(|_| bad())?;
        let row = || row.parse::<usize>().map_err(|_| bad());
        let register = match kind {
            "bath" => Register::Bath,
            "sys" => Register::System(row()?),
            "sink" => Register::Sink(row()?),
            "anc" => Register::Ancilla(row()?),
            _ => return Err(bad()),
        };
        Ok(Self { register, position })
    }
}

pub(crate) fn check_distinct(support: &[QubitId]) -> Result<()> {
    for (i, a) in support.iter().enumerate() {
        if support[i + 1..].contains(a) {
            return Err(Error::SupportMismatch(format!("duplicate qubit {a}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_round_trips() {
        for q in [
            QubitId::bath(3),
            QubitId::system(2, 0),
            QubitId::sink(7, 4),
            QubitId::ancilla(1, 12),
        ] {
            assert_eq!(q.to_string().parse::<QubitId>().unwrap(), q);
        }
        assert_eq!(QubitId::system(2, 3).to_string(), "sys:2:3");
        assert!("foo:1:2".parse::<QubitId>().is_err());
        assert!("sys:1".parse::<QubitId>().is_err());
    }

    #[test]
    fn duplicates_rejected() {
        let q = QubitId::bath(0);
        assert!(check_distinct(&[q, QubitId::bath(1)]).is_ok());
        assert!(check_distinct(&[q, QubitId::bath(1), q]).is_err());
    }
}
