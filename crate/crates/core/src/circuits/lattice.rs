//! Geometry of the rotated surface code with qubits on vertices.
//!
//! Rows are 1-based (`1..=ly`, row 1 prepared first), columns 0-based. The
//! plaquette with lower-left corner `(row, col)` covers rows `row, row + 1` and
//! columns `col, col + 1`; it is X-type when `col + row - 1` is even.

use crate::error::{Error, Result};
use crate::quantum::{Pauli, PauliString, QubitId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StabilizerKind {
    X,
    Z,
}

/// A stabilizer generator. `sites` are `(row, col)` in subroutine label order:
/// `[newer-left, newer-right, older-left, older-right]` for plaquettes and
/// `[correction target, other]` for boundary pairs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub kind: StabilizerKind,
    pub sites: Vec<(usize, usize)>,
}

impl Generator {
    /// Site receiving the correction gate.
    pub fn correction_site(&self) -> (usize, usize) {
        if self.sites.len() == 4 { self.sites[1] } else { self.sites[0] }
    }

    /// The generator as a Pauli string on system qubits.
    pub fn pauli(&self) -> PauliString {
        let p = match self.kind {
            StabilizerKind::X => Pauli::X,
            StabilizerKind::Z => Pauli::Z,
        };
        PauliString::new(self.sites.iter().map(|&(r, c)| (QubitId::system(r, c), p)))
    }

    pub fn rows(&self) -> (usize, usize) {
        let lo = self.sites.iter().map(|s| s.0).min().expect("nonempty");
        let hi = self.sites.iter().map(|s| s.0).max().expect("nonempty");
        (lo, hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SurfaceCodeLattice {
    pub lx: usize,
    pub ly: usize,
}

impl SurfaceCodeLattice {
    pub fn new(lx: usize, ly: usize) -> Result<Self> {
        if lx < 3 || lx.is_multiple_of(2) {
            return Err(Error::UnsupportedLayout(format!("surface code needs odd lx >= 3, got {lx}")));
        }
        if ly < 2 {
            return Err(Error::UnsupportedLayout(format!("surface code needs ly >= 2, got {ly}")));
        }
        Ok(Self { lx, ly })
    }

    fn is_x(col: isize, row: isize) -> bool {
        (col + row - 1).rem_euclid(2) == 0
    }

    /// Four-body plaquettes with their lower row equal to `row`.
    pub fn plaquettes(&self, row: usize, kind: StabilizerKind) -> Vec<Generator> {
        (0..self.lx - 1)
            .filter(|&c| (Self::is_x(c as isize, row as isize)) == (kind == StabilizerKind::X))
            .map(|c| Generator {
                kind,
                sites: vec![(row + 1, c), (row + 1, c + 1), (row, c), (row, c + 1)],
            })
            .collect()
    }

    /// Two-body Z terms on the left and right edges between `row` and `row + 1`.
    pub fn side_pairs(&self, row: usize) -> Vec<Generator> {
        let mut out = Vec::new();
        let r = row as isize;
        let last = self.lx - 1;
        if !Self::is_x(-1, r) {
            out.push(Generator { kind: StabilizerKind::Z, sites: vec![(row + 1, 0), (row, 0)] });
        }
        if !Self::is_x(last as isize, r) {
            out.push(Generator { kind: StabilizerKind::Z, sites: vec![(row + 1, last), (row, last)] });
        }
        out
    }

    /// Two-body X terms on row 1.
    pub fn bottom_pairs(&self) -> Vec<Generator> {
        (0..self.lx - 1)
            .filter(|&c| Self::is_x(c as isize, 0))
            .map(|c| Generator { kind: StabilizerKind::X, sites: vec![(1, c + 1), (1, c)] })
            .collect()
    }

    /// Two-body X terms on row `ly`.
    pub fn top_pairs(&self) -> Vec<Generator> {
        let ly = self.ly;
        (0..self.lx - 1)
            .filter(|&c| Self::is_x(c as isize, ly as isize))
            .map(|c| Generator { kind: StabilizerKind::X, sites: vec![(ly, c + 1), (ly, c)] })
            .collect()
    }

    /// All `lx * ly - 1` generators.
    pub fn generators(&self) -> Vec<Generator> {
        let mut out = self.bottom_pairs();
        for row in 1..self.ly {
            out.extend(self.plaquettes(row, StabilizerKind::X));
            out.extend(self.plaquettes(row, StabilizerKind::Z));
            out.extend(self.side_pairs(row));
        }
        out.extend(self.top_pairs());
        out
    }

    /// Sites of the logical Z string along `row`.
    pub fn logical_z(&self, row: usize) -> Vec<(usize, usize)> {
        (0..self.lx).map(|c| (row, c)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn anticommute(a: &Generator, b: &Generator) -> bool {
        if a.kind == b.kind {
            return false;
        }
        let sa: HashSet<_> = a.sites.iter().collect();
        b.sites.iter().filter(|s| sa.contains(s)).count() % 2 == 1
    }

    #[test]
    fn counts_and_commutation() {
        for (lx, ly) in [(3, 2), (3, 3), (5, 5), (7, 4), (9, 9)] {
            let lat = SurfaceCodeLattice::new(lx, ly).unwrap();
            let g = lat.generators();
            assert_eq!(g.len(), lx * ly - 1, "lx={lx} ly={ly}");
            for a in &g {
                for b in &g {
                    assert!(!anticommute(a, b));
                }
                let z = Generator { kind: StabilizerKind::Z, sites: lat.logical_z(2.min(ly)) };
                assert!(!anticommute(a, &z));
            }
            let distinct: HashSet<_> = g.iter().map(|x| {
                let mut s = x.sites.clone();
                s.sort();
                (x.kind, s)
            }).collect();
            assert_eq!(distinct.len(), g.len());
        }
    }

    #[test]
    fn five_by_five_matches_the_drawn_lattice() {
        let lat = SurfaceCodeLattice::new(5, 5).unwrap();
        // Lower-left plaquette is X, its right neighbour Z.
        assert_eq!(lat.plaquettes(1, StabilizerKind::X)[0].sites[2], (1, 0));
        assert_eq!(lat.plaquettes(1, StabilizerKind::Z)[0].sites[2], (1, 1));
        let bottom: Vec<_> = lat.bottom_pairs().iter().map(|g| g.sites[1]).collect();
        assert_eq!(bottom, vec![(1, 1), (1, 3)]);
        let top: Vec<_> = lat.top_pairs().iter().map(|g| g.sites[1]).collect();
        assert_eq!(top, vec![(5, 0), (5, 2)]);
        let left: Vec<_> = (1..5).flat_map(|r| lat.side_pairs(r)).filter(|g| g.sites[0].1 == 0).map(|g| g.sites[1].0).collect();
        assert_eq!(left, vec![1, 3]);
        let right: Vec<_> = (1..5).flat_map(|r| lat.side_pairs(r)).filter(|g| g.sites[0].1 == 4).map(|g| g.sites[1].0).collect();
        assert_eq!(right, vec![2, 4]);
    }

    #[test]
    fn row_pair_z_terms_multiply_to_two_logicals() {
        let lat = SurfaceCodeLattice::new(7, 5).unwrap();
        for row in 1..5 {
            let mut count = std::collections::HashMap::new();
            for g in lat.plaquettes(row, StabilizerKind::Z).into_iter().chain(lat.side_pairs(row)) {
                for s in g.sites {
                    *count.entry(s).or_insert(0) += 1;
                }
            }
            assert_eq!(count.len(), 14);
            assert!(count.values().all(|&v| v == 1));
        }
    }

    #[test]
    fn rejects_even_width() {
        assert!(SurfaceCodeLattice::new(4, 3).is_err());
        assert!(SurfaceCodeLattice::new(3, 1).is_err());
    }
}
