use crate::circuits::lattice::{StabilizerKind, SurfaceCodeLattice};
use crate::error::{Error, Result};
use crate::quantum::{Pauli, PauliString, QubitId};

/// Pauli strings on one bulk row that commute with every generator touching it.
#[derive(Clone, Debug, PartialEq)]
pub struct AnnihilationReport {
    pub lx: usize,
    pub row: usize,
    /// Number of non-identity strings examined.
    pub candidates: usize,
    pub survivors: Vec<PauliString>,
}

impl AnnihilationReport {
    /// Survivors are exactly the identity and the Z string along the row.
    pub fn only_logical_survives(&self) -> bool {
        let zbar = PauliString::new((0..self.lx).map(|c| (QubitId::system(self.row, c), Pauli::Z)));
        self.survivors.len() == 2 && self.survivors.contains(&PauliString::identity()) && self.survivors.contains(&zbar)
    }
}

/// Enumerates all `4^lx` strings on the middle row of a three-row lattice.
pub fn check_row_annihilation(lx: usize) -> Result<AnnihilationReport> {
    if lx > 12 {
        return Err(Error::OutOfRange { what: "lx", value: lx as f64, lo: 3.0, hi: 12.0 });
    }
    let lat = SurfaceCodeLattice::new(lx, 3)?;
    let row = 2;
    // restriction of each neighbouring generator to the row, as x/z masks
    let masks: Vec<(u32, u32)> = lat
        .generators()
        .iter()
        .filter_map(|g| {
            let m: u32 = g.sites.iter().filter(|s| s.0 == row).map(|s| 1u32 << s.1).sum();
            (m != 0).then_some(match g.kind {
                StabilizerKind::X => (m, 0),
                StabilizerKind::Z => (0, m),
            })
        })
        .collect();
    let mut survivors = Vec::new();
    for code in 0..4u64.pow(lx as u32) {
        let (mut px, mut pz) = (0u32, 0u32);
        let mut letters = Vec::with_capacity(lx);
        for c in 0..lx {
            let p = Pauli::ALL[(code >> (2 * c) & 3) as usize];
            let (x, z) = p.bits();
            px |= (x as u32) << c;
            pz |= (z as u32) << c;
            letters.push((QubitId::system(row, c), p));
        }
        let commutes = masks.iter().all(|&(gx, gz)| ((px & gz).count_ones() + (pz & gx).count_ones()) % 2 == 0);
        if commutes {
            survivors.push(PauliString::new(letters));
        }
    }
    Ok(AnnihilationReport { lx, row, candidates: 4usize.pow(lx as u32) - 1, survivors })
}
