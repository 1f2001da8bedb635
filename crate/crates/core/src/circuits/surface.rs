//! Row-by-row surface-code encoder.
//!
//! During step `t` the system register holds row `t`, the bath row `t + 1` and
//! the sink row `t + 2`, plus one ancilla per generator set in the step.

use super::gate::{Gate, LayeredCircuit};
use super::lattice::{Generator, StabilizerKind, SurfaceCodeLattice};
use super::transition::{build_transition_map, Partition, TransitionMap};
use crate::error::{out_of_range, Result};
use crate::quantum::{DensityMatrix, QubitId};

/// Order of the X and Z blocks within each pair of rows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum StabilizerOrder {
    #[default]
    XThenZ,
    ZThenX,
}

/// Generators set during one block, run in parallel or one after another.
#[derive(Clone, Debug)]
struct Block {
    generators: Vec<Generator>,
    sequential: bool,
}

fn site_qubit(t: usize, (row, col): (usize, usize)) -> QubitId {
    match row as isize - t as isize {
        0 => QubitId::system(t, col),
        1 => QubitId::bath(col),
        2 => QubitId::sink(t, col),
        _ => panic!("row {row} is not active in step {t}"),
    }
}

fn blocks(lat: &SurfaceCodeLattice, t: usize, order: StabilizerOrder) -> Vec<Block> {
    let par = |generators| Block { generators, sequential: false };
    let mut out = Vec::new();
    if t == 1 {
        out.push(par(lat.bottom_pairs()));
    }
    let mut pair = |x: Block, z: Block| match order {
        StabilizerOrder::XThenZ => out.extend([x, z]),
        StabilizerOrder::ZThenX => out.extend([z, x]),
    };
    let z_block = |row: usize| {
        let mut g = lat.plaquettes(row, StabilizerKind::Z);
        g.extend(lat.side_pairs(row));
        par(g)
    };
    if t + 2 <= lat.ly {
        for row in [t, t + 1] {
            pair(par(lat.plaquettes(row, StabilizerKind::X)), z_block(row));
        }
    } else if t + 1 == lat.ly {
        // Each correction on the top row disturbs the next X term to its
        // right, so these are set left to right.
        let mut chain = lat.plaquettes(t, StabilizerKind::X);
        chain.extend(lat.top_pairs());
        chain.sort_by_key(|g| g.sites.iter().map(|s| s.1).min());
        pair(Block { generators: chain, sequential: true }, z_block(t));
    }
    out.retain(|b| !b.generators.is_empty());
    out
}

/// Gates of one subroutine as `(layer offset, gate)`.
fn subroutine(g: &Generator, t: usize, anc: QubitId) -> Vec<(usize, Gate)> {
    let d: Vec<QubitId> = g.sites.iter().map(|s| site_qubit(t, *s)).collect();
    let corr = site_qubit(t, g.correction_site());
    let first = 5 - d.len() - 1;
    let mut out: Vec<(usize, Gate)> = d
        .iter()
        .enumerate()
        .map(|(i, q)| {
            let gate = match g.kind {
                StabilizerKind::X => Gate::cnot(anc, *q),
                StabilizerKind::Z => Gate::cnot(*q, anc),
            };
            (first + i, gate)
        })
        .collect();
    let fix = match g.kind {
        StabilizerKind::X => Gate::cnot(corr, anc),
        StabilizerKind::Z => Gate::cnot(anc, corr),
    };
    out.push((4, fix));
    out
}

/// Generators set in step `t` with their ancillas.
pub fn step_generators(lx: usize, ly: usize, t: usize, order: StabilizerOrder) -> Result<Vec<(QubitId, Generator)>> {
    let lat = SurfaceCodeLattice::new(lx, ly)?;
    if t == 0 || t > ly {
        return Err(out_of_range("row", t as f64, 1.0, ly as f64));
    }
    Ok(blocks(&lat, t, order)
        .into_iter()
        .flat_map(|b| b.generators)
        .enumerate()
        .map(|(slot, g)| (QubitId::ancilla(t, slot), g))
        .collect())
}

/// Ancillas of step `t` with the data qubits they couple to.
pub fn ancilla_neighbors(lx: usize, ly: usize, t: usize) -> Result<Vec<(QubitId, Vec<QubitId>)>> {
    Ok(step_generators(lx, ly, t, StabilizerOrder::XThenZ)?
        .into_iter()
        .map(|(a, g)| (a, g.sites.iter().map(|s| site_qubit(t, *s)).collect()))
        .collect())
}

pub fn surface_code_transition(lx: usize, t: usize, ly: usize) -> Result<TransitionMap> {
    surface_code_transition_with(lx, t, ly, StabilizerOrder::default())
}

pub fn surface_code_transition_with(lx: usize, t: usize, ly: usize, order: StabilizerOrder) -> Result<TransitionMap> {
    let lat = SurfaceCodeLattice::new(lx, ly)?;
    if t == 0 || t > ly {
        return Err(out_of_range("row", t as f64, 1.0, ly as f64));
    }
    let bath: Vec<QubitId> = (0..lx).map(QubitId::bath).collect();
    let system: Vec<QubitId> = (0..lx).map(|c| QubitId::system(t, c)).collect();
    let mut sink: Vec<QubitId> = if t + 2 <= ly { (0..lx).map(|c| QubitId::sink(t, c)).collect() } else { Vec::new() };
    let mut omega_sink: Vec<DensityMatrix> = sink.iter().map(|q| DensityMatrix::zero(*q)).collect();

    let mut layers: Vec<Vec<Gate>> = vec![bath.iter().zip(&system).map(|(b, s)| Gate::swap(*b, *s)).collect()];
    let mut slot = 0;
    for block in blocks(&lat, t, order) {
        let mut base = layers.len();
        for g in &block.generators {
            let anc = QubitId::ancilla(t, slot);
            slot += 1;
            sink.push(anc);
            omega_sink.push(match g.kind {
                StabilizerKind::X => DensityMatrix::plus(anc),
                StabilizerKind::Z => DensityMatrix::zero(anc),
            });
            for (off, gate) in subroutine(g, t, anc) {
                let l = base + off;
                if layers.len() <= l {
                    layers.resize(l + 1, Vec::new());
                }
                layers[l].push(gate);
            }
            if block.sequential {
                base = layers.len();
            }
        }
    }
    layers.retain(|l| !l.is_empty());
    let omega_system = system.iter().map(|q| DensityMatrix::zero(*q)).collect();
    build_transition_map(
        LayeredCircuit::new(layers)?,
        omega_system,
        omega_sink,
        Partition { bath, system, sink },
        t,
    )
}

/// Initial bath state of the surface-code preparation: row 1 in `|0...0>`.
pub fn surface_code_bath_init(lx: usize) -> Vec<DensityMatrix> {
    (0..lx).map(|c| DensityMatrix::zero(QubitId::bath(c))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::kernel::DenseRegister;
    use crate::quantum::{CMatrix, DenseOperator, Pauli, PauliString};

    fn q(i: usize) -> QubitId {
        QubitId::bath(i)
    }

    /// Runs a single subroutine on a register holding `data` and returns the register.
    fn run_subroutine(kind: StabilizerKind, input: &DensityMatrix) -> DensityMatrix {
        let g = Generator { kind, sites: vec![(2, 0), (2, 1), (1, 0), (1, 1)] };
        // t = 1: rows 1 and 2 are system and bath.
        let anc = QubitId::ancilla(1, 0);
        let gates: Vec<Vec<Gate>> = subroutine(&g, 1, anc).into_iter().map(|(_, g)| vec![g]).collect();
        let omega = if kind == StabilizerKind::X { DensityMatrix::plus(anc) } else { DensityMatrix::zero(anc) };
        let mut reg = DenseRegister::from_matrix(input.support().to_vec(), input.matrix());
        reg.push(anc, omega.matrix());
        for layer in gates {
            let pos = reg.positions(&layer[0].qubits).unwrap();
            reg.conjugate(&pos, &layer[0].matrix());
        }
        reg.trace_out(&anc).unwrap();
        DensityMatrix::new(reg.qubits.clone(), reg.to_matrix()).unwrap()
    }

    fn data_qubits() -> Vec<QubitId> {
        vec![QubitId::bath(0), QubitId::bath(1), QubitId::system(1, 0), QubitId::system(1, 1)]
    }

    fn all(p: Pauli) -> DenseOperator {
        PauliString::new(data_qubits().into_iter().map(|q| (q, p))).to_operator_on(&data_qubits()).unwrap()
    }

    #[test]
    fn z_subroutine_sets_zzzz_on_every_basis_state() {
        for k in 0..16 {
            let mut psi = nalgebra::DVector::zeros(16);
            psi[k] = crate::quantum::ONE;
            let rho = DensityMatrix::pure(data_qubits(), &psi).unwrap();
            let out = run_subroutine(StabilizerKind::Z, &rho);
            assert!((out.expectation_real(&all(Pauli::Z)).unwrap() - 1.0).abs() < 1e-12, "input {k}");
        }
    }

    #[test]
    fn x_subroutine_sets_xxxx_and_keeps_commuting_z_terms() {
        let mut psi = nalgebra::DVector::zeros(16);
        psi[0] = crate::quantum::ONE;
        let rho = DensityMatrix::pure(data_qubits(), &psi).unwrap();
        let out = run_subroutine(StabilizerKind::X, &rho);
        assert!((out.expectation_real(&all(Pauli::X)).unwrap() - 1.0).abs() < 1e-12);
        assert!((out.expectation_real(&all(Pauli::Z)).unwrap() - 1.0).abs() < 1e-12);
        // |0110>: ZZZZ = +1 and the X subroutine must leave it alone.
        let mut psi = nalgebra::DVector::zeros(16);
        psi[0b0110] = crate::quantum::ONE;
        let rho = DensityMatrix::pure(data_qubits(), &psi).unwrap();
        let out = run_subroutine(StabilizerKind::X, &rho);
        assert!((out.expectation_real(&all(Pauli::X)).unwrap() - 1.0).abs() < 1e-12);
        assert!((out.expectation_real(&all(Pauli::Z)).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn step_structure() {
        for (lx, ly) in [(3, 2), (3, 3), (5, 4), (7, 6)] {
            for t in 1..=ly {
                let tm = surface_code_transition(lx, t, ly).unwrap();
                let gens = step_generators(lx, ly, t, StabilizerOrder::XThenZ).unwrap();
                let anc = tm.partition().sink.iter().filter(|q| matches!(q.register, crate::quantum::Register::Ancilla(_))).count();
                assert_eq!(anc, gens.len());
                let first: Vec<&str> = tm.circuit().layers()[0].iter().map(|g| g.kind.name()).collect();
                assert_eq!(first, vec!["SWAP"; lx]);
                if t == ly {
                    assert_eq!(tm.depth(), 1);
                }
            }
        }
        assert!(surface_code_transition(4, 1, 3).is_err());
        assert!(surface_code_transition(3, 0, 3).is_err());
        assert!(surface_code_transition(3, 4, 3).is_err());
    }

    #[test]
    fn every_generator_is_set_exactly_once_outside_the_sink() {
        // Generators set in a step whose support avoids the discarded sink row
        // partition the full generator list.
        for (lx, ly) in [(3, 3), (5, 5), (7, 4)] {
            let lat = SurfaceCodeLattice::new(lx, ly).unwrap();
            let mut seen = Vec::new();
            for t in 1..=ly {
                for (_, g) in step_generators(lx, ly, t, StabilizerOrder::XThenZ).unwrap() {
                    if g.rows().1 <= t + 1 {
                        seen.push(g);
                    }
                }
            }
            assert_eq!(seen.len(), lat.generators().len());
            for g in lat.generators() {
                assert!(seen.contains(&g));
            }
        }
    }

    #[test]
    fn bath_init_is_all_zero() {
        let b = surface_code_bath_init(3);
        assert_eq!(b.len(), 3);
        assert_eq!(b[1].support(), &[q(1)]);
        let mut want = CMatrix::zeros(2, 2);
        want[(0, 0)] = crate::quantum::ONE;
        assert_eq!(b[2].matrix(), &want);
    }
}
