//! Exact stabilizer simulation of the Clifford encoders, the row annihilation
//! check and Pauli-noise Monte Carlo.

mod annihilation;
mod circuit;
mod tableau;

pub use annihilation::{check_row_annihilation, AnnihilationReport};
pub use circuit::{CliffordOp, McEstimate, PauliNoiseModel, StabilizerCircuit, MC_CSV_HEADER};
pub use tableau::StabilizerTableau;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::lattice::{StabilizerKind, SurfaceCodeLattice};
    use crate::circuits::{GateKind, NoiseSpec};
    use crate::error::Error;
    use crate::fcs::{expectation_local, LocalObservable, PreparationPlan};
    use crate::quantum::{DenseOperator, DensityMatrix, Pauli, PauliString, QubitId};
    use nalgebra::DVector;
    use num_complex::Complex64 as C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn generator_pauli(kind: StabilizerKind, sites: &[(usize, usize)]) -> PauliString {
        let p = if kind == StabilizerKind::X { Pauli::X } else { Pauli::Z };
        PauliString::new(sites.iter().map(|&(r, c)| (QubitId::system(r, c), p)))
    }

    #[test]
    fn random_clifford_matches_statevector() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 6;
        let qs: Vec<QubitId> = (0..n).map(QubitId::bath).collect();
        for _ in 0..10 {
            let mut tab = StabilizerTableau::new(n);
            let mut psi = DVector::from_element(1 << n, C64::new(0.0, 0.0));
            psi[0] = C64::new(1.0, 0.0);
            for _ in 0..40 {
                let a = rng.random_range(0..n);
                let b = (a + rng.random_range(1..n)) % n;
                let (kind, support) = match rng.random_range(0..4) {
                    0 => {
                        tab.h(a).unwrap();
                        (GateKind::H, vec![qs[a]])
                    }
                    1 => {
                        tab.s(a).unwrap();
                        (GateKind::S, vec![qs[a]])
                    }
                    2 => {
                        tab.cnot(a, b).unwrap();
                        (GateKind::Cnot, vec![qs[a], qs[b]])
                    }
                    _ => {
                        tab.swap(a, b).unwrap();
                        (GateKind::Swap, vec![qs[a], qs[b]])
                    }
                };
                let u = DenseOperator::new(support, kind.matrix()).unwrap().embed(&qs).unwrap();
                psi = u.matrix() * psi;
            }
            assert!(tab.check_invariants());
            let rho = DensityMatrix::pure(qs.clone(), &psi).unwrap();
            for _ in 0..30 {
                let letters: Vec<Pauli> = (0..n).map(|_| Pauli::ALL[rng.random_range(0..4)]).collect();
                let idx: Vec<usize> = (0..n).collect();
                let want = rho.expectation_real(&PauliString::new(qs.iter().copied().zip(letters.iter().copied())).to_operator()).unwrap();
                let got = tab.expectation(&idx, &letters, false).unwrap() as f64;
                assert!((got - want).abs() < 1e-10, "{letters:?}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn three_by_three_agrees_with_dense() {
        let plan = PreparationPlan::surface_code(3, 3).unwrap();
        let circ = StabilizerCircuit::from_plan(&plan).unwrap();
        let tab = circ.run().unwrap();
        let mut checks: Vec<PauliString> = SurfaceCodeLattice::new(3, 3)
            .unwrap()
            .generators()
            .iter()
            .map(|g| generator_pauli(g.kind, &g.sites))
            .collect();
        for r in 1..=3 {
            for c in 0..3 {
                for p in Pauli::NON_IDENTITY {
                    checks.push(PauliString::single(QubitId::system(r, c), p));
                    checks.push(PauliString::new([(QubitId::system(r, c), p), (QubitId::system(r.min(2) + 1, (c + 1) % 3), Pauli::Z)]));
                }
            }
        }
        for p in checks {
            let dense = expectation_local(&plan, &LocalObservable::new(p.clone()).unwrap()).unwrap();
            let stab = circ.pauli_expectation(&tab, &p).unwrap() as f64;
            assert!((dense - stab).abs() < 1e-10, "{p}: {dense} vs {stab}");
        }
    }

    #[test]
    fn large_encodings_set_every_generator() {
        for l in [5, 7, 9] {
            let plan = PreparationPlan::surface_code(l, l).unwrap();
            let circ = StabilizerCircuit::from_plan(&plan).unwrap();
            let tab = circ.run().unwrap();
            let lat = SurfaceCodeLattice::new(l, l).unwrap();
            for g in lat.generators() {
                assert_eq!(circ.pauli_expectation(&tab, &generator_pauli(g.kind, &g.sites)).unwrap(), 1);
            }
            for row in 1..=l {
                let zbar = generator_pauli(StabilizerKind::Z, &lat.logical_z(row));
                assert_ne!(circ.pauli_expectation(&tab, &zbar).unwrap(), 0);
            }
            let x = PauliString::single(QubitId::system(2, 2), Pauli::X);
            assert_eq!(circ.pauli_expectation(&tab, &x).unwrap(), 0);
        }
    }

    #[test]
    fn non_clifford_plans_are_rejected() {
        let v = DVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]);
        let plan = PreparationPlan::trivial(&[vec![v.clone(), v]]).unwrap();
        assert!(matches!(StabilizerCircuit::from_plan(&plan), Err(Error::NonClifford(_))));
        let spec = NoiseSpec { gate_family: crate::circuits::GateNoise::CoherentOverrotation, ..NoiseSpec::new(0.1) };
        assert!(PauliNoiseModel::from_spec(&spec).is_err());
        assert!(PauliNoiseModel::from_spec(&NoiseSpec::new(0.1)).is_ok());
    }

    #[test]
    fn annihilation_leaves_only_the_logical() {
        for lx in [3, 5, 7, 9] {
            let rep = check_row_annihilation(lx).unwrap();
            assert_eq!(rep.candidates, 4usize.pow(lx as u32) - 1);
            assert!(rep.only_logical_survives(), "lx={lx}: {:?}", rep.survivors);
        }
        let rep = check_row_annihilation(3).unwrap();
        for c in 0..3 {
            assert!(!rep.survivors.contains(&PauliString::single(QubitId::system(2, c), Pauli::X)));
        }
        // closed under products
        for a in &rep.survivors {
            for b in &rep.survivors {
                let prod = PauliString::new(
                    (0..3).map(|c| {
                        let q = QubitId::system(2, c);
                        let (ax, az) = a.get(&q).bits();
                        let (bx, bz) = b.get(&q).bits();
                        (q, Pauli::from_bits(ax ^ bx, az ^ bz))
                    }),
                );
                assert!(rep.survivors.contains(&prod));
            }
        }
    }

    #[test]
    fn noiseless_monte_carlo_is_exact() {
        let plan = PreparationPlan::surface_code(3, 3).unwrap();
        let circ = StabilizerCircuit::from_plan(&plan).unwrap();
        let tab = circ.run().unwrap();
        let p = generator_pauli(StabilizerKind::X, &[(2, 1), (2, 2), (3, 1), (3, 2)]);
        let est = circ.monte_carlo(&tab, &p, &PauliNoiseModel::noiseless(), 100, 3).unwrap();
        assert_eq!((est.mean, est.stderr), (1.0, 0.0));
    }

    /// Bell pair, then a second CNOT undoing it; depolarizing faults after
    /// each of the three gates, averaged over all 4 * 16 * 16 fault patterns.
    #[test]
    fn bell_pair_fault_enumeration() {
        let text = "INIT_Z bath:_:0\nINIT_Z bath:_:1\n0 H bath:_:0\n1 CNOT bath:_:0 bath:_:1\n2 CNOT bath:_:0 bath:_:1\n";
        let circ = StabilizerCircuit::parse(text).unwrap();
        let tab = circ.run().unwrap();
        let p = 0.2;
        let model = PauliNoiseModel { gate_p: p, state_flip: 0.0, meas_scale: 1.0 };
        let xz = PauliString::new([(QubitId::bath(0), Pauli::X), (QubitId::bath(1), Pauli::Z)]);

        let mut oracle = 0.0;
        let all2: Vec<(Pauli, Pauli)> = Pauli::ALL.iter().flat_map(|a| Pauli::ALL.iter().map(move |b| (*a, *b))).collect();
        let weight = |e: bool, k: f64| if e { p / k } else { 1.0 - p + p / k };
        for f0 in Pauli::ALL {
            for f1 in &all2 {
                for f2 in &all2 {
                    let w = weight(f0 != Pauli::I, 4.0)
                        * weight(*f1 != (Pauli::I, Pauli::I), 16.0)
                        * weight(*f2 != (Pauli::I, Pauli::I), 16.0);
                    let mut t = StabilizerTableau::new(2);
                    t.h(0).unwrap();
                    t.pauli(0, f0).unwrap();
                    t.cnot(0, 1).unwrap();
                    t.pauli(0, f1.0).unwrap();
                    t.pauli(1, f1.1).unwrap();
                    t.cnot(0, 1).unwrap();
                    t.pauli(0, f2.0).unwrap();
                    t.pauli(1, f2.1).unwrap();
                    oracle += w * t.expectation(&[0, 1], &[Pauli::X, Pauli::Z], false).unwrap() as f64;
                }
            }
        }
        assert!(oracle < 1.0 - p);
        let exact = circ.noisy_expectation_exact(&tab, &xz, &model).unwrap();
        assert!((exact - oracle).abs() < 1e-12, "{exact} vs {oracle}");
        let est = circ.monte_carlo(&tab, &xz, &model, 200_000, 7).unwrap();
        assert!((est.mean - oracle).abs() < 4.0 * est.stderr, "{est:?} vs {oracle}");
    }

    #[test]
    fn single_noisy_cnot_on_a_bell_pair() {
        let circ = StabilizerCircuit::parse("INIT_X bath:_:0\nINIT_Z bath:_:1\n0 CNOT bath:_:0 bath:_:1\n").unwrap();
        let tab = circ.run().unwrap();
        let zz = PauliString::new([(QubitId::bath(0), Pauli::Z), (QubitId::bath(1), Pauli::Z)]);
        for p in [0.0, 0.01, 0.3] {
            let model = PauliNoiseModel { gate_p: p, state_flip: 0.0, meas_scale: 1.0 };
            // 8 of the 16 fault Paulis anticommute with ZZ
            let want = 1.0 - 2.0 * p * 8.0 / 16.0;
            assert!((circ.noisy_expectation_exact(&tab, &zz, &model).unwrap() - want).abs() < 1e-14);
        }
    }

    #[test]
    fn monte_carlo_is_reproducible() {
        let plan = PreparationPlan::surface_code(5, 4).unwrap();
        let circ = StabilizerCircuit::from_plan(&plan).unwrap();
        let tab = circ.run().unwrap();
        let p = generator_pauli(StabilizerKind::Z, &[(2, 0), (2, 1), (3, 0), (3, 1)]);
        let model = PauliNoiseModel::from_spec(&NoiseSpec::new(0.02)).unwrap();
        let a = circ.monte_carlo(&tab, &p, &model, 20_000, 11).unwrap();
        let b = circ.monte_carlo(&tab, &p, &model, 20_000, 11).unwrap();
        assert_eq!(a, b);
        let exact = circ.noisy_expectation_exact(&tab, &p, &model).unwrap();
        assert!((a.mean - exact).abs() < 4.0 * a.stderr);
        assert!(a.csv_row(0.02, 5, 4, "Z4").starts_with("20000,"));
    }

    #[test]
    fn exact_noisy_value_matches_dense() {
        let plan = PreparationPlan::surface_code(3, 3).unwrap();
        let circ = StabilizerCircuit::from_plan(&plan).unwrap();
        let tab = circ.run().unwrap();
        for spec in [NoiseSpec::new(0.05), NoiseSpec { state_family: crate::circuits::StateNoise::MixWithOrthogonal, ..NoiseSpec::new(0.02) }] {
            let noisy = plan.with_noise(&spec).unwrap();
            let model = PauliNoiseModel::from_spec(&spec).unwrap();
            for p in [
                generator_pauli(StabilizerKind::X, &[(2, 1), (2, 2), (3, 1), (3, 2)]),
                generator_pauli(StabilizerKind::Z, &[(1, 0), (1, 1), (2, 0), (2, 1)]),
                generator_pauli(StabilizerKind::Z, &[(2, 0), (2, 1), (2, 2)]),
            ] {
                let obs = crate::circuits::noisy_pauli(&p, &spec).unwrap();
                let dense = crate::fcs::expectation_operator(&noisy, &obs).unwrap();
                let stab = circ.noisy_expectation_exact(&tab, &p, &model).unwrap();
                assert!((dense - stab).abs() < 1e-10, "{p}: {dense} vs {stab}");
            }
        }
    }
}
