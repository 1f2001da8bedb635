//! Numerical checks behind `hqs verify` and the acceptance run. Every check
//! uses fixed seeds, so results are reproducible.

use std::fmt;
use std::str::FromStr;

use hqs_core::circuits::{
    no_swap_transition, surface_code_transition, trivial_state_transition, GateNoise, MeasurementNoise, NoiseSpec,
    StateNoise, SurfaceCodeLattice, TransitionMap,
};
use hqs_core::fcs::{
    dual_deviation, expectation_local, expectation_operator, noisy_pauli_check, partial_perturbation_check,
    product_perturbation_check, support_growth_check, LocalObservable, PreparationPlan,
};
use hqs_core::locality::{DeviceLayout, InteractionGraph};
use hqs_core::mixing::{bath_superoperator, eta, eta_at_scale, segments, AscentOptions};
use hqs_core::quantum::random::{random_channel, random_density, random_hermitian, random_operator, random_pure_vector};
use hqs_core::quantum::{DenseOperator, DensityMatrix, Pauli, PauliString, QubitId};
use hqs_core::stabilizer::{check_row_annihilation, PauliNoiseModel, StabilizerCircuit};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, Model, ObservableSpec};
use crate::sweep::{fit_bound, run_sweep, size_independence};
use crate::ExpError;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }

    fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value <= limit, format!("value={value:.3e} limit={limit:.1e}"))
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub fn all_pass(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Duality,
    Locality,
    Lemmas,
    Stabilizer,
    Mixing,
}

impl FromStr for Suite {
    type Err = ExpError;

    fn from_str(s: &str) -> Result<Self, ExpError> {
        match s {
            "duality" => Ok(Suite::Duality),
            "locality" => Ok(Suite::Locality),
            "lemmas" => Ok(Suite::Lemmas),
            "stabilizer" => Ok(Suite::Stabilizer),
            "mixing" => Ok(Suite::Mixing),
            _ => Err(ExpError::Config(format!(
                "unknown suite {s:?} (expected duality, locality, lemmas, stabilizer or mixing)"
            ))),
        }
    }
}

pub fn verify(suite: Suite) -> Result<Vec<Check>, ExpError> {
    Ok(match suite {
        Suite::Duality => duality(100)?,
        Suite::Locality => light_cone()?,
        Suite::Lemmas => {
            let mut v = perturbation_bounds(1000)?;
            v.extend(light_cone()?);
            v.extend(noisy_observables()?);
            v.extend(dual_scaling()?);
            v
        }
        Suite::Stabilizer => {
            let mut v = encoding()?;
            v.extend(annihilation(&[3, 5, 7, 9])?);
            v
        }
        Suite::Mixing => {
            let mut v = surface_mixing()?;
            v.extend(trivial_mixing()?);
            v
        }
    })
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn sys(t: usize, lx: usize) -> Vec<QubitId> {
    (0..lx).map(|c| QubitId::system(t, c)).collect()
}

fn bath(lx: usize) -> Vec<QubitId> {
    (0..lx).map(QubitId::bath).collect()
}

fn random_targets(r: &mut ChaCha8Rng, lx: usize) -> Vec<nalgebra::DVector<C64>> {
    (0..lx).map(|_| random_pure_vector(2, r)).collect()
}

/// Transitions that exercise every builder and noise family.
fn transition_corpus() -> Result<Vec<(String, TransitionMap)>, ExpError> {
    let mut r = rng(101);
    let surface = surface_code_transition(3, 2, 4)?;
    let mut out = vec![
        ("surface".to_string(), surface.clone()),
        ("surface-top".to_string(), surface_code_transition(3, 1, 4)?),
        ("trivial".to_string(), trivial_state_transition(3, 1, &random_targets(&mut r, 3))?),
        ("no-swap".to_string(), no_swap_transition(3, 1, &random_targets(&mut r, 3))?),
    ];
    for (name, gate) in [
        ("depolarize", GateNoise::DepolarizeAfterGate),
        ("overrotation", GateNoise::CoherentOverrotation),
        ("fixed-channel", GateNoise::MixWithFixedChannel),
    ] {
        let spec = NoiseSpec { gate_family: gate, state_family: StateNoise::MixWithOrthogonal, seed: 5, ..NoiseSpec::new(0.05) };
        out.push((format!("surface+{name}"), surface.apply_noise(&spec)?));
    }
    Ok(out)
}

/// `|Tr[T(rho) O] - Tr[rho T^*(O)]|` over random triples, per channel family.
pub fn duality(trials: usize) -> Result<Vec<Check>, ExpError> {
    let mut checks = Vec::new();
    let mut r = rng(1);
    let q = |i: usize| QubitId::bath(i);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let ch = random_channel(&[q(0), q(1)], &[q(2)], 4, &mut r);
        let rho = random_density(&[q(0), q(1), q(3)], &mut r);
        let o = DenseOperator::new(vec![q(3), q(2)], random_operator(4, &mut r))?;
        let lhs = ch.apply(&rho)?.expectation(&o)?;
        let rhs = rho.expectation(&ch.dual().apply(&o)?)?;
        worst = worst.max((lhs - rhs).norm());
    }
    checks.push(Check::at_most(format!("duality/kraus ({trials} triples)"), worst, 1e-10));

    for (name, tm) in transition_corpus()? {
        let b = tm.partition().bath.clone();
        let mut out = b.clone();
        out.extend_from_slice(&tm.partition().system);
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let rho = random_density(&b, &mut r);
            // random operator on two output qubits
            let i = r.random_range(0..out.len());
            let j = (i + 1 + r.random_range(0..out.len() - 1)) % out.len();
            let o = DenseOperator::new(vec![out[i], out[j]], random_operator(4, &mut r))?;
            let lhs = tm.apply(&rho, 13)?.expectation(&o)?;
            let rhs = rho.expectation(&tm.pullback(&o, 13)?)?;
            worst = worst.max((lhs - rhs).norm());
        }
        checks.push(Check::at_most(format!("duality/{name} ({trials} triples)"), worst, 1e-10));
    }
    Ok(checks)
}

/// Every pullback in the corpus stays inside the depth-radius light cone.
pub fn light_cone() -> Result<Vec<Check>, ExpError> {
    let mut r = rng(2);
    let mut checks = Vec::new();
    let mut cases: Vec<(String, TransitionMap, InteractionGraph)> = Vec::new();
    for t in 1..=3 {
        cases.push((format!("surface t={t}"), surface_code_transition(3, t, 4)?, InteractionGraph::build(t, 3, 4, DeviceLayout::SurfaceCode)?));
    }
    for (name, tm) in transition_corpus()? {
        let t = tm.partition().system[0].system_row().expect("system row");
        let layout = if name.starts_with("surface") { DeviceLayout::SurfaceCode } else { DeviceLayout::Ladder };
        cases.push((name, tm, InteractionGraph::build(t, 3, 4, layout)?));
    }
    for (name, tm, g) in cases {
        let mut pool = tm.partition().bath.clone();
        pool.extend_from_slice(&tm.partition().system);
        let mut count = 0;
        let mut ok = true;
        for a in 0..pool.len() {
            for k in [1usize, 2] {
                let support: Vec<QubitId> = (0..k).map(|i| pool[(a + i) % pool.len()]).collect();
                let op = DenseOperator::new(support.clone(), random_hermitian(1 << k, &mut r))?;
                let c = support_growth_check(&tm, &op, &g, 13)?;
                ok &= c.holds();
                count += 1;
            }
        }
        checks.push(Check::new(format!("light-cone/{name}"), ok, format!("{count} pullbacks contained")));
    }
    Ok(checks)
}

fn perturb(rho: &DensityMatrix, eps: f64, r: &mut ChaCha8Rng) -> Result<DensityMatrix, ExpError> {
    let other = random_density(rho.support(), r);
    let m = rho.matrix() * C64::new(1.0 - eps / 2.0, 0.0) + other.matrix() * C64::new(eps / 2.0, 0.0);
    Ok(DensityMatrix::new(rho.support().to_vec(), m)?)
}

/// Product-state perturbation bounds: bath expectation values and open-leg
/// partial traces over the system.
pub fn perturbation_bounds(trials: usize) -> Result<Vec<Check>, ExpError> {
    let mut r = rng(3);
    let (mut worst1, mut worst2): (f64, f64) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let b = bath(4);
    let s = sys(1, 3);
    for trial in 0..trials {
        let eps = 10f64.powf(-r.random_range(0.0..3.0));
        let rho: Vec<DensityMatrix> = b.iter().map(|q| random_density(&[*q], &mut r)).collect();
        let noisy = rho.iter().map(|x| perturb(x, eps, &mut r)).collect::<Result<Vec<_>, _>>()?;
        let k = 1 + trial % 4;
        let op = DenseOperator::new(b[..k].to_vec(), random_operator(1 << k, &mut r))?;
        let c = product_perturbation_check(&rho, &noisy, &op)?;
        worst1 = worst1.max(c.lhs - c.rhs);

        let omega: Vec<DensityMatrix> = s.iter().map(|q| random_density(&[*q], &mut r)).collect();
        let noisy = omega.iter().map(|x| perturb(x, eps, &mut r)).collect::<Result<Vec<_>, _>>()?;
        let k = 1 + trial % 3;
        let mut support = s[..k].to_vec();
        support.push(b[trial % 4]);
        let op = DenseOperator::new(support, random_operator(1 << (k + 1), &mut r))?;
        let c = partial_perturbation_check(&omega, &noisy, &op)?;
        worst2 = worst2.max(c.lhs - c.rhs);
    }
    Ok(vec![
        Check::at_most(format!("bath-state perturbation ({trials} trials), max lhs-rhs"), worst1, 1e-10),
        Check::at_most(format!("system-state perturbation ({trials} trials), max lhs-rhs"), worst2, 1e-10),
    ])
}

/// `||O - O~|| <= n eps` for noisy Pauli observables of every family.
pub fn noisy_observables() -> Result<Vec<Check>, ExpError> {
    let mut checks = Vec::new();
    let mut r = rng(4);
    for meas in [MeasurementNoise::Shrink, MeasurementNoise::RotateAxis] {
        let mut worst = f64::NEG_INFINITY;
        for trial in 0..200 {
            let n = 1 + trial % 5;
            let p = PauliString::new((0..n).map(|c| {
                (QubitId::system(1 + c / 3, c % 3), [Pauli::X, Pauli::Y, Pauli::Z][r.random_range(0..3)])
            }));
            let spec = NoiseSpec { meas_family: meas, seed: trial as u64, ..NoiseSpec::new(r.random_range(0.0..0.5)) };
            let c = noisy_pauli_check(&p, &spec)?;
            worst = worst.max(c.lhs - c.rhs);
        }
        checks.push(Check::at_most(format!("noisy observable/{meas:?}, max lhs-rhs"), worst, 1e-12));
    }
    Ok(checks)
}

/// Fitted `K = ||T^*(O) - T~^*(O)|| / (eps ||O|| (r + D)^2)` across
/// `eps` in `[1e-4, 1e-2]`; stable means `max K / min K < 2`.
pub fn dual_scaling() -> Result<Vec<Check>, ExpError> {
    let mut r = rng(5);
    let rot = random_targets(&mut r, 3);
    let cases = [
        ("surface row", surface_code_transition(3, 2, 4)?, sys(2, 3)),
        ("no-swap bath", no_swap_transition(3, 2, &rot)?, vec![QubitId::bath(1)]),
        ("trivial bath", trivial_state_transition(3, 2, &rot)?, vec![QubitId::bath(0), QubitId::bath(1)]),
    ];
    let mut checks = Vec::new();
    for (name, tm, support) in cases {
        let op = DenseOperator::new(support.clone(), random_hermitian(1 << support.len(), &mut r))?;
        let scale = op.operator_norm() * ((1 + tm.depth()) as f64).powi(2);
        for family in [GateNoise::DepolarizeAfterGate, GateNoise::CoherentOverrotation] {
            let mut ks = Vec::new();
            for eps in [1e-4, 3e-4, 1e-3, 3e-3, 1e-2] {
                let noisy = tm.apply_noise(&NoiseSpec { gate_family: family, seed: 9, ..NoiseSpec::new(eps) })?;
                ks.push(dual_deviation(&tm, &noisy, &op, 13)? / (eps * scale));
            }
            let lo = ks.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ks.iter().copied().fold(0.0, f64::max);
            checks.push(Check::new(
                format!("dual deviation scaling/{name}/{family:?}"),
                lo > 0.0 && hi / lo < 2.0,
                format!("K in [{lo:.4e}, {hi:.4e}], ratio {:.3}", hi / lo),
            ));
        }
    }
    Ok(checks)
}

/// Generators are `+1` in the encoded state: dense at `lx = 3`, stabilizer
/// simulation at `lx = 5, 7, 9`.
pub fn encoding() -> Result<Vec<Check>, ExpError> {
    let mut checks = Vec::new();
    let plan = PreparationPlan::surface_code(3, 3)?;
    let mut worst: f64 = 0.0;
    let lat = SurfaceCodeLattice::new(3, 3)?;
    for g in lat.generators() {
        worst = worst.max((expectation_local(&plan, &LocalObservable::new(g.pauli())?)? - 1.0).abs());
    }
    checks.push(Check::at_most("encoding/dense lx=3, max |<S> - 1|", worst, 1e-10));
    for l in [5, 7, 9] {
        let plan = PreparationPlan::surface_code(l, l)?;
        let circ = StabilizerCircuit::from_plan(&plan)?;
        let tab = circ.run()?;
        let lat = SurfaceCodeLattice::new(l, l)?;
        let gens = lat.generators();
        let mut plus = 0;
        for g in &gens {
            plus += (circ.pauli_expectation(&tab, &g.pauli())? == 1) as usize;
        }
        checks.push(Check::new(format!("encoding/stabilizer lx={l}"), plus == gens.len(), format!("{plus}/{} generators +1", gens.len())));
    }
    Ok(checks)
}

pub fn annihilation(sizes: &[usize]) -> Result<Vec<Check>, ExpError> {
    sizes
        .iter()
        .map(|&lx| {
            let rep = check_row_annihilation(lx)?;
            Ok(Check::new(
                format!("annihilation lx={lx}"),
                rep.only_logical_survives(),
                format!("{} of {} strings survive", rep.survivors.len() - 1, rep.candidates),
            ))
        })
        .collect()
}

/// Dense contraction of the surface-code bath map at `lx = 3`, single-row
/// balls of length 1 and 2.
pub fn surface_mixing() -> Result<Vec<Check>, ExpError> {
    let plan = PreparationPlan::surface_code(3, 6)?;
    let opts = AscentOptions::default();
    let mut checks = Vec::new();
    for (t, tp) in [(2, 2), (2, 3), (3, 5)] {
        for ell in [1, 2] {
            let e = eta_at_scale(&plan, t, tp, ell, &opts)?;
            checks.push(Check::new(
                format!("surface mixing lx=3 window {t}..{tp} ell={ell}"),
                e.upper <= 1e-10,
                format!("eta in [{:.2e}, {:.2e}]", e.lower, e.upper),
            ));
        }
    }
    Ok(checks)
}

/// Trivial preparation mixes in one step; without the swap it does not.
pub fn trivial_mixing() -> Result<Vec<Check>, ExpError> {
    let mut r = rng(6);
    let rows: Vec<Vec<_>> = (0..4).map(|_| random_targets(&mut r, 3)).collect();
    let plan = PreparationPlan::trivial(&rows)?;
    let opts = AscentOptions::default();
    let mut worst: f64 = 0.0;
    for len in 1..=3 {
        for ell in 1..=3 {
            for seg in segments(plan.bath(), ell) {
                worst = worst.max(eta(&bath_superoperator(&plan, 1, len, &seg)?).upper);
            }
        }
    }
    let mut checks = vec![Check::at_most("trivial mixing, max eta upper over windows 1..3", worst, 1e-12)];

    let tms = (1..=3).map(|t| no_swap_transition(3, t, &random_targets(&mut r, 3))).collect::<Result<Vec<_>, _>>()?;
    let zeros = bath(3).into_iter().map(DensityMatrix::zero).collect();
    let control = PreparationPlan::new(tms, zeros)?;
    let best = (1..=3).map(|len| eta_at_scale(&control, 1, len, 1, &opts).map(|e| e.lower)).collect::<Result<Vec<_>, _>>()?;
    let top = best.iter().copied().fold(0.0, f64::max);
    checks.push(Check::new("no-swap control, max eta lower", top >= 0.5, format!("lower bounds {best:.3?}")));
    Ok(checks)
}

pub const SLOPE_RANGE: (f64, f64) = (1.0, 1.25);

fn surface_sweep_config(points: usize, max: f64) -> ExperimentConfig {
    let mut c = ExperimentConfig {
        observables: vec![ObservableSpec::parse("X@t-1:1 X@t-1:2 X@t-2:1 X@t-2:2").expect("valid")],
        ..ExperimentConfig::default()
    };
    c.grid.min = 1e-4;
    c.grid.max = max;
    c.grid.points = points;
    c
}

/// Slope over two decades, constant under refinement, and independence of
/// the number of rows.
pub fn main_bound() -> Result<Vec<Check>, ExpError> {
    let mut sink = std::io::sink();
    let mut checks = Vec::new();
    let res = run_sweep(&surface_sweep_config(8, 1e-2), 1, &mut sink)?;
    let f = fit_bound(&res.rows, 0.0)?;
    checks.push(Check::new(
        "log-log slope, eps in [1e-4, 1e-2]",
        (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&f.slope),
        format!("slope={:.4} required [{}, {}]", f.slope, SLOPE_RANGE.0, SLOPE_RANGE.1),
    ));
    let coarse = fit_bound(&run_sweep(&surface_sweep_config(8, 1e-1), 1, &mut sink)?.rows, 0.0)?;
    let fine = fit_bound(&run_sweep(&surface_sweep_config(16, 1e-1), 1, &mut sink)?.rows, 0.0)?;
    let ratio = coarse.c.max(fine.c) / coarse.c.min(fine.c);
    checks.push(Check::new(
        "fitted C under 8 -> 16 point refinement",
        coarse.c.is_finite() && fine.c > 0.0 && ratio < 2.0,
        format!("C={:.4e} -> {:.4e}, ratio {ratio:.3}", coarse.c, fine.c),
    ));
    let mut c = surface_sweep_config(8, 1e-2);
    c.ly_list = vec![4, 6, 8];
    c.epsilon = 1e-3;
    let table = size_independence(&c, 1)?;
    let devs: Vec<f64> = table.entries.iter().map(|e| e.deviation).collect();
    checks.push(Check::new(
        "size independence, ly in {4, 6, 8} at eps=1e-3",
        table.max_spread() <= 0.1,
        format!("spread={:.3e} of mean, deviations {:?}", table.max_spread(), devs),
    ));
    Ok(checks)
}

/// Dense noisy expectation values against stabilizer Monte Carlo.
pub fn cross_oracle(shots: u64) -> Result<Vec<Check>, ExpError> {
    let plan = PreparationPlan::surface_code(3, 4)?;
    let spec = NoiseSpec::new(1e-2);
    let noisy_plan = plan.with_noise(&spec)?;
    let circ = StabilizerCircuit::from_plan(&plan)?;
    let tab = circ.run()?;
    let model = PauliNoiseModel::from_spec(&spec)?;
    let lat = SurfaceCodeLattice::new(3, 4)?;
    let mut observables: Vec<PauliString> = lat.generators().iter().rev().take(4).map(|g| g.pauli()).collect();
    observables.push(lat.generators()[0].pauli());
    let mut checks = Vec::new();
    for (k, p) in observables.iter().enumerate() {
        let dense = expectation_operator(&noisy_plan, &hqs_core::circuits::noisy_pauli(p, &spec)?)?;
        let mc = circ.monte_carlo(&tab, p, &model, shots, 1000 + k as u64)?;
        let z = (dense - mc.mean).abs() / mc.stderr;
        checks.push(Check::new(
            format!("dense vs Monte Carlo, observable {k}"),
            z <= 3.0,
            format!("dense={dense:.6} mc={:.6}+-{:.1e} ({z:.2} sigma)", mc.mean, mc.stderr),
        ));
    }
    Ok(checks)
}

/// Two runs of the same sweep, at different parallelism, give identical bytes.
pub fn determinism() -> Result<Vec<Check>, ExpError> {
    let mut c = surface_sweep_config(3, 1e-2);
    c.seeds = vec![0, 7];
    c.gate_noise = GateNoise::CoherentOverrotation;
    let mut trivial = ExperimentConfig { model: Model::Trivial, ..c.clone() };
    trivial.observables = vec![ObservableSpec::parse("Z@1:0 X@2:1").expect("valid")];
    let mut checks = Vec::new();
    for (name, cfg) in [("surface", c), ("trivial", trivial)] {
        let mut a = Vec::new();
        let mut b = Vec::new();
        run_sweep(&cfg, 1, &mut a)?;
        run_sweep(&cfg, 3, &mut b)?;
        checks.push(Check::new(format!("determinism/{name}"), a == b && !a.is_empty(), format!("{} bytes", a.len())));
    }
    Ok(checks)
}

pub const CRITERIA: [&str; 9] = [
    "dual consistency",
    "stabilizer encoding",
    "exact mixing of the surface-code bath",
    "trivial-state mixing",
    "perturbation and locality bounds",
    "dual deviation scaling",
    "noise bound scaling",
    "dense and Monte Carlo agreement",
    "determinism",
];

/// Checks behind acceptance criterion `n` (1-based).
pub fn criterion(n: usize) -> Result<Vec<Check>, ExpError> {
    match n {
        1 => duality(100),
        2 => encoding(),
        3 => {
            let mut v = annihilation(&[3, 5, 7, 9])?;
            v.extend(surface_mixing()?);
            Ok(v)
        }
        4 => trivial_mixing(),
        5 => {
            let mut v = perturbation_bounds(1000)?;
            v.extend(light_cone()?);
            v.extend(noisy_observables()?);
            Ok(v)
        }
        6 => dual_scaling(),
        7 => main_bound(),
        8 => cross_oracle(100_000),
        9 => determinism(),
        _ => Err(ExpError::Config(format!("no criterion {n}"))),
    }
}
