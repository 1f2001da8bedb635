//! Local expectation values of the 2D state produced row by row, in the
//! Schrödinger picture (windowed bath evolution) and the Heisenberg picture.

mod lemmas;

use std::collections::BTreeSet;

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::circuits::{
    noisy_pauli, noisy_state, surface_code_transition_with, trivial_state_transition, NoiseSpec, StabilizerOrder,
    TransitionMap,
};
use crate::circuits::surface::surface_code_bath_init;
use crate::error::{out_of_range, Error, Result};
use crate::locality::{Ball, InteractionGraph};
use crate::quantum::kernel::DenseRegister;
use crate::quantum::{real_part, DenseOperator, DensityMatrix, PauliString, QubitId};

pub use lemmas::{
    dual_deviation, noisy_pauli_check, partial_perturbation_check, product_perturbation_check, support_growth_check, BoundCheck, SupportCheck,
};

/// Largest dense register used unless `HQS_DENSE_QUBIT_CEILING` says otherwise.
pub const DEFAULT_DENSE_CEILING: usize = 13;

pub fn dense_ceiling() -> usize {
    std::env::var("HQS_DENSE_QUBIT_CEILING")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_CEILING)
}

/// Everything needed to produce the 2D state: one transition per row and a
/// product initial state on the bath.
#[derive(Clone, Debug)]
pub struct PreparationPlan {
    lx: usize,
    transitions: Vec<TransitionMap>,
    bath_init: Vec<DensityMatrix>,
    noise: Option<NoiseSpec>,
    ceiling: usize,
}

impl PreparationPlan {
    pub fn new(transitions: Vec<TransitionMap>, bath_init: Vec<DensityMatrix>) -> Result<Self> {
        let Some(first) = transitions.first() else {
            return Err(Error::InvalidCircuit("a plan needs at least one transition".into()));
        };
        let bath = first.partition().bath.clone();
        for (i, tm) in transitions.iter().enumerate() {
            if tm.partition().bath != bath {
                return Err(Error::SupportMismatch(format!("transition {} uses a different bath", i + 1)));
            }
            if tm.row() != i + 1 {
                return Err(Error::InvalidCircuit(format!("transition {} is labelled row {}", i + 1, tm.row())));
            }
        }
        let init: Vec<QubitId> = bath_init.iter().flat_map(|s| s.support().to_vec()).collect();
        if init.len() != bath.len() || bath_init.iter().any(|s| s.support().len() != 1) || !bath.iter().all(|q| init.contains(q)) {
            return Err(Error::InvalidState("bath state must be a product of one factor per bath qubit".into()));
        }
        Ok(Self { lx: bath.len(), transitions, bath_init, noise: None, ceiling: dense_ceiling() })
    }

    pub fn surface_code(lx: usize, ly: usize) -> Result<Self> {
        Self::surface_code_with(lx, ly, StabilizerOrder::default())
    }

    pub fn surface_code_with(lx: usize, ly: usize, order: StabilizerOrder) -> Result<Self> {
        let tms = (1..=ly).map(|t| surface_code_transition_with(lx, t, ly, order)).collect::<Result<_>>()?;
        Self::new(tms, surface_code_bath_init(lx))
    }

    /// Product state with `rows[r][c]` the (unnormalized) vector at row `r + 1`, column `c`.
    pub fn trivial(rows: &[Vec<DVector<C64>>]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidState("no rows".into()));
        };
        let lx = first.len();
        let zero = vec![DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]); lx];
        let tms = (1..=rows.len())
            .map(|t| trivial_state_transition(lx, t, rows.get(t).unwrap_or(&zero)))
            .collect::<Result<_>>()?;
        let bath_init = first
            .iter()
            .enumerate()
            .map(|(c, psi)| DensityMatrix::pure(vec![QubitId::bath(c)], &(psi / C64::new(psi.norm(), 0.0))))
            .collect::<Result<_>>()?;
        Self::new(tms, bath_init)
    }

    /// Same circuits with every gate and initial factor replaced by its noisy
    /// version. Measurement noise is applied by [`deviation`].
    pub fn with_noise(&self, spec: &NoiseSpec) -> Result<Self> {
        spec.validate()?;
        let transitions = self.transitions.iter().map(|tm| tm.apply_noise(spec)).collect::<Result<_>>()?;
        let bath_init = if spec.targets.states {
            self.bath_init.iter().map(|s| noisy_state(s, spec).map(|x| x.0)).collect::<Result<_>>()?
        } else {
            self.bath_init.clone()
        };
        Ok(Self { transitions, bath_init, noise: Some(*spec), ..self.clone() })
    }

    pub fn with_bath_init(&self, bath_init: Vec<DensityMatrix>) -> Result<Self> {
        let mut p = Self::new(self.transitions.clone(), bath_init)?;
        p.noise = self.noise;
        p.ceiling = self.ceiling;
        Ok(p)
    }

    pub fn with_ceiling(mut self, ceiling: usize) -> Self {
        self.ceiling = ceiling;
        self
    }

    pub fn lx(&self) -> usize {
        self.lx
    }

    pub fn ly(&self) -> usize {
        self.transitions.len()
    }

    pub fn transitions(&self) -> &[TransitionMap] {
        &self.transitions
    }

    pub fn bath_init(&self) -> &[DensityMatrix] {
        &self.bath_init
    }

    pub fn noise(&self) -> Option<&NoiseSpec> {
        self.noise.as_ref()
    }

    pub fn ceiling(&self) -> usize {
        self.ceiling
    }

    pub fn bath(&self) -> &[QubitId] {
        &self.transitions[0].partition().bath
    }

    fn bath_register(&self) -> DenseRegister {
        let mut reg = DenseRegister::scalar(C64::new(1.0, 0.0));
        for s in &self.bath_init {
            reg.push(s.support()[0], s.matrix());
        }
        reg
    }

    fn check_rows(&self, rows: (usize, usize)) -> Result<()> {
        if rows.0 == 0 || rows.1 > self.ly() {
            return Err(out_of_range("row", if rows.0 == 0 { 0.0 } else { rows.1 as f64 }, 1.0, self.ly() as f64));
        }
        Ok(())
    }
}

/// State of the bath after transitions `1..=upto_t`.
pub fn evolve_bath(plan: &PreparationPlan, upto_t: usize) -> Result<DensityMatrix> {
    if upto_t > plan.ly() {
        return Err(out_of_range("t", upto_t as f64, 0.0, plan.ly() as f64));
    }
    let mut reg = plan.bath_register();
    for tm in &plan.transitions[..upto_t] {
        tm.forward(&mut reg, &|_| false, plan.ceiling)?;
    }
    reg.permute(plan.bath())?;
    let m = reg.to_matrix();
    DensityMatrix::new(reg.qubits, (&m + m.adjoint()) * C64::new(0.5, 0.0))
}

/// Pauli observable on system qubits, with the row window it needs.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalObservable {
    pub pauli: PauliString,
    pub first_row: usize,
    pub last_row: usize,
}

fn system_rows(support: &[QubitId]) -> Result<(usize, usize)> {
    let mut rows = support.iter().map(|q| {
        q.system_row().ok_or_else(|| Error::SupportMismatch(format!("{q} is not a system qubit")))
    });
    let Some(first) = rows.next() else {
        return Ok((1, 1));
    };
    let first = first?;
    rows.try_fold((first, first), |(lo, hi), r| {
        let r = r?;
        Ok((lo.min(r), hi.max(r)))
    })
}

impl LocalObservable {
    pub fn new(pauli: PauliString) -> Result<Self> {
        let (first_row, last_row) = system_rows(&pauli.support())?;
        Ok(Self { pauli, first_row, last_row })
    }

    /// Observable on lattice sites `(row, col)`.
    pub fn on_sites(sites: &[(usize, usize)], letter: crate::quantum::Pauli) -> Result<Self> {
        Self::new(PauliString::new(sites.iter().map(|&(r, c)| (QubitId::system(r, c), letter))))
    }

    /// Ball of radius `radius` around `center` that must contain the support.
    pub fn bounding_ball(&self, graph: &InteractionGraph, center: QubitId, radius: usize) -> Result<Ball> {
        let ball = graph.ball(center, radius)?;
        if let Some(q) = self.pauli.support().into_iter().find(|q| !ball.members.contains(q)) {
            return Err(Error::SupportMismatch(format!("{q} lies outside the ball of radius {radius}")));
        }
        Ok(ball)
    }
}

/// `Tr[rho O]` for an operator on system qubits, evolving only the rows it
/// touches and keeping only its own qubits alive.
pub fn expectation_operator(plan: &PreparationPlan, op: &DenseOperator) -> Result<f64> {
    let rows = system_rows(op.support())?;
    plan.check_rows(rows)?;
    if op.support().is_empty() {
        return real_part(op.trace());
    }
    let keep: BTreeSet<QubitId> = op.support().iter().copied().collect();
    let mut reg = plan.bath_register();
    for tm in &plan.transitions[..rows.0 - 1] {
        tm.forward(&mut reg, &|_| false, plan.ceiling)?;
    }
    for tm in &plan.transitions[rows.0 - 1..rows.1] {
        tm.forward(&mut reg, &|q| keep.contains(q), plan.ceiling)?;
    }
    let pos = reg.positions(op.support())?;
    real_part(reg.trace_with(&pos, op.matrix()))
}

pub fn expectation_local(plan: &PreparationPlan, obs: &LocalObservable) -> Result<f64> {
    expectation_operator(plan, &obs.pauli.to_operator())
}

/// `T^*(O)` restricted to the qubits on which it acts nontrivially.
pub fn heisenberg_pullback(op: &DenseOperator, tm: &TransitionMap, ceiling: usize) -> Result<DenseOperator> {
    let full = tm.pullback(op, ceiling)?;
    let keep = full.numerical_support(1e-10);
    full.restrict_to(&keep)
}

/// `Tr[rho_B T^*_1 ... T^*_t (O)]`, pulling `O` all the way back to the initial bath.
pub fn expectation_heisenberg(plan: &PreparationPlan, op: &DenseOperator) -> Result<f64> {
    let rows = system_rows(op.support())?;
    plan.check_rows(rows)?;
    let mut reg = DenseRegister::from_matrix(op.support().to_vec(), op.matrix());
    for tm in plan.transitions[..rows.1].iter().rev() {
        tm.dual(&mut reg, plan.ceiling)?;
    }
    for s in &plan.bath_init {
        if let Some(p) = reg.pos(&s.support()[0]) {
            reg.contract(p, s.matrix());
        }
    }
    debug_assert_eq!(reg.n(), 0);
    real_part(reg.trace())
}

/// `|Tr[rho O] - Tr[rho~ O~]|` with every transition, the initial bath and
/// the observable made noisy according to `spec`.
pub fn deviation(plan: &PreparationPlan, obs: &LocalObservable, spec: &NoiseSpec) -> Result<f64> {
    let ideal = expectation_local(plan, obs)?;
    let noisy_plan = plan.with_noise(spec)?;
    let noisy_obs = noisy_pauli(&obs.pauli, spec)?;
    Ok((ideal - expectation_operator(&noisy_plan, &noisy_obs)?).abs())
}
