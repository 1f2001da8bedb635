//! Certified noise: every noisy element carries an upper bound on its distance
//! to the ideal one that holds by construction.

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::quantum::kernel::DenseRegister;
use crate::quantum::random::haar_unitary;
use crate::quantum::{matrix_operator_norm, pauli_basis_matrix, CMatrix, DenseOperator, DensityMatrix, Pauli, PauliString, QubitId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateNoise {
    /// `(1 - p) U + p (Phi o U)` with `Phi` completely depolarizing on the gate.
    DepolarizeAfterGate,
    /// `exp(-i theta G / 2) U` for a seeded random Pauli `G` on the gate.
    CoherentOverrotation,
    /// `(1 - p) U + p (N o U)` for a seeded random channel `N` on the gate.
    MixWithFixedChannel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StateNoise {
    /// `(1 - q) omega + q (I - omega)`.
    MixWithOrthogonal,
    /// `(1 - q) omega + q I / 2`.
    MixWithMaximallyMixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MeasurementNoise {
    /// `(1 - eps) sigma`.
    Shrink,
    /// `cos(phi) sigma + sin(phi) sigma'` with `sigma'` a seeded anticommuting Pauli.
    RotateAxis,
}

/// Which elements of the pipeline receive noise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct NoiseTargets {
    pub gates: bool,
    pub states: bool,
    pub measurement: bool,
}

impl Default for NoiseTargets {
    fn default() -> Self {
        Self { gates: true, states: true, measurement: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub epsilon: f64,
    pub gate_family: GateNoise,
    pub state_family: StateNoise,
    pub meas_family: MeasurementNoise,
    pub seed: u64,
    pub targets: NoiseTargets,
}

impl NoiseSpec {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            gate_family: GateNoise::DepolarizeAfterGate,
            state_family: StateNoise::MixWithMaximallyMixed,
            meas_family: MeasurementNoise::Shrink,
            seed: 0,
            targets: NoiseTargets::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) || self.epsilon.is_nan() {
            return Err(crate::error::out_of_range("epsilon", self.epsilon, 0.0, 1.0));
        }
        Ok(())
    }

    /// Mixing weight of the convex gate families.
    pub fn gate_mixing_weight(&self) -> f64 {
        self.epsilon / 2.0
    }

    pub fn state_mixing_weight(&self) -> f64 {
        self.epsilon / 2.0
    }

    /// Over-rotation angle with `2 ||V - I|| = 4 sin(theta / 4) = eps`.
    pub fn overrotation_angle(&self) -> f64 {
        4.0 * (self.epsilon / 4.0).asin()
    }

    /// Rotation angle with `||sigma~ - sigma|| = 2 sin(phi / 2) = eps`.
    pub fn axis_rotation_angle(&self) -> f64 {
        2.0 * (self.epsilon / 2.0).min(1.0).asin()
    }

    pub(crate) fn rng(&self, tags: &[u64]) -> ChaCha8Rng {
        let mut h = self.seed ^ 0x9E37_79B9_7F4A_7C15;
        for &t in tags {
            h = splitmix(h ^ t.wrapping_mul(0xBF58_476D_1CE4_E5B9));
        }
        ChaCha8Rng::seed_from_u64(h)
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Action applied after the ideal gate in the convex families.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseAction {
    Depolarize,
    Kraus(Vec<CMatrix>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum NoisyGateKind {
    /// `(1 - p) U . U^dagger + p N(U . U^dagger)`.
    Mixture { p: f64, action: NoiseAction },
    /// A perturbed unitary.
    Coherent { unitary: CMatrix },
}

/// A noisy gate paired with its ideal unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct NoisyGate {
    pub ideal: CMatrix,
    pub kind: NoisyGateKind,
    /// Certified upper bound on the diamond distance to the ideal gate.
    pub certificate: f64,
}

impl NoisyGate {
    pub fn exact(u: CMatrix) -> Self {
        Self { ideal: u, kind: NoisyGateKind::Mixture { p: 0.0, action: NoiseAction::Depolarize }, certificate: 0.0 }
    }

    pub fn draw(u: CMatrix, spec: &NoiseSpec, tags: &[u64]) -> Self {
        let d = u.nrows();
        let n = d.trailing_zeros() as usize;
        if spec.epsilon == 0.0 {
            return Self::exact(u);
        }
        match spec.gate_family {
            GateNoise::DepolarizeAfterGate => {
                let p = spec.gate_mixing_weight();
                Self { ideal: u, kind: NoisyGateKind::Mixture { p, action: NoiseAction::Depolarize }, certificate: 2.0 * p }
            }
            GateNoise::MixWithFixedChannel => {
                let p = spec.gate_mixing_weight();
                let mut rng = spec.rng(tags);
                // Random two-outcome channel from a Haar unitary dilation.
                let w = haar_unitary(2 * d, &mut rng);
                let kraus = (0..2).map(|k| w.view((k * d, 0), (d, d)).into_owned()).collect();
                Self { ideal: u, kind: NoisyGateKind::Mixture { p, action: NoiseAction::Kraus(kraus) }, certificate: 2.0 * p }
            }
            GateNoise::CoherentOverrotation => {
                let mut rng = spec.rng(tags);
                let idx = rng.random_range(1..1usize << (2 * n));
                let g = pauli_basis_matrix(n, idx);
                let theta = spec.overrotation_angle();
                let v = CMatrix::identity(d, d) * C64::new((theta / 2.0).cos(), 0.0)
                    - g * C64::new(0.0, (theta / 2.0).sin());
                let unitary = v * &u;
                let certificate = 2.0 * matrix_operator_norm(&(&unitary - &u));
                Self { ideal: u, kind: NoisyGateKind::Coherent { unitary }, certificate }
            }
        }
    }

    /// Kraus operators of the noisy gate.
    pub fn kraus(&self) -> Vec<CMatrix> {
        match &self.kind {
            NoisyGateKind::Coherent { unitary } => vec![unitary.clone()],
            NoisyGateKind::Mixture { p, action } => {
                let d = self.ideal.nrows();
                let mut out = vec![&self.ideal * C64::new((1.0 - p).sqrt(), 0.0)];
                if *p > 0.0 {
                    match action {
                        NoiseAction::Depolarize => {
                            let n = d.trailing_zeros() as usize;
                            let s = (p / (d * d) as f64).sqrt();
                            for i in 0..1usize << (2 * n) {
                                out.push(pauli_basis_matrix(n, i) * &self.ideal * C64::new(s, 0.0));
                            }
                        }
                        NoiseAction::Kraus(ks) => {
                            for k in ks {
                                out.push(k * &self.ideal * C64::new(p.sqrt(), 0.0));
                            }
                        }
                    }
                }
                out
            }
        }
    }

    pub(crate) fn apply_forward(&self, reg: &mut DenseRegister, pos: &[usize]) {
        match &self.kind {
            NoisyGateKind::Coherent { unitary } => reg.conjugate(pos, unitary),
            NoisyGateKind::Mixture { p, action } => {
                reg.conjugate(pos, &self.ideal);
                if *p > 0.0 {
                    mix_in_action(reg, pos, *p, action, false);
                }
            }
        }
    }

    pub(crate) fn apply_dual(&self, reg: &mut DenseRegister, pos: &[usize]) {
        match &self.kind {
            NoisyGateKind::Coherent { unitary } => reg.heisenberg(pos, unitary),
            NoisyGateKind::Mixture { p, action } => {
                if *p > 0.0 {
                    mix_in_action(reg, pos, *p, action, true);
                }
                reg.heisenberg(pos, &self.ideal);
            }
        }
    }
}

/// `X <- (1 - p) X + p N(X)` (or `N^*` when `dual`).
fn mix_in_action(reg: &mut DenseRegister, pos: &[usize], p: f64, action: &NoiseAction, dual: bool) {
    let noisy = match action {
        NoiseAction::Depolarize => {
            let mut r = reg.clone();
            r.depolarize(pos);
            r.data
        }
        NoiseAction::Kraus(ks) => {
            let mut acc = vec![C64::new(0.0, 0.0); reg.data.len()];
            for k in ks {
                let mut r = reg.clone();
                if dual { r.heisenberg(pos, k) } else { r.conjugate(pos, k) }
                for (a, b) in acc.iter_mut().zip(&r.data) {
                    *a += b;
                }
            }
            acc
        }
    };
    let (a, b) = (C64::new(1.0 - p, 0.0), C64::new(p, 0.0));
    for (x, y) in reg.data.iter_mut().zip(&noisy) {
        *x = a * *x + b * y;
    }
}

/// Noisy version of a single-qubit state with its exact trace distance.
pub fn noisy_state(omega: &DensityMatrix, spec: &NoiseSpec) -> Result<(DensityMatrix, f64)> {
    spec.validate()?;
    if omega.support().len() != 1 {
        return Err(Error::InvalidState("state noise acts on single-qubit factors".into()));
    }
    let q = spec.state_mixing_weight();
    if q == 0.0 {
        return Ok((omega.clone(), 0.0));
    }
    let m = omega.matrix();
    let id = CMatrix::identity(2, 2);
    let other = match spec.state_family {
        StateNoise::MixWithOrthogonal => &id - m,
        StateNoise::MixWithMaximallyMixed => id * C64::new(0.5, 0.0),
    };
    let noisy = m * C64::new(1.0 - q, 0.0) + other * C64::new(q, 0.0);
    let dist = DenseOperator::new(omega.support().to_vec(), &noisy - m)?.trace_norm();
    Ok((DensityMatrix::new(omega.support().to_vec(), noisy)?, dist))
}

/// Noisy single-qubit Pauli factor for site `q`.
pub fn noisy_pauli_factor(p: Pauli, q: &QubitId, spec: &NoiseSpec) -> CMatrix {
    let sigma = p.matrix();
    if p == Pauli::I || spec.epsilon == 0.0 || !spec.targets.measurement {
        return sigma;
    }
    match spec.meas_family {
        MeasurementNoise::Shrink => sigma * C64::new(1.0 - spec.epsilon, 0.0),
        MeasurementNoise::RotateAxis => {
            let mut rng = spec.rng(&[0x4D45_4153, q.position as u64, register_tag(q)]);
            let others: Vec<Pauli> = Pauli::NON_IDENTITY.into_iter().filter(|x| *x != p).collect();
            let other = others[rng.random_range(0..2)];
            let phi = spec.axis_rotation_angle();
            sigma * C64::new(phi.cos(), 0.0) + other.matrix() * C64::new(phi.sin(), 0.0)
        }
    }
}

pub(crate) fn register_tag(q: &QubitId) -> u64 {
    use crate::quantum::Register;
    match q.register {
        Register::Bath => 1,
        Register::System(r) => 2 + 4 * r as u64,
        Register::Sink(r) => 3 + 4 * r as u64,
        Register::Ancilla(r) => 4 + 4 * r as u64,
    }
}

/// `O~`: the tensor product of noisy factors, identity factors exact.
pub fn noisy_pauli(p: &PauliString, spec: &NoiseSpec) -> Result<DenseOperator> {
    spec.validate()?;
    let support = p.support();
    let mut m = CMatrix::from_element(1, 1, p.sign.value());
    for q in &support {
        m = noisy_pauli_factor(p.get(q), q, spec).kronecker(&m);
    }
    DenseOperator::new(support, m)
}
