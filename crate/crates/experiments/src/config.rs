//! Flat `key = value` experiment configuration.
//!
//! ```text
//! model = surface-code
//! lx = 3
//! ly = 4
//! observable = X@t-1:1 X@t-1:2 X@t-2:1 X@t-2:2; Z@2:0 Z@1:0
//! eps_min = 1e-4
//! eps_max = 1e-2
//! eps_points = 8
//! seeds = 0, 1
//! ```
//! Observable factors are `<letter>@<row>:<col>`; a row written `t` or `t-k`
//! counts down from the last row, so the same observable can be placed at a
//! fixed distance from the active row for every `ly`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use hqs_core::circuits::{GateNoise, MeasurementNoise, NoiseSpec, NoiseTargets, StateNoise};
use hqs_core::fcs::{LocalObservable, PreparationPlan};
use hqs_core::quantum::{Pauli, PauliString, QubitId};
use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::ExpError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    SurfaceCode,
    Trivial,
}

impl FromStr for Model {
    type Err = ExpError;

    fn from_str(s: &str) -> Result<Self, ExpError> {
        match s {
            "surface-code" => Ok(Model::SurfaceCode),
            "trivial" => Ok(Model::Trivial),
            _ => Err(ExpError::Config(format!("unknown model {s:?}"))),
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Model::SurfaceCode => "surface-code",
            Model::Trivial => "trivial",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Row {
    Absolute(usize),
    /// `ly - k`.
    FromTop(usize),
}

impl Row {
    pub fn resolve(self, ly: usize) -> Option<usize> {
        match self {
            Row::Absolute(r) => (1..=ly).contains(&r).then_some(r),
            Row::FromTop(k) => (k < ly).then(|| ly - k),
        }
    }
}

/// Pauli string on lattice sites, possibly anchored to the last row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObservableSpec {
    pub factors: Vec<(Pauli, Row, usize)>,
}

impl ObservableSpec {
    pub fn parse(s: &str) -> Result<Self, ExpError> {
        let bad = |tok: &str| ExpError::Config(format!("bad observable factor {tok:?}, expected e.g. Z@2:1 or X@t-1:0"));
        let factors = s
            .split_whitespace()
            .map(|tok| {
                let (letter, site) = tok.split_once('@').ok_or_else(|| bad(tok))?;
                let mut chars = letter.chars();
                let p = match (chars.next().and_then(Pauli::from_letter), chars.next()) {
                    (Some(p), None) if p != Pauli::I => p,
                    _ => return Err(bad(tok)),
                };
                let (row, col) = site.split_once(':').ok_or_else(|| bad(tok))?;
                let row = match row.strip_prefix('t') {
                    Some("") => Row::FromTop(0),
                    Some(k) => Row::FromTop(k.strip_prefix('-').and_then(|k| k.parse().ok()).ok_or_else(|| bad(tok))?),
                    None => Row::Absolute(row.parse().map_err(|_| bad(tok))?),
                };
                Ok((p, row, col.parse().map_err(|_| bad(tok))?))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if factors.is_empty() {
            return Err(ExpError::Config("empty observable".into()));
        }
        Ok(Self { factors })
    }

    pub fn resolve(&self, lx: usize, ly: usize) -> Result<LocalObservable, ExpError> {
        let mut letters = Vec::new();
        for &(p, row, col) in &self.factors {
            let r = row.resolve(ly).filter(|_| col < lx).ok_or_else(|| {
                ExpError::Config(format!("observable factor {} lies outside the {lx}x{ly} lattice", Self::token(p, row, col)))
            })?;
            let q = QubitId::system(r, col);
            if letters.iter().any(|(x, _)| *x == q) {
                return Err(ExpError::Config(format!("observable acts twice on {q}")));
            }
            letters.push((q, p));
        }
        Ok(LocalObservable::new(PauliString::new(letters))?)
    }

    fn token(p: Pauli, row: Row, col: usize) -> String {
        match row {
            Row::Absolute(r) => format!("{}@{r}:{col}", p.letter()),
            Row::FromTop(0) => format!("{}@t:{col}", p.letter()),
            Row::FromTop(k) => format!("{}@t-{k}:{col}", p.letter()),
        }
    }
}

impl fmt::Display for ObservableSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let toks: Vec<String> = self.factors.iter().map(|&(p, r, c)| Self::token(p, r, c)).collect();
        f.write_str(&toks.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl EpsilonGrid {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                if self.log {
                    (self.min.ln() + s * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + s * (self.max - self.min)
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub model: Model,
    pub lx: usize,
    pub ly: usize,
    pub observables: Vec<ObservableSpec>,
    pub gate_noise: GateNoise,
    pub state_noise: StateNoise,
    pub measurement_noise: MeasurementNoise,
    pub targets: NoiseTargets,
    pub grid: EpsilonGrid,
    /// Explicit epsilons; replaces the grid when set (and may contain 0).
    pub epsilons: Option<Vec<f64>>,
    pub seeds: Vec<u64>,
    /// Constant in the bound column.
    pub bound_c: f64,
    /// Plateau term in the bound column.
    pub delta: f64,
    /// Site state of the trivial model, `cos(theta/2)|0> + e^{i phi} sin(theta/2)|1>`.
    pub trivial_theta: f64,
    pub trivial_phi: f64,
    /// Row counts for the size-independence study.
    pub ly_list: Vec<usize>,
    /// Noise strength for the size-independence study.
    pub epsilon: f64,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            model: Model::SurfaceCode,
            lx: 3,
            ly: 4,
            observables: vec![ObservableSpec::parse("X@t-1:1 X@t-1:2 X@t-2:1 X@t-2:2").expect("valid")],
            gate_noise: GateNoise::DepolarizeAfterGate,
            state_noise: StateNoise::MixWithMaximallyMixed,
            measurement_noise: MeasurementNoise::Shrink,
            targets: NoiseTargets::default(),
            grid: EpsilonGrid { min: 1e-4, max: 1e-1, points: 12, log: true },
            epsilons: None,
            seeds: vec![0],
            bound_c: 1.0,
            delta: 0.0,
            trivial_theta: 0.7,
            trivial_phi: 0.3,
            ly_list: vec![4, 6, 8],
            epsilon: 1e-3,
            out: None,
        }
    }
}

fn list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>, ExpError> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| ExpError::Config(format!("{key}: cannot parse {s:?}"))))
        .collect()
}

fn one<T: FromStr>(key: &str, v: &str) -> Result<T, ExpError> {
    v.parse().map_err(|_| ExpError::Config(format!("{key}: cannot parse {v:?}")))
}

fn gate_name(g: GateNoise) -> &'static str {
    match g {
        GateNoise::DepolarizeAfterGate => "depolarize",
        GateNoise::CoherentOverrotation => "overrotation",
        GateNoise::MixWithFixedChannel => "fixed-channel",
    }
}

fn state_name(s: StateNoise) -> &'static str {
    match s {
        StateNoise::MixWithOrthogonal => "orthogonal",
        StateNoise::MixWithMaximallyMixed => "maximally-mixed",
    }
}

fn meas_name(m: MeasurementNoise) -> &'static str {
    match m {
        MeasurementNoise::Shrink => "shrink",
        MeasurementNoise::RotateAxis => "rotate",
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ExpError> {
        let mut c = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ExpError::Config(format!("line {}: expected key = value", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "model" => c.model = v.parse()?,
                "lx" => c.lx = one(k, v)?,
                "ly" => c.ly = one(k, v)?,
                "observable" | "observables" => {
                    c.observables = v.split(';').map(|s| ObservableSpec::parse(s.trim())).collect::<Result<_, _>>()?
                }
                "gate_noise" => {
                    c.gate_noise = match v {
                        "depolarize" => GateNoise::DepolarizeAfterGate,
                        "overrotation" => GateNoise::CoherentOverrotation,
                        "fixed-channel" => GateNoise::MixWithFixedChannel,
                        _ => return Err(ExpError::Config(format!("unknown gate_noise {v:?}"))),
                    }
                }
                "state_noise" => {
                    c.state_noise = match v {
                        "orthogonal" => StateNoise::MixWithOrthogonal,
                        "maximally-mixed" => StateNoise::MixWithMaximallyMixed,
                        _ => return Err(ExpError::Config(format!("unknown state_noise {v:?}"))),
                    }
                }
                "measurement_noise" => {
                    c.measurement_noise = match v {
                        "shrink" => MeasurementNoise::Shrink,
                        "rotate" => MeasurementNoise::RotateAxis,
                        _ => return Err(ExpError::Config(format!("unknown measurement_noise {v:?}"))),
                    }
                }
                "noise_targets" => {
                    let names: Vec<String> = list(k, v)?;
                    let mut t = NoiseTargets { gates: false, states: false, measurement: false };
                    for name in names {
                        match name.as_str() {
                            "gates" => t.gates = true,
                            "states" => t.states = true,
                            "measurement" => t.measurement = true,
                            "none" => {}
                            _ => return Err(ExpError::Config(format!("unknown noise target {name:?}"))),
                        }
                    }
                    c.targets = t;
                }
                "eps_min" => c.grid.min = one(k, v)?,
                "eps_max" => c.grid.max = one(k, v)?,
                "eps_points" => c.grid.points = one(k, v)?,
                "eps_log" => c.grid.log = one(k, v)?,
                "epsilons" => c.epsilons = Some(list(k, v)?),
                "seeds" => c.seeds = list(k, v)?,
                "bound_c" => c.bound_c = one(k, v)?,
                "delta" => c.delta = one(k, v)?,
                "trivial_theta" => c.trivial_theta = one(k, v)?,
                "trivial_phi" => c.trivial_phi = one(k, v)?,
                "ly_list" => c.ly_list = list(k, v)?,
                "epsilon" => c.epsilon = one(k, v)?,
                "out" => c.out = Some(PathBuf::from(v)),
                _ => return Err(ExpError::Config(format!("unknown key {k:?}"))),
            }
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), ExpError> {
        let fail = |m: String| Err(ExpError::Config(m));
        if self.lx < 2 || self.ly < 1 {
            return fail(format!("lattice {}x{} too small", self.lx, self.ly));
        }
        if self.model == Model::SurfaceCode && self.lx.is_multiple_of(2) {
            return fail(format!("surface code needs odd lx, got {}", self.lx));
        }
        match &self.epsilons {
            Some(e) if e.is_empty() || e.iter().any(|x| !(0.0..1.0).contains(x)) => {
                return fail("epsilons must be a nonempty list in [0, 1)".into())
            }
            Some(_) => {}
            None => {
                let g = &self.grid;
                if !(g.min > 0.0 && g.min < g.max && g.max < 1.0) || g.points < 2 {
                    return fail(format!("bad epsilon grid [{}, {}] x {}", g.min, g.max, g.points));
                }
            }
        }
        if self.seeds.is_empty() || self.observables.is_empty() {
            return fail("need at least one seed and one observable".into());
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return fail(format!("epsilon {} outside [0, 1)", self.epsilon));
        }
        for o in &self.observables {
            o.resolve(self.lx, self.ly)?;
        }
        Ok(())
    }

    pub fn epsilon_values(&self) -> Vec<f64> {
        self.epsilons.clone().unwrap_or_else(|| self.grid.values())
    }

    pub fn noise(&self, epsilon: f64, seed: u64) -> NoiseSpec {
        NoiseSpec {
            epsilon,
            gate_family: self.gate_noise,
            state_family: self.state_noise,
            meas_family: self.measurement_noise,
            seed,
            targets: self.targets,
        }
    }

    pub fn with_ly(&self, ly: usize) -> Self {
        Self { ly, ..self.clone() }
    }

    pub fn plan(&self) -> Result<PreparationPlan, ExpError> {
        Ok(build_plan(self.model, self.lx, self.ly, self.trivial_theta, self.trivial_phi)?)
    }

    /// The config as `key = value` lines, in a fixed order.
    pub fn to_text(&self) -> String {
        let t = self.targets;
        let targets: Vec<&str> =
            [(t.gates, "gates"), (t.states, "states"), (t.measurement, "measurement")].iter().filter(|x| x.0).map(|x| x.1).collect();
        let mut lines = vec![
            format!("model = {}", self.model),
            format!("lx = {}", self.lx),
            format!("ly = {}", self.ly),
            format!("observable = {}", self.observables.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")),
            format!("gate_noise = {}", gate_name(self.gate_noise)),
            format!("state_noise = {}", state_name(self.state_noise)),
            format!("measurement_noise = {}", meas_name(self.measurement_noise)),
            format!("noise_targets = {}", if targets.is_empty() { "none".to_string() } else { targets.join(", ") }),
            format!("eps_min = {:e}", self.grid.min),
            format!("eps_max = {:e}", self.grid.max),
            format!("eps_points = {}", self.grid.points),
            format!("eps_log = {}", self.grid.log),
        ];
        if let Some(e) = &self.epsilons {
            lines.push(format!("epsilons = {}", e.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(", ")));
        }
        lines.extend([
            format!("seeds = {}", join(&self.seeds)),
            format!("bound_c = {:e}", self.bound_c),
            format!("delta = {:e}", self.delta),
            format!("trivial_theta = {}", self.trivial_theta),
            format!("trivial_phi = {}", self.trivial_phi),
            format!("ly_list = {}", join(&self.ly_list)),
            format!("epsilon = {:e}", self.epsilon),
        ]);
        lines.join("\n") + "\n"
    }
}

pub fn build_plan(model: Model, lx: usize, ly: usize, theta: f64, phi: f64) -> hqs_core::Result<PreparationPlan> {
    match model {
        Model::SurfaceCode => PreparationPlan::surface_code(lx, ly),
        Model::Trivial => {
            let psi = DVector::from_vec(vec![
                C64::new((theta / 2.0).cos(), 0.0),
                C64::from_polar((theta / 2.0).sin(), phi),
            ]);
            PreparationPlan::trivial(&vec![vec![psi; lx]; ly])
        }
    }
}
