use std::collections::BTreeSet;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{out_of_range, Error, Result};

/// Floor under `eta - delta` before taking logs.
pub const LOG_FLOOR: f64 = 1e-14;
/// Series whose upper bounds all sit below this count as exactly mixing.
pub const EXACT_TOL: f64 = 1e-10;
/// Relative slack of the classification test.
pub const FIT_TOL: f64 = 0.1;

const HEADER: &str = "# hqs-mixing v1";
const CSV_HEADER: &str = "ell,elapsed,lower,upper";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EtaPoint {
    pub ell: usize,
    pub elapsed: usize,
    pub lower: f64,
    pub upper: f64,
}

/// `eta <= c ell^alpha e^{-gamma t} + delta`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MixingFit {
    pub c: f64,
    pub alpha: f64,
    /// `+inf` for exact mixing.
    pub gamma: f64,
    pub delta: f64,
    /// RMS of the log-space residuals.
    pub residual: f64,
}

impl MixingFit {
    pub fn envelope(&self, ell: usize, elapsed: usize) -> f64 {
        if self.gamma.is_infinite() {
            return self.delta;
        }
        self.c * (ell as f64).powf(self.alpha) * (-self.gamma * elapsed as f64).exp() + self.delta
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixingReport {
    pub points: Vec<EtaPoint>,
    pub fit: MixingFit,
    pub ell0: usize,
    pub classified: bool,
    pub exact_mixing: bool,
    pub gamma_unconstrained: bool,
    /// Free-form `key = value` context (model, lx, window start).
    pub meta: Vec<(String, String)>,
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

/// Plateau of the series: median of the last quartile in elapsed time if
/// that tail is flat, otherwise zero.
fn plateau(points: &[EtaPoint]) -> f64 {
    let times: Vec<usize> = points.iter().map(|p| p.elapsed).collect::<BTreeSet<_>>().into_iter().collect();
    let keep = times.len().div_ceil(4);
    let cut = times[times.len() - keep];
    let mut tail: Vec<f64> = points.iter().filter(|p| p.elapsed >= cut).map(|p| p.upper).collect();
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = tail.iter().copied().fold(0.0, f64::max);
    let m = median(&mut tail);
    if m > 0.0 && hi - lo <= FIT_TOL * m { m } else { 0.0 }
}

/// Fits the local rapid mixing envelope to the upper ends of the intervals.
pub fn fit_mixing(points: &[EtaPoint]) -> Result<MixingReport> {
    let ells: BTreeSet<usize> = points.iter().map(|p| p.ell).collect();
    for &ell in &ells {
        let times: BTreeSet<usize> = points.iter().filter(|p| p.ell == ell).map(|p| p.elapsed).collect();
        if times.len() < 3 {
            return Err(Error::InvalidOperator(format!("need 3 elapsed times for ell = {ell}, got {}", times.len())));
        }
    }
    if ells.is_empty() {
        return Err(Error::InvalidOperator("empty eta series".into()));
    }
    if points.iter().any(|p| p.lower.is_nan() || p.upper.is_nan() || p.lower > p.upper + 1e-12) {
        return Err(Error::InvalidOperator("interval with lower > upper".into()));
    }
    let max_ell = *ells.last().unwrap();
    let base = MixingReport {
        points: points.to_vec(),
        fit: MixingFit { c: 0.0, alpha: 0.0, gamma: f64::INFINITY, delta: 0.0, residual: 0.0 },
        ell0: max_ell,
        classified: true,
        exact_mixing: false,
        gamma_unconstrained: false,
        meta: Vec::new(),
    };
    if points.iter().all(|p| p.upper <= EXACT_TOL) {
        return Ok(MixingReport { exact_mixing: true, ..base });
    }

    let delta = plateau(points);
    let decaying: Vec<&EtaPoint> = points.iter().filter(|p| p.upper - delta > LOG_FLOOR * 1e2).collect();
    let distinct_t: BTreeSet<usize> = decaying.iter().map(|p| p.elapsed).collect();
    let mut report = if distinct_t.len() < 2 {
        // nothing above the plateau to fit a rate to
        let c = points.iter().map(|p| (p.upper - delta).max(0.0)).fold(0.0, f64::max);
        MixingReport {
            fit: MixingFit { c, alpha: 0.0, gamma: 0.0, delta, residual: 0.0 },
            gamma_unconstrained: true,
            ..base
        }
    } else {
        let with_alpha = ells.len() > 1;
        let cols = if with_alpha { 3 } else { 2 };
        let a = DMatrix::from_fn(points.len(), cols, |i, j| match j {
            0 => 1.0,
            1 => -(points[i].elapsed as f64),
            _ => (points[i].ell as f64).ln(),
        });
        let y = DVector::from_iterator(points.len(), points.iter().map(|p| (p.upper - delta).max(LOG_FLOOR).ln()));
        let x = a.clone().svd(true, true).solve(&y, 1e-12).map_err(|e| Error::InvalidOperator(e.to_string()))?;
        let r = &a * &x - &y;
        MixingReport {
            fit: MixingFit {
                c: x[0].exp(),
                alpha: if with_alpha { x[2] } else { 0.0 },
                gamma: x[1],
                delta,
                residual: (r.norm_squared() / points.len() as f64).sqrt(),
            },
            ..base
        }
    };

    // largest prefix of scales on which the envelope holds
    let holds = |p: &EtaPoint| p.upper <= report.fit.envelope(p.ell, p.elapsed) * (1.0 + FIT_TOL) + 1e-12;
    let rate_ok = report.gamma_unconstrained || report.fit.gamma > 0.0;
    let mut ell0 = 0;
    for &ell in &ells {
        if rate_ok && points.iter().filter(|p| p.ell == ell).all(holds) {
            ell0 = ell;
        } else {
            break;
        }
    }
    report.ell0 = ell0;
    report.classified = ell0 == max_ell;
    Ok(report)
}

/// `C (eps log^2(1/eps) + ell_y delta) ||O||`.
pub fn predicted_bound(epsilon: f64, ell_y: usize, delta: f64, c: f64, op_norm: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(out_of_range("epsilon", epsilon, 0.0, 1.0));
    }
    let noise = if epsilon == 0.0 { 0.0 } else { epsilon * epsilon.ln().powi(2) };
    Ok(c * (noise + ell_y as f64 * delta) * op_norm)
}

fn fmt_f(x: f64) -> String {
    if x.is_infinite() { if x > 0.0 { "inf".into() } else { "-inf".into() } } else { format!("{x:.12e}") }
}

fn parse_f(s: &str, line: usize) -> Result<f64> {
    match s {
        "inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => s.parse().map_err(|_| Error::Parse { line, msg: format!("bad number {s:?}") }),
    }
}

impl MixingReport {
    pub fn with_meta(mut self, key: &str, value: impl ToString) -> Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{HEADER}");
        for (k, v) in &self.meta {
            let _ = writeln!(s, "{k} = {v}");
        }
        let f = &self.fit;
        for (k, v) in [("c", f.c), ("alpha", f.alpha), ("gamma", f.gamma), ("delta", f.delta), ("residual", f.residual)] {
            let _ = writeln!(s, "{k} = {}", fmt_f(v));
        }
        let _ = writeln!(s, "ell0 = {}", self.ell0);
        let _ = writeln!(s, "classified = {}", self.classified);
        let _ = writeln!(s, "exact_mixing = {}", self.exact_mixing);
        let _ = writeln!(s, "gamma_unconstrained = {}", self.gamma_unconstrained);
        let _ = writeln!(s, "{CSV_HEADER}");
        for p in &self.points {
            let _ = writeln!(s, "{},{},{},{}", p.ell, p.elapsed, fmt_f(p.lower), fmt_f(p.upper));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, HEADER)) => {}
            _ => return Err(Error::Parse { line: 1, msg: format!("expected {HEADER:?}") }),
        }
        let mut fit = MixingFit { c: 0.0, alpha: 0.0, gamma: 0.0, delta: 0.0, residual: 0.0 };
        let (mut ell0, mut classified, mut exact, mut unconstrained) = (0, false, false, false);
        let mut meta = Vec::new();
        let mut points = Vec::new();
        let mut in_csv = false;
        for (n, line) in lines {
            if line.is_empty() {
                continue;
            }
            if in_csv {
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 4 {
                    return Err(Error::Parse { line: n, msg: "expected 4 columns".into() });
                }
                let int = |s: &str| s.parse::<usize>().map_err(|_| Error::Parse { line: n, msg: format!("bad integer {s:?}") });
                points.push(EtaPoint { ell: int(f[0])?, elapsed: int(f[1])?, lower: parse_f(f[2], n)?, upper: parse_f(f[3], n)? });
                continue;
            }
            if line == CSV_HEADER {
                in_csv = true;
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse { line: n, msg: "expected key = value".into() })?;
            let (k, v) = (k.trim(), v.trim());
            let flag = |v: &str| v.parse::<bool>().map_err(|_| Error::Parse { line: n, msg: format!("bad flag {v:?}") });
            match k {
                "c" => fit.c = parse_f(v, n)?,
                "alpha" => fit.alpha = parse_f(v, n)?,
                "gamma" => fit.gamma = parse_f(v, n)?,
                "delta" => fit.delta = parse_f(v, n)?,
                "residual" => fit.residual = parse_f(v, n)?,
                "ell0" => ell0 = v.parse().map_err(|_| Error::Parse { line: n, msg: format!("bad integer {v:?}") })?,
                "classified" => classified = flag(v)?,
                "exact_mixing" => exact = flag(v)?,
                "gamma_unconstrained" => unconstrained = flag(v)?,
                _ => meta.push((k.to_string(), v.to_string())),
            }
        }
        Ok(Self { points, fit, ell0, classified, exact_mixing: exact, gamma_unconstrained: unconstrained, meta })
    }
}
