use std::collections::BTreeMap;
use std::io::Write;

use hqs_core::circuits::noisy_pauli;
use hqs_core::fcs::{expectation_local, expectation_operator};
use hqs_core::mixing::predicted_bound;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::ExpError;

pub const SCHEMA: &str = "# hqs-sweep-v1";
pub const COLUMNS: &str = "epsilon,lx,ly,seed,observable,noiseless,noisy,deviation,bound";

/// Deviations at or below this are treated as numerically zero by the fits.
pub const ZERO_DEVIATION: f64 = 1e-13;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub epsilon: f64,
    pub lx: usize,
    pub ly: usize,
    pub seed: u64,
    pub observable: String,
    pub noiseless: f64,
    pub noisy: f64,
    pub deviation: f64,
    pub bound: f64,
}

impl SweepRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{:e},{},{},{},{},{:e},{:e},{:e},{:e}",
            self.epsilon, self.lx, self.ly, self.seed, self.observable, self.noiseless, self.noisy, self.deviation, self.bound
        )
    }

    fn from_csv(line: &str, n: usize) -> Result<Self, ExpError> {
        let f: Vec<&str> = line.split(',').collect();
        let bad = |what: &str| ExpError::Schema(format!("line {n}: bad {what}"));
        if f.len() != 9 {
            return Err(bad("column count"));
        }
        let num = |i: usize, what: &str| f[i].parse::<f64>().map_err(|_| bad(what));
        Ok(Self {
            epsilon: num(0, "epsilon")?,
            lx: f[1].parse().map_err(|_| bad("lx"))?,
            ly: f[2].parse().map_err(|_| bad("ly"))?,
            seed: f[3].parse().map_err(|_| bad("seed"))?,
            observable: f[4].to_string(),
            noiseless: num(5, "noiseless")?,
            noisy: num(6, "noisy")?,
            deviation: num(7, "deviation")?,
            bound: num(8, "bound")?,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Bound fit per observable, in config order; `None` when too few
    /// points have a nonzero deviation.
    pub fits: Vec<(String, Option<BoundFit>)>,
}

impl SweepResult {
    /// Deviation at the smallest epsilon, per observable.
    pub fn smallest_epsilon_deviation(&self) -> BTreeMap<String, f64> {
        let mut out: BTreeMap<String, (f64, f64)> = BTreeMap::new();
        for r in &self.rows {
            let e = out.entry(r.observable.clone()).or_insert((f64::INFINITY, 0.0));
            if r.epsilon < e.0 {
                *e = (r.epsilon, r.deviation);
            }
        }
        out.into_iter().map(|(k, v)| (k, v.1)).collect()
    }
}

pub fn csv_header(config: &ExperimentConfig) -> String {
    let mut s = format!("{SCHEMA}\n");
    for line in config.to_text().lines() {
        s += &format!("# {line}\n");
    }
    s + COLUMNS + "\n"
}

/// Runs every `(epsilon, seed, observable)` point and streams the CSV to
/// `out` in a fixed order, `jobs` points at a time.
pub fn run_sweep(config: &ExperimentConfig, jobs: usize, out: &mut dyn Write) -> Result<SweepResult, ExpError> {
    config.validate()?;
    let plan = config.plan()?;
    let observables: Vec<_> = config.observables.iter().map(|o| o.resolve(config.lx, config.ly)).collect::<Result<_, _>>()?;
    // the noiseless values double as the feasibility check
    let ideal: Vec<f64> = observables.iter().map(|o| expectation_local(&plan, o)).collect::<Result<_, _>>()?;

    let mut points = Vec::new();
    for eps in config.epsilon_values() {
        for &seed in &config.seeds {
            for k in 0..observables.len() {
                points.push((eps, seed, k));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| ExpError::Config(e.to_string()))?;
    out.write_all(csv_header(config).as_bytes())?;
    let mut rows = Vec::with_capacity(points.len());
    for chunk in points.chunks(jobs.max(1)) {
        let done: Vec<SweepRow> = pool.install(|| {
            chunk
                .par_iter()
                .map(|&(eps, seed, k)| -> Result<SweepRow, ExpError> {
                    let spec = config.noise(eps, seed);
                    let noisy = expectation_operator(&plan.with_noise(&spec)?, &noisy_pauli(&observables[k].pauli, &spec)?)?;
                    Ok(SweepRow {
                        epsilon: eps,
                        lx: config.lx,
                        ly: config.ly,
                        seed,
                        observable: config.observables[k].to_string(),
                        noiseless: ideal[k],
                        noisy,
                        deviation: (ideal[k] - noisy).abs(),
                        bound: predicted_bound(eps, config.ly, config.delta, config.bound_c, 1.0)?,
                    })
                })
                .collect::<Result<_, _>>()
        })?;
        for r in &done {
            writeln!(out, "{}", r.to_csv())?;
        }
        out.flush()?;
        rows.extend(done);
    }
    let fits = config
        .observables
        .iter()
        .map(|o| {
            let id = o.to_string();
            let mine: Vec<SweepRow> = rows.iter().filter(|r| r.observable == id).cloned().collect();
            (id, fit_bound(&mine, config.delta).ok())
        })
        .collect();
    Ok(SweepResult { rows, fits })
}

/// Reads a sweep CSV back, refusing other schema versions.
pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>, ExpError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, SCHEMA)) => {}
        Some((_, other)) => return Err(ExpError::Schema(format!("unsupported schema line {other:?}"))),
        None => return Err(ExpError::Schema("empty file".into())),
    }
    let mut seen_header = false;
    let mut rows = Vec::new();
    for (i, line) in lines {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !seen_header {
            if line != COLUMNS {
                return Err(ExpError::Schema(format!("unexpected columns {line:?}")));
            }
            seen_header = true;
            continue;
        }
        rows.push(SweepRow::from_csv(line, i + 1)?);
    }
    if !seen_header {
        return Err(ExpError::Schema("missing column header".into()));
    }
    Ok(rows)
}

/// Plotting script for a sweep CSV.
pub fn gnuplot_script(csv_path: &str) -> String {
    format!(
        "# gnuplot script for {csv_path}\n\
         set datafile separator ','\n\
         set datafile commentschars '#'\n\
         set logscale xy\n\
         set xlabel 'epsilon'\n\
         set ylabel 'deviation'\n\
         set key left top\n\
         plot '{csv_path}' using 1:8 with points title 'deviation', \\\n     '' using 1:9 with lines title 'bound'\n"
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundFit {
    /// Smallest constant with `deviation <= C (eps log^2(1/eps) + ly delta)` on every row.
    pub c: f64,
    /// Least-squares slope of `log deviation` against `log eps`.
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of the slope fit.
    pub residual: f64,
    pub points: usize,
    /// All deviations were numerically zero; `c` is 0.
    pub all_zero: bool,
}

/// Fits the constant of the main bound and the log-log slope.
pub fn fit_bound(rows: &[SweepRow], delta: f64) -> Result<BoundFit, ExpError> {
    let live: Vec<&SweepRow> = rows.iter().filter(|r| r.epsilon > 0.0 && r.deviation > ZERO_DEVIATION).collect();
    if live.is_empty() {
        return Ok(BoundFit { c: 0.0, slope: f64::NAN, intercept: f64::NAN, residual: 0.0, points: 0, all_zero: true });
    }
    if live.len() < 4 {
        return Err(ExpError::Fit(format!("need 4 points with nonzero deviation, got {}", live.len())));
    }
    let mut c: f64 = 0.0;
    for r in rows.iter().filter(|r| r.epsilon > 0.0) {
        let scale = r.epsilon * r.epsilon.ln().powi(2) + r.ly as f64 * delta;
        c = c.max(r.deviation / scale);
    }
    let a = DMatrix::from_fn(live.len(), 2, |i, j| if j == 0 { 1.0 } else { live[i].epsilon.ln() });
    let y = DVector::from_iterator(live.len(), live.iter().map(|r| r.deviation.ln()));
    let x = a.clone().svd(true, true).solve(&y, 1e-14).map_err(|e| ExpError::Fit(e.to_string()))?;
    let res = &a * &x - &y;
    Ok(BoundFit {
        c,
        slope: x[1],
        intercept: x[0],
        residual: (res.norm_squared() / live.len() as f64).sqrt(),
        points: live.len(),
        all_zero: false,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizeEntry {
    pub observable: String,
    pub ly: usize,
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SizeTable {
    pub epsilon: f64,
    pub entries: Vec<SizeEntry>,
}

impl SizeTable {
    /// `(max - min) / mean` of the deviation over `ly`, per observable; 0 when
    /// every entry is 0.
    pub fn spread(&self) -> BTreeMap<String, f64> {
        let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for e in &self.entries {
            groups.entry(e.observable.clone()).or_default().push(e.deviation);
        }
        groups
            .into_iter()
            .map(|(k, v)| {
                let mean = v.iter().sum::<f64>() / v.len() as f64;
                let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(a, b), x| (a.min(*x), b.max(*x)));
                (k, if mean > 0.0 { (hi - lo) / mean } else { 0.0 })
            })
            .collect()
    }

    pub fn max_spread(&self) -> f64 {
        self.spread().values().copied().fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("epsilon,ly,observable,deviation\n");
        for e in &self.entries {
            s += &format!("{:e},{},{},{:e}\n", self.epsilon, e.ly, e.observable, e.deviation);
        }
        s
    }
}

/// Deviation at `config.epsilon` for every `ly` in `config.ly_list`, with
/// observables anchored as written (use `t`-relative rows to keep a fixed
/// distance from the last row).
pub fn size_independence(config: &ExperimentConfig, jobs: usize) -> Result<SizeTable, ExpError> {
    if config.ly_list.len() < 3 {
        return Err(ExpError::Config(format!("need at least 3 values in ly_list, got {}", config.ly_list.len())));
    }
    let seed = config.seeds[0];
    let mut cases = Vec::new();
    for &ly in &config.ly_list {
        let c = config.with_ly(ly);
        c.validate()?;
        for o in &c.observables {
            cases.push((ly, o.clone()));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build().map_err(|e| ExpError::Config(e.to_string()))?;
    let entries = pool.install(|| {
        cases
            .par_iter()
            .map(|(ly, o)| -> Result<SizeEntry, ExpError> {
                let c = config.with_ly(*ly);
                let plan = c.plan()?;
                let obs = o.resolve(c.lx, *ly)?;
                let d = hqs_core::fcs::deviation(&plan, &obs, &c.noise(config.epsilon, seed))?;
                Ok(SizeEntry { observable: o.to_string(), ly: *ly, deviation: d })
            })
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok(SizeTable { epsilon: config.epsilon, entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Model;

    fn row(eps: f64, dev: f64) -> SweepRow {
        SweepRow {
            epsilon: eps,
            lx: 3,
            ly: 4,
            seed: 0,
            observable: "Z@1:0".into(),
            noiseless: 1.0,
            noisy: 1.0 - dev,
            deviation: dev,
            bound: 0.0,
        }
    }

    #[test]
    fn fit_recovers_synthetic_constant() {
        let rows: Vec<_> = (1..=10).map(|k| 10f64.powf(-1.0 - 0.3 * k as f64)).map(|e| row(e, 0.7 * e * e.ln().powi(2))).collect();
        let f = fit_bound(&rows, 0.0).unwrap();
        assert!((f.c - 0.7).abs() < 0.007, "{f:?}");
        assert!(!f.all_zero);
    }

    #[test]
    fn fit_flags_all_zero_and_short_input() {
        let rows: Vec<_> = [1e-3, 1e-2].iter().map(|&e| row(e, 0.0)).collect();
        let f = fit_bound(&rows, 0.0).unwrap();
        assert!(f.all_zero && f.c == 0.0);
        let rows: Vec<_> = [1e-3, 1e-2].iter().map(|&e| row(e, e)).collect();
        assert!(matches!(fit_bound(&rows, 0.0), Err(ExpError::Fit(_))));
    }

    #[test]
    fn linear_deviation_has_unit_slope() {
        let rows: Vec<_> = (0..8).map(|k| 1e-4 * 2f64.powi(k)).map(|e| row(e, 0.37 * e)).collect();
        let f = fit_bound(&rows, 0.0).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-9);
        assert!(f.residual < 1e-9);
    }

    #[test]
    fn csv_round_trip_and_schema() {
        let cfg = ExperimentConfig { model: Model::Trivial, ..ExperimentConfig::default() };
        let mut text = csv_header(&cfg);
        let rows = vec![row(1e-3, 2.5e-4), row(0.0, 0.0)];
        for r in &rows {
            text += &(r.to_csv() + "\n");
        }
        assert_eq!(parse_sweep_csv(&text).unwrap(), rows);
        assert!(matches!(parse_sweep_csv(&text.replace("v1", "v2")), Err(ExpError::Schema(_))));
        assert!(matches!(parse_sweep_csv(&text.replace("bound\n", "bound,extra\n")), Err(ExpError::Schema(_))));
    }

    #[test]
    fn spread_of_flat_and_zero_tables() {
        let t = SizeTable {
            epsilon: 0.0,
            entries: (4..7).map(|ly| SizeEntry { observable: "a".into(), ly, deviation: 0.0 }).collect(),
        };
        assert_eq!(t.max_spread(), 0.0);
        let t = SizeTable {
            epsilon: 0.1,
            entries: [1.0, 1.1, 0.9].iter().enumerate().map(|(i, d)| SizeEntry { observable: "a".into(), ly: i, deviation: *d }).collect(),
        };
        assert!((t.max_spread() - 0.2).abs() < 1e-12);
    }
}
