use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hqs_core::circuits::export_transition;
use hqs_core::mixing::{eta_series, fit_mixing, AscentOptions};
use hqs_experiments::config::{build_plan, ExperimentConfig, Model};
use hqs_experiments::criteria::{all_pass, verify, Suite};
use hqs_experiments::sweep::{gnuplot_script, run_sweep, size_independence};
use hqs_experiments::ExpError;

#[derive(Parser)]
#[command(name = "hqs", about = "Noise sweeps and verification for sequentially prepared states")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Noise sweep over the configured epsilon grid; writes CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Overrides `out` in the config. `-` writes to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Contraction coefficients of the bath map and the fitted envelope.
    Mixing {
        #[arg(long, default_value = "surface-code")]
        model: Model,
        #[arg(long, default_value_t = 3)]
        lx: usize,
        #[arg(long)]
        ly: Option<usize>,
        /// Rows `t0:t1`; window lengths 1..=t1-t0+1 are evaluated.
        #[arg(long, default_value = "2:4")]
        window: String,
        /// Comma separated ball lengths.
        #[arg(long, default_value = "1,2")]
        ell: String,
        #[arg(long, default_value_t = 64)]
        restarts: usize,
        #[arg(long, default_value_t = 200)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Deviation at fixed epsilon across the configured row counts.
    SizeIndependence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run a verification suite.
    Verify {
        #[arg(long)]
        suite: Suite,
    },
    /// Print one transition circuit in text form.
    ExportCircuit {
        #[arg(long, default_value = "surface-code")]
        model: Model,
        #[arg(long, default_value_t = 3)]
        lx: usize,
        #[arg(long)]
        ly: Option<usize>,
        #[arg(long, default_value_t = 1)]
        row: usize,
    },
}

fn load(path: &PathBuf) -> Result<ExperimentConfig, ExpError> {
    let text = fs::read_to_string(path).map_err(|e| ExpError::Config(format!("{}: {e}", path.display())))?;
    ExperimentConfig::parse(&text)
}

fn parse_window(s: &str) -> Result<(usize, usize), ExpError> {
    let bad = || ExpError::Config(format!("window {s:?} is not t0:t1 with 1 <= t0 <= t1"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let (a, b) = (a.trim().parse::<usize>().map_err(|_| bad())?, b.trim().parse::<usize>().map_err(|_| bad())?);
    if a == 0 || b < a {
        return Err(bad());
    }
    Ok((a, b))
}

fn parse_list(s: &str) -> Result<Vec<usize>, ExpError> {
    s.split(',')
        .map(|x| x.trim().parse::<usize>().ok().filter(|&v| v > 0))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| ExpError::Config(format!("bad length list {s:?}")))
}

fn run(cli: Cli) -> Result<bool, ExpError> {
    let stdout = io::stdout();
    match cli.cmd {
        Cmd::Sweep { config, jobs, out } => {
            let cfg = load(&config)?;
            let target = out.or_else(|| cfg.out.clone());
            let result = match &target {
                Some(p) if p.as_os_str() != "-" => {
                    let mut f = io::BufWriter::new(fs::File::create(p)?);
                    let r = run_sweep(&cfg, jobs, &mut f)?;
                    f.flush()?;
                    fs::write(p.with_extension("gp"), gnuplot_script(&p.display().to_string()))?;
                    r
                }
                _ => run_sweep(&cfg, jobs, &mut stdout.lock())?,
            };
            for (obs, fit) in &result.fits {
                match fit {
                    Some(f) => eprintln!("{obs}: C={:.4e} slope={:.4} over {} points", f.c, f.slope, f.points),
                    None => eprintln!("{obs}: too few nonzero deviations to fit"),
                }
            }
        }
        Cmd::Mixing { model, lx, ly, window, ell, restarts, iterations, seed } => {
            let (t0, t1) = parse_window(&window)?;
            let ells = parse_list(&ell)?;
            let ly = ly.unwrap_or(t1 + 1);
            let plan = build_plan(model, lx, ly, 0.7, 0.3)?;
            let opts = AscentOptions { restarts, iterations, seed, ..AscentOptions::default() };
            let points = eta_series(&plan, t0, t1 - t0 + 1, &ells, &opts)?;
            let report = fit_mixing(&points)?
                .with_meta("model", model)
                .with_meta("lx", lx)
                .with_meta("ly", ly)
                .with_meta("window", &window);
            write!(stdout.lock(), "{}", report.to_text())?;
        }
        Cmd::SizeIndependence { config, jobs } => {
            let cfg = load(&config)?;
            let table = size_independence(&cfg, jobs)?;
            write!(stdout.lock(), "{}", table.to_csv())?;
            eprintln!("max spread {:.3e}", table.max_spread());
        }
        Cmd::Verify { suite } => {
            let checks = verify(suite)?;
            let mut out = stdout.lock();
            for c in &checks {
                writeln!(out, "{c}")?;
            }
            return Ok(all_pass(&checks));
        }
        Cmd::ExportCircuit { model, lx, ly, row } => {
            let plan = build_plan(model, lx, ly.unwrap_or(row.max(2)), 0.7, 0.3)?;
            let tm = plan
                .transitions()
                .get(row.wrapping_sub(1))
                .ok_or_else(|| ExpError::Config(format!("row {row} outside 1..={}", plan.ly())))?;
            write!(stdout.lock(), "{}", export_transition(tm))?;
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
