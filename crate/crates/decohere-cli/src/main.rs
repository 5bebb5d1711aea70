//! `decohere` command-line front end: single evaluations of the decoherence
//! exponents, figure-level sweeps, crossover location and target-suppression
//! solving, all emitted as deterministic CSV.
//!
//! Exit codes: 0 success, 2 invalid parameters, 3 quadrature non-convergence
//! in a single-evaluation subcommand, 4 I/O failure. Sweeps with
//! non-converged cells still exit 0; the cells are flagged in-band.

mod config;
mod output;

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use decohere_core::bath::{BathSpec, PulseSchedule, SpectralDensity};
use decohere_core::closed_form::{gamma_pulsed_closed_total, gamma_pulsed_t0_closed};
use decohere_core::decoherence::{gamma_free, gamma_pulsed};
use decohere_core::scenarios::{
    crossover_interval, interval_sweep, solve_interval_for_suppression, temperature_sweep,
    time_series, Column, CrossoverOutcome, ScenarioTable,
};

use config::{load_preset, RunConfig, Settings};
use output::emit_csv;

#[derive(Parser)]
#[command(
    name = "decohere",
    version,
    about = "Qubit dephasing under periodic bang-bang pulses for 1/f and Ohmic baths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// Named parameter preset (fig1-1f, fig1-ohmic, fig3, fig4-t10,
    /// fig4-t1000, cpb)
    #[arg(long)]
    preset: Option<String>,
    /// Config file with key=value lines; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Spectral exponent nu (-1 for 1/f, +1 for Ohmic)
    #[arg(long, allow_hyphen_values = true)]
    nu: Option<f64>,
    /// Bath coupling gamma, units omega^(1-nu)
    #[arg(long)]
    gamma: Option<f64>,
    /// Infrared cutoff (angular frequency, natural units)
    #[arg(long)]
    ir: Option<f64>,
    /// Ultraviolet cutoff (angular frequency, natural units)
    #[arg(long)]
    uv: Option<f64>,
    /// Bath temperature (natural units; 0 is exact zero temperature)
    #[arg(long)]
    temp: Option<f64>,
    /// Absolute quadrature tolerance
    #[arg(long)]
    abs_tol: Option<f64>,
    /// Relative quadrature tolerance
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Adaptive bisection budget
    #[arg(long)]
    max_subdiv: Option<u32>,
    /// Quadrature panels per oscillation period
    #[arg(long)]
    osc_res: Option<u32>,
    /// Significant digits in CSV output
    #[arg(long)]
    precision: Option<u32>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Free-evolution decoherence exponent at one time
    Free {
        #[command(flatten)]
        common: CommonArgs,
        /// Elapsed time
        #[arg(long)]
        t: Option<f64>,
    },
    /// Pulsed decoherence exponent for one schedule
    Pulsed {
        #[command(flatten)]
        common: CommonArgs,
        /// Pulse interval
        #[arg(long)]
        dt: Option<f64>,
        /// Number of full pulse cycles
        #[arg(long)]
        n: Option<u32>,
        /// Also evaluate the 1/f closed-form approximation
        #[arg(long)]
        closed_form: bool,
    },
    /// Decoherence factors versus time at fixed pulse interval
    Timeseries {
        #[command(flatten)]
        common: CommonArgs,
        /// Pulse interval
        #[arg(long)]
        dt: Option<f64>,
        /// Number of pulse cycles to cover
        #[arg(long)]
        nmax: Option<u32>,
        /// Free-evolution samples per pulse cycle
        #[arg(long)]
        substeps: Option<u32>,
    },
    /// Coherence versus temperature for 1/f and Ohmic baths
    Tsweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Ohmic-bath coupling (the shared cutoffs come from --ir/--uv)
        #[arg(long)]
        gamma_ohmic: Option<f64>,
        /// Pulse interval
        #[arg(long)]
        dt: Option<f64>,
        /// Elapsed time (must be an even multiple of the interval)
        #[arg(long)]
        t: Option<f64>,
        /// Lowest temperature of the logarithmic grid
        #[arg(long)]
        tmin: Option<f64>,
        /// Highest temperature of the logarithmic grid
        #[arg(long)]
        tmax: Option<f64>,
        /// Number of grid points
        #[arg(long)]
        tpoints: Option<u32>,
    },
    /// Coherence versus pulse interval at fixed elapsed time
    Isweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Elapsed time
        #[arg(long)]
        t: Option<f64>,
        /// Cycle counts 1..=nmax define the interval grid dt = t/(2N)
        #[arg(long)]
        nmax: Option<u32>,
    },
    /// Locate the suppression-to-enhancement crossover interval
    Crossover {
        #[command(flatten)]
        common: CommonArgs,
        /// Elapsed time held fixed during the scan
        #[arg(long)]
        t: Option<f64>,
    },
    /// Solve for the pulse interval reaching a target residual decoherence
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of full pulse cycles
        #[arg(long)]
        n: Option<u32>,
        /// Residual decoherence fraction (0.1 = 90% suppression)
        #[arg(long)]
        target: Option<f64>,
    },
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(code) => code,
        Err(AppError::Invalid(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(AppError::Io(e)) => {
            eprintln!("error: {e}");
            4
        }
    });
}

enum AppError {
    Invalid(String),
    Io(std::io::Error),
}

impl From<decohere_core::Error> for AppError {
    fn from(e: decohere_core::Error) -> Self {
        AppError::Invalid(e.to_string())
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e)
    }
}

fn run(cli: Cli) -> Result<i32, AppError> {
    let (name, common, mut flags) = split_command(&cli.command);

    // defaults < preset < config file < flags
    let mut settings = Settings::default();
    if let Some(preset) = &common.preset {
        settings.merge_over(load_preset(preset).map_err(AppError::Invalid)?);
    }
    if let Some(path) = &common.config {
        settings.merge_over(Settings::from_file(path).map_err(AppError::Invalid)?);
    }
    apply_common_flags(common, &mut flags);
    settings.merge_over(flags);
    let cfg = RunConfig::resolve(name, &settings).map_err(AppError::Invalid)?;

    let (table, exit_code) = execute(&cfg)?;
    let bytes = &mut Vec::new();
    emit_csv(&table, Some(&cfg.metadata_line()), cfg.precision, bytes)?;
    match &common.out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(exit_code)
}

fn split_command(cmd: &Command) -> (&'static str, &CommonArgs, Settings) {
    let mut s = Settings::default();
    match cmd {
        Command::Free { common, t } => {
            if let Some(v) = t {
                s.set("t", v);
            }
            ("free", common, s)
        }
        Command::Pulsed { common, dt, n, closed_form } => {
            if let Some(v) = dt {
                s.set("dt", v);
            }
            if let Some(v) = n {
                s.set("n", v);
            }
            if *closed_form {
                s.set("closed_form", "1");
            }
            ("pulsed", common, s)
        }
        Command::Timeseries { common, dt, nmax, substeps } => {
            if let Some(v) = dt {
                s.set("dt", v);
            }
            if let Some(v) = nmax {
                s.set("nmax", v);
            }
            if let Some(v) = substeps {
                s.set("substeps", v);
            }
            ("timeseries", common, s)
        }
        Command::Tsweep { common, gamma_ohmic, dt, t, tmin, tmax, tpoints } => {
            if let Some(v) = gamma_ohmic {
                s.set("gamma_ohmic", v);
            }
            if let Some(v) = dt {
                s.set("dt", v);
            }
            if let Some(v) = t {
                s.set("t", v);
            }
            if let Some(v) = tmin {
                s.set("tmin", v);
            }
            if let Some(v) = tmax {
                s.set("tmax", v);
            }
            if let Some(v) = tpoints {
                s.set("tpoints", v);
            }
            ("tsweep", common, s)
        }
        Command::Isweep { common, t, nmax } => {
            if let Some(v) = t {
                s.set("t", v);
            }
            if let Some(v) = nmax {
                s.set("nmax", v);
            }
            ("isweep", common, s)
        }
        Command::Crossover { common, t } => {
            if let Some(v) = t {
                s.set("t", v);
            }
            ("crossover", common, s)
        }
        Command::Solve { common, n, target } => {
            if let Some(v) = n {
                s.set("n", v);
            }
            if let Some(v) = target {
                s.set("target", v);
            }
            ("solve", common, s)
        }
    }
}

fn apply_common_flags(common: &CommonArgs, s: &mut Settings) {
    if let Some(v) = common.nu {
        s.set("nu", v);
    }
    if let Some(v) = common.gamma {
        s.set("gamma", v);
    }
    if let Some(v) = common.ir {
        s.set("ir", v);
    }
    if let Some(v) = common.uv {
        s.set("uv", v);
    }
    if let Some(v) = common.temp {
        s.set("temp", v);
    }
    if let Some(v) = common.abs_tol {
        s.set("abs_tol", v);
    }
    if let Some(v) = common.rel_tol {
        s.set("rel_tol", v);
    }
    if let Some(v) = common.max_subdiv {
        s.set("max_subdiv", v);
    }
    if let Some(v) = common.osc_res {
        s.set("osc_res", v);
    }
    if let Some(v) = common.precision {
        s.set("precision", v);
    }
}

fn bath_from(cfg: &RunConfig) -> Result<BathSpec, AppError> {
    let density = SpectralDensity::new(cfg.nu, cfg.gamma, cfg.ir, cfg.uv)?;
    Ok(BathSpec::new(density, cfg.temp)?)
}

/// Dispatch one resolved configuration; returns the table and the exit code.
fn execute(cfg: &RunConfig) -> Result<(ScenarioTable, i32), AppError> {
    let quad = cfg.quadrature();
    match cfg.command.as_str() {
        "free" => {
            let bath = bath_from(cfg)?;
            let t = cfg.t.unwrap();
            let v = gamma_free(&bath, t, &quad)?;
            let mut table = ScenarioTable::new(
                "free",
                vec![
                    Column::new("t", "nat"),
                    Column::new("gamma_free", "1"),
                    Column::new("coherence", "1"),
                ],
            );
            table.push_row(
                vec![t, v.gamma, v.coherence_magnitude],
                vec![true, v.converged, v.converged],
            );
            Ok((table, if v.converged { 0 } else { 3 }))
        }
        "pulsed" => {
            let bath = bath_from(cfg)?;
            let sched = PulseSchedule::new(cfg.dt.unwrap(), cfg.n.unwrap())?;
            if cfg.closed_form {
                // validate the closed-form preconditions before computing
                if cfg.nu != -1.0 {
                    return Err(AppError::Invalid(
                        "--closed-form requires the 1/f bath (nu = -1)".into(),
                    ));
                }
                if cfg.uv * sched.interval() >= PI {
                    return Err(AppError::Invalid(format!(
                        "--closed-form undefined: uv*dt = {} >= pi",
                        cfg.uv * sched.interval()
                    )));
                }
            }
            let v = gamma_pulsed(&bath, &sched, &quad)?;
            let mut columns = vec![
                Column::new("dt", "nat"),
                Column::new("n", "1"),
                Column::new("t", "nat"),
                Column::new("gamma_pulsed", "1"),
                Column::new("coherence", "1"),
            ];
            if cfg.closed_form {
                columns.push(Column::new("gamma_closed", "1"));
            }
            let mut table = ScenarioTable::new("pulsed", columns);
            let mut row = vec![
                sched.interval(),
                sched.half_cycles() as f64,
                sched.total_time(),
                v.gamma,
                v.coherence_magnitude,
            ];
            let mut flags = vec![true, true, true, v.converged, v.converged];
            if cfg.closed_form {
                let density = *bath.density();
                let g = if cfg.temp > 0.0 {
                    gamma_pulsed_closed_total(&density, sched.interval(), cfg.temp, sched.total_time())?
                } else {
                    gamma_pulsed_t0_closed(&density, &sched)?
                };
                row.push(g);
                flags.push(true);
            }
            table.push_row(row, flags);
            Ok((table, if v.converged { 0 } else { 3 }))
        }
        "timeseries" => {
            let bath = bath_from(cfg)?;
            let table =
                time_series(&bath, cfg.dt.unwrap(), cfg.nmax.unwrap(), cfg.substeps, &quad)?;
            Ok((table, 0))
        }
        "tsweep" => {
            let pink = SpectralDensity::new(cfg.nu, cfg.gamma, cfg.ir, cfg.uv)?;
            let ohmic = SpectralDensity::ohmic(cfg.gamma_ohmic.unwrap(), cfg.ir, cfg.uv)?;
            let grid = log_grid(cfg.tmin, cfg.tmax, cfg.tpoints)?;
            let table =
                temperature_sweep(&pink, &ohmic, cfg.dt.unwrap(), cfg.t.unwrap(), &grid, &quad)?;
            Ok((table, 0))
        }
        "isweep" => {
            let density = SpectralDensity::new(cfg.nu, cfg.gamma, cfg.ir, cfg.uv)?;
            let n_list: Vec<u32> = (1..=cfg.nmax.unwrap()).collect();
            let table = interval_sweep(&density, cfg.temp, cfg.t.unwrap(), &n_list, &quad)?;
            Ok((table, 0))
        }
        "crossover" => {
            let density = SpectralDensity::new(cfg.nu, cfg.gamma, cfg.ir, cfg.uv)?;
            let outcome = crossover_interval(&density, cfg.temp, cfg.t.unwrap(), &quad)?;
            let mut table = ScenarioTable::new(
                "crossover",
                vec![Column::new("found", "1"), Column::new("dt_star", "nat")],
            );
            table
                .notes
                .push("interval varied continuously at fixed elapsed time".into());
            match outcome {
                CrossoverOutcome::Found { interval, .. } => {
                    table.push_row(vec![1.0, interval], vec![true, true]);
                }
                CrossoverOutcome::NotFound { reason } => {
                    table.push_row(vec![0.0, 0.0], vec![true, true]);
                    table.notes.push(reason);
                }
            }
            Ok((table, 0))
        }
        "solve" => {
            let bath = bath_from(cfg)?;
            let sol =
                solve_interval_for_suppression(&bath, cfg.n.unwrap(), cfg.target.unwrap(), &quad)?;
            let mut table = ScenarioTable::new(
                "solve",
                vec![
                    Column::new("target", "1"),
                    Column::new("dt", "nat"),
                    Column::new("n", "1"),
                    Column::new("gamma_pulsed", "1"),
                    Column::new("multiple_roots", "1"),
                ],
            );
            table.push_row(
                vec![
                    cfg.target.unwrap(),
                    sol.interval,
                    cfg.n.unwrap() as f64,
                    sol.gamma_pulsed,
                    if sol.multiple_roots { 1.0 } else { 0.0 },
                ],
                vec![true, sol.converged, true, sol.converged, true],
            );
            Ok((table, if sol.converged { 0 } else { 3 }))
        }
        other => Err(AppError::Invalid(format!("unknown subcommand {other:?}"))),
    }
}

fn log_grid(lo: f64, hi: f64, points: u32) -> Result<Vec<f64>, AppError> {
    if !(lo > 0.0 && hi > lo && points >= 2) {
        return Err(AppError::Invalid(format!(
            "temperature grid needs 0 < tmin < tmax and tpoints >= 2, got [{lo}, {hi}] x {points}"
        )));
    }
    Ok((0..points)
        .map(|i| lo * (hi / lo).powf(i as f64 / (points - 1) as f64))
        .collect())
}
