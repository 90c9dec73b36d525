//! Command-line front end. `main.rs` only forwards to [`run_cli`], which
//! keeps every command callable in-process.
//!
//! Exit codes: 0 success, 1 bad flags or configuration, 2 the command ran
//! but its outcome is negative (censored run, violated check).

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rendezvous_core::bounds::{self, BoundsInput};
use rendezvous_core::harness::{self, CellFilter};
use rendezvous_core::oracle::{self, DEFAULT_BUDGET};
use rendezvous_core::{
    CoinScript, CoinSource, EnumerationSpec, Placement, Population, SweepSpec, Trace, WorldConfig,
};
use serde::Serialize;

pub mod config;

use config::RunConfigFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

const DEFAULT_R: f64 = 1.28;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(#[from] rendezvous_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "rendezvous",
    version,
    about = "Randomized symmetric rendezvous of robots on a line"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one execution and report its trace.
    Run(RunArgs),
    /// Monte Carlo sweep over (n, d, r, placement) cells.
    Sweep(SweepArgs),
    /// Analytic upper bound on the expected distance and competitive ratio.
    Bounds(BoundsArgs),
    /// Grid search of the competitive ratio over r.
    Optimize(OptimizeArgs),
    /// Exhaustive enumeration of all coin scripts up to a horizon.
    Oracle(OracleArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// TOML file with any of the keys below; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of robots.
    #[arg(long)]
    pub n: Option<usize>,
    /// Distance between the outermost robots. Inferred from --positions.
    #[arg(long)]
    pub d: Option<f64>,
    /// Expansion radius, 1 < r < 2.
    #[arg(long)]
    pub r: Option<f64>,
    /// Explicit initial positions, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub positions: Option<Vec<f64>>,
    /// Placement when no positions are given: uniform or equidistant.
    #[arg(long, value_parser = parse_placement)]
    pub placement: Option<Placement>,
    /// Seed for the placement and the coins.
    #[arg(long, conflicts_with = "script")]
    pub seed: Option<u64>,
    /// Coin script file: one line per robot, one R/L per round.
    #[arg(long)]
    pub script: Option<PathBuf>,
    #[arg(long)]
    pub max_rounds: Option<u32>,
    /// Distance under which robots count as co-located.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Write the full trace as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write per-robot totals as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub d: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1.28")]
    pub r: Vec<f64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_placement, default_value = "uniform")]
    pub placement: Vec<Placement>,
    #[arg(long, default_value_t = harness::DEFAULT_TRIALS_PER_CELL)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = rendezvous_core::engine::DEFAULT_MAX_ROUNDS)]
    pub max_rounds: u32,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Directory for the five plot-ready datasets (one CSV each plus JSON).
    #[arg(long)]
    pub figures: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    #[arg(long, default_value_t = DEFAULT_R)]
    pub r: f64,
    /// Robot count, or "inf" for the large-n limit.
    #[arg(long, default_value = "3", value_parser = parse_population)]
    pub n: Population,
    /// d = r^(k + delta).
    #[arg(long, default_value_t = 0)]
    pub k: u32,
    #[arg(long, default_value_t = 1.0)]
    pub delta: f64,
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 1.05)]
    pub lo: f64,
    #[arg(long, default_value_t = 1.95)]
    pub hi: f64,
    #[arg(long, default_value_t = 0.005)]
    pub step: f64,
    #[arg(long, default_value = "3", value_parser = parse_population)]
    pub n: Population,
    /// Extra point evaluated off-grid and reported next to the optimum.
    #[arg(long, default_value_t = DEFAULT_R)]
    pub probe: f64,
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the (r, i*, ratio) landscape as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    #[arg(long, default_value_t = 1.0)]
    pub d: f64,
    #[arg(long, default_value_t = DEFAULT_R)]
    pub r: f64,
    /// Explicit positions instead of n equidistant robots over [0, d].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub positions: Option<Vec<f64>>,
    /// Rounds per script.
    #[arg(long, default_value_t = 5)]
    pub horizon: u32,
    /// Largest number of scripts allowed.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Also run this many seeded trials and compare means.
    #[arg(long, default_value_t = 0)]
    pub mc_trials: u64,
    #[arg(long, default_value_t = 0)]
    pub mc_seed: u64,
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write the recorded violating scripts, blank-line separated.
    #[arg(long)]
    pub dump_violations: Option<PathBuf>,
}

fn parse_placement(s: &str) -> Result<Placement, String> {
    s.parse().map_err(|e: rendezvous_core::Error| e.to_string())
}

fn parse_population(s: &str) -> Result<Population, String> {
    s.parse().map_err(|e: rendezvous_core::Error| e.to_string())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_CONFIG
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Run(a) => cmd_run(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Bounds(a) => cmd_bounds(&a, out),
        Command::Optimize(a) => cmd_optimize(&a, out),
        Command::Oracle(a) => cmd_oracle(&a, out),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn say(out: &mut dyn Write, text: impl AsRef<str>) -> Result<(), CliError> {
    out.write_all(text.as_ref().as_bytes())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value).map_err(|e| CliError::Core(e.into()))
}

fn with_workers<T: Send>(
    workers: Option<usize>,
    f: impl FnOnce() -> T + Send,
) -> Result<T, CliError> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(CliError::Usage("--workers must be positive".into())),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Fully resolved inputs of a single run.
#[derive(Debug)]
pub struct RunPlan {
    pub config: WorldConfig,
    pub coins: CoinSource,
    pub json: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

pub fn resolve_run(args: &RunArgs) -> Result<RunPlan, CliError> {
    let file = match &args.config {
        Some(p) => RunConfigFile::load(p)?,
        None => RunConfigFile::default(),
    };
    let r = args.r.or(file.r).unwrap_or(DEFAULT_R);
    let d_flag = args.d.or(file.d);
    let n_flag = args.n.or(file.n);
    let script_path = if args.seed.is_some() {
        None
    } else {
        args.script.clone().or(file.script)
    };
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let script = match &script_path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            Some(CoinScript::parse(&text)?)
        }
        None => None,
    };

    let positions = match args.positions.clone().or(file.positions) {
        Some(mut xs) => {
            if xs.iter().any(|x| !x.is_finite()) {
                return Err(CliError::Usage("positions must be finite".into()));
            }
            xs.sort_by(f64::total_cmp);
            let span = xs.last().copied().unwrap_or(0.0) - xs.first().copied().unwrap_or(0.0);
            if let Some(d) = d_flag {
                if (span - d).abs() > 1e-9 * d.abs().max(1.0) {
                    return Err(CliError::Usage(format!(
                        "--d {d} disagrees with the span {span} of --positions"
                    )));
                }
            }
            if let Some(n) = n_flag {
                if n != xs.len() {
                    return Err(CliError::Usage(format!(
                        "--n {n} but {} positions given",
                        xs.len()
                    )));
                }
            }
            xs
        }
        None => {
            let n = n_flag
                .or(script.as_ref().map(CoinScript::robots))
                .ok_or_else(|| CliError::Usage("need --n or --positions".into()))?;
            let d = d_flag.ok_or_else(|| CliError::Usage("need --d or --positions".into()))?;
            if !(d > 0.0 && d.is_finite()) {
                return Err(CliError::Usage(format!("--d must be positive, got {d}")));
            }
            let placement = match (args.placement, &file.placement) {
                (Some(p), _) => p,
                (None, Some(s)) => s.parse()?,
                (None, None) => Placement::UniformRandom,
            };
            placement.positions(n, d, seed)
        }
    };

    let coins = match script {
        Some(s) => {
            if s.robots() != positions.len() {
                return Err(CliError::Usage(format!(
                    "script has {} rows for {} robots",
                    s.robots(),
                    positions.len()
                )));
            }
            CoinSource::script(s)
        }
        None => harness::coins_for(seed),
    };
    let mut config = WorldConfig::new(positions, r);
    if let Some(m) = args.max_rounds.or(file.max_rounds) {
        config.max_rounds = m;
    }
    if let Some(e) = args.epsilon.or(file.epsilon) {
        config.epsilon = e;
    }
    config.validate()?;
    Ok(RunPlan {
        config,
        coins,
        json: args.json.clone().or(file.json),
        csv: args.csv.clone().or(file.csv),
    })
}

pub fn run_summary(trace: &Trace) -> String {
    match (trace.rendezvous_time, trace.rendezvous_position) {
        (Some(t), Some(x)) => format!(
            "rendezvous n={} d={} time={t:.6} position={x:.6} rounds={} max_distance={:.6} distance_ratio={:.6} time_ratio={:.6}\n",
            trace.n(),
            trace.d(),
            trace.rounds_used,
            trace.max_distance(),
            trace.distance_ratio(),
            trace.time_ratio().unwrap_or(f64::NAN),
        ),
        _ => format!(
            "censored n={} d={} rounds={} time={:.6} max_distance={:.6}\n",
            trace.n(),
            trace.d(),
            trace.rounds_used,
            trace.end_time,
            trace.max_distance(),
        ),
    }
}

fn cmd_run(args: &RunArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let plan = resolve_run(args)?;
    let trace = rendezvous_core::run(plan.config, plan.coins)?;
    if let Some(p) = &plan.json {
        write_file(p, &trace.to_json()?)?;
    }
    if let Some(p) = &plan.csv {
        write_file(p, &trace.to_csv()?)?;
    }
    say(out, run_summary(&trace))?;
    Ok(if trace.rendezvous_achieved {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let spec = SweepSpec {
        n_values: args.n.clone(),
        d_values: args.d.clone(),
        r_values: args.r.clone(),
        placements: args.placement.clone(),
        trials_per_cell: args.trials,
        base_seed: args.seed,
        max_rounds: args.max_rounds,
    };
    spec.validate()?;
    let table = with_workers(args.workers, || harness::run_sweep(&spec))??;
    let csv = table.to_csv()?;
    if let Some(p) = &args.csv {
        write_file(p, &csv)?;
    }
    if let Some(p) = &args.json {
        write_file(p, &table.to_json()?)?;
    }
    if let Some(dir) = &args.figures {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let summary = harness::summarize(&table, &CellFilter::default())?;
        for ds in &summary.datasets {
            write_file(&dir.join(format!("{}.csv", ds.name)), &ds.to_csv()?)?;
        }
        write_file(&dir.join("figures.json"), &to_json(&summary)?)?;
    }
    if args.csv.is_none() {
        say(out, &csv)?;
    }
    let censored = table.total_censored();
    say(
        out,
        format!(
            "cells={} trials_per_cell={} censored={censored}\n",
            table.cells.len(),
            args.trials
        ),
    )?;
    Ok(if censored == 0 {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn cmd_bounds(args: &BoundsArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let input = BoundsInput {
        r: args.r,
        n: args.n,
        k: args.k,
        delta: args.delta,
    };
    let rep = bounds::report(&input)?;
    if let Some(p) = &args.json {
        write_file(p, &to_json(&rep)?)?;
    }
    say(out, rep.to_text())?;
    Ok(EXIT_OK)
}

fn cmd_optimize(args: &OptimizeArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let rep = bounds::optimize_r(args.lo, args.hi, args.step, args.n, Some(args.probe))?;
    if let Some(p) = &args.json {
        write_file(p, &to_json(&rep)?)?;
    }
    if let Some(p) = &args.csv {
        let mut s = String::from("r,i_star,competitive_ratio\n");
        for pt in &rep.landscape {
            s.push_str(&format!("{},{},{}\n", pt.r, pt.i_star, pt.ratio));
        }
        write_file(p, &s)?;
    }
    let mut text = format!(
        "n={} grid=[{}, {}] step={}\nr_star {}\nratio_star {:.6}\ni_star {}\n",
        rep.n, rep.lo, rep.hi, rep.step, rep.r_star, rep.ratio_star, rep.i_star_at_optimum
    );
    for pl in &rep.plateaus {
        text.push_str(&format!(
            "plateau i*={} r in [{}, {}]: best r={} ratio={:.6}\n",
            pl.i_star, pl.r_lo, pl.r_hi, pl.best.r, pl.best.ratio
        ));
    }
    if let Some(pt) = rep.probe {
        text.push_str(&format!(
            "probe r={} i*={} ratio={:.6}\n",
            pt.r, pt.i_star, pt.ratio
        ));
    }
    say(out, text)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct OracleOutput<'a> {
    exact: &'a rendezvous_core::ExactReport,
    monte_carlo: Option<&'a oracle::MonteCarloComparison>,
}

fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let config = match &args.positions {
        Some(xs) => {
            let mut xs = xs.clone();
            xs.sort_by(f64::total_cmp);
            WorldConfig::new(xs, args.r)
        }
        None => WorldConfig::equidistant(args.n, args.d, args.r),
    };
    let mut spec = EnumerationSpec::new(config, args.horizon);
    spec.budget = args.budget;
    let (exact, mc) = with_workers(args.workers, || -> Result<_, CliError> {
        let exact = oracle::enumerate(&spec)?;
        let mc = if args.mc_trials > 0 {
            Some(oracle::compare_monte_carlo(
                &spec,
                &exact,
                args.mc_trials,
                args.mc_seed,
            )?)
        } else {
            None
        };
        Ok((exact, mc))
    })??;

    if let Some(p) = &args.json {
        write_file(
            p,
            &to_json(&OracleOutput {
                exact: &exact,
                monte_carlo: mc.as_ref(),
            })?,
        )?;
    }
    if let Some(p) = &args.dump_violations {
        write_file(p, &exact.followup_violations.join("\n"))?;
    }
    let mut text = format!(
        "n={} d={} r={} horizon={}\nscripts {}\nrendezvous_probability {:.12}\nresidual_probability {:.12}\nexpected_max_distance {:.9}\nfollowup_checked {}\nfollowup_violations: {}\n",
        exact.n,
        exact.d,
        exact.r,
        exact.horizon,
        exact.scripts,
        exact.rendezvous_probability,
        exact.residual_probability,
        exact.expected_max_distance,
        exact.followup_checked,
        exact.followup_violation_count,
    );
    let mut ok = exact.followup_violation_count == 0;
    if let Some(m) = &mc {
        text.push_str(&format!(
            "mc_trials {} mc_mean {} standard_error {} deviation_in_se {} within_3se {}\n",
            m.trials,
            m.mc_mean.map_or("n/a".into(), |v| format!("{v:.9}")),
            m.standard_error.map_or("n/a".into(), |v| format!("{v:.9}")),
            m.deviation_in_se
                .map_or("n/a".into(), |v| format!("{v:.3}")),
            m.within_3se,
        ));
        ok &= m.within_3se;
    }
    say(out, text)?;
    Ok(if ok { EXIT_OK } else { EXIT_NEGATIVE })
}
