mod files;

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;
use squash::moment::{self, BoundResult, WarmStart};
use squash::solver::{sdpa, Backend, SolverOptions};
use squash::{upperbound, DensityMatrix, Error, QuadratureRule};

use files::{load_state, save_json, RunRecord, StateFile};

#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError { code: 2, message: message.into() }
    }

    fn solver(message: impl Into<String>) -> Self {
        CliError { code: 3, message: message.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Argument(_) | Error::Contract(_) | Error::Io(_) => 2,
            Error::Resource { .. } => 4,
            Error::Conditioning(_) | Error::Environment(_) | Error::Protocol { .. } | Error::Unsupported(_) => 3,
        };
        CliError { code, message: e.to_string() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Parser)]
#[command(name = "squash", version, about = "Bounds on the squashed entanglement of bipartite states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a Werner state file.
    Werner {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// SDP lower bound.
    Lower {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[command(flatten)]
        solver: SolverArgs,
        /// Run record destination.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Heuristic upper bound over extensions of fixed dimension.
    Upper {
        #[arg(long)]
        state: PathBuf,
        #[arg(long = "d-d", default_value_t = 4)]
        d_d: usize,
        #[arg(long = "d-e", default_value_t = 4)]
        d_e: usize,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep Werner states and write both bounds as CSV.
    Figure1 {
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long = "d-d", default_value_t = 4)]
        d_d: usize,
        #[arg(long = "d-e", default_value_t = 4)]
        d_e: usize,
        /// Comma-separated values of p.
        #[arg(long = "p-grid", default_value = "0,0.1,0.2,0.3,0.4,0.5")]
        p_grid: String,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print Gauss-Radau nodes and weights as `t,w` rows.
    Quad {
        #[arg(long)]
        m: usize,
    },
    /// Write the realified moment SDP in SDPA sparse format.
    Export {
        #[arg(long)]
        state: PathBuf,
        #[arg(long, default_value_t = 8)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Embedded,
    External,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, value_enum, default_value = "embedded")]
    backend: BackendArg,
    /// External solver binary; defaults to $SQUASH_SDP_SOLVER.
    #[arg(long)]
    solver_path: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 1500)]
    max_iters: usize,
    /// Seconds.
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,
    /// Start the embedded solver from zero instead of a heuristic extension.
    #[arg(long)]
    cold: bool,
}

impl SolverArgs {
    fn options(&self) -> Result<SolverOptions, CliError> {
        if !(self.time_limit.is_finite() && self.time_limit > 0.0) {
            return Err(CliError::input("--time-limit must be positive"));
        }
        Ok(SolverOptions {
            abs_tol: self.tol,
            rel_tol: self.tol,
            max_iters: self.max_iters,
            backend: match self.backend {
                BackendArg::Embedded => Backend::Embedded,
                BackendArg::External => Backend::External,
            },
            external_path: self.solver_path.clone(),
            time_limit: Duration::from_secs_f64(self.time_limit),
        })
    }

    fn warm(&self) -> WarmStart {
        if self.cold {
            WarmStart::Cold
        } else {
            WarmStart::Auto
        }
    }

    fn params(&self) -> serde_json::Value {
        json!({
            "backend": match self.backend { BackendArg::Embedded => "embedded", BackendArg::External => "external" },
            "tol": self.tol,
            "max_iters": self.max_iters,
            "time_limit": self.time_limit,
            "cold": self.cold,
        })
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = upperbound::DEFAULT_RESTARTS)]
    restarts: usize,
    #[arg(long = "search-iters", default_value_t = upperbound::DEFAULT_MAX_ITERS)]
    search_iters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Shortest decimal with at most 17 significant digits.
fn sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let decimals = (16 - x.abs().log10().floor() as i32).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn report(result: &BoundResult) {
    let text = format!(
        "value {}\nvalue_clamped {}\nstatus {}\nseconds {:.3}\n",
        result.value, result.value_clamped, result.solver_status, result.wall_time
    );
    // a closed pipe downstream is not an error worth reporting
    std::io::stdout().lock().write_all(text.as_bytes()).ok();
}

fn finish(result: &BoundResult) -> Result<(), CliError> {
    if result.solver_status.is_success() {
        Ok(())
    } else {
        Err(CliError::solver(format!("solver finished with status {}", result.solver_status)))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Werner { d, p, out } => {
            let rho = squash::qstate::werner(d, p)?;
            save_json(&StateFile::from_state(&rho), &out)
        }
        Command::Lower { state, m, k, solver, out } => {
            let rho = load_state(&state)?;
            let result = moment::lower_bound_with(&rho, m, k, &solver.options()?, &solver.warm())?;
            report(&result);
            if let Some(out) = out {
                let params = json!({ "state": state, "m": m, "k": k, "solver": solver.params() });
                save_json(&RunRecord::new(&rho, "lower", params, result.clone()), &out)?;
            }
            finish(&result)
        }
        Command::Upper { state, d_d, d_e, search, out } => {
            let rho = load_state(&state)?;
            let outcome = upperbound::upper_bound(&rho, d_d, d_e, search.restarts, search.search_iters, search.seed)?;
            report(&outcome.result);
            if let Some(out) = out {
                let params = json!({
                    "state": state, "d_d": d_d, "d_e": d_e,
                    "restarts": search.restarts, "search_iters": search.search_iters, "seed": search.seed,
                });
                save_json(&RunRecord::new(&rho, "upper", params, outcome.result.clone()), &out)?;
            }
            finish(&outcome.result)
        }
        Command::Figure1 { d, m, k, d_d, d_e, p_grid, solver, search, out } => {
            figure1(d, m, k, d_d, d_e, &p_grid, &solver, &search, &out)
        }
        Command::Quad { m } => {
            let rule = QuadratureRule::new(m)?;
            let text: String = rule.iter().map(|(t, w)| format!("{},{}\n", sig17(t), sig17(w))).collect();
            std::io::stdout().lock().write_all(text.as_bytes()).ok();
            Ok(())
        }
        Command::Export { state, m, k, out } => {
            let rho = load_state(&state)?;
            let rule = QuadratureRule::new(m)?;
            let inst = moment::realify(&moment::build_moment_problem(&rho, &rule, k)?);
            sdpa::write(&inst, &out)?;
            Ok(())
        }
    }
}

fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let grid: Vec<f64> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| CliError::input(format!("bad grid value {s:?}"))))
        .collect::<Result<_, _>>()?;
    if grid.is_empty() {
        return Err(CliError::input("the p grid is empty"));
    }
    if let Some(p) = grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(CliError::input(format!("grid value {p} is outside [0, 1]")));
    }
    Ok(grid)
}

#[allow(clippy::too_many_arguments)]
fn figure1(
    d: usize,
    m: usize,
    k: usize,
    d_d: usize,
    d_e: usize,
    p_grid: &str,
    solver: &SolverArgs,
    search: &SearchArgs,
    out: &PathBuf,
) -> Result<(), CliError> {
    let grid = parse_grid(p_grid)?;
    let opts = solver.options()?;
    QuadratureRule::new(m)?;
    let mut writer = csv::Writer::from_path(out).map_err(|e| CliError::input(format!("cannot write {}: {e}", out.display())))?;
    writer
        .write_record([
            "p", "lower_raw", "lower_clamped", "upper", "m", "k", "d_D", "d_E",
            "status_lower", "status_upper", "seconds_lower", "seconds_upper",
        ])
        .map_err(|e| CliError::input(e.to_string()))?;
    let mut failed = false;
    for &p in &grid {
        let rho: DensityMatrix = squash::qstate::werner(d, p)?;
        let upper = upperbound::upper_bound(&rho, d_d, d_e, search.restarts, search.search_iters, search.seed)?;
        let tau = upperbound::transposed_extension(&rho, &upper.best)?;
        let warm = if solver.cold { WarmStart::Cold } else { WarmStart::Extension(tau) };
        let lower = moment::lower_bound_with(&rho, m, k, &opts, &warm)?;
        log::info!("p {p}: lower {:.6} ({}), upper {:.6}", lower.value, lower.solver_status, upper.result.value);
        failed |= !lower.solver_status.is_success() || !upper.result.solver_status.is_success();
        writer
            .write_record([
                p.to_string(),
                lower.value.to_string(),
                lower.value_clamped.to_string(),
                upper.result.value.to_string(),
                m.to_string(),
                k.to_string(),
                d_d.to_string(),
                d_e.to_string(),
                lower.solver_status.to_string(),
                upper.result.solver_status.to_string(),
                format!("{:.3}", lower.wall_time),
                format!("{:.3}", upper.result.wall_time),
            ])
            .map_err(|e| CliError::input(e.to_string()))?;
        writer.flush().map_err(|e| CliError::input(e.to_string()))?;
    }
    if failed {
        return Err(CliError::solver("at least one grid point did not solve"));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            e.print().ok();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
