//! File-based backend: writes `.dat-s`, runs `<solver> input output`, and
//! reads objective values from the output file or the captured console.
//!
//! Understands SDPA (`objValPrimal`/`objValDual`, `phase.value`) and CSDP
//! (`Primal objective value:`) output.

use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use super::{sdpa, SdpInstance, Solution, SolverOptions, Status};
use crate::error::{Error, Result};

pub const ENV_SOLVER: &str = "SQUASH_SDP_SOLVER";

pub fn solver_path(opts: &SolverOptions) -> Result<PathBuf> {
    let path = match &opts.external_path {
        Some(p) => p.clone(),
        None => std::env::var_os(ENV_SOLVER)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
            .ok_or_else(|| Error::Environment(format!("external backend selected but {ENV_SOLVER} is not set")))?,
    };
    if !path.is_file() {
        return Err(Error::Environment(format!("external solver {} not found", path.display())));
    }
    Ok(path)
}

pub fn solve_external(inst: &SdpInstance, opts: &SolverOptions) -> Result<Solution> {
    let bin = solver_path(opts)?;
    let start = Instant::now();
    let dir = tempfile::tempdir()?;
    let input = dir.path().join("problem.dat-s");
    let output = dir.path().join("problem.out");
    sdpa::write(inst, &input)?;

    let mut child = Command::new(&bin)
        .arg(&input)
        .arg(&output)
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Environment(format!("cannot run {}: {e}", bin.display())))?;
    // drain pipes on helper threads so a chatty solver cannot block
    let mut out_pipe = child.stdout.take().unwrap();
    let mut err_pipe = child.stderr.take().unwrap();
    let out_reader = thread::spawn(move || {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut out_pipe, &mut s).ok();
        s
    });
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut err_pipe, &mut s).ok();
        s
    });
    let exit = loop {
        if let Some(status) = child.try_wait()? {
            break Some(status);
        }
        if start.elapsed() >= opts.time_limit {
            child.kill().ok();
            child.wait().ok();
            break None;
        }
        thread::sleep(Duration::from_millis(20));
    };
    let stdout = out_reader.join().unwrap_or_default();
    let stderr = err_reader.join().unwrap_or_default();
    let file = std::fs::read_to_string(&output).unwrap_or_default();
    let captured = format!("{file}\n{stdout}\n{stderr}");

    let Some(exit) = exit else {
        return Ok(Solution {
            primal: f64::NAN,
            dual: f64::NAN,
            status: Status::NumericalTrouble,
            iterations: 0,
            wall_time: start.elapsed().as_secs_f64(),
            primal_infeasibility: f64::NAN,
            dual_infeasibility: f64::NAN,
            x: None,
        });
    };
    let (primal, dual, status) = parse_result(&captured, exit.code())?;
    Ok(Solution {
        primal,
        dual,
        status,
        iterations: 0,
        wall_time: start.elapsed().as_secs_f64(),
        primal_infeasibility: f64::NAN,
        dual_infeasibility: f64::NAN,
        x: None,
    })
}

fn value_after(text: &str, key: &str) -> Option<f64> {
    text.lines().find_map(|l| {
        let rest = l.trim().strip_prefix(key)?;
        let rest = rest.trim_start().trim_start_matches(['=', ':']).trim();
        rest.split_whitespace().next()?.parse().ok()
    })
}

/// Returns `(primal, dual, status)` in the standard-form sign convention.
pub fn parse_result(text: &str, exit_code: Option<i32>) -> Result<(f64, f64, Status)> {
    let protocol = |message: &str| Error::Protocol { message: message.to_string(), output: text.to_string() };

    if let (Some(p), Some(d)) = (value_after(text, "objValPrimal"), value_after(text, "objValDual")) {
        let phase = text
            .lines()
            .find_map(|l| l.trim().strip_prefix("phase.value").map(|r| r.trim_start_matches([' ', '=']).trim().to_string()))
            .unwrap_or_default();
        // SDPA's primal is our dual and vice versa
        let status = match phase.as_str() {
            "pdOPT" => Status::Optimal,
            "pdFEAS" | "pFEAS" | "dFEAS" => Status::NearOptimal,
            "pINF_dFEAS" | "dUNBD" => Status::Unbounded,
            "pFEAS_dINF" | "pUNBD" | "pdINF" => Status::Infeasible,
            "" => return Err(protocol("SDPA output without a phase.value line")),
            _ => Status::NumericalTrouble,
        };
        return Ok((-d, -p, status));
    }

    if let Some(p) = value_after(text, "Primal objective value") {
        let d = value_after(text, "Dual objective value").ok_or_else(|| protocol("CSDP output without a dual objective"))?;
        let status = match exit_code {
            Some(0) => Status::Optimal,
            Some(1) => Status::Infeasible,
            Some(2) => Status::Unbounded,
            Some(3) => Status::NearOptimal,
            _ => Status::NumericalTrouble,
        };
        return Ok((-p, -d, status));
    }

    if exit_code != Some(0) {
        return Err(protocol(&format!("external solver exited with {exit_code:?} and no objective values")));
    }
    Err(protocol("no objective values found in solver output"))
}
