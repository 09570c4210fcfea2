//! `solve`: one solver run on a matrix file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use biortho::flow::{solve_flow_deflated, FLOW_RESTARTS};
use biortho::io::{read_json, read_matrix, write_json};
use biortho::matgen::random_vector;
use biortho::power::{gershgorin_shifts, shifted_inverse_power_deflated};
use biortho::{
    power_iterate_deflated, BiorthoPair, CMatrix, Complex, ConvergenceTrace, FlowResult, FlowStatus, Mode,
    PowerResult, PowerStatus, SolverConfig,
};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::{resolve_seed, trace, EXIT_BREAKDOWN, EXIT_NO_CONVERGENCE, EXIT_OK};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Coupled biorthogonal flow (largest or smallest real part).
    Flow,
    /// Power iteration (largest modulus; smallest modulus with --mode smallest).
    Power,
    /// Shifted inverse power iteration (eigenvalue nearest --shift).
    Inverse,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Largest,
    Smallest,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Largest => Mode::Largest,
            ModeArg::Smallest => Mode::Smallest,
        }
    }
}

#[derive(clap::Args)]
pub struct Args {
    /// Matrix JSON file.
    matrix: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Flow)]
    method: Method,
    /// Residual tolerance δ for both the right and the left vector.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Power: iteration cap. Flow: accepted-step cap.
    #[arg(long)]
    max_iter: Option<u64>,
    /// Flow: integration end time.
    #[arg(long)]
    max_time: Option<f64>,
    /// Seed for initial vectors (and the default inverse shift); BIORTHO_SEED overrides.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Flow: largest or smallest real part. Power: largest or smallest modulus.
    #[arg(long, value_enum, default_value_t = ModeArg::Largest)]
    mode: ModeArg,
    /// Inverse only: shift as `re,im`. Defaults to a seeded Gershgorin point.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    shift: Option<Complex>,
    /// Result file of an earlier run whose pair is deflated (repeatable).
    #[arg(long)]
    deflate: Vec<PathBuf>,
    /// Trace output; default `<matrix stem>.<method>.trace.jsonl` beside the matrix.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Result output; default `<matrix stem>.<method>.result.json` beside the matrix.
    #[arg(long)]
    result: Option<PathBuf>,
}

/// `re,im` or a bare real part. Accepts U+2212 as a minus sign.
pub fn parse_complex(s: &str) -> Result<Complex, String> {
    let s = s.replace('\u{2212}', "-");
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |p: &str| p.parse::<f64>().map_err(|e| format!("{p:?}: {e}"));
    let z = match parts.as_slice() {
        [re] => Complex::new(num(re)?, 0.0),
        [re, im] => Complex::new(num(re)?, num(im)?),
        _ => return Err(format!("expected re,im, got {s:?}")),
    };
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err("shift must be finite".into());
    }
    Ok(z)
}

/// Solver-independent view of one run.
#[derive(Clone, Debug)]
pub struct Run {
    pub status: String,
    pub exit_code: u8,
    pub pair: Option<BiorthoPair>,
    pub trace: ConvergenceTrace,
    pub iterations: Option<u64>,
    pub t_final: Option<f64>,
    pub pairing_drift: Option<f64>,
    pub restarts: Option<u64>,
    pub stagnated: Option<bool>,
}

impl Run {
    pub fn converged(&self) -> bool {
        self.exit_code == EXIT_OK
    }

    pub fn lambda(&self) -> Option<Complex> {
        self.pair.as_ref().map(|p| p.lambda)
    }
}

/// Serde string form of a unit enum value.
pub fn value_name<T: Serialize>(s: &T) -> String {
    serde_json::to_value(s).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

impl From<FlowResult> for Run {
    fn from(r: FlowResult) -> Self {
        let exit_code = match r.status {
            FlowStatus::Converged => EXIT_OK,
            FlowStatus::MaxTime => EXIT_NO_CONVERGENCE,
            FlowStatus::PairingCollapse | FlowStatus::StepUnderflow => EXIT_BREAKDOWN,
        };
        Self {
            status: value_name(&r.status),
            exit_code,
            pair: r.pair,
            trace: r.trace,
            iterations: Some(r.steps.accepted),
            t_final: Some(r.final_state.t),
            pairing_drift: Some(r.max_pairing_drift),
            restarts: Some(r.restarts),
            stagnated: Some(r.stagnated),
        }
    }
}

impl From<PowerResult> for Run {
    fn from(r: PowerResult) -> Self {
        let exit_code = match r.status {
            PowerStatus::Converged => EXIT_OK,
            PowerStatus::MaxIter => EXIT_NO_CONVERGENCE,
            PowerStatus::DominanceTie | PowerStatus::Breakdown => EXIT_BREAKDOWN,
        };
        Self {
            status: value_name(&r.status),
            exit_code,
            pair: r.pair,
            trace: r.trace,
            iterations: Some(r.iterations),
            t_final: None,
            pairing_drift: None,
            restarts: None,
            stagnated: None,
        }
    }
}

/// Contents of the result file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolveReport {
    pub matrix: PathBuf,
    pub method: Method,
    pub mode: Mode,
    pub status: String,
    pub converged: bool,
    pub exit_code: u8,
    pub lambda_re: Option<f64>,
    pub lambda_im: Option<f64>,
    pub residual_right: Option<f64>,
    pub residual_left: Option<f64>,
    pub iterations: Option<u64>,
    pub t_final: Option<f64>,
    pub pairing_drift: Option<f64>,
    pub restarts: Option<u64>,
    pub stagnated: Option<bool>,
    pub shift: Option<[f64; 2]>,
    pub seed: u64,
    pub tol: f64,
    pub deflated: usize,
    pub trace: PathBuf,
    pub pair: Option<BiorthoPair>,
}

pub struct Request<'a> {
    pub method: Method,
    pub mode: Mode,
    pub shift: Option<Complex>,
    pub found: &'a [BiorthoPair],
    pub cfg: SolverConfig,
}

/// Runs the solver; returns the run and the shift actually used.
pub fn execute(a: &CMatrix, req: &Request) -> Result<(Run, Option<Complex>)> {
    let n = a.n();
    let x0 = random_vector(n, req.cfg.seed);
    let cfg = &req.cfg;
    Ok(match (req.method, req.mode) {
        (Method::Flow, _) => {
            let cfg = SolverConfig { mode: req.mode, ..cfg.clone() };
            (solve_flow_deflated(a, req.found, &cfg)?.into(), None)
        }
        (Method::Power, Mode::Largest) => (power_iterate_deflated(a, &x0, req.found, cfg)?.into(), None),
        (Method::Power, Mode::Smallest) => {
            let q = Complex::new(0.0, 0.0);
            (shifted_inverse_power_deflated(a, q, &x0, req.found, cfg)?.into(), Some(q))
        }
        (Method::Inverse, Mode::Largest) => {
            let q = match req.shift {
                Some(q) => q,
                None => gershgorin_shifts(a, 1, cfg.seed)[0],
            };
            (shifted_inverse_power_deflated(a, q, &x0, req.found, cfg)?.into(), Some(q))
        }
        (Method::Inverse, Mode::Smallest) => bail!("--mode smallest does not apply to --method inverse"),
    })
}

fn default_output(matrix: &Path, method: Method, suffix: &str) -> PathBuf {
    let stem =
        matrix.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "matrix".into());
    let method = value_name(&method);
    matrix.with_file_name(format!("{stem}.{method}.{suffix}"))
}

pub fn load_deflation(paths: &[PathBuf]) -> Result<Vec<BiorthoPair>> {
    paths
        .iter()
        .map(|p| {
            let r: SolveReport = read_json(p)?;
            r.pair.with_context(|| format!("{} holds no eigenpair to deflate", p.display()))
        })
        .collect()
}

pub fn run(args: &Args) -> Result<u8> {
    if args.shift.is_some() && args.method != Method::Inverse {
        bail!("--shift applies to --method inverse only");
    }
    if args.max_time.is_some() && args.method != Method::Flow {
        bail!("--max-time applies to --method flow only");
    }
    let a = read_matrix(&args.matrix)?;
    let found = load_deflation(&args.deflate)?;
    let mut cfg =
        SolverConfig { delta_tol: args.tol, seed: resolve_seed(args.seed)?, ..SolverConfig::default() };
    if let Some(m) = args.max_iter {
        match args.method {
            Method::Flow => cfg.integrator.max_steps = m,
            _ => cfg.max_iter = m,
        }
    }
    if let Some(t) = args.max_time {
        cfg.integrator.max_time = t;
    }
    cfg.validate()?;
    let mode = Mode::from(args.mode);
    let (run, shift) = execute(
        &a,
        &Request { method: args.method, mode, shift: args.shift, found: &found, cfg: cfg.clone() },
    )?;

    let trace_path =
        args.trace.clone().unwrap_or_else(|| default_output(&args.matrix, args.method, "trace.jsonl"));
    let result_path =
        args.result.clone().unwrap_or_else(|| default_output(&args.matrix, args.method, "result.json"));
    trace::write(&trace_path, &run.trace)?;
    let report = SolveReport {
        matrix: args.matrix.clone(),
        method: args.method,
        mode,
        status: run.status.clone(),
        converged: run.converged(),
        exit_code: run.exit_code,
        lambda_re: run.lambda().map(|z| z.re),
        lambda_im: run.lambda().map(|z| z.im),
        residual_right: run.pair.as_ref().map(|p| p.residual_right(&a)),
        residual_left: run.pair.as_ref().map(|p| p.residual_left(&a)),
        iterations: run.iterations,
        t_final: run.t_final,
        pairing_drift: run.pairing_drift,
        restarts: run.restarts,
        stagnated: run.stagnated,
        shift: shift.map(|q| [q.re, q.im]),
        seed: cfg.seed,
        tol: cfg.delta_tol,
        deflated: found.len(),
        trace: trace_path.clone(),
        pair: run.pair.clone(),
    };
    write_json(&result_path, &report)?;

    let last = run.trace.last().map(|p| p.residual_phi.max(p.residual_psi));
    match run.lambda() {
        Some(l) => println!(
            "{}: lambda = {:.10} {:+.10}i, residual {:.3e}, {} steps",
            run.status,
            l.re,
            l.im,
            last.unwrap_or(f64::NAN),
            run.trace.len()
        ),
        None => println!("{}: no eigenvalue estimate", run.status),
    }
    if run.restarts.is_some_and(|k| k == FLOW_RESTARTS) && !run.converged() {
        eprintln!("pairing collapsed on every restart");
    }
    println!("wrote {} and {}", trace_path.display(), result_path.display());
    Ok(run.exit_code)
}
