//! Dynamical-system eigensolvers.
//!
//! For Hermitian `A` the flow `ẋ = ‖x‖² A x − ⟨x, A x⟩ x` keeps `‖x‖` fixed and
//! carries `x` to an eigenvector of the largest eigenvalue. For general `A`
//! a right vector `x_phi` and a left vector `x_psi` evolve together:
//!
//! ```text
//! ẋ_phi = χ A x_phi − ⟨x_psi, A x_phi⟩ x_phi
//! ẋ_psi = conj(χ) A† x_psi − ⟨x_phi, A† x_psi⟩ x_psi
//! ```
//!
//! with `χ = ⟨x_psi(0), x_phi(0)⟩` frozen at the start. The pairing
//! `⟨x_psi, x_phi⟩` stays equal to `χ` along the exact flow, and the pair
//! tends to the eigenvectors of the eigenvalue with the largest `Re(χ λ)`.
//! Initial vectors are scaled so that `χ = 1`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{IntegratorError, LinalgError, SolverError};
use crate::linalg::{CMatrix, CVector, Complex};
use crate::matgen::random_vector_rng;
use crate::ode::{integrate_with, Control, IntegratorConfig, StepStats, Termination};
use crate::power::{deflate_adjoint_raw, deflate_raw};
use crate::types::{BiorthoPair, ConvergenceTrace, SolverConfig, TracePoint};

/// Residual window for stagnation: this many accepted steps...
const STAGNATION_STEPS: u64 = 100;
/// ...and this much natural time `|χ| ‖A‖_F t`, without a 1% improvement.
const STAGNATION_NATURAL_TIME: f64 = 2000.0;
const STAGNATION_IMPROVEMENT: f64 = 0.99;
/// Relative pairing drift beyond which the integrated trajectory no longer
/// follows the flow; reported as a collapse.
const PAIRING_LOST: f64 = 1e-3;
/// Fresh random starts tried after a collapse.
pub const FLOW_RESTARTS: u64 = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub x_phi: CVector,
    pub x_psi: CVector,
    pub chi: Complex,
}

impl FlowState {
    pub fn new(x_phi: CVector, x_psi: CVector) -> Self {
        let chi = x_psi.dot(&x_phi);
        Self { t: 0.0, x_phi, x_psi, chi }
    }

    pub fn pairing(&self) -> Complex {
        self.x_psi.dot(&self.x_phi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowStatus {
    Converged,
    MaxTime,
    PairingCollapse,
    StepUnderflow,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowResult {
    /// Bi-normalized pair at termination; `None` only if the pairing collapsed.
    pub pair: Option<BiorthoPair>,
    pub trace: ConvergenceTrace,
    pub status: FlowStatus,
    /// Stopped early because the residual stopped improving.
    pub stagnated: bool,
    pub final_state: FlowState,
    /// `max_t |⟨x_psi(t), x_phi(t)⟩ − χ| / |χ|` over accepted steps.
    pub max_pairing_drift: f64,
    pub steps: StepStats,
    /// Random restarts taken after pairing collapses.
    pub restarts: u64,
}

impl FlowResult {
    pub fn lambda(&self) -> Option<Complex> {
        self.pair.as_ref().map(|p| p.lambda)
    }

    pub fn converged(&self) -> bool {
        self.status == FlowStatus::Converged
    }
}

/// `‖x‖² A x − ⟨x, A x⟩ x`. Fails unless `A` is Hermitian to 1e-12.
pub fn hermitian_rhs(a: &CMatrix, x: &CVector) -> Result<CVector, SolverError> {
    if !a.is_hermitian(1e-12) {
        return Err(SolverError::NotHermitian);
    }
    check_dim(a, x)?;
    Ok(hermitian_field(a, x))
}

fn hermitian_field(a: &CMatrix, x: &CVector) -> CVector {
    let ax = a.apply(x);
    let mut out = ax.scale(Complex::new(x.norm_sqr(), 0.0));
    out.axpy(-x.dot(&ax), x);
    out
}

/// Right-hand sides of the coupled flow at `s`, using the frozen `s.chi`.
pub fn coupled_rhs(a: &CMatrix, s: &FlowState) -> Result<(CVector, CVector), SolverError> {
    check_dim(a, &s.x_phi)?;
    check_dim(a, &s.x_psi)?;
    Ok(coupled_field(a, s.chi, &s.x_phi, &s.x_psi))
}

fn coupled_field(a: &CMatrix, chi: Complex, x_phi: &CVector, x_psi: &CVector) -> (CVector, CVector) {
    let ax = a.apply(x_phi);
    let aty = a.apply_adjoint(x_psi);
    let mut f_phi = ax.scale(chi);
    f_phi.axpy(-x_psi.dot(&ax), x_phi);
    let mut f_psi = aty.scale(chi.conj());
    f_psi.axpy(-x_phi.dot(&aty), x_psi);
    (f_phi, f_psi)
}

/// Flow field on `A + sI`. Along the exact flow it equals the field on
/// `A`; the extra term `s (χ − ⟨x_psi, x_phi⟩) x` damps pairing drift, which
/// otherwise grows like `exp(−2 Re(λ) t)` when the target has `Re λ < 0`.
fn stabilized_field(
    a: &CMatrix,
    chi: Complex,
    shift: f64,
    x_phi: &CVector,
    x_psi: &CVector,
) -> (CVector, CVector) {
    let (mut fp, mut fq) = coupled_field(a, chi, x_phi, x_psi);
    if shift != 0.0 {
        let gap = (chi - x_psi.dot(x_phi)) * shift;
        fp.axpy(gap, x_phi);
        fq.axpy(gap.conj(), x_psi);
    }
    (fp, fq)
}

/// Real shift making `Re(λ + s) ≥ ‖A‖_F / (10 √n)` for the flow's target:
/// the largest real part is at least `Re tr(A) / n`; with deflation any
/// eigenvalue may be the target, so the Gershgorin lower bound is used.
pub fn stabilizing_shift(a: &CMatrix, deflated: bool) -> f64 {
    let n = a.n() as f64;
    let margin = a.norm_fro() / (10.0 * n.sqrt());
    let lower = if deflated {
        a.gershgorin_disks().into_iter().map(|(c, r)| c.re - r).fold(f64::INFINITY, f64::min)
    } else {
        a.trace().re / n
    };
    (margin - lower).max(0.0)
}

fn check_dim(a: &CMatrix, x: &CVector) -> Result<(), SolverError> {
    if a.n() == x.len() {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch { expected: a.n(), found: x.len() }.into())
    }
}

fn join(x_phi: &CVector, x_psi: &CVector) -> CVector {
    let mut v = x_phi.as_slice().to_vec();
    v.extend_from_slice(x_psi.as_slice());
    CVector::new(v)
}

fn split(y: &CVector) -> (CVector, CVector) {
    let n = y.len() / 2;
    (CVector::new(y.as_slice()[..n].to_vec()), CVector::new(y.as_slice()[n..].to_vec()))
}

/// Scales `x_phi` to unit norm and `x_psi` so that `⟨x_psi, x_phi⟩ = 1`.
fn normalize_initials(x_phi: CVector, x_psi: CVector, floor: f64) -> Result<(CVector, CVector), SolverError> {
    let x_phi = x_phi.normalized().ok_or(LinalgError::ZeroVector)?;
    let p = x_psi.dot(&x_phi);
    if p.norm() < floor {
        return Err(LinalgError::DegeneratePairing { magnitude: p.norm(), floor }.into());
    }
    let x_psi = x_psi.scale(Complex::new(1.0, 0.0) / p.conj());
    Ok((x_phi, x_psi))
}

/// Seeded random initial pair; `x_psi = x_phi` unless `independent`.
pub fn random_initials(n: usize, seed: u64, independent: bool) -> (CVector, CVector) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x_phi = random_vector_rng(n, &mut rng);
    let x_psi = if independent { random_vector_rng(n, &mut rng) } else { x_phi.clone() };
    (x_phi, x_psi)
}

/// Random `x_phi(0)`, `x_psi(0)` with `⟨psi_j, x_phi(0)⟩ = 0` and
/// `⟨phi_j, x_psi(0)⟩ = 0` for every found pair.
pub fn deflated_initials(
    found: &[BiorthoPair],
    n: usize,
    seed: u64,
) -> Result<(CVector, CVector), SolverError> {
    if found.len() >= n {
        return Err(SolverError::SpaceExhausted);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..8 {
        let v = random_vector_rng(n, &mut rng);
        let x_phi = deflate_raw(&deflate_raw(&v, found), found);
        let x_psi = deflate_adjoint_raw(&deflate_adjoint_raw(&v, found), found);
        let scale = v.norm();
        if x_phi.norm() > 1e-10 * scale
            && x_psi.norm() > 1e-10 * scale
            && x_psi.dot(&x_phi).norm() > 1e-8 * x_phi.norm() * x_psi.norm()
        {
            return Ok((x_phi, x_psi));
        }
    }
    Err(SolverError::DeflatedAway)
}

/// Coupled flow from a random start, to the eigenvalue with the largest real
/// part (or smallest, per `cfg.mode`).
pub fn solve_flow(a: &CMatrix, cfg: &SolverConfig) -> Result<FlowResult, SolverError> {
    solve_flow_deflated(a, &[], cfg)
}

/// [`solve_flow`] on `−A` with the eigenvalue negated back.
pub fn solve_flow_smallest(a: &CMatrix, cfg: &SolverConfig) -> Result<FlowResult, SolverError> {
    let cfg = SolverConfig { mode: crate::types::Mode::Smallest, ..cfg.clone() };
    solve_flow_deflated(a, &[], &cfg)
}

/// Coupled flow started orthogonally to the `found` pairs, so it converges
/// to the next eigenvalue in real-part order. A start whose pairing
/// collapses is replaced by a fresh random one, up to [`FLOW_RESTARTS`]
/// times.
pub fn solve_flow_deflated(
    a: &CMatrix,
    found: &[BiorthoPair],
    cfg: &SolverConfig,
) -> Result<FlowResult, SolverError> {
    cfg.validate()?;
    let n = a.n();
    let mut k: u64 = 0;
    loop {
        let seed = cfg.seed.wrapping_add(k.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let (x_phi, x_psi) = if found.is_empty() {
            random_initials(n, seed, cfg.independent_initials)
        } else {
            deflated_initials(found, n, seed)?
        };
        let mut r = solve_flow_from(a, x_phi, x_psi, found, cfg)?;
        if r.status != FlowStatus::PairingCollapse || k == FLOW_RESTARTS {
            r.restarts = k;
            return Ok(r);
        }
        k += 1;
    }
}

/// Up to `count` eigenpairs in real-part order by successive deflated
/// flows. Each pair is driven to `1e-3 δ` (at least `1e-14`) before it is
/// used as a projector, since the projectors' error sets the residual floor
/// of later runs. A run that stops short of the tighter level but meets `δ`
/// is reported as converged. Stops at the first run that fails `δ`.
pub fn solve_flow_spectrum(
    a: &CMatrix,
    count: usize,
    cfg: &SolverConfig,
) -> Result<Vec<FlowResult>, SolverError> {
    cfg.validate()?;
    let tight = SolverConfig { delta_tol: (cfg.delta_tol * 1e-3).max(1e-14), ..cfg.clone() };
    let mut found = Vec::new();
    let mut out = Vec::new();
    for _ in 0..count.min(a.n()) {
        let mut r = solve_flow_deflated(a, &found, &tight)?;
        let meets =
            r.trace.last().is_some_and(|p| p.residual_phi < cfg.delta_tol && p.residual_psi < cfg.delta_tol);
        if meets && r.status == FlowStatus::MaxTime {
            r.status = FlowStatus::Converged;
        }
        let ok = r.converged();
        if let (true, Some(p)) = (ok, r.pair.clone()) {
            found.push(p);
        }
        out.push(r);
        if !ok {
            break;
        }
    }
    Ok(out)
}

/// Coupled flow from the given initial vectors (rescaled so `χ = 1`).
pub fn solve_flow_from(
    a: &CMatrix,
    x_phi: CVector,
    x_psi: CVector,
    found: &[BiorthoPair],
    cfg: &SolverConfig,
) -> Result<FlowResult, SolverError> {
    cfg.validate()?;
    check_dim(a, &x_phi)?;
    check_dim(a, &x_psi)?;
    let (x_phi, x_psi) = normalize_initials(x_phi, x_psi, cfg.pairing_floor)?;
    match cfg.mode {
        crate::types::Mode::Largest => run_flow(a, x_phi, x_psi, found, cfg),
        crate::types::Mode::Smallest => {
            let neg = -a;
            let flipped: Vec<BiorthoPair> =
                found.iter().map(|p| BiorthoPair { lambda: -p.lambda, ..p.clone() }).collect();
            let mut r = run_flow(&neg, x_phi, x_psi, &flipped, cfg)?;
            if let Some(p) = r.pair.as_mut() {
                p.lambda = -p.lambda;
            }
            for s in &mut r.trace.samples {
                s.lambda = -s.lambda;
                s.rayleigh = s.rayleigh.map(|z| -z);
            }
            Ok(r)
        }
    }
}

fn run_flow(
    a: &CMatrix,
    x_phi0: CVector,
    x_psi0: CVector,
    found: &[BiorthoPair],
    cfg: &SolverConfig,
) -> Result<FlowResult, SolverError> {
    let chi = x_psi0.dot(&x_phi0);
    let natural_rate = chi.norm() * a.norm_fro();
    let shift = stabilizing_shift(a, !found.is_empty());

    let mut trace = ConvergenceTrace::default();
    let mut status = FlowStatus::MaxTime;
    let mut stagnated = false;
    let mut max_drift = 0.0f64;
    let mut steps = 0u64;
    let mut mark = (f64::INFINITY, 0u64, 0.0f64);

    let rhs = |_t: f64, y: &CVector| {
        let (p, q) = split(y);
        let (fp, fq) = stabilized_field(a, chi, shift, &p, &q);
        join(&fp, &fq)
    };

    let observer = |t: f64, y: &mut CVector| {
        if !found.is_empty() && steps > 0 && steps.is_multiple_of(cfg.reorthogonalize_every) {
            let (p, q) = split(y);
            let p = deflate_raw(&deflate_raw(&p, found), found);
            let q = deflate_adjoint_raw(&deflate_adjoint_raw(&q, found), found);
            *y = join(&p, &q);
        }
        steps += 1;
        let (p, q) = split(y);
        let pairing = q.dot(&p);
        max_drift = max_drift.max((pairing - chi).norm() / chi.norm());
        if pairing.norm() < cfg.pairing_floor || max_drift > PAIRING_LOST {
            status = FlowStatus::PairingCollapse;
            return Control::Stop;
        }
        let ap = a.apply(&p);
        let lambda = q.dot(&ap) / pairing;
        let p_norm = p.norm();
        let mut rp = ap;
        rp.axpy(-lambda, &p);
        let r_phi = rp.norm() / p_norm;
        let mut rq = a.apply_adjoint(&q);
        rq.axpy(-lambda.conj(), &q);
        let r_psi = rq.norm() * p_norm / pairing.norm();
        trace.push(TracePoint {
            t_or_iter: t,
            lambda,
            residual_phi: r_phi,
            residual_psi: r_psi,
            rayleigh: Some(p.dot(&a.apply(&p)) / p.norm_sqr()),
        });
        if r_phi < cfg.delta_tol && r_psi < cfg.delta_tol {
            status = FlowStatus::Converged;
            return Control::Stop;
        }
        let r = r_phi.max(r_psi);
        if r < STAGNATION_IMPROVEMENT * mark.0 {
            mark = (r, steps, t);
        } else if steps - mark.1 >= STAGNATION_STEPS && natural_rate * (t - mark.2) >= STAGNATION_NATURAL_TIME
        {
            stagnated = true;
            return Control::Stop;
        }
        Control::Continue
    };

    let icfg = IntegratorConfig { max_steps: cfg.integrator.max_steps, ..cfg.integrator.clone() };
    let out = integrate_with(rhs, &join(&x_phi0, &x_psi0), &icfg, observer)?;
    let status = match out.terminated_by {
        Termination::StopPredicate => status,
        Termination::MaxTime | Termination::MaxSteps => FlowStatus::MaxTime,
        Termination::StepUnderflow => FlowStatus::StepUnderflow,
    };
    let (p, q) = split(&out.y);
    let pair =
        trace.last().and_then(|tp| BiorthoPair::binormalized(tp.lambda, &p, &q, cfg.pairing_floor).ok());
    Ok(FlowResult {
        pair,
        trace,
        status,
        stagnated,
        final_state: FlowState { t: out.t, x_phi: p, x_psi: q, chi },
        max_pairing_drift: max_drift,
        steps: out.stats,
        restarts: 0,
    })
}

/// Integrates the coupled flow from `(x_phi0, x_psi0)` as given (no
/// rescaling) up to time `t_end`.
pub fn integrate_coupled(
    a: &CMatrix,
    x_phi0: &CVector,
    x_psi0: &CVector,
    icfg: &IntegratorConfig,
    t_end: f64,
) -> Result<FlowState, SolverError> {
    check_dim(a, x_phi0)?;
    check_dim(a, x_psi0)?;
    let chi = x_psi0.dot(x_phi0);
    let cfg = IntegratorConfig { max_time: t_end, ..icfg.clone() };
    let shift = stabilizing_shift(a, false);
    let out = integrate_with(
        |_, y| {
            let (p, q) = split(y);
            let (fp, fq) = stabilized_field(a, chi, shift, &p, &q);
            join(&fp, &fq)
        },
        &join(x_phi0, x_psi0),
        &cfg,
        |_, _| Control::Continue,
    )?;
    if out.terminated_by != Termination::MaxTime {
        return Err(SolverError::Integrator(IntegratorError::InvalidConfig(format!(
            "integration stopped early at t = {} ({:?})",
            out.t, out.terminated_by
        ))));
    }
    let (x_phi, x_psi) = split(&out.y);
    Ok(FlowState { t: out.t, x_phi, x_psi, chi })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HermitianFlowResult {
    pub x: CVector,
    pub lambda: Complex,
    pub residual: f64,
    pub converged: bool,
    pub t: f64,
    /// `max_t |‖x(t)‖ − ‖x(0)‖| / ‖x(0)‖` over accepted steps.
    pub max_norm_drift: f64,
    pub steps: StepStats,
}

/// Hermitian flow from `x0`, stopped when `‖A x − λ x‖ / ‖x‖ < δ_tol` with
/// `λ` the Rayleigh quotient, or at the integrator's `max_time`.
pub fn solve_hermitian_flow(
    a: &CMatrix,
    x0: &CVector,
    cfg: &SolverConfig,
) -> Result<HermitianFlowResult, SolverError> {
    cfg.validate()?;
    if !a.is_hermitian(1e-12) {
        return Err(SolverError::NotHermitian);
    }
    check_dim(a, x0)?;
    let n0 = x0.norm();
    if n0 == 0.0 {
        return Err(LinalgError::ZeroVector.into());
    }
    let mut drift = 0.0f64;
    let mut last = (Complex::new(0.0, 0.0), f64::INFINITY);
    let out = integrate_with(
        |_, x| hermitian_field(a, x),
        x0,
        &cfg.integrator,
        |_, x| {
            let nx = x.norm();
            drift = drift.max((nx - n0).abs() / n0);
            let ax = a.apply(x);
            let lambda = x.dot(&ax) / x.norm_sqr();
            let mut r = ax;
            r.axpy(-lambda, x);
            last = (lambda, r.norm() / nx);
            if last.1 < cfg.delta_tol {
                Control::Stop
            } else {
                Control::Continue
            }
        },
    )?;
    Ok(HermitianFlowResult {
        converged: last.1 < cfg.delta_tol,
        x: out.y,
        lambda: last.0,
        residual: last.1,
        t: out.t,
        max_norm_drift: drift,
        steps: out.stats,
    })
}
