//! Power iteration with biorthogonal (Schwartz) quotients.
//!
//! Two sequences run side by side: `x_m ∝ A^m x_0` for the right vector and
//! `y_m ∝ (A†)^m y_0` for the left one. Each is normalized and rotated so its
//! largest entry is real positive. The eigenvalue estimate is
//! `γ_m = ⟨y_m, A x_m⟩ / ⟨y_m, x_m⟩`, which is unaffected by those rescalings
//! and converges at `|λ₂/λ₁|^{2m}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LinalgError, SolverError};
use crate::linalg::{CMatrix, CVector, Complex};
use crate::lu::LuFactors;
use crate::matgen::random_vector_rng;
use crate::types::{BiorthoPair, ConvergenceTrace, SolverConfig, TracePoint};

const TIE_WINDOW: u64 = 500;
const TIE_IMPROVEMENT: f64 = 0.99;
const TIE_DIRECTION_CHANGE: f64 = 1e-3;
const BREAKDOWN_NORM: f64 = 1e-300;
/// Eigenvalues closer than this (absolute, or relative above 1) are duplicates.
pub const DEDUP_TOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PowerStatus {
    Converged,
    MaxIter,
    DominanceTie,
    Breakdown,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PowerResult {
    /// Bi-normalized pair from the last iterate; `None` on breakdown.
    pub pair: Option<BiorthoPair>,
    pub trace: ConvergenceTrace,
    pub iterations: u64,
    pub status: PowerStatus,
}

impl PowerResult {
    pub fn lambda(&self) -> Option<Complex> {
        self.pair.as_ref().map(|p| p.lambda)
    }

    pub fn converged(&self) -> bool {
        self.status == PowerStatus::Converged
    }
}

/// `x − Σ ⟨psi_j, x⟩ phi_j`, one pass.
pub fn deflate_raw(x: &CVector, found: &[BiorthoPair]) -> CVector {
    let mut out = x.clone();
    for p in found {
        let c = p.psi.dot(&out);
        out.axpy(-c, &p.phi);
    }
    out
}

/// `y − Σ ⟨phi_j, y⟩ psi_j`, one pass; the left-vector counterpart.
pub fn deflate_adjoint_raw(y: &CVector, found: &[BiorthoPair]) -> CVector {
    let mut out = y.clone();
    for p in found {
        let c = p.phi.dot(&out);
        out.axpy(-c, &p.psi);
    }
    out
}

/// Removes the components of `x` along the found right eigenvectors, so
/// that `⟨psi_j, result⟩ = 0`. Fails if almost nothing is left.
pub fn deflate_vector(x: &CVector, found: &[BiorthoPair]) -> Result<CVector, SolverError> {
    let out = deflate_raw(&deflate_raw(x, found), found);
    if out.norm() < 1e-10 * x.norm() || x.norm() == 0.0 {
        return Err(SolverError::DeflatedAway);
    }
    Ok(out)
}

/// `⟨x_psi, A x_phi⟩ / ⟨x_psi, x_phi⟩` on the current iterates.
pub fn schwartz_quotient(
    a: &CMatrix,
    x_phi: &CVector,
    x_psi: &CVector,
    floor: f64,
) -> Result<Complex, SolverError> {
    crate::linalg::bi_rayleigh(a, x_psi, x_phi, floor).map_err(SolverError::from)
}

/// Quotients `γ_0..γ_m` and the iterates `x_k = (A / γ_k) x_{k−1}`.
#[derive(Clone, Debug)]
pub struct SchwartzSequence {
    pub gammas: Vec<Complex>,
    /// `s_iterates[k]` is `x_k`; `s_iterates[0]` is `x_phi`.
    pub s_iterates: Vec<CVector>,
}

/// Runs the unnormalized map `x_k = A x_{k−1} / γ_k` for `m` steps.
pub fn schwartz_sequence(
    a: &CMatrix,
    x_phi: &CVector,
    x_psi: &CVector,
    m: usize,
    floor: f64,
) -> Result<SchwartzSequence, SolverError> {
    let mut u = x_phi.normalized().ok_or(LinalgError::ZeroVector)?;
    let mut v = x_psi.normalized().ok_or(LinalgError::ZeroVector)?;
    let mut gammas = vec![schwartz_quotient(a, &u, &v, floor)?];
    let mut s_iterates = vec![x_phi.clone()];
    for _ in 0..m {
        u = a.apply(&u).normalized().ok_or(LinalgError::ZeroVector)?;
        v = a.apply_adjoint(&v).normalized().ok_or(LinalgError::ZeroVector)?;
        let g = schwartz_quotient(a, &u, &v, floor)?;
        let next = a.apply(s_iterates.last().expect("seeded")).scale(Complex::new(1.0, 0.0) / g);
        gammas.push(g);
        s_iterates.push(next);
    }
    Ok(SchwartzSequence { gammas, s_iterates })
}

/// Linear operator driving an iteration, with its adjoint.
trait Operator {
    fn apply(&self, x: &CVector) -> Result<CVector, SolverError>;
    fn apply_adjoint(&self, y: &CVector) -> Result<CVector, SolverError>;
    /// Eigenvalue of `A` from the dominant eigenvalue `μ` of the operator.
    fn lambda(&self, mu: Complex) -> Complex;
}

struct Plain<'a>(&'a CMatrix);

impl Operator for Plain<'_> {
    fn apply(&self, x: &CVector) -> Result<CVector, SolverError> {
        Ok(self.0.apply(x))
    }
    fn apply_adjoint(&self, y: &CVector) -> Result<CVector, SolverError> {
        Ok(self.0.apply_adjoint(y))
    }
    fn lambda(&self, mu: Complex) -> Complex {
        mu
    }
}

struct ShiftInvert {
    lu: LuFactors,
    q: Complex,
}

impl Operator for ShiftInvert {
    fn apply(&self, x: &CVector) -> Result<CVector, SolverError> {
        self.lu.solve(x).map_err(|_| SolverError::Linalg(LinalgError::NonFinite))
    }
    fn apply_adjoint(&self, y: &CVector) -> Result<CVector, SolverError> {
        self.lu.solve_adjoint(y).map_err(|_| SolverError::Linalg(LinalgError::NonFinite))
    }
    fn lambda(&self, mu: Complex) -> Complex {
        self.q + Complex::new(1.0, 0.0) / mu
    }
}

fn start_vector(x0: &CVector) -> Result<CVector, SolverError> {
    if !x0.is_finite() {
        return Err(LinalgError::NonFinite.into());
    }
    Ok(x0.canonical_phase().normalized().ok_or(LinalgError::ZeroVector)?)
}

/// Which vector of the reported pair carries unit norm. Residuals are
/// measured in that frame, so they bound the residuals of the final pair.
#[derive(Clone, Copy, PartialEq, Eq)]
enum Frame {
    UnitRight,
    UnitLeft,
}

fn iterate<O: Operator>(
    a: &CMatrix,
    op: &O,
    x0: &CVector,
    y0: &CVector,
    found: &[BiorthoPair],
    cfg: &SolverConfig,
    frame: Frame,
) -> Result<PowerResult, SolverError> {
    cfg.validate()?;
    for v in [x0, y0] {
        if v.len() != a.n() {
            return Err(LinalgError::DimensionMismatch { expected: a.n(), found: v.len() }.into());
        }
    }
    let project = |x: CVector, y: CVector| -> Result<(CVector, CVector), SolverError> {
        if found.is_empty() {
            return Ok((x, y));
        }
        let x = deflate_vector(&x, found)?;
        let y = deflate_adjoint_raw(&deflate_adjoint_raw(&y, found), found);
        Ok((
            x.canonical_phase().normalized().ok_or(SolverError::DeflatedAway)?,
            y.canonical_phase().normalized().ok_or(SolverError::DeflatedAway)?,
        ))
    };
    let (mut x, mut y) = project(start_vector(x0)?, start_vector(y0)?)?;

    let mut trace = ConvergenceTrace::default();
    let mut mark = (f64::INFINITY, 0u64);
    let mut max_turn = 0.0f64;
    let mut last_lambda = None;
    let finish = |status, iterations, lambda: Option<Complex>, x: &CVector, y: &CVector, trace| {
        let pair = lambda.and_then(|l| BiorthoPair::binormalized(l, x, y, cfg.pairing_floor).ok());
        Ok(PowerResult { pair, trace, iterations, status })
    };

    for m in 0..=cfg.max_iter {
        let bx = op.apply(&x);
        let by = op.apply_adjoint(&y);
        let (bx, by) = match (bx, by) {
            (Ok(bx), Ok(by))
                if bx.is_finite()
                    && by.is_finite()
                    && bx.norm() > BREAKDOWN_NORM
                    && by.norm() > BREAKDOWN_NORM =>
            {
                (bx, by)
            }
            _ => return finish(PowerStatus::Breakdown, m, last_lambda, &x, &y, trace),
        };
        let pairing = y.dot(&x);
        if pairing.norm() < cfg.pairing_floor {
            return finish(PowerStatus::Breakdown, m, last_lambda, &x, &y, trace);
        }
        let mu = y.dot(&bx) / pairing;
        let lambda = op.lambda(mu);
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return finish(PowerStatus::Breakdown, m, last_lambda, &x, &y, trace);
        }
        last_lambda = Some(lambda);

        let ax = a.apply(&x);
        let mut rx = ax.clone();
        rx.axpy(-lambda, &x);
        let mut ry = a.apply_adjoint(&y);
        ry.axpy(-lambda.conj(), &y);
        let (r_phi, r_psi) = match frame {
            Frame::UnitRight => (rx.norm(), ry.norm() / pairing.norm()),
            Frame::UnitLeft => (rx.norm() / pairing.norm(), ry.norm()),
        };
        trace.push(TracePoint {
            t_or_iter: m as f64,
            lambda,
            residual_phi: r_phi,
            residual_psi: r_psi,
            rayleigh: Some(x.dot(&ax)),
        });
        if r_phi < cfg.delta_tol && r_psi < cfg.delta_tol {
            return finish(PowerStatus::Converged, m, last_lambda, &x, &y, trace);
        }

        let r = r_phi.max(r_psi);
        if r < TIE_IMPROVEMENT * mark.0 {
            mark = (r, m);
            max_turn = 0.0;
        } else if m - mark.1 >= TIE_WINDOW && max_turn > TIE_DIRECTION_CHANGE {
            return finish(PowerStatus::DominanceTie, m, last_lambda, &x, &y, trace);
        }
        if m == cfg.max_iter {
            break;
        }

        let mut xn = bx.canonical_phase().normalized().ok_or(SolverError::DeflatedAway)?;
        let mut yn = by.canonical_phase().normalized().ok_or(SolverError::DeflatedAway)?;
        if !found.is_empty() && (m + 1) % cfg.reorthogonalize_every == 0 {
            match project(xn, yn) {
                Ok((a, b)) => {
                    xn = a;
                    yn = b;
                }
                Err(_) => return finish(PowerStatus::Breakdown, m, last_lambda, &x, &y, trace),
            }
        }
        max_turn = max_turn.max(1.0 - xn.dot(&x).norm());
        x = xn;
        y = yn;
    }
    finish(PowerStatus::MaxIter, cfg.max_iter, last_lambda, &x, &y, trace)
}

/// Power iteration for the eigenvalue of largest modulus. The left sequence
/// starts from `x0` as well.
pub fn power_iterate(a: &CMatrix, x0: &CVector, cfg: &SolverConfig) -> Result<PowerResult, SolverError> {
    iterate(a, &Plain(a), x0, x0, &[], cfg, Frame::UnitRight)
}

/// [`power_iterate`] with explicit, independent left and right starts.
pub fn power_iterate_pair(
    a: &CMatrix,
    x0: &CVector,
    y0: &CVector,
    cfg: &SolverConfig,
) -> Result<PowerResult, SolverError> {
    iterate(a, &Plain(a), x0, y0, &[], cfg, Frame::UnitRight)
}

/// Power iteration restricted to the complement of the found pairs.
pub fn power_iterate_deflated(
    a: &CMatrix,
    x0: &CVector,
    found: &[BiorthoPair],
    cfg: &SolverConfig,
) -> Result<PowerResult, SolverError> {
    iterate(a, &Plain(a), x0, x0, found, cfg, Frame::UnitRight)
}

/// Power iteration on `A†` from `y0`. The reported pair is still in terms
/// of `A`: `lambda` is the eigenvalue of `A`, `psi` the left eigenvector.
pub fn adjoint_power_iterate(
    a: &CMatrix,
    y0: &CVector,
    cfg: &SolverConfig,
) -> Result<PowerResult, SolverError> {
    let adj = a.adjoint();
    let mut r = iterate(&adj, &Plain(&adj), y0, y0, &[], cfg, Frame::UnitLeft)?;
    r.pair = r
        .pair
        .and_then(|p| BiorthoPair::binormalized(p.lambda.conj(), &p.psi, &p.phi, cfg.pairing_floor).ok());
    Ok(r)
}

/// Power iteration on `(A − qI)⁻¹`, for the eigenvalue nearest `q`.
pub fn shifted_inverse_power(
    a: &CMatrix,
    q: Complex,
    x0: &CVector,
    cfg: &SolverConfig,
) -> Result<PowerResult, SolverError> {
    shifted_inverse_power_deflated(a, q, x0, &[], cfg)
}

pub fn shifted_inverse_power_deflated(
    a: &CMatrix,
    q: Complex,
    x0: &CVector,
    found: &[BiorthoPair],
    cfg: &SolverConfig,
) -> Result<PowerResult, SolverError> {
    let lu = LuFactors::factor(&a.shifted(q)).map_err(|e| match e {
        LinalgError::SingularPivot { index, .. } => SolverError::SingularShift { re: q.re, im: q.im, index },
        other => other.into(),
    })?;
    iterate(a, &ShiftInvert { lu, q }, x0, x0, found, cfg, Frame::UnitRight)
}

/// Undeflated shifted-inverse iteration at a shift just off `p.lambda`,
/// started from `p`. Removes the error a deflated run inherits from the
/// projectors of earlier, inexact pairs.
pub fn polish(a: &CMatrix, p: &BiorthoPair, cfg: &SolverConfig) -> Result<PowerResult, SolverError> {
    let q = p.lambda + Complex::new(1.0, 0.5) * (1e-7 * p.lambda.norm().max(1.0));
    let lu = LuFactors::factor(&a.shifted(q)).map_err(|e| match e {
        LinalgError::SingularPivot { index, .. } => SolverError::SingularShift { re: q.re, im: q.im, index },
        other => other.into(),
    })?;
    iterate(a, &ShiftInvert { lu, q }, &p.phi, &p.psi, &[], cfg, Frame::UnitRight)
}

/// Outcome of [`full_spectrum`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumResult {
    /// Sorted by descending modulus.
    pub pairs: Vec<BiorthoPair>,
    /// Shifted runs attempted (the initial power run is not counted).
    pub attempts: usize,
    pub shifts: Vec<Complex>,
    pub diagnostics: Vec<String>,
}

impl SpectrumResult {
    pub fn complete(&self, n: usize) -> bool {
        self.pairs.len() == n
    }

    pub fn eigenvalues(&self) -> Vec<Complex> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }
}

pub fn is_duplicate(lambda: Complex, found: &[BiorthoPair]) -> bool {
    found.iter().any(|p| (p.lambda - lambda).norm() <= DEDUP_TOL * p.lambda.norm().max(1.0))
}

/// Random point of the Gershgorin disk union. Radii are floored at
/// `1e-3 · max(1, max|A_ij|)` so that diagonal matrices still get shifts
/// off the spectrum.
pub fn gershgorin_shift<R: Rng>(a: &CMatrix, rng: &mut R) -> Complex {
    let floor = 1e-3 * a.max_abs().max(1.0);
    let disks: Vec<(Complex, f64)> =
        a.gershgorin_disks().into_iter().map(|(c, r)| (c, r.max(floor))).collect();
    let (mut lo_re, mut hi_re, mut lo_im, mut hi_im) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for &(c, r) in &disks {
        lo_re = lo_re.min(c.re - r);
        hi_re = hi_re.max(c.re + r);
        lo_im = lo_im.min(c.im - r);
        hi_im = hi_im.max(c.im + r);
    }
    loop {
        let z = Complex::new(rng.gen_range(lo_re..=hi_re), rng.gen_range(lo_im..=hi_im));
        if disks.iter().any(|&(c, r)| (z - c).norm() <= r) {
            return z;
        }
    }
}

/// `count` shifts from [`gershgorin_shift`], reproducible per seed.
pub fn gershgorin_shifts(a: &CMatrix, count: usize, seed: u64) -> Vec<Complex> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| gershgorin_shift(a, &mut rng)).collect()
}

/// All eigenpairs by a power run followed by deflated shifted-inverse runs
/// at random Gershgorin shifts, at most `10 n` of them.
pub fn full_spectrum(a: &CMatrix, cfg: &SolverConfig) -> Result<SpectrumResult, SolverError> {
    cfg.validate()?;
    let n = a.n();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut found: Vec<BiorthoPair> = Vec::new();
    let mut diagnostics = Vec::new();
    let mut shifts = Vec::new();

    let x0 = random_vector_rng(n, &mut rng);
    match power_iterate(a, &x0, cfg) {
        Ok(r) if r.converged() => found.extend(r.pair),
        Ok(r) => diagnostics.push(format!("power iteration: {:?}", r.status)),
        Err(e) => diagnostics.push(format!("power iteration: {e}")),
    }

    let mut attempts = 0;
    while found.len() < n && attempts < 10 * n {
        attempts += 1;
        let q = gershgorin_shift(a, &mut rng);
        shifts.push(q);
        if found.iter().any(|p| (p.lambda - q).norm() < DEDUP_TOL) {
            diagnostics.push(format!("shift {q} rejected: too close to a found eigenvalue"));
            continue;
        }
        let x0 = match deflate_vector(&random_vector_rng(n, &mut rng), &found) {
            Ok(v) => v,
            Err(e) => {
                diagnostics.push(format!("shift {q}: {e}"));
                continue;
            }
        };
        let coarse = SolverConfig { delta_tol: (cfg.delta_tol * 1e3).max(1e-6), ..cfg.clone() };
        let run = shifted_inverse_power_deflated(a, q, &x0, &found, &coarse).and_then(|r| match r.pair {
            Some(p) if r.converged() => polish(a, &p, cfg),
            _ => Ok(r),
        });
        match run {
            Ok(r) if r.converged() => {
                let p = r.pair.expect("converged runs carry a pair");
                if is_duplicate(p.lambda, &found) {
                    diagnostics.push(format!("shift {q}: duplicate {}", p.lambda));
                } else {
                    found.push(p);
                }
            }
            Ok(r) => diagnostics.push(format!("shift {q}: {:?}", r.status)),
            Err(e) => diagnostics.push(format!("shift {q}: {e}")),
        }
    }
    found.sort_by(|p, q| q.lambda.norm().total_cmp(&p.lambda.norm()));
    Ok(SpectrumResult { pairs: found, attempts, shifts, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgen::{random_complex, random_vector};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    #[test]
    fn diagonal_dominant() {
        let a = CMatrix::from_real_diag(&[5.0, 1.0]);
        let r = power_iterate(&a, &CVector::from_real(&[1.0, 1.0]), &SolverConfig::default()).unwrap();
        assert!(r.converged());
        let p = r.pair.unwrap();
        assert!((p.lambda - c(5.0, 0.0)).norm() < 1e-10);
        assert!((&p.phi - &CVector::basis(2, 0)).norm() < 1e-8);
    }

    #[test]
    fn identity_converges_immediately() {
        let r = power_iterate(
            &CMatrix::identity(3),
            &CVector::from_real(&[1.0, 2.0, 3.0]),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!(r.converged());
        assert!(r.iterations <= 2);
        assert!((r.lambda().unwrap() - c(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn schwartz_quotient_hand_value() {
        // one application of diag(2, 1) to (1, 1) on both sides: (8 + 1) / (4 + 1)
        let a = CMatrix::from_real_diag(&[2.0, 1.0]);
        let x = CVector::from_real(&[1.0, 1.0]);
        let s = schwartz_sequence(&a, &x, &x, 1, 1e-12).unwrap();
        assert!((s.gammas[1] - c(1.8, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn schwartz_quotient_exact_on_eigenvectors() {
        let a = CMatrix::from_rows(vec![vec![c(2.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(-1.0, 0.0)]])
            .unwrap();
        let g = schwartz_quotient(&a, &CVector::basis(2, 0), &CVector::from_real(&[1.0, 1.0 / 3.0]), 1e-12)
            .unwrap();
        assert!((g - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn adjoint_iteration_matches_for_hermitian() {
        let a = CMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]]).unwrap();
        let x0 = CVector::from_real(&[1.0, 0.2]);
        let cfg = SolverConfig::default();
        let r = power_iterate(&a, &x0, &cfg).unwrap().pair.unwrap();
        let l = adjoint_power_iterate(&a, &x0, &cfg).unwrap().pair.unwrap();
        assert!((&r.phi - &l.phi).norm() < 1e-8);
        assert!((r.lambda - l.lambda).norm() < 1e-10);
    }

    #[test]
    fn adjoint_iteration_reports_lambda_of_a() {
        let a = random_complex(4, 12);
        let cfg = SolverConfig::default();
        let x0 = random_vector(4, 1);
        let r = power_iterate(&a, &x0, &cfg).unwrap();
        let l = adjoint_power_iterate(&a, &x0, &cfg).unwrap();
        assert!(r.converged() && l.converged());
        assert!((r.lambda().unwrap() - l.lambda().unwrap()).norm() < 1e-8);
        assert!(l.pair.unwrap().residual_left(&a) < 1e-8);
    }

    #[test]
    fn deflation_examples() {
        let a = CMatrix::from_real_diag(&[3.0, 2.0]);
        let x = CVector::from_real(&[1.0, 1.0]);
        assert_eq!(deflate_vector(&x, &[]).unwrap(), x);
        let p = power_iterate(&a, &x, &SolverConfig::default()).unwrap().pair.unwrap();
        let d = deflate_vector(&x, std::slice::from_ref(&p)).unwrap();
        assert!(p.psi.dot(&d).norm() < 1e-12);
        assert!(matches!(deflate_vector(&p.phi, std::slice::from_ref(&p)), Err(SolverError::DeflatedAway)));
    }

    #[test]
    fn deflated_power_finds_second() {
        let a = CMatrix::from_real_diag(&[3.0, -2.0, 1.0]);
        let cfg = SolverConfig::default();
        let x0 = CVector::from_real(&[1.0, 1.0, 1.0]);
        let p1 = power_iterate(&a, &x0, &cfg).unwrap().pair.unwrap();
        let r = power_iterate_deflated(&a, &x0, &[p1], &cfg).unwrap();
        assert!((r.lambda().unwrap() - c(-2.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn shifted_inverse_nearest() {
        let a = CMatrix::from_real_diag(&[1.0, 5.0]);
        let r = shifted_inverse_power(
            &a,
            c(4.9, 0.0),
            &CVector::from_real(&[1.0, 1.0]),
            &SolverConfig::default(),
        )
        .unwrap();
        assert!((r.lambda().unwrap() - c(5.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn shift_on_eigenvalue_is_reported() {
        let a = CMatrix::from_real_diag(&[1.0, 5.0]);
        let e = shifted_inverse_power(
            &a,
            c(5.0, 0.0),
            &CVector::from_real(&[1.0, 1.0]),
            &SolverConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(e, SolverError::SingularShift { .. }));
    }

    #[test]
    fn shift_invariance() {
        let a = random_complex(5, 8);
        let cfg = SolverConfig::default();
        let x0 = random_vector(5, 2);
        let r = power_iterate(&a, &x0, &cfg).unwrap().lambda().unwrap();
        let l1 = shifted_inverse_power(&a, r + c(0.05, 0.0), &x0, &cfg).unwrap().lambda().unwrap();
        let l2 = shifted_inverse_power(&a, r + c(0.0, -0.07), &x0, &cfg).unwrap().lambda().unwrap();
        assert!((l1 - l2).norm() < 1e-8);
    }

    #[test]
    fn modulus_tie_detected() {
        let a = CMatrix::from_real_diag(&[1.0, -1.0, 0.3]);
        let r = power_iterate(&a, &CVector::from_real(&[0.7, 0.5, 0.2]), &SolverConfig::default()).unwrap();
        assert_eq!(r.status, PowerStatus::DominanceTie);
    }

    #[test]
    fn nilpotent_breaks_down() {
        let a = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        let r = power_iterate(&a, &CVector::from_real(&[0.0, 1.0]), &SolverConfig::default()).unwrap();
        assert_eq!(r.status, PowerStatus::Breakdown);
    }

    #[test]
    fn full_spectrum_diagonal() {
        let a = CMatrix::from_real_diag(&[3.0, 2.0, 1.0]);
        let s = full_spectrum(&a, &SolverConfig::default()).unwrap();
        assert!(s.complete(3), "{:?}", s.diagnostics);
        for (k, p) in s.pairs.iter().enumerate() {
            assert!((p.lambda - c(3.0 - k as f64, 0.0)).norm() < 1e-8);
            assert!((&p.phi - &CVector::basis(3, k)).norm() < 1e-6);
        }
    }

    #[test]
    fn full_spectrum_is_biorthogonal() {
        let a = random_complex(6, 30);
        let s = full_spectrum(&a, &SolverConfig::with_seed(4)).unwrap();
        assert!(s.complete(6), "{:?}", s.diagnostics);
        for (i, p) in s.pairs.iter().enumerate() {
            for (j, q) in s.pairs.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((p.psi.dot(&q.phi) - c(expect, 0.0)).norm() < 1e-6);
            }
        }
    }
}
