//! Variable-step, variable-order Adams–Bashforth–Moulton integrator.
//!
//! Each step is P(EC)E: an order-`k` Adams–Bashforth predictor, one evaluation
//! at the predicted point, then Adams–Moulton correctors of orders `k` and
//! `k + 1`. Their difference estimates the local error and the higher-order
//! value is kept (local extrapolation). Order runs from 1 to 12 and is chosen
//! each step from `k - 1, k, k + 1`, so the method starts itself at order 1
//! with no separate startup scheme.
//!
//! The quadrature weights come from integrating the Lagrange interpolant of
//! the stored derivative values over the step. With the grid scaled so the
//! step is `[0, 1]`, every interpolant has degree at most 13, and an 8-point
//! Gauss–Legendre rule integrates it exactly.
//!
//! The error tolerance is scaled by the step length clamped to `[1e-3, 1]`:
//! per unit step for moderate steps, per step for long ones.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::IntegratorError;
use crate::linalg::{CVector, Complex};

/// Highest supported order.
pub const MAX_ORDER: usize = 12;

const GL_NODES: [f64; 4] =
    [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_WEIGHTS: [f64; 4] =
    [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

const SAFETY: f64 = 0.9;
const MAX_GROWTH: f64 = 2.0;
const MIN_SHRINK: f64 = 0.1;
const UNIT_STEP_FLOOR: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    /// Hard endpoint; the last step is clipped to land on it.
    pub max_time: f64,
    pub max_steps: u64,
    pub max_order: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            initial_step: 1e-3,
            max_step: f64::INFINITY,
            max_time: 1e4,
            max_steps: 10_000_000,
            max_order: MAX_ORDER,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), IntegratorError> {
        let positive = [
            ("abs_tol", self.abs_tol),
            ("rel_tol", self.rel_tol),
            ("initial_step", self.initial_step),
            ("max_step", self.max_step),
            ("max_time", self.max_time),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(IntegratorError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !self.max_time.is_finite() {
            return Err(IntegratorError::InvalidConfig("max_time must be finite".into()));
        }
        if self.max_steps == 0 {
            return Err(IntegratorError::InvalidConfig("max_steps must be positive".into()));
        }
        if self.abs_tol > self.rel_tol * 1e3 {
            return Err(IntegratorError::InvalidConfig(format!(
                "abs_tol {} exceeds 1e3 * rel_tol",
                self.abs_tol
            )));
        }
        if !(1..=MAX_ORDER).contains(&self.max_order) {
            return Err(IntegratorError::InvalidConfig(format!("max_order must lie in 1..={MAX_ORDER}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    StopPredicate,
    MaxTime,
    MaxSteps,
    StepUnderflow,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub y: CVector,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub terminated_by: Termination,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectory holds the initial sample")
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: u64,
    pub rejected: u64,
    pub rhs_evals: u64,
}

/// Observer verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Final state of [`integrate_with`].
#[derive(Clone, Debug)]
pub struct Outcome {
    pub t: f64,
    pub y: CVector,
    pub terminated_by: Termination,
    pub stats: StepStats,
}

/// Integrates `y' = rhs(t, y)` from `t = 0` and records every accepted step.
/// `stop` is checked at the initial point and after each accepted step.
pub fn integrate<F, S>(
    rhs: F,
    y0: &CVector,
    cfg: &IntegratorConfig,
    mut stop: S,
) -> Result<Trajectory, IntegratorError>
where
    F: FnMut(f64, &CVector) -> CVector,
    S: FnMut(f64, &CVector) -> bool,
{
    let mut samples = Vec::new();
    let out = integrate_with(rhs, y0, cfg, |t, y| {
        samples.push(Sample { t, y: y.clone() });
        if stop(t, y) {
            Control::Stop
        } else {
            Control::Continue
        }
    })?;
    Ok(Trajectory { samples, terminated_by: out.terminated_by, stats: out.stats })
}

/// Integrates without storing the path. `observer` sees the initial point
/// and each accepted step before the derivative there is evaluated, and may
/// modify the state in place (e.g. to re-project onto a constraint).
pub fn integrate_with<F, O>(
    mut rhs: F,
    y0: &CVector,
    cfg: &IntegratorConfig,
    mut observer: O,
) -> Result<Outcome, IntegratorError>
where
    F: FnMut(f64, &CVector) -> CVector,
    O: FnMut(f64, &mut CVector) -> Control,
{
    cfg.validate()?;
    if !y0.is_finite() {
        return Err(IntegratorError::NonFiniteInitial);
    }
    let dim = y0.len();
    let mut stats = StepStats::default();
    let mut eval = |t: f64, y: &CVector, stats: &mut StepStats| {
        stats.rhs_evals += 1;
        let f = rhs(t, y);
        if f.len() != dim {
            return Err(IntegratorError::RhsDimension { expected: dim, found: f.len() });
        }
        if !f.is_finite() {
            return Err(IntegratorError::NonFiniteRhs { t });
        }
        Ok(f)
    };

    let mut t = 0.0f64;
    let mut y = y0.clone();
    let finish = |t, y, why, stats| Ok(Outcome { t, y, terminated_by: why, stats });
    if observer(t, &mut y) == Control::Stop {
        return finish(t, y, Termination::StopPredicate, stats);
    }

    // most recent first
    let mut hist: VecDeque<(f64, CVector)> = VecDeque::with_capacity(MAX_ORDER + 3);
    hist.push_front((t, eval(t, &y, &mut stats)?));

    let mut k = 1usize;
    let mut h = cfg.initial_step.min(cfg.max_step);
    let mut failures = 0u32;
    let end_slack = 1e-13 * cfg.max_time.max(1.0);

    loop {
        let remaining = cfg.max_time - t;
        if remaining <= end_slack {
            return finish(t, y, Termination::MaxTime, stats);
        }
        if stats.accepted >= cfg.max_steps {
            return finish(t, y, Termination::MaxSteps, stats);
        }
        let last = h >= remaining;
        let h_step = if last { remaining } else { h };
        if h_step < 1e-14 * t.abs().max(1.0) {
            return finish(t, y, Termination::StepUnderflow, stats);
        }

        let k_eff = k.min(hist.len());
        let taus: Vec<f64> = hist.iter().map(|(ti, _)| (ti - t) / h_step).collect();

        // predictor
        let wp = adams_weights(&taus[..k_eff]);
        let mut pred = y.clone();
        for (w, (_, f)) in wp.iter().zip(&hist) {
            pred.axpy(Complex::new(h_step * w, 0.0), f);
        }
        let t_new = if last { cfg.max_time } else { t + h_step };
        let fp = eval(t_new, &pred, &mut stats)?;

        // correctors C_m use the new point plus the m - 1 most recent old points
        let corrector = |m: usize| -> CVector {
            let mut nodes = Vec::with_capacity(m);
            nodes.push(1.0);
            nodes.extend_from_slice(&taus[..m - 1]);
            let w = adams_weights(&nodes);
            let mut c = y.clone();
            c.axpy(Complex::new(h_step * w[0], 0.0), &fp);
            for (wi, (_, f)) in w[1..].iter().zip(&hist) {
                c.axpy(Complex::new(h_step * wi, 0.0), f);
            }
            c
        };
        let c_k = corrector(k_eff);
        let c_k1 = corrector(k_eff + 1);
        // error per unit step for moderate steps; per step for long ones and
        // for very short ones, where tol * h would sink below roundoff
        let unit = h_step.clamp(UNIT_STEP_FLOOR, 1.0);
        let scale = (cfg.abs_tol + cfg.rel_tol * y.norm().max(c_k1.norm())) * unit;
        let per_unit = h_step > UNIT_STEP_FLOOR && h_step < 1.0;
        let err = (&c_k1 - &c_k).norm() / scale;
        let err_lower = (k_eff > 1).then(|| (&c_k - &corrector(k_eff - 1)).norm() / scale);

        if !err.is_finite() {
            return Err(IntegratorError::NonFiniteRhs { t: t_new });
        }

        if err <= 1.0 {
            let err_upper = (k_eff < cfg.max_order && hist.len() > k_eff)
                .then(|| (&corrector(k_eff + 2) - &c_k1).norm() / scale);
            stats.accepted += 1;
            failures = 0;
            t = t_new;
            y = c_k1;
            if observer(t, &mut y) == Control::Stop {
                return finish(t, y, Termination::StopPredicate, stats);
            }
            let f_new = eval(t, &y, &mut stats)?;
            hist.push_front((t, f_new));
            hist.truncate(MAX_ORDER + 2);

            let mut best = (k_eff, factor(err, k_eff, per_unit));
            if let Some(e) = err_lower {
                let f = factor(e, k_eff - 1, per_unit);
                if f >= best.1 {
                    best = (k_eff - 1, f);
                }
            }
            if let Some(e) = err_upper {
                let f = factor(e, k_eff + 1, per_unit);
                if f > best.1 {
                    best = (k_eff + 1, f);
                }
            }
            k = best.0;
            h = (h_step * best.1).min(cfg.max_step);
        } else {
            stats.rejected += 1;
            failures += 1;
            let mut best = (k_eff, factor(err, k_eff, per_unit));
            if let Some(e) = err_lower {
                let f = factor(e, k_eff - 1, per_unit);
                if f > best.1 {
                    best = (k_eff - 1, f);
                }
            }
            k = if failures >= 3 { 1 } else { best.0 };
            h = h_step * best.1.min(0.5);
        }
    }
}

/// Step-size multiplier for a scaled error of an order-`order` method.
/// Per unit step the estimate scales as `h^order`, per step as `h^(order+1)`.
fn factor(err: f64, order: usize, per_unit: bool) -> f64 {
    if err == 0.0 {
        return MAX_GROWTH;
    }
    let p = if per_unit { order as f64 } else { order as f64 + 1.0 };
    (SAFETY * err.powf(-1.0 / p)).clamp(MIN_SHRINK, MAX_GROWTH)
}

/// `w_i = ∫_0^1 ℓ_i(u) du` for the Lagrange basis on `nodes`.
fn adams_weights(nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    let mut w = vec![0.0; m];
    for (x, gw) in GL_NODES.iter().zip(GL_WEIGHTS) {
        for u in [0.5 * (1.0 - x), 0.5 * (1.0 + x)] {
            for i in 0..m {
                let mut l = 1.0;
                for j in 0..m {
                    if j != i {
                        l *= (u - nodes[j]) / (nodes[i] - nodes[j]);
                    }
                }
                w[i] += 0.5 * gw * l;
            }
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn scalar(z: Complex) -> CVector {
        CVector::new(vec![z])
    }

    fn fixed_time(t: f64) -> IntegratorConfig {
        IntegratorConfig { max_time: t, ..IntegratorConfig::default() }
    }

    #[test]
    fn weights_reproduce_known_schemes() {
        // forward Euler, two-step AB, trapezoid
        assert!((adams_weights(&[0.0])[0] - 1.0).abs() < 1e-15);
        let ab2 = adams_weights(&[0.0, -1.0]);
        assert!((ab2[0] - 1.5).abs() < 1e-14 && (ab2[1] + 0.5).abs() < 1e-14);
        let am2 = adams_weights(&[1.0, 0.0]);
        assert!((am2[0] - 0.5).abs() < 1e-14 && (am2[1] - 0.5).abs() < 1e-14);
        // AM4: 9, 19, -5, 1 over 24
        let am4 = adams_weights(&[1.0, 0.0, -1.0, -2.0]);
        for (w, e) in am4.iter().zip([9.0, 19.0, -5.0, 1.0]) {
            assert!((w - e / 24.0).abs() < 1e-14);
        }
    }

    #[test]
    fn exponential_decay() {
        let tr =
            integrate(|_, y| -y, &scalar(Complex::new(1.0, 0.0)), &fixed_time(1.0), |_, _| false).unwrap();
        assert_eq!(tr.terminated_by, Termination::MaxTime);
        let end = tr.last();
        assert_eq!(end.t, 1.0);
        assert!((end.y[0].re - (-1.0f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn rotation_keeps_modulus() {
        let i = Complex::new(0.0, 1.0);
        let tr = integrate(|_, y| y.scale(i), &scalar(Complex::new(1.0, 0.0)), &fixed_time(PI), |_, _| false)
            .unwrap();
        assert!((tr.last().y[0] - Complex::new(-1.0, 0.0)).norm() < 1e-8);
        for s in &tr.samples {
            assert!((s.y[0].norm() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn samples_strictly_increase_and_stay_finite() {
        let tr = integrate(
            |t, y| CVector::new(vec![y[1], Complex::new(-(1.0 + t.sin()), 0.0) * y[0]]),
            &CVector::from_real(&[1.0, 0.0]),
            &fixed_time(20.0),
            |_, _| false,
        )
        .unwrap();
        for w in tr.samples.windows(2) {
            assert!(w[1].t > w[0].t);
        }
        assert!(tr.samples.iter().all(|s| s.y.is_finite()));
    }

    #[test]
    fn stop_predicate_ends_run() {
        let tr = integrate(
            |_, y| y.clone(),
            &scalar(Complex::new(1.0, 0.0)),
            &fixed_time(100.0),
            |_, y| y[0].re > 10.0,
        )
        .unwrap();
        assert_eq!(tr.terminated_by, Termination::StopPredicate);
        let n = tr.samples.len();
        assert!(tr.samples[n - 1].y[0].re > 10.0);
        assert!(tr.samples[n - 2].y[0].re <= 10.0);
    }

    #[test]
    fn caps_are_reported() {
        let cfg = IntegratorConfig { max_steps: 5, ..fixed_time(1e3) };
        let tr = integrate(|_, y| -y, &scalar(Complex::new(1.0, 0.0)), &cfg, |_, _| false).unwrap();
        assert_eq!(tr.terminated_by, Termination::MaxSteps);
        assert_eq!(tr.samples.len(), 6);
    }

    #[test]
    fn blowup_underflows_or_fails() {
        // y' = y^2 blows up at t = 1
        let res = integrate(
            |_, y| CVector::new(vec![y[0] * y[0]]),
            &scalar(Complex::new(1.0, 0.0)),
            &fixed_time(2.0),
            |_, _| false,
        );
        match res {
            Ok(tr) => {
                assert_eq!(tr.terminated_by, Termination::StepUnderflow);
                assert!(tr.last().t < 1.0 + 1e-6);
            }
            Err(e) => assert!(matches!(e, IntegratorError::NonFiniteRhs { .. })),
        }
    }

    #[test]
    fn nan_rhs_is_an_error() {
        let res = integrate(
            |t, y| if t > 0.5 { CVector::new(vec![Complex::new(f64::NAN, 0.0)]) } else { y.clone() },
            &scalar(Complex::new(1.0, 0.0)),
            &fixed_time(1.0),
            |_, _| false,
        );
        assert!(matches!(res, Err(IntegratorError::NonFiniteRhs { .. })));
    }

    #[test]
    fn rhs_never_evaluated_past_end() {
        let mut t_max = 0.0f64;
        integrate(
            |t, y| {
                t_max = t_max.max(t);
                -y
            },
            &scalar(Complex::new(1.0, 0.0)),
            &fixed_time(3.0),
            |_, _| false,
        )
        .unwrap();
        assert!(t_max <= 3.0);
    }

    #[test]
    fn deterministic() {
        let run = || {
            integrate(
                |_, y| CVector::new(vec![y[1], -y[0]]),
                &CVector::from_real(&[0.3, 0.7]),
                &fixed_time(10.0),
                |_, _| false,
            )
            .unwrap()
            .samples
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn order_climbs_to_take_large_steps() {
        let tr =
            integrate(|_, y| -y, &scalar(Complex::new(1.0, 0.0)), &fixed_time(50.0), |_, _| false).unwrap();
        // a fixed low order would need thousands of steps at these tolerances
        assert!(tr.stats.accepted < 600, "accepted {}", tr.stats.accepted);
    }

    #[test]
    fn halving_tolerances_halves_error() {
        let i = Complex::new(0.0, 1.0);
        let endpoint_error = |f: f64| {
            let cfg =
                IntegratorConfig { abs_tol: 1e-10 * f, rel_tol: 1e-8 * f, max_order: 6, ..fixed_time(PI) };
            let tr =
                integrate(|_, y| y.scale(i), &scalar(Complex::new(1.0, 0.0)), &cfg, |_, _| false).unwrap();
            (tr.last().y[0] + Complex::new(1.0, 0.0)).norm()
        };
        let errs: Vec<f64> = (0..6).map(|k| endpoint_error(0.5f64.powi(k))).collect();
        for w in errs.windows(2) {
            assert!(w[1] <= 0.5 * w[0], "{errs:?}");
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = IntegratorConfig { abs_tol: 1.0, rel_tol: 1e-8, ..IntegratorConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
