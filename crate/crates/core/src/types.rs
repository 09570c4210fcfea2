//! Result and configuration types shared by both solver families.

use serde::{Deserialize, Serialize};

use crate::error::{LinalgError, SolverError};
use crate::linalg::{residual, CMatrix, CVector, Complex, DEFAULT_PAIRING_FLOOR};
use crate::ode::IntegratorConfig;

/// Eigenvalue with right (`phi`) and left (`psi`) eigenvectors, scaled so
/// that `‖phi‖ = 1` and `⟨psi, phi⟩ = 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiorthoPair {
    pub lambda: Complex,
    pub phi: CVector,
    pub psi: CVector,
}

impl BiorthoPair {
    /// Bi-normalizes raw right/left vectors: `phi` to unit norm with its
    /// largest entry real positive, then `psi` so that `⟨psi, phi⟩ = 1`.
    pub fn binormalized(
        lambda: Complex,
        phi: &CVector,
        psi: &CVector,
        floor: f64,
    ) -> Result<Self, LinalgError> {
        let phi = phi.canonical_phase().normalized().ok_or(LinalgError::ZeroVector)?;
        let p = psi.dot(&phi);
        if p.norm() < floor {
            return Err(LinalgError::DegeneratePairing { magnitude: p.norm(), floor });
        }
        let psi = psi.scale(Complex::new(1.0, 0.0) / p.conj());
        Ok(Self { lambda, phi, psi })
    }

    /// `‖A phi − λ phi‖`
    pub fn residual_right(&self, a: &CMatrix) -> f64 {
        residual(a, self.lambda, &self.phi).unwrap_or(f64::INFINITY)
    }

    /// `‖A† psi − conj(λ) psi‖`
    pub fn residual_left(&self, a: &CMatrix) -> f64 {
        let mut r = a.apply_adjoint(&self.psi);
        r.axpy(-self.lambda.conj(), &self.psi);
        r.norm()
    }

    pub fn pairing(&self) -> Complex {
        self.psi.dot(&self.phi)
    }
}

/// One record of a convergence trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Flow time or iteration number.
    pub t_or_iter: f64,
    pub lambda: Complex,
    pub residual_phi: f64,
    pub residual_psi: f64,
    /// Plain Rayleigh quotient of the right iterate, kept for diagnostics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rayleigh: Option<Complex>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub samples: Vec<TracePoint>,
}

impl ConvergenceTrace {
    pub fn push(&mut self, p: TracePoint) {
        debug_assert!(self.samples.last().is_none_or(|q| p.t_or_iter > q.t_or_iter));
        self.samples.push(p);
    }

    pub fn last(&self) -> Option<&TracePoint> {
        self.samples.last()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Which end of the spectrum the flow targets.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Largest,
    Smallest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub delta_tol: f64,
    pub max_iter: u64,
    pub seed: u64,
    pub pairing_floor: f64,
    /// Re-apply deflation projectors every this many iterations/steps.
    pub reorthogonalize_every: u64,
    pub mode: Mode,
    /// Flow only: draw `x_psi(0)` independently instead of copying `x_phi(0)`.
    pub independent_initials: bool,
    /// Flow only: relative pairing drift reported as a violation.
    pub drift_budget: f64,
    /// Flow only. Tolerances sit well below `delta_tol`: local errors
    /// leave a residual floor of about `tol ‖A‖ / gap` near the equilibrium.
    pub integrator: IntegratorConfig,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            delta_tol: 1e-8,
            max_iter: 100_000,
            seed: 0,
            pairing_floor: DEFAULT_PAIRING_FLOOR,
            reorthogonalize_every: 1,
            mode: Mode::Largest,
            independent_initials: false,
            drift_budget: 1e-6,
            integrator: IntegratorConfig { rel_tol: 1e-12, abs_tol: 1e-14, ..IntegratorConfig::default() },
        }
    }
}

impl SolverConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.delta_tol > 0.0) {
            return Err(SolverError::InvalidConfig("delta_tol must be positive".into()));
        }
        if self.max_iter == 0 || self.reorthogonalize_every == 0 {
            return Err(SolverError::InvalidConfig(
                "max_iter and reorthogonalize_every must be positive".into(),
            ));
        }
        if !(self.pairing_floor > 0.0) || !(self.drift_budget > 0.0) {
            return Err(SolverError::InvalidConfig("pairing_floor and drift_budget must be positive".into()));
        }
        self.integrator.validate()?;
        Ok(())
    }
}
