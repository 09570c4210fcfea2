//! Dense complex non-Hermitian eigensolvers.
//!
//! Two solver families share the primitives in [`linalg`]:
//!
//! * [`flow`]: a coupled dynamical system for right and left vectors whose
//!   equilibria are eigenpairs; it converges to the eigenvalue with the
//!   largest real part (or smallest, on `-A`).
//! * [`power`]: power iteration with biorthogonal quotients, deflation and
//!   shifted inverse iteration; it converges to the eigenvalue of largest
//!   modulus (or nearest a shift).
//!
//! [`oracle`] is an independent Hessenberg/QR eigensolver plus closed-form
//! flow trajectories used to check both. [`matgen`] builds the test
//! matrices.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod expm;
pub mod flow;
pub mod io;
pub mod linalg;
pub mod lu;
pub mod matgen;
pub mod ode;
pub mod oracle;
pub mod power;
pub mod types;

pub use error::{GenError, IntegratorError, LinalgError, SolverError};
pub use expm::expm;
pub use flow::{solve_flow, solve_flow_deflated, solve_flow_smallest, FlowResult, FlowStatus};
pub use linalg::{
    adjoint, bi_rayleigh, inner, matvec, norm2, rayleigh, residual, v_norm, CMatrix, CVector, Complex,
};
pub use lu::{inverse, lu_solve, LuFactors};
pub use ode::{integrate, IntegratorConfig, Termination, Trajectory};
pub use oracle::{eig_2x2, qr_spectrum, SpectralData};
pub use power::{
    adjoint_power_iterate, full_spectrum, power_iterate, power_iterate_deflated, shifted_inverse_power,
    PowerResult, PowerStatus,
};
pub use types::{BiorthoPair, ConvergenceTrace, Mode, SolverConfig, TracePoint};
