//! Numerical toolkit for intermittent-sensing boundary control of the
//! Kuramoto-Sivashinsky equation
//!
//! ```text
//! u_t = -u u_x - lambda1 u_xx - u_xxxx,   x in [0, L],
//! ```
//!
//! viewed as two clamped subdomains `[0, Y]` and `[Y, L]` coupled through the
//! interface value, with Dirichlet actuation at `x = 0`, `x = Y`, `x = L` and
//! zero slopes at all three points. Sensing alternates between the two
//! subdomains on a fixed dwell-time schedule.
//!
//! The crate provides, as independently testable pieces:
//!
//! - [`spectrum`]: the clamped fourth-order eigenvalue problem
//!   `z_xxxx + lambda z_xx = delta z` (smallest `delta`), solved by the
//!   characteristic-determinant method with a finite-difference oracle;
//! - [`coeffs`]: the cubic bridge polynomial, the boundary coefficient
//!   integrals `C_z1..C_z3` in closed form, and the `(delta1, delta2)` split;
//! - [`pde`]: a semi-implicit method-of-lines solver for the two-domain
//!   system plus the boundary traces and energy/interface identities;
//! - [`control`]: the sensing schedule and the three feedback laws
//!   (`kappa1`, `kappa3` acting at the outer ends, latched `kappa2` acting at
//!   the interface);
//! - [`switched`]: the finite-dimensional switched comparison systems and
//!   their exponential-decay / recursion certificates;
//! - [`gronwall`]: Gronwall-Bellman machinery and the closed `V1` envelope
//!   used while the `[0, Y]` measurements are unavailable;
//! - [`runner`]: configuration-driven closed-loop experiments, sweeps, and
//!   the verification suite behind the CLI.

pub mod coeffs;
pub mod config;
pub mod control;
pub mod gronwall;
pub mod linalg;
pub mod pde;
pub mod quad;
pub mod report;
pub mod runner;
pub mod spectrum;
pub mod switched;

pub use coeffs::{bridge_poly, czi_table, delta_split, BoundaryCoeffTable, BridgePoly, DeltaSplit};
pub use control::{
    controller_step, kappa1, kappa2, kappa3, ControllerMode, ControllerParams, Phase, PhaseSchedule,
};
pub use gronwall::{gronwall_bound, windowed_v1_bound, v1_envelope_bound, EnvelopeParams, GronwallData};
pub use pde::{ControlInputs, DualDomainState, Grid, KsSolver};
pub use spectrum::{fd_eigen_oracle, solve_delta_o, EigenProblem, EigenResult, Regime};
pub use switched::{
    check_conditions, linearization_offset, simulate_sigma3, simulate_sigma4, decay_certificate, CertificateReport,
};

