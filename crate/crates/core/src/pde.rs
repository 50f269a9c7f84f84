//! Method-of-lines solver for the two-domain system
//!
//! ```text
//! w_t = -w w_x - lambda1 w_xx - w_xxxx   on [0, Y]
//! v_t = -v v_x - lambda1 v_xx - v_xxxx   on [Y, L]
//! ```
//!
//! with Dirichlet values `w(0) = u1`, `w(Y) = v(Y) = u2`, `v(L) = u3` and
//! zero slopes at all three actuation points. Given the inputs, the
//! interface conditions decouple the two subdomains into independent clamped
//! problems sharing the value `u2`.
//!
//! Space: second-order central stencils; the zero-slope conditions enter
//! through ghost-node folds (`w_{-1} = w_1`), the Dirichlet values through
//! the right-hand side. Time: first-order IMEX - backward Euler on the
//! stiff linear part (banded solve), forward Euler on the advection term in
//! the skew-symmetric-friendly average of `u u_x` and `(u^2)_x / 2`. Inputs
//! are held constant over each step.

use crate::coeffs::{deriv1, deriv2};
use crate::linalg::{Banded, BandedLu};
use crate::quad::{simpson_map, simpson_samples};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PdeError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("step rejected at t = {t}: state exceeded the blow-up threshold (max |value| = {max_abs:.3e})")]
    StepRejected { t: f64, max_abs: f64 },
    #[error("state length mismatch: expected ({expected_w}, {expected_v}), got ({got_w}, {got_v})")]
    ShapeMismatch { expected_w: usize, expected_v: usize, got_w: usize, got_v: usize },
}

/// Any value beyond this aborts the step: the uncontrolled system genuinely
/// diverges for `lambda1 > 4 pi^2`.
pub const BLOWUP_THRESHOLD: f64 = 1e12;

/// Two uniform subgrids sharing the interface node at `x = Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub y: f64,
    pub l: f64,
    /// nodes on `[0, Y]`, boundaries included
    pub n_w: usize,
    /// nodes on `[Y, L]`, boundaries included
    pub n_v: usize,
}

impl Grid {
    pub fn new(y: f64, l: f64, n_w: usize, n_v: usize) -> Result<Self, PdeError> {
        if !(y > 0.0 && l > y) {
            return Err(PdeError::InvalidGrid(format!("need 0 < Y < L, got Y = {y}, L = {l}")));
        }
        if n_w < 9 || n_v < 9 {
            return Err(PdeError::InvalidGrid(format!(
                "need at least 9 nodes per subdomain for the one-sided stencils, got ({n_w}, {n_v})"
            )));
        }
        Ok(Grid { y, l, n_w, n_v })
    }

    pub fn h_w(&self) -> f64 {
        self.y / (self.n_w - 1) as f64
    }

    pub fn h_v(&self) -> f64 {
        (self.l - self.y) / (self.n_v - 1) as f64
    }

    pub fn x_w(&self, i: usize) -> f64 {
        i as f64 * self.h_w()
    }

    pub fn x_v(&self, i: usize) -> f64 {
        self.y + i as f64 * self.h_v()
    }
}

/// Boundary values applied at `x = 0`, `x = Y`, `x = L`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ControlInputs {
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
}

impl ControlInputs {
    pub const ZERO: ControlInputs = ControlInputs { u1: 0.0, u2: 0.0, u3: 0.0 };

    pub fn is_finite(&self) -> bool {
        self.u1.is_finite() && self.u2.is_finite() && self.u3.is_finite()
    }
}

/// Discretized fields on both subdomains, boundary nodes included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualDomainState {
    pub w: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

/// How to populate the initial fields. All presets have zero values and
/// slopes at the actuation points, compatible with idle inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialPreset {
    Zero,
    /// `amplitude * sin^2(pi (x-a)/(b-a))` on each subdomain
    SineBump { amplitude: f64 },
    /// low-pass random combination `sum_k g_k sin^2(k pi t)/k^2`, scaled to
    /// the requested amplitude, from the seeded generator
    RandomSmooth { amplitude: f64 },
    /// explicit samples, boundary nodes included
    Samples { w: Vec<f64>, v: Vec<f64> },
}

/// Build the initial state on a grid (the seed only matters for the random
/// preset).
pub fn initial_state(grid: &Grid, preset: &InitialPreset, seed: u64) -> Result<DualDomainState, PdeError> {
    let profile = |n: usize, f: &dyn Fn(f64) -> f64| -> Vec<f64> {
        (0..n).map(|i| f(i as f64 / (n - 1) as f64)).collect()
    };
    let (w, v) = match preset {
        InitialPreset::Zero => (vec![0.0; grid.n_w], vec![0.0; grid.n_v]),
        InitialPreset::SineBump { amplitude } => {
            let f = |t: f64| amplitude * (std::f64::consts::PI * t).sin().powi(2);
            (profile(grid.n_w, &f), profile(grid.n_v, &f))
        }
        InitialPreset::RandomSmooth { amplitude } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut gen = |n: usize| -> Vec<f64> {
                let coefs: Vec<f64> = (1..=8).map(|k| rng.random_range(-1.0..1.0) / (k * k) as f64).collect();
                let f = |t: f64| -> f64 {
                    coefs
                        .iter()
                        .enumerate()
                        .map(|(i, c)| c * ((i + 1) as f64 * std::f64::consts::PI * t).sin().powi(2))
                        .sum()
                };
                let vals = profile(n, &f);
                let max = vals.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1e-300);
                vals.into_iter().map(|x| x * amplitude / max).collect()
            };
            (gen(grid.n_w), gen(grid.n_v))
        }
        InitialPreset::Samples { w, v } => (w.clone(), v.clone()),
    };
    if w.len() != grid.n_w || v.len() != grid.n_v {
        return Err(PdeError::ShapeMismatch { expected_w: grid.n_w, expected_v: grid.n_v, got_w: w.len(), got_v: v.len() });
    }
    Ok(DualDomainState { w, v, t: 0.0 })
}

/// Per-step report; the advective stability margin is `dt max|u| / h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub cfl_margin: f64,
    pub cfl_warning: bool,
}

struct DomainOp {
    lu: BandedLu,
    h: f64,
    n: usize,
    /// RHS coefficients multiplying the left/right boundary values
    bc_left: [f64; 2],
    bc_right: [f64; 2],
}

impl DomainOp {
    fn build(n: usize, h: f64, lambda1: f64, dt: f64) -> Self {
        let m = n - 2;
        let h2 = h * h;
        let h4 = h2 * h2;
        let mut a = Banded::new(m, 2, 2);
        for i in 0..m {
            let mut diag = 1.0 + dt * (6.0 / h4 - 2.0 * lambda1 / h2);
            if i == 0 || i == m - 1 {
                diag += dt / h4; // zero-slope ghost fold
            }
            a.set(i, i, diag);
            if i + 1 < m {
                let off = dt * (-4.0 / h4 + lambda1 / h2);
                a.set(i, i + 1, off);
                a.set(i + 1, i, off);
            }
            if i + 2 < m {
                a.set(i, i + 2, dt / h4);
                a.set(i + 2, i, dt / h4);
            }
        }
        let lu = a.factor().expect("IMEX operator is nonsingular for dt > 0");
        DomainOp {
            lu,
            h,
            n,
            bc_left: [-dt * (-4.0 / h4 + lambda1 / h2), -dt / h4],
            bc_right: [-dt * (-4.0 / h4 + lambda1 / h2), -dt / h4],
        }
    }

    /// One IMEX step of a single clamped domain with boundary values
    /// `(ul, ur)` held over the step.
    fn step(&self, field: &mut [f64], ul: f64, ur: f64, dt: f64, work: &mut Vec<f64>) {
        let n = self.n;
        let m = n - 2;
        let h = self.h;
        work.clear();
        work.reserve(m);
        // explicit advection in the skew-symmetric-friendly average
        for i in 1..n - 1 {
            let ux = (field[i + 1] - field[i - 1]) / (2.0 * h);
            let u2x = (field[i + 1] * field[i + 1] - field[i - 1] * field[i - 1]) / (2.0 * h);
            let adv = -0.5 * (field[i] * ux + 0.5 * u2x);
            work.push(field[i] + dt * adv);
        }
        // Dirichlet contributions of the new boundary values
        work[0] += self.bc_left[0] * ul;
        work[1] += self.bc_left[1] * ul;
        work[m - 1] += self.bc_right[0] * ur;
        work[m - 2] += self.bc_right[1] * ur;
        self.lu.solve(work);
        field[0] = ul;
        field[n - 1] = ur;
        field[1..n - 1].copy_from_slice(work);
    }
}

/// Owns the factored implicit operators for a fixed `(grid, lambda1, dt)`.
///
/// A solver instance is single-threaded; run one instance per trajectory for
/// parameter sweeps.
pub struct KsSolver {
    pub grid: Grid,
    pub lambda1: f64,
    pub dt: f64,
    op_w: DomainOp,
    op_v: DomainOp,
    work: Vec<f64>,
}

impl KsSolver {
    pub fn new(grid: Grid, lambda1: f64, dt: f64) -> Result<Self, PdeError> {
        if !(dt > 0.0) {
            return Err(PdeError::InvalidGrid(format!("dt = {dt} must be > 0")));
        }
        if !(lambda1 >= 0.0) {
            return Err(PdeError::InvalidGrid(format!("lambda1 = {lambda1} must be >= 0")));
        }
        let op_w = DomainOp::build(grid.n_w, grid.h_w(), lambda1, dt);
        let op_v = DomainOp::build(grid.n_v, grid.h_v(), lambda1, dt);
        Ok(KsSolver { grid, lambda1, dt, op_w, op_v, work: Vec::new() })
    }

    /// Advance one step with the inputs held constant; the state's boundary
    /// entries equal the inputs exactly afterwards.
    pub fn step(&mut self, state: &mut DualDomainState, inputs: &ControlInputs) -> Result<StepInfo, PdeError> {
        if state.w.len() != self.grid.n_w || state.v.len() != self.grid.n_v {
            return Err(PdeError::ShapeMismatch {
                expected_w: self.grid.n_w,
                expected_v: self.grid.n_v,
                got_w: state.w.len(),
                got_v: state.v.len(),
            });
        }
        if !inputs.is_finite() {
            return Err(PdeError::StepRejected { t: state.t, max_abs: f64::INFINITY });
        }
        let max_abs = |s: &[f64]| s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let amp = max_abs(&state.w)
            .max(max_abs(&state.v))
            .max(inputs.u1.abs())
            .max(inputs.u2.abs())
            .max(inputs.u3.abs());
        let h_min = self.op_w.h.min(self.op_v.h);
        let cfl_margin = self.dt * amp / h_min;

        self.op_w.step(&mut state.w, inputs.u1, inputs.u2, self.dt, &mut self.work);
        self.op_v.step(&mut state.v, inputs.u2, inputs.u3, self.dt, &mut self.work);
        state.t += self.dt;

        let new_amp = max_abs(&state.w).max(max_abs(&state.v));
        if !new_amp.is_finite() || new_amp > BLOWUP_THRESHOLD {
            return Err(PdeError::StepRejected { t: state.t, max_abs: new_amp });
        }
        Ok(StepInfo { cfl_margin, cfl_warning: cfl_margin > 0.5 })
    }
}

/// Third-derivative boundary traces by the second-order one-sided 5-point
/// stencil (exact through quartics).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BoundaryTraces {
    pub wxxx0: f64,
    pub wxxx_y: f64,
    pub vxxx_y: f64,
    pub vxxx_l: f64,
}

fn third_deriv_left(f: &[f64], h: f64) -> f64 {
    (-2.5 * f[0] + 9.0 * f[1] - 12.0 * f[2] + 7.0 * f[3] - 1.5 * f[4]) / (h * h * h)
}

fn third_deriv_right(f: &[f64], h: f64) -> f64 {
    let n = f.len();
    -(-2.5 * f[n - 1] + 9.0 * f[n - 2] - 12.0 * f[n - 3] + 7.0 * f[n - 4] - 1.5 * f[n - 5]) / (h * h * h)
}

pub fn boundary_third_derivatives(state: &DualDomainState, grid: &Grid) -> BoundaryTraces {
    BoundaryTraces {
        wxxx0: third_deriv_left(&state.w, grid.h_w()),
        wxxx_y: third_deriv_right(&state.w, grid.h_w()),
        vxxx_y: third_deriv_left(&state.v, grid.h_v()),
        vxxx_l: third_deriv_right(&state.v, grid.h_v()),
    }
}

/// `(V1, V2) = (1/2 int w^2, 1/2 int v^2)` by composite Simpson.
pub fn lyapunov_pair(state: &DualDomainState, grid: &Grid) -> (f64, f64) {
    (
        0.5 * simpson_map(&state.w, grid.h_w(), |x| x * x),
        0.5 * simpson_map(&state.v, grid.h_v(), |x| x * x),
    )
}

/// `gamma = int_0^Y w`.
pub fn mass_gamma(state: &DualDomainState, grid: &Grid) -> f64 {
    simpson_samples(&state.w, grid.h_w())
}

/// Everything the identities need, measured at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub lambda1: f64,
    pub v1: f64,
    pub v2: f64,
    pub gamma: f64,
    pub traces: BoundaryTraces,
    pub int_wxx2: f64,
    pub int_wx2: f64,
    pub int_vxx2: f64,
    pub int_vx2: f64,
    pub inputs: ControlInputs,
}

/// Measure the energy quantities of a state under the currently applied
/// inputs (fourth-order interior derivatives, Simpson integrals).
pub fn energy_record(state: &DualDomainState, grid: &Grid, lambda1: f64, inputs: &ControlInputs) -> EnergyRecord {
    let (v1, v2) = lyapunov_pair(state, grid);
    let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<f64>>();
    let (hw, hv) = (grid.h_w(), grid.h_v());
    let wx = deriv1(&state.w, hw);
    let wxx = deriv2(&state.w, hw);
    let vx = deriv1(&state.v, hv);
    let vxx = deriv2(&state.v, hv);
    EnergyRecord {
        t: state.t,
        lambda1,
        v1,
        v2,
        gamma: mass_gamma(state, grid),
        traces: boundary_third_derivatives(state, grid),
        int_wxx2: simpson_samples(&sq(&wxx), hw),
        int_wx2: simpson_samples(&sq(&wx), hw),
        int_vxx2: simpson_samples(&sq(&vxx), hv),
        int_vx2: simpson_samples(&sq(&vx), hv),
        inputs: *inputs,
    }
}

/// Mid-window residual of the mass-flux identity
/// `w_xxx(0) = w_xxx(Y) + (u2^2 - u1^2)/2 + d gamma/dt`,
/// with the time derivative by the centered difference across the window.
pub fn interface_identity_residual(window: &[EnergyRecord]) -> f64 {
    assert!(window.len() >= 3, "need at least 3 records for the gamma derivative");
    let first = &window[0];
    let last = &window[window.len() - 1];
    let mid = &window[window.len() / 2];
    let gamma_dot = (last.gamma - first.gamma) / (last.t - first.t);
    let u = &mid.inputs;
    (mid.traces.wxxx0 - mid.traces.wxxx_y - (u.u2 * u.u2 - u.u1 * u.u1) / 2.0 - gamma_dot).abs()
}

/// Mid-window residuals of the two energy-rate identities: finite-difference
/// `dV/dt` against the measured right sides.
pub fn energy_rate_residual(window: &[EnergyRecord]) -> (f64, f64) {
    assert!(window.len() >= 3, "need at least 3 records for the V derivatives");
    let first = &window[0];
    let last = &window[window.len() - 1];
    let mid = &window[window.len() / 2];
    let dt_span = last.t - first.t;
    let v1_dot = (last.v1 - first.v1) / dt_span;
    let v2_dot = (last.v2 - first.v2) / dt_span;
    let u = &mid.inputs;
    let rhs1 = -mid.int_wxx2 + mid.lambda1 * mid.int_wx2
        - (u.u2.powi(3) - u.u1.powi(3)) / 3.0
        - u.u2 * mid.traces.wxxx_y
        + u.u1 * mid.traces.wxxx0;
    let rhs2 = -mid.int_vxx2 + mid.lambda1 * mid.int_vx2
        - (u.u3.powi(3) - u.u2.powi(3)) / 3.0
        - u.u3 * mid.traces.vxxx_l
        + u.u2 * mid.traces.vxxx_y;
    ((v1_dot - rhs1).abs(), (v2_dot - rhs2).abs())
}
