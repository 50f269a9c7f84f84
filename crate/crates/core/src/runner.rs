//! Configuration-driven experiments: closed-loop runs, parameter sweeps, and
//! the verification suite behind `ksic verify`.

use crate::coeffs::{self, czi_table, SampledFn};
use crate::config::{ConfigError, ExperimentConfig, Mode};
use crate::control::{
    controller_step, kappa1, kappa2, kappa2_beta, kappa3, phase_of, ControlError, ControllerMode, ControllerParams,
    LatchStore, Measurements, Phase, PhaseSchedule,
};
use crate::gronwall::{windowed_v1_bound, v1_envelope_bound, EnvelopeParams, GronwallData, PiecewiseLinear};
use crate::linalg::bisect;
use crate::pde::{
    boundary_third_derivatives, energy_record, energy_rate_residual, initial_state, interface_identity_residual,
    lyapunov_pair, mass_gamma, ControlInputs, DualDomainState, EnergyRecord, Grid, KsSolver, PdeError,
};
use crate::quad::{gauss64_composite, simpson_samples};
use crate::report::{summary_csv, sigma_csv, trajectory_csv, write_file, SummaryRow};
use crate::spectrum::{fd_eigen_oracle, fd_eigen_pair, solve_delta_o, EigenProblem, SpectrumError};
use crate::switched::{
    check_conditions, linearization_offset, simulate_sigma3, decay_certificate, recursion_certificate, CertificateReport,
    SwitchedParams,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunnerError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RunOutcome {
    Completed,
    /// the state crossed the blow-up threshold and the run was aborted
    BlownUp { t: f64 },
}

/// Latched-envelope co-check of a controller-2 run: the windowed bound is
/// evaluated at each `I2` entry and compared against `V1` throughout the
/// window.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EnvelopeCheck {
    pub windows: usize,
    pub violations: usize,
    /// largest observed `V1 / envelope`
    pub max_ratio: f64,
}

#[derive(Debug)]
pub struct RunOutput {
    pub config_hash: String,
    pub summary: Vec<SummaryRow>,
    pub snapshots: Vec<DualDomainState>,
    /// `(t, W)` at period starts `t = k (tbar1 + tbar2)`
    pub period_marks: Vec<(f64, f64)>,
    pub cfl_warnings: usize,
    pub certificate: Option<CertificateReport>,
    pub envelope_check: Option<EnvelopeCheck>,
    pub params: Option<ControllerParams>,
    pub outcome: RunOutcome,
}

impl RunOutput {
    pub fn final_w(&self) -> f64 {
        self.summary.last().map(|r| r.v1 + r.v2).unwrap_or(0.0)
    }

    pub fn max_w(&self) -> f64 {
        self.summary.iter().map(|r| r.v1 + r.v2).fold(0.0, f64::max)
    }
}

fn measure(state: &DualDomainState, grid: &Grid) -> Measurements {
    let (v1, v2) = lyapunov_pair(state, grid);
    let tr = boundary_third_derivatives(state, grid);
    Measurements { v1, v2, wxxx0: tr.wxxx0, vxxxy: tr.vxxx_y, vxxxl: tr.vxxx_l }
}

/// Execute the sensing-restricted control loop described by the config.
///
/// Records `V1`, `V2`, the applied inputs, boundary traces and `gamma` on the
/// summary stride; emits CSV/JSON into `outputs.dir` when set. Controller-1
/// runs refuse dwell-time-violating gains unless `force` is set. A blow-up
/// aborts the run and is reported in the outcome rather than an error so the
/// partial trajectory stays inspectable.
pub fn run_closed_loop(cfg: &ExperimentConfig) -> Result<RunOutput, RunnerError> {
    cfg.validate()?;
    let grid = Grid::new(cfg.grid.y, cfg.grid.l, cfg.grid.n_w, cfg.grid.n_v)?;
    let sched = PhaseSchedule::new(cfg.schedule.tbar1, cfg.schedule.tbar2)?;
    let params = match cfg.controller.mode {
        Mode::Open => None,
        _ => Some(ControllerParams::derive(
            cfg.physics.lambda1,
            cfg.grid.y,
            cfg.grid.l,
            cfg.controller.alpha1,
            cfg.controller.alpha2,
            cfg.controller.delta,
        )?),
    };
    if cfg.controller.mode == Mode::Controller1 && !cfg.controller.force {
        let p = params.as_ref().unwrap();
        if !check_conditions(p.alpha1, p.alpha2, p.delta2, sched.tbar1, sched.tbar2) {
            return Err(RunnerError::Invariant(format!(
                "dwell-time conditions fail: need alpha1 > {}, alpha2 > {} (use force to override)",
                2.0 * p.delta2 * sched.tbar2 / sched.tbar1,
                2.0 * p.delta2 * sched.tbar1 / sched.tbar2,
            )));
        }
    }
    let certificate = match (cfg.controller.mode, &params) {
        (Mode::Controller1, Some(p)) => decay_certificate(&SwitchedParams::from(p), &sched).ok(),
        (Mode::Controller2, Some(p)) => recursion_certificate(&SwitchedParams::from(p), &sched).ok(),
        _ => None,
    };

    let mut solver = KsSolver::new(grid, cfg.physics.lambda1, cfg.solver.dt)?;
    let mut state = initial_state(&grid, &cfg.solver.preset, cfg.solver.seed)?;
    let steps = (cfg.solver.t_end / cfg.solver.dt).round() as usize;
    let period = sched.period();

    let mut latch = LatchStore::default();
    let mut summary = Vec::new();
    let mut snapshots = Vec::new();
    let mut period_marks = Vec::new();
    let mut cfl_warnings = 0usize;
    let mut outcome = RunOutcome::Completed;
    let mut env = cfg.controller.mode.eq(&Mode::Controller2).then(EnvelopeCheck::default);
    let env_params = params.as_ref().map(EnvelopeParams::from);
    let mut window_env = f64::INFINITY;
    let mut last_period = usize::MAX;
    let mut last_window = usize::MAX;

    for step in 0..=steps {
        let t = state.t;
        let meas = measure(&state, &grid);
        let inputs = match (cfg.controller.mode, &params) {
            (Mode::Open, _) => ControlInputs::ZERO,
            (Mode::Controller1, Some(p)) => {
                controller_step(ControllerMode::Controller1, t, &meas, &sched, p, &mut latch)?
            }
            (Mode::Controller2, Some(p)) => {
                controller_step(ControllerMode::Controller2, t, &meas, &sched, p, &mut latch)?
            }
            _ => unreachable!(),
        };

        // period bookkeeping on the closest step to each boundary
        let period_idx = (t / period + 0.5 * cfg.solver.dt / period).floor() as usize;
        if (t - period_idx as f64 * period).abs() <= 0.5 * cfg.solver.dt && period_idx != last_period {
            last_period = period_idx;
            period_marks.push((t, meas.v1 + meas.v2));
        }
        // latched-envelope co-check at I2 entries
        if let (Some(check), Some(ep), Some(p)) = (env.as_mut(), env_params.as_ref(), params.as_ref()) {
            let info = phase_of(t, &sched);
            if info.phase == Phase::I2 {
                if info.interval_index != last_window {
                    last_window = info.interval_index;
                    check.windows += 1;
                    let latched = p.alpha2.cbrt() * meas.v2.max(0.0);
                    window_env = v1_envelope_bound(sched.tbar2, meas.v1, latched, ep).v1_envelope;
                }
                let ratio = if window_env.is_finite() { meas.v1 / window_env.max(1e-300) } else { 0.0 };
                if ratio > check.max_ratio {
                    check.max_ratio = ratio;
                }
                if meas.v1 > window_env * (1.0 + 1e-9) {
                    check.violations += 1;
                }
            }
        }

        if step % cfg.outputs.stride == 0 || step == steps {
            let tr = boundary_third_derivatives(&state, &grid);
            summary.push(SummaryRow {
                t,
                v1: meas.v1,
                v2: meas.v2,
                inputs,
                wxxx0: tr.wxxx0,
                wxxx_y: tr.wxxx_y,
                vxxx_y: tr.vxxx_y,
                vxxx_l: tr.vxxx_l,
                gamma: mass_gamma(&state, &grid),
            });
        }
        if cfg.outputs.trajectory_stride > 0 && step % cfg.outputs.trajectory_stride == 0 {
            snapshots.push(state.clone());
        }
        if step == steps {
            break;
        }
        match solver.step(&mut state, &inputs) {
            Ok(info) => {
                if info.cfl_warning {
                    cfl_warnings += 1;
                }
            }
            Err(PdeError::StepRejected { t, .. }) => {
                outcome = RunOutcome::BlownUp { t };
                break;
            }
            Err(e) => return Err(e.into()),
        }
    }

    let out = RunOutput {
        config_hash: cfg.hash(),
        summary,
        snapshots,
        period_marks,
        cfl_warnings,
        certificate,
        envelope_check: env,
        params,
        outcome,
    };
    if let Some(dir) = &cfg.outputs.dir {
        let dir = Path::new(dir);
        write_file(dir, "summary.csv", &summary_csv(&out.summary, &out.config_hash))?;
        if !out.snapshots.is_empty() {
            write_file(dir, "trajectory.csv", &trajectory_csv(&out.snapshots, &grid, &out.config_hash))?;
        }
        if let Some(cert) = &out.certificate {
            write_file(dir, "certificate.json", &serde_json::to_string_pretty(cert).expect("serializable"))?;
        }
    }
    Ok(out)
}

/// Fan one closed-loop run per `alpha2` value across worker threads
/// (capped by `KSIC_THREADS`), results in input order.
pub fn sweep_alpha2(cfg: &ExperimentConfig, alpha2_values: &[f64]) -> Vec<(f64, Result<RunOutput, RunnerError>)> {
    let max_threads = std::env::var("KSIC_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    let mut results: Vec<Option<(f64, Result<RunOutput, RunnerError>)>> = Vec::new();
    results.resize_with(alpha2_values.len(), || None);
    let chunk = max_threads.max(1);
    for batch in (0..alpha2_values.len()).collect::<Vec<_>>().chunks(chunk) {
        std::thread::scope(|scope| {
            let mut handles = Vec::new();
            for &i in batch {
                let mut run_cfg = cfg.clone();
                run_cfg.controller.alpha2 = alpha2_values[i];
                if let Some(dir) = &cfg.outputs.dir {
                    run_cfg.outputs.dir = Some(format!("{dir}/alpha2_{}", alpha2_values[i]));
                }
                handles.push((i, scope.spawn(move || run_closed_loop(&run_cfg))));
            }
            for (i, h) in handles {
                let res = h.join().expect("worker panicked");
                results[i] = Some((alpha2_values[i], res));
            }
        });
    }
    results.into_iter().map(|r| r.expect("all slots filled")).collect()
}

/// Verification depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyLevel {
    Fast,
    Full,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// checks that encode statements the source design itself fails to
    /// support; reported but excluded from the exit status
    pub expected_fail: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub level: String,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed || c.expected_fail)
    }
}

fn push(checks: &mut Vec<CheckResult>, name: &str, passed: bool, detail: String) {
    checks.push(CheckResult { name: name.into(), passed, expected_fail: false, detail });
}

const FOUR_PI_SQ: f64 = 39.47841760435743;

/// Run every module's property checks; `Fast` uses coarse grids, `Full`
/// adds the refinement studies and the large sample counts.
pub fn run_verification_suite(level: VerifyLevel) -> VerificationReport {
    let full = level == VerifyLevel::Full;
    let mut checks = Vec::new();

    // --- spectrum: trichotomy ----------------------------------------
    {
        let mut ok = true;
        let mut detail = String::new();
        for (lambda, want) in [
            (0.0, 1),
            (20.0, 1),
            (39.0, 1),
            (FOUR_PI_SQ, 0),
            (40.0, -1),
            (60.0, -1),
        ] {
            let d = solve_delta_o(&EigenProblem::unit(lambda), 1e-8).map(|r| r.delta_o);
            match d {
                Ok(d) => {
                    let sign = if d.abs() <= 1e-6 { 0 } else if d > 0.0 { 1 } else { -1 };
                    if sign != want {
                        ok = false;
                        detail.push_str(&format!("lambda={lambda}: delta_o={d}; "));
                    }
                }
                Err(e) => {
                    ok = false;
                    detail.push_str(&format!("lambda={lambda}: {e}; "));
                }
            }
        }
        push(&mut checks, "spectrum.trichotomy", ok, detail);
    }

    // --- spectrum: determinant vs discretization oracle ----------------
    {
        let n = if full { 2000 } else { 800 };
        let mut ok = true;
        let mut detail = String::new();
        for lambda in [0.0, 10.0, FOUR_PI_SQ, 60.0] {
            let det = solve_delta_o(&EigenProblem::unit(lambda), 1e-8).map(|r| r.delta_o);
            let fd = fd_eigen_oracle(&EigenProblem::unit(lambda), n);
            match (det, fd) {
                (Ok(a), Ok(b)) => {
                    let rel = (a - b).abs() / a.abs().max(1.0);
                    if rel > 1e-3 {
                        ok = false;
                        detail.push_str(&format!("lambda={lambda}: det={a} fd={b}; "));
                    }
                }
                _ => {
                    ok = false;
                    detail.push_str(&format!("lambda={lambda}: solver error; "));
                }
            }
        }
        // clamped-beam constant
        let mu = bisect(|m: f64| m.cos() * m.cosh() - 1.0, 4.0, 5.5, 1e-13);
        let want = mu.powi(4);
        if let Ok(got) = solve_delta_o(&EigenProblem::unit(0.0), 1e-8) {
            if ((got.delta_o - want) / want).abs() > 1e-3 {
                ok = false;
                detail.push_str(&format!("beam constant: {} vs {}; ", got.delta_o, want));
            }
        }
        push(&mut checks, "spectrum.oracle_agreement", ok, detail);
    }

    // --- coeffs: closed forms vs quadrature, PSD ----------------------
    {
        let mut rng = ChaCha8Rng::seed_from_u64(1001);
        let mut ok = true;
        let mut worst: f64 = 0.0;
        for _ in 0..50 {
            let a = rng.random_range(-2.0..2.0);
            let b = a + rng.random_range(0.2..3.0);
            let p = rng.random_range(-4.0..4.0);
            let q = rng.random_range(-4.0..4.0);
            let k = coeffs::bridge_poly(p, q, a, b);
            let t = czi_table(a, b);
            let pairs = [
                (t.c1_eval(p, q), 2.0 * gauss64_composite(|x| k.dxx(x).powi(2), a, b, 1)),
                (t.c2_eval(p, q), gauss64_composite(|x| k.value(x).powi(2), a, b, 1)),
                (t.c3_eval(p, q), 2.0 * gauss64_composite(|x| k.dx(x).powi(2), a, b, 1)),
            ];
            for (got, want) in pairs {
                let rel = (got - want).abs() / want.abs().max(1e-30);
                if want.abs() > 1e-18 {
                    worst = worst.max(rel);
                    if rel > 1e-12 {
                        ok = false;
                    }
                }
            }
            for f in [t.c1, t.c2, t.c3] {
                if f.gram_eigenvalues().0 < -1e-12 {
                    ok = false;
                }
            }
        }
        push(&mut checks, "coeffs.table_vs_quadrature", ok, format!("worst relative deviation {worst:.2e}"));
    }

    // --- coeffs: energy-bound margins on random quintics ---------------
    {
        let lambda1 = 50.0;
        let count = if full { 100 } else { 20 };
        let mut rng = ChaCha8Rng::seed_from_u64(1002);
        let mut ok = true;
        let mut min_margin = f64::INFINITY;
        for (a, b) in [(0.0, 1.0), (1.0, 2.0)] {
            let d0 = match solve_delta_o(&EigenProblem { lambda: 3.0 * lambda1, a, b }, 1e-8) {
                Ok(r) => r.delta_o,
                Err(_) => {
                    ok = false;
                    continue;
                }
            };
            for _ in 0..count {
                let c0 = rng.random_range(-2.0..2.0);
                let c2 = rng.random_range(-2.0..2.0);
                let c3 = rng.random_range(-2.0..2.0);
                let c4 = rng.random_range(-2.0..2.0);
                let c5 = -(2.0 * c2 + 3.0 * c3 + 4.0 * c4) / 5.0;
                let z = SampledFn::from_fn(
                    |x| {
                        let t = (x - a) / (b - a);
                        c0 + c2 * t * t + c3 * t.powi(3) + c4 * t.powi(4) + c5 * t.powi(5)
                    },
                    a,
                    b,
                    1001,
                );
                match coeffs::energy_bound_margin(&z, lambda1, d0 - 1e-6) {
                    Ok(m) => {
                        min_margin = min_margin.min(m);
                        if m < -1e-8 {
                            ok = false;
                        }
                    }
                    Err(_) => ok = false,
                }
            }
        }
        push(&mut checks, "coeffs.energy_bound_margin", ok, format!("min margin {min_margin:.3e}"));
    }

    // --- coeffs: canary - the sharp clamped inequality must notice a
    // corrupted eigenvalue ----------------------------------------------
    {
        let lam = 150.0;
        let ok = (|| -> Option<bool> {
            let d0 = solve_delta_o(&EigenProblem::unit(lam), 1e-8).ok()?.delta_o;
            let n = if full { 2000 } else { 1000 };
            let (_, vec) = fd_eigen_pair(&EigenProblem::unit(lam), n).ok()?;
            let h = 1.0 / (n as f64 + 1.0);
            let mut vals = vec![0.0];
            vals.extend(vec);
            vals.push(0.0);
            let dz = coeffs::deriv1(&vals, h);
            let dzz = coeffs::deriv2(&vals, h);
            let sq = |v: &[f64]| v.iter().map(|x| x * x).collect::<Vec<f64>>();
            let z2 = simpson_samples(&sq(&vals), h);
            let zx2 = simpson_samples(&sq(&dz), h);
            let zxx2 = simpson_samples(&sq(&dzz), h);
            let lhs = -zxx2 + lam * zx2;
            let honest = lhs <= -d0 * z2 + 0.05 * d0.abs() * z2;
            let corrupted = d0 + 0.1 * d0.abs();
            let detects = lhs > -corrupted * z2;
            Some(honest && detects)
        })()
        .unwrap_or(false);
        push(&mut checks, "coeffs.corruption_canary", ok, String::new());
    }

    // --- control: design inequalities ----------------------------------
    {
        let p = match ControllerParams::derive(50.0, 1.0, 2.0, 15000.0, 15000.0, None) {
            Ok(p) => p,
            Err(e) => {
                push(&mut checks, "control.design_inequalities", false, e.to_string());
                return VerificationReport { level: level_name(level), checks };
            }
        };
        let a_w = p.tables_w.c1.a + p.delta2 * p.tables_w.c2.a + p.lambda1 * p.tables_w.c3.a;
        let a_v = p.tables_v.c1.b + p.delta2 * p.tables_v.c2.b + p.lambda1 * p.tables_v.c3.b;
        let n = if full { 1000 } else { 300 };
        let mut rng = ChaCha8Rng::seed_from_u64(1003);
        let mut ok = true;
        let mut worst: f64 = f64::NEG_INFINITY;
        for _ in 0..n {
            let v1 = rng.random_range(0.0..100.0);
            let xi = rng.random_range(-1e6..1e6);
            if let Ok(u) = kappa1(v1, xi, &p) {
                let gap = u * u * u / 3.0 + a_w * u * u + u * xi + (p.alpha1 + 2.0 * p.delta1) * v1;
                worst = worst.max(gap);
                if gap > 1e-9 {
                    ok = false;
                }
            } else {
                ok = false;
            }
            let v2 = rng.random_range(0.0..100.0);
            let zeta = rng.random_range(-1e6..1e6);
            if let Ok(u) = kappa3(v2, zeta, &p) {
                let gap = -u * u * u / 3.0 + a_v * u * u - u * zeta + (p.alpha2 + 2.0 * p.delta1) * v2;
                worst = worst.max(gap);
                if gap > 1e-9 {
                    ok = false;
                }
            } else {
                ok = false;
            }
        }
        push(
            &mut checks,
            "control.design_inequalities_outer",
            ok,
            format!("worst gap {worst:.3e}; threshold strengthened: {}", p.l1_strengthened),
        );

        // latched law: magnitude bound + root residual + the interface-free
        // core inequality its construction guarantees
        let beta = kappa2_beta();
        let mut ok2 = (beta * beta * beta - 6.0 * beta - 3.0).abs() <= 1e-9;
        let mut worst2: f64 = f64::NEG_INFINITY;
        for _ in 0..n {
            let v2 = rng.random_range(0.0..10.0);
            let zeta = rng.random_range(-1e5..1e5);
            let a = p.alpha2.cbrt() * v2;
            let u = kappa2(a, zeta, &p);
            if u.abs() > p.p_bound * a + 1e-12 {
                ok2 = false;
            }
            let gap = u * u * u / 3.0 + u * zeta + p.alpha2 * v2 * v2 * v2;
            worst2 = worst2.max(gap);
            if gap > 1e-9 {
                ok2 = false;
            }
        }
        push(&mut checks, "control.latched_law_core", ok2, format!("worst gap {worst2:.3e}"));

        // the full interface inequality carries an extra B u^2 term the
        // law cannot absorb near the origin; the margin analysis is in the
        // acceptance suite
        let mut worst3: f64 = f64::NEG_INFINITY;
        let mut pass3 = true;
        for _ in 0..n {
            let v2 = rng.random_range(0.0..10.0);
            let zeta = rng.random_range(-1e5..1e5);
            let a = p.alpha2.cbrt() * v2;
            let u = kappa2(a, zeta, &p);
            let gap = u * u * u / 3.0 + p.b_coef * u * u + u * zeta + p.alpha2 * v2 * v2 * v2;
            worst3 = worst3.max(gap);
            if gap > 1e-9 {
                pass3 = false;
            }
        }
        checks.push(CheckResult {
            name: "control.latched_law_with_interface_term".into(),
            passed: pass3,
            expected_fail: true,
            detail: format!("worst gap {worst3:.3e} (quadratic interface term exceeds the cubic margin near 0)"),
        });
    }

    // --- switched: certificate on the exact trajectory -----------------
    {
        let sp = SwitchedParams::new(8.0, 9.0, 1.0, 1.5);
        let sched = PhaseSchedule::new(0.4, 0.3).unwrap();
        let mut ok = check_conditions(sp.alpha1, sp.alpha2, sp.delta2, sched.tbar1, sched.tbar2);
        if let Ok(CertificateReport::Decay { rate_beta, overshoot_kappa, .. }) = decay_certificate(&sp, &sched) {
            let traj = simulate_sigma3(0.7, 1.3, &sp, &sched, 20, 25);
            let w0 = 2.0;
            for (t, v1, v2) in traj {
                if v1 + v2 > overshoot_kappa * (-rate_beta * t).exp() * w0 * (1.0 + 1e-12) {
                    ok = false;
                }
            }
        } else {
            ok = false;
        }
        // counterexample with violated conditions
        let bad = SwitchedParams::new(2.0, 100.0, 2.0, 2.0);
        let bsched = PhaseSchedule::new(0.5, 0.5).unwrap();
        let traj = simulate_sigma3(1.0, 0.0, &bad, &bsched, 3, 1);
        let grew = traj[2].1 + traj[2].2 > traj[0].1 + traj[0].2;
        ok &= grew;
        push(&mut checks, "switched.decay_certificate", ok, String::new());
    }

    // --- switched: linearization offset on a grid -----------------------
    {
        let pairs = if full { 20 } else { 6 };
        let grid_n = if full { 1_000_000 } else { 100_000 };
        let mut rng = ChaCha8Rng::seed_from_u64(1004);
        let mut ok = true;
        let mut worst: f64 = 0.0;
        for _ in 0..pairs {
            let delta1 = rng.random_range(-2.0..4.0);
            let alpha2 = rng.random_range(0.1..1000.0);
            let bo = linearization_offset(delta1, alpha2);
            let c0 = 2.0 * delta1 * alpha2.powf(-1.0 / 3.0);
            for i in 0..=grid_n {
                let pi = 100.0 * i as f64 / grid_n as f64;
                let resid = pi * pi * pi - c0 * pi - pi + bo;
                worst = worst.min(resid);
                if resid < -1e-9 {
                    ok = false;
                }
            }
        }
        push(&mut checks, "switched.linearization_offset", ok, format!("min residual {worst:.3e}"));
    }

    // --- gronwall: domination -------------------------------------------
    {
        let count = if full { 50 } else { 10 };
        let mut rng = ChaCha8Rng::seed_from_u64(1005);
        let mut ok = true;
        for _ in 0..count {
            let n = 160;
            let horizon = 0.7;
            let dt = horizon / n as f64;
            let p_b = kappa2_beta() + 1.0;
            let latched = rng.random_range(0.1..1.5);
            let cap = p_b * latched;
            let coefs: Vec<(f64, f64, f64)> = (1..=4)
                .map(|k| (rng.random_range(-1.0..1.0), k as f64 * rng.random_range(2.0..6.0), rng.random_range(0.0..std::f64::consts::TAU)))
                .collect();
            let norm: f64 = coefs.iter().map(|(c, _, _)| c.abs()).sum::<f64>().max(1e-9);
            let f = |t: f64| cap * coefs.iter().map(|(c, om, ph)| c * (om * t + ph).sin()).sum::<f64>() / norm;
            let u2 = PiecewiseLinear::new(0.0, dt, (0..=n).map(|j| f(j as f64 * dt)).collect());
            let kap = PiecewiseLinear::new(0.0, dt, (0..=n).map(|_| rng.random_range(0.0..1.0)).collect());
            let v1_0 = rng.random_range(0.0..1.0);
            let delta1 = rng.random_range(0.5..1.5);
            let c_coef = rng.random_range(0.5..1.5);
            let v1 = crate::gronwall::synthesize_sigma5_trajectory(&u2, &kap, v1_0, delta1, c_coef);
            let data = GronwallData { t0: 0.0, horizon, u2, delta1, delta2: 2.0 * delta1, c_coef, p_bound: p_b };
            let bound = windowed_v1_bound(&data, v1_0, 600);
            for (j, v) in v1.iter().enumerate() {
                if *v > bound.eval(j as f64 * dt) * (1.0 + 1e-6) + 1e-9 {
                    ok = false;
                }
            }
        }
        push(&mut checks, "gronwall.windowed_bound_domination", ok, String::new());
    }

    // --- pde: equilibrium, dissipativity, open-loop growth --------------
    {
        let grid = Grid::new(1.0, 2.0, 65, 65).unwrap();
        let mut ok = true;
        let mut detail = String::new();
        // zero fixed point
        if let Ok(mut solver) = KsSolver::new(grid, 50.0, 1e-6) {
            let mut s = initial_state(&grid, &crate::pde::InitialPreset::Zero, 0).unwrap();
            for _ in 0..20 {
                let _ = solver.step(&mut s, &ControlInputs::ZERO);
            }
            if s.w.iter().any(|&x| x != 0.0) || s.v.iter().any(|&x| x != 0.0) {
                ok = false;
                detail.push_str("zero state drifted; ");
            }
        }
        // open-loop growth at lambda1 = 50
        if let Ok(mut solver) = KsSolver::new(grid, 50.0, 2e-6) {
            let mut s =
                initial_state(&grid, &crate::pde::InitialPreset::RandomSmooth { amplitude: 1e-3 }, 1).unwrap();
            let (v1, v2) = lyapunov_pair(&s, &grid);
            let w0 = v1 + v2;
            let mut grown = false;
            for _ in 0..100_000 {
                if solver.step(&mut s, &ControlInputs::ZERO).is_err() {
                    break;
                }
                let (v1, v2) = lyapunov_pair(&s, &grid);
                if v1 + v2 > 10.0 * w0 {
                    grown = true;
                    break;
                }
            }
            if !grown {
                ok = false;
                detail.push_str("no open-loop growth; ");
            }
        }
        push(&mut checks, "pde.equilibrium_and_instability", ok, detail);
    }

    // --- pde: identity refinement (full only) ----------------------------
    if full {
        let (ok, detail) = identity_refinement_study();
        push(&mut checks, "pde.identity_refinement", ok, detail);
    }

    VerificationReport { level: level_name(level), checks }
}

fn level_name(level: VerifyLevel) -> String {
    match level {
        VerifyLevel::Fast => "fast".into(),
        VerifyLevel::Full => "full".into(),
    }
}

/// Three-level `(h -> h/2, dt -> dt/4)` refinement of the energy-rate and
/// interface identities on a controlled trajectory.
///
/// The inputs are constant in time: with the zero-order hold, time-varying
/// Dirichlet data injects a per-step boundary transient whose third-
/// derivative trace noise scales like `dt / h^3` and grows along this
/// refinement ladder, masking the scheme order. Constant (nonzero) inputs
/// exercise the same boundary terms without that artifact.
pub fn identity_refinement_study() -> (bool, String) {
    let lambda1 = 10.0;
    let inputs = ControlInputs { u1: 0.15, u2: -0.1, u3: 0.2 };
    let mut iface = Vec::new();
    let mut e1 = Vec::new();
    let mut e2 = Vec::new();
    for level in 0..3 {
        let n = 64 * (1 << level) + 1; // 65, 129, 257
        let dt = 4e-6 / (4.0f64).powi(level as i32);
        let grid = Grid::new(1.0, 2.0, n, n).unwrap();
        let mut solver = KsSolver::new(grid, lambda1, dt).expect("solver");
        let mut s = initial_state(&grid, &crate::pde::InitialPreset::SineBump { amplitude: 0.3 }, 0).unwrap();
        // settle the initial compatibility transient over a fixed horizon
        let warm = (2e-3 / dt).round() as usize;
        for _ in 0..warm {
            solver.step(&mut s, &inputs).expect("no blow-up in refinement study");
        }
        // three consecutive steps: the time-derivative window must shrink
        // with dt, otherwise its own truncation bias hides the scheme order
        let mut records: Vec<EnergyRecord> = Vec::with_capacity(3);
        for _ in 0..3 {
            records.push(energy_record(&s, &grid, lambda1, &inputs));
            solver.step(&mut s, &inputs).expect("no blow-up in refinement study");
        }
        iface.push(interface_identity_residual(&records));
        let (r1, r2) = energy_rate_residual(&records);
        e1.push(r1);
        e2.push(r2);
    }
    // order >= 1: at least a factor 2 drop per level
    let order_ok = |v: &[f64]| v[1] <= 0.5 * v[0] && v[2] <= 0.5 * v[1];
    let ok = order_ok(&iface) && order_ok(&e1) && order_ok(&e2);
    (
        ok,
        format!("interface residuals {iface:?}, energy residuals 1 {e1:?}, 2 {e2:?}"),
    )
}

/// Render a verification report as one line per check.
pub fn format_report(report: &VerificationReport) -> String {
    let mut out = String::new();
    for c in &report.checks {
        let status = if c.passed {
            "PASS"
        } else if c.expected_fail {
            "XFAIL"
        } else {
            "FAIL"
        };
        out.push_str(&format!("[{status}] {}", c.name));
        if !c.detail.is_empty() {
            out.push_str(&format!(" ({})", c.detail));
        }
        out.push('\n');
    }
    out.push_str(&format!("verification {}: {}\n", report.level, if report.passed() { "ok" } else { "FAILED" }));
    out
}

/// Convenience wrapper for the switched-system CSV subcommands.
pub fn sigma3_csv(
    v10: f64,
    v20: f64,
    params: &SwitchedParams,
    sched: &PhaseSchedule,
    n_periods: usize,
    samples_per_phase: usize,
    config_hash: &str,
) -> String {
    sigma_csv(&simulate_sigma3(v10, v20, params, sched, n_periods, samples_per_phase), config_hash)
}
