//! `ksic` - experiment runner for the intermittent-sensing boundary-control
//! toolkit. Scalar reports are JSON on stdout, trajectories are CSV on
//! stdout or files under the configured output directory.
//!
//! Exit codes: 0 ok, 2 invariant failure, 3 blow-up.

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use ksic_core::config::{ExperimentConfig, Mode};
use ksic_core::control::{ControllerParams, PhaseSchedule};
use ksic_core::gronwall::{v1_envelope_bound, EnvelopeParams};
use ksic_core::report::sigma_csv;
use ksic_core::runner::{
    format_report, run_closed_loop, run_verification_suite, sweep_alpha2, RunOutcome, RunnerError, VerifyLevel,
};
use ksic_core::spectrum::{fd_eigen_oracle, solve_delta_o, EigenProblem};
use ksic_core::switched::{simulate_sigma3, simulate_sigma4, decay_certificate, recursion_certificate, SwitchedParams};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_INVARIANT: u8 = 2;
const EXIT_BLOWUP: u8 = 3;

#[derive(Parser)]
#[command(name = "ksic", version, about = "Kuramoto-Sivashinsky intermittent-sensing control toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct PhysicsArgs {
    /// antidiffusion coefficient
    #[arg(long, default_value_t = 50.0)]
    lambda1: f64,
    /// interface location
    #[arg(long, default_value_t = 1.0)]
    y: f64,
    /// right end of the domain
    #[arg(long, default_value_t = 2.0)]
    l: f64,
    /// energy-bound constant; computed from the eigenvalue problem if omitted
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Args, Clone)]
struct ScheduleArgs {
    #[arg(long, default_value_t = 0.05)]
    tbar1: f64,
    #[arg(long, default_value_t = 0.05)]
    tbar2: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the clamped eigenvalue problem: smallest delta with a
    /// nontrivial solution of z_xxxx + lambda z_xx = delta z
    Eigen {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        /// also run the finite-difference oracle and report both values
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// oracle grid size
        #[arg(long, default_value_t = 2000)]
        n: usize,
    },
    /// Boundary coefficient tables for an interval
    Coeffs {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        b: f64,
    },
    /// Dwell-time certificate for a controller configuration
    Certify {
        #[arg(long)]
        controller: u8,
        #[arg(long, default_value_t = 15000.0)]
        alpha1: f64,
        #[arg(long, default_value_t = 15000.0)]
        alpha2: f64,
        #[command(flatten)]
        physics: PhysicsArgs,
        #[command(flatten)]
        schedule: ScheduleArgs,
    },
    /// Exact switched-pair trajectory (CSV t,V1,V2 on stdout)
    Sigma3 {
        #[arg(long, default_value_t = 1.0)]
        v1: f64,
        #[arg(long, default_value_t = 1.0)]
        v2: f64,
        #[arg(long)]
        alpha1: f64,
        #[arg(long)]
        alpha2: f64,
        #[arg(long)]
        delta1: f64,
        #[arg(long)]
        delta2: f64,
        #[command(flatten)]
        schedule: ScheduleArgs,
        #[arg(long, default_value_t = 10)]
        periods: usize,
        #[arg(long, default_value_t = 20)]
        samples: usize,
    },
    /// Worst-case envelope trajectory of the latched-controller comparison
    /// system (CSV t,V1,V2 on stdout, recursion report on stderr)
    Sigma4 {
        #[arg(long, default_value_t = 1.0)]
        v1: f64,
        #[arg(long, default_value_t = 1.0)]
        v2: f64,
        #[arg(long)]
        alpha1: f64,
        #[arg(long)]
        alpha2: f64,
        #[arg(long)]
        delta1: f64,
        #[arg(long)]
        delta2: f64,
        /// interface energy coefficient C
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// latched-law magnitude bound P
        #[arg(long, default_value_t = 3.669)]
        p_bound: f64,
        #[command(flatten)]
        schedule: ScheduleArgs,
        #[arg(long, default_value_t = 20)]
        periods: usize,
    },
    /// Closed V1 envelope over a measurement-free window
    Envelope {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        v1: f64,
        #[arg(long)]
        latched: f64,
        #[arg(long, allow_hyphen_values = true)]
        delta1: f64,
        #[arg(long)]
        delta2: f64,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 3.669)]
        p_bound: f64,
    },
    /// Closed-loop simulation from a JSON/TOML config, with optional
    /// controller/schedule overrides
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// run controller 1 even when the dwell-time conditions fail
        #[arg(long)]
        force: bool,
        /// override the configured mode: open, 1, or 2
        #[arg(long)]
        controller: Option<String>,
        #[arg(long)]
        alpha1: Option<f64>,
        #[arg(long)]
        alpha2: Option<f64>,
        #[arg(long)]
        tbar1: Option<f64>,
        #[arg(long)]
        tbar2: Option<f64>,
    },
    /// One closed-loop run per alpha2 value (comma separated), fanned over
    /// worker threads capped by KSIC_THREADS
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',')]
        alpha2: Vec<f64>,
    },
    /// Run the property-check suite
    Verify {
        #[arg(long, default_value = "fast")]
        level: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVARIANT)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Eigen { lambda, a, b, oracle, tol, n } => {
            let problem = EigenProblem::new(lambda, a, b)?;
            let r = solve_delta_o(&problem, tol)?;
            let mut out = json!({
                "delta_o": r.delta_o,
                "regime": r.regime,
                "bracket": [r.bracket.0, r.bracket.1],
                "residual": r.residual,
            });
            if oracle {
                out["oracle"] = json!(fd_eigen_oracle(&problem, n)?);
            }
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Coeffs { a, b } => {
            anyhow::ensure!(b > a, "need b > a");
            let table = ksic_core::coeffs::czi_table(a, b);
            println!("{}", serde_json::to_string_pretty(&table)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Certify { controller, alpha1, alpha2, physics, schedule } => {
            let sched = PhaseSchedule::new(schedule.tbar1, schedule.tbar2)?;
            let params =
                ControllerParams::derive(physics.lambda1, physics.y, physics.l, alpha1, alpha2, physics.delta)?;
            let sp = SwitchedParams::from(&params);
            let report = match controller {
                1 => decay_certificate(&sp, &sched),
                2 => recursion_certificate(&sp, &sched),
                other => anyhow::bail!("controller must be 1 or 2, got {other}"),
            };
            match report {
                Ok(cert) => {
                    let out = json!({
                        "certificate": cert,
                        "delta": params.delta,
                        "delta1": params.delta1,
                        "delta2": params.delta2,
                        "b_coef": params.b_coef,
                        "c_coef": params.c_coef,
                        "l1_strengthened": params.l1_strengthened,
                    });
                    println!("{}", serde_json::to_string_pretty(&out)?);
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("certificate conditions not met: {e}");
                    Ok(ExitCode::from(EXIT_INVARIANT))
                }
            }
        }
        Command::Sigma3 { v1, v2, alpha1, alpha2, delta1, delta2, schedule, periods, samples } => {
            let sched = PhaseSchedule::new(schedule.tbar1, schedule.tbar2)?;
            let params = SwitchedParams::new(alpha1, alpha2, delta1, delta2);
            let traj = simulate_sigma3(v1, v2, &params, &sched, periods, samples);
            print!("{}", sigma_csv(&traj, "none"));
            Ok(ExitCode::SUCCESS)
        }
        Command::Sigma4 { v1, v2, alpha1, alpha2, delta1, delta2, c, p_bound, schedule, periods } => {
            let sched = PhaseSchedule::new(schedule.tbar1, schedule.tbar2)?;
            let params = SwitchedParams::new(alpha1, alpha2, delta1, delta2);
            let env = EnvelopeParams { delta1, delta2, c_coef: c, p_bound };
            match simulate_sigma4(v1, v2, &params, &env, &sched, periods) {
                Ok(r) => {
                    print!("{}", sigma_csv(&r.trajectory, "none"));
                    eprintln!(
                        "{}",
                        serde_json::to_string_pretty(&json!({
                            "b_o": r.b_o,
                            "q": r.q,
                            "p": r.p,
                            "limit": r.limit,
                            "residual_bound": r.residual_bound,
                            "recursion_violations": r.recursion_violations,
                            "envelope_assumption_violations": r.envelope_assumption_violations,
                        }))?
                    );
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    eprintln!("{e}");
                    Ok(ExitCode::from(EXIT_INVARIANT))
                }
            }
        }
        Command::Envelope { t, v1, latched, delta1, delta2, c, p_bound } => {
            let params = EnvelopeParams { delta1, delta2, c_coef: c, p_bound };
            let r = v1_envelope_bound(t, v1, latched, &params);
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Simulate { config, force, controller, alpha1, alpha2, tbar1, tbar2 } => {
            let mut cfg = ExperimentConfig::from_path(&config).context("loading config")?;
            if force {
                cfg.controller.force = true;
            }
            if let Some(mode) = controller {
                cfg.controller.mode = match mode.as_str() {
                    "open" | "0" => Mode::Open,
                    "1" | "controller1" => Mode::Controller1,
                    "2" | "controller2" => Mode::Controller2,
                    other => anyhow::bail!("controller must be open, 1, or 2, got {other}"),
                };
            }
            if let Some(a) = alpha1 {
                cfg.controller.alpha1 = a;
            }
            if let Some(a) = alpha2 {
                cfg.controller.alpha2 = a;
            }
            if let Some(t) = tbar1 {
                cfg.schedule.tbar1 = t;
            }
            if let Some(t) = tbar2 {
                cfg.schedule.tbar2 = t;
            }
            cfg.validate()?;
            match run_closed_loop(&cfg) {
                Ok(out) => {
                    let summary = json!({
                        "outcome": out.outcome,
                        "config_sha256": out.config_hash,
                        "final_w": out.final_w(),
                        "max_w": out.max_w(),
                        "periods_recorded": out.period_marks.len(),
                        "cfl_warnings": out.cfl_warnings,
                        "certificate": out.certificate,
                        "envelope_check": out.envelope_check,
                    });
                    println!("{}", serde_json::to_string_pretty(&summary)?);
                    match out.outcome {
                        RunOutcome::Completed => Ok(ExitCode::SUCCESS),
                        RunOutcome::BlownUp { .. } => Ok(ExitCode::from(EXIT_BLOWUP)),
                    }
                }
                Err(RunnerError::Invariant(msg)) => {
                    eprintln!("invariant failure: {msg}");
                    Ok(ExitCode::from(EXIT_INVARIANT))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Sweep { config, alpha2 } => {
            anyhow::ensure!(!alpha2.is_empty(), "provide at least one alpha2 value");
            let cfg = ExperimentConfig::from_path(&config).context("loading config")?;
            let results = sweep_alpha2(&cfg, &alpha2);
            let mut any_blowup = false;
            let mut any_err = false;
            let mut rows = Vec::new();
            for (a2, res) in results {
                match res {
                    Ok(out) => {
                        if matches!(out.outcome, RunOutcome::BlownUp { .. }) {
                            any_blowup = true;
                        }
                        rows.push(json!({
                            "alpha2": a2,
                            "outcome": out.outcome,
                            "final_w": out.final_w(),
                            "max_w": out.max_w(),
                        }));
                    }
                    Err(e) => {
                        any_err = true;
                        rows.push(json!({ "alpha2": a2, "error": e.to_string() }));
                    }
                }
            }
            println!("{}", serde_json::to_string_pretty(&json!({ "sweep": rows }))?);
            if any_err {
                Ok(ExitCode::from(EXIT_INVARIANT))
            } else if any_blowup {
                Ok(ExitCode::from(EXIT_BLOWUP))
            } else {
                Ok(ExitCode::SUCCESS)
            }
        }
        Command::Verify { level } => {
            let level = match level.as_str() {
                "fast" => VerifyLevel::Fast,
                "full" => VerifyLevel::Full,
                other => anyhow::bail!("level must be fast or full, got {other}"),
            };
            let report = run_verification_suite(level);
            print!("{}", format_report(&report));
            if report.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_INVARIANT))
            }
        }
    }
}
