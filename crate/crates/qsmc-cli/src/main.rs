//! Command-line front end: design measurement periods and drive traces, run
//! the Monte-Carlo protocol, and verify the analytic claims numerically.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 usage or config error,
//! 3 runtime or design failure.

mod config;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qsmc::*;
// The glob brings in the library's one-parameter Result alias; commands use
// the std form.
use std::result::Result;

#[derive(Parser)]
#[command(name = "qsmc", version, about = "Sliding-mode control toolkit for a two-level system")]
struct Cli {
    /// RNG seed for stochastic commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory for CSV, trace and SVG files.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Integrator step; defaults to 1e-4.
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute the robust measurement period for a given uncertainty class.
    DesignPeriod {
        /// Allowed per-measurement failure probability, in (0, 1).
        #[arg(long)]
        p0: f64,
        /// Uncertainty bound.
        #[arg(long)]
        eps: f64,
        /// Uncertainty class: xy (both transverse axes), x or y.
        #[arg(long)]
        class: String,
    },
    /// Design an open-loop drive trace via the Lyapunov feedback law.
    DesignDrive {
        /// Feedback gain on the sigma_y channel.
        #[arg(long, default_value_t = 100.0)]
        k: f64,
        /// Initial state: 0, 1 or plus.
        #[arg(long, default_value = "1")]
        initial: String,
        #[arg(long, default_value_t = 0.01)]
        p0: f64,
        #[arg(long, default_value_t = 0.2)]
        eps: f64,
        /// Stop threshold on the failure probability; defaults to p0.
        #[arg(long)]
        terminal_p: Option<f64>,
        /// Emit the two-segment reference trace instead of the feedback
        /// design.
        #[arg(long)]
        time_optimal: bool,
        /// Control amplitude for --time-optimal.
        #[arg(long, default_value_t = 100.0)]
        umax: f64,
    },
    /// Run the Monte-Carlo drive/measure/recover protocol from a config file.
    RunProtocol {
        /// Path to a `key = value` experiment config.
        config: PathBuf,
    },
    /// Re-derive the analytic claims numerically and report pass/fail.
    Verify {
        /// Reduced grids for a fast smoke run.
        #[arg(long)]
        quick: bool,
        /// Optional spot check: print T2 - T1 for this eps (with --p0).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        p0: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(CmdError { code, message }) => {
            eprintln!("error: {message}");
            code
        }
    };
    ExitCode::from(code)
}

struct CmdError {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> CmdError {
    CmdError { code: 2, message: message.into() }
}

fn runtime(message: impl Into<String>) -> CmdError {
    CmdError { code: 3, message: message.into() }
}

/// Map library errors: bad inputs are usage errors, everything else is a
/// runtime failure.
fn lib_err(e: Error) -> CmdError {
    match e {
        Error::InvalidConfig(_)
        | Error::PeriodDomain { .. }
        | Error::NotOnSphere { .. }
        | Error::TraceFormat(_)
        | Error::NegativeTimeSpan { .. } => usage(e.to_string()),
        other => runtime(other.to_string()),
    }
}

fn run(cli: Cli) -> Result<u8, CmdError> {
    match cli.cmd {
        Cmd::DesignPeriod { p0, eps, class } => cmd_design_period(p0, eps, &class),
        Cmd::DesignDrive { k, initial, p0, eps, terminal_p, time_optimal, umax } => {
            cmd_design_drive(&cli.out, cli.dt, k, &initial, p0, eps, terminal_p, time_optimal, umax)
        }
        Cmd::RunProtocol { config } => cmd_run_protocol(&cli.out, cli.seed, cli.dt, &config),
        Cmd::Verify { quick, eps, p0 } => cmd_verify(cli.seed, quick, eps, p0),
    }
}

fn cmd_design_period(p0: f64, eps: f64, class: &str) -> Result<u8, CmdError> {
    let smc = SlidingModeConfig::new(p0, eps).map_err(lib_err)?;
    let class = config::parse_class(class).map_err(|e| usage(e.to_string()))?;
    let design = select_period(&smc, class);
    println!("T = {:.6}", design.period);
    println!(
        "rule = {}",
        match design.rule {
            PeriodRule::T1Formula => "T1",
            PeriodRule::T2Formula => "T2",
        }
    );
    println!("p_threshold = {:.6}", design.p_threshold);
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_design_drive(
    out: &Path,
    dt: Option<f64>,
    k: f64,
    initial: &str,
    p0: f64,
    eps: f64,
    terminal_p: Option<f64>,
    time_optimal: bool,
    umax: f64,
) -> Result<u8, CmdError> {
    let icfg = IntegratorConfig::new(dt.unwrap_or(1e-4)).map_err(lib_err)?;
    let initial = config::parse_initial(initial).map_err(|e| usage(e.to_string()))?;
    let smc = SlidingModeConfig::new(p0, eps).map_err(lib_err)?;

    let trace = if time_optimal {
        time_optimal_reference(umax, icfg.dt).map_err(lib_err)?
    } else {
        let mut lyap = LyapunovConfig::sigma_y_only(k).map_err(lib_err)?;
        if let Some(p) = terminal_p {
            lyap = lyap.with_terminal_p(p).map_err(lib_err)?;
        }
        design_drive(&initial, &lyap, &icfg, &smc).map_err(lib_err)?.0
    };

    let traj =
        replay(&initial, &trace, &UncertaintyWaveform::none(), &icfg).map_err(lib_err)?;
    let fidelity: Vec<(f64, f64)> = traj.iter().map(|(t, psi)| (*t, psi.p_zero())).collect();
    let uy: Vec<(f64, f64)> = trace
        .samples
        .iter()
        .enumerate()
        .map(|(i, u)| (i as f64 * trace.dt, u[1]))
        .collect();

    std::fs::create_dir_all(out).map_err(|e| runtime(e.to_string()))?;
    trace.save(&out.join("trace.txt")).map_err(lib_err)?;
    write_svg(
        &out.join("probability.svg"),
        svg::line_chart(
            "Probability of the target eigenstate",
            "t",
            "|<0|psi>|^2",
            &[svg::Series { label: "fidelity".into(), points: fidelity }],
        ),
    )?;
    write_svg(
        &out.join("control.svg"),
        svg::line_chart(
            "Control value",
            "t",
            "u(t)",
            &[svg::Series { label: "u_y".into(), points: uy }],
        ),
    )?;
    println!("duration = {:.6}", trace.duration());
    println!(
        "terminal_fidelity = {:.6}",
        traj.last().map(|(_, psi)| psi.p_zero()).unwrap_or(1.0)
    );
    Ok(0)
}

fn cmd_run_protocol(
    out: &Path,
    seed: u64,
    dt: Option<f64>,
    config_path: &Path,
) -> Result<u8, CmdError> {
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| usage(format!("{}: {e}", config_path.display())))?;
    let cfg = config::protocol_from_text(&text, seed, dt).map_err(|e| usage(e.to_string()))?;
    let outcome = run_protocol(&cfg).map_err(lib_err)?;

    std::fs::create_dir_all(out).map_err(|e| runtime(e.to_string()))?;
    let mut records = Vec::new();
    outcome.write_records_csv(&mut records).map_err(lib_err)?;
    std::fs::write(out.join("records.csv"), records).map_err(|e| runtime(e.to_string()))?;
    let mut summary = Vec::new();
    outcome.write_summary_csv(&mut summary).map_err(lib_err)?;
    std::fs::write(out.join("summary.csv"), &summary).map_err(|e| runtime(e.to_string()))?;

    // Per-cycle failure rate across trials.
    let mut per_cycle = vec![(0usize, 0usize); cfg.n_cycles + 1];
    for r in &outcome.records {
        let slot = &mut per_cycle[r.cycle];
        slot.0 += 1;
        if r.record.outcome == Outcome::One {
            slot.1 += 1;
        }
    }
    let points: Vec<(f64, f64)> = per_cycle
        .iter()
        .enumerate()
        .filter(|(_, (n, _))| *n > 0)
        .map(|(c, (n, f))| (c as f64, *f as f64 / *n as f64))
        .collect();
    write_svg(
        &out.join("failure_rate.svg"),
        svg::line_chart(
            "Per-cycle failure rate",
            "cycle",
            "rate",
            &[svg::Series { label: "empirical".into(), points }],
        ),
    )?;

    println!("period = {:.6} ({})", outcome.period, match outcome.design.rule {
        PeriodRule::T1Formula => "T1",
        PeriodRule::T2Formula => "T2",
    });
    println!("total = {}", outcome.stats.total);
    println!("failures = {}", outcome.stats.failures);
    println!("rate = {:.6}", outcome.stats.failure_rate());
    println!("rate_excluding_recovery = {:.6}", outcome.stats.failure_rate_steady());
    println!("ci95 = {:.6}", outcome.stats.ci95());
    Ok(0)
}

fn cmd_verify(
    seed: u64,
    quick: bool,
    eps_spot: Option<f64>,
    p0_spot: Option<f64>,
) -> Result<u8, CmdError> {
    if let (Some(eps), Some(p0)) = (eps_spot, p0_spot) {
        let smc = SlidingModeConfig::new(p0, eps).map_err(lib_err)?;
        let t1 = period_t1(&smc);
        let t2 = period_t2(&smc).map_err(lib_err)?;
        println!("T1 = {t1:.6}  T2 = {t2:.6}  gap = {:.6}", t2 - t1);
    }

    let (grid_n, n_p0, n_seg, n_rand, n_lemma, n_seeds) =
        if quick { (10, 10, 6, 20, 3, 10) } else { (50, 50, 8, 100, 10, 100) };
    let mut all_ok = true;
    let mut check = |name: &str, ok: bool| {
        println!("check {name}: {}", if ok { "pass" } else { "FAIL" });
        all_ok &= ok;
    };

    let report = verify_t2_geq_t1(&log_grid(0.02, 2.0, grid_n), n_p0).map_err(lib_err)?;
    check("period inequality T2 >= T1", report.is_ok());

    let l1 = compare_lemma1(0.2, 0.0, 2000).map_err(lib_err)?;
    let l1b = compare_lemma1(0.9, 2.1, 2000).map_err(lib_err)?;
    check("dominance of the drifted trajectory (closed form)", l1.is_ok(1e-12) && l1b.is_ok(1e-12));

    let mut rng = RngStream::new(seed);
    let l2 = compare_lemma2(0.2, n_lemma, &mut rng).map_err(lib_err)?;
    check("dominance of the drifted trajectory (simulated)", l2.is_ok(1e-6));

    let worst = brute_force_worst(0.2, 1.0, n_seg, n_rand, &mut rng).map_err(lib_err)?;
    check("constant bang-bang is the worst case", worst.gap() >= -1e-6);

    let icfg = IntegratorConfig::default();
    let lyap = LyapunovConfig::sigma_y_only(100.0).map_err(lib_err)?;
    let smc = SlidingModeConfig::new(0.01, 0.2).map_err(lib_err)?;
    let (trace, _) = design_drive(&PureState::one(), &lyap, &icfg, &smc).map_err(lib_err)?;
    let mut noise_ok = true;
    for (axis, eps, band) in
        [(Axis::X, 0.02, 2e-4), (Axis::Y, 0.02, 2e-4), (Axis::X, 0.2, 1e-4), (Axis::Y, 0.2, 1.3e-3)]
    {
        for trial in 0..n_seeds {
            let mut rng = RngStream::for_trial(seed, trial);
            let noise =
                UncertaintyWaveform::uniform_noise(axis, eps, icfg.dt, trace.duration(), &mut rng);
            let traj = replay(&PureState::one(), &trace, &noise, &icfg).map_err(lib_err)?;
            let f = traj.last().unwrap().1.p_zero();
            noise_ok &= (f - 0.99).abs() <= band;
        }
    }
    check("drive noise tolerance bands", noise_ok);

    Ok(if all_ok { 0 } else { 1 })
}

fn write_svg(path: &Path, content: String) -> Result<(), CmdError> {
    std::fs::write(path, content).map_err(|e| runtime(format!("{}: {e}", path.display())))
}
