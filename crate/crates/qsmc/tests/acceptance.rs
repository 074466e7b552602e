//! Acceptance suite: one test per release criterion, each printing a single
//! PASS/FAIL line before asserting.

use qsmc::*;

fn report(name: &str, ok: bool) {
    println!("criterion {name}: {}", if ok { "PASS" } else { "FAIL" });
}

fn smc(p0: f64, eps: f64) -> SlidingModeConfig {
    SlidingModeConfig::new(p0, eps).unwrap()
}

#[test]
fn criterion_1_period_formulas() {
    let t1a = period_t1(&smc(0.01, 0.02));
    let t1b = period_t1(&smc(0.01, 0.2));
    let t2 = period_t2(&smc(0.01, 0.2)).unwrap();
    let p = p_threshold(0.2);
    let ok = (t1a - 10.017).abs() <= 1e-3
        && (t1b - 1.002).abs() <= 1e-3
        && (t2 - 1.049).abs() <= 1e-3
        && (p - 0.0385).abs() <= 1e-4;
    report("1 (period formulas)", ok);
    assert!(ok, "t1(0.01,0.02)={t1a} t1(0.01,0.2)={t1b} t2(0.01,0.2)={t2} p'={p}");
}

#[test]
fn criterion_2_lyapunov_drive() {
    let cfg = LyapunovConfig::sigma_y_only(100.0).unwrap();
    let icfg = IntegratorConfig::default();
    let (trace, traj) = design_drive(&PureState::one(), &cfg, &icfg, &smc(0.01, 0.2)).unwrap();
    let final_p = (1.0 - traj.last().unwrap().r.z) / 2.0;
    let ok = (trace.duration() - 0.060).abs() <= 0.005 && final_p <= 0.01 + 1e-9;
    report("2 (Lyapunov drive time)", ok);
    assert!(ok, "duration {} final p {}", trace.duration(), final_p);
}

#[test]
fn criterion_3_time_optimal_reference() {
    let trace = time_optimal_reference(100.0, 1e-4).unwrap();
    let traj =
        replay(&PureState::one(), &trace, &UncertaintyWaveform::none(), &IntegratorConfig::default())
            .unwrap();
    let (t_end, psi) = traj.last().unwrap();
    let fidelity = psi.p_zero();
    let ok = (t_end - 0.030).abs() <= 1e-3 && fidelity >= 0.99;
    report("3 (two-segment reference drive)", ok);
    assert!(ok, "t_end {t_end} terminal fidelity {fidelity}");
}

#[test]
fn criterion_4_worst_case_enumeration() {
    let mut rng = RngStream::new(4);
    let res = brute_force_worst(0.2, 1.0, 10, 200, &mut rng).unwrap();
    let ok = res.n_enumerated == 1024
        && (res.z_f_min - res.analytic_z_f).abs() <= 1e-6
        && res.z_f_min_random >= res.analytic_z_f - 1e-6;
    report("4 (worst-case enumeration)", ok);
    assert!(
        ok,
        "enum {} z_min {} analytic {} random {}",
        res.n_enumerated, res.z_f_min, res.analytic_z_f, res.z_f_min_random
    );
}

#[test]
fn criterion_5_bound_simulation() {
    let icfg = IntegratorConfig::default();
    let cfg = smc(0.01, 0.2);
    let t1 = period_t1(&cfg);
    let t2 = period_t2(&cfg).unwrap();
    let mut rng = RngStream::new(5);
    let mut ok = true;

    // 500 random admissible two-axis waveforms never exceed p0 over [0, T1].
    for i in 0..500 {
        let w = worst_case::random_xy_waveform(0.2, t1, &mut rng);
        let curve = hold_phase_failure_curve(&w, t1, &icfg).unwrap();
        let p_max = curve.iter().map(|(_, p)| *p).fold(0.0, f64::max);
        if p_max > 0.01 + 1e-6 {
            ok = false;
            eprintln!("two-axis waveform {i} exceeded the bound: {p_max}");
        }
    }

    // The saturating case: total Hamiltonian eps I_x (drift cancelled), so
    // p(T1) = (1 - cos(eps T1))/2 = p0 exactly.
    let sat = UncertaintyWaveform::sampled(1.0, vec![0.2], vec![0.0], vec![-1.0]).unwrap();
    let curve = hold_phase_failure_curve(&sat, t1, &icfg).unwrap();
    let p_sat = curve.last().unwrap().1;
    if (p_sat - 0.01).abs() > 1e-6 {
        ok = false;
        eprintln!("saturating two-axis case: p(T1) = {p_sat}");
    }

    // Single-axis waveforms respect p0 over [0, T2]; the constant bang
    // saturates it at T2.
    for i in 0..500 {
        let w = worst_case::random_single_axis_waveform(Axis::X, 0.2, t2, &mut rng);
        let curve = hold_phase_failure_curve(&w, t2, &icfg).unwrap();
        let p_max = curve.iter().map(|(_, p)| *p).fold(0.0, f64::max);
        if p_max > 0.01 + 1e-6 {
            ok = false;
            eprintln!("single-axis waveform {i} exceeded the bound: {p_max}");
        }
    }
    let bang = UncertaintyWaveform::constant_axis(Axis::X, 0.2);
    let curve = hold_phase_failure_curve(&bang, t2, &icfg).unwrap();
    let p_bang = curve.last().unwrap().1;
    if (p_bang - 0.01).abs() > 1e-6 || (p_bang - failure_prob_bangbang(0.2, t2).unwrap()).abs() > 1e-8
    {
        ok = false;
        eprintln!("single-axis saturation: p(T2) = {p_bang}");
    }

    report("5 (bound compliance by simulation)", ok);
    assert!(ok);
}

#[test]
fn criterion_6_period_inequality() {
    let report_grid = verify_t2_geq_t1(&log_grid(0.02, 2.0, 50), 50).unwrap();
    let cfg = smc(0.01, 0.2);
    let gap = period_t2(&cfg).unwrap() - period_t1(&cfg);
    let ok = report_grid.is_ok() && report_grid.min_diff >= -1e-12 && (gap - 0.047).abs() <= 1e-3;
    report("6 (period inequality grid)", ok);
    assert!(ok, "violations {} min_diff {} gap {gap}", report_grid.violations, report_grid.min_diff);
}

#[test]
fn criterion_7_protocol_monte_carlo() {
    let mut cfg = ProtocolConfig::new(
        smc(0.01, 0.2),
        UncertaintyClass::SingleAxis(Axis::X),
        NoiseModel::ConstantAxis { axis: Axis::X, value: 0.2 },
    )
    .unwrap();
    cfg.n_trials = 99;
    cfg.n_cycles = 100;
    cfg.seed = 7;
    let out = run_protocol(&cfg).unwrap();
    let rate = out.stats.failure_rate();
    let ok = out.stats.total >= 9999
        && (out.period - 1.049).abs() <= 1e-3
        && rate <= 0.013
        && out.stats.failures == out.stats.recoveries;
    report("7 (protocol Monte Carlo)", ok);
    assert!(
        ok,
        "total {} failures {} rate {rate} period {}",
        out.stats.total, out.stats.failures, out.period
    );
}

#[test]
fn criterion_8_drive_noise_tolerance() {
    let lyap = LyapunovConfig::sigma_y_only(100.0).unwrap();
    let icfg = IntegratorConfig::default();
    let (trace, _) = design_drive(&PureState::one(), &lyap, &icfg, &smc(0.01, 0.2)).unwrap();

    let spread = |axis: Axis, eps: f64| -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for seed in 0..100 {
            let mut rng = RngStream::for_trial(8, seed);
            let noise =
                UncertaintyWaveform::uniform_noise(axis, eps, icfg.dt, trace.duration(), &mut rng);
            let traj = replay(&PureState::one(), &trace, &noise, &icfg).unwrap();
            let f = traj.last().unwrap().1.p_zero();
            lo = lo.min(f);
            hi = hi.max(f);
        }
        (lo, hi)
    };

    let mut ok = true;
    for (axis, eps, band, label) in [
        (Axis::X, 0.02, 2e-4, "x 0.02"),
        (Axis::Y, 0.02, 2e-4, "y 0.02"),
        (Axis::X, 0.2, 1e-4, "x 0.2"),
        (Axis::Y, 0.2, 1.3e-3, "y 0.2"),
    ] {
        let (lo, hi) = spread(axis, eps);
        if lo < 0.99 - band || hi > 0.99 + band {
            ok = false;
            eprintln!("noise {label}: terminal fidelity range [{lo}, {hi}] outside 0.99 +/- {band}");
        }
    }
    report("8 (drive noise tolerance)", ok);
    assert!(ok);
}

#[test]
fn criterion_9_property_suite() {
    let icfg = IntegratorConfig::default();
    let mut ok = true;

    // Norm conservation over a long noisy propagation.
    let noise = UncertaintyWaveform::constant_xy(0.2, 0.8);
    let traj = propagate_bloch(
        BlochVector::new(0.0, 0.0, 1.0),
        |t: f64| HamiltonianCoeffs::new(0.0, (2.0 * t).sin(), 0.0),
        &noise,
        (0.0, 20.0),
        &icfg,
    )
    .unwrap();
    let drift = traj.iter().map(|s| (s.r.norm() - 1.0).abs()).fold(0.0, f64::max);
    if drift > 1e-6 {
        ok = false;
        eprintln!("norm drift {drift}");
    }

    // Schrodinger and Bloch pictures agree.
    let schro = propagate_schrodinger(
        &PureState::zero(),
        |t: f64| HamiltonianCoeffs::new(0.0, (2.0 * t).sin(), 0.0),
        &noise,
        (0.0, 20.0),
        &icfg,
    )
    .unwrap();
    let disagreement = traj
        .iter()
        .zip(&schro)
        .map(|(b, (_, psi))| {
            let r = psi.to_bloch();
            ((b.r.x - r.x).powi(2) + (b.r.y - r.y).powi(2) + (b.r.z - r.z).powi(2)).sqrt()
        })
        .fold(0.0, f64::max);
    if disagreement > 1e-7 {
        ok = false;
        eprintln!("picture disagreement {disagreement}");
    }

    // RK4 shows 4th-order convergence against the exact rotation.
    let exact = exact_step_constant(
        &BlochVector::new(0.0, 0.0, 1.0),
        &HamiltonianCoeffs::new(0.2, 0.0, 1.0),
        1.0,
    );
    let err = |dt: f64| {
        let cfg = IntegratorConfig::new(dt).unwrap();
        let traj = propagate_bloch(
            BlochVector::new(0.0, 0.0, 1.0),
            |_| HamiltonianCoeffs::zero(),
            &UncertaintyWaveform::constant_axis(Axis::X, 0.2),
            (0.0, 1.0),
            &cfg,
        )
        .unwrap();
        let r = traj.last().unwrap().r;
        ((r.x - exact.x).powi(2) + (r.y - exact.y).powi(2) + (r.z - exact.z).powi(2)).sqrt()
    };
    let ratio = err(2e-3) / err(1e-3);
    if !(8.0..32.0).contains(&ratio) {
        ok = false;
        eprintln!("convergence ratio {ratio}");
    }

    // Lyapunov descent is monotone along the closed loop.
    let lyap = LyapunovConfig::sigma_y_only(100.0).unwrap();
    let (_, closed) = design_drive(&PureState::one(), &lyap, &icfg, &smc(0.01, 0.2)).unwrap();
    let mut prev = f64::INFINITY;
    for s in &closed {
        let v = (1.0 - (1.0 + s.r.z) / 2.0) / 2.0;
        if v > prev + 1e-9 {
            ok = false;
            eprintln!("V increased at t = {}", s.t);
        }
        prev = v;
    }

    // Born-rule chi-square at 99% confidence on a biased state.
    let s = PureState::new(
        num_complex::Complex64::new(0.8, 0.0),
        num_complex::Complex64::new(0.0, 0.6),
    )
    .unwrap();
    let mut rng = RngStream::new(99);
    let n = 100_000;
    let ones = (0..n)
        .filter(|_| matches!(measure_z(&s, 0.0, &mut rng).0.outcome, Outcome::One))
        .count() as f64;
    let (e0, e1) = (n as f64 * 0.64, n as f64 * 0.36);
    let chi2 = (n as f64 - ones - e0).powi(2) / e0 + (ones - e1).powi(2) / e1;
    if chi2 >= 6.635 {
        ok = false;
        eprintln!("chi-square {chi2}");
    }

    // Phase-flip immunity: z-axis uncertainty never leaves the sliding mode.
    let traj = propagate_bloch(
        BlochVector::new(0.0, 0.0, 1.0),
        |_| HamiltonianCoeffs::zero(),
        &UncertaintyWaveform::phase_flip_z(0.2),
        (0.0, 10.0),
        &icfg,
    )
    .unwrap();
    if traj.iter().any(|s| s.r.z < 1.0 - 1e-9) {
        ok = false;
        eprintln!("phase-flip immunity violated");
    }

    // Dominance comparisons hold with zero violations.
    let l1 = compare_lemma1(0.2, 0.0, 2000).unwrap();
    let l1b = compare_lemma1(0.9, 2.1, 2000).unwrap();
    let mut rng = RngStream::new(91);
    let l2 = compare_lemma2(0.2, 20, &mut rng).unwrap();
    if !l1.is_ok(1e-12) || !l1b.is_ok(1e-12) || !l2.is_ok(1e-6) {
        ok = false;
        eprintln!(
            "dominance violations: {} {} {}",
            l1.max_violation, l1b.max_violation, l2.max_violation
        );
    }

    report("9 (property suite)", ok);
    assert!(ok);
}
