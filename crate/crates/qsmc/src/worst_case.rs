//! Certification that constant bang-bang uncertainty is the worst case:
//! analytic comparison trajectories, costate integration, the switching
//! function of the optimal-control argument, and brute-force waveform
//! searches used as independent oracles.

use std::io::Write;

use rand::Rng;

use crate::bloch::{failure_probability, BlochVector, HamiltonianCoeffs};
use crate::dynamics::{
    exact_step_constant, propagate_bloch, Axis, IntegratorConfig, TrajectorySample,
    UncertaintyWaveform,
};
use crate::error::{Error, Result};
use crate::measurement::RngStream;

/// Costate (Lagrange multiplier) vector of the Pontryagin analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostateVector {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
}

/// Closed-form trajectory from |0> under H = I_z + eps_bar I_x with constant
/// eps_bar (the bang waveform): a rotation about (eps_bar, 0, 1).
pub fn analytic_bangbang(eps_bar: f64, t: f64) -> Result<BlochVector> {
    if eps_bar == 0.0 {
        return Err(Error::InvalidConfig("eps_bar must be nonzero".into()));
    }
    let eps2 = eps_bar * eps_bar;
    let omega = (1.0 + eps2).sqrt();
    let (sin, cos) = (omega * t).sin_cos();
    Ok(BlochVector::new(
        -eps_bar / (1.0 + eps2) * (cos - 1.0),
        -eps_bar / omega * sin,
        eps2 / (1.0 + eps2) * cos + 1.0 / (1.0 + eps2),
    ))
}

/// Failure probability along the bang trajectory:
/// p(t) = eps^2/(1+eps^2) * (1 - cos(omega t)) / 2, valid on [0, pi/omega].
pub fn failure_prob_bangbang(eps: f64, t: f64) -> Result<f64> {
    let eps2 = eps * eps;
    let omega = (1.0 + eps2).sqrt();
    if !(0.0..=std::f64::consts::PI / omega + 1e-12).contains(&t) {
        return Err(Error::InvalidConfig(format!(
            "t = {t} outside the formula's validity window [0, {}]",
            std::f64::consts::PI / omega
        )));
    }
    Ok(eps2 / (1.0 + eps2) * (1.0 - (omega * t).cos()) / 2.0)
}

/// Closed-form costate for constant eps_bar with terminal condition
/// lambda(t_f) = (0, 0, 1).
pub fn analytic_costate(eps_bar: f64, t: f64, t_f: f64) -> CostateVector {
    let eps2 = eps_bar * eps_bar;
    let omega = (1.0 + eps2).sqrt();
    let (sin, cos) = (omega * (t_f - t)).sin_cos();
    CostateVector {
        l1: -eps_bar / (1.0 + eps2) * cos + eps_bar / (1.0 + eps2),
        l2: eps_bar / omega * sin,
        l3: eps2 / (1.0 + eps2) * cos + 1.0 / (1.0 + eps2),
    }
}

/// Integrate the costate equation lambdadot = c(t) x lambda backwards from
/// lambda(t_f) = (0, 0, 1). Returns samples in ascending time order.
pub fn integrate_costate(
    waveform: &UncertaintyWaveform,
    t_f: f64,
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, CostateVector)>> {
    waveform.validate()?;
    // Mirror the forward integrator's time grid exactly (same accumulation
    // arithmetic) so switching-function evaluation can zip samples by index.
    let mut times = vec![0.0_f64];
    let mut t = 0.0;
    while t < t_f - 1e-15 {
        let dt = cfg.dt.min(t_f - t);
        t += dt;
        times.push(t);
    }

    let rhs = |tt: f64, l: &[f64; 3]| {
        let e = waveform.eval(tt);
        let c = [e[0], e[1], e[2] + 1.0];
        [
            c[1] * l[2] - c[2] * l[1],
            c[2] * l[0] - c[0] * l[2],
            c[0] * l[1] - c[1] * l[0],
        ]
    };

    let mut l = [0.0_f64, 0.0, 1.0];
    let mut out = Vec::with_capacity(times.len());
    out.push((*times.last().unwrap(), CostateVector { l1: l[0], l2: l[1], l3: l[2] }));
    for i in (0..times.len() - 1).rev() {
        let t1 = times[i + 1];
        let h = times[i] - t1;
        let step = |l: &[f64; 3], k: &[f64; 3], s: f64| {
            [l[0] + s * k[0], l[1] + s * k[1], l[2] + s * k[2]]
        };
        let k1 = rhs(t1, &l);
        let k2 = rhs(t1 + h / 2.0, &step(&l, &k1, h / 2.0));
        let k3 = rhs(t1 + h / 2.0, &step(&l, &k2, h / 2.0));
        let k4 = rhs(t1 + h, &step(&l, &k3, h));
        for j in 0..3 {
            l[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        let norm = (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]).sqrt();
        for v in &mut l {
            *v /= norm;
        }
        out.push((times[i], CostateVector { l1: l[0], l2: l[1], l3: l[2] }));
    }
    out.reverse();
    Ok(out)
}

/// Switching function h(t) = lambda3(t) y_t - lambda2(t) z_t on a shared
/// time grid.
pub fn evaluate_switching(
    states: &[TrajectorySample],
    costates: &[(f64, CostateVector)],
) -> Vec<(f64, f64)> {
    states
        .iter()
        .zip(costates)
        .map(|(s, (t, l))| (*t, l.l3 * s.r.y - l.l2 * s.r.z))
        .collect()
}

/// Closed form of the switching function for constant eps_bar:
/// -eps_bar/omega^3 [sin(omega t) + eps^2 sin(omega t_f) + sin(omega (t_f - t))].
pub fn switching_closed_form(eps_bar: f64, t: f64, t_f: f64) -> f64 {
    let eps2 = eps_bar * eps_bar;
    let omega = (1.0 + eps2).sqrt();
    -eps_bar / omega.powi(3)
        * ((omega * t).sin() + eps2 * (omega * t_f).sin() + (omega * (t_f - t)).sin())
}

/// Result of a worst-case search over admissible waveforms.
#[derive(Debug, Clone)]
pub struct WorstCaseResult {
    /// Minimal terminal z found by the search.
    pub z_f_min: f64,
    /// Sign pattern of the best enumerated bang-bang waveform.
    pub best_pattern: Vec<f64>,
    /// Terminal z of the constant bang waveform from the closed form.
    pub analytic_z_f: f64,
    /// Minimal terminal z over the randomly sampled continuous waveforms.
    pub z_f_min_random: f64,
    pub n_enumerated: usize,
    pub n_random: usize,
}

impl WorstCaseResult {
    /// Gap between the searched minimum and the analytic bang value;
    /// non-negative (up to tolerance) iff constant bang-bang is optimal.
    pub fn gap(&self) -> f64 {
        self.z_f_min.min(self.z_f_min_random) - self.analytic_z_f
    }

    pub fn write_csv<W: Write>(&self, eps: f64, t_f: f64, w: &mut W) -> Result<()> {
        writeln!(w, "t_f,eps,n_segments,z_min_search,z_analytic,gap")?;
        writeln!(
            w,
            "{:.12e},{:.12e},{},{:.12e},{:.12e},{:.12e}",
            t_f,
            eps,
            self.best_pattern.len(),
            self.z_f_min.min(self.z_f_min_random),
            self.analytic_z_f,
            self.gap()
        )?;
        Ok(())
    }
}

/// Terminal z after applying piecewise-constant values `values` on equal
/// segments of [0, t_f], starting from |0>. Each segment uses the exact
/// rotation, so the result is exact up to floating point.
fn bangbang_terminal_z(values: &[f64], t_f: f64) -> f64 {
    let seg = t_f / values.len() as f64;
    let mut r = BlochVector::new(0.0, 0.0, 1.0);
    for &v in values {
        r = exact_step_constant(&r, &HamiltonianCoeffs::new(v, 0.0, 1.0), seg);
    }
    r.z
}

/// Enumerate all 2^n_segments bang-bang waveforms with values in
/// {-eps, +eps} on equal segments of [0, t_f] (exact per-segment
/// propagation), plus `n_random` random admissible waveforms integrated with
/// RK4, and return the minimal terminal z found.
pub fn brute_force_worst(
    eps: f64,
    t_f: f64,
    n_segments: u32,
    n_random: usize,
    rng: &mut RngStream,
) -> Result<WorstCaseResult> {
    if n_segments > 20 {
        return Err(Error::InvalidConfig(format!(
            "n_segments = {n_segments} would enumerate 2^{n_segments} waveforms; cap is 20"
        )));
    }
    let omega = (1.0 + eps * eps).sqrt();
    if t_f > std::f64::consts::PI / omega + 1e-12 {
        return Err(Error::InvalidConfig(format!(
            "t_f = {t_f} beyond the monotone window pi/omega = {}",
            std::f64::consts::PI / omega
        )));
    }

    let n = n_segments as usize;
    let mut z_min = f64::INFINITY;
    let mut best = vec![0.0; n];
    for mask in 0u32..(1 << n) {
        let values: Vec<f64> =
            (0..n).map(|i| if mask >> i & 1 == 1 { eps } else { -eps }).collect();
        let z = bangbang_terminal_z(&values, t_f);
        if z < z_min {
            z_min = z;
            best = values;
        }
    }

    let icfg = IntegratorConfig::default();
    let mut z_min_random = f64::INFINITY;
    for _ in 0..n_random {
        let w = random_single_axis_waveform(Axis::X, eps, t_f, rng);
        let traj = propagate_bloch(
            BlochVector::new(0.0, 0.0, 1.0),
            |_| HamiltonianCoeffs::zero(),
            &w,
            (0.0, t_f),
            &icfg,
        )?;
        z_min_random = z_min_random.min(traj.last().unwrap().r.z);
    }

    Ok(WorstCaseResult {
        z_f_min: z_min,
        best_pattern: best,
        analytic_z_f: analytic_bangbang(eps, t_f)?.z,
        z_f_min_random: z_min_random,
        n_enumerated: 1 << n,
        n_random,
    })
}

/// A random admissible single-axis waveform |eps(t)| <= eps on [0, t_f].
/// Three families: bang-bang with random switch times, zero-order-hold
/// uniform noise, and a sampled sinusoid inside the bound.
pub fn random_single_axis_waveform(
    axis: Axis,
    eps: f64,
    t_f: f64,
    rng: &mut RngStream,
) -> UncertaintyWaveform {
    match rng.rng().gen_range(0..3) {
        0 => {
            let n_switch = rng.rng().gen_range(1..=6);
            let mut segments = Vec::with_capacity(n_switch);
            let mut sign = if rng.rng().gen_bool(0.5) { 1.0 } else { -1.0 };
            for _ in 0..n_switch {
                segments.push((rng.rng().gen_range(0.0..t_f), sign));
                sign = -sign;
            }
            UncertaintyWaveform::bangbang(axis, eps, &segments)
        }
        1 => UncertaintyWaveform::uniform_noise(axis, eps, t_f / 100.0, t_f, rng),
        _ => {
            let freq = rng.rng().gen_range(0.5..20.0);
            let phase = rng.rng().gen_range(0.0..std::f64::consts::TAU);
            let amp = eps * rng.rng().gen_range(0.2..=1.0);
            let dt = t_f / 2000.0;
            let n = 2001;
            let vals: Vec<f64> =
                (0..n).map(|i| amp * (freq * i as f64 * dt + phase).sin()).collect();
            let zeros = vec![0.0; n];
            let (ex, ey) = match axis {
                Axis::X => (vals, zeros),
                Axis::Y => (zeros, vals),
            };
            UncertaintyWaveform::sampled(dt, ex, ey, vec![0.0; n]).expect("nonempty samples")
        }
    }
}

/// A random admissible two-axis waveform with
/// sqrt(eps_x^2 + eps_y^2) <= eps: either a rotating saturated direction, a
/// piecewise-constant random direction, or independent uniform noise scaled
/// into the disc.
pub fn random_xy_waveform(eps: f64, t_f: f64, rng: &mut RngStream) -> UncertaintyWaveform {
    let dt = t_f / 1000.0;
    let n = 1001;
    match rng.rng().gen_range(0..3) {
        0 => {
            // Saturated direction rotating at a random rate.
            let rate = rng.rng().gen_range(-30.0..30.0);
            let gamma0 = rng.rng().gen_range(0.0..std::f64::consts::TAU);
            let mut ex = Vec::with_capacity(n);
            let mut ey = Vec::with_capacity(n);
            for i in 0..n {
                let gamma = gamma0 + rate * i as f64 * dt;
                ex.push(eps * gamma.cos());
                ey.push(eps * gamma.sin());
            }
            UncertaintyWaveform::sampled(dt, ex, ey, vec![0.0; n]).expect("nonempty")
        }
        1 => {
            // Piecewise-constant random magnitude and direction.
            let n_seg = rng.rng().gen_range(1..=8);
            let mut ex = Vec::with_capacity(n);
            let mut ey = Vec::with_capacity(n);
            let seg_len = n / n_seg + 1;
            for _ in 0..n_seg {
                let m = eps * rng.rng().gen_range(0.0..=1.0_f64).sqrt();
                let g = rng.rng().gen_range(0.0..std::f64::consts::TAU);
                for _ in 0..seg_len {
                    if ex.len() < n {
                        ex.push(m * g.cos());
                        ey.push(m * g.sin());
                    }
                }
            }
            UncertaintyWaveform::sampled(dt, ex, ey, vec![0.0; n]).expect("nonempty")
        }
        _ => {
            // Uniform noise in the disc of radius eps.
            let mut ex = Vec::with_capacity(n);
            let mut ey = Vec::with_capacity(n);
            for _ in 0..n {
                loop {
                    let a = rng.rng().gen_range(-eps..=eps);
                    let b = rng.rng().gen_range(-eps..=eps);
                    if a * a + b * b <= eps * eps {
                        ex.push(a);
                        ey.push(b);
                        break;
                    }
                }
            }
            UncertaintyWaveform::sampled(dt, ex, ey, vec![0.0; n]).expect("nonempty")
        }
    }
}

/// Outcome of a dominance comparison on a grid.
#[derive(Debug, Clone, Copy)]
pub struct LemmaReport {
    pub n_checked: usize,
    /// max over the grid of (z_B - z_A); dominance means <= tolerance.
    pub max_violation: f64,
}

impl LemmaReport {
    pub fn is_ok(&self, tol: f64) -> bool {
        self.max_violation <= tol
    }
}

/// Compare the closed-form z-trajectories of H_A = I_z + eps0 cos(gamma0) I_x
/// + eps0 sin(gamma0) I_y against H_B without the I_z part on
/// [0, pi/|eps0|]: dominance z_A >= z_B.
pub fn compare_lemma1(eps0: f64, gamma0: f64, n_grid: usize) -> Result<LemmaReport> {
    if eps0 == 0.0 {
        return Err(Error::InvalidConfig("eps0 must be nonzero".into()));
    }
    let _ = gamma0; // both closed-form z components are independent of gamma0
    let eps2 = eps0 * eps0;
    let omega0 = (1.0 + eps2).sqrt();
    let t_max = std::f64::consts::PI / eps0.abs();
    let mut max_violation = f64::NEG_INFINITY;
    for i in 0..=n_grid {
        let t = t_max * i as f64 / n_grid as f64;
        let z_a = eps2 / (1.0 + eps2) * (omega0 * t).cos() + 1.0 / (1.0 + eps2);
        let z_b = (eps0 * t).cos();
        max_violation = max_violation.max(z_b - z_a);
    }
    Ok(LemmaReport { n_checked: n_grid + 1, max_violation })
}

/// Simulate z_A under H = I_z + eps(t) I_x for `n_waveforms` random
/// admissible waveforms and compare against z_B = cos(eps t) on [0, pi/eps]:
/// dominance z_A >= z_B.
pub fn compare_lemma2(eps: f64, n_waveforms: usize, rng: &mut RngStream) -> Result<LemmaReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidConfig(format!("eps must be positive, got {eps}")));
    }
    let t_max = std::f64::consts::PI / eps;
    let icfg = IntegratorConfig::default();
    let mut max_violation = f64::NEG_INFINITY;
    let mut n_checked = 0;
    for _ in 0..n_waveforms {
        let w = random_single_axis_waveform(Axis::X, eps, t_max, rng);
        let traj = propagate_bloch(
            BlochVector::new(0.0, 0.0, 1.0),
            |_| HamiltonianCoeffs::zero(),
            &w,
            (0.0, t_max),
            &icfg,
        )?;
        for s in &traj {
            max_violation = max_violation.max((eps * s.t).cos() - s.r.z);
            n_checked += 1;
        }
    }
    Ok(LemmaReport { n_checked, max_violation })
}

/// Deterministic failure-probability curve p(t) = (1 - z_t)/2 from |0>
/// under the free Hamiltonian plus the given waveform.
pub fn failure_curve(
    waveform: &UncertaintyWaveform,
    t_max: f64,
    icfg: &IntegratorConfig,
) -> Result<Vec<(f64, f64)>> {
    let traj = propagate_bloch(
        BlochVector::new(0.0, 0.0, 1.0),
        |_| HamiltonianCoeffs::zero(),
        waveform,
        (0.0, t_max),
        icfg,
    )?;
    Ok(traj.iter().map(|s| (s.t, failure_probability(&s.r))).collect())
}
