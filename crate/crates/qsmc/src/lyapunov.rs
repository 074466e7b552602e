//! Lyapunov feedback design: the distance-based Lyapunov function
//! V = (1 - |<0|psi>|^2)/2, the feedback law derived from it, closed-loop
//! simulation that records an open-loop control trace, and the two-segment
//! bang-bang reference drive.

use std::fmt::Write as _;
use std::path::Path;

use crate::bloch::{HamiltonianCoeffs, PureState, SlidingModeConfig};
use crate::dynamics::{propagate_schrodinger, IntegratorConfig, TrajectorySample, UncertaintyWaveform};
use crate::error::{Error, Result};

/// Shaping function f applied to the feedback argument; must satisfy
/// x f(x) >= 0 so that Vdot <= 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shaping {
    Identity,
    /// Clamp to [-limit, limit].
    Saturation { limit: f64 },
}

impl Shaping {
    fn apply(&self, x: f64) -> f64 {
        match self {
            Shaping::Identity => x,
            Shaping::Saturation { limit } => x.clamp(-limit, *limit),
        }
    }
}

/// Gains and termination settings for the feedback design.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LyapunovConfig {
    pub kx: f64,
    pub ky: f64,
    pub kz: f64,
    pub shaping: Shaping,
    /// Stop threshold on the failure probability; defaults to p0 when None.
    pub terminal_p: Option<f64>,
    pub max_time: f64,
}

impl LyapunovConfig {
    pub fn new(kx: f64, ky: f64, kz: f64) -> Result<Self> {
        if kx < 0.0 || ky < 0.0 || kz < 0.0 || kx + ky + kz == 0.0 {
            return Err(Error::InvalidConfig(format!(
                "gains must be non-negative with at least one positive, got ({kx}, {ky}, {kz})"
            )));
        }
        Ok(Self { kx, ky, kz, shaping: Shaping::Identity, terminal_p: None, max_time: 10.0 })
    }

    /// Actuation through H_u = u sigma_y / 2 only, as in the worked example.
    pub fn sigma_y_only(k: f64) -> Result<Self> {
        Self::new(0.0, k, 0.0)
    }

    pub fn with_terminal_p(mut self, p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidConfig(format!("terminal_p must lie in (0, 1), got {p}")));
        }
        self.terminal_p = Some(p);
        Ok(self)
    }

    pub fn with_max_time(mut self, t: f64) -> Self {
        self.max_time = t;
        self
    }
}

/// V = (1 - |<0|psi>|^2)/2, in [0, 1/2].
pub fn lyapunov_value(state: &PureState) -> f64 {
    0.5 * (1.0 - state.p_zero())
}

/// Feedback values (u_x, u_y, u_z) from
/// u_k = K_k f(Im[exp(i angle<psi|0>) <0|sigma_k|psi>]), with the convention
/// angle<psi|0> = 0 when <psi|0> = 0. Components with K_k = 0 are exactly 0.
pub fn control_value(state: &PureState, cfg: &LyapunovConfig) -> [f64; 3] {
    let ip = state.a0().conj(); // <psi|0>
    let phase = if ip.norm() == 0.0 {
        num_complex::Complex64::ONE
    } else {
        num_complex::Complex64::from_polar(1.0, ip.arg())
    };
    // <0|sigma_x|psi> = a1, <0|sigma_y|psi> = -i a1, <0|sigma_z|psi> = a0.
    let a0 = state.a0();
    let a1 = state.a1();
    let mx = (phase * a1).im;
    let my = (phase * (-num_complex::Complex64::I) * a1).im;
    let mz = (phase * a0).im;
    [
        if cfg.kx == 0.0 { 0.0 } else { cfg.kx * cfg.shaping.apply(mx) },
        if cfg.ky == 0.0 { 0.0 } else { cfg.ky * cfg.shaping.apply(my) },
        if cfg.kz == 0.0 { 0.0 } else { cfg.kz * cfg.shaping.apply(mz) },
    ]
}

/// A sampled open-loop control: one (u_x, u_y, u_z) triple per step of
/// length `dt`, applied with zero-order hold.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlTrace {
    pub dt: f64,
    pub samples: Vec<[f64; 3]>,
}

impl ControlTrace {
    pub fn empty(dt: f64) -> Self {
        Self { dt, samples: Vec::new() }
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 * self.dt
    }

    /// Zero-order-hold lookup; zero outside the recorded span.
    pub fn control_at(&self, t: f64) -> HamiltonianCoeffs {
        if self.samples.is_empty() || t < 0.0 {
            return HamiltonianCoeffs::zero();
        }
        let idx = ((t / self.dt).floor() as usize).min(self.samples.len() - 1);
        let u = self.samples[idx];
        HamiltonianCoeffs::new(u[0], u[1], u[2])
    }

    /// Serialize: header line `dt=<value>`, then `ux uy uz` per step, 12
    /// significant digits.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "dt={:.12e}", self.dt);
        for u in &self.samples {
            let _ = writeln!(out, "{:.12e} {:.12e} {:.12e}", u[0], u[1], u[2]);
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::TraceFormat("empty file".into()))?;
        let dt: f64 = header
            .strip_prefix("dt=")
            .ok_or_else(|| Error::TraceFormat("missing dt= header".into()))?
            .trim()
            .parse()
            .map_err(|e| Error::TraceFormat(format!("bad dt value: {e}")))?;
        let mut samples = Vec::new();
        for line in lines {
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(|v| v.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::TraceFormat(format!("bad sample line {line:?}: {e}")))?;
            if vals.len() != 3 {
                return Err(Error::TraceFormat(format!(
                    "expected 3 values per line, got {}",
                    vals.len()
                )));
            }
            samples.push([vals[0], vals[1], vals[2]]);
        }
        Ok(Self { dt, samples })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// Simulate the closed loop from `initial` with the feedback law, recording
/// the applied control each step; stops at the first step where the failure
/// probability is at or below the terminal threshold.
///
/// Returns the recorded trace (replayable open-loop) and the closed-loop
/// trajectory. The trace duration is T0 (or T1 when `initial` is |1>).
pub fn design_drive(
    initial: &PureState,
    cfg: &LyapunovConfig,
    icfg: &IntegratorConfig,
    smc: &SlidingModeConfig,
) -> Result<(ControlTrace, Vec<TrajectorySample>)> {
    let terminal_p = cfg.terminal_p.unwrap_or(smc.p0());
    let dt = icfg.dt;
    let none = UncertaintyWaveform::none();

    let mut trace = ControlTrace::empty(dt);
    let mut traj = Vec::new();
    let mut psi = *initial;
    let mut t = 0.0;

    loop {
        let u = control_value(&psi, cfg);
        traj.push(TrajectorySample {
            t,
            r: psi.to_bloch(),
            control: HamiltonianCoeffs::new(u[0], u[1], u[2]),
            noise: [0.0; 3],
        });
        if psi.p_one() <= terminal_p {
            return Ok((trace, traj));
        }
        if t >= cfg.max_time {
            return Err(Error::DesignFailure { max_time: cfg.max_time, final_p: psi.p_one() });
        }
        // Hold u constant over the step so the trace replays exactly.
        let held = HamiltonianCoeffs::new(u[0], u[1], u[2]);
        let step = propagate_schrodinger(&psi, |_| held, &none, (t, t + dt), icfg)?;
        psi = step.last().unwrap().1;
        trace.samples.push(u);
        t += dt;
    }
}

/// The two-segment bang-bang reference on the sigma_y channel: -u_max on
/// [0, 1.6/u_max] then +u_max on (1.6/u_max, 3.0/u_max]. For u_max = 100
/// these are the switch time 0.016 and total time 0.030.
pub fn time_optimal_reference(u_max: f64, dt: f64) -> Result<ControlTrace> {
    if !(u_max > 0.0) {
        return Err(Error::InvalidConfig(format!("u_max must be positive, got {u_max}")));
    }
    let t_switch = 1.6 / u_max;
    let t_end = 3.0 / u_max;
    let n1 = (t_switch / dt).round() as usize;
    let n_total = (t_end / dt).round() as usize;
    let mut samples = vec![[0.0, -u_max, 0.0]; n1];
    samples.extend(std::iter::repeat([0.0, u_max, 0.0]).take(n_total - n1));
    Ok(ControlTrace { dt, samples })
}

/// Replay a trace open-loop from `initial` and return the trajectory. Each
/// sample is held constant over its whole step, exactly as it was recorded,
/// so a noise-free replay reproduces the closed-loop trajectory to rounding.
pub fn replay(
    initial: &PureState,
    trace: &ControlTrace,
    noise: &UncertaintyWaveform,
    icfg: &IntegratorConfig,
) -> Result<Vec<(f64, PureState)>> {
    let mut out = vec![(0.0, *initial)];
    let mut psi = *initial;
    for (i, u) in trace.samples.iter().enumerate() {
        let (t0, t1) = (i as f64 * trace.dt, (i + 1) as f64 * trace.dt);
        let held = HamiltonianCoeffs::new(u[0], u[1], u[2]);
        let step = propagate_schrodinger(&psi, |_| held, noise, (t0, t1), icfg)?;
        psi = step.last().unwrap().1;
        out.push((t1, psi));
    }
    Ok(out)
}
