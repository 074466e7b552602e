//! The full measurement-stabilized protocol: an initial drive into the
//! target neighborhood, periodic projective measurements separated by the
//! designed hold period, and a recovery drive after each failure outcome.

use std::io::Write;

use crate::bloch::{HamiltonianCoeffs, PureState, SlidingModeConfig};
use crate::dynamics::{propagate_schrodinger, Axis, IntegratorConfig, UncertaintyWaveform};
use crate::error::{Error, Result};
use crate::lyapunov::{design_drive, replay, ControlTrace, LyapunovConfig};
use crate::measurement::{measure_z, MeasurementRecord, Outcome, RngStream};
use crate::period::{select_period, PeriodDesign, UncertaintyClass};
use crate::worst_case::{random_single_axis_waveform, random_xy_waveform};

/// How the perturbation is drawn for each hold or drive phase of a trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// No perturbation.
    None,
    /// Constant value on one transverse axis.
    ConstantAxis { axis: Axis, value: f64 },
    /// Constant transverse field of magnitude eps0 at angle gamma0.
    ConstantXY { eps0: f64, gamma0: f64 },
    /// A fresh random admissible single-axis waveform per phase.
    RandomSingleAxis { axis: Axis, eps: f64 },
    /// A fresh random admissible two-axis waveform per phase.
    RandomXY { eps: f64 },
    /// Zero-order-hold uniform noise on one axis, resampled every
    /// `resample_step`.
    UniformNoise { axis: Axis, eps: f64, resample_step: f64 },
}

impl NoiseModel {
    /// The worst-case magnitude the model can reach.
    pub fn bound(&self) -> f64 {
        match self {
            NoiseModel::None => 0.0,
            NoiseModel::ConstantAxis { value, .. } => value.abs(),
            NoiseModel::ConstantXY { eps0, .. } => eps0.abs(),
            NoiseModel::RandomSingleAxis { eps, .. } => eps.abs(),
            NoiseModel::RandomXY { eps } => eps.abs(),
            NoiseModel::UniformNoise { eps, .. } => eps.abs(),
        }
    }

    /// Realize one waveform over [0, t_max].
    pub fn realize(&self, t_max: f64, rng: &mut RngStream) -> UncertaintyWaveform {
        match *self {
            NoiseModel::None => UncertaintyWaveform::none(),
            NoiseModel::ConstantAxis { axis, value } => {
                UncertaintyWaveform::constant_axis(axis, value)
            }
            NoiseModel::ConstantXY { eps0, gamma0 } => {
                UncertaintyWaveform::constant_xy(eps0, gamma0)
            }
            NoiseModel::RandomSingleAxis { axis, eps } => {
                random_single_axis_waveform(axis, eps, t_max, rng)
            }
            NoiseModel::RandomXY { eps } => random_xy_waveform(eps, t_max, rng),
            NoiseModel::UniformNoise { axis, eps, resample_step } => {
                UncertaintyWaveform::uniform_noise(axis, eps, resample_step, t_max, rng)
            }
        }
    }
}

/// Full protocol configuration.
#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub smc: SlidingModeConfig,
    pub class: UncertaintyClass,
    pub noise: NoiseModel,
    pub lyapunov: LyapunovConfig,
    pub integrator: IntegratorConfig,
    pub initial: PureState,
    /// Use this period instead of the designed one when set.
    pub period_override: Option<f64>,
    /// Measurements per trial.
    pub n_cycles: usize,
    pub n_trials: usize,
    pub seed: u64,
    /// Apply the perturbation during drive phases too; holds always see it.
    pub noise_during_drive: bool,
}

impl ProtocolConfig {
    pub fn new(smc: SlidingModeConfig, class: UncertaintyClass, noise: NoiseModel) -> Result<Self> {
        if noise.bound() > smc.eps() + 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "noise bound {} exceeds the design bound eps = {}",
                noise.bound(),
                smc.eps()
            )));
        }
        Ok(Self {
            smc,
            class,
            noise,
            lyapunov: LyapunovConfig::sigma_y_only(100.0)?,
            integrator: IntegratorConfig::default(),
            initial: PureState::one(),
            period_override: None,
            n_cycles: 10,
            n_trials: 100,
            seed: 0,
            noise_during_drive: false,
        })
    }

    fn validate(&self) -> Result<()> {
        if self.n_cycles == 0 || self.n_trials == 0 {
            return Err(Error::InvalidConfig(
                "n_cycles and n_trials must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One measurement event with its trial and cycle indices.
#[derive(Debug, Clone, Copy)]
pub struct ProtocolRecord {
    pub trial: usize,
    pub cycle: usize,
    pub record: MeasurementRecord,
    /// The measurement directly follows a recovery drive in the same trial.
    pub after_recovery: bool,
}

/// Aggregate statistics over all trials.
#[derive(Debug, Clone, Copy)]
pub struct ProtocolStats {
    pub total: usize,
    pub failures: usize,
    pub recoveries: usize,
    /// Failures among measurements directly following a recovery.
    pub failures_after_recovery: usize,
    pub measurements_after_recovery: usize,
}

impl ProtocolStats {
    pub fn failure_rate(&self) -> f64 {
        self.failures as f64 / self.total as f64
    }

    /// 95% normal-approximation half-width of the failure rate.
    pub fn ci95(&self) -> f64 {
        let p = self.failure_rate();
        1.96 * (p * (1.0 - p) / self.total as f64).sqrt()
    }

    /// Failure rate excluding measurements directly after a recovery drive.
    pub fn failure_rate_steady(&self) -> f64 {
        let n = self.total - self.measurements_after_recovery;
        if n == 0 {
            return f64::NAN;
        }
        (self.failures - self.failures_after_recovery) as f64 / n as f64
    }
}

/// Everything produced by one protocol run.
#[derive(Debug, Clone)]
pub struct ProtocolOutcome {
    pub design: PeriodDesign,
    /// The period actually used (design or override).
    pub period: f64,
    pub init_trace: ControlTrace,
    pub recovery_trace: ControlTrace,
    pub records: Vec<ProtocolRecord>,
    pub stats: ProtocolStats,
}

impl ProtocolOutcome {
    /// Per-measurement CSV `trial,cycle,t,outcome,pre_failure_prob`.
    pub fn write_records_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "trial,cycle,t,outcome,pre_failure_prob")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{:.12e},{},{:.12e}",
                r.trial,
                r.cycle,
                r.record.t,
                match r.record.outcome {
                    Outcome::Zero => 0,
                    Outcome::One => 1,
                },
                r.record.pre_failure_prob,
            )?;
        }
        Ok(())
    }

    /// Summary CSV `total,failures,rate,ci95`.
    pub fn write_summary_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "total,failures,rate,ci95")?;
        writeln!(
            w,
            "{},{},{:.12e},{:.12e}",
            self.stats.total,
            self.stats.failures,
            self.stats.failure_rate(),
            self.stats.ci95(),
        )?;
        Ok(())
    }
}

/// Run the protocol: design the drive traces on the noise-free model, design
/// the period from the uncertainty class, then per trial (a) drive the
/// initial state into the target neighborhood and measure, (b) repeat
/// `n_cycles` times: hold for one period under the perturbation, measure,
/// and on a One outcome replay the recovery drive and measure again (looping
/// until a Zero outcome). Every hold therefore starts from exactly |0>.
///
/// Record `cycle` is 0 for the post-drive measurement and 1..=n_cycles for
/// the hold measurements; post-recovery measurements keep the cycle index of
/// the failure that triggered them.
pub fn run_protocol(cfg: &ProtocolConfig) -> Result<ProtocolOutcome> {
    cfg.validate()?;
    let design = select_period(&cfg.smc, cfg.class);
    let period = cfg.period_override.unwrap_or(design.period);
    if !(period > 0.0) {
        return Err(Error::InvalidConfig(format!("period must be positive, got {period}")));
    }

    let mut lyap = cfg.lyapunov;
    if lyap.terminal_p.is_none() {
        lyap = lyap.with_terminal_p(cfg.smc.p0())?;
    }
    let (init_trace, _) = design_drive(&cfg.initial, &lyap, &cfg.integrator, &cfg.smc)?;
    let (recovery_trace, _) = design_drive(&PureState::one(), &lyap, &cfg.integrator, &cfg.smc)?;

    let mut records = Vec::with_capacity(cfg.n_trials * (cfg.n_cycles + 1));
    let mut failures = 0;
    let mut recoveries = 0;
    let mut failures_after_recovery = 0;
    let mut measurements_after_recovery = 0;

    for trial in 0..cfg.n_trials {
        let mut rng = RngStream::for_trial(cfg.seed, trial as u64);
        let mut t = 0.0;

        let mut take = |psi: PureState,
                        cycle: usize,
                        after_recovery: bool,
                        t: f64,
                        rng: &mut RngStream,
                        records: &mut Vec<ProtocolRecord>|
         -> (bool, PureState) {
            let (rec, post) = measure_z(&psi, t, rng);
            records.push(ProtocolRecord { trial, cycle, record: rec, after_recovery });
            if after_recovery {
                measurements_after_recovery += 1;
            }
            let failed = rec.outcome == Outcome::One;
            if failed {
                failures += 1;
                if after_recovery {
                    failures_after_recovery += 1;
                }
            }
            (failed, post)
        };

        let psi = run_drive(&cfg.initial, &init_trace, cfg, &mut rng, &mut t)?;
        let (mut failed, mut psi) = take(psi, 0, false, t, &mut rng, &mut records);

        for cycle in 1..=cfg.n_cycles {
            // Recover until a Zero outcome so the next hold starts from |0>.
            while failed {
                recoveries += 1;
                let driven = run_drive(&psi, &recovery_trace, cfg, &mut rng, &mut t)?;
                (failed, psi) = take(driven, cycle - 1, true, t, &mut rng, &mut records);
            }

            let noise = cfg.noise.realize(period, &mut rng);
            let hold = propagate_schrodinger(
                &psi,
                |_| HamiltonianCoeffs::zero(),
                &noise,
                (0.0, period),
                &cfg.integrator,
            )?;
            t += period;
            (failed, psi) = take(hold.last().unwrap().1, cycle, false, t, &mut rng, &mut records);
        }
        while failed {
            recoveries += 1;
            let driven = run_drive(&psi, &recovery_trace, cfg, &mut rng, &mut t)?;
            (failed, psi) = take(driven, cfg.n_cycles, true, t, &mut rng, &mut records);
        }
        let _ = psi;
    }

    let stats = ProtocolStats {
        total: records.len(),
        failures,
        recoveries,
        failures_after_recovery,
        measurements_after_recovery,
    };
    Ok(ProtocolOutcome { design, period, init_trace, recovery_trace, records, stats })
}

fn run_drive(
    psi: &PureState,
    trace: &ControlTrace,
    cfg: &ProtocolConfig,
    rng: &mut RngStream,
    t: &mut f64,
) -> Result<PureState> {
    if trace.samples.is_empty() {
        return Ok(*psi);
    }
    let noise = if cfg.noise_during_drive {
        cfg.noise.realize(trace.duration(), rng)
    } else {
        UncertaintyWaveform::none()
    };
    let traj = replay(psi, trace, &noise, &cfg.integrator)?;
    *t += trace.duration();
    Ok(traj.last().unwrap().1)
}

/// Deterministic failure-probability curve over one hold phase starting from
/// |0> under the given waveform (zero control).
pub fn hold_phase_failure_curve(
    waveform: &UncertaintyWaveform,
    period: f64,
    icfg: &IntegratorConfig,
) -> Result<Vec<(f64, f64)>> {
    crate::worst_case::failure_curve(waveform, period, icfg)
}
