//! Sliding-mode control of a two-level quantum system under bounded
//! Hamiltonian uncertainty.
//!
//! The crate designs Lyapunov feedback drives toward the sliding mode |0>,
//! computes robust periods for projective sigma_z measurements, certifies
//! that constant bang-bang perturbations are the worst admissible case, and
//! Monte-Carlo-simulates the full drive/measure/recover protocol.

pub mod bloch;
pub mod dynamics;
pub mod error;
pub mod lyapunov;
pub mod measurement;
pub mod period;
pub mod protocol;
pub mod worst_case;

pub use bloch::{
    failure_probability, sliding_mode_value, BlochVector, HamiltonianCoeffs, PureState,
    SlidingModeConfig,
};
pub use dynamics::{
    exact_step_constant, propagate_bloch, propagate_schrodinger, write_trajectory_csv, Axis,
    IntegratorConfig, TrajectorySample, UncertaintyWaveform,
};
pub use error::{Error, Result};
pub use lyapunov::{
    control_value, design_drive, lyapunov_value, replay, time_optimal_reference, ControlTrace,
    LyapunovConfig, Shaping,
};
pub use measurement::{born_probabilities, measure_z, MeasurementRecord, Outcome, RngStream};
pub use period::{
    log_grid, p_threshold, period_t1, period_t2, select_period, verify_t2_geq_t1, PeriodDesign,
    PeriodInequalityReport, PeriodRule, UncertaintyClass,
};
pub use protocol::{
    hold_phase_failure_curve, run_protocol, NoiseModel, ProtocolConfig, ProtocolOutcome,
    ProtocolRecord, ProtocolStats,
};
pub use worst_case::{
    analytic_bangbang, analytic_costate, brute_force_worst, compare_lemma1, compare_lemma2,
    evaluate_switching, failure_prob_bangbang, integrate_costate, switching_closed_form,
    CostateVector, LemmaReport, WorstCaseResult,
};
