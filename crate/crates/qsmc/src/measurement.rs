//! Projective sigma_z measurement: Born-rule sampling, collapse, and the
//! deterministic RNG streams the Monte-Carlo layers draw from.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::bloch::PureState;

/// Outcome of a sigma_z measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// Collapse into |0> (eigenvalue +1).
    Zero,
    /// Collapse into |1> (eigenvalue -1): a failure.
    One,
}

/// A recorded measurement event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub t: f64,
    pub outcome: Outcome,
    /// Failure probability |<1|psi>|^2 of the pre-measurement state.
    pub pre_failure_prob: f64,
}

/// A seeded, splittable random stream. Trial `i` of a Monte-Carlo run draws
/// from an independent stream derived from (seed, i); identical (seed, i)
/// reproduces the identical sequence.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha12Rng::seed_from_u64(seed) }
    }

    /// Independent stream for one Monte-Carlo trial.
    pub fn for_trial(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(trial.wrapping_add(1));
        Self { rng }
    }

    pub fn next_f64(&mut self) -> f64 {
        self.rng.gen::<f64>()
    }

    pub(crate) fn rng(&mut self) -> &mut ChaCha12Rng {
        &mut self.rng
    }
}

/// Born probabilities (p_zero, p_one) = (|a0|^2, |a1|^2).
pub fn born_probabilities(state: &PureState) -> (f64, f64) {
    (state.p_zero(), state.p_one())
}

/// Perform a projective sigma_z measurement at time `t`: the outcome is One
/// with probability |a1|^2 and the returned state is exactly |0> or |1>.
pub fn measure_z(state: &PureState, t: f64, rng: &mut RngStream) -> (MeasurementRecord, PureState) {
    let p_one = state.p_one();
    let outcome = if rng.next_f64() < p_one { Outcome::One } else { Outcome::Zero };
    let post = match outcome {
        Outcome::Zero => PureState::zero(),
        Outcome::One => PureState::one(),
    };
    (MeasurementRecord { t, outcome, pre_failure_prob: p_one }, post)
}
