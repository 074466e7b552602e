//! State representations for a two-level system: complex amplitudes, the
//! Bloch vector, Hamiltonian coefficient triples, and the sliding-mode
//! functional built on the eigenstate |0>.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance accepted on |r| when converting a Bloch vector back to a state.
pub const BLOCH_NORM_TOL: f64 = 1e-6;

/// A normalized pure state a0|0> + a1|1>.
///
/// The constructor normalizes, so the invariant |a0|^2 + |a1|^2 = 1 holds for
/// every value of this type. Global phase carries no physics; conversions fix
/// it so that a0 is real and non-negative (a1 real non-negative when a0 = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState {
    a0: Complex64,
    a1: Complex64,
}

impl PureState {
    pub fn new(a0: Complex64, a1: Complex64) -> Result<Self> {
        let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "state amplitudes must be finite and nonzero (norm = {norm})"
            )));
        }
        Ok(Self { a0: a0 / norm, a1: a1 / norm })
    }

    /// The eigenstate |0> of sigma_z (eigenvalue +1); the sliding mode.
    pub fn zero() -> Self {
        Self { a0: Complex64::ONE, a1: Complex64::ZERO }
    }

    /// The eigenstate |1> of sigma_z (eigenvalue -1).
    pub fn one() -> Self {
        Self { a0: Complex64::ZERO, a1: Complex64::ONE }
    }

    /// (|0> + |1>)/sqrt(2).
    pub fn plus() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self { a0: h, a1: h }
    }

    pub fn a0(&self) -> Complex64 {
        self.a0
    }

    pub fn a1(&self) -> Complex64 {
        self.a1
    }

    /// |<0|psi>|^2, the probability of collapsing to |0> under a sigma_z
    /// measurement.
    pub fn p_zero(&self) -> f64 {
        self.a0.norm_sqr()
    }

    /// |<1|psi>|^2, the probability of failure on measurement.
    pub fn p_one(&self) -> f64 {
        self.a1.norm_sqr()
    }

    /// Bloch vector (tr rho sigma_x, tr rho sigma_y, tr rho sigma_z) of
    /// rho = |psi><psi|.
    pub fn to_bloch(&self) -> BlochVector {
        let c = self.a0.conj() * self.a1;
        BlochVector {
            x: 2.0 * c.re,
            y: 2.0 * c.im,
            z: self.a0.norm_sqr() - self.a1.norm_sqr(),
        }
    }

    /// Renormalize in place. Integrators call this every step.
    pub(crate) fn renormalize(&mut self) {
        let norm = (self.a0.norm_sqr() + self.a1.norm_sqr()).sqrt();
        self.a0 /= norm;
        self.a1 /= norm;
    }

    pub(crate) fn from_parts_unchecked(a0: Complex64, a1: Complex64) -> Self {
        Self { a0, a1 }
    }
}

/// Real triple (x, y, z) on (or numerically near) the Bloch sphere surface.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// Reconstruct the pure state with theta = arccos z, phi = atan2(y, x).
    ///
    /// Rejects vectors whose norm deviates from 1 by more than
    /// [`BLOCH_NORM_TOL`] (a mixed or invalid state).
    pub fn to_state(&self) -> Result<PureState> {
        let norm = self.norm();
        if (norm - 1.0).abs() > BLOCH_NORM_TOL {
            return Err(Error::NotOnSphere { norm, tol: BLOCH_NORM_TOL });
        }
        let theta = (self.z / norm).clamp(-1.0, 1.0).acos();
        let a0 = (theta / 2.0).cos();
        let s = (theta / 2.0).sin();
        if a0.abs() < 1e-15 {
            // theta = pi: phase convention picks a1 real non-negative.
            return Ok(PureState::from_parts_unchecked(Complex64::ZERO, Complex64::ONE));
        }
        let phi = self.y.atan2(self.x);
        let a1 = Complex64::from_polar(s, phi);
        Ok(PureState::from_parts_unchecked(Complex64::new(a0, 0.0), a1))
    }

    pub(crate) fn renormalized(self) -> Self {
        let n = self.norm();
        Self { x: self.x / n, y: self.y / n, z: self.z / n }
    }
}

/// Coefficients (cx, cy, cz) multiplying I_x, I_y, I_z in a Hamiltonian
/// c_x I_x + c_y I_y + c_z I_z, with I_k = sigma_k / 2. The free Hamiltonian
/// H0 = I_z contributes cz += 1 when assembling the total generator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct HamiltonianCoeffs {
    pub cx: f64,
    pub cy: f64,
    pub cz: f64,
}

impl HamiltonianCoeffs {
    pub fn new(cx: f64, cy: f64, cz: f64) -> Self {
        Self { cx, cy, cz }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// The free Hamiltonian H0 = I_z.
    pub fn free() -> Self {
        Self { cx: 0.0, cy: 0.0, cz: 1.0 }
    }

    pub fn add(self, other: Self) -> Self {
        Self { cx: self.cx + other.cx, cy: self.cy + other.cy, cz: self.cz + other.cz }
    }

    pub fn norm(&self) -> f64 {
        (self.cx * self.cx + self.cy * self.cy + self.cz * self.cz).sqrt()
    }
}

/// The allowed failure probability p0 and the uncertainty bound eps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlidingModeConfig {
    p0: f64,
    eps: f64,
}

impl SlidingModeConfig {
    /// Requires 0 < p0 < 1 (the endpoints are trivial) and eps > 0.
    pub fn new(p0: f64, eps: f64) -> Result<Self> {
        if !(p0 > 0.0 && p0 < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "allowed failure probability p0 must lie in (0, 1), got {p0}"
            )));
        }
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "uncertainty bound eps must be positive and finite, got {eps}"
            )));
        }
        Ok(Self { p0, eps })
    }

    pub fn p0(&self) -> f64 {
        self.p0
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }
}

/// Sliding-mode functional S = 1 - |<0|psi>|^2, zero exactly on the sliding
/// mode |0>.
pub fn sliding_mode_value(state: &PureState) -> f64 {
    (1.0 - state.p_zero()).clamp(0.0, 1.0)
}

/// Probability (1 - z)/2 that a sigma_z measurement collapses the state with
/// Bloch vector `r` into |1>. Clamped to [0, 1] against integrator drift.
pub fn failure_probability(r: &BlochVector) -> f64 {
    ((1.0 - r.z) / 2.0).clamp(0.0, 1.0)
}

/// True iff the state lies in the sliding mode domain
/// D = { |psi> : |<0|psi>|^2 >= 1 - p0 } (boundary inclusive).
pub fn in_domain(state: &PureState, cfg: &SlidingModeConfig) -> bool {
    state.p_zero() >= 1.0 - cfg.p0()
}
