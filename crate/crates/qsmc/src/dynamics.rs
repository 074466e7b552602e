//! Time evolution under H = H0 + H_u + H_Delta: a fixed-step RK4 integrator
//! on both the Bloch and Schrodinger representations, and an exact propagator
//! for piecewise-constant Hamiltonians.
//!
//! The Bloch equation is rdot = c x r with c = (cx, cy, cz) summing control,
//! uncertainty and the free part (cz includes the constant 1 from H0 = I_z).

use std::io::Write;

use num_complex::Complex64;

use crate::bloch::{BlochVector, HamiltonianCoeffs, PureState};
use crate::error::{Error, Result};
use crate::measurement::RngStream;
use rand::Rng;

/// Transverse axis carrying a single-axis uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Fixed-step integrator settings. The default step matches the worked
/// example's delta t = 1e-4.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub dt: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { dt: 1e-4 }
    }
}

impl IntegratorConfig {
    pub fn new(dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidConfig(format!("dt must be positive, got {dt}")));
        }
        Ok(Self { dt })
    }
}

/// One sampled point of a trajectory: time, Bloch vector, the control
/// coefficients and the uncertainty values acting at that time.
#[derive(Debug, Clone, Copy)]
pub struct TrajectorySample {
    pub t: f64,
    pub r: BlochVector,
    pub control: HamiltonianCoeffs,
    pub noise: [f64; 3],
}

#[derive(Debug, Clone)]
enum WaveformKind {
    None,
    /// Constant eps0 (cos gamma0 I_x + sin gamma0 I_y).
    ConstantXY { eps0: f64, gamma0: f64 },
    /// Constant value on the z axis only (phase-flip type).
    ConstantZ { eps_z: f64 },
    /// Piecewise-constant values on a single transverse axis; `ends[i]` is
    /// the end time of segment i.
    PiecewiseAxis { axis: Axis, ends: Vec<f64>, values: Vec<f64> },
    /// Zero-order-hold samples on all three axes with uniform spacing `dt`.
    Sampled { dt: f64, ex: Vec<f64>, ey: Vec<f64>, ez: Vec<f64> },
}

/// A realized perturbation H_Delta = ex(t) I_x + ey(t) I_y + ez(t) I_z with
/// sqrt(ex^2 + ey^2 + ez^2) <= bound at every time.
///
/// Stochastic waveforms (uniform noise) are realized into samples at
/// construction time from an explicit [`RngStream`], so evaluation and
/// propagation stay deterministic and pure.
#[derive(Debug, Clone)]
pub struct UncertaintyWaveform {
    bound: f64,
    kind: WaveformKind,
}

impl UncertaintyWaveform {
    /// No uncertainty (eps = 0).
    pub fn none() -> Self {
        Self { bound: 0.0, kind: WaveformKind::None }
    }

    /// Constant transverse field eps0 at angle gamma0 in the x-y plane.
    pub fn constant_xy(eps0: f64, gamma0: f64) -> Self {
        Self { bound: eps0.abs(), kind: WaveformKind::ConstantXY { eps0, gamma0 } }
    }

    /// Constant single-axis value (the bang waveform eps(t) = eps_bar).
    pub fn constant_axis(axis: Axis, value: f64) -> Self {
        Self {
            bound: value.abs(),
            kind: WaveformKind::PiecewiseAxis {
                axis,
                ends: vec![f64::INFINITY],
                values: vec![value],
            },
        }
    }

    /// Constant phase-flip perturbation eps_z I_z.
    pub fn phase_flip_z(eps_z: f64) -> Self {
        Self { bound: eps_z.abs(), kind: WaveformKind::ConstantZ { eps_z } }
    }

    /// Bang-bang waveform on one axis: `segments` lists (duration, sign),
    /// each taking the value sign * eps.
    pub fn bangbang(axis: Axis, eps: f64, segments: &[(f64, f64)]) -> Self {
        let mut ends = Vec::with_capacity(segments.len());
        let mut values = Vec::with_capacity(segments.len());
        let mut t = 0.0;
        for &(dur, sign) in segments {
            t += dur;
            ends.push(t);
            values.push(sign.signum() * eps);
        }
        Self { bound: eps.abs(), kind: WaveformKind::PiecewiseAxis { axis, ends, values } }
    }

    /// Uniform noise on [-eps, eps] along one axis, resampled every
    /// `resample_step` (zero-order hold), realized over [0, t_max].
    pub fn uniform_noise(
        axis: Axis,
        eps: f64,
        resample_step: f64,
        t_max: f64,
        rng: &mut RngStream,
    ) -> Self {
        let n = (t_max / resample_step).ceil() as usize + 1;
        let samples: Vec<f64> = (0..n).map(|_| rng.rng().gen_range(-eps..=eps)).collect();
        let (ex, ey) = match axis {
            Axis::X => (samples, vec![0.0; n]),
            Axis::Y => (vec![0.0; n], samples),
        };
        Self {
            bound: eps.abs(),
            kind: WaveformKind::Sampled { dt: resample_step, ex, ey, ez: vec![0.0; n] },
        }
    }

    /// Arbitrary sampled waveform (zero-order hold at spacing `dt`).
    pub fn sampled(dt: f64, ex: Vec<f64>, ey: Vec<f64>, ez: Vec<f64>) -> Result<Self> {
        let n = ex.len();
        if ey.len() != n || ez.len() != n || n == 0 {
            return Err(Error::InvalidConfig(
                "sampled waveform needs equal-length nonempty component vectors".into(),
            ));
        }
        let bound = (0..n)
            .map(|i| (ex[i] * ex[i] + ey[i] * ey[i] + ez[i] * ez[i]).sqrt())
            .fold(0.0, f64::max);
        Ok(Self { bound, kind: WaveformKind::Sampled { dt, ex, ey, ez } })
    }

    /// The bound eps on sqrt(ex^2 + ey^2 + ez^2).
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// Override the nominal bound (e.g. to declare a sampled waveform
    /// admissible for a larger eps). Fails if any sample exceeds it.
    pub fn with_bound(mut self, bound: f64) -> Result<Self> {
        self.bound = bound;
        self.validate()?;
        Ok(self)
    }

    /// Check the Euclidean bound at every sample point.
    pub fn validate(&self) -> Result<()> {
        match &self.kind {
            WaveformKind::None => Ok(()),
            WaveformKind::ConstantXY { eps0, .. } => {
                check_bound(eps0.abs(), self.bound, 0.0)
            }
            WaveformKind::ConstantZ { eps_z } => check_bound(eps_z.abs(), self.bound, 0.0),
            WaveformKind::PiecewiseAxis { values, ends, .. } => {
                for (v, t) in values.iter().zip(ends) {
                    check_bound(v.abs(), self.bound, *t)?;
                }
                Ok(())
            }
            WaveformKind::Sampled { dt, ex, ey, ez } => {
                for i in 0..ex.len() {
                    let m = (ex[i] * ex[i] + ey[i] * ey[i] + ez[i] * ez[i]).sqrt();
                    check_bound(m, self.bound, i as f64 * dt)?;
                }
                Ok(())
            }
        }
    }

    /// The perturbation coefficients (ex, ey, ez) at time t.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        match &self.kind {
            WaveformKind::None => [0.0, 0.0, 0.0],
            WaveformKind::ConstantXY { eps0, gamma0 } => {
                [eps0 * gamma0.cos(), eps0 * gamma0.sin(), 0.0]
            }
            WaveformKind::ConstantZ { eps_z } => [0.0, 0.0, *eps_z],
            WaveformKind::PiecewiseAxis { axis, ends, values } => {
                let idx = ends.partition_point(|&end| end <= t).min(values.len() - 1);
                match axis {
                    Axis::X => [values[idx], 0.0, 0.0],
                    Axis::Y => [0.0, values[idx], 0.0],
                }
            }
            WaveformKind::Sampled { dt, ex, ey, ez } => {
                let idx = ((t / dt).floor() as usize).min(ex.len() - 1);
                [ex[idx], ey[idx], ez[idx]]
            }
        }
    }
}

fn check_bound(actual: f64, bound: f64, t: f64) -> Result<()> {
    if actual > bound + 1e-12 {
        Err(Error::BoundViolation { bound, actual, t })
    } else {
        Ok(())
    }
}

/// Total coefficient triple at time t: control + uncertainty + free part.
fn total_coeffs<F>(controls: &F, noise: &UncertaintyWaveform, t: f64) -> HamiltonianCoeffs
where
    F: Fn(f64) -> HamiltonianCoeffs,
{
    let u = controls(t);
    let e = noise.eval(t);
    HamiltonianCoeffs::new(u.cx + e[0], u.cy + e[1], u.cz + e[2] + 1.0)
}

fn cross(c: &HamiltonianCoeffs, r: &BlochVector) -> BlochVector {
    BlochVector::new(
        c.cy * r.z - c.cz * r.y,
        c.cz * r.x - c.cx * r.z,
        c.cx * r.y - c.cy * r.x,
    )
}

fn validate_span(t_span: (f64, f64)) -> Result<()> {
    if t_span.1 < t_span.0 {
        return Err(Error::NegativeTimeSpan { t0: t_span.0, t1: t_span.1 });
    }
    Ok(())
}

/// Integrate rdot = c(t) x r with RK4 from `r0` over `t_span`, renormalizing
/// every step. Returns a sample at t0 and after every step.
pub fn propagate_bloch<F>(
    r0: BlochVector,
    controls: F,
    noise: &UncertaintyWaveform,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Vec<TrajectorySample>>
where
    F: Fn(f64) -> HamiltonianCoeffs,
{
    validate_span(t_span)?;
    noise.validate()?;
    if (r0.norm() - 1.0).abs() > crate::bloch::BLOCH_NORM_TOL {
        return Err(Error::NotOnSphere { norm: r0.norm(), tol: crate::bloch::BLOCH_NORM_TOL });
    }

    let mut out = Vec::new();
    let mut t = t_span.0;
    let mut r = r0;
    out.push(TrajectorySample { t, r, control: controls(t), noise: noise.eval(t) });

    while t < t_span.1 - 1e-15 {
        let dt = cfg.dt.min(t_span.1 - t);
        let f = |tt: f64, rr: &BlochVector| {
            let c = total_coeffs(&controls, noise, tt);
            cross(&c, rr)
        };
        let k1 = f(t, &r);
        let k2 = f(t + dt / 2.0, &add_scaled(&r, &k1, dt / 2.0));
        let k3 = f(t + dt / 2.0, &add_scaled(&r, &k2, dt / 2.0));
        let k4 = f(t + dt, &add_scaled(&r, &k3, dt));
        r = BlochVector::new(
            r.x + dt / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
            r.y + dt / 6.0 * (k1.y + 2.0 * k2.y + 2.0 * k3.y + k4.y),
            r.z + dt / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
        )
        .renormalized();
        t += dt;
        out.push(TrajectorySample { t, r, control: controls(t), noise: noise.eval(t) });
    }
    Ok(out)
}

fn add_scaled(r: &BlochVector, k: &BlochVector, s: f64) -> BlochVector {
    BlochVector::new(r.x + s * k.x, r.y + s * k.y, r.z + s * k.z)
}

/// Integrate i |psidot> = H |psi> with RK4, H = cx I_x + cy I_y + cz I_z
/// (cz including the free part), renormalizing every step.
pub fn propagate_schrodinger<F>(
    s0: &PureState,
    controls: F,
    noise: &UncertaintyWaveform,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
) -> Result<Vec<(f64, PureState)>>
where
    F: Fn(f64) -> HamiltonianCoeffs,
{
    validate_span(t_span)?;
    noise.validate()?;

    let mut out = Vec::new();
    let mut t = t_span.0;
    let mut psi = *s0;
    out.push((t, psi));

    while t < t_span.1 - 1e-15 {
        let dt = cfg.dt.min(t_span.1 - t);
        let f = |tt: f64, a0: Complex64, a1: Complex64| {
            let c = total_coeffs(&controls, noise, tt);
            schrodinger_rhs(&c, a0, a1)
        };
        let (a0, a1) = (psi.a0(), psi.a1());
        let k1 = f(t, a0, a1);
        let k2 = f(t + dt / 2.0, a0 + k1.0 * (dt / 2.0), a1 + k1.1 * (dt / 2.0));
        let k3 = f(t + dt / 2.0, a0 + k2.0 * (dt / 2.0), a1 + k2.1 * (dt / 2.0));
        let k4 = f(t + dt, a0 + k3.0 * dt, a1 + k3.1 * dt);
        let b0 = a0 + (k1.0 + (k2.0 + k3.0) * 2.0 + k4.0) * (dt / 6.0);
        let b1 = a1 + (k1.1 + (k2.1 + k3.1) * 2.0 + k4.1) * (dt / 6.0);
        psi = PureState::from_parts_unchecked(b0, b1);
        psi.renormalize();
        t += dt;
        out.push((t, psi));
    }
    Ok(out)
}

/// -i H |psi> for H = (cx sigma_x + cy sigma_y + cz sigma_z)/2.
fn schrodinger_rhs(
    c: &HamiltonianCoeffs,
    a0: Complex64,
    a1: Complex64,
) -> (Complex64, Complex64) {
    let i = Complex64::I;
    // H|psi> components.
    let h0 = 0.5 * (Complex64::new(c.cx, -c.cy) * a1 + c.cz * a0);
    let h1 = 0.5 * (Complex64::new(c.cx, c.cy) * a0 - c.cz * a1);
    (-i * h0, -i * h1)
}

/// Exact rotation of `r0` about the axis c/|c| by angle |c| * t (Rodrigues).
/// |c| = 0 returns r0 unchanged.
pub fn exact_step_constant(r0: &BlochVector, coeffs: &HamiltonianCoeffs, t: f64) -> BlochVector {
    let norm = coeffs.norm();
    if norm == 0.0 {
        return *r0;
    }
    let (nx, ny, nz) = (coeffs.cx / norm, coeffs.cy / norm, coeffs.cz / norm);
    let angle = norm * t;
    let (sin, cos) = angle.sin_cos();
    let dot = nx * r0.x + ny * r0.y + nz * r0.z;
    let cx = ny * r0.z - nz * r0.y;
    let cy = nz * r0.x - nx * r0.z;
    let cz = nx * r0.y - ny * r0.x;
    BlochVector::new(
        r0.x * cos + cx * sin + nx * dot * (1.0 - cos),
        r0.y * cos + cy * sin + ny * dot * (1.0 - cos),
        r0.z * cos + cz * sin + nz * dot * (1.0 - cos),
    )
}

/// Write the trajectory CSV `t,x,y,z,ux,uy,uz,ex,ey,ez` (12 significant
/// digits).
pub fn write_trajectory_csv<W: Write>(samples: &[TrajectorySample], w: &mut W) -> Result<()> {
    writeln!(w, "t,x,y,z,ux,uy,uz,ex,ey,ez")?;
    for s in samples {
        writeln!(
            w,
            "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
            s.t,
            s.r.x,
            s.r.y,
            s.r.z,
            s.control.cx,
            s.control.cy,
            s.control.cz,
            s.noise[0],
            s.noise[1],
            s.noise[2],
        )?;
    }
    Ok(())
}
