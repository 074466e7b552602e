//! Measurement-period design: the general-uncertainty period T1, the
//! single-axis period T2, the selection rule between them, and a grid
//! verification of the inequality T2 >= T1.

use std::io::Write;

use crate::bloch::SlidingModeConfig;
use crate::dynamics::Axis;
use crate::error::{Error, Result};

/// Which class of Hamiltonian uncertainty is present.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UncertaintyClass {
    /// Both transverse components unknown: eps_x(t) I_x + eps_y(t) I_y.
    GeneralXY,
    /// A single transverse axis: eps(t) I_x or eps(t) I_y.
    SingleAxis(Axis),
}

/// Which formula produced the designed period.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PeriodRule {
    T1Formula,
    T2Formula,
}

/// A designed measurement period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodDesign {
    pub period: f64,
    pub rule: PeriodRule,
    /// p' = eps^2 / (1 + eps^2), the failure probability reachable by the
    /// worst constant single-axis perturbation.
    pub p_threshold: f64,
}

/// p' = eps^2 / (1 + eps^2).
pub fn p_threshold(eps: f64) -> f64 {
    eps * eps / (1.0 + eps * eps)
}

/// T1 = arccos(1 - 2 p0) / eps; valid for any p0 in (0, 1).
pub fn period_t1(cfg: &SlidingModeConfig) -> f64 {
    (1.0 - 2.0 * cfg.p0()).clamp(-1.0, 1.0).acos() / cfg.eps()
}

/// T2 = arccos[1 - 2 (1 + 1/eps^2) p0] / sqrt(1 + eps^2); requires
/// p0 <= eps^2/(1 + eps^2).
pub fn period_t2(cfg: &SlidingModeConfig) -> Result<f64> {
    let eps = cfg.eps();
    let threshold = p_threshold(eps);
    // Relative slack so the exact boundary p0 = p' survives rounding.
    if cfg.p0() > threshold * (1.0 + 1e-12) {
        return Err(Error::PeriodDomain { p0: cfg.p0(), threshold });
    }
    let arg = (1.0 - 2.0 * (1.0 + 1.0 / (eps * eps)) * cfg.p0()).clamp(-1.0, 1.0);
    Ok(arg.acos() / (1.0 + eps * eps).sqrt())
}

/// The selection rule: general-xy always uses T1; a single known axis uses
/// T2 when p0 <= p' and falls back to T1 otherwise.
pub fn select_period(cfg: &SlidingModeConfig, class: UncertaintyClass) -> PeriodDesign {
    let threshold = p_threshold(cfg.eps());
    match class {
        UncertaintyClass::GeneralXY => {
            PeriodDesign { period: period_t1(cfg), rule: PeriodRule::T1Formula, p_threshold: threshold }
        }
        UncertaintyClass::SingleAxis(_) => match period_t2(cfg) {
            Ok(t2) => PeriodDesign { period: t2, rule: PeriodRule::T2Formula, p_threshold: threshold },
            Err(_) => PeriodDesign {
                period: period_t1(cfg),
                rule: PeriodRule::T1Formula,
                p_threshold: threshold,
            },
        },
    }
}

/// One grid point of the inequality verification.
#[derive(Debug, Clone, Copy)]
pub struct PeriodPoint {
    pub eps: f64,
    pub p0: f64,
    pub t1: f64,
    pub t2: f64,
    pub diff: f64,
}

/// Result of sweeping T2 - T1 over an (eps, p0) grid.
#[derive(Debug, Clone)]
pub struct PeriodInequalityReport {
    pub points: Vec<PeriodPoint>,
    pub min_diff: f64,
    /// Largest deviation of T2(p') from pi / sqrt(1 + eps^2).
    pub boundary_t2_err: f64,
    /// Largest deviation of T1(p') from arccos((1-eps^2)/(1+eps^2)) / eps.
    pub boundary_t1_err: f64,
    pub violations: usize,
}

impl PeriodInequalityReport {
    pub fn is_ok(&self) -> bool {
        // arccos is square-root conditioned at the p0 = p' boundary (its
        // argument hits -1), so one ulp in the argument costs ~1e-8.
        self.violations == 0 && self.boundary_t2_err < 1e-6 && self.boundary_t1_err < 1e-6
    }

    /// Write the report CSV `eps,p0,t1,t2,diff`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "eps,p0,t1,t2,diff")?;
        for p in &self.points {
            writeln!(w, "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}", p.eps, p.p0, p.t1, p.t2, p.diff)?;
        }
        Ok(())
    }
}

/// Evaluate T2 - T1 for every eps in `eps_grid` and `n_p0` values of p0 in
/// (0, p'(eps)], counting violations of T2 >= T1 beyond -1e-12, and check
/// the closed forms at the boundary p0 = p'.
pub fn verify_t2_geq_t1(eps_grid: &[f64], n_p0: usize) -> Result<PeriodInequalityReport> {
    let mut points = Vec::with_capacity(eps_grid.len() * n_p0);
    let mut min_diff = f64::INFINITY;
    let mut violations = 0;
    let mut boundary_t2_err = 0.0_f64;
    let mut boundary_t1_err = 0.0_f64;

    for &eps in eps_grid {
        let p_max = p_threshold(eps);
        for i in 1..=n_p0 {
            let p0 = p_max * i as f64 / n_p0 as f64;
            let cfg = SlidingModeConfig::new(p0, eps)?;
            let t1 = period_t1(&cfg);
            let t2 = period_t2(&cfg)?;
            let diff = t2 - t1;
            min_diff = min_diff.min(diff);
            if diff < -1e-12 {
                violations += 1;
            }
            points.push(PeriodPoint { eps, p0, t1, t2, diff });
        }
        // Boundary identities at p0 = p'.
        let cfg = SlidingModeConfig::new(p_max, eps)?;
        let omega = (1.0 + eps * eps).sqrt();
        let t2b = period_t2(&cfg)?;
        boundary_t2_err = boundary_t2_err.max((t2b - std::f64::consts::PI / omega).abs());
        let t1b = period_t1(&cfg);
        let expected_t1 = ((1.0 - eps * eps) / (1.0 + eps * eps)).acos() / eps;
        boundary_t1_err = boundary_t1_err.max((t1b - expected_t1).abs());
    }

    Ok(PeriodInequalityReport { points, min_diff, boundary_t2_err, boundary_t1_err, violations })
}

/// Log-spaced grid helper for the verification sweeps.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && n >= 2);
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..n).map(|i| (llo + (lhi - llo) * i as f64 / (n - 1) as f64).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn t1_reported_values() {
        let t = period_t1(&SlidingModeConfig::new(0.01, 0.02).unwrap());
        assert_abs_diff_eq!(t, 10.017, epsilon = 1e-3);
        let t = period_t1(&SlidingModeConfig::new(0.01, 0.2).unwrap());
        assert_abs_diff_eq!(t, 1.002, epsilon = 1e-3);
        let t = period_t1(&SlidingModeConfig::new(0.5, 1.0).unwrap());
        assert_abs_diff_eq!(t, std::f64::consts::FRAC_PI_2, epsilon = 1e-12);
    }

    #[test]
    fn t2_reported_values() {
        let t = period_t2(&SlidingModeConfig::new(0.01, 0.2).unwrap()).unwrap();
        assert_abs_diff_eq!(t, 1.049, epsilon = 1e-3);
        // At the domain boundary p0 = p', arccos(-1) = pi.
        let eps = 0.2_f64;
        let t = period_t2(&SlidingModeConfig::new(p_threshold(eps), eps).unwrap()).unwrap();
        assert_abs_diff_eq!(t, std::f64::consts::PI / (1.0 + eps * eps).sqrt(), epsilon = 1e-12);
        // Direct evaluation for a mid-domain point, cross-checked in the
        // worst-case module against the simulated first-crossing time.
        let t = period_t2(&SlidingModeConfig::new(0.005, 0.2).unwrap()).unwrap();
        assert_abs_diff_eq!(t, 0.7234, epsilon = 1e-4);
    }

    #[test]
    fn t2_rejects_out_of_domain() {
        let res = period_t2(&SlidingModeConfig::new(0.5, 0.2).unwrap());
        assert!(matches!(res, Err(Error::PeriodDomain { .. })));
    }

    #[test]
    fn selection_rule_table() {
        let cfg = SlidingModeConfig::new(0.01, 0.2).unwrap();
        let d = select_period(&cfg, UncertaintyClass::SingleAxis(Axis::X));
        assert_eq!(d.rule, PeriodRule::T2Formula);
        assert_abs_diff_eq!(d.period, 1.049, epsilon = 1e-3);
        assert_abs_diff_eq!(d.p_threshold, 0.0385, epsilon = 1e-4);

        let d = select_period(&cfg, UncertaintyClass::GeneralXY);
        assert_eq!(d.rule, PeriodRule::T1Formula);
        assert_abs_diff_eq!(d.period, 1.002, epsilon = 1e-3);

        // Single axis but p0 above p' falls back to T1.
        let d = select_period(
            &SlidingModeConfig::new(0.5, 0.2).unwrap(),
            UncertaintyClass::SingleAxis(Axis::Y),
        );
        assert_eq!(d.rule, PeriodRule::T1Formula);
    }

    #[test]
    fn inequality_holds_on_grid() {
        let report = verify_t2_geq_t1(&log_grid(0.02, 2.0, 50), 50).unwrap();
        assert!(report.is_ok(), "violations: {}", report.violations);
        assert!(report.min_diff >= -1e-12);
        // Spot check the worked-example gap.
        let cfg = SlidingModeConfig::new(0.01, 0.2).unwrap();
        let gap = period_t2(&cfg).unwrap() - period_t1(&cfg);
        assert_abs_diff_eq!(gap, 0.047, epsilon = 1e-3);
    }

    #[test]
    fn t1_monotone_decreasing_in_eps() {
        let mut prev = f64::INFINITY;
        for eps in log_grid(0.01, 100.0, 200) {
            let t = period_t1(&SlidingModeConfig::new(0.01, eps).unwrap());
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn zeno_limits() {
        // Both periods shrink to zero as p0 -> 0 and as eps -> infinity.
        let t = period_t1(&SlidingModeConfig::new(1e-9, 0.2).unwrap());
        assert!(t < 1e-3);
        let t = period_t1(&SlidingModeConfig::new(0.01, 1e4).unwrap());
        assert!(t < 1e-3);
        let t = period_t2(&SlidingModeConfig::new(1e-9, 0.2).unwrap()).unwrap();
        assert!(t < 1e-3);
        let t = period_t2(&SlidingModeConfig::new(0.01, 1e4).unwrap()).unwrap();
        assert!(t < 1e-3);
    }

    #[test]
    fn report_csv_format() {
        let report = verify_t2_geq_t1(&[0.2], 3).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("eps,p0,t1,t2,diff\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
