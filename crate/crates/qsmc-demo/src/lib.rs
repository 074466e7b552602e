//! Browser bindings for a small interactive demo: period design, the
//! Lyapunov drive curve, and the worst-case hold failure curve.
//!
//! Curves are returned as flat `[t0, v0, t1, v1, ...]` arrays so the page
//! can plot them without a serialization layer.

use wasm_bindgen::prelude::*;

use qsmc::{
    design_drive, failure_prob_bangbang, period_t1, select_period, IntegratorConfig,
    LyapunovConfig, PeriodRule, PureState, SlidingModeConfig, UncertaintyClass,
};

// Errors cross the boundary as plain strings; wasm-bindgen converts them to
// JS values only when an error actually propagates, so the functions stay
// testable on the host target.
fn parse_class(class: &str) -> Result<UncertaintyClass, String> {
    match class {
        "xy" => Ok(UncertaintyClass::GeneralXY),
        "x" => Ok(UncertaintyClass::SingleAxis(qsmc::Axis::X)),
        "y" => Ok(UncertaintyClass::SingleAxis(qsmc::Axis::Y)),
        other => Err(format!("class must be xy, x or y, got {other}")),
    }
}

fn err(e: qsmc::Error) -> String {
    e.to_string()
}

/// Measurement-period design summary as a short text block.
#[wasm_bindgen]
pub fn period_summary(p0: f64, eps: f64, class: &str) -> Result<String, String> {
    let smc = SlidingModeConfig::new(p0, eps).map_err(err)?;
    let design = select_period(&smc, parse_class(class)?);
    let rule = match design.rule {
        PeriodRule::T1Formula => "T1 (general transverse uncertainty)",
        PeriodRule::T2Formula => "T2 (single known axis)",
    };
    Ok(format!(
        "T = {:.6}\nrule = {rule}\np' = {:.6}\nT1 fallback = {:.6}",
        design.period,
        design.p_threshold,
        period_t1(&smc)
    ))
}

/// Closed-loop Lyapunov drive from |1>: returns [t, fidelity, u_y] triples
/// flattened, downsampled to at most `max_points` samples.
#[wasm_bindgen]
pub fn drive_curve(k: f64, p0: f64, max_points: usize) -> Result<Vec<f64>, String> {
    let smc = SlidingModeConfig::new(p0, 0.2).map_err(err)?;
    let lyap = LyapunovConfig::sigma_y_only(k).map_err(err)?;
    let icfg = IntegratorConfig::default();
    let (_, traj) = design_drive(&PureState::one(), &lyap, &icfg, &smc).map_err(err)?;
    let stride = (traj.len() / max_points.max(2)).max(1);
    let mut out = Vec::new();
    for s in traj.iter().step_by(stride) {
        out.push(s.t);
        out.push((1.0 + s.r.z) / 2.0);
        out.push(s.control.cy);
    }
    let last = traj.last().unwrap();
    if out.last() != Some(&last.control.cy) || out[out.len() - 3] != last.t {
        out.extend([last.t, (1.0 + last.r.z) / 2.0, last.control.cy]);
    }
    Ok(out)
}

/// Failure probability over a hold under the worst constant single-axis
/// perturbation, with the designed period appended as the final pair:
/// [t0, p0, t1, p1, ..., T, p(T)].
#[wasm_bindgen]
pub fn worst_hold_curve(p0: f64, eps: f64, n_points: usize) -> Result<Vec<f64>, String> {
    let smc = SlidingModeConfig::new(p0, eps).map_err(err)?;
    let design = select_period(&smc, parse_class("x")?);
    let omega = (1.0 + eps * eps).sqrt();
    let t_max = (2.0 * design.period).min(std::f64::consts::PI / omega);
    let n = n_points.max(2);
    let mut out = Vec::with_capacity(2 * n + 2);
    for i in 0..n {
        let t = t_max * i as f64 / (n - 1) as f64;
        out.push(t);
        out.push(failure_prob_bangbang(eps, t).map_err(err)?);
    }
    out.push(design.period);
    out.push(failure_prob_bangbang(eps, design.period.min(t_max)).map_err(err)?);
    Ok(out)
}
