//! Flat key-value experiment configuration: one `key = value` pair per line,
//! `#` comments, unknown keys rejected.

use std::collections::HashMap;

use qsmc::{
    Axis, IntegratorConfig, LyapunovConfig, NoiseModel, ProtocolConfig, PureState,
    SlidingModeConfig, UncertaintyClass,
};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "p0",
    "eps",
    "class",
    "noise",
    "noise_axis",
    "noise_value",
    "resample_step",
    "k",
    "n_cycles",
    "n_trials",
    "seed",
    "dt",
    "initial",
    "period",
    "noise_during_drive",
    "terminal_p",
];

fn parse_pairs(text: &str) -> Result<HashMap<String, String>, ConfigError> {
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(ConfigError(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    Ok(map)
}

fn get_f64(map: &HashMap<String, String>, key: &str) -> Result<Option<f64>, ConfigError> {
    map.get(key)
        .map(|v| v.parse().map_err(|e| ConfigError(format!("key `{key}`: {e}"))))
        .transpose()
}

fn get_usize(map: &HashMap<String, String>, key: &str) -> Result<Option<usize>, ConfigError> {
    map.get(key)
        .map(|v| v.parse().map_err(|e| ConfigError(format!("key `{key}`: {e}"))))
        .transpose()
}

pub fn parse_axis(s: &str) -> Result<Axis, ConfigError> {
    match s {
        "x" => Ok(Axis::X),
        "y" => Ok(Axis::Y),
        other => Err(ConfigError(format!("axis must be x or y, got `{other}`"))),
    }
}

pub fn parse_class(s: &str) -> Result<UncertaintyClass, ConfigError> {
    match s {
        "xy" => Ok(UncertaintyClass::GeneralXY),
        "x" => Ok(UncertaintyClass::SingleAxis(Axis::X)),
        "y" => Ok(UncertaintyClass::SingleAxis(Axis::Y)),
        other => Err(ConfigError(format!("class must be xy, x or y, got `{other}`"))),
    }
}

pub fn parse_initial(s: &str) -> Result<PureState, ConfigError> {
    match s {
        "0" => Ok(PureState::zero()),
        "1" => Ok(PureState::one()),
        "plus" => Ok(PureState::plus()),
        other => Err(ConfigError(format!("initial must be 0, 1 or plus, got `{other}`"))),
    }
}

/// Build a [`ProtocolConfig`] from the key-value text. `seed_flag` and
/// `dt_flag` come from the global CLI flags and are overridden by `seed` and
/// `dt` keys in the file when present.
pub fn protocol_from_text(
    text: &str,
    seed_flag: u64,
    dt_flag: Option<f64>,
) -> Result<ProtocolConfig, ConfigError> {
    let map = parse_pairs(text)?;
    let wrap = |e: qsmc::Error| ConfigError(e.to_string());

    let p0 = get_f64(&map, "p0")?.ok_or_else(|| ConfigError("missing key `p0`".into()))?;
    let eps = get_f64(&map, "eps")?.ok_or_else(|| ConfigError("missing key `eps`".into()))?;
    let smc = SlidingModeConfig::new(p0, eps).map_err(wrap)?;
    let class = parse_class(
        map.get("class").ok_or_else(|| ConfigError("missing key `class`".into()))?,
    )?;

    let noise_axis = parse_axis(map.get("noise_axis").map(String::as_str).unwrap_or("x"))?;
    let noise_value = get_f64(&map, "noise_value")?.unwrap_or(eps);
    let noise = match map.get("noise").map(String::as_str).unwrap_or("none") {
        "none" => NoiseModel::None,
        "bang" => NoiseModel::ConstantAxis { axis: noise_axis, value: noise_value },
        "uniform" => NoiseModel::UniformNoise {
            axis: noise_axis,
            eps: noise_value,
            resample_step: get_f64(&map, "resample_step")?.unwrap_or(1e-4),
        },
        "random" => match class {
            UncertaintyClass::GeneralXY => NoiseModel::RandomXY { eps: noise_value },
            UncertaintyClass::SingleAxis(axis) => {
                NoiseModel::RandomSingleAxis { axis, eps: noise_value }
            }
        },
        other => {
            return Err(ConfigError(format!(
                "noise must be none, bang, uniform or random, got `{other}`"
            )))
        }
    };

    let mut cfg = ProtocolConfig::new(smc, class, noise).map_err(wrap)?;
    if let Some(k) = get_f64(&map, "k")? {
        cfg.lyapunov = LyapunovConfig::sigma_y_only(k).map_err(wrap)?;
    }
    if let Some(p) = get_f64(&map, "terminal_p")? {
        cfg.lyapunov = cfg.lyapunov.with_terminal_p(p).map_err(wrap)?;
    }
    if let Some(dt) = get_f64(&map, "dt")?.or(dt_flag) {
        cfg.integrator = IntegratorConfig::new(dt).map_err(wrap)?;
    }
    if let Some(n) = get_usize(&map, "n_cycles")? {
        cfg.n_cycles = n;
    }
    if let Some(n) = get_usize(&map, "n_trials")? {
        cfg.n_trials = n;
    }
    cfg.seed = match map.get("seed") {
        Some(v) => v.parse().map_err(|e| ConfigError(format!("key `seed`: {e}")))?,
        None => seed_flag,
    };
    if let Some(s) = map.get("initial") {
        cfg.initial = parse_initial(s)?;
    }
    cfg.period_override = get_f64(&map, "period")?;
    if let Some(v) = map.get("noise_during_drive") {
        cfg.noise_during_drive = v
            .parse()
            .map_err(|e| ConfigError(format!("key `noise_during_drive`: {e}")))?;
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = "\
# worst-case single-axis run
p0 = 0.01
eps = 0.2
class = x
noise = bang
noise_axis = x
noise_value = 0.2
n_cycles = 5
n_trials = 3
seed = 11
";

    #[test]
    fn parses_full_config() {
        let cfg = protocol_from_text(BASE, 0, None).unwrap();
        assert_eq!(cfg.n_cycles, 5);
        assert_eq!(cfg.n_trials, 3);
        assert_eq!(cfg.seed, 11);
        assert_eq!(cfg.class, UncertaintyClass::SingleAxis(Axis::X));
        assert!(matches!(cfg.noise, NoiseModel::ConstantAxis { axis: Axis::X, value } if value == 0.2));
    }

    #[test]
    fn rejects_unknown_key() {
        let text = format!("{BASE}bogus = 1\n");
        let err = protocol_from_text(&text, 0, None).unwrap_err();
        assert!(err.0.contains("unknown key `bogus`"), "{err}");
    }

    #[test]
    fn rejects_duplicate_and_malformed() {
        assert!(protocol_from_text(&format!("{BASE}p0 = 0.02\n"), 0, None).is_err());
        assert!(protocol_from_text("p0 0.01\n", 0, None).is_err());
        assert!(protocol_from_text("p0 = 0.01\neps = 0.2\nclass = q\n", 0, None).is_err());
    }

    #[test]
    fn flag_fallbacks_apply() {
        let cfg = protocol_from_text("p0 = 0.01\neps = 0.2\nclass = xy\n", 42, Some(1e-3)).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.integrator.dt, 1e-3);
        assert!(matches!(cfg.noise, NoiseModel::None));
    }
}
