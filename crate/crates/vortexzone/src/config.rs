//! Experiment configuration: a flat key-value text format with preset
//! inheritance. Presets mirror the reference simulation setups (circle
//! interface, strengths 1/4, (1/4)cos s and (1/4)cos 2s, blob and zone
//! parameters).

use crate::blob::Integrator;
use crate::curve::{ClosedCurve, PeriodicGrid, ScalarField};
use crate::{Complex, Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

/// Geometry of the initial interface.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CurveSpec {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
}

impl CurveSpec {
    /// Sample the curve in arc-length parametrization at n nodes.
    pub fn build(&self, n: usize) -> Result<ClosedCurve> {
        match *self {
            CurveSpec::Circle { radius } => ClosedCurve::circle(radius, n),
            CurveSpec::Ellipse { a, b } => {
                ClosedCurve::ellipse(a, b, n)?.arc_length_reparametrize()
            }
        }
    }
}

/// Vortex-sheet strength as a short trigonometric expression of the
/// normalized angle φ = 2πs/ℓ.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum StrengthSpec {
    Const { value: f64 },
    Cos { amplitude: f64, frequency: u32 },
}

impl StrengthSpec {
    pub fn build(&self, grid: PeriodicGrid) -> Result<ScalarField> {
        let ell = grid.length();
        match *self {
            StrengthSpec::Const { value } => ScalarField::constant(grid, value),
            StrengthSpec::Cos {
                amplitude,
                frequency,
            } => ScalarField::from_fn(grid, |s| {
                amplitude * (TAU * frequency as f64 * s / ell).cos()
            }),
        }
    }
}

/// Full experiment configuration with the documented defaults.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub preset: Option<String>,
    pub curve: CurveSpec,
    pub strength: StrengthSpec,
    /// Sheet-pair count N (the family has 2N sheets).
    pub n_pairs: usize,
    /// δ of the expansion-rate choice c = δ c̄_N |ϖ₀| ∗ η_ε.
    pub fraction: f64,
    /// Mollifier width ε (defaults to ℓ/20 of the sampled curve).
    pub eps: Option<f64>,
    /// Zone-overlay coefficient β in c = β(|ϖ₀| ∗ η_ε).
    pub beta: f64,
    /// Grid resolution for the spectral operators.
    pub resolution: usize,
    /// Blob count |S| (the full-scale flag raises it to 20000).
    pub s_count: usize,
    pub delta: f64,
    pub step_h: f64,
    pub steps: usize,
    pub integrator: Integrator,
    pub kh_amplitude: f64,
    pub kh_frequency: u32,
    /// Snapshot times for overlays and figures.
    pub times: Vec<f64>,
    pub out_dir: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            preset: None,
            curve: CurveSpec::Circle { radius: 1.0 },
            strength: StrengthSpec::Const { value: 0.25 },
            n_pairs: 5,
            fraction: 0.5,
            eps: None,
            beta: 0.125,
            resolution: 256,
            s_count: 2000,
            delta: 0.002,
            step_h: 0.025,
            steps: 100,
            integrator: Integrator::Euler,
            kh_amplitude: 0.001,
            kh_frequency: 30,
            times: vec![0.0, 1.25, 2.5],
            out_dir: "out".into(),
        }
    }
}

pub const PRESET_NAMES: &[&str] = &[
    "appendixB-const",
    "appendixB-cos1",
    "appendixB-cos2",
    "figure1",
];

/// Named presets. The three `appendixB-*` presets share δ = 0.002,
/// h = 0.025, ε = 0.001, k = 30, β = 1/8 and differ in ϖ₀; `figure1` is the
/// δ = 0.001 variant quoted alongside the introductory figure.
pub fn preset(name: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig {
        preset: Some(name.to_string()),
        ..ExperimentConfig::default()
    };
    match name {
        "appendixB-const" => {}
        "appendixB-cos1" => {
            cfg.strength = StrengthSpec::Cos {
                amplitude: 0.25,
                frequency: 1,
            };
        }
        "appendixB-cos2" => {
            cfg.strength = StrengthSpec::Cos {
                amplitude: 0.25,
                frequency: 2,
            };
        }
        "figure1" => {
            cfg.delta = 0.001;
        }
        other => {
            return Err(Error::Config(vec![format!(
                "unknown preset '{other}'; available presets: {}",
                PRESET_NAMES.join(", ")
            )]));
        }
    }
    Ok(cfg)
}

impl ExperimentConfig {
    /// ε for the mollifier: the configured value or ℓ/20.
    pub fn eps_for(&self, length: f64) -> f64 {
        self.eps.unwrap_or(length / 20.0)
    }

    /// Echo as ordered key-value pairs for the manifest.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        if let Some(p) = &self.preset {
            map.insert("preset".into(), p.clone());
        }
        map.insert(
            "curve".into(),
            match &self.curve {
                CurveSpec::Circle { radius } => format!("circle:{radius}"),
                CurveSpec::Ellipse { a, b } => format!("ellipse:{a},{b}"),
            },
        );
        map.insert(
            "strength".into(),
            match &self.strength {
                StrengthSpec::Const { value } => format!("const:{value}"),
                StrengthSpec::Cos {
                    amplitude,
                    frequency,
                } => format!("cos:{amplitude},{frequency}"),
            },
        );
        map.insert("n".into(), self.n_pairs.to_string());
        map.insert("fraction".into(), self.fraction.to_string());
        if let Some(e) = self.eps {
            map.insert("eps".into(), e.to_string());
        }
        map.insert("beta".into(), self.beta.to_string());
        map.insert("resolution".into(), self.resolution.to_string());
        map.insert("blobs".into(), self.s_count.to_string());
        map.insert("delta".into(), self.delta.to_string());
        map.insert("step".into(), self.step_h.to_string());
        map.insert("steps".into(), self.steps.to_string());
        map.insert(
            "integrator".into(),
            match self.integrator {
                Integrator::Euler => "euler".into(),
                Integrator::Rk4 => "rk4".to_string(),
            },
        );
        map.insert("kh_amp".into(), self.kh_amplitude.to_string());
        map.insert("kh_freq".into(), self.kh_frequency.to_string());
        map.insert(
            "times".into(),
            self.times
                .iter()
                .map(|t| t.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        map.insert("out".into(), self.out_dir.clone());
        map
    }
}

/// Parse the flat key-value text format.
///
/// Lines are `key = value`; `#` starts a comment. A `preset = name` line is
/// applied first and the remaining keys override it. Unknown keys, type
/// mismatches and precondition violations are all collected and reported
/// together, each naming the offending key.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut errors: Vec<String> = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) => pairs.push((k.trim().to_string(), v.trim().to_string())),
            None => errors.push(format!("line {}: expected 'key = value'", lineno + 1)),
        }
    }
    if pairs.is_empty() && errors.is_empty() {
        return Err(Error::Config(vec![format!(
            "empty configuration; required keys: preset (one of {}) or explicit \
             curve/strength/... keys; see the documented key list",
            PRESET_NAMES.join(", ")
        )]));
    }

    let mut cfg = match pairs.iter().find(|(k, _)| k == "preset") {
        Some((_, name)) => match preset(name) {
            Ok(c) => c,
            Err(Error::Config(mut e)) => {
                errors.append(&mut e);
                ExperimentConfig::default()
            }
            Err(e) => return Err(e),
        },
        None => ExperimentConfig::default(),
    };

    for (key, value) in &pairs {
        if let Err(msg) = apply_key(&mut cfg, key, value) {
            errors.push(msg);
        }
    }
    validate(&cfg, &mut errors);
    if errors.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(errors))
    }
}

fn apply_key(cfg: &mut ExperimentConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    let bad = |what: &str| format!("key '{key}': {what} (got '{value}')");
    match key {
        "preset" => Ok(()), // handled up front
        "curve" => {
            cfg.curve = parse_curve(value).map_err(|w| bad(&w))?;
            Ok(())
        }
        "strength" => {
            cfg.strength = parse_strength(value).map_err(|w| bad(&w))?;
            Ok(())
        }
        "n" => parse_into(value, &mut cfg.n_pairs).map_err(|w| bad(&w)),
        "fraction" => parse_into(value, &mut cfg.fraction).map_err(|w| bad(&w)),
        "eps" => {
            let mut e = 0.0f64;
            parse_into(value, &mut e).map_err(|w| bad(&w))?;
            cfg.eps = Some(e);
            Ok(())
        }
        "beta" => parse_into(value, &mut cfg.beta).map_err(|w| bad(&w)),
        "resolution" => parse_into(value, &mut cfg.resolution).map_err(|w| bad(&w)),
        "blobs" => parse_into(value, &mut cfg.s_count).map_err(|w| bad(&w)),
        "delta" => parse_into(value, &mut cfg.delta).map_err(|w| bad(&w)),
        "step" => parse_into(value, &mut cfg.step_h).map_err(|w| bad(&w)),
        "steps" => parse_into(value, &mut cfg.steps).map_err(|w| bad(&w)),
        "integrator" => {
            cfg.integrator = value.parse().map_err(|w: String| bad(&w))?;
            Ok(())
        }
        "kh_amp" => parse_into(value, &mut cfg.kh_amplitude).map_err(|w| bad(&w)),
        "kh_freq" => parse_into(value, &mut cfg.kh_frequency).map_err(|w| bad(&w)),
        "times" => {
            let mut times = Vec::new();
            for part in value.split(',') {
                let mut t = 0.0f64;
                parse_into(part.trim(), &mut t).map_err(|w| bad(&w))?;
                times.push(t);
            }
            cfg.times = times;
            Ok(())
        }
        "out" => {
            cfg.out_dir = value.to_string();
            Ok(())
        }
        other => Err(format!("unknown key '{other}'")),
    }
}

fn parse_into<T: std::str::FromStr>(value: &str, slot: &mut T) -> std::result::Result<(), String> {
    match value.parse() {
        Ok(v) => {
            *slot = v;
            Ok(())
        }
        Err(_) => Err(format!(
            "expected a {}",
            std::any::type_name::<T>().rsplit("::").next().unwrap_or("value")
        )),
    }
}

fn parse_curve(value: &str) -> std::result::Result<CurveSpec, String> {
    match value.split_once(':') {
        Some(("circle", r)) => {
            let radius = r.parse().map_err(|_| "circle:<radius>".to_string())?;
            Ok(CurveSpec::Circle { radius })
        }
        Some(("ellipse", ab)) => {
            let (a, b) = ab
                .split_once(',')
                .ok_or_else(|| "ellipse:<a>,<b>".to_string())?;
            Ok(CurveSpec::Ellipse {
                a: a.parse().map_err(|_| "ellipse:<a>,<b>".to_string())?,
                b: b.parse().map_err(|_| "ellipse:<a>,<b>".to_string())?,
            })
        }
        None if value == "circle" => Ok(CurveSpec::Circle { radius: 1.0 }),
        _ => Err("expected circle[:<radius>] or ellipse:<a>,<b>".to_string()),
    }
}

fn parse_strength(value: &str) -> std::result::Result<StrengthSpec, String> {
    match value.split_once(':') {
        Some(("const", v)) => Ok(StrengthSpec::Const {
            value: v.parse().map_err(|_| "const:<value>".to_string())?,
        }),
        Some(("cos", av)) => {
            let (a, k) = av
                .split_once(',')
                .ok_or_else(|| "cos:<amplitude>,<frequency>".to_string())?;
            Ok(StrengthSpec::Cos {
                amplitude: a.parse().map_err(|_| "cos:<amplitude>,<frequency>".to_string())?,
                frequency: k.parse().map_err(|_| "cos:<amplitude>,<frequency>".to_string())?,
            })
        }
        _ => Err("expected const:<value> or cos:<amplitude>,<frequency>".to_string()),
    }
}

fn validate(cfg: &ExperimentConfig, errors: &mut Vec<String>) {
    if cfg.n_pairs < 1 {
        errors.push("key 'n': sheet-pair count must be at least 1".into());
    }
    if !(cfg.fraction > 0.0 && cfg.fraction < 1.0) {
        errors.push(format!(
            "key 'fraction': {} outside (0, 1)",
            cfg.fraction
        ));
    }
    if let Some(e) = cfg.eps {
        if !(e > 0.0) {
            errors.push(format!("key 'eps': {e} must be positive"));
        }
    }
    if cfg.resolution < 8 || cfg.resolution % 2 != 0 {
        errors.push(format!(
            "key 'resolution': {} must be even and at least 8",
            cfg.resolution
        ));
    }
    if cfg.s_count < 2 {
        errors.push(format!("key 'blobs': {} must be at least 2", cfg.s_count));
    }
    if !(cfg.delta >= 0.0) {
        errors.push(format!("key 'delta': {} must be nonnegative", cfg.delta));
    }
    if !(cfg.step_h > 0.0) {
        errors.push(format!("key 'step': {} must be positive", cfg.step_h));
    }
    if !(cfg.beta > 0.0) {
        errors.push(format!("key 'beta': {} must be positive", cfg.beta));
    }
    match (&cfg.curve, &cfg.strength) {
        (CurveSpec::Circle { radius }, _) if !(radius > &0.0) => {
            errors.push("key 'curve': circle radius must be positive".into());
        }
        (CurveSpec::Ellipse { a, b }, _) if !(*a > 0.0 && *b > 0.0) => {
            errors.push("key 'curve': ellipse semi-axes must be positive".into());
        }
        _ => {}
    }
    for t in &cfg.times {
        if *t < 0.0 {
            errors.push(format!("key 'times': snapshot {t} must be nonnegative"));
        }
    }
}

/// Sample points for the `field` pipeline: a uniform square grid of side
/// 2·extent centered at the origin (the regularized kernel needs no
/// clearance from the sheets).
pub fn field_sample_grid(extent: f64, per_side: usize) -> Vec<Complex> {
    let mut points = Vec::new();
    for i in 0..per_side {
        for j in 0..per_side {
            let x = -extent + 2.0 * extent * i as f64 / (per_side - 1) as f64;
            let y = -extent + 2.0 * extent * j as f64 / (per_side - 1) as f64;
            points.push(Complex::new(x, y));
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_match_reference_parameters() {
        let cfg = preset("appendixB-const").unwrap();
        assert_eq!(cfg.curve, CurveSpec::Circle { radius: 1.0 });
        assert_eq!(cfg.strength, StrengthSpec::Const { value: 0.25 });
        assert_eq!(cfg.delta, 0.002);
        assert_eq!(cfg.step_h, 0.025);
        assert_eq!(cfg.kh_amplitude, 0.001);
        assert_eq!(cfg.kh_frequency, 30);
        assert_eq!(cfg.beta, 0.125);
        let cos2 = preset("appendixB-cos2").unwrap();
        assert_eq!(
            cos2.strength,
            StrengthSpec::Cos {
                amplitude: 0.25,
                frequency: 2
            }
        );
        let fig1 = preset("figure1").unwrap();
        assert_eq!(fig1.delta, 0.001);
    }

    #[test]
    fn unknown_preset_lists_available() {
        let err = preset("bogus").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("appendixB-const"), "{msg}");
        assert!(msg.contains("figure1"), "{msg}");
    }

    #[test]
    fn parse_preset_with_overrides() {
        let cfg = parse_config(
            "preset = appendixB-cos2\nblobs = 500\nsteps = 10 # short run\n",
        )
        .unwrap();
        assert_eq!(cfg.s_count, 500);
        assert_eq!(cfg.steps, 10);
        assert_eq!(
            cfg.strength,
            StrengthSpec::Cos {
                amplitude: 0.25,
                frequency: 2
            }
        );
    }

    #[test]
    fn empty_text_is_an_error() {
        let err = parse_config("  \n# only a comment\n").unwrap_err();
        assert!(err.to_string().contains("required keys"));
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn unknown_key_and_type_mismatch_are_named() {
        let err = parse_config("preset = appendixB-const\nwhatever = 3\nsteps = soon\n")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown key 'whatever'"), "{msg}");
        assert!(msg.contains("key 'steps'"), "{msg}");
    }

    #[test]
    fn precondition_violations_are_named() {
        let err =
            parse_config("preset = appendixB-const\nfraction = 1.5\nresolution = 7\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("fraction"), "{msg}");
        assert!(msg.contains("resolution"), "{msg}");
    }

    #[test]
    fn strength_builders() {
        let grid = PeriodicGrid::new(TAU, 64).unwrap();
        let w = StrengthSpec::Cos {
            amplitude: 0.25,
            frequency: 2,
        }
        .build(grid.clone())
        .unwrap();
        for (s, v) in grid.nodes().zip(w.values()) {
            assert!((v - 0.25 * (2.0 * s).cos()).abs() < 1e-14);
        }
    }
}
