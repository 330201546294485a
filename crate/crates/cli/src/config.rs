//! Run configuration: a flat TOML document, optionally seeded from a preset.

use std::path::PathBuf;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::{Table, Value};
use wallwalk::{AngleMode, DomainWallParams, Flavor, GaussianPacketSpec, LatticeGeometry};

use crate::presets::{preset, PRESET_NAMES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: `{key}`: {message}")]
    Key { key: String, line: usize, message: String },
    #[error("`{key}`: {message}")]
    Value { key: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

impl ConfigError {
    fn value(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Value {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

/// Every setting of one run, with all defaults filled in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub preset: Option<String>,
    pub flavor: Flavor,
    /// Sites per axis; the last axis carries the wall.
    pub sizes: Vec<usize>,
    pub epsilon: f64,
    pub steps: u64,
    pub mass: f64,
    pub lambda: f64,
    pub coupling: f64,
    /// Packet center in site indices.
    pub center: Vec<f64>,
    /// Standard deviation of the packet density, physical units.
    pub width: f64,
    /// Spinor as `[re, im]` pairs; normalized when the packet is built.
    pub polarization: Vec<[f64; 2]>,
    /// Observables are recorded every `cadence` steps and at the last step.
    pub cadence: u64,
    /// Density snapshots every this many steps; 0 writes only the first and last.
    pub snapshot_every: u64,
    pub angle_mode: AngleMode,
    pub boundary_check: bool,
    pub out_dir: PathBuf,
}

/// Command-line values that take precedence over the file and the preset.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub out_dir: Option<PathBuf>,
    pub steps: Option<u64>,
    pub epsilon: Option<f64>,
    pub mass: Option<f64>,
    pub lambda: Option<f64>,
    pub coupling: Option<f64>,
    pub snapshot_every: Option<u64>,
    pub angle_mode: Option<AngleMode>,
}

pub const KEYS: [&str; 16] = [
    "preset",
    "flavor",
    "sizes",
    "epsilon",
    "steps",
    "mass",
    "lambda",
    "coupling",
    "center",
    "width",
    "polarization",
    "cadence",
    "snapshot_every",
    "angle_mode",
    "boundary_check",
    "out_dir",
];

impl RunConfig {
    /// Defaults for a flavor when no preset is named.
    pub fn defaults(flavor: Flavor) -> Self {
        let base = match flavor {
            Flavor::TwoD => preset("fig1"),
            Flavor::ThreeD => preset("fig3"),
        };
        let mut config = base.expect("built-in presets exist");
        config.preset = None;
        config
    }

    pub fn params(&self) -> DomainWallParams {
        DomainWallParams {
            mass: self.mass,
            lambda: self.lambda,
            coupling: self.coupling,
            epsilon: self.epsilon,
        }
    }

    pub fn geometry(&self) -> wallwalk::Result<LatticeGeometry> {
        LatticeGeometry::new(&self.sizes, self.epsilon)
    }

    pub fn polarization_complex(&self) -> Vec<Complex64> {
        self.polarization.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()
    }

    /// Packet with its center converted to physical coordinates.
    pub fn packet(&self) -> wallwalk::Result<GaussianPacketSpec> {
        let g = self.geometry()?;
        let center = self
            .center
            .iter()
            .enumerate()
            .map(|(a, c)| (c - g.origin()[a] as f64) * self.epsilon)
            .collect();
        Ok(GaussianPacketSpec {
            center,
            width: self.width,
            polarization: self.polarization_complex(),
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(v) = &o.out_dir {
            self.out_dir = v.clone();
        }
        if let Some(v) = o.steps {
            self.steps = v;
        }
        if let Some(v) = o.epsilon {
            self.epsilon = v;
        }
        if let Some(v) = o.mass {
            self.mass = v;
        }
        if let Some(v) = o.lambda {
            self.lambda = v;
        }
        if let Some(v) = o.coupling {
            self.coupling = v;
        }
        if let Some(v) = o.snapshot_every {
            self.snapshot_every = v;
        }
        if let Some(v) = o.angle_mode {
            self.angle_mode = v;
        }
    }

    /// Checks every field; the first problem is reported by key.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let dims = self.flavor.dims();
        if self.sizes.len() != dims {
            return Err(ConfigError::value(
                "sizes",
                format!("{} walk needs {dims} sizes, got {}", flavor_name(self.flavor), self.sizes.len()),
            ));
        }
        self.params().validate().map_err(|e| match e {
            wallwalk::WalkError::Parameter { name, reason } => ConfigError::value(name, reason),
            other => ConfigError::value("epsilon", other.to_string()),
        })?;
        self.geometry().map_err(|e| ConfigError::value("sizes", e.to_string()))?;
        if self.center.len() != dims {
            return Err(ConfigError::value("center", format!("need {dims} coordinates")));
        }
        for (a, &c) in self.center.iter().enumerate() {
            if !(c >= 0.0 && c <= (self.sizes[a] - 1) as f64) {
                return Err(ConfigError::value("center", format!("{c} lies outside 0..{}", self.sizes[a] - 1)));
            }
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(ConfigError::value("width", "width must be positive"));
        }
        let spin = self.flavor.spin_dim();
        if self.polarization.len() != spin {
            return Err(ConfigError::value("polarization", format!("need {spin} components")));
        }
        if self.polarization.iter().all(|[re, im]| *re == 0.0 && *im == 0.0) {
            return Err(ConfigError::value("polarization", "polarization must be nonzero"));
        }
        if self.polarization.iter().flatten().any(|x| !x.is_finite()) {
            return Err(ConfigError::value("polarization", "components must be finite"));
        }
        if self.cadence == 0 {
            return Err(ConfigError::value("cadence", "cadence must be at least 1"));
        }
        if let Some(name) = &self.preset {
            if !PRESET_NAMES.contains(&name.as_str()) {
                return Err(ConfigError::value("preset", format!("unknown preset `{name}`")));
            }
        }
        Ok(())
    }
}

pub fn flavor_name(flavor: Flavor) -> &'static str {
    match flavor {
        Flavor::TwoD => "2d",
        Flavor::ThreeD => "3d",
    }
}

/// Line (1-based) on which `key` is assigned, if it can be found.
fn line_of(source: &str, key: &str) -> usize {
    source
        .lines()
        .position(|l| {
            let l = l.trim_start();
            l.strip_prefix(key)
                .map(|rest| rest.trim_start().starts_with('='))
                .unwrap_or(false)
        })
        .map(|i| i + 1)
        .unwrap_or(0)
}

fn line_at(source: &str, offset: usize) -> usize {
    source[..offset.min(source.len())].matches('\n').count() + 1
}

fn as_f64(v: &Value) -> Option<f64> {
    match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    }
}

fn as_u64(v: &Value) -> Option<u64> {
    match v {
        Value::Integer(i) if *i >= 0 => Some(*i as u64),
        _ => None,
    }
}

fn as_f64_list(v: &Value) -> Option<Vec<f64>> {
    v.as_array()?.iter().map(as_f64).collect()
}

fn as_pairs(v: &Value) -> Option<Vec<[f64; 2]>> {
    v.as_array()?
        .iter()
        .map(|p| match as_f64_list(p)?.as_slice() {
            [re, im] => Some([*re, *im]),
            _ => None,
        })
        .collect()
}

fn parse_flavor(v: &Value) -> Option<Flavor> {
    match v.as_str()? {
        "2d" | "2D" => Some(Flavor::TwoD),
        "3d" | "3D" => Some(Flavor::ThreeD),
        _ => None,
    }
}

pub fn parse_angle_mode(s: &str) -> Option<AngleMode> {
    match s {
        "physical" => Some(AngleMode::Physical),
        "index" => Some(AngleMode::Index),
        _ => None,
    }
}

/// Parses and validates a configuration document. A `preset` key seeds every
/// field from that preset; otherwise `flavor` is required and the remaining
/// fields default to the 2D or 3D baseline.
pub fn parse_config(source: &str) -> Result<RunConfig, ConfigError> {
    parse_config_over(source, None)
}

/// Like [`parse_config`], but a document without `preset` or `flavor` starts
/// from `base_preset`.
pub fn parse_config_over(source: &str, base_preset: Option<&str>) -> Result<RunConfig, ConfigError> {
    let table: Table = source.parse().map_err(|e: toml::de::Error| ConfigError::Syntax {
        line: e.span().map(|s| line_at(source, s.start)).unwrap_or(0),
        message: e.message().to_string(),
    })?;
    let err = |key: &str, message: String| ConfigError::Key {
        key: key.to_string(),
        line: line_of(source, key),
        message,
    };
    for key in table.keys() {
        if !KEYS.contains(&key.as_str()) {
            return Err(err(key, "unknown key".into()));
        }
    }

    let mut config = if let Some(v) = table.get("preset") {
        let name = v.as_str().ok_or_else(|| err("preset", "expected a string".into()))?;
        preset(name).ok_or_else(|| err("preset", format!("unknown preset `{name}`; expected one of {PRESET_NAMES:?}")))?
    } else if let (Some(name), None) = (base_preset, table.get("flavor")) {
        preset(name).ok_or_else(|| ConfigError::value("preset", format!("unknown preset `{name}`")))?
    } else {
        let v = table
            .get("flavor")
            .ok_or_else(|| err("flavor", "missing required key (or give a preset)".into()))?;
        let flavor = parse_flavor(v).ok_or_else(|| err("flavor", "expected \"2d\" or \"3d\"".into()))?;
        RunConfig::defaults(flavor)
    };

    if let Some(v) = table.get("flavor") {
        let flavor = parse_flavor(v).ok_or_else(|| err("flavor", "expected \"2d\" or \"3d\"".into()))?;
        if flavor != config.flavor {
            let preset = config.preset.take();
            config = RunConfig::defaults(flavor);
            config.preset = preset;
        }
    }

    for (key, v) in &table {
        let bad = |what: &str| err(key, format!("expected {what}"));
        match key.as_str() {
            "preset" | "flavor" => {}
            "sizes" => {
                config.sizes = v
                    .as_array()
                    .and_then(|a| a.iter().map(|x| as_u64(x).map(|n| n as usize)).collect())
                    .ok_or_else(|| bad("a list of site counts"))?;
            }
            "epsilon" => config.epsilon = as_f64(v).ok_or_else(|| bad("a number"))?,
            "steps" => config.steps = as_u64(v).ok_or_else(|| bad("a non-negative integer"))?,
            "mass" => config.mass = as_f64(v).ok_or_else(|| bad("a number"))?,
            "lambda" => config.lambda = as_f64(v).ok_or_else(|| bad("a number"))?,
            "coupling" => config.coupling = as_f64(v).ok_or_else(|| bad("a number"))?,
            "center" => config.center = as_f64_list(v).ok_or_else(|| bad("a list of site coordinates"))?,
            "width" => config.width = as_f64(v).ok_or_else(|| bad("a number"))?,
            "polarization" => config.polarization = as_pairs(v).ok_or_else(|| bad("a list of [re, im] pairs"))?,
            "cadence" => config.cadence = as_u64(v).ok_or_else(|| bad("a positive integer"))?,
            "snapshot_every" => config.snapshot_every = as_u64(v).ok_or_else(|| bad("a non-negative integer"))?,
            "angle_mode" => {
                config.angle_mode = v
                    .as_str()
                    .and_then(parse_angle_mode)
                    .ok_or_else(|| bad("\"physical\" or \"index\""))?
            }
            "boundary_check" => config.boundary_check = v.as_bool().ok_or_else(|| bad("true or false"))?,
            "out_dir" => config.out_dir = PathBuf::from(v.as_str().ok_or_else(|| bad("a path"))?),
            _ => unreachable!("unknown keys were rejected above"),
        }
    }

    config.validate().map_err(|e| match e {
        ConfigError::Value { key, message } => ConfigError::Key {
            line: line_of(source, &key),
            key,
            message,
        },
        other => other,
    })?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_2d_config_gets_every_default() {
        let c = parse_config("flavor = \"2d\"\n").unwrap();
        assert_eq!(c.preset, None);
        assert_eq!(c.flavor, Flavor::TwoD);
        assert_eq!(c.sizes, vec![128, 128]);
        assert_eq!(c.epsilon, 0.04);
        assert_eq!(c.lambda, 60.0);
        assert_eq!(c.coupling, 70.0);
        assert_eq!(c.cadence, 1);
        assert_eq!(c.angle_mode, AngleMode::Physical);
        assert!(c.boundary_check);
        // The echo-back names every field.
        let echo = serde_json::to_value(&c).unwrap();
        for key in KEYS {
            assert!(echo.get(key).is_some(), "{key} missing from echo");
        }
    }

    #[test]
    fn zero_lambda_is_rejected_with_its_line() {
        let src = "flavor = \"2d\"\nmass = 1.0\nlambda = 0\n";
        match parse_config(src) {
            Err(ConfigError::Key { key, line, message }) => {
                assert_eq!(key, "lambda");
                assert_eq!(line, 3);
                assert!(message.contains("lambda must be positive"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn fig2_preset_expands() {
        let c = parse_config("preset = \"fig2\"").unwrap();
        assert_eq!(c.flavor, Flavor::TwoD);
        assert_eq!(c.epsilon, 0.02);
        assert_eq!(c.lambda, 60.0);
        assert_eq!(c.coupling, 70.0);
        assert_eq!(c.sizes, vec![256, 256]);
        assert_eq!(c.center, vec![128.0, 128.0]);
        assert_eq!(c.polarization, vec![[0.0, 0.0], [1.0, 0.0]]);
    }

    #[test]
    fn keys_override_the_preset() {
        let c = parse_config("preset = \"fig2\"\nmass = 0.0\nsteps = 7\n").unwrap();
        assert_eq!(c.mass, 0.0);
        assert_eq!(c.steps, 7);
        assert_eq!(c.preset.as_deref(), Some("fig2"));
    }

    #[test]
    fn unknown_and_missing_keys() {
        match parse_config("flavor = \"2d\"\n\nfoo = 3\n") {
            Err(ConfigError::Key { key, line, .. }) => {
                assert_eq!(key, "foo");
                assert_eq!(line, 3);
            }
            other => panic!("{other:?}"),
        }
        match parse_config("mass = 1.0\n") {
            Err(ConfigError::Key { key, .. }) => assert_eq!(key, "flavor"),
            other => panic!("{other:?}"),
        }
        assert!(parse_config("preset = \"fig9\"").is_err());
    }

    #[test]
    fn invalid_values_name_the_key() {
        let cases = [
            ("flavor = \"2d\"\nsizes = [8]\n", "sizes"),
            ("flavor = \"2d\"\ncadence = 0\n", "cadence"),
            ("flavor = \"2d\"\npolarization = [[1, 0]]\n", "polarization"),
            ("flavor = \"2d\"\npolarization = [[0, 0], [0, 0]]\n", "polarization"),
            ("flavor = \"2d\"\nwidth = -1\n", "width"),
            ("flavor = \"2d\"\ncenter = [500, 3]\n", "center"),
            ("flavor = \"2d\"\nsteps = -2\n", "steps"),
            ("flavor = \"2d\"\nangle_mode = \"bare\"\n", "angle_mode"),
            ("flavor = \"4d\"\n", "flavor"),
            ("flavor = \"2d\"\nepsilon = 0\n", "epsilon"),
        ];
        for (src, expected) in cases {
            match parse_config(src) {
                Err(ConfigError::Key { key, .. }) => assert_eq!(key, expected, "{src}"),
                other => panic!("{src}: {other:?}"),
            }
        }
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        match parse_config("flavor = \"2d\"\nmass = = 1\n") {
            Err(ConfigError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn switching_flavor_resets_to_that_baseline() {
        let c = parse_config("flavor = \"3d\"\n").unwrap();
        assert_eq!(c.sizes, vec![64, 64, 64]);
        assert_eq!(c.polarization.len(), 4);
    }

    #[test]
    fn overrides_win() {
        let mut c = parse_config("preset = \"fig1\"").unwrap();
        c.apply(&Overrides {
            steps: Some(3),
            mass: Some(0.5),
            angle_mode: Some(AngleMode::Index),
            ..Default::default()
        });
        assert_eq!((c.steps, c.mass, c.angle_mode), (3, 0.5, AngleMode::Index));
    }
}
