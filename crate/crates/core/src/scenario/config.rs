//! Run configuration: one JSON document, every field defaulted, unknown keys
//! rejected.
//!
//! Precedence, lowest first: built-in defaults, the config file, `--override
//! key=value` pairs (applied in order, dotted paths into the document), then
//! the dedicated flags `--case` and `--out`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::gaussian::{Case, GaussianPacket};
use crate::units::UnitSystem;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("invalid config: {0}")]
    Schema(#[from] serde_json::Error),
    #[error("bad override `{0}`: {1}")]
    Override(String, String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    GaussMap,
    GaussScan,
    LaserSweep,
    Verify,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::GaussMap, Scenario::GaussScan, Scenario::LaserSweep, Scenario::Verify];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::GaussMap => "gauss-map",
            Scenario::GaussScan => "gauss-scan",
            Scenario::LaserSweep => "laser-sweep",
            Scenario::Verify => "verify",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| ConfigError::Invalid(format!("unknown scenario `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

/// `count` evenly spaced values from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Range {
    pub const fn linear(min: f64, max: f64, count: usize) -> Self {
        Self { min, max, count, spacing: Spacing::Linear }
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        if n == 1 {
            return vec![self.min];
        }
        (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                match self.spacing {
                    Spacing::Linear => self.min + s * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + s * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .collect()
    }

    fn validate(&self, what: &str) -> Result<(), ConfigError> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.count == 0 {
            return Err(ConfigError::Invalid(format!("{what}: need finite bounds and count >= 1")));
        }
        if self.count > 1 && self.max < self.min {
            return Err(ConfigError::Invalid(format!("{what}: max < min")));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(ConfigError::Invalid(format!("{what}: log spacing needs min > 0")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UnitsConfig {
    pub hbar: f64,
    pub mass: f64,
}

impl Default for UnitsConfig {
    fn default() -> Self {
        Self { hbar: 1.0, mass: 1.0 }
    }
}

/// Explicit packet parameters; replaces `case` when given.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub x_g: f64,
    pub p_g: f64,
    pub sigma_p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Approximate box length; adjusted so `p0` sits on a momentum bin.
    pub length: f64,
    pub points: usize,
    /// Box center.
    #[serde(default)]
    pub center: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { length: 128.0, points: 4096, center: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussMapConfig {
    pub x1: Range,
    pub x2: Range,
}

impl Default for GaussMapConfig {
    fn default() -> Self {
        Self { x1: Range::linear(-10.0, 10.0, 101), x2: Range::linear(-10.0, 10.0, 101) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussScanConfig {
    pub x1: f64,
    pub x2: f64,
    pub x_g: Range,
    pub p0: Range,
}

impl Default for GaussScanConfig {
    fn default() -> Self {
        Self { x1: -2.57843, x2: 7.82843, x_g: Range::linear(-10.0, 20.0, 121), p0: Range::linear(0.1, 10.0, 100) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LaserConfig {
    pub wavelength_nm: f64,
    /// Interaction-region width `l`.
    pub width_nm: f64,
    /// Pulse duration in carrier cycles.
    pub cycles: f64,
    /// Plane-wave momentum (atomic units); the box length is adjusted so it
    /// falls on a momentum bin.
    pub p0: f64,
    /// Peak electric field values, atomic units.
    pub f0: Range,
    /// Box length in units of `l`; the region sits in the middle.
    pub length_factor: f64,
    pub points: usize,
    pub dt: f64,
    /// Largest change tolerated when `dt` is halved.
    pub convergence: f64,
    /// Probe points, in bohr. Defaults to the region edges.
    pub probes: Option<[f64; 2]>,
}

impl Default for LaserConfig {
    fn default() -> Self {
        Self {
            wavelength_nm: 800.0,
            width_nm: 800.0,
            cycles: 4.0,
            p0: 0.1,
            f0: Range { min: 2e-5, max: 2e-4, count: 10, spacing: Spacing::Log },
            length_factor: 8.0,
            points: 65536,
            dt: 0.5,
            convergence: 1e-8,
            probes: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Closed form vs grid evaluation on a probe lattice.
    Analytic,
    /// Grid evaluation vs time-integrated current.
    IntegratedCurrent,
    /// Grid evaluation vs density depletion.
    Depletion,
    /// The two brute-force estimates against each other.
    OraclePair,
    /// The half-weight density term is rejected by both brute-force estimates.
    CoefficientResolution,
}

impl CheckKind {
    pub const ALL: [CheckKind; 5] = [
        CheckKind::Analytic,
        CheckKind::IntegratedCurrent,
        CheckKind::Depletion,
        CheckKind::OraclePair,
        CheckKind::CoefficientResolution,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub checks: Vec<CheckKind>,
    pub x1: f64,
    pub x2: f64,
    /// Agreement tolerance between the grid evaluation and the oracles.
    pub tolerance: f64,
    /// Closed form vs grid evaluation.
    pub analytic_tolerance: f64,
    /// Probe lattice for the analytic check: `n x n` points on `[-extent, extent]`.
    pub analytic_extent: f64,
    pub analytic_points: usize,
    /// Weight of the packet-density term in the grid evaluation. Anything
    /// but 1 is wrong; the knob exists to show that the checks notice.
    pub density_coefficient: f64,
    pub eps_schedule: Vec<f64>,
    /// Time window for the current integration; default from the packet.
    pub t_max: Option<f64>,
    /// Depletion time; defaults to `t_max`.
    pub t_final: Option<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            checks: CheckKind::ALL.to_vec(),
            x1: -2.57843,
            x2: 7.82843,
            tolerance: 5e-3,
            analytic_tolerance: 1e-8,
            analytic_extent: 10.0,
            analytic_points: 10,
            density_coefficient: 1.0,
            eps_schedule: vec![0.08, 0.04, 0.02, 0.01],
            t_max: None,
            t_final: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Informational; the command line decides what runs.
    pub scenario: Option<Scenario>,
    pub case: Option<Case>,
    pub packet: Option<PacketConfig>,
    /// Plane-wave momentum for the Gaussian scenarios; defaults to `p_G`.
    pub p0: Option<f64>,
    pub units: UnitsConfig,
    pub grid: GridConfig,
    pub gauss_map: GaussMapConfig,
    pub gauss_scan: GaussScanConfig,
    pub laser: LaserConfig,
    pub verify: VerifyConfig,
    pub output: Option<String>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Self::from_value(serde_json::from_str(text)?)
    }

    pub fn from_value(v: Value) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_value(v)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses `text`, applies the overrides in order, validates.
    pub fn load(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        // Overrides apply to the defaults-filled document, so a single leaf
        // of a nested section can be changed without restating its siblings.
        let file: RunConfig = if text.trim().is_empty() { RunConfig::default() } else { serde_json::from_str(text)? };
        let mut v = serde_json::to_value(file)?;
        for o in overrides {
            apply_override(&mut v, o)?;
        }
        Self::from_value(v)
    }

    pub fn units(&self) -> Result<UnitSystem<f64>, ConfigError> {
        UnitSystem::with_constants(self.units.hbar, self.units.mass).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    /// The configured case, `A` if neither case nor packet is given.
    pub fn effective_case(&self) -> Option<Case> {
        match (self.case, self.packet) {
            (Some(c), _) => Some(c),
            (None, None) => Some(Case::A),
            (None, Some(_)) => None,
        }
    }

    pub fn packet(&self) -> Result<GaussianPacket<f64>, ConfigError> {
        let units = self.units()?;
        let (x_g, p_g, sigma_p) = match (self.packet, self.effective_case()) {
            (Some(p), _) => (p.x_g, p.p_g, p.sigma_p),
            (None, Some(c)) => {
                let (x, p) = c.center_and_momentum();
                (x, p, std::f64::consts::FRAC_1_SQRT_2)
            }
            (None, None) => unreachable!(),
        };
        GaussianPacket::new(x_g, p_g, sigma_p, units).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn p0(&self) -> Result<f64, ConfigError> {
        Ok(match self.p0 {
            Some(p) => p,
            None => self.packet()?.p_g(),
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.case.is_some() && self.packet.is_some() {
            return bad("`case` and `packet` are mutually exclusive".into());
        }
        self.units()?;
        self.packet()?;
        if let Some(p) = self.p0 {
            if !p.is_finite() {
                return bad("p0 must be finite".into());
            }
        }
        let g = &self.grid;
        if !(g.length.is_finite() && g.length > 0.0 && g.center.is_finite()) || g.points < 16 {
            return bad("grid: length must be positive and points >= 16".into());
        }
        self.gauss_map.x1.validate("gauss_map.x1")?;
        self.gauss_map.x2.validate("gauss_map.x2")?;
        let s = &self.gauss_scan;
        if !(s.x1.is_finite() && s.x2.is_finite()) {
            return bad("gauss_scan: probes must be finite".into());
        }
        s.x_g.validate("gauss_scan.x_g")?;
        s.p0.validate("gauss_scan.p0")?;
        let l = &self.laser;
        for (name, v) in [
            ("wavelength_nm", l.wavelength_nm),
            ("width_nm", l.width_nm),
            ("cycles", l.cycles),
            ("dt", l.dt),
            ("convergence", l.convergence),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("laser.{name} must be positive"));
            }
        }
        if !(l.length_factor.is_finite() && l.length_factor >= 3.0) {
            return bad("laser.length_factor must be at least 3 (region plus a width of margin on each side)".into());
        }
        if l.points < 16 || !l.p0.is_finite() {
            return bad("laser: points >= 16 and finite p0 required".into());
        }
        l.f0.validate("laser.f0")?;
        if l.f0.min < 0.0 {
            return bad("laser.f0 must be non-negative".into());
        }
        if let Some([a, b]) = l.probes {
            if !(a.is_finite() && b.is_finite()) {
                return bad("laser.probes must be finite".into());
            }
        }
        let v = &self.verify;
        for (name, x) in [
            ("tolerance", v.tolerance),
            ("analytic_tolerance", v.analytic_tolerance),
            ("analytic_extent", v.analytic_extent),
        ] {
            if !(x.is_finite() && x > 0.0) {
                return bad(format!("verify.{name} must be positive"));
            }
        }
        if !(v.x1.is_finite() && v.x2.is_finite() && v.density_coefficient.is_finite()) || v.analytic_points == 0 {
            return bad("verify: probes and coefficient must be finite, analytic_points >= 1".into());
        }
        for (name, t) in [("t_max", v.t_max), ("t_final", v.t_final)] {
            if let Some(t) = t {
                if !(t.is_finite() && t >= 0.0) {
                    return bad(format!("verify.{name} must be non-negative"));
                }
            }
        }
        Ok(())
    }
}

/// `a.b.c=value`: `value` is parsed as JSON, falling back to a plain string.
pub fn apply_override(doc: &mut Value, spec: &str) -> Result<(), ConfigError> {
    let err = |m: &str| ConfigError::Override(spec.to_string(), m.to_string());
    let (path, raw) = spec.split_once('=').ok_or_else(|| err("expected key=value"))?;
    if path.is_empty() || path.split('.').any(str::is_empty) {
        return Err(err("empty key segment"));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = doc;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        if cur.is_null() {
            *cur = Value::Object(Default::default());
        }
        let obj = cur.as_object_mut().ok_or_else(|| err(&format!("`{}` is not an object", keys[..i].join("."))))?;
        if i + 1 == keys.len() {
            obj.insert(key.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(key.to_string()).or_insert(Value::Object(Default::default()));
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_all_defaults() {
        let cfg = RunConfig::load("{}", &[]).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.effective_case(), Some(Case::A));
        assert_eq!(cfg.p0().unwrap(), 5.0);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(RunConfig::from_json(r#"{"grdi": {}}"#), Err(ConfigError::Schema(_))));
        assert!(matches!(
            RunConfig::from_json(r#"{"laser": {"f0": {"min": 1, "max": 2, "cnt": 3}}}"#),
            Err(ConfigError::Schema(_))
        ));
    }

    #[test]
    fn overrides_walk_dotted_paths() {
        let cfg = RunConfig::load(
            r#"{"laser": {"dt": 0.25}}"#,
            &["laser.f0.count=3".into(), "verify.tolerance=1e-2".into(), "case=C".into(), "laser.dt=0.1".into()],
        )
        .unwrap();
        assert_eq!(cfg.laser.f0.count, 3);
        assert_eq!(cfg.laser.f0.min, 2e-5);
        assert_eq!(cfg.laser.dt, 0.1);
        assert_eq!(cfg.verify.tolerance, 1e-2);
        assert_eq!(cfg.case, Some(Case::C));
        assert!(RunConfig::load("{}", &["novalue".into()]).is_err());
        assert!(RunConfig::load("{}", &["grid.points.x=3".into()]).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        for o in ["laser.dt=-1", "grid.points=4", "gauss_map.x1.count=0", "verify.tolerance=0", "units.mass=0"] {
            assert!(matches!(RunConfig::load("{}", &[o.into()]), Err(ConfigError::Invalid(_))), "{o}");
        }
        let both = r#"{"case": "B", "packet": {"x_g": 0, "p_g": 1, "sigma_p": 1}}"#;
        assert!(RunConfig::from_json(both).is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(Range::linear(0.0, 1.0, 3).values(), vec![0.0, 0.5, 1.0]);
        let r = Range { min: 1e-5, max: 1e-4, count: 2, spacing: Spacing::Log };
        let v = r.values();
        assert!((v[1] - 1e-4).abs() < 1e-18);
        assert_eq!(Range::linear(2.0, 2.0, 1).values(), vec![2.0]);
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = RunConfig::load("{}", &["case=D".into(), "laser.probes=[-1,1]".into()]).unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_json(&text).unwrap(), cfg);
    }
}
