//! Run configuration: built-in defaults, an optional `key=value` file, figure
//! presets and command-line flags, applied in that order.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ratchet_core::lattice::default_half_width;
use ratchet_core::MethodTag;
use thiserror::Error;

pub const DEFAULT_HALF_WIDTH_NOTE: &str = "max(40, ceil(4C/beta) + 10)";
pub const DEFAULT_BETA_OVER_C: f64 = 0.73;
pub const DEFAULT_ALPHA: f64 = 1.0;
pub const DEFAULT_PHI_DEG: f64 = 37.0;
pub const DEFAULT_Z_STEPS: usize = 801;
pub const DEFAULT_WINDOW: usize = 12;
/// Default `z_max` in Bloch periods.
pub const DEFAULT_PERIODS: f64 = 4.0;

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "RATCHET_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("malformed value for `{key}`: {value:?}")]
    Malformed { key: String, value: String },
    #[error("line {line} of {path}: expected key=value")]
    Syntax { path: String, line: usize },
    #[error("conflicting ramp specifications: set either `ramp` or `beta_over_c`, not both")]
    ConflictingRamp,
    #[error("invalid `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// One source of settings; `None` leaves the lower layer in place.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigLayer {
    pub half_width: Option<usize>,
    pub coupling: Option<f64>,
    pub ramp: Option<f64>,
    pub beta_over_c: Option<f64>,
    pub alpha: Option<f64>,
    pub phi_deg: Option<f64>,
    pub z_max: Option<f64>,
    pub z_steps: Option<usize>,
    pub method: Option<MethodTag>,
    pub compare_methods: Option<bool>,
    pub normalized: Option<bool>,
    pub emit_profiles: Option<bool>,
    pub window: Option<usize>,
    pub rk4_step: Option<f64>,
    pub spectral_points: Option<usize>,
    pub output: Option<PathBuf>,
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.trim().parse().map_err(|_| ConfigError::Malformed { key: key.to_owned(), value: value.to_owned() })
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.trim() {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(ConfigError::Malformed { key: key.to_owned(), value: value.to_owned() }),
    }
}

impl ConfigLayer {
    /// Set one key. Dashes and underscores are interchangeable.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let norm = key.trim().replace('-', "_");
        match norm.as_str() {
            "half_width" => self.half_width = Some(parse_value(key, value)?),
            "coupling" => self.coupling = Some(parse_value(key, value)?),
            "ramp" => self.ramp = Some(parse_value(key, value)?),
            "beta_over_c" => self.beta_over_c = Some(parse_value(key, value)?),
            "alpha" => self.alpha = Some(parse_value(key, value)?),
            "phi_deg" => self.phi_deg = Some(parse_value(key, value)?),
            "z_max" => self.z_max = Some(parse_value(key, value)?),
            "z_steps" => self.z_steps = Some(parse_value(key, value)?),
            "method" => {
                self.method = Some(value.trim().parse().map_err(|_| ConfigError::Malformed {
                    key: key.to_owned(),
                    value: value.to_owned(),
                })?)
            }
            "compare_methods" => self.compare_methods = Some(parse_bool(key, value)?),
            "normalized" => self.normalized = Some(parse_bool(key, value)?),
            "emit_profiles" => self.emit_profiles = Some(parse_bool(key, value)?),
            "window" => self.window = Some(parse_value(key, value)?),
            "rk4_step" => self.rk4_step = Some(parse_value(key, value)?),
            "spectral_points" => self.spectral_points = Some(parse_value(key, value)?),
            "output" => self.output = Some(PathBuf::from(value.trim())),
            _ => return Err(ConfigError::UnknownKey(key.trim().to_owned())),
        }
        Ok(())
    }

    /// Parse `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut layer = ConfigLayer::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { path: origin.to_owned(), line: idx + 1 })?;
            layer.set(key, value)?;
        }
        layer.check_ramp()?;
        Ok(layer)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn check_ramp(&self) -> Result<(), ConfigError> {
        if self.ramp.is_some() && self.beta_over_c.is_some() {
            Err(ConfigError::ConflictingRamp)
        } else {
            Ok(())
        }
    }

    /// Overlay `top` on `self`. A ramp given either way in `top` replaces
    /// both ramp keys below it.
    pub fn overlay(mut self, top: &ConfigLayer) -> Self {
        macro_rules! take {
            ($($field:ident),*) => {
                $(if top.$field.is_some() { self.$field = top.$field.clone(); })*
            };
        }
        if top.ramp.is_some() || top.beta_over_c.is_some() {
            self.ramp = None;
            self.beta_over_c = None;
        }
        take!(
            half_width, coupling, ramp, beta_over_c, alpha, phi_deg, z_max, z_steps, method, compare_methods,
            normalized, emit_profiles, window, rk4_step, spectral_points, output
        );
        self
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// `None` applies the default truncation rule per ramp value.
    pub half_width: Option<usize>,
    pub coupling: f64,
    pub ramp: f64,
    pub alpha: f64,
    /// Reduced to `[0, 360)`.
    pub phi_deg: f64,
    /// `None` means four Bloch periods (or `8π/C` for a flat array).
    pub z_max: Option<f64>,
    pub z_steps: usize,
    pub method: MethodTag,
    pub compare_methods: bool,
    pub normalized: bool,
    pub emit_profiles: bool,
    pub window: usize,
    pub rk4_step: Option<f64>,
    pub spectral_points: Option<usize>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::resolve(&ConfigLayer::default()).expect("defaults are valid")
    }
}

fn finite(key: &'static str, value: f64) -> Result<f64, ConfigError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(ConfigError::Invalid { key, reason: format!("must be finite, got {value}") })
    }
}

impl RunConfig {
    pub fn resolve(layer: &ConfigLayer) -> Result<Self, ConfigError> {
        layer.check_ramp()?;
        let coupling = finite("coupling", layer.coupling.unwrap_or(1.0))?;
        if coupling <= 0.0 {
            return Err(ConfigError::Invalid { key: "coupling", reason: format!("must be positive, got {coupling}") });
        }
        let ramp = match (layer.ramp, layer.beta_over_c) {
            (Some(ramp), None) => finite("ramp", ramp)?,
            (None, ratio) => finite("beta_over_c", ratio.unwrap_or(DEFAULT_BETA_OVER_C))? * coupling,
            (Some(_), Some(_)) => return Err(ConfigError::ConflictingRamp),
        };
        if ramp < 0.0 {
            return Err(ConfigError::Invalid { key: "beta_over_c", reason: "must be non-negative".into() });
        }
        let alpha = finite("alpha", layer.alpha.unwrap_or(DEFAULT_ALPHA))?;
        if alpha < 0.0 {
            return Err(ConfigError::Invalid { key: "alpha", reason: format!("must be non-negative, got {alpha}") });
        }
        let phi_deg = finite("phi_deg", layer.phi_deg.unwrap_or(DEFAULT_PHI_DEG))?.rem_euclid(360.0);
        let z_max = layer.z_max.map(|z| finite("z_max", z)).transpose()?;
        if let Some(z) = z_max {
            if z <= 0.0 {
                return Err(ConfigError::Invalid { key: "z_max", reason: format!("must be positive, got {z}") });
            }
        }
        let z_steps = layer.z_steps.unwrap_or(DEFAULT_Z_STEPS);
        if z_steps < 2 {
            return Err(ConfigError::Invalid { key: "z_steps", reason: format!("must be at least 2, got {z_steps}") });
        }
        if layer.half_width == Some(0) {
            return Err(ConfigError::Invalid { key: "half_width", reason: "must be at least 1".into() });
        }
        if let Some(h) = layer.rk4_step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(ConfigError::Invalid { key: "rk4_step", reason: format!("must be positive, got {h}") });
            }
        }
        Ok(RunConfig {
            half_width: layer.half_width,
            coupling,
            ramp,
            alpha,
            phi_deg,
            z_max,
            z_steps,
            method: layer.method.unwrap_or(MethodTag::Green),
            compare_methods: layer.compare_methods.unwrap_or(false),
            normalized: layer.normalized.unwrap_or(false),
            emit_profiles: layer.emit_profiles.unwrap_or(false),
            window: layer.window.unwrap_or(DEFAULT_WINDOW),
            rk4_step: layer.rk4_step,
            spectral_points: layer.spectral_points,
            output: layer.output.clone(),
        })
    }

    pub fn beta_over_c(&self) -> f64 {
        self.ramp / self.coupling
    }

    pub fn effective_half_width(&self) -> usize {
        self.half_width.unwrap_or_else(|| default_half_width(self.coupling, self.ramp))
    }

    pub fn effective_z_max(&self) -> f64 {
        self.z_max.unwrap_or_else(|| {
            let period = if self.ramp > 0.0 { std::f64::consts::TAU / self.ramp } else { std::f64::consts::TAU / self.coupling };
            DEFAULT_PERIODS * period
        })
    }
}

impl fmt::Display for RunConfig {
    /// `# key=value` lines echoing every resolved setting.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# half_width={}", self.effective_half_width())?;
        writeln!(f, "# coupling={}", self.coupling)?;
        writeln!(f, "# ramp={}", self.ramp)?;
        writeln!(f, "# beta_over_c={}", self.beta_over_c())?;
        writeln!(f, "# alpha={}", self.alpha)?;
        writeln!(f, "# phi_deg={}", self.phi_deg)?;
        writeln!(f, "# z_max={}", self.effective_z_max())?;
        writeln!(f, "# z_steps={}", self.z_steps)?;
        writeln!(f, "# method={}", self.method)?;
        writeln!(f, "# compare_methods={}", self.compare_methods)?;
        writeln!(f, "# normalized={}", self.normalized)?;
        writeln!(f, "# window={}", self.window)?;
        if let Some(h) = self.rk4_step {
            writeln!(f, "# rk4_step={h}")?;
        }
        if let Some(k) = self.spectral_points {
            writeln!(f, "# spectral_points={k}")?;
        }
        Ok(())
    }
}
