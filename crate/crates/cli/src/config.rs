//! Flat `key=value` run configuration.
//!
//! Whitespace around `=` is insignificant, pairs are separated by any
//! whitespace, and `#` starts a comment that runs to the end of the line.
//! [`RunConfig::echo`] renders every key on one line in a form that parses
//! back to the same configuration.

use std::fmt::Write as _;
use std::path::PathBuf;

use polaron_lasing::{MatrixElementMode, ModelParams, ParamValues, RateSource, SelfConsistency, PARAM_KEYS};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("malformed entry `{0}`: expected key=value")]
    Malformed(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error(transparent)]
    Model(#[from] polaron_lasing::Error),
}

/// Keys besides the model parameters, in echo order.
pub const RUN_KEYS: [&str; 20] = [
    "omega_min",
    "omega_max",
    "omega_points",
    "sweep_key",
    "sweep_min",
    "sweep_max",
    "sweep_points",
    "sweep_scale",
    "series_tol",
    "fixed_point_tol",
    "max_iterations",
    "tail_bound",
    "n_max",
    "matrix_elements",
    "selfconsistency",
    "rate_source",
    "pump_broadening",
    "validation_set",
    "validation_tol",
    "output",
];

pub fn all_keys() -> impl Iterator<Item = &'static str> {
    PARAM_KEYS.iter().chain(RUN_KEYS.iter()).copied()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepScale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl FrequencyGrid {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points).map(move |i| if i + 1 == self.points { self.max } else { self.min + step * i as f64 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub key: String,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub scale: SweepScale,
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                match (i, self.scale) {
                    (0, _) => self.min,
                    (i, _) if i + 1 == self.points => self.max,
                    (_, SweepScale::Linear) => self.min + (self.max - self.min) * t,
                    (_, SweepScale::Log) => (self.min.ln() + (self.max / self.min).ln() * t).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub grid: FrequencyGrid,
    pub sweep: Sweep,
    pub series_tol: f64,
    pub fixed_point_tol: f64,
    pub max_iterations: usize,
    pub tail_bound: f64,
    /// `None` selects the truncation automatically.
    pub n_max: Option<usize>,
    pub matrix_elements: MatrixElementMode,
    pub selfconsistency: SelfConsistency,
    pub rate_source: RateSource,
    pub pump_broadening: bool,
    pub validation_set: String,
    pub validation_tol: f64,
    /// `None` writes to standard output.
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: ModelParams::default_scenario(),
            grid: FrequencyGrid { min: -3.0, max: 3.0, points: 601 },
            sweep: Sweep { key: "kappa".into(), min: 1e-7, max: 1e-5, points: 9, scale: SweepScale::Log },
            series_tol: 1e-10,
            fixed_point_tol: 1e-12,
            max_iterations: 200,
            tail_bound: 1e-9,
            n_max: None,
            matrix_elements: MatrixElementMode::Approximate,
            selfconsistency: SelfConsistency::OneShot,
            rate_source: RateSource::SelfConsistent,
            pump_broadening: false,
            validation_set: "default".into(),
            validation_tol: 1e-3,
            output: None,
        }
    }
}

/// Splits configuration text into `(key, value)` pairs.
pub fn tokenize(text: &str) -> Result<Vec<(String, String)>, ConfigError> {
    let mut pairs = Vec::new();
    for line in text.lines() {
        let content = line.split('#').next().unwrap_or("");
        let mut joined = String::with_capacity(content.len());
        let mut chars = content.chars().peekable();
        while let Some(c) = chars.next() {
            if c == '=' {
                joined.truncate(joined.trim_end().len());
                joined.push('=');
                while chars.next_if(|c| c.is_whitespace()).is_some() {}
            } else {
                joined.push(c);
            }
        }
        for token in joined.split_whitespace() {
            match token.split_once('=') {
                Some((k, v)) if !k.is_empty() && !v.is_empty() && !v.contains('=') => {
                    pairs.push((k.to_string(), v.to_string()))
                }
                _ => return Err(ConfigError::Malformed(token.to_string())),
            }
        }
    }
    Ok(pairs)
}

/// Shortest round-trip form; exponent notation outside [1e-3, 1e6).
fn num(x: f64) -> String {
    if x == 0.0 || (1e-3..1e6).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

fn bad(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Value { key: key.into(), value: value.into(), reason: reason.into() }
}

fn number(key: &str, value: &str) -> Result<f64, ConfigError> {
    value.parse::<f64>().map_err(|_| bad(key, value, "not a number"))
}

fn count(key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse::<usize>().map_err(|_| bad(key, value, "not a non-negative integer"))
}

impl RunConfig {
    /// Applies pairs in order on top of `self`; later pairs win.
    pub fn apply(mut self, pairs: &[(String, String)]) -> Result<Self, ConfigError> {
        let mut values = self.params.values();
        for (key, value) in pairs {
            let (key, value) = (key.as_str(), value.as_str());
            if PARAM_KEYS.contains(&key) {
                values.set(key, number(key, value)?);
                continue;
            }
            match key {
                "omega_min" => self.grid.min = number(key, value)?,
                "omega_max" => self.grid.max = number(key, value)?,
                "omega_points" => self.grid.points = count(key, value)?,
                "sweep_key" => {
                    if !PARAM_KEYS.contains(&value) {
                        return Err(bad(key, value, "not a model parameter"));
                    }
                    self.sweep.key = value.into();
                }
                "sweep_min" => self.sweep.min = number(key, value)?,
                "sweep_max" => self.sweep.max = number(key, value)?,
                "sweep_points" => self.sweep.points = count(key, value)?,
                "sweep_scale" => {
                    self.sweep.scale = match value {
                        "linear" => SweepScale::Linear,
                        "log" => SweepScale::Log,
                        _ => return Err(bad(key, value, "expected linear or log")),
                    }
                }
                "series_tol" => self.series_tol = number(key, value)?,
                "fixed_point_tol" => self.fixed_point_tol = number(key, value)?,
                "max_iterations" => self.max_iterations = count(key, value)?,
                "tail_bound" => self.tail_bound = number(key, value)?,
                "n_max" => self.n_max = if value == "auto" { None } else { Some(count(key, value)?) },
                "matrix_elements" => {
                    self.matrix_elements = match value {
                        "approximate" => MatrixElementMode::Approximate,
                        "exact" => MatrixElementMode::Exact,
                        _ => return Err(bad(key, value, "expected approximate or exact")),
                    }
                }
                "selfconsistency" => {
                    self.selfconsistency = match value {
                        "golden-rule" => SelfConsistency::GoldenRule,
                        "one-shot" => SelfConsistency::OneShot,
                        "fixed-point" => SelfConsistency::FixedPoint,
                        _ => return Err(bad(key, value, "expected golden-rule, one-shot or fixed-point")),
                    }
                }
                "rate_source" => {
                    self.rate_source = match value {
                        "self-consistent" => RateSource::SelfConsistent,
                        "golden-rule" => RateSource::GoldenRule,
                        _ => return Err(bad(key, value, "expected self-consistent or golden-rule")),
                    }
                }
                "pump_broadening" => {
                    self.pump_broadening = value.parse().map_err(|_| bad(key, value, "expected true or false"))?
                }
                "validation_set" => self.validation_set = value.into(),
                "validation_tol" => self.validation_tol = number(key, value)?,
                "output" => self.output = if value == "-" { None } else { Some(PathBuf::from(value)) },
                _ => return Err(ConfigError::UnknownKey(key.into())),
            }
        }
        self.params = ModelParams::new(values)?;
        self.validate()?;
        Ok(self)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::default().apply(&tokenize(text)?)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let range = |lo_key: &str, lo: f64, hi: f64| {
            if lo < hi {
                Ok(())
            } else {
                Err(bad(lo_key, &lo.to_string(), format!("must be below {hi}")))
            }
        };
        range("omega_min", self.grid.min, self.grid.max)?;
        range("sweep_min", self.sweep.min, self.sweep.max)?;
        for (key, n) in [("omega_points", self.grid.points), ("sweep_points", self.sweep.points)] {
            if n < 2 {
                return Err(bad(key, &n.to_string(), "need at least 2 points"));
            }
        }
        if self.sweep.scale == SweepScale::Log && self.sweep.min <= 0.0 {
            return Err(bad("sweep_min", &self.sweep.min.to_string(), "log sweeps need a positive range"));
        }
        for (key, tol) in [
            ("series_tol", self.series_tol),
            ("fixed_point_tol", self.fixed_point_tol),
            ("tail_bound", self.tail_bound),
            ("validation_tol", self.validation_tol),
        ] {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(bad(key, &tol.to_string(), "must lie in (0, 1)"));
            }
        }
        if self.max_iterations == 0 {
            return Err(bad("max_iterations", "0", "must be positive"));
        }
        if self.validation_set != "default" {
            return Err(bad("validation_set", &self.validation_set, "the only named set is `default`"));
        }
        Ok(())
    }

    pub fn values(&self) -> ParamValues {
        self.params.values()
    }

    /// All keys with their resolved values on one line. `f64` display is the
    /// shortest string that parses back to the same value.
    pub fn echo(&self) -> String {
        let v = self.values();
        let mut s = String::new();
        for key in PARAM_KEYS {
            let _ = write!(s, "{key}={} ", num(v.get(key).expect("parameter key")));
        }
        let scale = match self.sweep.scale {
            SweepScale::Linear => "linear",
            SweepScale::Log => "log",
        };
        let matrix = match self.matrix_elements {
            MatrixElementMode::Approximate => "approximate",
            MatrixElementMode::Exact => "exact",
        };
        let sc = match self.selfconsistency {
            SelfConsistency::GoldenRule => "golden-rule",
            SelfConsistency::OneShot => "one-shot",
            SelfConsistency::FixedPoint => "fixed-point",
        };
        let source = match self.rate_source {
            RateSource::SelfConsistent => "self-consistent",
            RateSource::GoldenRule => "golden-rule",
        };
        let n_max = self.n_max.map_or_else(|| "auto".to_string(), |n| n.to_string());
        let output = self.output.as_ref().map_or_else(|| "-".to_string(), |p| p.display().to_string());
        let _ = write!(
            s,
            "omega_min={} omega_max={} omega_points={} sweep_key={} sweep_min={} sweep_max={} sweep_points={} \
             sweep_scale={scale} series_tol={} fixed_point_tol={} max_iterations={} tail_bound={} n_max={n_max} \
             matrix_elements={matrix} selfconsistency={sc} rate_source={source} pump_broadening={} \
             validation_set={} validation_tol={} output={output}",
            num(self.grid.min),
            num(self.grid.max),
            self.grid.points,
            self.sweep.key,
            num(self.sweep.min),
            num(self.sweep.max),
            self.sweep.points,
            num(self.series_tol),
            num(self.fixed_point_tol),
            self.max_iterations,
            num(self.tail_bound),
            self.pump_broadening,
            self.validation_set,
            num(self.validation_tol),
        );
        s
    }
}
