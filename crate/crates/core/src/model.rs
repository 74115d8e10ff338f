//! Physical parameters of the emitter, the cavity and the broad mode.
//!
//! Units: ħ = k_B = 1. Every energy, frequency and rate is an angular
//! frequency.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Plain, unvalidated parameter values.
///
/// This is the editable form; [`ModelParams::new`] turns it into the
/// validated record used everywhere else.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamValues {
    /// Level splitting of the two-level emitter.
    pub delta_e: f64,
    /// Sharp (lasing) mode frequency.
    pub omega: f64,
    /// Centre frequency of the broad mode.
    pub omega_l: f64,
    /// Coupling to the sharp mode.
    pub g: f64,
    /// Mixing angle; transversal coupling goes as sin, longitudinal as cos.
    pub theta: f64,
    /// Coupling constant of the broad mode.
    pub eps_c: f64,
    /// Width of the broad mode.
    pub gamma_env: f64,
    /// Temperature.
    pub kt: f64,
    /// Cavity photon loss rate.
    pub kappa: f64,
    /// External pump, lower to upper level.
    pub pump_up: f64,
    /// External pump, upper to lower level.
    pub pump_down: f64,
}

/// Configuration keys, in canonical output order.
pub const PARAM_KEYS: [&str; 11] = [
    "delta_E",
    "Omega",
    "omega_L",
    "g",
    "theta",
    "eps_C",
    "Gamma_env",
    "kT",
    "kappa",
    "pump_up",
    "pump_down",
];

impl ParamValues {
    /// The shipped lasing scenario: resonance δω = ω_L, k_BT = ω_L/10,
    /// θ = π/4.
    pub const DEFAULT_SCENARIO: ParamValues = ParamValues {
        delta_e: 1.05,
        omega: 0.05,
        omega_l: 1.0,
        g: 0.005,
        theta: std::f64::consts::FRAC_PI_4,
        eps_c: 0.25,
        gamma_env: 0.02,
        kt: 0.1,
        kappa: 1e-6,
        pump_up: 0.02,
        pump_down: 0.02,
    };

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "delta_E" => self.delta_e,
            "Omega" => self.omega,
            "omega_L" => self.omega_l,
            "g" => self.g,
            "theta" => self.theta,
            "eps_C" => self.eps_c,
            "Gamma_env" => self.gamma_env,
            "kT" => self.kt,
            "kappa" => self.kappa,
            "pump_up" => self.pump_up,
            "pump_down" => self.pump_down,
            _ => return None,
        })
    }

    /// Sets the field named by a configuration key. Returns `false` for an
    /// unknown key.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        let slot = match key {
            "delta_E" => &mut self.delta_e,
            "Omega" => &mut self.omega,
            "omega_L" => &mut self.omega_l,
            "g" => &mut self.g,
            "theta" => &mut self.theta,
            "eps_C" => &mut self.eps_c,
            "Gamma_env" => &mut self.gamma_env,
            "kT" => &mut self.kt,
            "kappa" => &mut self.kappa,
            "pump_up" => &mut self.pump_up,
            "pump_down" => &mut self.pump_down,
            _ => return false,
        };
        *slot = value;
        true
    }
}

impl Default for ParamValues {
    fn default() -> Self {
        Self::DEFAULT_SCENARIO
    }
}

/// Validated model parameters. Construction is the only place where input
/// is checked; downstream code relies on these invariants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    v: ParamValues,
}

fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<()> {
    if !value.is_finite() {
        return Err(Error::InvalidParameter { name, value, reason: "must be finite" });
    }
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value, reason })
    }
}

impl ModelParams {
    pub fn new(v: ParamValues) -> Result<Self> {
        check("delta_E", v.delta_e, true, "")?;
        check("Omega", v.omega, v.omega > 0.0, "must be > 0")?;
        check("omega_L", v.omega_l, v.omega_l > 0.0, "must be > 0")?;
        check("g", v.g, v.g >= 0.0, "must be >= 0")?;
        check(
            "theta",
            v.theta,
            (0.0..=FRAC_PI_2).contains(&v.theta),
            "must lie in [0, pi/2]",
        )?;
        check("eps_C", v.eps_c, v.eps_c >= 0.0, "must be >= 0")?;
        check("Gamma_env", v.gamma_env, v.gamma_env > 0.0, "must be > 0")?;
        check("kT", v.kt, v.kt >= 0.0, "must be >= 0")?;
        check("kappa", v.kappa, v.kappa >= 0.0, "must be >= 0")?;
        check("pump_up", v.pump_up, v.pump_up >= 0.0, "must be >= 0")?;
        check("pump_down", v.pump_down, v.pump_down >= 0.0, "must be >= 0")?;
        Ok(Self { v })
    }

    pub fn default_scenario() -> Self {
        Self { v: ParamValues::DEFAULT_SCENARIO }
    }

    /// Copy with some fields changed, re-validated.
    pub fn with(&self, edit: impl FnOnce(&mut ParamValues)) -> Result<Self> {
        let mut v = self.v;
        edit(&mut v);
        Self::new(v)
    }

    pub fn values(&self) -> ParamValues {
        self.v
    }

    pub fn delta_e(&self) -> f64 {
        self.v.delta_e
    }
    pub fn omega(&self) -> f64 {
        self.v.omega
    }
    pub fn omega_l(&self) -> f64 {
        self.v.omega_l
    }
    pub fn g(&self) -> f64 {
        self.v.g
    }
    pub fn theta(&self) -> f64 {
        self.v.theta
    }
    pub fn eps_c(&self) -> f64 {
        self.v.eps_c
    }
    pub fn gamma_env(&self) -> f64 {
        self.v.gamma_env
    }
    pub fn kt(&self) -> f64 {
        self.v.kt
    }
    pub fn kappa(&self) -> f64 {
        self.v.kappa
    }
    pub fn pump_up(&self) -> f64 {
        self.v.pump_up
    }
    pub fn pump_down(&self) -> f64 {
        self.v.pump_down
    }

    /// δω = ΔE − Ω.
    pub fn detuning(&self) -> f64 {
        self.v.delta_e - self.v.omega
    }

    /// sin²θ, exactly 1 at θ = π/2.
    pub fn sin2_theta(&self) -> f64 {
        if self.v.theta == FRAC_PI_2 {
            1.0
        } else {
            self.v.theta.sin().powi(2)
        }
    }

    /// cos²θ, exactly 0 at θ = π/2.
    pub fn cos2_theta(&self) -> f64 {
        if self.v.theta == FRAC_PI_2 {
            0.0
        } else {
            self.v.theta.cos().powi(2)
        }
    }

    /// Longitudinal displacement g·cosθ/Ω of the sharp mode.
    pub fn displacement(&self) -> f64 {
        if self.v.theta == FRAC_PI_2 {
            0.0
        } else {
            self.v.g * self.v.theta.cos() / self.v.omega
        }
    }

    /// Zero-temperature Poisson weight 4ε_C cos²θ/ω_L of the broad mode.
    pub fn eta_zero_temperature(&self) -> f64 {
        4.0 * self.v.eps_c * self.cos2_theta() / self.v.omega_l
    }
}

/// Poisson weights of absorption (η₊) and emission (η₋) of broad-mode
/// quanta.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalWeights {
    pub eta_plus: f64,
    pub eta_minus: f64,
}

impl ThermalWeights {
    pub fn total(&self) -> f64 {
        self.eta_plus + self.eta_minus
    }
}

/// η± = (4ε_C cos²θ/ω_L)·(±1)/(e^{±ω_L/kT} − 1).
///
/// η₋ is evaluated as A/(1 − e^{−x}) through `exp_m1`, which stays accurate
/// for small x; η₊ then follows as η₋·e^{−x}, so the ratio η₊/η₋ is e^{−x}
/// to rounding. kT = 0 gives η₊ = 0 exactly.
pub fn thermal_weights(params: &ModelParams) -> ThermalWeights {
    let amp = params.eta_zero_temperature();
    if amp == 0.0 {
        return ThermalWeights { eta_plus: 0.0, eta_minus: 0.0 };
    }
    if params.kt() == 0.0 {
        return ThermalWeights { eta_plus: 0.0, eta_minus: amp };
    }
    let x = params.omega_l() / params.kt();
    let eta_minus = amp / -(-x).exp_m1();
    let eta_plus = eta_minus * (-x).exp();
    ThermalWeights { eta_plus, eta_minus }
}
