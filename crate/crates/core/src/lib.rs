//! Lasing of a two-level emitter with transversal and longitudinal coupling
//! to an engineered electromagnetic environment: one sharp cavity mode and one
//! broad dissipative mode.
//!
//! The pipeline runs bottom-up:
//!
//! 1. [`model`]: validated parameters and the thermal weights η± of the broad mode.
//! 2. [`spectral`]: the polaron spectrum S_P and the decay spectrum S_D as
//!    truncated Lorentzian series.
//! 3. [`rates`]: golden-rule and self-consistently broadened photon
//!    creation/absorption rates and the emitter decay rates.
//! 4. [`steadystate`]: adiabatic elimination of the emitter, the photon
//!    birth–death chain, its product-form stationary distribution and the
//!    semiclassical/closed-form photon-number estimates.
//! 5. [`oracle`]: an independent stationary solve of the full
//!    (emitter ⊗ Fock) diagonal master equation.

pub mod error;
pub mod model;
pub mod oracle;
pub mod rates;
pub mod spectral;
mod special;
pub mod steadystate;

pub use error::{Error, Result};
pub use model::{thermal_weights, ModelParams, ParamValues, ThermalWeights, PARAM_KEYS};
pub use spectral::{build_sd, build_sp, Lorentzian, SpectralSeries, SpectrumKind};
pub use rates::{selfconsistent_rates, MatrixElementMode, RateOptions, RateTable, SelfConsistency};
pub use oracle::{stationary_joint, total_variation, JointState};
pub use steadystate::{
    build_chain, solve_steady, stationary_distribution, EffectiveChain, PhotonDistribution, RateSource,
    SteadyOptions, SteadyState,
};
