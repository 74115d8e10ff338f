//! WebAssembly bindings for the static demo page in `www/`.
//!
//! Parameters cross the boundary as a flat `Float64Array` in the order of
//! [`param_keys`]. The plain functions in [`demo`] carry the logic and are
//! tested natively; the exported wrappers only convert errors.

use polaron_lasing::PARAM_KEYS;
use wasm_bindgen::prelude::*;

pub mod demo;

#[wasm_bindgen]
pub fn param_keys() -> Vec<String> {
    PARAM_KEYS.iter().map(|k| k.to_string()).collect()
}

#[wasm_bindgen]
pub fn default_params() -> Vec<f64> {
    demo::default_params()
}

/// Interleaved `[ω, S_P, S_D]` triples on `points` frequencies.
#[wasm_bindgen]
pub fn spectra(params: &[f64], omega_min: f64, omega_max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    demo::spectra(params, omega_min, omega_max, points).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub struct Steady {
    rho: Vec<f64>,
    mean_n: f64,
    fano: f64,
    semiclassical_n: f64,
}

#[wasm_bindgen]
impl Steady {
    #[wasm_bindgen(getter)]
    pub fn rho(&self) -> Vec<f64> {
        self.rho.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn mean_n(&self) -> f64 {
        self.mean_n
    }
    #[wasm_bindgen(getter)]
    pub fn fano(&self) -> f64 {
        self.fano
    }
    #[wasm_bindgen(getter)]
    pub fn semiclassical_n(&self) -> f64 {
        self.semiclassical_n
    }
}

#[wasm_bindgen]
pub fn photon_distribution(params: &[f64]) -> Result<Steady, JsError> {
    let s = demo::photon_distribution(params).map_err(|e| JsError::new(&e))?;
    Ok(Steady { rho: s.rho, mean_n: s.mean_n, fano: s.fano, semiclassical_n: s.semiclassical_n })
}

/// Interleaved `[x, ⟨n⟩]` pairs over a logarithmic sweep of `key`; points
/// that fail carry NaN.
#[wasm_bindgen]
pub fn mean_photon_sweep(params: &[f64], key: &str, min: f64, max: f64, points: usize) -> Result<Vec<f64>, JsError> {
    demo::mean_photon_sweep(params, key, min, max, points).map_err(|e| JsError::new(&e))
}
