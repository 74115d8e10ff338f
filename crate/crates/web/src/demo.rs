use polaron_lasing::{build_sd, build_sp, solve_steady, ModelParams, ParamValues, SteadyOptions, PARAM_KEYS};

const SERIES_TOL: f64 = 1e-10;
/// Cap on grid sizes requested from the page.
pub const MAX_POINTS: usize = 20_000;

pub fn default_params() -> Vec<f64> {
    let v = ParamValues::DEFAULT_SCENARIO;
    PARAM_KEYS.iter().map(|k| v.get(k).expect("parameter key")).collect()
}

pub fn params_from(values: &[f64]) -> Result<ModelParams, String> {
    if values.len() != PARAM_KEYS.len() {
        return Err(format!("expected {} parameters, got {}", PARAM_KEYS.len(), values.len()));
    }
    let mut v = ParamValues::DEFAULT_SCENARIO;
    for (key, &x) in PARAM_KEYS.iter().zip(values) {
        v.set(key, x);
    }
    ModelParams::new(v).map_err(|e| e.to_string())
}

fn check_points(points: usize) -> Result<(), String> {
    if (2..=MAX_POINTS).contains(&points) {
        Ok(())
    } else {
        Err(format!("point count {points} outside 2..={MAX_POINTS}"))
    }
}

pub fn spectra(values: &[f64], omega_min: f64, omega_max: f64, points: usize) -> Result<Vec<f64>, String> {
    check_points(points)?;
    if omega_min.partial_cmp(&omega_max) != Some(std::cmp::Ordering::Less) {
        return Err("frequency range must be increasing".into());
    }
    let p = params_from(values)?;
    let sp = build_sp(&p, SERIES_TOL).map_err(|e| e.to_string())?;
    let sd = if p.cos2_theta() == 0.0 { None } else { Some(build_sd(&p, SERIES_TOL).map_err(|e| e.to_string())?) };
    let step = (omega_max - omega_min) / (points - 1) as f64;
    Ok((0..points)
        .flat_map(|i| {
            let w = omega_min + step * i as f64;
            [w, sp.eval(w), sd.as_ref().map_or(0.0, |s| s.eval(w))]
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadySummary {
    pub rho: Vec<f64>,
    pub mean_n: f64,
    pub fano: f64,
    pub semiclassical_n: f64,
}

pub fn photon_distribution(values: &[f64]) -> Result<SteadySummary, String> {
    let p = params_from(values)?;
    let s = solve_steady(&p, &SteadyOptions::default()).map_err(|e| e.to_string())?;
    Ok(SteadySummary {
        rho: s.distribution.rho,
        mean_n: s.distribution.mean_n,
        fano: s.distribution.fano,
        semiclassical_n: s.semiclassical.mean_n,
    })
}

pub fn mean_photon_sweep(values: &[f64], key: &str, min: f64, max: f64, points: usize) -> Result<Vec<f64>, String> {
    check_points(points)?;
    if !PARAM_KEYS.contains(&key) {
        return Err(format!("unknown parameter `{key}`"));
    }
    if !(0.0 < min && min < max) {
        return Err("sweep range must be positive and increasing".into());
    }
    let base = params_from(values)?.values();
    let ratio = (max / min).ln() / (points - 1) as f64;
    Ok((0..points)
        .flat_map(|i| {
            let x = min * (ratio * i as f64).exp();
            let mut v = base;
            v.set(key, x);
            let mean = ModelParams::new(v)
                .and_then(|p| solve_steady(&p, &SteadyOptions::default()))
                .map_or(f64::NAN, |s| s.distribution.mean_n);
            [x, mean]
        })
        .collect())
}
