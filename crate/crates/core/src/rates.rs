//! Transition rates between the product states |±, n⟩.
//!
//! Photon rates follow the golden rule with the polaron spectrum evaluated at
//! the detuning δω = ΔE − Ω:
//!
//! * creation   |+,n⟩ → |−,n+1⟩: Γ₊,ₙ = g²(n+1) sin²θ · S_P(δω)
//! * absorption |−,n⟩ → |+,n−1⟩: Γ₋,ₙ = g² n sin²θ · S_P(−δω)
//!
//! and the emitter decays without changing n at S_D(±ΔE). The
//! self-consistent rates Γ±,ₙˢ replace the half-width Γ of every Lorentzian
//! in S_P by Γ + Γ_T/2, where Γ_T is the total photon rate of the level.

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::spectral::{build_sd, build_sp, SpectralSeries, DEFAULT_SERIES_TOL};
use crate::special::{laguerre, ln_factorial};

/// ⟨n| exp(α(a† − a)) |m⟩ for real α.
///
/// Uses the associated-Laguerre closed form with the factorial ratio and the
/// power of α taken in the log domain, so large n, m do not overflow.
pub fn matrix_element_displacement(n: usize, m: usize, alpha: f64) -> f64 {
    if alpha == 0.0 {
        return if n == m { 1.0 } else { 0.0 };
    }
    let (lo, hi) = if n >= m { (m, n) } else { (n, m) };
    let k = hi - lo;
    let x = alpha * alpha;
    // ⟨n|D|m⟩ = (−1)^{m−n} ⟨m|D|n⟩ for real α
    let sign = if n < m && k % 2 == 1 { -1.0 } else { 1.0 };
    let alpha_sign = if alpha < 0.0 && k % 2 == 1 { -1.0 } else { 1.0 };
    let log_mag = 0.5 * (ln_factorial(lo) - ln_factorial(hi)) + k as f64 * alpha.abs().ln() - 0.5 * x;
    sign * alpha_sign * log_mag.exp() * laguerre(lo, k as f64, x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MatrixElementMode {
    /// ⟨n±1|e^{±ip} x e^{±ip}|n⟩ ≈ g sinθ √(n+1 or n), ⟨n|e^{±2ip}|n⟩ ≈ 1.
    #[default]
    Approximate,
    /// Full displaced-number-state overlaps, still restricted to |Δn| ≤ 1.
    Exact,
}

/// How Γ±,ₙˢ were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SelfConsistency {
    /// No broadening: Γ±,ₙˢ = Γ±,ₙ.
    GoldenRule,
    /// Γ_T = Γ₊,ₙ + Γ₋,ₙ from the golden rule, one evaluation.
    #[default]
    OneShot,
    /// Γ_T = Γ₊,ₙˢ + Γ₋,ₙˢ iterated to a fixed point.
    FixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateOptions {
    pub series_tol: f64,
    pub matrix_elements: MatrixElementMode,
    pub selfconsistency: SelfConsistency,
    /// Relative tolerance of the fixed-point iteration.
    pub fixed_point_tol: f64,
    pub max_iterations: usize,
    /// Adds (Γ₊ + Γ₋)/2 of the emitter to the Lorentzian half-width.
    pub pump_broadening: bool,
}

impl Default for RateOptions {
    fn default() -> Self {
        Self {
            series_tol: DEFAULT_SERIES_TOL,
            matrix_elements: MatrixElementMode::Approximate,
            selfconsistency: SelfConsistency::OneShot,
            fixed_point_tol: 1e-12,
            max_iterations: 200,
            pump_broadening: false,
        }
    }
}

/// Per-level rates for n = 0..=n_max.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub n_max: usize,
    /// Γ₊,ₙ, golden rule.
    pub gamma_ph_up: Vec<f64>,
    /// Γ₋,ₙ, golden rule (Γ₋,₀ = 0).
    pub gamma_ph_down: Vec<f64>,
    /// Γ₊,ₙˢ.
    pub gamma_up_sc: Vec<f64>,
    /// Γ₋,ₙˢ.
    pub gamma_down_sc: Vec<f64>,
    /// Γ_T used in the broadened rates (zero for golden rule).
    pub gamma_total: Vec<f64>,
    /// S_D(ΔE): |+,n⟩ → |−,n⟩.
    pub gamma_decay_down: f64,
    /// S_D(−ΔE): |−,n⟩ → |+,n⟩.
    pub gamma_decay_up: f64,
    /// |⟨n|e^{±2ip}|n⟩|² multiplying the decay rates (1 when approximate).
    pub decay_scale: Vec<f64>,
    /// δω = ΔE − Ω.
    pub detuning: f64,
    pub matrix_elements: MatrixElementMode,
    pub selfconsistency: SelfConsistency,
    /// Levels whose fixed point hit the iteration cap.
    pub diverged: Vec<usize>,
}

impl RateTable {
    /// Total excitation rate Γ₊ = Γ₊⁰ + S_D(−ΔE) of level n.
    pub fn excitation(&self, params: &ModelParams, n: usize) -> f64 {
        params.pump_up() + self.gamma_decay_up * self.decay_scale[n]
    }

    /// Total relaxation rate Γ₋ = Γ₋⁰ + S_D(ΔE) of level n.
    pub fn relaxation(&self, params: &ModelParams, n: usize) -> f64 {
        params.pump_down() + self.gamma_decay_down * self.decay_scale[n]
    }

    pub fn converged(&self) -> bool {
        self.diverged.is_empty()
    }
}

/// Squared photon matrix elements for level n: (creation n → n+1, absorption
/// n → n−1), in units where the approximate values are g² sin²θ (n+1) and
/// g² sin²θ n.
fn photon_elements_sq(params: &ModelParams, n: usize, mode: MatrixElementMode) -> (f64, f64) {
    let gs2 = params.g().powi(2) * params.sin2_theta();
    match mode {
        MatrixElementMode::Approximate => (gs2 * (n + 1) as f64, gs2 * n as f64),
        MatrixElementMode::Exact => {
            let gs = params.g() * params.sin2_theta().sqrt();
            let up = gs * exact_creation_element(n, params.displacement());
            let down = if n == 0 { 0.0 } else { gs * exact_absorption_element(n, params.displacement()) };
            (up * up, down * down)
        }
    }
}

/// ⟨n+1| e^{ip} (a + a†) e^{ip} |n⟩ with e^{ip} = D(−β), β = g cosθ/Ω.
///
/// D(−β)(a + a†)D(−β) = D(−2β)(a + a† − 2β), expanded over the three
/// intermediate states reached by a, a† and the identity.
pub fn exact_creation_element(n: usize, beta: f64) -> f64 {
    let d = |r: usize, c: usize| matrix_element_displacement(r, c, -2.0 * beta);
    let mut v = d(n + 1, n + 1) * ((n + 1) as f64).sqrt() - 2.0 * beta * d(n + 1, n);
    if n > 0 {
        v += d(n + 1, n - 1) * (n as f64).sqrt();
    }
    v
}

/// ⟨n−1| e^{−ip} (a + a†) e^{−ip} |n⟩ with e^{−ip} = D(β); n ≥ 1.
///
/// D(β)(a + a†)D(β) = D(2β)(a + a† + 2β).
pub fn exact_absorption_element(n: usize, beta: f64) -> f64 {
    debug_assert!(n >= 1);
    let d = |r: usize, c: usize| matrix_element_displacement(r, c, 2.0 * beta);
    d(n - 1, n + 1) * ((n + 1) as f64).sqrt()
        + d(n - 1, n - 1) * (n as f64).sqrt()
        + 2.0 * beta * d(n - 1, n)
}

fn decay_rate(sd: &SpectralSeries, omega: f64) -> Result<f64> {
    let (value, negative) = sd.eval_flagged(omega);
    if negative {
        return Err(Error::NegativeSpectrum { omega, value, threshold: -sd.tol() * sd.peak() });
    }
    Ok(value.max(0.0))
}

/// Golden-rule rate table. The self-consistent columns equal the golden-rule
/// ones and `selfconsistency` is [`SelfConsistency::GoldenRule`].
pub fn golden_rates(
    params: &ModelParams,
    sp: &SpectralSeries,
    sd: &SpectralSeries,
    n_max: usize,
    mode: MatrixElementMode,
) -> Result<RateTable> {
    let detuning = params.detuning();
    let (sp_up, sp_down) = (sp.eval(detuning), sp.eval(-detuning));
    let mut up = Vec::with_capacity(n_max + 1);
    let mut down = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let (eu, ed) = photon_elements_sq(params, n, mode);
        up.push(eu * sp_up);
        down.push(ed * sp_down);
    }
    let decay_scale = match mode {
        MatrixElementMode::Approximate => vec![1.0; n_max + 1],
        MatrixElementMode::Exact => {
            let two_beta = 2.0 * params.displacement();
            (0..=n_max).map(|n| matrix_element_displacement(n, n, two_beta).powi(2)).collect()
        }
    };
    Ok(RateTable {
        n_max,
        gamma_up_sc: up.clone(),
        gamma_down_sc: down.clone(),
        gamma_ph_up: up,
        gamma_ph_down: down,
        gamma_total: vec![0.0; n_max + 1],
        gamma_decay_down: decay_rate(sd, params.delta_e())?,
        gamma_decay_up: decay_rate(sd, -params.delta_e())?,
        decay_scale,
        detuning,
        matrix_elements: mode,
        selfconsistency: SelfConsistency::GoldenRule,
        diverged: Vec::new(),
    })
}

/// Broadened photon rates of a single level.
///
/// Works with continuous photon number so the semiclassical root finder can
/// use it; `up_coupling`/`down_coupling` are the squared matrix elements.
#[derive(Debug, Clone, Copy)]
pub struct BroadenedRates<'a> {
    sp: &'a SpectralSeries,
    detuning: f64,
    /// Added to Γ before Γ_T/2 (pump broadening, zero by default).
    extra_width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelRates {
    pub up: f64,
    pub down: f64,
    pub total: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl<'a> BroadenedRates<'a> {
    pub fn new(sp: &'a SpectralSeries, detuning: f64, extra_width: f64) -> Self {
        Self { sp, detuning, extra_width }
    }

    /// Rates for total broadening `gamma_t`.
    pub fn at(&self, up_coupling: f64, down_coupling: f64, gamma_t: f64) -> (f64, f64) {
        let extra = self.extra_width + 0.5 * gamma_t;
        let up = if up_coupling == 0.0 { 0.0 } else { up_coupling * self.sp.eval_broadened(self.detuning, extra) };
        let down = if down_coupling == 0.0 { 0.0 } else { down_coupling * self.sp.eval_broadened(-self.detuning, extra) };
        (up, down)
    }

    /// Golden-rule total Γ₊ + Γ₋ (no broadening beyond Γ).
    pub fn golden_total(&self, up_coupling: f64, down_coupling: f64) -> f64 {
        up_coupling * self.sp.eval(self.detuning) + down_coupling * self.sp.eval(-self.detuning)
    }

    pub fn one_shot(&self, up_coupling: f64, down_coupling: f64) -> LevelRates {
        let total = self.golden_total(up_coupling, down_coupling);
        let (up, down) = self.at(up_coupling, down_coupling, total);
        LevelRates { up, down, total, iterations: 1, converged: true }
    }

    /// Successive substitution Γ_T ← Γ₊ˢ(Γ_T) + Γ₋ˢ(Γ_T) from the golden-rule
    /// start, halving the step once the update changes sign.
    pub fn fixed_point(&self, up_coupling: f64, down_coupling: f64, tol: f64, max_iterations: usize) -> LevelRates {
        let mut total = self.golden_total(up_coupling, down_coupling);
        let mut relax = 1.0;
        let mut last_step = 0.0f64;
        for it in 1..=max_iterations {
            let (up, down) = self.at(up_coupling, down_coupling, total);
            let target = up + down;
            let step = target - total;
            if step * last_step < 0.0 {
                relax = 0.5;
            }
            last_step = step;
            let scale = target.abs().max(f64::MIN_POSITIVE);
            if step.abs() <= tol * scale {
                return LevelRates { up, down, total: target, iterations: it, converged: true };
            }
            total += relax * step;
        }
        let (up, down) = self.at(up_coupling, down_coupling, total);
        LevelRates { up, down, total, iterations: max_iterations, converged: false }
    }
}

/// Large-photon-number limit 4/(S_P(δω) + S_P(−δω)) of both self-consistent
/// rates.
pub fn saturation_rate(sp: &SpectralSeries, detuning: f64) -> f64 {
    4.0 / (sp.eval(detuning) + sp.eval(-detuning))
}

/// Builds S_P and S_D and returns the rate table with self-consistent
/// columns filled according to `opts.selfconsistency`.
pub fn selfconsistent_rates(params: &ModelParams, n_max: usize, opts: &RateOptions) -> Result<RateTable> {
    let sp = build_sp(params, opts.series_tol)?;
    let sd = build_sd(params, opts.series_tol)?;
    selfconsistent_rates_with(params, &sp, &sd, n_max, opts)
}

/// As [`selfconsistent_rates`] with prebuilt spectra.
pub fn selfconsistent_rates_with(
    params: &ModelParams,
    sp: &SpectralSeries,
    sd: &SpectralSeries,
    n_max: usize,
    opts: &RateOptions,
) -> Result<RateTable> {
    if !(opts.fixed_point_tol > 0.0 && opts.fixed_point_tol < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "fixed-point tolerance {} must lie in (0, 1)",
            opts.fixed_point_tol
        )));
    }
    let mut table = golden_rates(params, sp, sd, n_max, opts.matrix_elements)?;
    if opts.selfconsistency == SelfConsistency::GoldenRule {
        return Ok(table);
    }
    let extra = if opts.pump_broadening {
        0.5 * (table.excitation(params, 0) + table.relaxation(params, 0))
    } else {
        0.0
    };
    let kernel = BroadenedRates::new(sp, table.detuning, extra);
    for n in 0..=n_max {
        let (cu, cd) = photon_elements_sq(params, n, opts.matrix_elements);
        let lv = match opts.selfconsistency {
            SelfConsistency::FixedPoint => kernel.fixed_point(cu, cd, opts.fixed_point_tol, opts.max_iterations),
            _ => kernel.one_shot(cu, cd),
        };
        if !lv.converged {
            table.diverged.push(n);
        }
        table.gamma_up_sc[n] = lv.up;
        table.gamma_down_sc[n] = lv.down;
        table.gamma_total[n] = lv.total;
    }
    table.selfconsistency = opts.selfconsistency;
    Ok(table)
}
