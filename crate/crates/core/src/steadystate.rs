//! Photon statistics after adiabatic elimination of the emitter.
//!
//! The emitter relaxes much faster than the cavity, so each pair
//! (|+,n−1⟩, |−,n⟩) is slaved to the photon distribution ρ. Solving the 2×2
//! block in its stationary limit leaves a birth–death chain
//!
//! ```text
//! dρ_n/dt = γ⁺_n ρ_{n−1} − (γ⁺_{n+1} + γ⁻_n + κn) ρ_n + (γ⁻_{n+1} + κ(n+1)) ρ_{n+1}
//! γ⁺_n = Γ₊ Γ₊,ₙ₋₁ˢ / (Γ₊ + Γ₋ + Γ₊,ₙ₋₁ˢ + Γ₋,ₙˢ)
//! γ⁻_n = Γ₋ Γ₋,ₙˢ  / (Γ₊ + Γ₋ + Γ₊,ₙ₋₁ˢ + Γ₋,ₙˢ)
//! ```
//!
//! with product-form stationary state ρ_n = ρ₀ Π_{m≤n} γ⁺_m/(γ⁻_m + κm).

use crate::error::{Error, Result};
use crate::model::{thermal_weights, ModelParams};
use crate::rates::{selfconsistent_rates_with, BroadenedRates, RateOptions, RateTable, SelfConsistency};
use crate::spectral::{build_sd, build_sp, SpectralSeries};

/// Which photon rates enter γ±.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateSource {
    /// Γ±,ₙˢ (default).
    #[default]
    SelfConsistent,
    /// Γ±,ₙ without broadening.
    GoldenRule,
}

/// The effective birth–death chain; entries are indexed by n = 0..=n_max
/// with index 0 unused (zero).
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChain {
    pub n_max: usize,
    pub gamma_up: Vec<f64>,
    pub gamma_down: Vec<f64>,
    pub kappa: f64,
    /// (Γ₊, Γ₋) of the emitter at n = 0.
    pub pump: (f64, f64),
}

/// Builds γ±ₙ from the self-consistent rate columns.
pub fn build_chain(rates: &RateTable, params: &ModelParams) -> Result<EffectiveChain> {
    build_chain_from(rates, params, RateSource::SelfConsistent)
}

pub fn build_chain_from(rates: &RateTable, params: &ModelParams, source: RateSource) -> Result<EffectiveChain> {
    let (up_col, down_col) = match source {
        RateSource::SelfConsistent => (&rates.gamma_up_sc, &rates.gamma_down_sc),
        RateSource::GoldenRule => (&rates.gamma_ph_up, &rates.gamma_ph_down),
    };
    let n_max = rates.n_max;
    let mut gamma_up = vec![0.0; n_max + 1];
    let mut gamma_down = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        // block (|+,n−1⟩, |−,n⟩); the emitter rates may differ between the
        // two levels when exact matrix elements rescale the decay
        let (ex_lo, rel_lo) = (rates.excitation(params, n - 1), rates.relaxation(params, n - 1));
        let (ex_hi, rel_hi) = (rates.excitation(params, n), rates.relaxation(params, n));
        let (a, b) = (ex_lo + rel_lo, ex_hi + rel_hi);
        let (u, d) = (up_col[n - 1], down_col[n]);
        let det = a * b + a * d + u * b;
        if det == 0.0 || !det.is_finite() {
            return Err(Error::DeadChain { n });
        }
        gamma_up[n] = u * b * ex_lo / det;
        gamma_down[n] = d * a * rel_hi / det;
    }
    Ok(EffectiveChain {
        n_max,
        gamma_up,
        gamma_down,
        kappa: params.kappa(),
        pump: (rates.excitation(params, 0), rates.relaxation(params, 0)),
    })
}

/// Stationary photon-number distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonDistribution {
    pub rho: Vec<f64>,
    pub mean_n: f64,
    /// Variance over mean; 0 for the empty cavity.
    pub fano: f64,
    /// ρ at the truncation edge.
    pub tail_mass: f64,
}

pub const DEFAULT_TAIL_BOUND: f64 = 1e-9;

/// Product-form stationary distribution, accumulated in the log domain.
///
/// Fails with [`Error::TailMass`] when ρ at n_max exceeds `tail_bound`,
/// including chains with no normalizable solution.
pub fn stationary_distribution(chain: &EffectiveChain, tail_bound: f64) -> Result<PhotonDistribution> {
    let n_max = chain.n_max;
    let mut log_rho = vec![0.0f64; n_max + 1];
    for n in 1..=n_max {
        let num = chain.gamma_up[n];
        let den = chain.gamma_down[n] + chain.kappa * n as f64;
        let step = if num == 0.0 {
            f64::NEG_INFINITY
        } else if den == 0.0 {
            return Err(Error::TailMass {
                n_max,
                tail_mass: 1.0,
                bound: tail_bound,
                suggested: 2 * n_max.max(1),
            });
        } else {
            num.ln() - den.ln()
        };
        log_rho[n] = log_rho[n - 1] + step;
    }
    let top = log_rho.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut rho: Vec<f64> = log_rho.iter().map(|&l| (l - top).exp()).collect();
    let z: f64 = rho.iter().sum();
    rho.iter_mut().for_each(|r| *r /= z);
    let tail_mass = rho[n_max];
    if tail_mass > tail_bound {
        return Err(Error::TailMass { n_max, tail_mass, bound: tail_bound, suggested: 2 * n_max.max(1) });
    }
    let (mean_n, fano) = moments(&rho);
    Ok(PhotonDistribution { rho, mean_n, fano, tail_mass })
}

/// (mean, Fano factor) of a distribution over n = 0, 1, ...
pub fn moments(rho: &[f64]) -> (f64, f64) {
    let mean: f64 = rho.iter().enumerate().map(|(n, r)| n as f64 * r).sum();
    let var: f64 = rho.iter().enumerate().map(|(n, r)| (n as f64 - mean).powi(2) * r).sum();
    let fano = if mean > 0.0 { var / mean } else { 0.0 };
    (mean, fano)
}

/// Form of γ± used by the semiclassical condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChainForm {
    /// Full adiabatic-elimination fractions.
    #[default]
    Full,
    /// Large-photon-number form: Γ₊ + Γ₋ dropped from the denominators.
    LargePhoton,
}

/// γ±(n) for continuous photon number, used to locate
/// γ⁺(n) = γ⁻(n) + κn.
#[derive(Debug, Clone)]
pub struct ContinuousChain<'a> {
    kernel: BroadenedRates<'a>,
    sp: &'a SpectralSeries,
    coupling: f64,
    detuning: f64,
    excitation: f64,
    relaxation: f64,
    kappa: f64,
    source: RateSource,
    selfconsistency: SelfConsistency,
    fixed_point_tol: f64,
    max_iterations: usize,
    form: ChainForm,
}

impl<'a> ContinuousChain<'a> {
    /// `excitation`/`relaxation` are the emitter rates Γ± including decay.
    pub fn new(
        params: &ModelParams,
        sp: &'a SpectralSeries,
        excitation: f64,
        relaxation: f64,
        opts: &RateOptions,
        source: RateSource,
    ) -> Self {
        let extra = if opts.pump_broadening { 0.5 * (excitation + relaxation) } else { 0.0 };
        Self {
            kernel: BroadenedRates::new(sp, params.detuning(), extra),
            sp,
            coupling: params.g().powi(2) * params.sin2_theta(),
            detuning: params.detuning(),
            excitation,
            relaxation,
            kappa: params.kappa(),
            source,
            selfconsistency: opts.selfconsistency,
            fixed_point_tol: opts.fixed_point_tol,
            max_iterations: opts.max_iterations,
            form: ChainForm::Full,
        }
    }

    pub fn with_form(mut self, form: ChainForm) -> Self {
        self.form = form;
        self
    }

    pub fn excitation(&self) -> f64 {
        self.excitation
    }
    pub fn relaxation(&self) -> f64 {
        self.relaxation
    }

    /// (Γ₊ˢ, Γ₋ˢ) of the level with photon number `n` (continuous).
    pub fn level_rates(&self, n: f64) -> (f64, f64) {
        let (cu, cd) = (self.coupling * (n + 1.0), self.coupling * n.max(0.0));
        match (self.source, self.selfconsistency) {
            (RateSource::GoldenRule, _) | (_, SelfConsistency::GoldenRule) => {
                (cu * self.sp.eval(self.detuning), cd * self.sp.eval(-self.detuning))
            }
            (_, SelfConsistency::OneShot) => {
                let lv = self.kernel.one_shot(cu, cd);
                (lv.up, lv.down)
            }
            (_, SelfConsistency::FixedPoint) => {
                let lv = self.kernel.fixed_point(cu, cd, self.fixed_point_tol, self.max_iterations);
                (lv.up, lv.down)
            }
        }
    }

    /// (γ⁺(n), γ⁻(n)).
    pub fn gammas(&self, n: f64) -> (f64, f64) {
        let u = self.level_rates(n - 1.0).0;
        let d = self.level_rates(n).1;
        let den = match self.form {
            ChainForm::Full => self.excitation + self.relaxation + u + d,
            ChainForm::LargePhoton => u + d,
        };
        if den == 0.0 {
            return (0.0, 0.0);
        }
        (self.excitation * u / den, self.relaxation * d / den)
    }

    /// γ⁺/(γ⁻ + κn).
    pub fn ratio(&self, n: f64) -> f64 {
        let (up, down) = self.gammas(n);
        up / (down + self.kappa * n)
    }

    /// Net gain γ⁺ − γ⁻ − κn; same sign as ratio − 1.
    pub fn net_gain(&self, n: f64) -> f64 {
        let (up, down) = self.gammas(n);
        up - down - self.kappa * n
    }
}

/// A solution of γ⁺(n) = γ⁻(n) + κn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub n: f64,
    /// The ratio crosses 1 from above.
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Semiclassical {
    /// Every crossing found above n = 1, ascending.
    pub roots: Vec<Crossing>,
    /// Largest stable crossing, 0 below threshold.
    pub mean_n: f64,
    pub below_threshold: bool,
}

/// Grid points per decade in the crossing search.
const SCAN_POINTS_PER_DECADE: usize = 400;
const NO_LOSS_SCAN_LIMIT: f64 = 1e12;

/// Solves γ⁺(n)/(γ⁻(n) + κn) = 1 for n ≥ 1.
///
/// Brackets sign changes of the net gain on a logarithmic grid and refines
/// each by bisection. Above `Γ₊/κ` the gain can no longer beat the loss, so
/// the scan stops there.
pub fn mean_photons_semiclassical(chain: &ContinuousChain<'_>) -> Result<Semiclassical> {
    let hi = if chain.kappa > 0.0 {
        (chain.excitation / chain.kappa).max(2.0) * 1.01
    } else {
        NO_LOSS_SCAN_LIMIT
    };
    let decades = hi.log10().max(0.5);
    let count = ((decades * SCAN_POINTS_PER_DECADE as f64).ceil() as usize).max(50);
    let grid: Vec<f64> = (0..=count).map(|i| 10f64.powf(decades * i as f64 / count as f64)).collect();
    let values: Vec<f64> = grid.iter().map(|&x| chain.net_gain(x)).collect();
    let mut roots = Vec::new();
    for i in 0..count {
        let (fa, fb) = (values[i], values[i + 1]);
        if fa == 0.0 && i > 0 {
            continue;
        }
        if (fa > 0.0 && fb <= 0.0) || (fa < 0.0 && fb >= 0.0) {
            let n = bisect(|x| chain.net_gain(x), grid[i], grid[i + 1], fa);
            roots.push(Crossing { n, stable: fa > 0.0 });
        }
    }
    if chain.kappa == 0.0 && values[count] > 0.0 {
        return Err(Error::Regime(format!(
            "gain exceeds loss up to n = {NO_LOSS_SCAN_LIMIT:e}; photon number unbounded"
        )));
    }
    let designated = roots.iter().rev().find(|c| c.stable).map(|c| c.n);
    Ok(Semiclassical {
        roots,
        mean_n: designated.unwrap_or(0.0),
        below_threshold: designated.is_none(),
    })
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let positive_left = fa > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid);
        if (fm > 0.0) == positive_left {
            a = mid;
        } else {
            b = mid;
        }
        if (b - a) <= 1e-15 * b {
            break;
        }
    }
    0.5 * (a + b)
}

/// Options for a full steady-state solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyOptions {
    pub rates: RateOptions,
    pub source: RateSource,
    pub tail_bound: f64,
    /// Fixed truncation; `None` picks 4·(semiclassical + 10) and doubles
    /// until the tail is below the bound.
    pub n_max: Option<usize>,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self { rates: RateOptions::default(), source: RateSource::SelfConsistent, tail_bound: DEFAULT_TAIL_BOUND, n_max: None }
    }
}

/// Upper limit for the automatic truncation.
pub const MAX_AUTO_N: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub rates: RateTable,
    pub chain: EffectiveChain,
    pub distribution: PhotonDistribution,
    pub semiclassical: Semiclassical,
}

/// Spectra, rates, chain, distribution and semiclassical root in one go.
pub fn solve_steady(params: &ModelParams, opts: &SteadyOptions) -> Result<SteadyState> {
    let sp = build_sp(params, opts.rates.series_tol)?;
    let sd = build_sd(params, opts.rates.series_tol)?;
    solve_steady_with(params, &sp, &sd, opts)
}

pub fn solve_steady_with(
    params: &ModelParams,
    sp: &SpectralSeries,
    sd: &SpectralSeries,
    opts: &SteadyOptions,
) -> Result<SteadyState> {
    if !(opts.tail_bound > 0.0 && opts.tail_bound < 1.0) {
        return Err(Error::InvalidArgument(format!("tail bound {} must lie in (0, 1)", opts.tail_bound)));
    }
    let probe = selfconsistent_rates_with(params, sp, sd, 0, &opts.rates)?;
    let (ex, rel) = (probe.excitation(params, 0), probe.relaxation(params, 0));
    let cont = ContinuousChain::new(params, sp, ex, rel, &opts.rates, opts.source);
    let semiclassical = mean_photons_semiclassical(&cont)?;

    let mut n_max = match opts.n_max {
        Some(n) => n,
        None => (4.0 * (semiclassical.mean_n + 10.0)).ceil() as usize,
    };
    loop {
        let rates = selfconsistent_rates_with(params, sp, sd, n_max, &opts.rates)?;
        let chain = build_chain_from(&rates, params, opts.source)?;
        match stationary_distribution(&chain, opts.tail_bound) {
            Ok(distribution) => return Ok(SteadyState { rates, chain, distribution, semiclassical }),
            Err(Error::TailMass { suggested, .. }) if opts.n_max.is_none() && suggested <= MAX_AUTO_N => {
                n_max = suggested;
            }
            Err(e) => return Err(e),
        }
    }
}

/// Closed-form small-photon-number estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallNEstimate {
    /// 2Γ/(g² sin²θ S_P(ω_L)) − 4Γκ/(g⁴ sin⁴θ S_P(ω_L)²).
    pub closed_form: f64,
    /// Same with S_P(ω_L) replaced by its resonant single peak
    /// 2A e^{−A}/Γ, A = 4ε_C cos²θ/ω_L.
    pub exponential_form: f64,
    pub sp_resonance: f64,
    pub sp_single_peak: f64,
    /// Share of S_P(ω_L) carried by the terms centred at ω_L.
    pub resonant_fraction: f64,
}

/// Relative tolerance for Γ₊ = Γ₋ = Γ.
pub const SMALL_N_RATE_GATE: f64 = 1e-6;
/// Relative tolerance for δω = ω_L.
pub const SMALL_N_DETUNING_GATE: f64 = 1e-9;
/// Largest kT/ω_L accepted as low temperature.
pub const LOW_TEMPERATURE_GATE: f64 = 0.1;

/// Small-photon-number estimate. Requires Γ₊ = Γ₋ = Γ (emitter rates
/// including decay), δω = ω_L and kT ≤ ω_L/10; otherwise returns
/// [`Error::Regime`].
pub fn small_n_estimate(params: &ModelParams, sp: &SpectralSeries, sd: &SpectralSeries) -> Result<SmallNEstimate> {
    let gamma = params.gamma_env();
    let ex = params.pump_up() + sd.eval(-params.delta_e());
    let rel = params.pump_down() + sd.eval(params.delta_e());
    if (ex - gamma).abs() > SMALL_N_RATE_GATE * gamma || (rel - gamma).abs() > SMALL_N_RATE_GATE * gamma {
        return Err(Error::Regime(format!(
            "needs excitation = relaxation = Gamma_env = {gamma}; got {ex} and {rel}"
        )));
    }
    let omega_l = params.omega_l();
    if (params.detuning() - omega_l).abs() > SMALL_N_DETUNING_GATE * omega_l {
        return Err(Error::Regime(format!(
            "needs detuning = omega_L = {omega_l}; got {}",
            params.detuning()
        )));
    }
    if params.kt() > LOW_TEMPERATURE_GATE * omega_l {
        return Err(Error::Regime(format!("needs kT <= omega_L/10; got kT = {}", params.kt())));
    }
    let gs2 = params.g().powi(2) * params.sin2_theta();
    if gs2 == 0.0 {
        return Err(Error::Regime("needs g sin(theta) > 0".into()));
    }
    let s = sp.eval(omega_l);
    let closed_form = 2.0 * gamma / (gs2 * s) - 4.0 * gamma * params.kappa() / (gs2 * gs2 * s * s);
    let amp = params.eta_zero_temperature();
    let single = 2.0 * amp * (-amp).exp() / gamma;
    let exponential_form = 2.0 * gamma / (gs2 * single) * (1.0 - 2.0 * params.kappa() / (gs2 * single));
    let resonant: f64 = sp
        .terms()
        .iter()
        .filter(|t| t.center == omega_l)
        .map(|t| t.value(omega_l))
        .sum::<f64>()
        * sp.prefactor();
    Ok(SmallNEstimate {
        closed_form,
        exponential_form,
        sp_resonance: s,
        sp_single_peak: single,
        resonant_fraction: resonant / s,
    })
}

/// Large-photon-number diagnostics at photon number n.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeNValidity {
    /// (Γ²/(g² sin²θ)) (e^{η₋}/η₋) (1/n); the approximations need ≪ 1.
    pub metric: f64,
    /// Γ₊,ₙ₋₁ˢ ≈ 2Γ − (2Γ³/(g² sin²θ)) (e^{η₋}/η₋)(1/n).
    pub gamma_up_approx: f64,
    /// Γ₋,ₙˢ ≈ (2g⁴ sin⁴θ/(Γω_L²)) f(η₋) n².
    pub gamma_down_approx: f64,
    pub f_eta: f64,
}

/// f(η) = η e^{−2η} Σ_k η^k/(k! (k+1)²).
pub fn f_eta(eta: f64) -> f64 {
    if eta == 0.0 {
        return 0.0;
    }
    let mut term = 1.0;
    let mut sum = 0.0;
    let mut k = 0usize;
    loop {
        let contrib = term / ((k + 1) as f64).powi(2);
        sum += contrib;
        k += 1;
        term *= eta / k as f64;
        if k as f64 > eta && contrib < 1e-17 * sum {
            break;
        }
    }
    eta * (-2.0 * eta).exp() * sum
}

pub fn large_n_validity(params: &ModelParams, n: f64) -> LargeNValidity {
    let gamma = params.gamma_env();
    let gs2 = params.g().powi(2) * params.sin2_theta();
    let eta = thermal_weights(params).eta_minus;
    let metric = if eta == 0.0 || gs2 == 0.0 || n == 0.0 {
        f64::INFINITY
    } else {
        gamma * gamma / gs2 * eta.exp() / eta / n
    };
    let f = f_eta(eta);
    LargeNValidity {
        metric,
        gamma_up_approx: 2.0 * gamma * (1.0 - metric),
        gamma_down_approx: 2.0 * gs2 * gs2 / (gamma * params.omega_l().powi(2)) * f * n * n,
        f_eta: f,
    }
}

/// Root of Γ²ω_L²/(g⁴ sin⁴θ f(η₋)) = ((Γ₋ + κn)/(Γ₊ − κn)) n² on
/// 0 < n < Γ₊/κ, with Γ± the emitter rates including decay.
pub fn large_n_root(params: &ModelParams, excitation: f64, relaxation: f64) -> Result<f64> {
    let gs2 = params.g().powi(2) * params.sin2_theta();
    let f = f_eta(thermal_weights(params).eta_minus);
    if gs2 == 0.0 || f == 0.0 {
        return Err(Error::Regime("needs g sin(theta) > 0 and eta_minus > 0".into()));
    }
    let lhs = (params.gamma_env() * params.omega_l()).powi(2) / (gs2 * gs2 * f);
    let kappa = params.kappa();
    let rhs = |n: f64| (relaxation + kappa * n) / (excitation - kappa * n) * n * n;
    let mut hi = if kappa > 0.0 { excitation / kappa } else { 1.0 };
    if kappa == 0.0 {
        if relaxation == 0.0 {
            return Err(Error::Regime("no loss and no relaxation: photon number unbounded".into()));
        }
        while rhs(hi) < lhs {
            hi *= 2.0;
        }
    }
    let g = |n: f64| if n >= excitation / kappa { f64::INFINITY } else { rhs(n) - lhs };
    Ok(bisect(g, 0.0, hi, -lhs))
}
