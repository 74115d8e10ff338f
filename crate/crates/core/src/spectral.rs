//! Broadened spectral functions of the broad mode as truncated series of
//! Lorentzians.
//!
//! Both spectra come from a single-mode reservoir at ω_L whose correlator is
//! a double Poisson series in the absorption/emission weights (η₊, η₋).
//! Multiplying by e^{−Γ|t|} and Fourier transforming turns every term into a
//! Lorentzian of half-width Γ:
//!
//! * `S_P(ω) = e^{−(η₊+η₋)} Σ_{m,n} η₊^m η₋^n/(m! n!) · 2Γ/(Γ² + (ω − (n−m)ω_L)²)`
//! * `S_D(ω) = e^{−(η₊+η₋)} Σ_{m,n} η₊^m η₋^n/(m! n!) · S_D,eff(ω − (n−m)ω_L)`
//!
//! where `S_D,eff` is a sum of five Lorentzians at 0, ±ω_L, ±2ω_L with
//! weights ∝ (−2η₋η₊, η₋, η₊, η₊², η₋²) and common scale ω_L² tan²θ/4.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{thermal_weights, ModelParams, ThermalWeights};
use crate::special::poisson_tail;

/// Default neglected Poisson mass.
pub const DEFAULT_SERIES_TOL: f64 = 1e-10;

/// Hard cap on either Poisson index.
pub const MAX_ORDER: usize = 512;

/// `weight · 2·half_width / (half_width² + (ω − center)²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lorentzian {
    pub weight: f64,
    pub center: f64,
    pub half_width: f64,
}

impl Lorentzian {
    #[inline]
    pub fn value(&self, omega: f64) -> f64 {
        let d = omega - self.center;
        self.weight * 2.0 * self.half_width / (self.half_width * self.half_width + d * d)
    }

    /// ∫ value dω over the real line.
    pub fn integral(&self) -> f64 {
        2.0 * PI * self.weight
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumKind {
    /// Polaronic coupling, S_P.
    Polaron,
    /// Dressed linear coupling, S_D.
    Decay,
}

/// Origin of a flattened term: outer Poisson indices (m absorbed, n emitted
/// broad-mode quanta) and, for S_D, which of the five inner Lorentzians.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TermLabel {
    pub m: usize,
    pub n: usize,
    pub inner: Option<DecayTerm>,
}

/// The five Lorentzians of S_D,eff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayTerm {
    /// η₋ at +ω_L
    Emit,
    /// η₊ at −ω_L
    Absorb,
    /// η₊² at −2ω_L
    AbsorbTwice,
    /// η₋² at +2ω_L
    EmitTwice,
    /// −2η₋η₊ at 0
    Cross,
}

impl DecayTerm {
    pub const ALL: [DecayTerm; 5] = [
        DecayTerm::Emit,
        DecayTerm::Absorb,
        DecayTerm::AbsorbTwice,
        DecayTerm::EmitTwice,
        DecayTerm::Cross,
    ];

    /// (centre in units of ω_L, weight before the ω_L² tan²θ/4 scale)
    fn shape(self, w: ThermalWeights) -> (f64, f64) {
        let (ep, em) = (w.eta_plus, w.eta_minus);
        match self {
            DecayTerm::Emit => (1.0, em),
            DecayTerm::Absorb => (-1.0, ep),
            DecayTerm::AbsorbTwice => (-2.0, ep * ep),
            DecayTerm::EmitTwice => (2.0, em * em),
            DecayTerm::Cross => (0.0, -2.0 * em * ep),
        }
    }
}

/// A truncated, flattened series of Lorentzians with a global prefactor.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralSeries {
    terms: Vec<Lorentzian>,
    labels: Vec<TermLabel>,
    prefactor: f64,
    kind: SpectrumKind,
    truncation_bound: f64,
    tol: f64,
    order: usize,
    weights: ThermalWeights,
    peak: f64,
}

/// Smallest common order K (indices 0..=K for both m and n) whose neglected
/// Poisson mass is below `tol`. Returns (K, neglected-mass bound).
pub fn truncation_order(w: ThermalWeights, tol: f64, cap: usize) -> Result<(usize, f64)> {
    let bound = |k: usize| poisson_tail(w.eta_plus, k) + poisson_tail(w.eta_minus, k);
    if bound(0) < tol {
        return Ok((0, bound(0)));
    }
    // tail is monotone in k: double, then bisect
    let mut hi = 1usize;
    while bound(hi) >= tol {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if bound(mid) < tol {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    if hi > cap {
        return Err(Error::Truncation { needed: hi, cap });
    }
    Ok((hi, bound(hi)))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("series tolerance {tol} must lie in (0, 1)")))
    }
}

/// Unnormalized Poisson factors η^k/k! for k = 0..=order.
fn poisson_factors(eta: f64, order: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut a = 1.0;
    out.push(a);
    for k in 1..=order {
        a *= eta / k as f64;
        out.push(a);
    }
    out
}

/// S_P as a double Poisson series of Lorentzians.
pub fn build_sp(params: &ModelParams, tol: f64) -> Result<SpectralSeries> {
    check_tol(tol)?;
    let w = thermal_weights(params);
    let (order, bound) = truncation_order(w, tol, MAX_ORDER)?;
    let (ap, am) = (poisson_factors(w.eta_plus, order), poisson_factors(w.eta_minus, order));
    let gamma = params.gamma_env();
    let mut terms = Vec::new();
    let mut labels = Vec::new();
    for (m, a) in ap.iter().enumerate() {
        for (n, b) in am.iter().enumerate() {
            let weight = a * b;
            if weight == 0.0 {
                continue;
            }
            terms.push(Lorentzian {
                weight,
                center: (n as f64 - m as f64) * params.omega_l(),
                half_width: gamma,
            });
            labels.push(TermLabel { m, n, inner: None });
        }
    }
    Ok(SpectralSeries::assemble(terms, labels, SpectrumKind::Polaron, w, order, bound, tol))
}

/// S_D as the Poisson-weighted convolution of the five-Lorentzian S_D,eff,
/// flattened into signed Lorentzians.
///
/// Rejects θ = π/2, where tan²θ diverges.
pub fn build_sd(params: &ModelParams, tol: f64) -> Result<SpectralSeries> {
    check_tol(tol)?;
    let cos2 = params.cos2_theta();
    if cos2 == 0.0 {
        return Err(Error::Regime(
            "decay spectrum is undefined at theta = pi/2 (tan^2 theta diverges)".into(),
        ));
    }
    let tan2 = params.sin2_theta() / cos2;
    let w = thermal_weights(params);
    let (order, bound) = truncation_order(w, tol, MAX_ORDER)?;
    let (ap, am) = (poisson_factors(w.eta_plus, order), poisson_factors(w.eta_minus, order));
    let omega_l = params.omega_l();
    let scale = omega_l * omega_l * tan2 / 4.0;
    let gamma = params.gamma_env();
    let inner: Vec<(DecayTerm, f64, f64)> = DecayTerm::ALL
        .iter()
        .map(|&t| {
            let (c, wt) = t.shape(w);
            (t, c * omega_l, scale * wt)
        })
        .filter(|&(_, _, wt)| wt != 0.0)
        .collect();
    let mut terms = Vec::new();
    let mut labels = Vec::new();
    for (m, a) in ap.iter().enumerate() {
        for (n, b) in am.iter().enumerate() {
            let outer = a * b;
            if outer == 0.0 {
                continue;
            }
            let shift = (n as f64 - m as f64) * omega_l;
            for &(t, c, wt) in &inner {
                terms.push(Lorentzian { weight: outer * wt, center: shift + c, half_width: gamma });
                labels.push(TermLabel { m, n, inner: Some(t) });
            }
        }
    }
    Ok(SpectralSeries::assemble(terms, labels, SpectrumKind::Decay, w, order, bound, tol))
}

impl SpectralSeries {
    fn assemble(
        terms: Vec<Lorentzian>,
        labels: Vec<TermLabel>,
        kind: SpectrumKind,
        weights: ThermalWeights,
        order: usize,
        truncation_bound: f64,
        tol: f64,
    ) -> Self {
        let mut s = SpectralSeries {
            terms,
            labels,
            prefactor: (-weights.total()).exp(),
            kind,
            truncation_bound,
            tol,
            order,
            weights,
            peak: 0.0,
        };
        let mut centers: Vec<f64> = s.terms.iter().map(|t| t.center).collect();
        centers.sort_by(f64::total_cmp);
        centers.dedup();
        s.peak = centers.iter().map(|&c| s.eval(c).abs()).fold(0.0, f64::max);
        s
    }

    pub fn terms(&self) -> &[Lorentzian] {
        &self.terms
    }
    pub fn labels(&self) -> &[TermLabel] {
        &self.labels
    }
    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }
    pub fn kind(&self) -> SpectrumKind {
        self.kind
    }
    /// Upper bound on the neglected Poisson mass.
    pub fn truncation_bound(&self) -> f64 {
        self.truncation_bound
    }
    pub fn tol(&self) -> f64 {
        self.tol
    }
    /// Largest retained Poisson index.
    pub fn order(&self) -> usize {
        self.order
    }
    pub fn thermal_weights(&self) -> ThermalWeights {
        self.weights
    }
    /// Largest |S| found at the term centres.
    pub fn peak(&self) -> f64 {
        self.peak
    }

    /// Evaluates the series at `omega`.
    pub fn eval(&self, omega: f64) -> f64 {
        self.prefactor * self.terms.iter().map(|t| t.value(omega)).sum::<f64>()
    }

    /// Value together with a flag that is set when the value is negative
    /// beyond `tol · peak`. Only the signed cross terms of S_D can trip it.
    pub fn eval_flagged(&self, omega: f64) -> (f64, bool) {
        let v = self.eval(omega);
        (v, v < -self.tol * self.peak)
    }

    /// Evaluates the series with every half-width widened by `extra`.
    /// Used for self-consistently broadened rates.
    pub fn eval_broadened(&self, omega: f64, extra: f64) -> f64 {
        self.prefactor
            * self
                .terms
                .iter()
                .map(|t| Lorentzian { half_width: t.half_width + extra, ..*t }.value(omega))
                .sum::<f64>()
    }

    /// Analytic integral over all frequencies.
    pub fn integral(&self) -> f64 {
        self.prefactor * self.terms.iter().map(Lorentzian::integral).sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn params(edit: impl FnOnce(&mut crate::ParamValues)) -> ModelParams {
        ModelParams::default_scenario().with(edit).unwrap()
    }

    #[test]
    fn transversal_coupling_is_single_lorentzian() {
        let p = params(|v| {
            v.theta = FRAC_PI_2;
            v.gamma_env = 0.05;
        });
        let s = build_sp(&p, 1e-10).unwrap();
        assert_eq!(s.terms().len(), 1);
        assert_eq!(s.prefactor(), 1.0);
        assert_relative_eq!(s.eval(0.0), 40.0, max_relative = 1e-15);
        for &w in &[-3.0, -0.1, 0.02, 1.0] {
            assert_relative_eq!(s.eval(w), 2.0 * 0.05 / (0.05f64.powi(2) + w * w), max_relative = 1e-14);
        }
    }

    #[test]
    fn sum_rule() {
        for &(kt, eps) in &[(0.1, 0.25), (0.5, 1.0), (0.0, 0.7), (2.0, 0.3)] {
            let s = build_sp(&params(|v| { v.kt = kt; v.eps_c = eps; }), 1e-10).unwrap();
            let i = s.integral();
            assert!(i <= 2.0 * PI * (1.0 + 1e-14));
            assert!(i >= 2.0 * PI * (1.0 - s.truncation_bound()) * (1.0 - 1e-14));
            assert!(s.truncation_bound() < 1e-10);
        }
    }

    #[test]
    fn tails_decay_as_inverse_square() {
        let s = build_sp(&params(|_| {}), 1e-10).unwrap();
        let (a, b) = (s.eval(1e4), s.eval(2e4));
        assert_relative_eq!(a / b, 4.0, max_relative = 1e-3);
        assert!(s.eval(1e8) < 1e-12);
        assert!(s.eval(-1e8) < 1e-12);
    }

    #[test]
    fn detailed_balance_per_term() {
        let p = params(|v| { v.kt = 0.4; v.eps_c = 0.8; });
        let s = build_sp(&p, 1e-12).unwrap();
        let x = p.omega_l() / p.kt();
        let find = |m, n| {
            s.labels().iter().position(|l| l.m == m && l.n == n).map(|i| s.terms()[i])
        };
        let mut checked = 0;
        for (l, t) in s.labels().iter().zip(s.terms()) {
            if l.n > l.m {
                let k = (l.n - l.m) as f64;
                let mirror = find(l.n, l.m).expect("mirror retained");
                assert_relative_eq!(mirror.center, -t.center);
                assert_relative_eq!(mirror.weight / t.weight, (-k * x).exp(), max_relative = 1e-12);
                checked += 1;
            }
        }
        assert!(checked > 10);
    }

    #[test]
    fn equal_weights_give_even_spectrum() {
        // force eta_+ = eta_- by hand
        let p = params(|_| {});
        let mut s = build_sp(&p, 1e-10).unwrap();
        let eta = 0.4;
        let order = s.order();
        let a = poisson_factors(eta, order);
        for (l, t) in s.labels.iter().zip(s.terms.iter_mut()) {
            t.weight = a[l.m] * a[l.n];
        }
        for &w in &[0.0, 0.3, 1.0, 1.7, 5.0] {
            assert_relative_eq!(s.eval(w), s.eval(-w), max_relative = 1e-14);
        }
    }

    #[test]
    fn decay_spectrum_zero_temperature_has_two_inner_terms() {
        let p = params(|v| v.kt = 0.0);
        let s = build_sd(&p, 1e-10).unwrap();
        let outer00: Vec<_> = s
            .labels()
            .iter()
            .zip(s.terms())
            .filter(|(l, _)| l.m == 0 && l.n == 0)
            .collect();
        assert_eq!(outer00.len(), 2);
        assert_eq!(outer00[0].0.inner, Some(DecayTerm::Emit));
        assert_eq!(outer00[0].1.center, 1.0);
        assert_eq!(outer00[1].0.inner, Some(DecayTerm::EmitTwice));
        assert_eq!(outer00[1].1.center, 2.0);
        assert!(s.labels().iter().all(|l| l.m == 0));
    }

    #[test]
    fn decay_spectrum_vanishes_without_broad_coupling() {
        let s = build_sd(&params(|v| v.eps_c = 0.0), 1e-10).unwrap();
        assert!(s.terms().is_empty());
        for &w in &[-2.0, 0.0, 1.05] {
            assert_eq!(s.eval(w), 0.0);
        }
    }

    #[test]
    fn decay_spectrum_rejects_transversal_limit() {
        let err = build_sd(&params(|v| v.theta = FRAC_PI_2), 1e-10).unwrap_err();
        assert!(err.is_regime());
    }

    #[test]
    fn decay_spectrum_is_nonnegative() {
        for &(kt, eps, gamma) in &[(0.1, 0.25, 0.02), (3.0, 0.5, 0.01), (10.0, 1.0, 0.001)] {
            let p = params(|v| { v.kt = kt; v.eps_c = eps; v.gamma_env = gamma; v.theta = FRAC_PI_4; });
            let s = build_sd(&p, 1e-12).unwrap();
            for i in -400..=400 {
                let (_, flagged) = s.eval_flagged(i as f64 * 0.01);
                assert!(!flagged);
            }
        }
    }

    #[test]
    fn thermal_asymmetry_of_peaks() {
        let peak_sum = |s: &SpectralSeries, c: f64| -> f64 {
            s.terms().iter().filter(|t| t.center == c).map(|t| t.weight).sum()
        };
        let p = params(|v| { v.gamma_env = 0.05; v.kt = 0.1; v.eps_c = 0.25; });
        let s = build_sp(&p, 1e-12).unwrap();
        assert_relative_eq!(peak_sum(&s, 1.0) / peak_sum(&s, -1.0), 10f64.exp(), max_relative = 1e-12);
        // The full ratio S_P(w_L)/S_P(-w_L) carries the tails of the other
        // peaks, a relative correction ~ Γ²/η₊ at -w_L. Narrow peaks recover
        // the Boltzmann factor.
        let p = params(|v| { v.gamma_env = 1e-4; v.kt = 0.1; v.eps_c = 0.25; });
        let s = build_sp(&p, 1e-12).unwrap();
        assert_relative_eq!(s.eval(1.0) / s.eval(-1.0), 10f64.exp(), max_relative = 2e-3);
    }

    #[test]
    fn truncation_hits_cap() {
        let w = ThermalWeights { eta_plus: 600.0, eta_minus: 600.0 };
        assert!(matches!(truncation_order(w, 1e-10, MAX_ORDER), Err(Error::Truncation { .. })));
        let w = ThermalWeights { eta_plus: 0.0, eta_minus: 0.0 };
        assert_eq!(truncation_order(w, 1e-10, MAX_ORDER).unwrap(), (0, 0.0));
    }

    #[test]
    fn bad_tolerance() {
        let p = ModelParams::default_scenario();
        assert!(build_sp(&p, 0.0).is_err());
        assert!(build_sd(&p, 1.0).is_err());
    }
}
