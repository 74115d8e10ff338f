//! Independent time-domain oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{Complex, DMatrix};
use polaron_lasing::ModelParams;

pub type C64 = Complex<f64>;

/// Thermal weights from the Bose occupation, (η₊, η₋) = A·(n̄, n̄ + 1).
pub fn bose_weights(p: &ModelParams) -> (f64, f64) {
    let amp = 4.0 * p.eps_c() * p.cos2_theta() / p.omega_l();
    let occupation = if p.kt() == 0.0 { 0.0 } else { 1.0 / ((p.omega_l() / p.kt()).exp() - 1.0) };
    (amp * occupation, amp * (occupation + 1.0))
}

/// Polaron correlator exp[A coth(x/2)(cos ω_L t − 1) − iA sin ω_L t].
pub fn polaron_correlator(p: &ModelParams, t: f64) -> C64 {
    let amp = 4.0 * p.eps_c() * p.cos2_theta() / p.omega_l();
    let coth = if p.kt() == 0.0 { 1.0 } else { 1.0 / (p.omega_l() / (2.0 * p.kt())).tanh() };
    let phase = p.omega_l() * t;
    C64::new(amp * coth * (phase.cos() - 1.0), -amp * phase.sin()).exp()
}

/// Decay correlator [⟨x̄x̄⟩(t) − 4⟨p̄x̄⟩(t)²] · C_P(t).
pub fn decay_correlator(p: &ModelParams, t: f64) -> C64 {
    let (ep, em) = bose_weights(p);
    let wl = p.omega_l();
    let tan = p.theta().tan();
    let fwd = C64::from_polar(1.0, -wl * t);
    let back = fwd.conj();
    let xx = (fwd * em + back * ep) * (tan * tan * wl * wl / 4.0);
    let px = C64::i() * (wl * tan / 4.0) * (back * ep - fwd * em);
    (xx - px * px * 4.0) * polaron_correlator(p, t)
}

/// Thermal single-mode trace ⟨O(t) O†⟩ for O = e^{−ip̄} x̄ e^{−ip̄}
/// (decay) or O = e^{−2ip̄} (polaron), truncated to `levels` Fock states.
pub struct FockTrace {
    energies: Vec<f64>,
    populations: Vec<f64>,
    polaron: DMatrix<C64>,
    decay: DMatrix<C64>,
}

impl FockTrace {
    pub fn new(p: &ModelParams, levels: usize) -> Self {
        let wl = p.omega_l();
        let coupling = (p.eps_c() * wl).sqrt();
        let (s, c) = p.theta().sin_cos();
        let lower = DMatrix::<C64>::from_fn(levels, levels, |i, j| {
            if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) }
        });
        let raise = lower.adjoint();
        let x = (&lower + &raise) * C64::new(s * coupling, 0.0);
        let p_bar = (&raise - &lower) * C64::new(0.0, c * coupling / wl);
        let half = (p_bar * C64::new(0.0, -1.0)).exp();
        let decay = &half * x * &half;
        let polaron = &half * &half;
        let energies: Vec<f64> = (0..levels).map(|n| wl * n as f64).collect();
        let mut populations: Vec<f64> = energies
            .iter()
            .map(|e| if p.kt() == 0.0 { if *e == 0.0 { 1.0 } else { 0.0 } } else { (-e / p.kt()).exp() })
            .collect();
        let z: f64 = populations.iter().sum();
        populations.iter_mut().for_each(|w| *w /= z);
        Self { energies, populations, polaron, decay }
    }

    fn correlate(&self, op: &DMatrix<C64>, t: f64) -> C64 {
        let n = self.energies.len();
        let evolved = DMatrix::from_fn(n, n, |i, j| op[(i, j)] * C64::from_polar(1.0, (self.energies[i] - self.energies[j]) * t));
        let product = evolved * op.adjoint();
        (0..n).map(|i| product[(i, i)] * self.populations[i]).sum()
    }

    pub fn polaron(&self, t: f64) -> C64 {
        self.correlate(&self.polaron, t)
    }

    pub fn decay(&self, t: f64) -> C64 {
        self.correlate(&self.decay, t)
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1] by Newton iteration.
pub fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    (0..order)
        .map(|i| {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            let mut deriv = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=order {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                deriv = order as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / deriv;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * deriv * deriv))
        })
        .collect()
}

/// ∫ C(t) e^{iωt} e^{−Γ|t|} dt = 2 Re ∫₀^∞ for C(−t) = C(t)*, cut at 40/Γ.
pub fn spectrum_by_quadrature(correlator: &dyn Fn(f64) -> C64, omega: f64, gamma: f64, panel: f64) -> f64 {
    let rule = gauss_legendre(16);
    let end = 40.0 / gamma;
    let panels = (end / panel).ceil() as usize;
    let h = end / panels as f64;
    let mut sum = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * h;
        for &(x, w) in &rule {
            let t = mid + 0.5 * h * x;
            let v = correlator(t) * C64::from_polar((-gamma * t).exp(), omega * t);
            sum += w * 0.5 * h * v.re;
        }
    }
    2.0 * sum
}
