use std::f64::consts::PI;

use approx::assert_relative_eq;
use polaron_lasing::steadystate::{moments, ContinuousChain};
use polaron_lasing::{
    build_sd, build_sp, solve_steady, stationary_distribution, thermal_weights, EffectiveChain, ModelParams,
    RateOptions, RateSource, SteadyOptions,
};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = ModelParams> {
    (0.0..1.5f64, 0.0..0.6f64, 0.05..1.5f64, 0.005..0.2f64, 0.3..2.0f64).prop_filter_map(
        "thermal weights too large",
        |(kt, eps_c, theta, gamma, omega_l)| {
            let p = ModelParams::default_scenario()
                .with(|v| {
                    v.kt = kt;
                    v.eps_c = eps_c;
                    v.theta = theta;
                    v.gamma_env = gamma;
                    v.omega_l = omega_l;
                })
                .ok()?;
            (thermal_weights(&p).total() <= 5.0).then_some(p)
        },
    )
}

fn random_chain() -> impl Strategy<Value = EffectiveChain> {
    (1usize..60, 0.0..1e-2f64).prop_flat_map(|(n_max, kappa)| {
        (
            prop::collection::vec(1e-4..1.0f64, n_max),
            prop::collection::vec(0.0..1.0f64, n_max),
        )
            .prop_map(move |(up, down)| EffectiveChain {
                n_max,
                gamma_up: std::iter::once(0.0).chain(up).collect(),
                gamma_down: std::iter::once(0.0).chain(down).map(|d| d + 0.5).collect(),
                kappa,
                pump: (1.0, 1.0),
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn polaron_spectrum_is_a_normalized_density(p in params(), w in -4.0..4.0f64) {
        let sp = build_sp(&p, 1e-10).unwrap();
        prop_assert!(sp.eval(w) >= 0.0);
        prop_assert!((sp.integral() / (2.0 * PI) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn decay_spectrum_is_nonnegative(p in params(), w in -4.0..4.0f64) {
        let sd = build_sd(&p, 1e-10).unwrap();
        let (value, flagged) = sd.eval_flagged(w);
        prop_assert!(!flagged, "S_D({w}) = {value}");
    }

    #[test]
    fn lorentzian_tails_fall_as_inverse_square(p in params()) {
        let sp = build_sp(&p, 1e-10).unwrap();
        let (a, b) = (1e4, 2e4);
        let ratio = sp.eval(b) / sp.eval(a);
        prop_assert!((ratio - 0.25).abs() < 1e-3);
    }

    #[test]
    fn product_form_balances_every_edge(chain in random_chain()) {
        let d = stationary_distribution(&chain, 1.0 - 1e-12).unwrap();
        let total: f64 = d.rho.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for n in 0..chain.n_max {
            let forward = d.rho[n] * chain.gamma_up[n + 1];
            let backward = d.rho[n + 1] * (chain.gamma_down[n + 1] + chain.kappa * (n + 1) as f64);
            prop_assert!((forward - backward).abs() <= 1e-10 * forward.max(backward).max(1e-300));
        }
        let (mean, fano) = moments(&d.rho);
        prop_assert_eq!(mean, d.mean_n);
        prop_assert_eq!(fano, d.fano);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn mean_photon_number_falls_with_loss(k1 in 5e-7..4e-6f64, k2 in 5e-7..4e-6f64) {
        let (lo, hi) = if k1 < k2 { (k1, k2) } else { (k2, k1) };
        let mean = |kappa| {
            let p = ModelParams::default_scenario().with(|v| v.kappa = kappa).unwrap();
            solve_steady(&p, &SteadyOptions::default()).unwrap().distribution.mean_n
        };
        prop_assert!(mean(hi) <= mean(lo) * (1.0 + 1e-12));
    }

    #[test]
    fn mean_photon_number_grows_with_pump(a in 0.005..0.1f64, b in 0.005..0.1f64) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        let mean = |pump| {
            let p = ModelParams::default_scenario().with(|v| v.pump_up = pump).unwrap();
            solve_steady(&p, &SteadyOptions::default()).unwrap().distribution.mean_n
        };
        prop_assert!(mean(hi) >= mean(lo) * (1.0 - 1e-12));
    }
}

#[test]
fn semiclassical_root_tracks_the_distribution() {
    let d = ModelParams::default_scenario();
    let cases = [
        d,
        d.with(|v| v.kappa = 2e-6).unwrap(),
        d.with(|v| v.pump_up = 0.04).unwrap(),
        d.with(|v| v.g = 0.007).unwrap(),
    ];
    let mut checked = 0;
    for p in cases {
        let s = solve_steady(&p, &SteadyOptions::default()).unwrap();
        if s.distribution.fano < 2.0 {
            assert_relative_eq!(s.semiclassical.mean_n, s.distribution.mean_n, max_relative = 0.1);
            checked += 1;
        }
    }
    assert!(checked >= 3);
}

#[test]
fn absorption_is_suppressed_at_negative_detuning() {
    let on = ModelParams::default_scenario();
    let off = on.with(|v| v.delta_e = v.omega - v.omega_l).unwrap();
    let golden = SteadyOptions { source: RateSource::GoldenRule, ..Default::default() };
    let lasing = solve_steady(&on, &golden).unwrap().distribution.mean_n;
    let dark = solve_steady(&off, &golden).unwrap().distribution.mean_n;
    assert!(lasing > 100.0 && dark < 1.0, "{lasing} vs {dark}");
}

#[test]
fn large_photon_form_root_balances_rates() {
    use polaron_lasing::steadystate::{mean_photons_semiclassical, ChainForm};
    let p = ModelParams::default_scenario();
    let sp = build_sp(&p, 1e-10).unwrap();
    let sd = build_sd(&p, 1e-10).unwrap();
    let (ex, rel) = (p.pump_up() + sd.eval(-p.delta_e()), p.pump_down() + sd.eval(p.delta_e()));
    let chain = ContinuousChain::new(&p, &sp, ex, rel, &RateOptions::default(), RateSource::SelfConsistent)
        .with_form(ChainForm::LargePhoton);
    let n = mean_photons_semiclassical(&chain).unwrap().mean_n;
    assert!(n > 1.0);
    let up = chain.level_rates(n - 1.0).0;
    let down = chain.level_rates(n).1;
    let kappa_n = p.kappa() * n;
    let lhs = up * (ex - kappa_n);
    let rhs = down * (rel + kappa_n);
    assert!((lhs - rhs).abs() < 1e-6 * lhs.abs(), "{lhs} vs {rhs}");
}
