mod common;

use approx::assert_relative_eq;
use common::*;
use polaron_lasing::rates::matrix_element_displacement;
use polaron_lasing::{build_sd, build_sp, ModelParams};

fn warm() -> ModelParams {
    ModelParams::default_scenario()
        .with(|v| {
            v.kt = 0.7;
            v.eps_c = 0.1;
            v.gamma_env = 0.05;
        })
        .unwrap()
}

#[test]
fn correlators_match_fock_trace() {
    for p in [warm(), ModelParams::default_scenario(), warm().with(|v| v.theta = 0.3).unwrap()] {
        let trace = FockTrace::new(&p, 60);
        for t in [0.0, 0.3, 1.1, 2.5, -0.7, 7.9] {
            let (a, b) = (trace.polaron(t), polaron_correlator(&p, t));
            assert!((a - b).norm() < 1e-12, "C_P({t}): {a} vs {b}");
            let (a, b) = (trace.decay(t), decay_correlator(&p, t));
            assert!((a - b).norm() < 1e-12, "C_D({t}): {a} vs {b}");
        }
    }
}

#[test]
fn gauss_legendre_is_exact_for_polynomials() {
    let rule = gauss_legendre(16);
    let total: f64 = rule.iter().map(|&(_, w)| w).sum();
    assert_relative_eq!(total, 2.0, max_relative = 1e-14);
    let x30: f64 = rule.iter().map(|&(x, w)| w * x.powi(30)).sum();
    assert_relative_eq!(x30, 2.0 / 31.0, max_relative = 1e-12);
}

#[test]
fn series_match_quadrature_at_warm_temperature() {
    let p = warm();
    let sp = build_sp(&p, 1e-12).unwrap();
    let sd = build_sd(&p, 1e-12).unwrap();
    let (peak_p, peak_d) = (sp.peak(), sd.peak());
    for k in 0..10 {
        let w = -2.7 + 0.6 * k as f64;
        let qp = spectrum_by_quadrature(&|t| polaron_correlator(&p, t), w, p.gamma_env(), 0.25);
        let qd = spectrum_by_quadrature(&|t| decay_correlator(&p, t), w, p.gamma_env(), 0.25);
        assert!((sp.eval(w) - qp).abs() < 1e-6 * peak_p, "S_P({w})");
        assert!((sd.eval(w) - qd).abs() < 1e-6 * peak_d, "S_D({w})");
    }
}

#[test]
fn displacement_elements_match_matrix_exponential() {
    let levels = 60;
    for alpha in [0.05, 0.2, -0.7] {
        let lower = nalgebra::DMatrix::<f64>::from_fn(levels, levels, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 });
        let generator = (lower.transpose() - &lower) * alpha;
        let d = generator.exp();
        for n in 0..20 {
            for m in 0..20 {
                let exact = d[(n, m)];
                let ours = matrix_element_displacement(n, m, alpha);
                assert!((exact - ours).abs() < 1e-12, "α = {alpha}, ⟨{n}|D|{m}⟩: {exact} vs {ours}");
            }
        }
    }
}
