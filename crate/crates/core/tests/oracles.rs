//! Library results checked against independent reference computations.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C;
use pairsplit::correlations::{gamma_analytic, Detector, Direction};
use pairsplit::efficiency::{
    port_probabilities, splitting_efficiency_analytic_entangled, splitting_efficiency_analytic_unentangled,
    splitting_efficiency_numeric,
};
use pairsplit::interferometer::Port;
use pairsplit::model::build_generator;
use pairsplit::optimizer::{grid_scan, refine, Axis, RefineSettings};
use pairsplit::propagator::{closed_form_amplitudes, evolution_operator};
use pairsplit::singlemode::{amplitude_11, max_split_probability, s_max, split_probability, TwoPhotonState};
use pairsplit::{Mzi, Params, Quadrature};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed_2024)
}

fn tight() -> Quadrature {
    Quadrature::default().with_rel_tol(1e-10)
}

#[test]
fn unentangled_port_probabilities_match_lyapunov_route() {
    let mut rng = rng();
    for _ in 0..8 {
        let gamma = rng.gen_range(0.05..3.0);
        let (omega, phi) = (rng.gen_range(0.0..FRAC_PI_2), rng.gen_range(-PI..PI));
        let oracle = common::Model::unentangled(gamma).probabilities(omega, phi);
        let p = port_probabilities(&Params::unentangled(gamma), &Mzi::new(omega, phi), &tight()).unwrap();
        for (got, want) in [p.cc, p.cd, p.dc, p.dd].iter().zip(oracle) {
            assert!(
                (got - want).abs() < 1e-9,
                "γ={gamma} ω={omega} φ={phi}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn zero_angle_cc_events_come_only_from_delayed_reemission() {
    let gamma = 0.8;
    let oracle = common::Model::unentangled(gamma).probabilities(0.0, 0.0);
    let p = port_probabilities(&Params::unentangled(gamma), &Mzi::new(0.0, 0.0), &tight()).unwrap();
    assert!(oracle[0] > 1e-2);
    assert!((p.cc - oracle[0]).abs() < 1e-9);
    let detector = Detector::new(&Params::unentangled(gamma), &Mzi::new(0.0, 0.0)).unwrap();
    let psi0 = detector.initial_state();
    for t in [0.0, 0.3, 1.0, 4.0] {
        assert_eq!(detector.correlation(Port::C, Port::C, &psi0, t, 0.0).unwrap(), 0.0);
    }
}

#[test]
fn entangled_raw_probabilities_match_lyapunov_route() {
    for (gamma, delta, omega) in [(0.55, 0.05, 0.283), (1.3, 0.5, 1.0)] {
        let chi = 1e-3;
        let oracle = common::Model::entangled(gamma, delta, chi).probabilities(omega, 0.0);
        let params = Params::entangled(gamma, delta, chi);
        let p = port_probabilities(&params, &Mzi::new(omega, 0.0), &tight()).unwrap();
        for (got, want) in [p.cc, p.cd, p.dc, p.dd].iter().zip(oracle) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }
}

#[test]
fn entangled_closed_form_matches_lyapunov_post_selection() {
    for (gamma, delta, omega) in [(0.55, 0.01, 0.283), (0.366, 0.2, 0.0), (2.0, 1.0, 0.7)] {
        let oracle = common::entangled_splitting(gamma, delta, omega, 1e-3);
        let closed = splitting_efficiency_analytic_entangled(gamma, delta, omega);
        assert!((oracle - closed).abs() < 1e-8, "{oracle} vs {closed}");
    }
}

#[test]
fn closed_form_kernel_matches_matrix_exponential() {
    let mut rng = rng();
    let mut samples: Vec<(f64, f64)> = (0..70)
        .map(|_| (rng.gen_range(1e-3..3.0), rng.gen_range(0.0..10.0)))
        .collect();
    // Dense coverage around the exceptional point 2γ = κ.
    samples.extend((0..30).map(|_| (0.5 + rng.gen_range(-5e-5..5e-5), rng.gen_range(0.0..10.0))));
    for (gamma, t) in samples {
        let u = evolution_operator(&build_generator(&Params::unentangled(gamma)).unwrap(), t).unwrap();
        let k = closed_form_amplitudes(gamma, t).unwrap();
        let pairs = [
            (k.alpha, u[(4, 4)]),
            (k.beta, u[(3, 4)]),
            (k.a, u[(2, 2)]),
            (k.b, u[(1, 2)]),
            (k.c, u[(1, 1)]),
        ];
        for (closed, matrix) in pairs {
            assert!(
                (C::new(closed, 0.0) - matrix).norm() < 1e-10,
                "γ={gamma} t={t}: {closed} vs {matrix}"
            );
        }
    }
}

#[test]
fn correlation_closed_form_matches_numeric_on_grid() {
    let mut rng = rng();
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let gamma = rng.gen_range(1e-3..3.0);
        let mzi = Mzi::new(rng.gen_range(0.0..FRAC_PI_2), rng.gen_range(-PI..PI));
        let detector = Detector::new(&Params::unentangled(gamma), &mzi).unwrap();
        let psi0 = detector.initial_state();
        for i in 0..10 {
            for j in 0..10 {
                let (t, tau) = (i as f64 * 0.5, j as f64 * 0.5);
                for (x, y, dir) in [(Port::C, Port::D, Direction::CD), (Port::D, Port::C, Direction::DC)] {
                    let num = detector.correlation(x, y, &psi0, t, tau).unwrap();
                    let ana = gamma_analytic(gamma, &mzi, dir, t, tau).unwrap();
                    assert!(ana >= 0.0);
                    worst = worst.max((num - ana).abs());
                }
            }
        }
    }
    assert!(worst <= 1e-9, "worst deviation {worst}");
}

#[test]
fn entangled_correlation_self_converges_under_step_halving() {
    let params = Params::entangled(0.55, 0.3, 1e-3);
    let mzi = Mzi::new(0.283, 0.0);
    let detector = Detector::new(&params, &mzi).unwrap();
    let psi0 = detector.initial_state();
    let k = detector.generator();
    let half = evolution_operator(k, 0.5).unwrap();
    let step = |psi: &pairsplit::State| half.apply(&half.apply(psi));
    for (x, y) in [(Port::C, Port::D), (Port::D, Port::C), (Port::C, Port::C)] {
        let direct = detector.correlation(x, y, &psi0, 1.0, 1.0).unwrap();
        let halved = detector
            .port(y)
            .apply(&step(&detector.port(x).apply(&step(&psi0))))
            .norm_sqr();
        assert!(
            (direct - halved).abs() < 1e-8 * direct.max(1e-300),
            "{direct} vs {halved}"
        );
    }
}

#[test]
fn baseline_maximum_matches_golden_section() {
    let (g_star, s_star) = common::golden_max(common::baseline, 0.01, 3.0);
    for g in [0.1, 0.5, 1.7] {
        let lib = splitting_efficiency_analytic_unentangled(g, &Mzi::new(0.0, 0.0));
        assert!((lib - common::baseline(g)).abs() < 1e-14);
    }
    let axes = [Axis::open_low(0.0, 3.0, 200), Axis::fixed(0.0), Axis::fixed(0.0)];
    let objective = |p: &[f64]| Ok(splitting_efficiency_analytic_unentangled(p[0], &Mzi::new(p[1], p[2])));
    let grid = grid_scan(objective, &axes).unwrap();
    let best = refine(objective, &grid.point, &axes, &RefineSettings::default()).unwrap();
    assert!((best.point[0] - g_star).abs() < 1e-6);
    assert!((best.s - s_star).abs() < 1e-12);
    assert!((s_star - 0.641).abs() < 5e-3);
}

#[test]
fn entangled_zero_angle_maximum_is_analytic() {
    let g_star = (3f64.sqrt() - 1.0) / 2.0;
    let (g_gs, s_gs) = common::golden_max(common::entangled_baseline, 0.01, 3.0);
    assert!((g_gs - g_star).abs() < 1e-6);
    let closed = splitting_efficiency_analytic_entangled(g_star, 0.0, 0.0);
    assert!((closed - common::entangled_baseline(g_star)).abs() < 1e-14);
    assert!((closed - s_gs).abs() < 1e-12);
    assert!((closed - 0.7698).abs() < 1e-4);
}

#[test]
fn s_max_matches_brute_force_scan() {
    let mut rng = rng();
    for _ in 0..25 {
        let (r, theta, delta) = (
            rng.gen_range(0.0..1.0f64),
            rng.gen_range(0.0..2.0 * PI),
            rng.gen_range(0.0..2.0 * PI),
        );
        let d = C::from_polar(r.sqrt(), theta);
        let g = C::from_polar((1.0 - r).sqrt(), theta + delta);
        let scan = (0..10_000)
            .map(|i| {
                amplitude_11(d, g, &Mzi::new(i as f64 * FRAC_PI_2 / 10_000.0, 0.0))
                    .unwrap()
                    .norm_sqr()
            })
            .fold(0.0, f64::max);
        assert!((s_max(d, g).unwrap() - scan).abs() < 1e-6);
    }
}

#[test]
fn general_state_maximum_matches_full_transform_scan() {
    let mut rng = rng();
    for _ in 0..10 {
        let raw: Vec<C> = (0..3)
            .map(|_| C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let state = TwoPhotonState::new(raw[0] / norm, raw[1] / norm, raw[2] / norm);
        let scan = (0..10_000)
            .map(|i| split_probability(&state, &Mzi::new(i as f64 * FRAC_PI_2 / 10_000.0, 0.0)).unwrap())
            .fold(0.0, f64::max);
        assert!((max_split_probability(&state).unwrap() - scan).abs() < 1e-6);
    }
}

#[test]
fn antibunched_input_cannot_be_split_perfectly() {
    // f = 0: no |02⟩ component, as for the antibunched b port.
    for i in 0..20 {
        let d_mag = i as f64 * 0.05;
        for e_phase in [0.0, 0.7, FRAC_PI_2, 2.5] {
            let state = TwoPhotonState::new(
                C::new(d_mag, 0.0),
                C::from_polar((1.0 - d_mag * d_mag).sqrt(), e_phase),
                C::new(0.0, 0.0),
            );
            let mut best = 0.0f64;
            for a in 0..400 {
                for b in 0..64 {
                    let mzi = Mzi::new(a as f64 * PI / 400.0, -PI + b as f64 * 2.0 * PI / 64.0);
                    best = best.max(split_probability(&state, &mzi).unwrap());
                }
            }
            assert!(best <= 1.0 - 1e-3, "|d|={d_mag}: {best}");
        }
    }
    let hom_input = TwoPhotonState::new(C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0));
    assert!((max_split_probability(&hom_input).unwrap() - 1.0).abs() < 1e-15);
}

fn optimum_at_resolution(points: usize, entangled: bool, pin_omega: bool) -> f64 {
    let omega = if pin_omega {
        Axis::fixed(0.0)
    } else {
        Axis::open_high(0.0, FRAC_PI_2, points)
    };
    let phi = if entangled || pin_omega {
        Axis::fixed(0.0)
    } else {
        Axis::closed(-PI, PI, 21)
    };
    let axes = [Axis::open_low(0.0, 3.0, points), omega, phi];
    let objective = |p: &[f64]| {
        Ok(if entangled {
            splitting_efficiency_analytic_entangled(p[0], 0.0, p[1])
        } else {
            splitting_efficiency_analytic_unentangled(p[0], &Mzi::new(p[1], p[2]))
        })
    };
    let grid = grid_scan(objective, &axes).unwrap();
    refine(objective, &grid.point, &axes, &RefineSettings::default())
        .unwrap()
        .s
}

#[test]
fn optima_are_stable_under_grid_doubling() {
    for (entangled, pin) in [(false, false), (false, true), (true, false)] {
        let coarse = optimum_at_resolution(100, entangled, pin);
        let fine = optimum_at_resolution(200, entangled, pin);
        assert!((coarse - fine).abs() < 1e-3);
    }
}

#[test]
fn single_precision_pipeline() {
    let mzi = pairsplit::Mzi32::new(0.303, 0.0);
    let analytic = splitting_efficiency_analytic_unentangled(0.92f32, &mzi);
    assert!((analytic - 0.75).abs() < 1e-3);
    let quad = pairsplit::quadrature::QuadratureSettings::<f32>::default().with_rel_tol(1e-4);
    let numeric = splitting_efficiency_numeric(&pairsplit::Params32::unentangled(0.92), &mzi, &quad).unwrap();
    assert!((numeric.s - analytic).abs() < 1e-3, "{} vs {analytic}", numeric.s);
    let k = build_generator(&pairsplit::Params32::unentangled(0.5)).unwrap();
    let u = evolution_operator(&k, 1.0f32).unwrap();
    assert!((u[(4, 4)].re - (-2.0f32).exp()).abs() < 1e-5);
}
