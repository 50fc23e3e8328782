use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use wkb_core::berry::{angle_distance, discrete_berry_phase, wrap_angle, StateLoop};
use wkb_core::cli::io::{field_csv, read_field_csv};
use wkb_core::series::{apply_l_algebraic, assemble_psi, fit_line};
use wkb_core::{
    build_phase, hj_residual, solve_hierarchy, AmplitudeField, DiffOrder, InitialProfile,
    PotentialSpec, SpaceTimeGrid, TransportOptions,
};

fn random_loop(k: usize, seed: &[f64]) -> StateLoop {
    // smooth closed loop in C^2 with small random harmonics
    let states = (0..k)
        .map(|j| {
            let s = 2.0 * PI * j as f64 / k as f64;
            let th = 1.0 + 0.3 * (s + seed[0]).sin() + 0.1 * (2.0 * s).cos() * seed[1];
            let ph = s + 0.2 * seed[2] * (3.0 * s).sin();
            vec![
                Complex64::new((th / 2.0).cos(), 0.0),
                Complex64::from_polar((th / 2.0).sin(), ph),
            ]
        })
        .collect();
    StateLoop::normalized(states).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn wrap_angle_lands_in_half_open_interval(x in -1e3f64..1e3) {
        let w = wrap_angle(x);
        prop_assert!(w > -PI && w <= PI);
        prop_assert!(angle_distance(w, x) < 1e-9);
    }

    #[test]
    fn harmonic_phase_solves_hj(kappa in 0.2f64..3.0, beta in 0.5f64..2.0, m in 0.5f64..2.0) {
        let half = 0.6 * (beta / kappa).sqrt();
        let g = SpaceTimeGrid::new(-half, half, 61, 0.1, 5).unwrap();
        let spec = PotentialSpec::Harmonic { kappa };
        let phase = build_phase(&spec, m, beta, &g, None, 0.05).unwrap();
        prop_assert!(hj_residual(&phase, &spec) <= 1e-10);
    }

    #[test]
    fn free_a0_is_transported_profile(
        beta in 0.5f64..3.0,
        center in -0.3f64..0.3,
        width in 0.3f64..1.0,
    ) {
        let g = SpaceTimeGrid::new(-0.3, 0.3, 31, 0.2, 11).unwrap();
        let phase = build_phase(&PotentialSpec::Free, 1.0, beta, &g, Some(0.0), 0.05).unwrap();
        let prof = InitialProfile::gaussian(center, width).unwrap();
        let a0 = solve_hierarchy(&phase, &prof, &g, 0, TransportOptions::default())
            .unwrap()
            .report_fields()
            .remove(0);
        let p = (2.0 * beta).sqrt();
        for i in 0..g.nx {
            for n in 0..g.nt {
                let exact = prof.eval(g.t(n) - g.x(i) / p) / p.sqrt();
                prop_assert!((a0.values()[[i, n]] - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn plane_wave_has_zero_algebraic_residual(beta in 0.2f64..4.0, hbar in 0.01f64..0.5) {
        let g = SpaceTimeGrid::new(-0.2, 0.2, 21, 0.1, 11).unwrap();
        let phase = build_phase(&PotentialSpec::Free, 1.0, beta, &g, Some(0.0), 0.05).unwrap();
        let fields = solve_hierarchy(&phase, &InitialProfile::Constant(1.0), &g, 0, TransportOptions::default())
            .unwrap()
            .report_fields();
        let psi = assemble_psi(&phase, &fields, hbar).unwrap();
        let l = apply_l_algebraic(&psi, &PotentialSpec::Free, DiffOrder::EIGHTH).unwrap();
        prop_assert_eq!(l.max_abs(), 0.0);
    }

    #[test]
    fn berry_phase_is_gauge_invariant(
        seed in prop::array::uniform3(-1.0f64..1.0),
        chi in prop::collection::vec(-20.0f64..20.0, 64),
    ) {
        let lp = random_loop(64, &seed);
        let g0 = discrete_berry_phase(&lp).unwrap();
        let g1 = discrete_berry_phase(&lp.regauged(&chi).unwrap()).unwrap();
        prop_assert!(angle_distance(g0, g1) < 1e-12);
    }

    #[test]
    fn reversed_loop_negates_phase(seed in prop::array::uniform3(-1.0f64..1.0)) {
        let lp = random_loop(64, &seed);
        let g0 = discrete_berry_phase(&lp).unwrap();
        let g1 = discrete_berry_phase(&lp.reversed()).unwrap();
        prop_assert!(angle_distance(g0, -g1) < 1e-12);
    }

    #[test]
    fn fit_line_recovers_exact_line(slope in -5.0f64..5.0, icpt in -10.0f64..10.0) {
        let x = [-3.0, -2.0, -1.5, 0.25, 2.0];
        let y: Vec<f64> = x.iter().map(|v| slope * v + icpt).collect();
        let (s, c, r) = fit_line(&x, &y);
        prop_assert!((s - slope).abs() < 1e-12 && (c - icpt).abs() < 1e-12 && r < 1e-12);
    }

    #[test]
    fn field_csv_round_trip(
        vals in prop::collection::vec(-1e6f64..1e6, 35),
        lo in -2.0f64..0.0,
        width in 0.1f64..3.0,
    ) {
        let g = SpaceTimeGrid::new(lo, lo + width, 7, 0.7, 5).unwrap();
        let f = AmplitudeField::new(1, g, ndarray::Array2::from_shape_vec((7, 5), vals).unwrap()).unwrap();
        prop_assert_eq!(read_field_csv(&field_csv(&f), 1, g).unwrap(), f);
    }
}
