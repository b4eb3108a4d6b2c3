//! Model-independent invariants on random stable rank-1 systems.

mod common;

use common::{random_model, rel};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;

use robstab_core::aircraft::{dimensionalize, rebuild, DimensionlessDerivatives, FlightCondition, UncertainPlant};
use robstab_core::criteria::{
    circle_bounds, exact_bounds, popov_bounds, positive_real_bounds, sample_locus, small_gain_bounds, verify_interval,
    CircleCenter, LocusOptions, SlopeSearch, StabilityInterval,
};
use robstab_core::lti::eigenvalues;
use robstab_core::mdelta::{rank_one_factor, MDeltaModel};

fn options(n: usize) -> LocusOptions {
    LocusOptions { n, ..LocusOptions::default() }
}

/// Largest distance from an eigenvalue of `a` to the nearest one of `b`, each used once.
fn spectrum_distance(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let ea = eigenvalues(a).unwrap();
    let mut eb: Vec<Complex64> = eigenvalues(b).unwrap();
    let mut worst: f64 = 0.0;
    for l in ea {
        let (k, d) =
            eb.iter().enumerate().map(|(k, m)| (k, (l - m).norm())).min_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
        worst = worst.max(d / l.norm().max(1.0));
        eb.swap_remove(k);
    }
    worst
}

fn all_intervals(model: &MDeltaModel, n: usize) -> (StabilityInterval, Vec<StabilityInterval>) {
    let s = sample_locus(&model.locus_system(), &options(n)).unwrap();
    let exact = exact_bounds(model, &s, 0.0).unwrap();
    let others = vec![
        small_gain_bounds(&s),
        circle_bounds(&s, CircleCenter::Midpoint).unwrap(),
        positive_real_bounds(&s),
        popov_bounds(&s, SlopeSearch::default()).unwrap(),
    ];
    (exact, others)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn rank_one_reconstruction(seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let n = 2 + (seed % 7) as usize;
        let v = DVector::from_fn(n, |i, _| ((seed >> (i % 32)) as f64).sin());
        let w = DVector::from_fn(n, |i, _| ((seed >> ((i + 3) % 32)) as f64).cos());
        prop_assume!(v.norm() > 1e-3 && w.norm() > 1e-3);
        let q = &v * w.transpose() * scale;
        let f = rank_one_factor(&q).unwrap();
        prop_assert!((f.reconstruct() - &q).amax() <= 1e-10 * f.sigma);
        prop_assert!((f.v.norm() - 1.0).abs() < 1e-12 && (f.w.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn loop_closure_reproduces_perturbed_spectrum(seed in 0u64..1000, delta in -5.0f64..5.0) {
        let model = random_model(seed);
        prop_assert!(spectrum_distance(&model.perturbed(delta), &model.loop_closure(delta)) < 1e-9);
    }

    #[test]
    fn affine_uncertainty_matches_rebuild(delta in -20.0f64..2.0, bump in -0.2f64..0.2) {
        let fc = FlightCondition::default();
        let mut d = DimensionlessDerivatives::example_aircraft();
        d.m.w *= 1.0 + bump;
        d.z.w_dot *= 1.0 - bump;
        let plant = UncertainPlant::from_aircraft(&fc, &d).unwrap();
        let affine = plant.at(delta).unwrap();
        let exact = rebuild(&fc, &dimensionalize(&fc, &d), delta).unwrap();
        let scale = exact.a().amax().max(1.0);
        prop_assert!((affine.a() - exact.a()).amax() < 1e-12 * scale);
        prop_assert!((affine.b() - exact.b()).amax() < 1e-12 * exact.b().amax());
    }

    #[test]
    fn intercept_algebra_and_symmetry(seed in 0u64..1000) {
        let (exact, others) = all_intervals(&random_model(seed), 600);
        for iv in others.iter().chain([&exact]) {
            let (p, m) = iv.intercepts();
            if iv.lower.is_finite() {
                prop_assert!((iv.lower * p + 1.0).abs() < 1e-14);
            }
            if iv.upper.is_finite() {
                prop_assert!((iv.upper * m + 1.0).abs() < 1e-14);
            }
            prop_assert!(iv.lower < 0.0 && iv.upper > 0.0);
        }
        prop_assert_eq!(others[0].lower, -others[0].upper);
    }
}

#[test]
fn criteria_are_sound_on_random_systems() {
    for seed in 0..10u64 {
        let model = random_model(seed);
        let (exact, others) = all_intervals(&model, 2000);
        let (lo, hi) = (exact.lower * 1.005, exact.upper * 1.005);
        for iv in &others {
            assert!(
                iv.lower >= lo && iv.upper <= hi,
                "seed {seed}: {iv:?} vs exact [{}, {}]",
                exact.lower,
                exact.upper
            );
            assert!(verify_interval(&model, iv, 50, 0.0).unwrap().passed(), "seed {seed}: {iv:?}");
        }
        assert!(verify_interval(&model, &exact, 50, 0.0).unwrap().passed(), "seed {seed}");
        let (pr, po) = (&others[2], &others[3]);
        assert!(po.lower <= pr.lower && po.upper >= pr.upper, "seed {seed}");
    }
}

#[test]
fn refinement_is_monotone_in_grid_density() {
    for seed in 0..5u64 {
        let m = random_model(seed).locus_system();
        let coarse = sample_locus(&m, &options(500)).unwrap();
        let fine = sample_locus(&m, &options(1000)).unwrap();
        let tol = coarse.options.refine_tol;
        assert!(fine.peak_modulus().value >= coarse.peak_modulus().value * (1.0 - tol));
        assert!(fine.x_max >= coarse.x_max - tol * coarse.x_max.abs());
        assert!(fine.x_min <= coarse.x_min + tol * coarse.x_min.abs());
        let r = |s: &robstab_core::criteria::LocusSummary| {
            let x_c = 0.5 * (coarse.x_max + coarse.x_min);
            robstab_core::criteria::circle_bounds_at(s, x_c).unwrap().intercepts().0 - x_c
        };
        assert!(rel(r(&fine), r(&coarse)) < 1e-6 || r(&fine) >= r(&coarse));
    }
}
