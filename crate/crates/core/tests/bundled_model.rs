//! Locus-based bounds of the bundled aircraft against brute-force oracles.

mod common;

use common::{bundled, dense_grid, poly_response, rel};
use num_complex::Complex64;
use robstab_core::analysis::{run_analysis, AnalysisSettings};
use robstab_core::criteria::{
    exact_bounds_by_scan, popov_bounds, positive_real_bounds, verify_interval, Criterion, ScanOptions, SlopeSearch,
    Witness,
};

fn witness(c: Criterion) -> Witness {
    bundled().interval(c).unwrap().witness.clone()
}

fn oracle_samples(n: usize) -> Vec<(f64, Complex64)> {
    let m = poly_response(&bundled().summary.system);
    dense_grid(n).into_iter().map(|w| (w, m(w))).collect()
}

#[test]
fn polynomial_and_state_space_responses_agree() {
    let s = &bundled().summary;
    let m = poly_response(&s.system);
    for &(w, z) in s.locus.samples().iter().step_by(97) {
        assert!((m(w) - z).norm() < 1e-8 * z.norm().max(1e-3), "ω = {w}");
    }
}

#[test]
fn dense_sweep_matches_refined_extremes() {
    let pts = oracle_samples(1_000_000);
    let peak = pts.iter().map(|p| p.1.norm()).fold(0.0, f64::max);
    let x_max = pts.iter().map(|p| p.1.re).fold(f64::NEG_INFINITY, f64::max);
    let x_min = pts.iter().map(|p| p.1.re).fold(f64::INFINITY, f64::min);
    let Witness::SmallGain { r_sg, .. } = witness(Criterion::SmallGain) else { panic!() };
    let Witness::PositiveReal { x_max: xm, x_min: xn } = witness(Criterion::PositiveReal) else { panic!() };
    let Witness::Circle { x_c, r_c } = witness(Criterion::Circle) else { panic!() };
    let r_c_oracle = pts.iter().map(|p| (p.1 - x_c).norm()).fold(0.0, f64::max);
    assert!(rel(r_sg, peak) < 1e-6, "{r_sg} vs {peak}");
    assert!(rel(xm, x_max) < 1e-4, "{xm} vs {x_max}");
    assert!(rel(xn, x_min) < 1e-4, "{xn} vs {x_min}");
    assert!(rel(r_c, r_c_oracle) < 1e-4, "{r_c} vs {r_c_oracle}");
    // Refinement only ever adds exact samples, so it can overshoot a grid but never undershoot it.
    assert!(r_sg >= peak * (1.0 - 1e-12) && xm >= x_max - 1e-12 && xn <= x_min + 1e-12);
}

#[test]
fn popov_intercepts_match_two_dimensional_scan() {
    let pts = oracle_samples(20_000);
    let xy: Vec<(f64, f64)> = pts.iter().map(|&(w, z)| (z.re, w * z.im)).collect();
    let (mut c_plus, mut c_minus) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..=10_000 {
        let q = -1.0 + 2.0 * k as f64 / 10_000.0;
        let (mut sup, mut inf) = (f64::NEG_INFINITY, f64::INFINITY);
        for &(x, y) in &xy {
            let f = x - q * y;
            sup = sup.max(f);
            inf = inf.min(f);
        }
        c_plus = c_plus.min(sup);
        c_minus = c_minus.max(inf);
    }
    let Witness::Popov { c_plus: cp, c_minus: cm, .. } = witness(Criterion::Popov) else { panic!() };
    assert!(rel(cp, c_plus) < 1e-3, "{cp} vs {c_plus}");
    assert!(rel(cm, c_minus) < 1e-3, "{cm} vs {c_minus}");
}

#[test]
fn frozen_values_from_independent_prototype() {
    // Computed separately with a dense-matrix prototype (scipy), 2-D (q, ω) scan for Popov.
    let a = bundled();
    let exact = a.interval(Criterion::Exact).unwrap();
    assert!(rel(exact.lower, -16.3947) < 2e-4 && rel(exact.upper, 0.512304) < 2e-5);
    let Witness::SmallGain { r_sg, .. } = witness(Criterion::SmallGain) else { panic!() };
    assert!(rel(r_sg, 1.965199) < 1e-5);
    let Witness::Circle { x_c, r_c } = witness(Criterion::Circle) else { panic!() };
    assert!(rel(x_c, -0.887967) < 1e-5 && rel(r_c, 1.299762) < 1e-5);
    assert!(rel(a.summary.x_max, 0.181313) < 1e-5 && rel(a.summary.x_min, -1.957248) < 1e-5);
    let popov = a.interval(Criterion::Popov).unwrap();
    assert!(rel(popov.lower, -11.5238) < 1e-4 && rel(popov.upper, 0.512303) < 1e-5);
}

#[test]
fn most_negative_crossing_gives_upper_exact_bound() {
    let c = bundled().summary.outermost_negative_crossing().unwrap();
    assert!(rel(-1.0 / c.x, 0.512838) < 5e-3);
    for c in &bundled().summary.crossings {
        assert!(bundled().summary.eval(c.omega).unwrap().im.abs() < 1e-9);
    }
}

#[test]
fn exact_routes_agree() {
    let a = bundled();
    let exact = a.interval(Criterion::Exact).unwrap();
    let (lo, hi) = exact_bounds_by_scan(&a.loop_model.mdelta, &ScanOptions::default(), 0.0).unwrap();
    assert!((lo - exact.lower).abs() < 1e-4 && (hi - exact.upper).abs() < 1e-4, "[{lo}, {hi}]");
    assert!(rel(exact.lower, -16.3548) < 5e-3 && rel(exact.upper, 0.512838) < 5e-3);
}

#[test]
fn exact_interval_is_tight_and_sound() {
    let a = bundled();
    let m = &a.loop_model.mdelta;
    assert!(!m.is_stable_at(0.52, 0.0).unwrap());
    assert!(!m.is_stable_at(-16.5, 0.0).unwrap());
    let report = verify_interval(m, a.interval(Criterion::Exact).unwrap(), 50, 0.0).unwrap();
    assert!(report.passed() && report.outside_checks.iter().all(|c| c.1));
    assert!(verify_interval(m, a.interval(Criterion::SmallGain).unwrap(), 50, 0.0).unwrap().passed());
}

#[test]
fn vertical_popov_lines_are_positive_real() {
    let s = &bundled().summary;
    let v = popov_bounds(s, SlopeSearch::Vertical).unwrap();
    let pr = positive_real_bounds(s);
    assert!(rel(v.lower, pr.lower) < 1e-6 && rel(v.upper, pr.upper) < 1e-6);
}

#[test]
fn grid_doubling_moves_extremes_by_less_than_refine_tol() {
    let mut settings = AnalysisSettings::default();
    settings.locus.n *= 2;
    let fine = run_analysis(&settings).unwrap();
    let coarse = bundled();
    let tol = settings.locus.refine_tol;
    assert!(rel(fine.summary.x_max, coarse.summary.x_max) < tol);
    assert!(rel(fine.summary.x_min, coarse.summary.x_min) < tol);
    assert!(rel(fine.summary.peak_modulus().value, coarse.summary.peak_modulus().value) < tol);
}
