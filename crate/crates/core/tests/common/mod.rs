#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use robstab_core::analysis::{run_analysis, Analysis, AnalysisSettings};
use robstab_core::lti::spectral_abscissa;
use robstab_core::mdelta::MDeltaModel;

/// Default analysis of the bundled aircraft, computed once per test binary.
pub fn bundled() -> &'static Analysis {
    static CELL: std::sync::OnceLock<Analysis> = std::sync::OnceLock::new();
    CELL.get_or_init(|| run_analysis(&AnalysisSettings::default()).expect("bundled model analyses"))
}

/// Random Hurwitz `H` (spectral abscissa in `[-1.1, -0.1]`) with a random rank-1 `𝒬`.
pub fn random_system(seed: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=6);
    let r = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let shift = spectral_abscissa(&r).unwrap() + rng.gen_range(0.1..1.1);
    let h = r - DMatrix::identity(n, n) * shift;
    let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let w = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let sigma = rng.gen_range(0.5..3.0);
    let q = &v * w.transpose() * (sigma / (v.norm() * w.norm()));
    (h, q)
}

pub fn random_model(seed: u64) -> MDeltaModel {
    let (h, q) = random_system(seed);
    MDeltaModel::new(h, q, 0.0).expect("random system is Hurwitz and rank 1")
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `M(jω)` of `(A, B, C)` by an eigen-independent route: the transfer
/// function's polynomials evaluated with Horner's rule.
pub fn poly_response(sys: &robstab_core::lti::StateSpace) -> impl Fn(f64) -> Complex64 {
    let tf = robstab_core::lti::TransferFunction::from_state_space(sys).unwrap();
    let num = tf.numerator().to_vec();
    let den = tf.denominator().to_vec();
    move |w| {
        let s = Complex64::new(0.0, w);
        robstab_core::poly::eval(&num, s) / robstab_core::poly::eval(&den, s)
    }
}

/// `n` log-spaced frequencies on `[1e-4, 1e4]` preceded by 0.
pub fn dense_grid(n: usize) -> Vec<f64> {
    let mut g = vec![0.0];
    g.extend(robstab_core::lti::logspace(1e-4, 1e4, n));
    g
}
