//! Minimal continuous-time LTI algebra: zero/pole/gain transfer functions,
//! state-space realizations, the two interconnections the closed-loop
//! construction needs, eigenvalues and frequency response.

use std::fmt;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numfmt::format_sig;
use crate::poly;

/// Tolerance for conjugate pairing of zeros and poles.
pub const CONJUGATE_TOL: f64 = 1e-10;

/// Rational SISO transfer function kept in both zpk and coefficient form.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferFunction {
    zeros: Vec<Complex64>,
    poles: Vec<Complex64>,
    gain: f64,
    num: Vec<f64>,
    den: Vec<f64>,
}

impl TransferFunction {
    /// Builds `gain * prod(s - z) / prod(s - p)`.
    pub fn from_zpk(zeros: Vec<Complex64>, poles: Vec<Complex64>, gain: f64) -> Result<Self> {
        if !gain.is_finite() {
            return Err(Error::Representation(format!("gain {gain} is not finite")));
        }
        if zeros.iter().chain(poles.iter()).any(|r| !r.re.is_finite() || !r.im.is_finite()) {
            return Err(Error::Representation("non-finite zero or pole".into()));
        }
        if !poly::is_conjugate_closed(&zeros, CONJUGATE_TOL) {
            return Err(Error::Representation("zeros are not closed under conjugation".into()));
        }
        if !poly::is_conjugate_closed(&poles, CONJUGATE_TOL) {
            return Err(Error::Representation("poles are not closed under conjugation".into()));
        }
        let num = poly::real_from_roots(&zeros).into_iter().map(|c| c * gain).collect();
        let den = poly::real_from_roots(&poles);
        Ok(Self { zeros, poles, gain, num, den })
    }

    /// Convenience for real roots given as `s + a` factors, i.e. roots at `-a`.
    pub fn from_real_zpk(zeros: &[f64], poles: &[f64], gain: f64) -> Result<Self> {
        let c = |v: &[f64]| v.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        Self::from_zpk(c(zeros), c(poles), gain)
    }

    pub fn constant(k: f64) -> Result<Self> {
        Self::from_zpk(Vec::new(), Vec::new(), k)
    }

    /// Transfer function of a SISO state-space system.
    ///
    /// Poles are the eigenvalues of A. The numerator is
    /// `det(sI - A + BC) - det(sI - A) + D det(sI - A)`, with its degree fixed by
    /// the first nonzero Markov parameter.
    pub fn from_state_space(sys: &StateSpace) -> Result<Self> {
        if !sys.is_siso() {
            return Err(Error::Dimension(format!(
                "transfer function needs a SISO system, got {}x{}",
                sys.n_outputs(),
                sys.n_inputs()
            )));
        }
        let n = sys.n_states();
        let d = sys.d[(0, 0)];
        let mut poles = eigenvalues(&sys.a)?;
        poly::clean_roots(&mut poles, CONJUGATE_TOL);
        let den = poly::real_from_roots(&poles);

        // Relative degree from Markov parameters C A^{k-1} B.
        let b_norm = sys.b.norm();
        let c_norm = sys.c.norm();
        let a_norm = sys.a.norm().max(f64::MIN_POSITIVE);
        let mut power = sys.b.clone();
        let mut markov = None;
        for k in 1..=n {
            let mk = (&sys.c * &power)[(0, 0)];
            let scale = c_norm * a_norm.powi(k as i32 - 1) * b_norm;
            if mk.abs() > 1e-10 * scale {
                markov = Some((k, mk));
                break;
            }
            power = &sys.a * power;
        }

        if d != 0.0 {
            let closed = &sys.a - &sys.b * &sys.c / d;
            let mut zeros = eigenvalues(&closed)?;
            poly::clean_roots(&mut zeros, CONJUGATE_TOL);
            return Self::from_zpk(zeros, poles, d);
        }
        let Some((rel_deg, lead)) = markov else {
            return Self::from_zpk(Vec::new(), poles, 0.0);
        };
        let closed = &sys.a - &sys.b * &sys.c;
        let closed_poly = poly::real_from_roots(&eigenvalues(&closed)?);
        let mut num = poly::sub(&closed_poly, &den);
        // Degree n - rel_deg; anything above is cancellation noise.
        let keep = n - rel_deg + 1;
        num = num[num.len() - keep..].to_vec();
        num[0] = lead;
        let mut zeros = poly::roots(&num)?;
        poly::clean_roots(&mut zeros, CONJUGATE_TOL);
        Self::from_zpk(zeros, poles, lead)
    }

    pub fn zeros(&self) -> &[Complex64] {
        &self.zeros
    }

    pub fn poles(&self) -> &[Complex64] {
        &self.poles
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    /// Numerator coefficients, descending degree.
    pub fn numerator(&self) -> &[f64] {
        &self.num
    }

    /// Monic denominator coefficients, descending degree.
    pub fn denominator(&self) -> &[f64] {
        &self.den
    }

    pub fn is_proper(&self) -> bool {
        self.gain == 0.0 || self.zeros.len() <= self.poles.len()
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.gain == 0.0 || self.zeros.len() < self.poles.len()
    }

    /// Coefficient-form evaluation.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        poly::eval(&self.num, s) / poly::eval(&self.den, s)
    }

    /// Zero/pole/gain-form evaluation.
    pub fn eval_zpk(&self, s: Complex64) -> Complex64 {
        let num = self.zeros.iter().fold(Complex64::new(self.gain, 0.0), |acc, z| acc * (s - z));
        self.poles.iter().fold(num, |acc, p| acc / (s - p))
    }
}

fn fmt_factor(f: &mut fmt::Formatter<'_>, roots: &[Complex64]) -> fmt::Result {
    if roots.is_empty() {
        return write!(f, "1");
    }
    let mut i = 0;
    while i < roots.len() {
        let r = roots[i];
        if r.im != 0.0 {
            // Conjugate pair as a quadratic factor.
            let b = -2.0 * r.re;
            let c = r.norm_sqr();
            write!(f, "(s^2 {} {}s + {})", if b < 0.0 { "-" } else { "+" }, format_sig(b.abs(), 5), format_sig(c, 5))?;
            i += 2;
        } else {
            let a = -r.re;
            write!(f, "(s {} {})", if a < 0.0 { "-" } else { "+" }, format_sig(a.abs(), 5))?;
            i += 1;
        }
    }
    Ok(())
}

impl fmt::Display for TransferFunction {
    /// Factored zpk form, quadratic factors for conjugate pairs.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut zeros = self.zeros.clone();
        let mut poles = self.poles.clone();
        sort_pairs(&mut zeros);
        sort_pairs(&mut poles);
        write!(f, "{} ", format_sig(self.gain, 5))?;
        fmt_factor(f, &zeros)?;
        write!(f, " / ")?;
        fmt_factor(f, &poles)
    }
}

/// Sort so that real roots come by decreasing magnitude and conjugate pairs are adjacent.
fn sort_pairs(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| {
        let ka = (a.im != 0.0, -a.norm(), a.im);
        let kb = (b.im != 0.0, -b.norm(), b.im);
        ka.partial_cmp(&kb).unwrap_or(std::cmp::Ordering::Equal)
    });
}

/// Dense real state-space system with signal labels.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
    pub state_names: Vec<String>,
    pub input_names: Vec<String>,
    pub output_names: Vec<String>,
}

impl StateSpace {
    pub fn new(a: DMatrix<f64>, b: DMatrix<f64>, c: DMatrix<f64>, d: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!("A is {}x{}, not square", n, a.ncols())));
        }
        if b.nrows() != n {
            return Err(Error::Dimension(format!("B has {} rows, expected {n}", b.nrows())));
        }
        if c.ncols() != n {
            return Err(Error::Dimension(format!("C has {} columns, expected {n}", c.ncols())));
        }
        if d.nrows() != c.nrows() || d.ncols() != b.ncols() {
            return Err(Error::Dimension(format!(
                "D is {}x{}, expected {}x{}",
                d.nrows(),
                d.ncols(),
                c.nrows(),
                b.ncols()
            )));
        }
        let names = |prefix: &str, k: usize| (0..k).map(|i| format!("{prefix}{}", i + 1)).collect();
        Ok(Self {
            state_names: names("x", n),
            input_names: names("u", b.ncols()),
            output_names: names("y", c.nrows()),
            a,
            b,
            c,
            d,
        })
    }

    /// Pure static gain `y = k u` with no states.
    pub fn static_gain(k: f64) -> Self {
        Self::new(DMatrix::zeros(0, 0), DMatrix::zeros(0, 1), DMatrix::zeros(1, 0), DMatrix::from_element(1, 1, k))
            .expect("static gain dimensions are consistent")
    }

    pub fn with_names(mut self, states: &[&str], inputs: &[&str], outputs: &[&str]) -> Result<Self> {
        if states.len() != self.n_states() || inputs.len() != self.n_inputs() || outputs.len() != self.n_outputs() {
            return Err(Error::Dimension("label counts do not match system dimensions".into()));
        }
        let own = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
        self.state_names = own(states);
        self.input_names = own(inputs);
        self.output_names = own(outputs);
        Ok(self)
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn c(&self) -> &DMatrix<f64> {
        &self.c
    }
    pub fn d(&self) -> &DMatrix<f64> {
        &self.d
    }
    pub fn n_states(&self) -> usize {
        self.a.nrows()
    }
    pub fn n_inputs(&self) -> usize {
        self.b.ncols()
    }
    pub fn n_outputs(&self) -> usize {
        self.c.nrows()
    }
    pub fn is_siso(&self) -> bool {
        self.n_inputs() == 1 && self.n_outputs() == 1
    }
    pub fn is_strictly_proper(&self) -> bool {
        self.d.iter().all(|&x| x == 0.0)
    }

    /// Keeps only the listed output rows.
    pub fn select_outputs(&self, rows: &[usize]) -> Result<Self> {
        if let Some(&bad) = rows.iter().find(|&&r| r >= self.n_outputs()) {
            return Err(Error::Dimension(format!("output index {bad} out of range")));
        }
        let c = DMatrix::from_fn(rows.len(), self.n_states(), |i, j| self.c[(rows[i], j)]);
        let d = DMatrix::from_fn(rows.len(), self.n_inputs(), |i, j| self.d[(rows[i], j)]);
        let mut out = Self::new(self.a.clone(), self.b.clone(), c, d)?;
        out.state_names = self.state_names.clone();
        out.input_names = self.input_names.clone();
        out.output_names = rows.iter().map(|&r| self.output_names[r].clone()).collect();
        Ok(out)
    }

    /// `C (sI - A)^{-1} B + D` for a SISO system.
    pub fn eval_siso(&self, s: Complex64) -> Result<Complex64> {
        if !self.is_siso() {
            return Err(Error::Dimension("eval_siso needs a SISO system".into()));
        }
        let n = self.n_states();
        let d = Complex64::new(self.d[(0, 0)], 0.0);
        if n == 0 {
            return Ok(d);
        }
        let m = DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { s } else { Complex64::new(0.0, 0.0) };
            diag - self.a[(i, j)]
        });
        let rhs = DMatrix::from_fn(n, 1, |i, _| Complex64::new(self.b[(i, 0)], 0.0));
        let x = m.lu().solve(&rhs).ok_or(Error::PoleOnGrid { omega: s.im })?;
        let y = (0..n).fold(d, |acc, i| acc + x[(i, 0)] * self.c[(0, i)]);
        if y.re.is_finite() && y.im.is_finite() {
            Ok(y)
        } else {
            Err(Error::PoleOnGrid { omega: s.im })
        }
    }
}

/// Canonical controllable-companion realization.
pub fn ss_realize(tf: &TransferFunction) -> Result<StateSpace> {
    let den = poly::trim(tf.denominator());
    let mut num = poly::trim(tf.numerator());
    poly::check_finite(&num, "numerator")?;
    poly::check_finite(&den, "denominator")?;
    let n = den.len() - 1;
    if tf.gain() == 0.0 {
        num = vec![0.0];
    }
    if num.len() > den.len() {
        return Err(Error::Improper { num: num.len() - 1, den: n });
    }
    let lead = den[0];
    let a_coef: Vec<f64> = den.iter().map(|c| c / lead).collect();
    let mut b_coef = vec![0.0; n + 1 - num.len()];
    b_coef.extend(num.iter().map(|c| c / lead));
    let d = b_coef[0];
    let a = DMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            -a_coef[j + 1]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    });
    let b = DMatrix::from_fn(n, 1, |i, _| if i == 0 { 1.0 } else { 0.0 });
    let c = DMatrix::from_fn(1, n, |_, j| b_coef[j + 1] - d * a_coef[j + 1]);
    StateSpace::new(a, b, c, DMatrix::from_element(1, 1, d))
}

/// `outer ∘ inner`: the output of `inner` drives the input of `outer`.
///
/// States are ordered `[outer; inner]`, giving the block form
/// `[[A_o, B_o C_i], [0, A_i]]`.
pub fn series(outer: &StateSpace, inner: &StateSpace) -> Result<StateSpace> {
    if inner.n_outputs() != outer.n_inputs() {
        return Err(Error::Dimension(format!(
            "series: inner has {} outputs but outer has {} inputs",
            inner.n_outputs(),
            outer.n_inputs()
        )));
    }
    let (no, ni) = (outer.n_states(), inner.n_states());
    let n = no + ni;
    let mut a = DMatrix::zeros(n, n);
    a.view_mut((0, 0), (no, no)).copy_from(&outer.a);
    a.view_mut((0, no), (no, ni)).copy_from(&(&outer.b * &inner.c));
    a.view_mut((no, no), (ni, ni)).copy_from(&inner.a);
    let mut b = DMatrix::zeros(n, inner.n_inputs());
    b.view_mut((0, 0), (no, inner.n_inputs())).copy_from(&(&outer.b * &inner.d));
    b.view_mut((no, 0), (ni, inner.n_inputs())).copy_from(&inner.b);
    let mut c = DMatrix::zeros(outer.n_outputs(), n);
    c.view_mut((0, 0), (outer.n_outputs(), no)).copy_from(&outer.c);
    c.view_mut((0, no), (outer.n_outputs(), ni)).copy_from(&(&outer.d * &inner.c));
    let d = &outer.d * &inner.d;
    let mut out = StateSpace::new(a, b, c, d)?;
    out.state_names = outer.state_names.iter().chain(inner.state_names.iter()).cloned().collect();
    out.input_names = inner.input_names.clone();
    out.output_names = outer.output_names.clone();
    Ok(out)
}

/// Negative unity feedback around a strictly proper loop: `A_cl = A - B C`.
pub fn feedback_unity(open_loop: &StateSpace) -> Result<StateSpace> {
    if open_loop.n_inputs() != open_loop.n_outputs() {
        return Err(Error::Dimension("unity feedback needs as many outputs as inputs".into()));
    }
    if !open_loop.is_strictly_proper() {
        return Err(Error::Unsupported("unity feedback with nonzero feedthrough D (needs (I + D)^-1)".into()));
    }
    let a = &open_loop.a - &open_loop.b * &open_loop.c;
    let mut out = StateSpace::new(a, open_loop.b.clone(), open_loop.c.clone(), open_loop.d.clone())?;
    out.state_names = open_loop.state_names.clone();
    out.input_names = open_loop.input_names.clone();
    out.output_names = open_loop.output_names.clone();
    Ok(out)
}

/// Full spectrum of a square real matrix.
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!("eigenvalues of a {}x{} matrix", a.nrows(), a.ncols())));
    }
    if a.nrows() == 0 {
        return Ok(Vec::new());
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::Invalid("matrix has non-finite entries".into()));
    }
    let schur = Schur::try_new(a.clone(), f64::EPSILON, 1000 * a.nrows()).ok_or(Error::EigenNoConvergence)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Largest real part of the spectrum; `-inf` for an empty matrix.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(a)?.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max))
}

/// All eigenvalues satisfy `Re(λ) < -margin`.
pub fn is_hurwitz(a: &DMatrix<f64>, margin: f64) -> Result<bool> {
    Ok(spectral_abscissa(a)? < -margin)
}

/// Sampled frequency response of a SISO system, ω strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyLocus {
    samples: Vec<(f64, Complex64)>,
}

impl FrequencyLocus {
    pub fn new(samples: Vec<(f64, Complex64)>) -> Result<Self> {
        for w in samples.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Invalid(format!("frequency samples not strictly increasing at ω = {}", w[1].0)));
            }
        }
        if let Some((w, _)) =
            samples.iter().find(|(w, v)| *w < 0.0 || !w.is_finite() || !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::Invalid(format!("invalid frequency sample at ω = {w}")));
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[(f64, Complex64)] {
        &self.samples
    }
    pub fn len(&self) -> usize {
        self.samples.len()
    }
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
    pub fn omegas(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.0)
    }
    pub fn values(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.samples.iter().map(|s| s.1)
    }
}

/// Evaluates `C (jωI - A)^{-1} B + D` with one dense solve per frequency.
///
/// A grid point sitting on an imaginary-axis eigenvalue of A is reported as
/// [`Error::PoleOnGrid`] naming the offending ω.
pub fn freq_response(sys: &StateSpace, grid: &[f64]) -> Result<FrequencyLocus> {
    if !sys.is_siso() {
        return Err(Error::Dimension("frequency response needs a SISO system".into()));
    }
    if let Some(w) = grid.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
        return Err(Error::Invalid(format!("frequency {w} is not a nonnegative number")));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Invalid(format!("frequency grid not strictly increasing at {}", w[1])));
        }
    }
    let axis_poles: Vec<Complex64> =
        eigenvalues(&sys.a)?.into_iter().filter(|l| l.re.abs() <= 1e-12 * l.norm().max(1.0)).collect();
    let mut samples = Vec::with_capacity(grid.len());
    for &w in grid {
        if axis_poles.iter().any(|l| (l.im.abs() - w).abs() <= 1e-12 * w.max(1.0)) {
            return Err(Error::PoleOnGrid { omega: w });
        }
        let value = sys.eval_siso(Complex64::new(0.0, w)).map_err(|e| match e {
            Error::PoleOnGrid { .. } => Error::PoleOnGrid { omega: w },
            other => other,
        })?;
        samples.push((w, value));
    }
    FrequencyLocus::new(samples)
}

/// Log-spaced grid of `n` points on `[wmin, wmax]`.
pub fn logspace(wmin: f64, wmax: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![wmin],
        _ => {
            let (l0, l1) = (wmin.log10(), wmax.log10());
            (0..n)
                .map(|i| if i == n - 1 { wmax } else { 10f64.powf(l0 + (l1 - l0) * i as f64 / (n - 1) as f64) })
                .collect()
        }
    }
}
