//! Real polynomials stored as coefficient vectors in descending degree.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lti::eigenvalues;

/// Expands `prod (s - r)` by incremental root multiplication.
///
/// The result is monic and has `roots.len() + 1` coefficients. Imaginary parts
/// are kept so the caller can check that they cancel.
pub fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        coeffs.push(Complex64::new(0.0, 0.0));
        for i in (1..coeffs.len()).rev() {
            let prev = coeffs[i - 1];
            coeffs[i] -= r * prev;
        }
    }
    coeffs
}

/// Real-coefficient monic polynomial with the given (conjugate-closed) roots.
pub fn real_from_roots(roots: &[Complex64]) -> Vec<f64> {
    from_roots(roots).into_iter().map(|c| c.re).collect()
}

/// Horner evaluation at a complex point.
pub fn eval(coeffs: &[f64], s: Complex64) -> Complex64 {
    coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
}

/// Degree after discarding exact leading zeros; the zero polynomial reports 0.
pub fn degree(coeffs: &[f64]) -> usize {
    let lead = coeffs.iter().position(|&c| c != 0.0).unwrap_or(coeffs.len());
    coeffs.len().saturating_sub(lead + 1)
}

/// Drops exact leading zeros, keeping at least one coefficient.
pub fn trim(coeffs: &[f64]) -> Vec<f64> {
    match coeffs.iter().position(|&c| c != 0.0) {
        Some(i) => coeffs[i..].to_vec(),
        None => vec![0.0],
    }
}

/// Roots as eigenvalues of the companion matrix.
pub fn roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    let c = trim(coeffs);
    if c.len() <= 1 {
        return Ok(Vec::new());
    }
    let n = c.len() - 1;
    let lead = c[0];
    let mut companion = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        companion[(0, j)] = -c[j + 1] / lead;
    }
    for i in 1..n {
        companion[(i, i - 1)] = 1.0;
    }
    eigenvalues(&companion)
}

/// True when every non-real root has a partner equal to its conjugate within
/// `tol * max(1, |r|)`.
pub fn is_conjugate_closed(roots: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        let r = roots[i];
        let scale = tol * r.norm().max(1.0);
        if r.im.abs() <= scale {
            used[i] = true;
            continue;
        }
        let partner = (0..roots.len()).filter(|&j| j != i && !used[j]).find(|&j| (roots[j] - r.conj()).norm() <= scale);
        match partner {
            Some(j) => {
                used[i] = true;
                used[j] = true;
            }
            None => return false,
        }
    }
    true
}

/// Zeroes imaginary parts below `tol * max(1, |r|)`.
pub fn clean_roots(roots: &mut [Complex64], tol: f64) {
    for r in roots.iter_mut() {
        if r.im.abs() <= tol * r.norm().max(1.0) {
            r.im = 0.0;
        }
    }
}

/// Coefficient-wise `a - b` for descending-order polynomials of any lengths.
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len().max(b.len());
    let pad = |p: &[f64], i: usize| {
        let off = n - p.len();
        if i >= off {
            p[i - off]
        } else {
            0.0
        }
    };
    (0..n).map(|i| pad(a, i) - pad(b, i)).collect()
}

/// Orders roots by real part then imaginary part, for deterministic display and comparison.
pub fn sort_roots(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
    });
}

pub(crate) fn check_finite(coeffs: &[f64], what: &str) -> Result<()> {
    if coeffs.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::Representation(format!("{what} has non-finite coefficients")))
    }
}
