//! Golden-section minimisation of a unimodal scalar function on a bracket.

use crate::error::{Error, Result};

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Minimiser and minimum value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
}

/// Shrinks `[a, b]` until its width is below `rel_tol * |x| + abs_tol`.
///
/// The returned point is the best one evaluated, so the endpoints' values
/// are never worse than reported.
pub fn minimize<F>(mut f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<Minimum>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Invalid(format!("golden-section bracket [{a}, {b}] is not finite")));
    }
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut best = Minimum { x: lo, value: f(lo)? };
    let at_hi = f(hi)?;
    if at_hi < best.value {
        best = Minimum { x: hi, value: at_hi };
    }
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs() + abs_tol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    for (x, v) in [(x1, f1), (x2, f2)] {
        if v < best.value {
            best = Minimum { x, value: v };
        }
    }
    Ok(best)
}
