//! Stability intervals for the scalar uncertainty from the locus of the fixed part.
//!
//! Every graphical criterion reduces to a pair of real-axis intercepts: a
//! positive one `x⁺` bounding Δ from below (`Δ = -1/x⁺`) and a negative one
//! `x⁻` bounding it from above (`Δ = -1/x⁻`). An intercept on the wrong side
//! of the origin leaves that side unbounded.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::golden;
use crate::lti::{freq_response, is_hurwitz, logspace, spectral_abscissa, FrequencyLocus, StateSpace};
use crate::mdelta::MDeltaModel;

/// Imaginary-part tolerance for a localized real-axis crossing.
pub const CROSSING_TOL: f64 = 1e-9;

/// Relative step used to confirm a bound from either side.
pub const BOUND_PROBE: f64 = 1e-3;

/// Frequency grid and refinement settings for [`sample_locus`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocusOptions {
    pub wmin: f64,
    pub wmax: f64,
    pub n: usize,
    /// Relative change between successive extreme-value estimates that stops refinement.
    pub refine_tol: f64,
}

impl Default for LocusOptions {
    fn default() -> Self {
        Self { wmin: 1e-4, wmax: 1e4, n: 4000, refine_tol: 1e-9 }
    }
}

impl LocusOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.wmin > 0.0 && self.wmin.is_finite() && self.wmax.is_finite() && self.wmax > self.wmin) {
            return Err(Error::Invalid(format!(
                "frequency window must satisfy 0 < wmin < wmax, got [{}, {}]",
                self.wmin, self.wmax
            )));
        }
        if self.n < 2 {
            return Err(Error::Invalid(format!("need at least 2 grid points, got {}", self.n)));
        }
        if !(self.refine_tol > 0.0 && self.refine_tol < 1.0) {
            return Err(Error::Invalid(format!("refine_tol must lie in (0, 1), got {}", self.refine_tol)));
        }
        Ok(())
    }
}

/// A point where the locus meets the real axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub omega: f64,
    pub x: f64,
}

/// Where a scalar score peaks along the locus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub omega: f64,
    pub value: f64,
    pub response: Complex64,
}

/// Sampled and refined locus of the fixed part.
#[derive(Debug, Clone)]
pub struct LocusSummary {
    /// The system whose locus this is; refinement evaluates it off-grid.
    pub system: StateSpace,
    /// Base grid, `ω = 0`, crossings and refined extrema, sorted by ω.
    pub locus: FrequencyLocus,
    /// `ω·Im M(jω)` for each locus sample.
    pub popov_ordinate: Vec<f64>,
    pub x_max: f64,
    pub x_min: f64,
    /// Real-axis crossings, `ω = 0` first.
    pub crossings: Vec<Crossing>,
    pub options: LocusOptions,
}

impl LocusSummary {
    pub fn eval(&self, omega: f64) -> Result<Complex64> {
        self.system.eval_siso(Complex64::new(0.0, omega))
    }

    /// Largest `|M(jω)|` over the samples.
    pub fn peak_modulus(&self) -> Peak {
        let mut best = Peak { omega: 0.0, value: f64::NEG_INFINITY, response: Complex64::new(0.0, 0.0) };
        for &(w, m) in self.locus.samples() {
            if m.norm() > best.value {
                best = Peak { omega: w, value: m.norm(), response: m };
            }
        }
        best
    }

    /// Supremum of `score(ω, M(jω))`, refined around the best local maxima.
    pub fn refined_max<F>(&self, score: F) -> Result<Peak>
    where
        F: Fn(f64, Complex64) -> f64,
    {
        refine_max(self.locus.samples(), |w| self.eval(w), &score, self.options.refine_tol)
    }

    /// Positive crossing farthest from the origin, or `None`.
    pub fn outermost_positive_crossing(&self) -> Option<Crossing> {
        let scale = self.peak_modulus().value;
        self.crossings.iter().copied().filter(|c| c.x > 1e-12 * scale).max_by(|a, b| a.x.total_cmp(&b.x))
    }

    /// Negative crossing farthest from the origin, or `None`.
    pub fn outermost_negative_crossing(&self) -> Option<Crossing> {
        let scale = self.peak_modulus().value;
        self.crossings.iter().copied().filter(|c| c.x < -1e-12 * scale).min_by(|a, b| a.x.total_cmp(&b.x))
    }
}

/// Samples `M(jω)` on a log grid plus `ω = 0`, localizes real-axis crossings
/// and refines the extremes of `Re M` and `|M|`.
pub fn sample_locus(m: &StateSpace, options: &LocusOptions) -> Result<LocusSummary> {
    options.validate()?;
    if !m.is_siso() {
        return Err(Error::Dimension("locus sampling needs a SISO system".into()));
    }
    if !m.is_strictly_proper() {
        return Err(Error::Unsupported("locus sampling needs a strictly proper system (D = 0)".into()));
    }
    if !is_hurwitz(m.a(), 0.0)? {
        return Err(Error::NotHurwitz {
            max_real: spectral_abscissa(m.a())?,
            context: "the graphical criteria need a stable fixed part M".into(),
        });
    }

    let mut grid = vec![0.0];
    grid.extend(logspace(options.wmin, options.wmax, options.n));
    let base = sample_avoiding_poles(m, grid)?;
    let eval = |w: f64| m.eval_siso(Complex64::new(0.0, w));

    let mut extra: Vec<(f64, Complex64)> = Vec::new();
    let mut crossings = vec![Crossing { omega: 0.0, x: base[0].1.re }];
    for pair in base.windows(2) {
        let ((w0, m0), (w1, m1)) = (pair[0], pair[1]);
        if w0 == 0.0 {
            continue;
        }
        if m1.im == 0.0 {
            crossings.push(Crossing { omega: w1, x: m1.re });
        } else if m0.im != 0.0 && (m0.im < 0.0) != (m1.im < 0.0) {
            let (w, value) = locate_crossing(&eval, (w0, m0), (w1, m1))?;
            crossings.push(Crossing { omega: w, x: value.re });
            extra.push((w, value));
        }
    }

    let tol = options.refine_tol;
    let re_max = refine_max(&base, eval, &|_, z: Complex64| z.re, tol)?;
    let re_min = refine_max(&base, eval, &|_, z: Complex64| -z.re, tol)?;
    let modulus = refine_max(&base, eval, &|_, z: Complex64| z.norm(), tol)?;
    for p in [re_max, re_min, modulus] {
        extra.push((p.omega, p.response));
    }

    let mut samples = base;
    samples.extend(extra);
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    samples.dedup_by(|a, b| a.0 == b.0);
    let locus = FrequencyLocus::new(samples)?;

    let popov_ordinate = locus.samples().iter().map(|(w, z)| w * z.im).collect();
    let x_max = locus.values().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let x_min = locus.values().map(|z| z.re).fold(f64::INFINITY, f64::min);
    log::debug!("locus: {} samples, x in [{x_min:.6}, {x_max:.6}], {} crossings", locus.len(), crossings.len());
    Ok(LocusSummary { system: m.clone(), locus, popov_ordinate, x_max, x_min, crossings, options: *options })
}

/// Evaluates the grid, nudging any point that lands on an imaginary-axis pole.
fn sample_avoiding_poles(m: &StateSpace, mut grid: Vec<f64>) -> Result<Vec<(f64, Complex64)>> {
    for _ in 0..8 {
        match freq_response(m, &grid) {
            Ok(locus) => return Ok(locus.samples().to_vec()),
            Err(Error::PoleOnGrid { omega }) => {
                let i = grid.iter().position(|&w| w == omega).expect("reported ω is on the grid");
                let next = grid.get(i + 1).copied().unwrap_or(omega * 2.0 + 1.0);
                let nudged = omega + (next - omega) * 1e-6;
                log::warn!("ω = {omega} sits on a pole of M; sampling ω = {nudged} instead");
                grid[i] = nudged;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Invalid("could not move the frequency grid off the poles of M".into()))
}

/// Illinois-modified regula falsi on `Im M(jω)` inside a sign-change bracket.
fn locate_crossing<E>(eval: &E, a: (f64, Complex64), b: (f64, Complex64)) -> Result<(f64, Complex64)>
where
    E: Fn(f64) -> Result<Complex64>,
{
    let (mut w0, mut f0, mut z0) = (a.0, a.1.im, a.1);
    let (mut w1, mut f1, mut z1) = (b.0, b.1.im, b.1);
    let mut side = 0i8;
    for _ in 0..200 {
        let w = (w0 * f1 - w1 * f0) / (f1 - f0);
        let w = if w > w0.min(w1) && w < w0.max(w1) { w } else { 0.5 * (w0 + w1) };
        let z = eval(w)?;
        if z.im.abs() < CROSSING_TOL || (w1 - w0).abs() <= 4.0 * f64::EPSILON * w.abs() {
            return Ok((w, z));
        }
        if (z.im < 0.0) == (f1 < 0.0) {
            (w1, f1, z1) = (w, z.im, z);
            if side == -1 {
                f0 *= 0.5;
            }
            side = -1;
        } else {
            (w0, f0, z0) = (w, z.im, z);
            if side == 1 {
                f1 *= 0.5;
            }
            side = 1;
        }
    }
    Ok(if z0.im.abs() <= z1.im.abs() { (w0, z0) } else { (w1, z1) })
}

/// Refines the largest local maxima of a sampled score by repeated subdivision
/// of the bracketing grid cells; the last sample stands for the high-frequency
/// limit and is taken as is.
fn refine_max<E, F>(samples: &[(f64, Complex64)], eval: E, score: &F, tol: f64) -> Result<Peak>
where
    E: Fn(f64) -> Result<Complex64>,
    F: Fn(f64, Complex64) -> f64 + ?Sized,
{
    const CANDIDATES: usize = 3;
    const PARTS: usize = 6;
    let n = samples.len();
    let scores: Vec<f64> = samples.iter().map(|&(w, z)| score(w, z)).collect();
    let mut peaks: Vec<usize> = (0..n)
        .filter(|&i| (i == 0 || scores[i] >= scores[i - 1]) && (i + 1 == n || scores[i] >= scores[i + 1]))
        .collect();
    peaks.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    peaks.truncate(CANDIDATES);

    let mut best = Peak { omega: f64::NAN, value: f64::NEG_INFINITY, response: Complex64::new(0.0, 0.0) };
    for i in peaks {
        let mut local = Peak { omega: samples[i].0, value: scores[i], response: samples[i].1 };
        if i + 1 < n {
            let (mut lo, mut hi) = (samples[i.saturating_sub(1)].0, samples[i + 1].0);
            for _ in 0..80 {
                let step = (hi - lo) / PARTS as f64;
                let mut pts = Vec::with_capacity(PARTS + 1);
                for j in 0..=PARTS {
                    let w = if j == PARTS { hi } else { lo + step * j as f64 };
                    let z = eval(w)?;
                    pts.push((w, score(w, z), z));
                }
                let jb = (0..=PARTS).fold(0, |b, j| if pts[j].1 > pts[b].1 { j } else { b });
                if pts[jb].1 > local.value {
                    local = Peak { omega: pts[jb].0, value: pts[jb].1, response: pts[jb].2 };
                }
                let (a, b) = (jb.saturating_sub(1), (jb + 1).min(PARTS));
                lo = pts[a].0;
                hi = pts[b].0;
                // The score varies by no more than this across the new bracket.
                let spread = pts[jb].1 - pts[a].1.min(pts[b].1);
                if spread <= tol * local.value.abs().max(f64::MIN_POSITIVE) || hi - lo <= 4.0 * f64::EPSILON * hi {
                    break;
                }
            }
        }
        if local.value > best.value {
            best = local;
        }
    }
    Ok(best)
}

/// Analysis method for an interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Criterion {
    Exact,
    SmallGain,
    Circle,
    PositiveReal,
    Popov,
}

impl Criterion {
    /// Report order.
    pub const ALL: [Criterion; 5] =
        [Criterion::Exact, Criterion::SmallGain, Criterion::Circle, Criterion::PositiveReal, Criterion::Popov];

    /// Machine-readable key.
    pub fn key(self) -> &'static str {
        match self {
            Criterion::Exact => "exact",
            Criterion::SmallGain => "small_gain",
            Criterion::Circle => "circle",
            Criterion::PositiveReal => "positive_real",
            Criterion::Popov => "popov",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Criterion::Exact => "Exact",
            Criterion::SmallGain => "Small gain",
            Criterion::Circle => "Circle",
            Criterion::PositiveReal => "Positive real",
            Criterion::Popov => "Popov",
        }
    }
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s.trim().to_ascii_lowercase().chars().filter(|c| *c != '_' && *c != '-').collect();
        match norm.as_str() {
            "exact" => Ok(Criterion::Exact),
            "smallgain" | "sg" => Ok(Criterion::SmallGain),
            "circle" => Ok(Criterion::Circle),
            "posreal" | "positivereal" | "pr" => Ok(Criterion::PositiveReal),
            "popov" => Ok(Criterion::Popov),
            _ => Err(Error::Invalid(format!(
                "unknown criterion '{s}' (expected exact, smallgain, circle, posreal or popov)"
            ))),
        }
    }
}

/// Criterion-specific quantities behind an interval.
#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Exact {
        /// `-1/x` of the outermost crossings; infinite when there is none.
        crossing_lower: f64,
        crossing_upper: f64,
        omega_lower: Option<f64>,
        omega_upper: Option<f64>,
    },
    SmallGain {
        r_sg: f64,
        omega: f64,
    },
    Circle {
        x_c: f64,
        r_c: f64,
    },
    PositiveReal {
        x_max: f64,
        x_min: f64,
    },
    Popov {
        q_plus: f64,
        c_plus: f64,
        q_minus: f64,
        c_minus: f64,
    },
}

impl Witness {
    /// Named values, in a fixed order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let opt = |w: Option<f64>| w.unwrap_or(f64::NAN);
        match *self {
            Witness::Exact { crossing_lower, crossing_upper, omega_lower, omega_upper } => vec![
                ("crossing_lower", crossing_lower),
                ("crossing_upper", crossing_upper),
                ("omega_lower", opt(omega_lower)),
                ("omega_upper", opt(omega_upper)),
            ],
            Witness::SmallGain { r_sg, omega } => vec![("r_sg", r_sg), ("omega", omega)],
            Witness::Circle { x_c, r_c } => vec![("x_c", x_c), ("r_c", r_c)],
            Witness::PositiveReal { x_max, x_min } => vec![("x_max", x_max), ("x_min", x_min)],
            Witness::Popov { q_plus, c_plus, q_minus, c_minus } => {
                vec![("q_plus", q_plus), ("c_plus", c_plus), ("q_minus", q_minus), ("c_minus", c_minus)]
            }
        }
    }
}

/// `lower ≤ Δ ≤ upper`; an infinite side is unbounded.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityInterval {
    pub lower: f64,
    pub upper: f64,
    pub criterion: Criterion,
    pub witness: Witness,
}

impl StabilityInterval {
    /// `(x⁺, x⁻)` with `lower = -1/x⁺` and `upper = -1/x⁻` on bounded sides.
    pub fn intercepts(&self) -> (f64, f64) {
        match self.witness {
            Witness::SmallGain { r_sg, .. } => (r_sg, -r_sg),
            Witness::Circle { x_c, r_c } => (x_c + r_c, x_c - r_c),
            Witness::PositiveReal { x_max, x_min } => (x_max, x_min),
            Witness::Popov { c_plus, c_minus, .. } => (c_plus, c_minus),
            Witness::Exact { .. } => (-1.0 / self.lower, -1.0 / self.upper),
        }
    }

    pub fn lower_unbounded(&self) -> bool {
        self.lower == f64::NEG_INFINITY
    }

    pub fn upper_unbounded(&self) -> bool {
        self.upper == f64::INFINITY
    }

    pub fn contains(&self, delta: f64) -> bool {
        self.lower <= delta && delta <= self.upper
    }

    fn from_intercepts(criterion: Criterion, plus: f64, minus: f64, witness: Witness) -> Self {
        Self { lower: lower_from_intercept(plus), upper: upper_from_intercept(minus), criterion, witness }
    }
}

/// `-1/x⁺`, or `-∞` when the intercept is not positive.
pub fn lower_from_intercept(plus: f64) -> f64 {
    if plus > 0.0 {
        -1.0 / plus
    } else {
        f64::NEG_INFINITY
    }
}

/// `-1/x⁻`, or `+∞` when the intercept is not negative.
pub fn upper_from_intercept(minus: f64) -> f64 {
    if minus < 0.0 {
        -1.0 / minus
    } else {
        f64::INFINITY
    }
}

/// Origin-centred circle through the farthest locus point.
pub fn small_gain_bounds(summary: &LocusSummary) -> StabilityInterval {
    let peak = summary.peak_modulus();
    StabilityInterval::from_intercepts(
        Criterion::SmallGain,
        peak.value,
        -peak.value,
        Witness::SmallGain { r_sg: peak.value, omega: peak.omega },
    )
}

/// How the circle centre is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CircleCenter {
    /// Midpoint of the extreme real parts.
    #[default]
    Midpoint,
    /// Centre maximizing the worse of the two bounds relative to the crossing bounds.
    Optimize,
}

/// Enclosing circle centred on the real axis.
pub fn circle_bounds(summary: &LocusSummary, center: CircleCenter) -> Result<StabilityInterval> {
    let x_c = match center {
        CircleCenter::Midpoint => 0.5 * (summary.x_max + summary.x_min),
        CircleCenter::Optimize => optimal_circle_center(summary)?,
    };
    circle_bounds_at(summary, x_c)
}

/// Circle centred at `x_c` with the smallest radius enclosing the locus.
pub fn circle_bounds_at(summary: &LocusSummary, x_c: f64) -> Result<StabilityInterval> {
    let r_c = circle_radius(summary, x_c)?;
    Ok(StabilityInterval::from_intercepts(Criterion::Circle, x_c + r_c, x_c - r_c, Witness::Circle { x_c, r_c }))
}

fn circle_radius(summary: &LocusSummary, x_c: f64) -> Result<f64> {
    let center = Complex64::new(x_c, 0.0);
    Ok(summary.refined_max(|_, z| (z - center).norm())?.value)
}

fn optimal_circle_center(summary: &LocusSummary) -> Result<f64> {
    let plus = summary.outermost_positive_crossing().map(|c| c.x);
    let minus = summary.outermost_negative_crossing().map(|c| c.x);
    if plus.is_none() && minus.is_none() {
        return Ok(0.5 * (summary.x_max + summary.x_min));
    }
    // Fraction of the crossing bound retained on the worse side, negated for minimization.
    let objective = |x_c: f64| -> Result<f64> {
        let r_c = circle_radius(summary, x_c)?;
        let mut worst = f64::INFINITY;
        if let Some(p) = plus {
            worst = worst.min(if x_c + r_c > 0.0 { p / (x_c + r_c) } else { 0.0 });
        }
        if let Some(m) = minus {
            worst = worst.min(if x_c - r_c < 0.0 { m / (x_c - r_c) } else { 0.0 });
        }
        Ok(-worst)
    };
    const SCAN: usize = 40;
    let (lo, hi) = (summary.x_min, summary.x_max);
    let step = (hi - lo) / SCAN as f64;
    let mut best = (0, f64::INFINITY);
    for k in 0..=SCAN {
        let v = objective(lo + step * k as f64)?;
        if v < best.1 {
            best = (k, v);
        }
    }
    let a = lo + step * best.0.saturating_sub(1) as f64;
    let b = lo + step * (best.0 + 1).min(SCAN) as f64;
    let m = golden::minimize(objective, a, b, 1e-9, 1e-12 * (hi - lo).abs().max(1e-300))?;
    Ok(m.x)
}

/// Vertical lines through the extreme real parts.
pub fn positive_real_bounds(summary: &LocusSummary) -> StabilityInterval {
    StabilityInterval::from_intercepts(
        Criterion::PositiveReal,
        summary.x_max,
        summary.x_min,
        Witness::PositiveReal { x_max: summary.x_max, x_min: summary.x_min },
    )
}

/// Popov-line slope search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlopeSearch {
    /// Log scan of `±[q_min, q_max]` and `q = 0`, then golden-section refinement.
    Optimize { q_min: f64, q_max: f64, per_side: usize, rel_tol: f64 },
    /// Vertical lines only (`q = 0`).
    Vertical,
}

impl Default for SlopeSearch {
    fn default() -> Self {
        SlopeSearch::Optimize { q_min: 1e-4, q_max: 1e4, per_side: 81, rel_tol: 1e-6 }
    }
}

/// Popov lines on `(Re M, ω Im M)`: `c⁺ = min_q sup_ω f` and `c⁻ = max_q inf_ω f`
/// with `f(q, ω) = Re M(jω) - q ω Im M(jω)`.
pub fn popov_bounds(summary: &LocusSummary, search: SlopeSearch) -> Result<StabilityInterval> {
    let (q_plus, c_plus, q_minus, c_minus) = match search {
        SlopeSearch::Vertical => (0.0, summary.x_max, 0.0, summary.x_min),
        SlopeSearch::Optimize { q_min, q_max, per_side, rel_tol } => {
            if !(q_min > 0.0 && q_max > q_min && per_side >= 2) {
                return Err(Error::Invalid(format!(
                    "Popov slope scan needs 0 < q_min < q_max and at least 2 points per side, got [{q_min}, {q_max}] x {per_side}"
                )));
            }
            let mut qs: Vec<f64> = logspace(q_min, q_max, per_side).into_iter().rev().map(|q| -q).collect();
            qs.push(0.0);
            qs.extend(logspace(q_min, q_max, per_side));
            let (qp, cp) = popov_line(summary, &qs, 1.0, rel_tol)?;
            let (qm, cm) = popov_line(summary, &qs, -1.0, rel_tol)?;
            // q = 0 is admissible, so neither line may lie outside the vertical ones.
            let (qp, cp) = if cp > summary.x_max { (0.0, summary.x_max) } else { (qp, cp) };
            let (qm, cm) = if -cm > -summary.x_min { (0.0, summary.x_min) } else { (qm, -cm) };
            (qp, cp, qm, cm)
        }
    };
    Ok(StabilityInterval::from_intercepts(
        Criterion::Popov,
        c_plus,
        c_minus,
        Witness::Popov { q_plus, c_plus, q_minus, c_minus },
    ))
}

/// Minimizes `sup_ω sign·f(q, ω)` over q; returns `(q, value)`.
fn popov_line(summary: &LocusSummary, qs: &[f64], sign: f64, rel_tol: f64) -> Result<(f64, f64)> {
    let samples = summary.locus.samples();
    let coarse = |q: f64| samples.iter().map(|&(w, z)| sign * (z.re - q * w * z.im)).fold(f64::NEG_INFINITY, f64::max);
    let fine = |q: f64| -> Result<f64> { Ok(summary.refined_max(|w, z| sign * (z.re - q * w * z.im))?.value) };

    let values: Vec<f64> = qs.iter().map(|&q| coarse(q)).collect();
    let k = (0..qs.len()).fold(0, |b, i| if values[i] < values[b] { i } else { b });
    let a = qs[k.saturating_sub(1)];
    let b = qs[(k + 1).min(qs.len() - 1)];
    let m = golden::minimize(fine, a, b, rel_tol, 1e-12)?;
    let at_scan = fine(qs[k])?;
    Ok(if at_scan < m.value { (qs[k], at_scan) } else { (m.x, m.value) })
}

/// Smallest Δ-interval around 0 on which `H + Δ𝒬` stays Hurwitz.
///
/// Candidates come from the outward-ordered real-axis crossings (`Δ = -1/x`).
/// Each is confirmed by stability just inside and instability just outside,
/// then polished by bisection on the eigenvalue predicate. A side with no
/// destabilizing crossing is unbounded.
pub fn exact_bounds(model: &MDeltaModel, summary: &LocusSummary, margin: f64) -> Result<StabilityInterval> {
    let scale = summary.peak_modulus().value;
    let mut lower_cands: Vec<Crossing> = summary.crossings.iter().copied().filter(|c| c.x > 1e-12 * scale).collect();
    let mut upper_cands: Vec<Crossing> = summary.crossings.iter().copied().filter(|c| c.x < -1e-12 * scale).collect();
    lower_cands.sort_by(|a, b| b.x.total_cmp(&a.x));
    upper_cands.sort_by(|a, b| a.x.total_cmp(&b.x));

    let lower = polish_side(model, &lower_cands, -1.0, margin)?;
    let upper = polish_side(model, &upper_cands, 1.0, margin)?;
    let first = |c: &[Crossing]| c.first().map(|c| (-1.0 / c.x, c.omega));
    let (crossing_lower, omega_lower) = first(&lower_cands).map_or((f64::NEG_INFINITY, None), |(d, w)| (d, Some(w)));
    let (crossing_upper, omega_upper) = first(&upper_cands).map_or((f64::INFINITY, None), |(d, w)| (d, Some(w)));
    Ok(StabilityInterval {
        lower,
        upper,
        criterion: Criterion::Exact,
        witness: Witness::Exact { crossing_lower, crossing_upper, omega_lower, omega_upper },
    })
}

/// Candidates ordered by increasing `|Δ|`, all on the side `sign`.
fn polish_side(model: &MDeltaModel, cands: &[Crossing], sign: f64, margin: f64) -> Result<f64> {
    let stable = |d: f64| model.is_stable_at(d, margin);
    for c in cands {
        let delta = -1.0 / c.x;
        let inner = delta * (1.0 - BOUND_PROBE);
        let outer = delta * (1.0 + BOUND_PROBE);
        if !stable(inner)? {
            log::warn!("instability before the crossing bound {delta}; scanning from 0");
            let step = inner.abs() * 1e-4;
            return Ok(scan_side(model, sign, inner.abs(), step, margin)?.unwrap_or(inner));
        }
        if stable(outer)? {
            log::debug!("crossing at Δ = {delta} does not destabilize; trying the next one");
            continue;
        }
        return bisect(model, inner, outer, margin);
    }
    Ok(sign * f64::INFINITY)
}

/// Stable at `inside`, unstable at `outside`; shrinks to `1e-10` relative.
fn bisect(model: &MDeltaModel, mut inside: f64, mut outside: f64, margin: f64) -> Result<f64> {
    let tol = 1e-10 * inside.abs().max(outside.abs()) + 1e-14;
    while (outside - inside).abs() > tol {
        let mid = 0.5 * (inside + outside);
        if model.is_stable_at(mid, margin)? {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    Ok(0.5 * (inside + outside))
}

/// Walks from 0 in direction `sign` in steps of `step` up to `limit`; returns
/// the bisected first loss of stability, if any.
fn scan_side(model: &MDeltaModel, sign: f64, limit: f64, step: f64, margin: f64) -> Result<Option<f64>> {
    let mut k = 1u64;
    loop {
        let d = (k as f64 * step).min(limit);
        if !model.is_stable_at(sign * d, margin)? {
            let prev = sign * (k - 1) as f64 * step;
            return Ok(Some(bisect(model, prev, sign * d, margin)?));
        }
        if d >= limit {
            return Ok(None);
        }
        k += 1;
    }
}

/// Δ range and step of the eigenvalue-only route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub lower_limit: f64,
    pub upper_limit: f64,
    pub step: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { lower_limit: -100.0, upper_limit: 10.0, step: 1e-3 }
    }
}

/// Exact bounds from a Δ sweep with eigensolves alone, ignoring the locus.
///
/// A side stable up to its scan limit is reported as unbounded.
pub fn exact_bounds_by_scan(model: &MDeltaModel, scan: &ScanOptions, margin: f64) -> Result<(f64, f64)> {
    if !(scan.lower_limit < 0.0 && scan.upper_limit > 0.0 && scan.step > 0.0) {
        return Err(Error::Invalid("Δ scan needs lower < 0 < upper and a positive step".into()));
    }
    let lower = scan_side(model, -1.0, -scan.lower_limit, scan.step, margin)?.unwrap_or(f64::NEG_INFINITY);
    let upper = scan_side(model, 1.0, scan.upper_limit, scan.step, margin)?.unwrap_or(f64::INFINITY);
    Ok((lower, upper))
}

/// Whether `H - 𝒬/x` has an eigenvalue at `jω` for the crossing `(ω, x)`
/// farthest from the origin, which holds exactly when the locus orientation
/// matches the intercept mapping. `None` without a usable crossing.
pub fn orientation_consistent(model: &MDeltaModel, summary: &LocusSummary) -> Result<Option<bool>> {
    let best = summary
        .outermost_positive_crossing()
        .into_iter()
        .chain(summary.outermost_negative_crossing())
        .max_by(|a, b| a.x.abs().total_cmp(&b.x.abs()));
    let Some(c) = best else { return Ok(None) };
    let target = Complex64::new(0.0, c.omega);
    let hit = |delta: f64| -> Result<f64> {
        let eig = crate::lti::eigenvalues(&model.perturbed(delta))?;
        Ok(eig.iter().map(|l| (l - target).norm()).fold(f64::INFINITY, f64::min))
    };
    let tol = 1e-6 * c.omega.max(1.0);
    let ours = hit(-1.0 / c.x)?;
    let flipped = hit(1.0 / c.x)?;
    log::debug!("orientation check at ω = {}: distance {ours:e} (flipped {flipped:e})", c.omega);
    Ok(Some(ours <= tol || ours < flipped))
}

/// Outcome of an interior stability audit.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub criterion: Criterion,
    pub samples: usize,
    /// The Δ range actually sampled after clamping unbounded sides.
    pub sampled_range: (f64, f64),
    /// Outward probes of the exact bounds, `(Δ, unstable)`.
    pub outside_checks: Vec<(f64, bool)>,
    pub vacuous: bool,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.outside_checks.iter().all(|c| c.1)
    }
}

/// Finite stand-in for an unbounded side when sampling.
pub const VERIFY_CLAMP: f64 = 1e3;

/// Checks `H + Δ𝒬` is Hurwitz at `n` points strictly inside the interval and,
/// for the exact interval, unstable just outside each finite bound.
pub fn verify_interval(
    model: &MDeltaModel,
    interval: &StabilityInterval,
    n: usize,
    margin: f64,
) -> Result<VerificationReport> {
    let clamp = |x: f64| {
        if x.is_infinite() {
            log::warn!("{} interval is unbounded; sampling up to |Δ| = {VERIFY_CLAMP}", interval.criterion);
            VERIFY_CLAMP.copysign(x)
        } else {
            x
        }
    };
    let (lo, hi) = (clamp(interval.lower), clamp(interval.upper));
    if lo.is_nan() || hi.is_nan() || lo > hi {
        return Err(Error::Invalid(format!("cannot verify interval [{lo}, {hi}]")));
    }
    let vacuous = n == 0 || lo == hi;
    if n == 0 {
        log::warn!("no samples requested for the {} interval; verification is vacuous", interval.criterion);
    }
    if !vacuous {
        let mut deltas: Vec<f64> = (1..=n).map(|k| lo + (hi - lo) * k as f64 / (n + 1) as f64).collect();
        // Nearest to the nominal point first, so a failure names the first unstable Δ met going outward.
        deltas.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        for delta in deltas {
            if !model.is_stable_at(delta, margin)? {
                return Err(Error::Unsound { criterion: interval.criterion.key().into(), delta });
            }
        }
    }
    let mut outside_checks = Vec::new();
    if interval.criterion == Criterion::Exact {
        for bound in [interval.lower, interval.upper] {
            if bound.is_finite() && bound != 0.0 {
                let probe = bound + BOUND_PROBE * bound.abs() * bound.signum();
                outside_checks.push((probe, !model.is_stable_at(probe, margin)?));
            }
        }
    }
    Ok(VerificationReport {
        criterion: interval.criterion,
        samples: if vacuous { 0 } else { n },
        sampled_range: (lo, hi),
        outside_checks,
        vacuous,
    })
}
