//! Plot data for the four criterion figures and a dependency-free SVG renderer.
//!
//! The CSV carries everything the SVG needs: `# key: value` header lines for
//! the figure name, overlays and intercept markers, then one row per locus
//! sample. Rendering depends only on that content, so a CSV read back
//! reproduces the SVG byte for byte.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::analysis::Analysis;
use crate::criteria::{
    circle_bounds, popov_bounds, positive_real_bounds, small_gain_bounds, Criterion, StabilityInterval, Witness,
};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    NyquistSmallGain,
    NyquistCircle,
    NyquistPosReal,
    Popov,
}

impl Figure {
    pub const ALL: [Figure; 4] =
        [Figure::NyquistSmallGain, Figure::NyquistCircle, Figure::NyquistPosReal, Figure::Popov];

    pub fn name(self) -> &'static str {
        match self {
            Figure::NyquistSmallGain => "nyquist_smallgain",
            Figure::NyquistCircle => "nyquist_circle",
            Figure::NyquistPosReal => "nyquist_posreal",
            Figure::Popov => "popov",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Figure::NyquistSmallGain => "Small gain criterion",
            Figure::NyquistCircle => "Circle criterion",
            Figure::NyquistPosReal => "Positive real criterion",
            Figure::Popov => "Popov criterion",
        }
    }

    fn criterion(self) -> Criterion {
        match self {
            Figure::NyquistSmallGain => Criterion::SmallGain,
            Figure::NyquistCircle => Criterion::Circle,
            Figure::NyquistPosReal => Criterion::PositiveReal,
            Figure::Popov => Criterion::Popov,
        }
    }

    fn y_column(self) -> &'static str {
        if self == Figure::Popov {
            "omega_im"
        } else {
            "im"
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL.into_iter().find(|f| f.name() == s.trim()).ok_or_else(|| {
            Error::Invalid(format!(
                "unknown figure '{s}' (expected nyquist_smallgain, nyquist_circle, nyquist_posreal or popov)"
            ))
        })
    }
}

/// Geometry drawn over the locus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Overlay {
    Circle {
        cx: f64,
        r: f64,
    },
    Vertical {
        x: f64,
    },
    /// Points with `x - q·y = c`.
    PopovLine {
        q: f64,
        c: f64,
    },
}

impl Overlay {
    fn to_line(self) -> String {
        match self {
            Overlay::Circle { cx, r } => format!("circle cx={cx} r={r}"),
            Overlay::Vertical { x } => format!("vertical x={x}"),
            Overlay::PopovLine { q, c } => format!("popov_line q={q} c={c}"),
        }
    }

    fn parse(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let kind = parts.next().unwrap_or_default();
        let mut get = |name: &str| -> Result<f64> {
            let p = parts.next().ok_or_else(|| Error::PlotData(format!("overlay '{s}' lacks {name}")))?;
            let v = p
                .strip_prefix(name)
                .and_then(|r| r.strip_prefix('='))
                .ok_or_else(|| Error::PlotData(format!("overlay '{s}': expected {name}=…")))?;
            v.parse().map_err(|_| Error::PlotData(format!("overlay '{s}': bad number '{v}'")))
        };
        match kind {
            "circle" => Ok(Overlay::Circle { cx: get("cx")?, r: get("r")? }),
            "vertical" => Ok(Overlay::Vertical { x: get("x")? }),
            "popov_line" => Ok(Overlay::PopovLine { q: get("q")?, c: get("c")? }),
            _ => Err(Error::PlotData(format!("unknown overlay '{kind}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotData {
    pub figure: Figure,
    /// `(ω, Re M, Im M)`, or `(ω, Re M, ω Im M)` for the Popov figure.
    pub points: Vec<(f64, f64, f64)>,
    pub overlays: Vec<Overlay>,
    /// Real-axis intercepts of the overlays.
    pub markers: Vec<f64>,
}

/// Locus and criterion geometry for one figure, computing the criterion if
/// the analysis did not.
pub fn plot_data(analysis: &Analysis, figure: Figure) -> Result<PlotData> {
    let s = &analysis.summary;
    let interval: StabilityInterval = match analysis.interval(figure.criterion()) {
        Some(i) => i.clone(),
        None => match figure {
            Figure::NyquistSmallGain => small_gain_bounds(s),
            Figure::NyquistCircle => circle_bounds(s, analysis.settings.circle_center)?,
            Figure::NyquistPosReal => positive_real_bounds(s),
            Figure::Popov => popov_bounds(s, analysis.settings.slope_search)?,
        },
    };
    let overlays = match interval.witness {
        Witness::SmallGain { r_sg, .. } => vec![Overlay::Circle { cx: 0.0, r: r_sg }],
        Witness::Circle { x_c, r_c } => vec![Overlay::Circle { cx: x_c, r: r_c }],
        Witness::PositiveReal { x_max, x_min } => vec![Overlay::Vertical { x: x_max }, Overlay::Vertical { x: x_min }],
        Witness::Popov { q_plus, c_plus, q_minus, c_minus } => {
            vec![Overlay::PopovLine { q: q_plus, c: c_plus }, Overlay::PopovLine { q: q_minus, c: c_minus }]
        }
        Witness::Exact { .. } => unreachable!("no figure for the exact interval"),
    };
    let (plus, minus) = interval.intercepts();
    let points = s
        .locus
        .samples()
        .iter()
        .map(|&(w, z)| (w, z.re, if figure == Figure::Popov { w * z.im } else { z.im }))
        .collect();
    Ok(PlotData { figure, points, overlays, markers: vec![plus, minus] })
}

impl PlotData {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# figure: {}\n", self.figure);
        for o in &self.overlays {
            let _ = writeln!(out, "# overlay: {}", o.to_line());
        }
        for m in &self.markers {
            let _ = writeln!(out, "# marker: {m}");
        }
        let _ = writeln!(out, "omega,re,{}", self.figure.y_column());
        for (w, x, y) in &self.points {
            let _ = writeln!(out, "{w},{x},{y}");
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut figure = None;
        let mut overlays = Vec::new();
        let mut markers = Vec::new();
        let mut points = Vec::new();
        let mut header_seen = false;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if let Some(meta) = line.strip_prefix('#') {
                let (key, value) = meta
                    .split_once(':')
                    .ok_or_else(|| Error::PlotData(format!("line {n}: expected '# key: value'")))?;
                let value = value.trim();
                match key.trim() {
                    "figure" => figure = Some(value.parse::<Figure>()?),
                    "overlay" => overlays.push(Overlay::parse(value)?),
                    "marker" => markers
                        .push(value.parse().map_err(|_| Error::PlotData(format!("line {n}: bad marker '{value}'")))?),
                    other => return Err(Error::PlotData(format!("line {n}: unknown key '{other}'"))),
                }
            } else if !header_seen {
                header_seen = true;
            } else if !line.trim().is_empty() {
                let v: Vec<f64> = line
                    .split(',')
                    .map(|f| f.trim().parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::PlotData(format!("line {n}: bad number")))?;
                if v.len() != 3 {
                    return Err(Error::PlotData(format!("line {n}: expected 3 columns")));
                }
                points.push((v[0], v[1], v[2]));
            }
        }
        let figure = figure.ok_or_else(|| Error::PlotData("missing '# figure:' line".into()))?;
        Ok(Self { figure, points, overlays, markers })
    }

    /// 800×600 SVG; Nyquist figures use equal axis scaling.
    pub fn to_svg(&self) -> String {
        const W: f64 = 800.0;
        const H: f64 = 600.0;
        const LEFT: f64 = 80.0;
        const RIGHT: f64 = 30.0;
        const TOP: f64 = 50.0;
        const BOTTOM: f64 = 60.0;
        let (pw, ph) = (W - LEFT - RIGHT, H - TOP - BOTTOM);

        let mut xs: Vec<f64> = self.points.iter().map(|p| p.1).collect();
        let mut ys: Vec<f64> = self.points.iter().map(|p| p.2).collect();
        xs.extend(&self.markers);
        ys.push(0.0);
        for o in &self.overlays {
            match *o {
                Overlay::Circle { cx, r } => {
                    xs.extend([cx - r, cx + r]);
                    ys.extend([-r, r]);
                }
                Overlay::Vertical { x } => xs.push(x),
                Overlay::PopovLine { c, .. } => xs.push(c),
            }
        }
        let finite = |v: &[f64]| {
            let it = v.iter().copied().filter(|x| x.is_finite());
            let lo = it.clone().fold(f64::INFINITY, f64::min);
            let hi = it.fold(f64::NEG_INFINITY, f64::max);
            if lo.is_finite() {
                (lo, hi)
            } else {
                (-1.0, 1.0)
            }
        };
        let pad = |(lo, hi): (f64, f64)| {
            let span = if hi > lo { hi - lo } else { 1.0 };
            (lo - 0.05 * span, hi + 0.05 * span)
        };
        let (mut x0, mut x1) = pad(finite(&xs));
        let (mut y0, mut y1) = pad(finite(&ys));
        let (mut sx, mut sy) = (pw / (x1 - x0), ph / (y1 - y0));
        if self.figure != Figure::Popov {
            let s = sx.min(sy);
            let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
            (x0, x1) = (cx - 0.5 * pw / s, cx + 0.5 * pw / s);
            (y0, y1) = (cy - 0.5 * ph / s, cy + 0.5 * ph / s);
            (sx, sy) = (s, s);
        }
        let px = |x: f64| LEFT + (x - x0) * sx;
        let py = |y: f64| TOP + (y1 - y) * sy;

        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
        );
        let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
        let _ = writeln!(
            out,
            r#"<defs><clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath></defs>"#
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="30" text-anchor="middle" font-size="16">{}</text>"#,
            W / 2.0,
            self.figure.title()
        );

        for (t, label) in ticks(x0, x1) {
            let x = px(t);
            let _ =
                writeln!(out, r##"<line x1="{x:.2}" y1="{TOP}" x2="{x:.2}" y2="{:.2}" stroke="#eeeeee"/>"##, TOP + ph);
            let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, TOP + ph + 18.0);
        }
        for (t, label) in ticks(y0, y1) {
            let y = py(t);
            let _ = writeln!(
                out,
                r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#eeeeee"/>"##,
                LEFT + pw
            );
            let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 6.0, y + 4.0);
        }
        let _ = writeln!(out, r#"<g clip-path="url(#plot)">"#);
        if x0 < 0.0 && x1 > 0.0 {
            let _ = writeln!(
                out,
                r##"<line x1="{:.2}" y1="{TOP}" x2="{:.2}" y2="{:.2}" stroke="#888888"/>"##,
                px(0.0),
                px(0.0),
                TOP + ph
            );
        }
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888888"/>"##,
            py(0.0),
            LEFT + pw,
            py(0.0)
        );

        for o in &self.overlays {
            match *o {
                Overlay::Circle { cx, r } => {
                    let _ = writeln!(
                        out,
                        r##"<circle cx="{:.2}" cy="{:.2}" r="{:.2}" fill="none" stroke="#d62728" stroke-width="1.5"/>"##,
                        px(cx),
                        py(0.0),
                        r * sx
                    );
                }
                Overlay::Vertical { x } => {
                    let _ = writeln!(
                        out,
                        r##"<line x1="{:.2}" y1="{TOP}" x2="{:.2}" y2="{:.2}" stroke="#d62728" stroke-width="1.5"/>"##,
                        px(x),
                        px(x),
                        TOP + ph
                    );
                }
                Overlay::PopovLine { q, c } => {
                    let (ya, yb) = (y0, y1);
                    let _ = writeln!(
                        out,
                        r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#d62728" stroke-width="1.5"/>"##,
                        px(c + q * ya),
                        py(ya),
                        px(c + q * yb),
                        py(yb)
                    );
                }
            }
        }

        let mut path = String::new();
        for (i, (_, x, y)) in self.points.iter().enumerate() {
            let _ = write!(path, "{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, px(*x), py(*y));
        }
        let _ = writeln!(out, r##"<path d="{path}" fill="none" stroke="#1f77b4" stroke-width="1.5"/>"##);
        if self.figure != Figure::Popov {
            let mirrored: String = self
                .points
                .iter()
                .enumerate()
                .map(|(i, (_, x, y))| format!("{}{:.2},{:.2}", if i == 0 { "M" } else { " L" }, px(*x), py(-*y)))
                .collect();
            let _ = writeln!(
                out,
                r##"<path d="{mirrored}" fill="none" stroke="#1f77b4" stroke-width="1" stroke-dasharray="4 3"/>"##
            );
        }
        for m in self.markers.iter().filter(|m| m.is_finite()) {
            let _ = writeln!(
                out,
                r##"<circle cx="{:.2}" cy="{:.2}" r="4" fill="#d62728"/><text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
                px(*m),
                py(0.0),
                px(*m),
                py(0.0) - 8.0,
                crate::report::format_sig(*m, 4)
            );
        }
        let _ = writeln!(out, "</g>");
        let _ =
            writeln!(out, r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#000000"/>"##);
        let y_label = if self.figure == Figure::Popov { "ω Im M(jω)" } else { "Im M(jω)" };
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">Re M(jω)</text>"#,
            LEFT + pw / 2.0,
            H - 15.0
        );
        let _ = writeln!(
            out,
            r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{y_label}</text>"#,
            TOP + ph / 2.0,
            TOP + ph / 2.0
        );
        out.push_str("</svg>\n");
        out
    }
}

/// Round-number ticks covering `[lo, hi]`, about six of them.
fn ticks(lo: f64, hi: f64) -> Vec<(f64, String)> {
    let raw = (hi - lo) / 6.0;
    if !(raw > 0.0 && raw.is_finite()) {
        return Vec::new();
    }
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].into_iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last)
        .map(|k| {
            let t = k as f64 * step;
            let label = format!("{:.*}", decimals, t);
            let label =
                if label.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') { "0".into() } else { label };
            (t, label)
        })
        .collect()
}
