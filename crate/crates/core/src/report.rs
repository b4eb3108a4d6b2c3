//! Bound tables: aligned text for people, CSV for machines.
//!
//! CSV columns are `criterion,lower,upper,witnesses`, numbers at full
//! precision (`inf`/`-inf` for unbounded sides) and witnesses as
//! `name=value` pairs joined by `;`.

use std::fmt::Write as _;

use crate::criteria::{Criterion, StabilityInterval, Witness};
use crate::error::{Error, Result};
pub use crate::numfmt::format_sig;

pub const CSV_HEADER: &str = "criterion,lower,upper,witnesses";

/// Six significant figures, or `unbounded`.
pub fn format_bound(x: f64) -> String {
    if x.is_infinite() {
        return "unbounded".into();
    }
    format_sig(x, 6)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub criterion: Criterion,
    pub lower: f64,
    pub upper: f64,
    pub witnesses: Vec<(String, f64)>,
}

impl ReportRow {
    pub fn from_interval(i: &StabilityInterval) -> Self {
        Self {
            criterion: i.criterion,
            lower: i.lower,
            upper: i.upper,
            witnesses: i.witness.entries().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    fn witness(&self, key: &str) -> Result<f64> {
        self.witnesses
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Invalid(format!("{} row lacks witness '{key}'", self.criterion)))
    }

    /// Interval carrying this row's bounds, even if they were edited by hand.
    pub fn to_interval(&self) -> Result<StabilityInterval> {
        let opt = |v: f64| if v.is_nan() { None } else { Some(v) };
        let witness = match self.criterion {
            Criterion::Exact => Witness::Exact {
                crossing_lower: self.witness("crossing_lower")?,
                crossing_upper: self.witness("crossing_upper")?,
                omega_lower: opt(self.witness("omega_lower")?),
                omega_upper: opt(self.witness("omega_upper")?),
            },
            Criterion::SmallGain => Witness::SmallGain { r_sg: self.witness("r_sg")?, omega: self.witness("omega")? },
            Criterion::Circle => Witness::Circle { x_c: self.witness("x_c")?, r_c: self.witness("r_c")? },
            Criterion::PositiveReal => {
                Witness::PositiveReal { x_max: self.witness("x_max")?, x_min: self.witness("x_min")? }
            }
            Criterion::Popov => Witness::Popov {
                q_plus: self.witness("q_plus")?,
                c_plus: self.witness("c_plus")?,
                q_minus: self.witness("q_minus")?,
                c_minus: self.witness("c_minus")?,
            },
        };
        Ok(StabilityInterval { lower: self.lower, upper: self.upper, criterion: self.criterion, witness })
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportTable {
    pub rows: Vec<ReportRow>,
}

impl ReportTable {
    pub fn from_intervals(intervals: &[StabilityInterval]) -> Self {
        let mut rows: Vec<ReportRow> = intervals.iter().map(ReportRow::from_interval).collect();
        rows.sort_by_key(|r| r.criterion);
        Self { rows }
    }

    pub fn row(&self, criterion: Criterion) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.criterion == criterion)
    }

    pub fn render_text(&self) -> String {
        let header = ["Method", "Lower bound", "Upper bound", "Witnesses"];
        let cells: Vec<[String; 4]> = self
            .rows
            .iter()
            .map(|r| {
                let w: Vec<String> = r.witnesses.iter().map(|(k, v)| format!("{k}={}", format_sig(*v, 6))).collect();
                [r.criterion.label().to_string(), format_bound(r.lower), format_bound(r.upper), w.join(" ")]
            })
            .collect();
        let width = |c: usize| cells.iter().map(|r| r[c].chars().count()).chain([header[c].len()]).max().unwrap_or(0);
        let w = [width(0), width(1), width(2)];
        let mut out = String::new();
        let line = |out: &mut String, c: [&str; 4]| {
            let _ =
                writeln!(out, "{:<w0$}  {:>w1$}  {:>w2$}  {}", c[0], c[1], c[2], c[3], w0 = w[0], w1 = w[1], w2 = w[2]);
        };
        line(&mut out, header);
        let _ = writeln!(out, "{}", "-".repeat(w[0] + w[1] + w[2] + 6 + header[3].len()));
        for c in &cells {
            line(&mut out, [&c[0], &c[1], &c[2], &c[3]]);
        }
        out.lines().map(str::trim_end).collect::<Vec<_>>().join("\n") + "\n"
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        for r in &self.rows {
            let w: Vec<String> = r.witnesses.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let _ = writeln!(out, "{},{},{},{}", r.criterion.key(), r.lower, r.upper, w.join(";"));
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: String| Error::Invalid(format!("results line {line}: {msg}"));
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            _ => return Err(bad(1, format!("expected header '{CSV_HEADER}'"))),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let n = i + 1;
            let fields: Vec<&str> = line.splitn(4, ',').collect();
            if fields.len() != 4 {
                return Err(bad(n, "expected 4 comma-separated fields".into()));
            }
            let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(n, format!("'{s}' is not a number")));
            let criterion: Criterion = fields[0].parse().map_err(|e: Error| bad(n, e.to_string()))?;
            let mut witnesses = Vec::new();
            for pair in fields[3].split(';').filter(|p| !p.trim().is_empty()) {
                let (k, v) = pair.split_once('=').ok_or_else(|| bad(n, format!("witness '{pair}' lacks '='")))?;
                witnesses.push((k.trim().to_string(), num(v)?));
            }
            rows.push(ReportRow { criterion, lower: num(fields[1])?, upper: num(fields[2])?, witnesses });
        }
        Ok(Self { rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> ReportTable {
        ReportTable::from_intervals(&[
            StabilityInterval {
                lower: -1.0 / 0.181313,
                upper: f64::INFINITY,
                criterion: Criterion::PositiveReal,
                witness: Witness::PositiveReal { x_max: 0.181313, x_min: 0.5 },
            },
            StabilityInterval {
                lower: -16.394120943,
                upper: 0.5123026517,
                criterion: Criterion::Exact,
                witness: Witness::Exact {
                    crossing_lower: -16.39412095,
                    crossing_upper: 0.51230265,
                    omega_lower: Some(0.0209),
                    omega_upper: None,
                },
            },
        ])
    }

    #[test]
    fn significant_figures() {
        assert_eq!(format_sig(-16.394120943, 6), "-16.3941");
        assert_eq!(format_sig(0.5123026517, 6), "0.512303");
        assert_eq!(format_sig(9.9999996, 6), "10.0000");
        assert_eq!(format_sig(123456789.0, 6), "123456789");
        assert_eq!(format_bound(f64::NEG_INFINITY), "unbounded");
    }

    #[test]
    fn exact_row_first_and_unbounded_rendered() {
        let t = table();
        assert_eq!(t.rows[0].criterion, Criterion::Exact);
        let text = t.render_text();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[2].starts_with("Exact") && lines[2].contains("-16.3941") && lines[2].contains("0.512303"));
        assert!(lines[3].contains("unbounded") && !lines[3].contains("inf "));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let t = table();
        let back = ReportTable::parse_csv(&t.to_csv()).unwrap();
        assert_eq!(back.rows.len(), 2);
        for (a, b) in t.rows.iter().zip(&back.rows) {
            assert_eq!(a.criterion, b.criterion);
            assert_eq!(a.lower.to_bits(), b.lower.to_bits());
            assert_eq!(a.upper, b.upper);
            assert_eq!(a.witnesses.len(), b.witnesses.len());
        }
        let iv = back.rows[0].to_interval().unwrap();
        assert!(matches!(iv.witness, Witness::Exact { omega_upper: None, .. }));
    }

    #[test]
    fn malformed_csv_rejected() {
        assert!(ReportTable::parse_csv("a,b\n").is_err());
        let t = format!("{CSV_HEADER}\nexact,abc,1,\n");
        assert!(ReportTable::parse_csv(&t).unwrap_err().to_string().contains("line 2"));
    }
}
