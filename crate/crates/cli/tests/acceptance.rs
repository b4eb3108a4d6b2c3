//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.
//!
//! Published reference values are the targets; every check compares against
//! them at the stated tolerance and reports the measured value either way.

use std::fmt::Write as _;
use std::fs;
use std::process::Command;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use robstab_core::analysis::{run_analysis, Analysis, AnalysisSettings};
use robstab_core::criteria::{
    circle_bounds, exact_bounds, exact_bounds_by_scan, popov_bounds, positive_real_bounds, sample_locus,
    small_gain_bounds, verify_interval, CircleCenter, Criterion, LocusOptions, ScanOptions, SlopeSearch,
    StabilityInterval, Witness,
};
use robstab_core::lti::{eigenvalues, spectral_abscissa};
use robstab_core::mdelta::{rank_one_factor, MDeltaModel};
use robstab_core::report::ReportTable;

/// Reference bounds per row of the comparison table, with relative tolerance.
const TABLE: [(Criterion, f64, f64, f64); 5] = [
    (Criterion::Exact, -16.3548, 0.512838, 5e-3),
    (Criterion::SmallGain, -0.5092, 0.5092, 1e-2),
    (Criterion::Circle, -2.0845, 0.4792, 1e-2),
    (Criterion::PositiveReal, -5.4866, 0.5112, 1e-2),
    (Criterion::Popov, -11.3692, 0.5123, 1e-2),
];

type Outcome = Result<String, String>;
type Named = (&'static str, fn() -> Outcome);

struct Check {
    notes: Vec<String>,
    failed: bool,
}

impl Check {
    fn new() -> Self {
        Self { notes: Vec::new(), failed: false }
    }

    fn near(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let r = ((got - want) / want).abs();
        let ok = r <= tol;
        self.failed |= !ok;
        self.notes.push(format!("{what} {got:.6} vs {want} ({:.2}%{})", 100.0 * r, if ok { "" } else { " !" }));
    }

    fn that(&mut self, what: &str, ok: bool) {
        self.failed |= !ok;
        self.notes.push(format!("{what}{}", if ok { "" } else { " !" }));
    }

    fn finish(self) -> Outcome {
        let text = self.notes.join("; ");
        if self.failed {
            Err(text)
        } else {
            Ok(text)
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn bundled() -> &'static Analysis {
    static CELL: std::sync::OnceLock<Analysis> = std::sync::OnceLock::new();
    CELL.get_or_init(|| run_analysis(&AnalysisSettings::default()).expect("bundled model analyses"))
}

fn model_regression() -> Outcome {
    let a = bundled();
    let g = &a.loop_model.pitch_tf;
    let mut c = Check::new();
    c.near("gain", g.gain(), 2.64, 0.02);
    let quad = |b: f64, k: f64| {
        let im = (k - b * b / 4.0).sqrt();
        [Complex64::new(-b / 2.0, im), Complex64::new(-b / 2.0, -im)]
    };
    let zeros = [Complex64::new(-0.0164, 0.0), Complex64::new(-0.635, 0.0)];
    let mut poles = vec![Complex64::new(-4.31, 0.0), Complex64::new(-0.68, 0.0)];
    poles.extend(quad(0.0136, 0.000327));
    for (name, want, got) in [("zero", &zeros[..], g.zeros()), ("pole", &poles[..], g.poles())] {
        c.that(&format!("{} {name}s", got.len()), got.len() == want.len());
        for w in want {
            let best = got.iter().map(|z| (z - w).norm() / w.norm()).fold(f64::INFINITY, f64::min);
            c.that(&format!("{name} {w:.4} within {:.2}%", 100.0 * best), best <= 0.02);
        }
    }
    let rhp = eigenvalues(a.loop_model.open_loop.nominal.a()).unwrap().iter().filter(|l| l.re > 0.0).count();
    c.that(&format!("{rhp} open-loop RHP eigenvalues"), rhp == 3);
    c.finish()
}

fn exact_interval() -> Outcome {
    let a = bundled();
    let cross = a.interval(Criterion::Exact).unwrap();
    let (lo, hi) = exact_bounds_by_scan(&a.loop_model.mdelta, &ScanOptions::default(), 0.0).unwrap();
    let mut c = Check::new();
    c.near("crossing lower", cross.lower, -16.3548, 5e-3);
    c.near("crossing upper", cross.upper, 0.512838, 5e-3);
    c.near("bisection lower", lo, -16.3548, 5e-3);
    c.near("bisection upper", hi, 0.512838, 5e-3);
    let gap = (lo - cross.lower).abs().max((hi - cross.upper).abs());
    c.that(&format!("routes differ by {gap:.1e}"), gap <= 1e-4);
    c.finish()
}

fn small_gain() -> Outcome {
    let iv = bundled().interval(Criterion::SmallGain).unwrap();
    let Witness::SmallGain { r_sg, .. } = iv.witness else { unreachable!() };
    let mut c = Check::new();
    c.near("r_sg", r_sg, 1.9639, 1e-2);
    c.near("lower", iv.lower, -0.5092, 1e-2);
    c.near("upper", iv.upper, 0.5092, 1e-2);
    c.finish()
}

fn circle() -> Outcome {
    let iv = bundled().interval(Criterion::Circle).unwrap();
    let Witness::Circle { x_c, r_c } = iv.witness else { unreachable!() };
    let mut c = Check::new();
    c.near("x_c", x_c, -0.8036, 1e-2);
    c.near("r_c", r_c, 1.2834, 1e-2);
    c.near("lower", iv.lower, -2.0845, 1e-2);
    c.near("upper", iv.upper, 0.4792, 1e-2);
    c.finish()
}

fn positive_real() -> Outcome {
    let iv = bundled().interval(Criterion::PositiveReal).unwrap();
    let mut c = Check::new();
    c.near("lower", iv.lower, -5.4866, 1e-2);
    c.near("upper", iv.upper, 0.5112, 1e-2);
    c.finish()
}

fn popov() -> Outcome {
    let a = bundled();
    let iv = a.interval(Criterion::Popov).unwrap();
    let mut c = Check::new();
    c.near("lower", iv.lower, -11.3692, 1e-2);
    c.near("upper", iv.upper, 0.5123, 1e-2);
    let v = popov_bounds(&a.summary, SlopeSearch::Vertical).unwrap();
    let pr = a.interval(Criterion::PositiveReal).unwrap();
    let d = rel(v.lower, pr.lower).max(rel(v.upper, pr.upper));
    c.that(&format!("vertical lines vs positive real {d:.1e}"), d <= 1e-6);
    c.finish()
}

fn table_regression() -> Outcome {
    let out = std::env::temp_dir().join(format!("robstab-acceptance-{}", std::process::id()));
    let o = Command::new(env!("CARGO_BIN_EXE_robstab")).arg("analyze").arg("--out").arg(&out).output().unwrap();
    let mut c = Check::new();
    c.that(&format!("exit {:?}", o.status.code()), o.status.code() == Some(0));
    let text = String::from_utf8_lossy(&o.stdout);
    let labels: Vec<&str> = text.lines().skip(2).map(|l| l.split("  ").next().unwrap_or("")).collect();
    c.that(&format!("rows {labels:?}"), labels == ["Exact", "Small gain", "Circle", "Positive real", "Popov"]);
    let table = fs::read_to_string(out.join("report.csv")).map_err(|e| e.to_string())?;
    let _ = fs::remove_dir_all(&out);
    let table = ReportTable::parse_csv(&table).map_err(|e| e.to_string())?;
    for (crit, lo, hi, tol) in TABLE {
        let Some(row) = table.row(crit) else {
            c.that(&format!("{} row missing", crit.key()), false);
            continue;
        };
        c.near(&format!("{} lower", crit.key()), row.lower, lo, tol);
        c.near(&format!("{} upper", crit.key()), row.upper, hi, tol);
    }
    c.finish()
}

/// Random Hurwitz `H` with a random rank-1 `𝒬`.
fn random_model(seed: u64) -> MDeltaModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(3..=6);
    let r = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let shift = spectral_abscissa(&r).unwrap() + rng.gen_range(0.1..1.1);
    let h = r - DMatrix::identity(n, n) * shift;
    let v = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let w = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
    let sigma = rng.gen_range(0.5..3.0);
    let q = &v * w.transpose() * (sigma / (v.norm() * w.norm()));
    MDeltaModel::new(h, q, 0.0).unwrap()
}

fn spectrum_gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut eb = eigenvalues(b).unwrap();
    let mut worst: f64 = 0.0;
    for l in eigenvalues(a).unwrap() {
        let (k, d) = eb.iter().map(|m| (l - m).norm()).enumerate().min_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
        worst = worst.max(d / l.norm().max(1.0));
        eb.swap_remove(k);
    }
    worst
}

/// Properties (a) through (e) for one system; returns the failures.
fn properties(model: &MDeltaModel, intervals: &[StabilityInterval], rng: &mut ChaCha8Rng) -> Vec<String> {
    let mut fails = Vec::new();
    let exact = intervals.iter().find(|i| i.criterion == Criterion::Exact).unwrap();
    for _ in 0..25 {
        let d = rng.gen_range(-2.0 * exact.lower.abs().min(50.0)..2.0 * exact.upper.min(50.0));
        let gap = spectrum_gap(&model.perturbed(d), &model.loop_closure(d));
        if gap > 1e-9 {
            fails.push(format!("(a) delta {d}: {gap:.1e}"));
        }
    }
    let (lo, hi) = (exact.lower * 1.005, exact.upper * 1.005);
    for i in intervals {
        if i.lower < lo || i.upper > hi {
            fails.push(format!("(b) {} [{}, {}]", i.criterion.key(), i.lower, i.upper));
        }
        match verify_interval(model, i, 50, 0.0) {
            Ok(r) if r.passed() => {}
            other => fails.push(format!("(e) {}: {other:?}", i.criterion.key())),
        }
    }
    let find = |c| intervals.iter().find(|i| i.criterion == c).unwrap();
    let (pr, po) = (find(Criterion::PositiveReal), find(Criterion::Popov));
    if po.lower > pr.lower || po.upper < pr.upper {
        fails.push("(c) Popov does not contain positive real".into());
    }
    let f = rank_one_factor(&model.qcal).unwrap();
    let err = (f.reconstruct() - &model.qcal).amax();
    if err > 1e-10 * f.sigma {
        fails.push(format!("(d) reconstruction {err:.1e}"));
    }
    fails
}

fn property_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let a = bundled();
    let mut fails = properties(&a.loop_model.mdelta, &a.intervals, &mut rng);
    for seed in 0..10 {
        let m = random_model(seed);
        let s = sample_locus(&m.locus_system(), &LocusOptions::default()).unwrap();
        let intervals = vec![
            exact_bounds(&m, &s, 0.0).unwrap(),
            small_gain_bounds(&s),
            circle_bounds(&s, CircleCenter::Midpoint).unwrap(),
            positive_real_bounds(&s),
            popov_bounds(&s, SlopeSearch::default()).unwrap(),
        ];
        fails.extend(properties(&m, &intervals, &mut rng).into_iter().map(|f| format!("seed {seed} {f}")));
    }
    if fails.is_empty() {
        Ok("bundled model + 10 random systems, (a)-(e) hold".into())
    } else {
        Err(fails.join("; "))
    }
}

fn convergence() -> Outcome {
    let mut settings = AnalysisSettings::default();
    settings.locus.n *= 2;
    let fine = run_analysis(&settings).unwrap();
    let mut worst: (f64, &str) = (0.0, "");
    for (a, b) in bundled().intervals.iter().zip(&fine.intervals) {
        for (x, y) in [(a.lower, b.lower), (a.upper, b.upper)] {
            let d = if x == y { 0.0 } else { rel(y, x) };
            if d > worst.0 {
                worst = (d, a.criterion.key());
            }
        }
    }
    let note = format!("largest change {:.1e} ({})", worst.0, worst.1);
    if worst.0 < 1e-3 {
        Ok(note)
    } else {
        Err(note)
    }
}

fn main() {
    let start = Instant::now();
    let criteria: [Named; 9] = [
        ("model regression", model_regression),
        ("exact interval", exact_interval),
        ("small gain", small_gain),
        ("circle", circle),
        ("positive real", positive_real),
        ("Popov", popov),
        ("comparison table", table_regression),
        ("property suite", property_suite),
        ("grid convergence", convergence),
    ];
    let mut summary = String::new();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let (tag, note) = match f() {
            Ok(n) => ("PASS", n),
            Err(n) => {
                failed += 1;
                ("FAIL", n)
            }
        };
        let _ = writeln!(summary, "{tag} criterion {}: {name}: {note}", k + 1);
    }
    print!("{summary}");
    println!("acceptance: {} of 9 passed in {:.1}s", 9 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
