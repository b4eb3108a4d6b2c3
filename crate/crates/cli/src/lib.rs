//! `robstab` subcommands: `model`, `analyze`, `plot`, `verify`.
//!
//! Every command returns an exit code: 0 on success, 1 when a soundness
//! check fails. Errors (bad input, unstable nominal loop) surface as `Err`
//! and exit with 2 from `main`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;

use robstab_core::analysis::{run_analysis, Analysis, AnalysisSettings, LoopModel};
use robstab_core::criteria::{verify_interval, CircleCenter, Criterion, LocusOptions, StabilityInterval};
use robstab_core::model_file::ModelFile;
use robstab_core::plot::{plot_data, Figure, PlotData};
use robstab_core::report::{format_bound, ReportTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNSOUND: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "robstab", version, about = "Robust stability bounds for a scalar real parametric uncertainty")]
pub struct Cli {
    /// Log progress (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the state-space matrices, the rank-1 factorization and the pitch transfer function.
    Model(CommonArgs),
    /// Compute the stability intervals and write report.txt / report.csv.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
        /// Δ samples per interval for the soundness audit.
        #[arg(long, default_value_t = 50)]
        samples: usize,
    },
    /// Write locus CSV and SVG files for the criterion figures.
    Plot {
        #[command(flatten)]
        common: CommonArgs,
        /// Figures to produce (default: all four).
        #[arg(long = "figure", value_name = "NAME")]
        figures: Vec<String>,
        /// Re-render an SVG from a previously written locus CSV instead of analysing.
        #[arg(long, value_name = "CSV")]
        from_csv: Option<PathBuf>,
    },
    /// Audit each interval by sampling Δ and checking the closed-loop eigenvalues.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Δ samples per interval.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Check the bounds in this report.csv instead of recomputing them.
        #[arg(long, value_name = "CSV")]
        results: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Svg,
    Both,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Model file (TOML); the bundled example aircraft if omitted.
    #[arg(long, value_name = "PATH")]
    pub model: Option<PathBuf>,
    /// Comma-separated subset of exact, smallgain, circle, posreal, popov.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    pub criteria: Vec<String>,
    #[arg(long)]
    pub wmin: Option<f64>,
    #[arg(long)]
    pub wmax: Option<f64>,
    #[arg(long)]
    pub npoints: Option<usize>,
    /// Pitch-rate feedback gain (overrides the model file).
    #[arg(long, allow_hyphen_values = true)]
    pub kq: Option<f64>,
    /// Angle-of-attack feedback gain (overrides the model file).
    #[arg(long, allow_hyphen_values = true)]
    pub kalpha: Option<f64>,
    #[arg(long, default_value = "robstab-out", value_name = "DIR")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    /// Count as stable only eigenvalues with real part below -x.
    #[arg(long, default_value_t = 0.0, value_name = "X")]
    pub stability_margin: f64,
    /// Choose the circle centre by optimization instead of the midpoint of the real-part range.
    #[arg(long)]
    pub optimize_center: bool,
}

impl CommonArgs {
    pub fn settings(&self) -> Result<AnalysisSettings> {
        let mut model = match &self.model {
            Some(p) => ModelFile::load(p)?,
            None => ModelFile::bundled(),
        };
        if let Some(k) = self.kq {
            model.inner_loop.kq = k;
        }
        if let Some(k) = self.kalpha {
            model.inner_loop.kalpha = k;
        }
        let mut s = AnalysisSettings::new(model);
        let d = LocusOptions::default();
        s.locus = LocusOptions {
            wmin: self.wmin.unwrap_or(d.wmin),
            wmax: self.wmax.unwrap_or(d.wmax),
            n: self.npoints.unwrap_or(d.n),
            refine_tol: d.refine_tol,
        };
        if !self.criteria.is_empty() {
            s.criteria = self.criteria.iter().map(|c| c.parse::<Criterion>()).collect::<Result<_, _>>()?;
        }
        s.stability_margin = self.stability_margin;
        if self.optimize_center {
            s.circle_center = CircleCenter::Optimize;
        }
        s.validate()?;
        Ok(s)
    }

    fn out_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out).with_context(|| format!("cannot create {}", self.out.display()))?;
        Ok(&self.out)
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Model(common) => cmd_model(&common),
        Command::Analyze { common, samples } => cmd_analyze(&common, samples),
        Command::Plot { common, figures, from_csv } => cmd_plot(&common, &figures, from_csv.as_deref()),
        Command::Verify { common, samples, results } => cmd_verify(&common, samples, results.as_deref()),
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn analyze(common: &CommonArgs) -> Result<Analysis> {
    let settings = common.settings()?;
    run_analysis(&settings).context("analysis aborted")
}

pub fn cmd_model(common: &CommonArgs) -> Result<i32> {
    let settings = common.settings()?;
    let lm = LoopModel::build(&settings.model, settings.stability_margin).context("cannot build the feedback loop")?;
    print!("{}", describe_model(&lm));
    write(&common.out_dir()?.join("model_dump.toml"), &lm.dump_toml(&settings.model))?;
    Ok(EXIT_OK)
}

fn describe_model(lm: &LoopModel) -> String {
    let ol = &lm.open_loop.nominal;
    let f = &lm.mdelta.factor;
    let mut out = String::new();
    for (name, m) in [
        ("A (open loop)", ol.a()),
        ("B", ol.b()),
        ("C (theta, q, alpha)", ol.c()),
        ("D", ol.d()),
        ("Q_A", &lm.open_loop.q_a),
        ("Q_B", &lm.open_loop.q_b),
        ("A (inner loop closed)", lm.augmented.nominal.a()),
        ("Q_A (inner loop closed)", &lm.augmented.q_a),
        ("H", &lm.mdelta.h),
        ("Q", &lm.mdelta.qcal),
    ] {
        out.push_str(&format_matrix(name, m));
    }
    let _ = writeln!(out, "sigma = {:.6e}", f.sigma);
    out.push_str(&format_matrix("v", &DMatrix::from_row_slice(1, f.v.len(), f.v.as_slice())));
    out.push_str(&format_matrix("w", &DMatrix::from_row_slice(1, f.w.len(), f.w.as_slice())));
    let _ = writeln!(out, "theta/eta_cmd = {}", lm.pitch_tf);
    let _ = writeln!(out, "K(s) = {}", lm.controller_tf);
    out
}

fn format_matrix(name: &str, m: &DMatrix<f64>) -> String {
    let mut out = format!("{name} =\n");
    for row in m.row_iter() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:>13.6e}")).collect();
        let _ = writeln!(out, "  [{} ]", cells.join(" "));
    }
    out
}

/// Verification outcome for one interval, and whether it passed.
fn audit(analysis: &Analysis, interval: &StabilityInterval, samples: usize) -> (String, bool) {
    let model = &analysis.loop_model.mdelta;
    match verify_interval(model, interval, samples, analysis.settings.stability_margin) {
        Ok(r) if r.passed() => {
            let note = if r.vacuous { " (vacuous)" } else { "" };
            (format!("PASS  {} samples{note}", r.samples), true)
        }
        Ok(r) => {
            let stable: Vec<String> = r.outside_checks.iter().filter(|c| !c.1).map(|c| format_bound(c.0)).collect();
            (format!("FAIL  still stable outside the bound at delta = {}", stable.join(", ")), false)
        }
        Err(robstab_core::Error::Unsound { delta, .. }) => {
            (format!("FAIL  unstable at delta = {}", format_bound(delta)), false)
        }
        Err(e) => (format!("FAIL  {e}"), false),
    }
}

pub fn cmd_analyze(common: &CommonArgs, samples: usize) -> Result<i32> {
    let analysis = analyze(common)?;
    let table = ReportTable::from_intervals(&analysis.intervals);
    let text = table.render_text();
    print!("{text}");
    let dir = common.out_dir()?;
    write(&dir.join("report.txt"), &text)?;
    write(&dir.join("report.csv"), &table.to_csv())?;
    let mut ok = true;
    for i in &analysis.intervals {
        let (line, passed) = audit(&analysis, i, samples);
        if !passed {
            eprintln!("soundness check failed: {}: {line}", i.criterion.label());
        }
        ok &= passed;
    }
    Ok(if ok { EXIT_OK } else { EXIT_UNSOUND })
}

pub fn cmd_plot(common: &CommonArgs, figures: &[String], from_csv: Option<&Path>) -> Result<i32> {
    let dir = common.out_dir()?;
    if let Some(csv) = from_csv {
        let text = fs::read_to_string(csv).with_context(|| format!("cannot read {}", csv.display()))?;
        let data = PlotData::parse_csv(&text)?;
        write(&dir.join(format!("fig_{}.svg", data.figure)), &data.to_svg())?;
        return Ok(EXIT_OK);
    }
    let figures: Vec<Figure> = if figures.is_empty() {
        Figure::ALL.to_vec()
    } else {
        figures.iter().map(|f| f.parse::<Figure>()).collect::<Result<_, _>>()?
    };
    let analysis = analyze(common)?;
    for f in figures {
        let data = plot_data(&analysis, f)?;
        if common.format != Format::Svg {
            write(&dir.join(format!("locus_{f}.csv")), &data.to_csv())?;
        }
        if common.format != Format::Csv {
            write(&dir.join(format!("fig_{f}.svg")), &data.to_svg())?;
        }
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(common: &CommonArgs, samples: usize, results: Option<&Path>) -> Result<i32> {
    let analysis = analyze(common)?;
    let intervals: Vec<StabilityInterval> = match results {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
            let table = ReportTable::parse_csv(&text)?;
            if table.rows.is_empty() {
                bail!("{} contains no intervals", path.display());
            }
            table.rows.iter().map(|r| r.to_interval()).collect::<Result<_, _>>()?
        }
        None => analysis.intervals.clone(),
    };
    if samples == 0 {
        log::warn!("--samples 0: interior checks are vacuous");
    }
    let mut ok = true;
    println!("{:<14} {:>12} {:>12}  result", "Method", "Lower", "Upper");
    for i in &intervals {
        let (line, passed) = audit(&analysis, i, samples);
        println!("{:<14} {:>12} {:>12}  {}", i.criterion.label(), format_bound(i.lower), format_bound(i.upper), line);
        ok &= passed;
    }
    Ok(if ok { EXIT_OK } else { EXIT_UNSOUND })
}
