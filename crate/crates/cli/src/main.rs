//! `eroi`: run, sweep and analyze EROI-optimal energy systems from a dataset bundle.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use eroi_core::gsa::{self, Study, UncertainParameter};
use eroi_core::io::{self as bundle, write_atomic, Dataset, RunReport};
use eroi_core::lp::write_lp;
use eroi_core::scenario::{self, ScenarioResult};
use eroi_core::{assemble, ObjectiveSpec, SolveStatus};

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_ERROR: u8 = 1;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "eroi", version, about = "EROI-optimal energy system planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct ModelArgs {
    /// Dataset bundle directory.
    #[arg(long)]
    dataset: PathBuf,
    /// Emissions cap in MtCO2-eq/y.
    #[arg(long)]
    gwp_limit: Option<f64>,
    /// `energy`, or `custom:FILE` with a JSON map of variable name to coefficient.
    #[arg(long, default_value = "energy")]
    objective: String,
}

#[derive(Clone, Copy, ValueEnum)]
enum Stage {
    /// First-order screening only.
    Screen,
    /// Screening, then a second-order fit on the shortlist.
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and write its report as JSON.
    Run {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Reference run plus emissions-cap steps; writes the frontier CSV.
    Sweep {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value = "energy")]
        objective: String,
        /// Cap reduction per step, as a fraction of reference operating emissions.
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also write one JSON report per run into this directory.
        #[arg(long)]
        reports: Option<PathBuf>,
    },
    /// Polynomial-chaos sensitivity analysis of the system EROI.
    Gsa {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value = "full")]
        stage: Stage,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Samples per design; defaults to max(2 x basis size, 50).
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        /// Surrogate evaluations for the pdf.
        #[arg(long, default_value_t = 1_000_000)]
        pdf_samples: usize,
        #[arg(long, default_value_t = 100)]
        bins: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Plot-ready CSV tables from run reports.
    Report {
        /// Run report JSON files.
        #[arg(long, required = true, num_args = 1..)]
        input: Vec<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the assembled LP in text form.
    ExportLp {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

/// How a successful command ended.
enum Outcome {
    Done,
    Infeasible,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Infeasible) => ExitCode::from(EXIT_INFEASIBLE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

fn execute(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Run { model, out } => run(&model, &out),
        Command::Sweep {
            dataset,
            objective,
            step,
            out,
            reports,
        } => sweep(&dataset, &objective, step, &out, reports.as_deref()),
        Command::Gsa {
            model,
            stage,
            seed,
            samples,
            runs,
            pdf_samples,
            bins,
            out,
        } => gsa_cmd(&model, stage, seed, samples, runs, pdf_samples, bins, &out),
        Command::Report { input, out } => report(&input, &out),
        Command::ExportLp { model, out } => export_lp(&model, &out),
    }
}

fn load(dir: &Path) -> Result<Dataset> {
    bundle::load(dir).with_context(|| format!("loading dataset {}", dir.display()))
}

fn objective(arg: &str) -> Result<ObjectiveSpec> {
    if arg == "energy" {
        return Ok(ObjectiveSpec::EnergyInvested);
    }
    let Some(file) = arg.strip_prefix("custom:") else {
        bail!("unknown objective `{arg}`; expected `energy` or `custom:FILE`");
    };
    let text = fs::read_to_string(file).with_context(|| format!("reading objective file {file}"))?;
    let map: BTreeMap<String, f64> =
        serde_json::from_str(&text).with_context(|| format!("parsing objective file {file}"))?;
    Ok(ObjectiveSpec::CustomLinear(map))
}

fn tonnes(limit_mt: Option<f64>) -> Option<f64> {
    limit_mt.map(|mt| mt * 1e6)
}

fn label(ds: &Dataset, dir: &Path) -> String {
    if ds.meta.name.is_empty() {
        dir.display().to_string()
    } else {
        ds.meta.name.clone()
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_atomic(path, |w| writeln!(w, "{text}")).with_context(|| format!("writing {}", path.display()))
}

fn write_csv<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> csv::Result<()>,
{
    write_atomic(path, |w| fill(w).map_err(std::io::Error::other))
        .with_context(|| format!("writing {}", path.display()))
}

fn status_outcome(status: SolveStatus) -> Result<Outcome> {
    match status {
        SolveStatus::Optimal => Ok(Outcome::Done),
        SolveStatus::Infeasible => {
            eprintln!("scenario is infeasible");
            Ok(Outcome::Infeasible)
        }
        SolveStatus::Unbounded => bail!("scenario is unbounded"),
    }
}

fn run(args: &ModelArgs, out: &Path) -> Result<Outcome> {
    let ds = load(&args.dataset)?;
    let spec = objective(&args.objective)?;
    let result = scenario::run_scenario(&ds.model, &spec, tonnes(args.gwp_limit))?;
    write_json(out, &RunReport::new(&label(&ds, &args.dataset), &result))?;
    if let Some(e) = result.eroi() {
        println!("EROI {e:.4}  E_in,tot {:.1} GWh/y", result.objective);
    }
    status_outcome(result.status)
}

fn sweep(dataset: &Path, objective_arg: &str, step: f64, out: &Path, reports: Option<&Path>) -> Result<Outcome> {
    let ds = load(dataset)?;
    let spec = objective(objective_arg)?;
    let sweep = scenario::run_sweep(&ds.model, &spec, step)?;
    let rows = sweep.frontier();
    write_csv(out, |w| scenario::write_frontier_csv(&rows, w))?;
    if let Some(dir) = reports {
        fs::create_dir_all(dir)?;
        let name = label(&ds, dataset);
        let all: Vec<&ScenarioResult> = std::iter::once(&sweep.reference).chain(&sweep.runs).collect();
        for (k, r) in all.into_iter().enumerate() {
            write_json(&dir.join(format!("run_{k:02}.json")), &RunReport::new(&name, r))?;
        }
    }
    for r in &rows {
        let eroi = r.eroi.map_or("-".to_string(), |e| format!("{e:.4}"));
        let cap = r.gwp_limit_mt.map_or("ref".to_string(), |g| format!("{g:.3}"));
        println!("{cap:>10} Mt  {:<10} EROI {eroi}", r.status.to_string());
    }
    Ok(Outcome::Done)
}

#[allow(clippy::too_many_arguments)]
fn gsa_cmd(
    args: &ModelArgs,
    stage: Stage,
    seed: u64,
    samples: Option<usize>,
    runs: usize,
    pdf_samples: usize,
    bins: usize,
    out: &Path,
) -> Result<Outcome> {
    let ds = load(&args.dataset)?;
    if ds.uncertain.is_empty() {
        bail!("dataset has no uncertain.csv parameters");
    }
    let spec = objective(&args.objective)?;
    fs::create_dir_all(out)?;
    let study = Study {
        model: &ds.model,
        params: &ds.uncertain,
        spec: &spec,
        gwp_limit: tonnes(args.gwp_limit),
    };
    let screen = gsa::screen_first_order(&study, runs, seed, samples)?;
    write_json(&out.join("screening.json"), &screen)?;
    println!(
        "screening kept {} of {} parameters (threshold {:.4})",
        screen.shortlist.len(),
        screen.parameters.len(),
        screen.threshold
    );
    if matches!(stage, Stage::Screen) {
        return Ok(Outcome::Done);
    }
    if screen.shortlist.is_empty() {
        bail!("screening kept no parameters; nothing to analyze");
    }
    let critical: Vec<UncertainParameter> = screen.shortlist.iter().map(|&i| ds.uncertain[i].clone()).collect();
    let study = Study {
        params: &critical,
        ..study
    };
    let (sobol, surrogate) = gsa::analyze_second_order(&study, seed, samples, 2)?;
    write_json(&out.join("sobol.json"), &sobol)?;
    write_csv(&out.join("indices.csv"), |w| bundle::write_indices_csv(&sobol, w))?;
    let pdf = gsa::pdf_estimate(&surrogate, pdf_samples, bins, seed);
    write_csv(&out.join("pdf.csv"), |w| bundle::write_pdf_csv(&pdf, w))?;
    println!(
        "EROI mean {:.4}  std {:.4}  CoV {:.1}%  LOO {:.2e}",
        sobol.mean,
        sobol.std,
        100.0 * sobol.cov,
        sobol.loo_error
    );
    Ok(Outcome::Done)
}

fn report(inputs: &[PathBuf], out: &Path) -> Result<Outcome> {
    let mut reports = Vec::new();
    for p in inputs {
        let r = bundle::read_run_report(p).with_context(|| format!("reading {}", p.display()))?;
        let name = p
            .file_stem()
            .map_or_else(|| p.display().to_string(), |s| s.to_string_lossy().into_owned());
        reports.push((name, r));
    }
    fs::create_dir_all(out)?;
    write_csv(&out.join("summary.csv"), |w| bundle::write_summary_csv(&reports, w))?;
    write_csv(&out.join("mix.csv"), |w| bundle::write_mix_csv(&reports, w))?;
    Ok(Outcome::Done)
}

fn export_lp(args: &ModelArgs, out: &Path) -> Result<Outcome> {
    let ds = load(&args.dataset)?;
    let spec = objective(&args.objective)?;
    let lp = assemble(&ds.model, &spec, tonnes(args.gwp_limit))?;
    write_atomic(out, |w| write_lp(&lp, w)).with_context(|| format!("writing {}", out.display()))?;
    Ok(Outcome::Done)
}
