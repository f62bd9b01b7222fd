use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qosc_core::output::{emit_csv, emit_plot, write_report};
use qosc_core::runner::{run_scenario, ComparisonReport, RunResult};
use qosc_core::scenario::{parse_schemes, ScenarioConfig};
use qosc_core::{Error, HamiltonianKind, Result};
use rayon::prelude::*;

const BUNDLED: &[(&str, &str)] = &[
    ("fig1_v02", include_str!("../../../scenarios/fig1_v02.cfg")),
    ("fig1_v04", include_str!("../../../scenarios/fig1_v04.cfg")),
    ("fig1_v06", include_str!("../../../scenarios/fig1_v06.cfg")),
    ("fig1_v10", include_str!("../../../scenarios/fig1_v10.cfg")),
    ("lz_arctan_v02", include_str!("../../../scenarios/lz_arctan_v02.cfg")),
    ("lz_arctan_v04", include_str!("../../../scenarios/lz_arctan_v04.cfg")),
    ("lz_sweep", include_str!("../../../scenarios/lz_sweep.cfg")),
    ("fig2", include_str!("../../../scenarios/fig2.cfg")),
    ("fig3", include_str!("../../../scenarios/fig3.cfg")),
    ("cnot", include_str!("../../../scenarios/cnot.cfg")),
    ("sqisw", include_str!("../../../scenarios/sqisw.cfg")),
    ("swap", include_str!("../../../scenarios/swap.cfg")),
];

/// Classical oscillator simulation of few-level quantum dynamics.
#[derive(Parser, Debug)]
#[command(name = "qosc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Landau-Zener sweeps (default scenario: fig1_v02)
    Lz(RunArgs),
    /// Damped two-level system (default scenario: fig2)
    Dissipative(RunArgs),
    /// Driven damped two-level system (default scenario: fig3)
    Driven(RunArgs),
    /// Gate circuits on coupled oscillators (default scenario: cnot)
    Gate(RunArgs),
    /// Run any scenario and print the comparison report
    Compare(RunArgs),
    /// Expand the [sweep] grid of a scenario and run the points concurrently
    Sweep(RunArgs),
    /// List bundled scenarios
    List,
}

#[derive(Args, Debug, Clone)]
struct RunArgs {
    /// Scenario file
    #[arg(long, conflicts_with = "scenario")]
    config: Option<PathBuf>,
    /// Bundled scenario name (see `qosc list`)
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Skip the SVG plot
    #[arg(long)]
    no_plot: bool,
    /// Comma-separated subset of quantum, exact, rca, doubled, gate
    #[arg(long)]
    schemes: Option<String>,
}

#[derive(Clone, Copy, PartialEq)]
enum Family {
    Lz,
    Dissipative,
    Driven,
    Gate,
    Any,
}

impl Family {
    fn default_scenario(self) -> Option<&'static str> {
        match self {
            Family::Lz => Some("fig1_v02"),
            Family::Dissipative => Some("fig2"),
            Family::Driven => Some("fig3"),
            Family::Gate => Some("cnot"),
            Family::Any => None,
        }
    }

    fn accepts(self, cfg: &ScenarioConfig) -> bool {
        let kind = cfg.hamiltonian.as_ref().map(|h| h.kind);
        match self {
            Family::Lz => matches!(
                kind,
                Some(HamiltonianKind::LzLinear | HamiltonianKind::LzArctan | HamiltonianKind::TwoLevel)
            ),
            Family::Dissipative => matches!(
                kind,
                Some(HamiltonianKind::DissipativeTwoLevel | HamiltonianKind::GeneralComplexStatic)
            ),
            Family::Driven => kind == Some(HamiltonianKind::DrivenDissipative),
            Family::Gate => cfg.is_gate_scenario(),
            Family::Any => true,
        }
    }
}

fn bundled(name: &str) -> Result<&'static str> {
    BUNDLED
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::Validation(format!("no bundled scenario named {name:?}")))
}

fn load(args: &RunArgs, family: Family) -> Result<ScenarioConfig> {
    let mut cfg = match (&args.config, &args.scenario) {
        (Some(path), _) => ScenarioConfig::from_file(path).map_err(|e| match e {
            Error::Io(io) => Error::Validation(format!("{}: {io}", path.display())),
            other => other,
        })?,
        (None, Some(name)) => ScenarioConfig::parse(bundled(name)?)?,
        (None, None) => match family.default_scenario() {
            Some(name) => ScenarioConfig::parse(bundled(name)?)?,
            None => return Err(Error::Validation("--config or --scenario is required".into())),
        },
    };
    if !family.accepts(&cfg) {
        let what = cfg
            .hamiltonian
            .as_ref()
            .map(|h| h.kind.to_string())
            .unwrap_or_else(|| "circuit".into());
        return Err(Error::Validation(format!(
            "scenario {} ({what}) does not belong to this subcommand",
            cfg.name
        )));
    }
    if let Some(r) = args.rtol {
        cfg.integrator.rtol = r;
    }
    if let Some(a) = args.atol {
        cfg.integrator.atol = a;
    }
    if let Some(n) = args.samples {
        cfg.integrator.sample_count = n;
    }
    if let Some(s) = &args.schemes {
        cfg.schemes = parse_schemes(s)?;
    }
    if args.no_plot {
        cfg.output.svg = None;
    }
    Ok(cfg)
}

fn write_outputs(cfg: &ScenarioConfig, run: &RunResult, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    if let Some(f) = &cfg.output.csv {
        emit_csv(&run.trajectories, dir.join(f))?;
    }
    if let Some(f) = &cfg.output.svg {
        emit_plot(&run.trajectories, &run.report, dir.join(f))?;
    }
    if let Some(f) = &cfg.output.report {
        write_report(&run.report, dir.join(f))?;
    }
    Ok(())
}

fn summary(report: &ComparisonReport) -> String {
    let mut out = format!("{} [{}]\n", report.scenario, report.kind);
    for p in &report.pairs {
        out.push_str(&format!(
            "  {:>8} vs {:<8} max |dP| = {:.3e} at t = {:.4}\n",
            p.a.name(),
            p.b.name(),
            p.max_diff,
            p.time_of_max
        ));
    }
    if let Some(z) = &report.zener {
        out.push_str(&format!("  zener: predicted {:.4}", z.predicted));
        for (scheme, p) in &z.final_initial_level {
            out.push_str(&format!(", {scheme} {p:.4}"));
        }
        out.push('\n');
    }
    if let Some(g) = &report.gate {
        if let Some(d) = g.distance_up_to_phase {
            out.push_str(&format!("  gate: distance up to phase {d:.3e}\n"));
        }
    }
    out
}

fn run_one(cfg: &ScenarioConfig, dir: &Path) -> Result<ComparisonReport> {
    let run = run_scenario(cfg)?;
    write_outputs(cfg, &run, dir)?;
    Ok(run.report)
}

fn execute(cli: Cli) -> Result<()> {
    let (args, family) = match cli.command {
        Command::List => {
            for (name, text) in BUNDLED {
                let title = text.lines().next().and_then(|l| l.strip_prefix("# ")).unwrap_or("");
                println!("{name:<14} {title}");
            }
            return Ok(());
        }
        Command::Lz(a) => (a, Family::Lz),
        Command::Dissipative(a) => (a, Family::Dissipative),
        Command::Driven(a) => (a, Family::Driven),
        Command::Gate(a) => (a, Family::Gate),
        Command::Compare(a) => (a, Family::Any),
        Command::Sweep(a) => {
            let cfg = load(&a, Family::Any)?;
            let points = cfg.sweep_points()?;
            let reports: Vec<Result<ComparisonReport>> = points.par_iter().map(|p| run_one(p, &a.out_dir)).collect();
            for r in reports {
                print!("{}", summary(&r?));
            }
            return Ok(());
        }
    };
    let cfg = load(&args, family)?;
    if !cfg.sweep.is_empty() {
        return Err(Error::Validation(format!(
            "scenario {} has a [sweep] section; use `qosc sweep`",
            cfg.name
        )));
    }
    print!("{}", summary(&run_one(&cfg, &args.out_dir)?));
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 2 } else { 1 })
        }
    }
}
