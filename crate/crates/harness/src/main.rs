use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector2;
use serde::{Deserialize, Serialize};
use wgms_core::designer::{design, random_strength_peb, strength_peb, DesignContext};
use wgms_core::em::dump::{write_matrix_csv, write_vector_csv};
use wgms_harness::checks;
use wgms_harness::config::{Config, PlacementKind};
use wgms_harness::output::{summarize, svg_path, write_csv, write_svg};
use wgms_harness::placement::generate_placement;
use wgms_harness::seeds::{Purpose, TrialSeeds};
use wgms_harness::sweep::{cell_id, run_sweep_with_progress};
use wgms_harness::HarnessError;

#[derive(Parser)]
#[command(name = "wgms", version, about = "Waveguide-fed metasurface sensing: design and error-bound sweeps")]
struct Cli {
    /// JSON configuration; the built-in reference configuration when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a configuration key, e.g. `--set design.extraction=sample`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trials per sweep cell.
    #[arg(long, global = true)]
    trials: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suite.
    Validate {
        /// Element count of the design checks.
        #[arg(long, default_value_t = 64)]
        elements: usize,
    },
    /// Write the coupling matrix and the feed excitation of one layout.
    Greens {
        #[command(flatten)]
        layout: LayoutArgs,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Design one layout and report bound, achieved and baseline errors.
    Design {
        #[command(flatten)]
        layout: LayoutArgs,
        /// JSON report path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo sweep over placements, element counts and trials.
    Sweep {
        /// Row CSV; the summary and plot are written next to it.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Also write a PEB-vs-N plot.
        #[arg(long)]
        svg: bool,
        /// Report each finished trial on stderr.
        #[arg(long)]
        progress: bool,
    },
    /// Evaluate the strengths of a design report.
    Peb {
        /// Report written by `design --out`.
        #[arg(long)]
        design: PathBuf,
    },
}

#[derive(Args)]
struct LayoutArgs {
    /// `random`, `uniform-grid` or `gaussian-cluster:<variance m^2>`; the
    /// first configured placement by default.
    #[arg(long)]
    placement: Option<String>,
    /// Element count; the first configured count by default.
    #[arg(long)]
    elements: Option<usize>,
    #[arg(long, default_value_t = 0)]
    trial: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct DesignReport {
    placement: String,
    elements: usize,
    trial: usize,
    seed: u64,
    positions_m: Vec<[f64; 2]>,
    strengths: Vec<f64>,
    strength_limits: Vec<f64>,
    peb_bound_m: f64,
    peb_achieved_m: f64,
    peb_fully_digital_m: f64,
    peb_random_strength_m: Option<f64>,
    sdp_status: String,
    sdp_iterations: usize,
    retraction_model: String,
    contraction: f64,
    exact_residual: f64,
    passive: bool,
}

enum Failure {
    Config(String),
    Solver(String),
    Other(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Other(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Solver(m) | Failure::Other(m) => m,
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) | HarnessError::Placement(_) => Failure::Config(e.to_string()),
            HarnessError::Core(_) => Failure::Solver(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<wgms_core::Error> for Failure {
    fn from(e: wgms_core::Error) -> Self {
        Failure::Solver(e.to_string())
    }
}

fn load_config(cli: &Cli) -> Result<Config, Failure> {
    let mut overrides = cli.overrides.clone();
    if let Some(seed) = cli.seed {
        overrides.push(format!("seed={seed}"));
    }
    if let Some(trials) = cli.trials {
        overrides.push(format!("sweep.trials={trials}"));
    }
    Ok(match &cli.config {
        Some(path) => Config::load(path, &overrides)?,
        None => Config::from_json("{}", &overrides)?,
    })
}

/// Seeds match the sweep row of the same placement, N and trial.
fn trial_layout(
    config: &Config,
    args: &LayoutArgs,
) -> Result<(PlacementKind, usize, TrialSeeds, wgms_core::PanelGeometry), Failure> {
    let kind = match &args.placement {
        Some(label) => label.parse::<PlacementKind>()?,
        None => config.sweep.placements[0],
    };
    let n = args.elements.unwrap_or(config.sweep.elements[0]);
    let index = config.sweep.placements.iter().position(|p| *p == kind).unwrap_or(config.sweep.placements.len());
    let seeds = TrialSeeds::new(config.seed, cell_id(index, n), args.trial as u64);
    let panel = generate_placement(&config.placement_spec(kind, n, seeds.get(Purpose::Placement)))?;
    Ok((kind, n, seeds, panel))
}

fn write_json(value: &impl Serialize, out: Option<&Path>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::Other(e.to_string()))?;
    match out {
        Some(path) => std::fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e).into()),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let config = load_config(&cli)?;
    match cli.command {
        Command::Validate { elements } => {
            let results = checks::run_all(&config, elements);
            for c in &results {
                println!("{}", c.line());
            }
            let failed = results.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                return Err(Failure::Other(format!("{failed} of {} checks failed", results.len())));
            }
        }
        Command::Greens { layout, out } => {
            let (_, _, seeds, panel) = trial_layout(&config, &layout)?;
            let scenario = config.scenario(panel, &seeds)?;
            let ctx = DesignContext::new(&scenario)?;
            std::fs::create_dir_all(&out).map_err(|e| HarnessError::io(&out, e))?;
            let write = |name: &str, f: &dyn Fn(&mut std::io::BufWriter<std::fs::File>) -> std::io::Result<()>| {
                let path = out.join(name);
                let file = std::fs::File::create(&path).map_err(|e| HarnessError::io(&path, e))?;
                f(&mut std::io::BufWriter::new(file)).map_err(|e| HarnessError::io(&path, e))
            };
            write("coupling.csv", &|w| write_matrix_csv(w, &ctx.coupling))?;
            write("excitation.csv", &|w| write_vector_csv(w, &ctx.excitation))?;
            eprintln!("wrote {} and {}", out.join("coupling.csv").display(), out.join("excitation.csv").display());
        }
        Command::Design { layout, out } => {
            let (kind, n, seeds, panel) = trial_layout(&config, &layout)?;
            let scenario = config.scenario(panel, &seeds)?;
            let ctx = DesignContext::new(&scenario)?;
            let d = design(&scenario, &ctx, &config.design_options(seeds.get(Purpose::Extraction)))?;
            let random = if config.sweep.baselines.random_strength {
                Some(random_strength_peb(&scenario, &ctx, seeds.get(Purpose::RandomStrengths))?.peb)
            } else {
                None
            };
            let report = DesignReport {
                placement: kind.to_string(),
                elements: n,
                trial: layout.trial,
                seed: seeds.trial,
                positions_m: scenario.panel.elements.iter().map(|p| [p.x, p.y]).collect(),
                strengths: d.strengths.clone(),
                strength_limits: ctx.limits.clone(),
                peb_bound_m: d.bound,
                peb_achieved_m: d.achieved.peb,
                peb_fully_digital_m: d.fully_digital.peb,
                peb_random_strength_m: random,
                sdp_status: format!("{:?}", d.relaxation.status),
                sdp_iterations: d.relaxation.iterations,
                retraction_model: format!("{:?}", d.retraction.model),
                contraction: d.contraction,
                exact_residual: d.exact_residual,
                passive: d.passive,
            };
            write_json(&report, out.as_deref())?;
        }
        Command::Sweep { out, threads, svg, progress } => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads.unwrap_or(0))
                .build()
                .map_err(|e| Failure::Other(e.to_string()))?;
            let total = config.sweep.placements.len() * config.sweep.elements.len() * config.sweep.trials;
            let done = std::sync::atomic::AtomicUsize::new(0);
            let rows = pool.install(|| {
                run_sweep_with_progress(&config, |row| {
                    let k = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                    if progress {
                        eprintln!("[{k}/{total}] {} N={} trial {}: {}", row.placement, row.elements, row.trial, row.status);
                    }
                })
            });
            let summary = write_csv(&rows, &out)?;
            let cells = summarize(&rows);
            for c in &cells {
                let mean = |s: Option<wgms_harness::output::Stat>| s.map_or("-".into(), |s| format!("{:.4e}", s.mean));
                eprintln!(
                    "{:<24} N={:<4} ok {}/{}  achieved {}  random {}  bound {}",
                    c.placement.to_string(),
                    c.elements,
                    c.ok,
                    c.trials,
                    mean(c.achieved),
                    mean(c.random_strength),
                    mean(c.bound)
                );
            }
            if svg {
                write_svg(&cells, &svg_path(&out))?;
            }
            eprintln!("wrote {} rows to {} (summary {})", rows.len(), out.display(), summary.display());
        }
        Command::Peb { design: path } => {
            let text = std::fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
            let report: DesignReport =
                serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            if report.positions_m.len() != report.strengths.len() {
                return Err(Failure::Config(format!("{}: positions and strengths differ in length", path.display())));
            }
            let panel = config.panel(report.positions_m.iter().map(|p| Vector2::new(p[0], p[1])).collect())?;
            let scenario = config.scenario(panel, &TrialSeeds { trial: report.seed })?;
            let ctx = DesignContext::new(&scenario)?;
            let moments = ctx.moments(&scenario, &report.strengths)?;
            let passive = ctx.passive(&scenario, &report.strengths, &moments)?;
            let value = strength_peb(&scenario, &ctx, &report.strengths)?;
            println!("peb_m {:.16e}", value.peb);
            println!("condition {:.6e}", value.condition);
            println!("passive {passive}");
            println!("reported_m {:.16e}", report.peb_achieved_m);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("wgms: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
