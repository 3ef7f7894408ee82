use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use idescope::{compare_files, run, CheckRegistry, CliError, CliResult, ExperimentConfig, TaskRegistry, THREADS_ENV};
use idescope_models::{bh_omega_table, BhPiecewiseParams, Catalog};

#[derive(Parser)]
#[command(
    name = "idescope",
    version,
    about = "Limit sets of nonautonomous difference and integrodifference equations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config (TOML, or JSON by extension).
    Run {
        config: PathBuf,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare a report against a golden file field by field.
    Compare {
        report: PathBuf,
        golden: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// List model families, tasks, checks and discretization choices.
    Catalog,
    /// Print the closed-form interval golden for the piecewise Beverton-Holt model.
    Golden { alpha_minus: f64, alpha_plus: f64 },
}

fn init_threads() -> CliResult<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Schema(format!("{THREADS_ENV}={v} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Failed(e.to_string()))?;
    }
    Ok(())
}

fn print_catalog() {
    println!("models:");
    let catalog = Catalog::builtin();
    for f in catalog.families() {
        println!("  {:<16} {}", f.name(), f.summary());
        for p in f.params() {
            println!("      {:<14} = {:<12} {}", p.name, p.default, p.doc);
        }
    }
    println!("tasks:");
    for t in TaskRegistry::builtin().tasks() {
        println!("  {:<16} {}", t.name(), t.summary());
    }
    println!("checks (task kind = \"verify\"):");
    for c in CheckRegistry::builtin().checks() {
        println!("  {:<16} {}", c.name(), c.summary());
    }
    let names = |v: Vec<&'static str>| v.join(", ");
    println!(
        "forward constructions: {}",
        names(idescope_setdyn::constructions().iter().map(|c| c.name()).collect())
    );
    println!(
        "nystrom assemblies: {}",
        names(idescope_nystrom::assemblies().iter().map(|a| a.name()).collect())
    );
    println!(
        "quadrature rules: {}",
        names(idescope_nystrom::rules().iter().map(|r| r.name()).collect())
    );
}

fn main_inner(cli: Cli) -> CliResult<()> {
    init_threads()?;
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let manifest = run(&cfg, out.as_deref())?;
            let dir = out.unwrap_or(cfg.output.dir.clone());
            let report = manifest.outputs.iter().find(|f| f.path == idescope::REPORT_FILE);
            println!(
                "{} files in {}; report sha256 {}; {:.2}s",
                manifest.outputs.len(),
                dir.display(),
                report.map_or("-", |f| f.sha256.as_str()),
                manifest.wall_time_s
            );
            manifest.status()
        }
        Command::Compare { report, golden, tol } => {
            let d = compare_files(&report, &golden, tol)?;
            print!("{}", d.render());
            if d.passed() {
                Ok(())
            } else {
                let first = d
                    .failures()
                    .map(|f| f.path.clone())
                    .chain(d.missing.iter().cloned())
                    .next();
                Err(CliError::Failed(format!("mismatch at {}", first.unwrap_or_default())))
            }
        }
        Command::Catalog => {
            print_catalog();
            Ok(())
        }
        Command::Golden {
            alpha_minus,
            alpha_plus,
        } => {
            let row = bh_omega_table(&BhPiecewiseParams::new(alpha_minus, alpha_plus))?;
            print!("{}", idescope::to_canonical_string(&row.golden_json()));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("idescope: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
