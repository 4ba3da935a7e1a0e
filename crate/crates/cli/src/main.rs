use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zoneheat::data::{export_aligned, generate_synthetic, load_aligned};
use zoneheat::simulation::{
    compare_campaign, default_grid, run, summarize, write_tidy_trace, ControllerKind, RunConfig,
};
use zoneheat::Error;

#[derive(Parser)]
#[command(name = "zoneheat", version, about = "Multi-zone heat pump control benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one closed-loop simulation and write its trace and summary.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the controller named in the config.
        #[arg(long)]
        controller: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, env = "ZONEHEAT_DATA_DIR")]
        data_dir: Option<PathBuf>,
    },
    /// Run every controller, scenario and parameter set on the same data.
    Campaign {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        parallel: Option<usize>,
        #[arg(long, env = "ZONEHEAT_DATA_DIR")]
        data_dir: Option<PathBuf>,
    },
    /// Write seeded synthetic weather.csv and prices.csv.
    GenerateData {
        #[arg(long, default_value_t = 9)]
        weeks: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value = "data")]
        out: PathBuf,
    },
    /// Load and align weather.csv and prices.csv, reporting what is usable.
    ValidateData {
        #[arg(long, env = "ZONEHEAT_DATA_DIR")]
        data_dir: PathBuf,
    },
    /// Run a simulation and write a long-format trace for plotting.
    ExportPlotsData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        controller: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, env = "ZONEHEAT_DATA_DIR")]
        data_dir: Option<PathBuf>,
    },
}

/// Failure carrying its exit code.
struct Failure {
    kind: &'static str,
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = exit_code(e.kind());
        Self {
            kind: e.kind(),
            code,
            message: e.to_string(),
        }
    }
}

fn exit_code(kind: &str) -> u8 {
    match kind {
        "config" => 1,
        "data" | "io" => 2,
        _ => 3,
    }
}

fn load_config(path: &Path, controller: Option<&str>) -> Result<RunConfig, Failure> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(name) = controller {
        cfg.controller = name.parse::<ControllerKind>()?;
    }
    cfg.validate()?;
    Ok(cfg.frozen())
}

fn create_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure {
        kind: "io",
        code: 2,
        message: format!("cannot create {}: {e}", dir.display()),
    })
}

fn simulate(config: &Path, controller: Option<&str>, out: &Path, data_dir: Option<&Path>) -> Result<(), Failure> {
    let cfg = load_config(config, controller)?;
    let data = cfg.load_data(data_dir)?;
    let trace = run(&cfg, &data)?;
    let summary = summarize(&cfg, &trace)?;
    create_dir(out)?;
    trace.write_csv(out.join("trace.csv"))?;
    summary.write_json(out.join("summary.json"))?;
    println!(
        "{}: {:.3} EUR/week, {:.4} K discomfort over {} weeks -> {}",
        cfg.controller,
        summary.mean_cost_eur,
        summary.mean_discomfort_k,
        summary.weeks.len(),
        out.display()
    );
    Ok(())
}

fn campaign(config: &Path, out: &Path, parallel: Option<usize>, data_dir: Option<&Path>) -> Result<(), Failure> {
    let cfg = load_config(config, None)?;
    let data = cfg.load_data(data_dir)?;
    let workers = parallel.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let report = compare_campaign(&cfg, &default_grid(), &data, workers)?;
    create_dir(out)?;
    report.write_json(out.join("report.json"))?;
    report.write_aggregate_csv(out.join("aggregate.csv"))?;
    report.write_weekly_csv(out.join("weekly.csv"))?;
    for c in &report.comparisons {
        let red = c.cost_reduction_pct.map_or("-".to_string(), |r| format!("{r:.1} %"));
        println!(
            "{:<28} {:>8.3} EUR/week {:>8.4} K  {red}",
            c.cell.label(),
            c.mean_cost_eur,
            c.mean_discomfort_k
        );
    }
    let failed: Vec<_> = report.failures().collect();
    match failed.first() {
        None => Ok(()),
        Some(first) => {
            let code = exit_code(first.error_kind.as_deref().unwrap_or("solver"));
            Err(Failure {
                kind: ["config", "data", "solver"][code as usize - 1],
                code,
                message: format!(
                    "{} of {} cells failed, first {}: {}",
                    failed.len(),
                    report.cells.len(),
                    first.cell.label(),
                    first.error.as_deref().unwrap_or("unknown error")
                ),
            })
        }
    }
}

fn generate(weeks: usize, seed: u64, out: &Path) -> Result<(), Failure> {
    let series = generate_synthetic(weeks, seed)?;
    create_dir(out)?;
    export_aligned(&series, out.join("weather.csv"), out.join("prices.csv"))?;
    println!(
        "wrote {weeks} weeks of synthetic data (seed {seed}) to {}",
        out.display()
    );
    Ok(())
}

fn validate(dir: &Path) -> Result<(), Failure> {
    let series = load_aligned(dir.join("weather.csv"), dir.join("prices.csv"))?;
    println!(
        "{} steps from {} ({} whole weeks usable)",
        series.len(),
        series.start,
        series.weeks()
    );
    Ok(())
}

fn export_plots(config: &Path, controller: Option<&str>, out: &Path, data_dir: Option<&Path>) -> Result<(), Failure> {
    let cfg = load_config(config, controller)?;
    let data = cfg.load_data(data_dir)?;
    let trace = run(&cfg, &data)?;
    create_dir(out)?;
    let path = out.join(format!("tidy_{}.csv", cfg.controller));
    write_tidy_trace(&trace, &path)?;
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Simulate {
            config,
            controller,
            out,
            data_dir,
        } => simulate(config, controller.as_deref(), out, data_dir.as_deref()),
        Command::Campaign {
            config,
            out,
            parallel,
            data_dir,
        } => campaign(config, out, *parallel, data_dir.as_deref()),
        Command::GenerateData { weeks, seed, out } => generate(*weeks, *seed, out),
        Command::ValidateData { data_dir } => validate(data_dir),
        Command::ExportPlotsData {
            config,
            controller,
            out,
            data_dir,
        } => export_plots(config, controller.as_deref(), out, data_dir.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let message = serde_json::to_string(&f.message).unwrap_or_default();
            eprintln!("zoneheat: error kind={} code={} message={message}", f.kind, f.code);
            ExitCode::from(f.code)
        }
    }
}
