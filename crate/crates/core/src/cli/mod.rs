//! The `stitlab` command line tool.
//!
//! ```text
//! stitlab simulate|verify|clt|iterate-test|compare --config <file> [--seed <u64>] [--threads <n>] [--out <dir>]
//! stitlab render --input <tessellation.json> [--format svg|ply] [--stroke-by-birth] [--out <dir>]
//! stitlab formulas dump [--out <dir>]
//! ```
//!
//! Exit codes: 0 when every statistic with a target has `|z| <= z_max`,
//! 1 when some does not, 2 on errors.

pub mod config;
pub mod experiments;
pub mod render;
pub mod report;
pub mod seeds;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Result, StitError};
use crate::mnw::Tessellation;
use config::{ExperimentConfig, ExperimentKind};
use experiments::{run_experiment, Outcome};
use report::RunMetrics;

#[derive(Debug, Parser)]
#[command(
    name = "stitlab",
    version,
    about = "Simulate STIT tessellations and check them against closed-form results"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the configured master seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (fallback: STITLAB_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// One realization, saved as JSON.
    Simulate,
    /// Replicated first- and second-order checks against the formulas.
    Verify,
    /// Central limit experiments (clt2d, clt3d, increment).
    Clt,
    /// Iteration and rescaling identities.
    IterateTest,
    /// Poisson hyperplane runs and the variance comparison table.
    Compare,
    /// Draws a saved tessellation.
    Render {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Svg)]
        format: Format,
        #[arg(long)]
        stroke_by_birth: bool,
    },
    /// Formula catalog.
    Formulas {
        #[command(subcommand)]
        action: FormulasAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum FormulasAction {
    /// Every closed form on a parameter grid, as CSV.
    Dump,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Svg,
    Ply,
}

fn accepts(cmd: &Command, kind: ExperimentKind) -> bool {
    use ExperimentKind as K;
    match cmd {
        Command::Simulate => true,
        Command::Verify => matches!(kind, K::Verify | K::IterateTest | K::Compare),
        Command::Clt => matches!(kind, K::Clt2d | K::Clt3d | K::Increment),
        Command::IterateTest => kind == K::IterateTest,
        Command::Compare => kind == K::Compare,
        _ => false,
    }
}

/// Thread count from the flag, then `STITLAB_THREADS`.
pub fn thread_count(flag: Option<usize>) -> Option<usize> {
    flag.or_else(|| std::env::var("STITLAB_THREADS").ok()?.parse().ok())
        .filter(|n| *n > 0)
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<(T, usize)> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        b = b.num_threads(n);
    }
    let pool = b
        .build()
        .map_err(|e| StitError::InvalidArgument(format!("thread pool: {e}")))?;
    let n = pool.current_num_threads();
    Ok((pool.install(f), n))
}

/// Writes the report, curves, tessellation and metrics of an outcome.
pub fn write_outcome(out: &Outcome, dir: &Path, stem: &str, metrics: &RunMetrics) -> Result<()> {
    out.report.write(dir, stem)?;
    for (suffix, csv) in &out.curves {
        std::fs::write(dir.join(format!("{stem}_{suffix}.csv")), csv)?;
    }
    if let Some(y) = &out.tessellation {
        std::fs::write(dir.join(format!("{stem}.tessellation.json")), y.to_json()?)?;
    }
    std::fs::write(
        dir.join(format!("{stem}.metrics.json")),
        serde_json::to_string_pretty(metrics)? + "\n",
    )?;
    Ok(())
}

fn run_config(cli: &Cli) -> Result<i32> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| StitError::InvalidArgument("--config is required".into()))?;
    let mut cfg = ExperimentConfig::from_file(path)?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if matches!(cli.command, Command::Simulate) {
        cfg.experiment = ExperimentKind::Simulate;
    }
    if !accepts(&cli.command, cfg.experiment) {
        return Err(StitError::Config {
            field: "experiment".into(),
            message: format!(
                "`{}` cannot run under this subcommand",
                cfg.experiment.name()
            ),
        });
    }
    let start = Instant::now();
    let (outcome, threads) = with_pool(thread_count(cli.threads), || run_experiment(&cfg))?;
    let outcome = outcome?;
    let metrics = RunMetrics {
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        threads,
        total_cells: outcome.report.total_cells,
    };
    let dir = cli
        .out
        .clone()
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let stem = cfg
        .output
        .stem
        .clone()
        .unwrap_or_else(|| cfg.experiment.name().to_string());
    write_outcome(&outcome, &dir, &stem, &metrics)?;
    let r = &outcome.report;
    for row in &r.rows {
        if let (Some(t), Some(z)) = (row.target, row.z) {
            println!(
                "{:<44} {:>14.6} ± {:<12.4e} target {:>14.6}  z {:>7.2}",
                row.statistic, row.estimate, row.std_error, t, z
            );
        } else {
            println!(
                "{:<44} {:>14.6} ± {:<12.4e}",
                row.statistic, row.estimate, row.std_error
            );
        }
    }
    for v in &r.verdicts {
        println!(
            "{} {}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.name,
            v.detail
        );
    }
    Ok(if r.all_within_z_max { 0 } else { 1 })
}

fn render(cli: &Cli, input: &Path, format: Format, stroke_by_birth: bool) -> Result<i32> {
    let y = Tessellation::from_json(&std::fs::read_to_string(input)?)?;
    let (text, ext) = match format {
        Format::Svg => (render::render_svg(&y, stroke_by_birth)?, "svg"),
        Format::Ply => (render::render_ply(&y)?, "ply"),
    };
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let name = input
        .file_name()
        .and_then(|n| n.to_str())
        .map(|n| {
            n.trim_end_matches(".json")
                .trim_end_matches(".tessellation")
        })
        .unwrap_or("tessellation");
    std::fs::write(dir.join(format!("{name}.{ext}")), text)?;
    Ok(0)
}

/// CSV of [`crate::formulas::catalog`].
pub fn formulas_csv() -> String {
    let mut s = String::from("id,params,value,provenance\n");
    for e in crate::formulas::catalog() {
        s.push_str(&format!(
            "{},{},{},{}\n",
            e.id,
            e.params,
            report::fmt_f64(e.value),
            e.provenance
        ));
    }
    s
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_with_args<I, A>(args: I) -> i32
where
    I: IntoIterator<Item = A>,
    A: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let res = match &cli.command {
        Command::Render {
            input,
            format,
            stroke_by_birth,
        } => render(&cli, input, *format, *stroke_by_birth),
        Command::Formulas {
            action: FormulasAction::Dump,
        } => {
            let csv = formulas_csv();
            match &cli.out {
                Some(dir) => std::fs::create_dir_all(dir)
                    .and_then(|_| std::fs::write(dir.join("formulas.csv"), csv))
                    .map(|_| 0)
                    .map_err(StitError::from),
                None => {
                    print!("{csv}");
                    Ok(0)
                }
            }
        }
        _ => run_config(&cli),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("stitlab: {e}");
            2
        }
    }
}
