use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use scnet::commands::{self, Predictor};
use scnet::{CliError, CliResult, RunConfig};

#[derive(Parser)]
#[command(name = "scnet", version, about = "Point-cloud collision checking benchmarks and rearrangement rollouts")]
struct Cli {
    /// JSON run configuration; defaults apply to every omitted key.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured root seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Collision predictor; `eval` accepts it repeatedly.
    #[arg(long, global = true, value_enum)]
    predictor: Vec<Predictor>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate train/eval query datasets.
    GenData,
    /// Train a collision network.
    Train,
    /// Benchmark predictors on the eval dataset.
    Eval,
    /// Run pick-and-place episodes.
    Rollout,
    /// Render eval reports and rollout summaries.
    Report {
        inputs: Vec<PathBuf>,
    },
}

fn run(cli: Cli) -> CliResult<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let single = || -> CliResult<Option<Predictor>> {
        match cli.predictor.as_slice() {
            [] => Ok(None),
            [p] => Ok(Some(*p)),
            _ => Err(CliError::Config("this command takes a single --predictor".into())),
        }
    };
    match &cli.command {
        Command::GenData => {
            let s = commands::gen_data(&cfg, &cli.out)?;
            for d in &s.datasets {
                println!("{}: {} records, {} queries, {:.1}% colliding", d.path.display(), d.records, d.queries, 100.0 * d.positive_rate);
            }
        }
        Command::Train => {
            let kind = match single()? {
                None => None,
                Some(p) => Some(p.model_kind().ok_or_else(|| CliError::Config(format!("{} is not a trainable model", p.name())))?),
            };
            let s = commands::train(&cfg, kind, &cli.out)?;
            println!("trained {} to step {}; checkpoint {}", s.model, s.steps, s.checkpoint.display());
        }
        Command::Eval => {
            let r = commands::eval(&cfg, &cli.predictor, &cli.out)?;
            for c in &r.results {
                let ap = c.ap.map_or_else(|| "n/a".into(), |v| format!("{v:.4}"));
                println!("{:<24} accuracy {:.4}  AP {ap}  {:.4} ms/query", c.checker, c.accuracy, c.mean_ms_per_query);
            }
        }
        Command::Rollout => {
            let s = commands::rollout(&cfg, single()?.unwrap_or(Predictor::Oracle), &cli.out)?;
            println!(
                "{}: {} objects, {} grasps, {} placements, {} audit failures",
                s.predictor,
                s.objects(),
                s.grasps(),
                s.placements(),
                s.audit_failures()
            );
        }
        Command::Report { inputs } => {
            commands::report(inputs, &cli.out)?;
            println!("report written to {}", cli.out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
