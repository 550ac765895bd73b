use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use edgeslice::harness::{
    compare, load_manifest, plan_transitions, resolve_sessions, run_eval, run_incremental, run_train, EvalSummary,
    ExperimentConfig, PolicyKind,
};
use edgeslice::incremental::Transition;
use edgeslice::{Error, Result};

#[derive(Parser)]
#[command(name = "edgeslice", version, about = "Edge network slicing with multi-agent DDPG")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON). Omitted fields take defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run this single seed instead of the config's seed list.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Train one agent per slice for every seed.
    Train(Common),
    /// Evaluate a policy and write summary.json and utilities.csv.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Overrides the config's policy selector.
        #[arg(long)]
        policy: Option<PolicyKind>,
        /// Training output (root or one seed directory), for maddpg.
        #[arg(long)]
        checkpoints: Option<PathBuf>,
    },
    /// Add agents to a trained session and fine-tune.
    Increment(Transitions),
    /// Remove agents from a trained session and fine-tune.
    Decrement(Transitions),
    /// Tabulate evaluation summaries of one scenario.
    Compare {
        #[command(flatten)]
        common: Common,
        /// summary.json files or directories containing one.
        #[arg(long, num_args = 1.., required = true)]
        summaries: Vec<PathBuf>,
    },
}

#[derive(Args)]
struct Transitions {
    #[command(flatten)]
    common: Common,
    /// Session to start from (root or one seed directory).
    #[arg(long)]
    checkpoints: PathBuf,
    /// Agent counts to visit in order; defaults to the config's targets.
    #[arg(long)]
    to: Vec<usize>,
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seeds = vec![seed];
    }
    Ok(config)
}

fn transitions(args: &Transitions, grow: bool) -> Result<()> {
    let config = load_config(&args.common)?;
    config.validate()?;
    let targets = if args.to.is_empty() {
        &config.incremental.targets
    } else {
        &args.to
    };
    let base = resolve_sessions(&args.checkpoints, &config.seeds[..1])?;
    let from = load_manifest(&base[0])?.num_slices;
    let plan = plan_transitions(from, targets);
    if let Some(bad) = plan.iter().find(|t| matches!(t, Transition::Grow(_)) != grow) {
        let verb = if grow { "increment" } else { "decrement" };
        return Err(Error::Count(format!("{verb} cannot move to {} agents", bad.target())));
    }
    let sessions = run_incremental(&config, &base[0], &plan, &args.common.out, args.common.seed)?;
    for s in &sessions {
        println!(
            "{}: {} agents, {} steps, tail reward {:.4}",
            s.dir.display(),
            s.manifest.num_slices,
            s.manifest.trace_steps,
            s.manifest.tail_reward
        );
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(common) => {
            let config = load_config(&common)?;
            for s in run_train(&config, &common.out)? {
                println!(
                    "seed {}: {} steps, tail reward {:.4} -> {}",
                    s.manifest.seed,
                    s.manifest.trace_steps,
                    s.manifest.tail_reward,
                    s.dir.display()
                );
            }
        }
        Command::Eval {
            common,
            policy,
            checkpoints,
        } => {
            let mut config = load_config(&common)?;
            if let Some(p) = policy {
                config.policy = p;
            }
            let summary = run_eval(&config, checkpoints.as_deref())?;
            summary.write(&common.out)?;
            let s = summary.stats;
            println!(
                "{}: max {:.4} min {:.4} average {:.4} variance {:.4} over {} slots x {} seeds",
                summary.policy.label(),
                s.max,
                s.min,
                s.average,
                s.variance,
                summary.horizon,
                summary.per_seed.len()
            );
        }
        Command::Increment(args) => transitions(&args, true)?,
        Command::Decrement(args) => transitions(&args, false)?,
        Command::Compare { common, summaries } => {
            if let Some(path) = &common.config {
                ExperimentConfig::load(path)?.validate()?;
            }
            let loaded = summaries
                .iter()
                .map(|p| EvalSummary::load(p))
                .collect::<Result<Vec<_>>>()?;
            let table = compare(&loaded)?;
            table.write(&common.out)?;
            print!("{table}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
