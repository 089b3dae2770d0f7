//! Command-line driver: training, attacks, experiments, and self-checks.

use std::path::PathBuf;
use std::process::ExitCode;

use advpath_cli::commands;
use advpath_cli::config::{load_config, Config};
use advpath_cli::io::parse_norm;
use advpath_cli::selftest::run_selftest;
use advpath_core::geometry::Norm;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "advpath", version, about = "Adversarial perturbation paths: lp attacks, Bezier path optimization, and evolutionary search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML configuration file; flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (each command writes a fresh subdirectory).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Master seed; all sub-seeds derive from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Restrict to one norm: linf, l2, or l1.
    #[arg(long, global = true)]
    norm: Option<String>,
    /// Worker threads (results are identical for any value).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Path to a trained model file (defaults to <out>/train-<seed>/model.json).
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    /// Path to a dataset manifest (defaults to <out>/train-<seed>/dataset.json).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic dataset and train the classifier.
    Train(Common),
    /// Connectivity along optimized Bézier paths (and optionally the linear baseline).
    Connect {
        #[command(flatten)]
        common: Common,
        /// Also evaluate the straight-segment baseline on the same endpoints.
        #[arg(long)]
        linear: bool,
    },
    /// Transferability of endpoints vs sampled path points on unseen images.
    Transfer(Common),
    /// Auxiliary-image ablation of path transferability.
    Aux(Common),
    /// Coverage across optimization epochs and sampling densities.
    Converge(Common),
    /// Uniform-crossover vs Bézier-crossover evolutionary attack.
    Compare(Common),
    /// PGD vs the Bézier-crossover attack under input quantization.
    Obfuscated {
        #[command(flatten)]
        common: Common,
        /// Quantization levels, or "none" to disable the defense.
        #[arg(long)]
        levels: Option<String>,
    },
    /// Run the fast invariant suite and exit nonzero on any failure.
    Selftest {
        #[command(flatten)]
        common: Common,
        /// Test hook: deliberately corrupt the named check.
        #[arg(long, hide = true)]
        sabotage: Option<String>,
    },
}

fn resolve_config(common: &Common) -> anyhow::Result<(Config, Option<Norm>)> {
    let mut config = match &common.config {
        Some(path) => load_config(path)?,
        None => Config::default(),
    };
    if let Some(out) = &common.out {
        config.out_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(threads) = common.threads {
        config.threads = threads;
    }
    let norm = common.norm.as_deref().map(parse_norm).transpose()?;
    Ok((config, norm))
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train(common) => {
            let (config, _) = resolve_config(&common)?;
            let output = commands::cmd_train(&config)?;
            println!(
                "trained model: train accuracy {:.4}, test accuracy {:.4}",
                output.train_accuracy, output.test_accuracy
            );
            println!("model: {}", output.model_path.display());
            println!("dataset manifest: {}", output.manifest_path.display());
        }
        Command::Connect { common, linear } => {
            let (config, norm) = resolve_config(&common)?;
            let (model, data) =
                commands::load_trained(&config, common.model.as_deref(), common.data.as_deref())?;
            let dir = commands::cmd_connect(&config, &model, &data, norm, linear)?;
            println!("reports written to {}", dir.display());
        }
        Command::Transfer(common) => {
            let (config, norm) = resolve_config(&common)?;
            let (model, data) =
                commands::load_trained(&config, common.model.as_deref(), common.data.as_deref())?;
            let dir = commands::cmd_transfer(&config, &model, &data, norm)?;
            println!("reports written to {}", dir.display());
        }
        Command::Aux(common) => {
            let (config, norm) = resolve_config(&common)?;
            let (model, data) =
                commands::load_trained(&config, common.model.as_deref(), common.data.as_deref())?;
            let dir = commands::cmd_aux(&config, &model, &data, norm)?;
            println!("reports written to {}", dir.display());
        }
        Command::Converge(common) => {
            let (config, norm) = resolve_config(&common)?;
            let (model, data) =
                commands::load_trained(&config, common.model.as_deref(), common.data.as_deref())?;
            let dir = commands::cmd_converge(&config, &model, &data, norm)?;
            println!("reports written to {}", dir.display());
        }
        Command::Compare(common) => {
            let (config, norm) = resolve_config(&common)?;
            let (model, data) =
                commands::load_trained(&config, common.model.as_deref(), common.data.as_deref())?;
            let dir = commands::cmd_compare(&config, &model, &data, norm)?;
            println!("reports written to {}", dir.display());
        }
        Command::Obfuscated { common, levels } => {
            let (config, norm) = resolve_config(&common)?;
            let (model, data) =
                commands::load_trained(&config, common.model.as_deref(), common.data.as_deref())?;
            let levels = match levels.as_deref() {
                None => Some(config.experiments.obfuscated_levels),
                Some("none") => None,
                Some(text) => Some(
                    text.parse::<u32>()
                        .map_err(|_| anyhow::anyhow!("--levels expects a positive integer or 'none'"))?,
                ),
            };
            let dir = commands::cmd_obfuscated(&config, &model, &data, norm, levels)?;
            println!("reports written to {}", dir.display());
        }
        Command::Selftest { common: _, sabotage } => {
            let results = run_selftest(sabotage.as_deref());
            let mut failures = 0;
            for check in &results {
                if check.passed {
                    println!("PASS {}", check.name);
                } else {
                    failures += 1;
                    eprintln!("FAIL {} — {}", check.name, check.detail);
                }
            }
            if failures > 0 {
                anyhow::bail!("{failures} selftest check(s) failed");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::FAILURE
        }
    }
}
