//! `vical`: train, evaluate, and inspect motion policies for joint
//! camera/IMU calibration data collection.

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use vical_harness::{
    diagnose_record, echo_config, eval_scatter_svg, evaluate, load_config, read_training_log,
    render_diag, standard_policies, train, training_curve_svg, HarnessConfig, Task,
};

#[derive(Parser)]
#[command(
    name = "vical",
    version,
    about = "Learned data collection for joint camera/IMU calibration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the motion policy with soft actor-critic.
    Train {
        /// Configuration file (TOML). Defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the configured master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Resume from this checkpoint instead of starting fresh.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Output directory for checkpoints, the episode log, and plots.
        #[arg(long, default_value = "out/train")]
        out: PathBuf,
    },
    /// Evaluate the learned policy against the baselines on a rig panel.
    Eval {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Checkpoint holding the learned policy (required).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Calibration task to score: intrinsic, extrinsic_known_k, joint.
        #[arg(long, default_value = "joint")]
        task: String,
        #[arg(long, default_value = "out/eval")]
        out: PathBuf,
        /// Also write each episode's record under OUT/records/.
        #[arg(long)]
        records: bool,
    },
    /// Evaluate the baseline policies only (no checkpoint needed).
    Bench {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Calibration task to score: intrinsic, extrinsic_known_k, joint.
        #[arg(long, default_value = "joint")]
        task: String,
        #[arg(long, default_value = "out/bench")]
        out: PathBuf,
        /// Also write each episode's record under OUT/records/.
        #[arg(long)]
        records: bool,
    },
    /// Print coverage diagnostics for a recorded episode.
    Replay {
        /// Episode directory (episode.json, detections.csv, imu.csv).
        record: PathBuf,
        /// Configuration file supplying the coverage thresholds.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Train {
            config,
            seed,
            checkpoint,
            out,
        } => cmd_train(&load(config.as_deref(), seed)?, &out, checkpoint.as_deref()),
        Command::Eval {
            config,
            seed,
            checkpoint,
            task,
            out,
            records,
        } => cmd_eval(
            &load(config.as_deref(), seed)?,
            &task,
            checkpoint.as_deref(),
            true,
            &out,
            records,
        ),
        Command::Bench {
            config,
            seed,
            task,
            out,
            records,
        } => cmd_eval(&load(config.as_deref(), seed)?, &task, None, false, &out, records),
        Command::Replay { record, config } => cmd_replay(&record, config.as_deref()),
    }
}

fn load(config: Option<&Path>, seed: Option<u64>) -> Result<HarnessConfig> {
    let mut cfg = load_config(config)?;
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn cmd_train(cfg: &HarnessConfig, out: &Path, resume: Option<&Path>) -> Result<()> {
    let outcome = train(cfg, out, resume)?;
    let full_log = read_training_log(&outcome.log_path)?;
    std::fs::write(out.join("training_curve.svg"), training_curve_svg(&full_log))
        .context("write training_curve.svg")?;
    println!("episodes: {}", outcome.counters.episodes);
    println!("environment steps: {}", outcome.counters.env_steps);
    println!("gradient updates: {}", outcome.counters.updates);
    println!(
        "terminal rate (last 50 episodes): {:.2}",
        outcome.last50_terminal_rate()
    );
    println!("episode log: {}", outcome.log_path.display());
    println!("final checkpoint: {}", outcome.checkpoint_final.display());
    Ok(())
}

fn cmd_eval(
    cfg: &HarnessConfig,
    task: &str,
    checkpoint: Option<&Path>,
    include_learned: bool,
    out: &Path,
    records: bool,
) -> Result<()> {
    let task: Task = task.parse().map_err(|e: String| anyhow::anyhow!(e))?;
    let mut policies = standard_policies(cfg, checkpoint, include_learned)?;
    std::fs::create_dir_all(out)
        .with_context(|| format!("create output directory {}", out.display()))?;
    echo_config(cfg, out).context("write config_used.toml")?;
    let records_dir = records.then(|| out.join("records"));
    let report = evaluate(cfg, task, &mut policies, records_dir.as_deref())?;
    report.write_csv(&out.join("eval.csv"))?;
    let text = report.render_text();
    std::fs::write(out.join("summary.txt"), &text).context("write summary.txt")?;
    std::fs::write(out.join("error_vs_path.svg"), eval_scatter_svg(&report))
        .context("write error_vs_path.svg")?;
    print!("{text}");
    Ok(())
}

fn cmd_replay(record: &Path, config: Option<&Path>) -> Result<()> {
    let cfg = load(config, None)?;
    let rec = vical_sim::read_episode(record)
        .with_context(|| format!("read episode record {}", record.display()))?;
    let diag = diagnose_record(&rec, &cfg.thresholds, cfg.solver.min_pair_dt);
    print!("{}", render_diag(&diag, &cfg.thresholds));
    Ok(())
}
