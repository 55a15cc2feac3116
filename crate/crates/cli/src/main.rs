use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use nibp_core::bounds::{self, BoundReportConfig};
use nibp_core::channel::{self, ChannelInput};
use nibp_core::experiment::{self, ExperimentConfig, GradScanConfig, DEFAULT_SEED};
use nibp_core::trainer::{self, TrainConfig};

#[derive(Parser)]
#[command(
    name = "nibp-lab",
    version,
    about = "Noise-induced barren plateau experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Affine representation, singular values and class of a channel.
    Channel(Common),
    /// Gradient statistics at chosen locations of one circuit.
    GradScan(Common),
    /// Contractivity factors, depth thresholds and limit-set interval.
    BoundReport(Common),
    /// SPSA training of one Hamiltonian instance.
    Train(Common),
    /// A full preset sweep with CSV, plot script and metadata.
    Experiment(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; must be empty or absent unless --force is given.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Root seed, overriding the one in the configuration.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    force: bool,
}

impl Common {
    fn read<T: serde::de::DeserializeOwned>(&self) -> Result<T> {
        let text = fs::read_to_string(&self.config)
            .with_context(|| format!("reading {}", self.config.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", self.config.display()))
    }

    fn out_dir(&self, fallback: Option<&Path>) -> Result<PathBuf> {
        let Some(dir) = self.out.as_deref().or(fallback) else {
            bail!("no output directory: pass --out");
        };
        experiment::prepare_output(dir, self.force)?;
        Ok(dir.to_path_buf())
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)? + "\n")
        .with_context(|| format!("writing {}", path.display()))
}

fn metadata(
    dir: &Path,
    command: &str,
    seed: Option<u64>,
    config: &impl serde::Serialize,
    wall: f64,
) -> Result<()> {
    write_json(
        &dir.join("metadata.json"),
        &json!({
            "version": experiment::version_string(),
            "command": command,
            "seed": seed,
            "config": config,
            "wall_time_s": wall,
        }),
    )
}

fn channel_cmd(args: &Common) -> Result<()> {
    let input: ChannelInput = args.read()?;
    let dir = args.out_dir(None)?;
    let start = Instant::now();
    let ch = input.build()?;
    let report = channel::inspect(&ch)?;
    write_json(&dir.join("channel.json"), &report)?;
    metadata(&dir, "channel", None, &input, start.elapsed().as_secs_f64())?;
    println!(
        "n={} class={:?} ||M||={:.6} ||c||={:.6}",
        report.n,
        report.class,
        report.operator_norm,
        report.c_nice.iter().map(|x| x * x).sum::<f64>().sqrt()
    );
    Ok(())
}

fn grad_scan_cmd(args: &Common) -> Result<()> {
    let cfg: GradScanConfig = args.read()?;
    let dir = args.out_dir(None)?;
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let start = Instant::now();
    let rows = experiment::grad_scan(&cfg, seed)?;
    fs::write(dir.join("grad_scan.csv"), experiment::to_csv(&rows)?)?;
    metadata(
        &dir,
        "grad-scan",
        Some(seed),
        &cfg,
        start.elapsed().as_secs_f64(),
    )?;
    for r in &rows {
        println!(
            "layer {} slot {}: mean |dC| = {:.4e}",
            r.layer, r.slot, r.mean_abs_grad
        );
    }
    Ok(())
}

fn bound_report_cmd(args: &Common) -> Result<()> {
    let cfg: BoundReportConfig = args.read()?;
    let dir = args.out_dir(None)?;
    let seed = args.seed.unwrap_or(DEFAULT_SEED);
    let start = Instant::now();
    let report = bounds::bound_report(&cfg, seed)?;
    write_json(&dir.join("bound_report.json"), &report)?;
    metadata(
        &dir,
        "bound-report",
        Some(seed),
        &cfg,
        start.elapsed().as_secs_f64(),
    )?;
    println!("r = {:.6}, ||h|| = {:.6}", report.r, report.h_norm);
    Ok(())
}

fn train_cmd(args: &Common) -> Result<()> {
    let cfg: TrainConfig = args.read()?;
    let dir = args.out_dir(None)?;
    let seed = args.seed.unwrap_or(cfg.spsa.seed);
    let start = Instant::now();
    let outcome = trainer::run_train(&cfg, seed)?;
    fs::write(dir.join("train.csv"), outcome.trace.to_csv())?;
    write_json(
        &dir.join("train_result.json"),
        &json!({
            "final_cost": outcome.trace.final_cost,
            "theta": outcome.trace.theta,
            "evaluations": outcome.trace.evaluations,
            "a": outcome.trace.a,
            "trace_over_dim": outcome.trace_over_dim,
            "ground_energy": outcome.ground_energy,
        }),
    )?;
    metadata(
        &dir,
        "train",
        Some(seed),
        &cfg,
        start.elapsed().as_secs_f64(),
    )?;
    println!(
        "final cost {:.6} (Tr(H)/d = {:.6}, ground = {:.6})",
        outcome.trace.final_cost, outcome.trace_over_dim, outcome.ground_energy
    );
    Ok(())
}

fn experiment_cmd(args: &Common) -> Result<()> {
    let cfg: ExperimentConfig = args.read()?;
    let Some(dir) = args.out.clone().or_else(|| cfg.output.clone()) else {
        bail!("no output directory: pass --out or set 'output'");
    };
    let written = experiment::run_to_dir(&cfg, &dir, args.seed, args.force)?;
    println!("wrote {}", written.csv.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Channel(a) => channel_cmd(a),
        Command::GradScan(a) => grad_scan_cmd(a),
        Command::BoundReport(a) => bound_report_cmd(a),
        Command::Train(a) => train_cmd(a),
        Command::Experiment(a) => experiment_cmd(a),
    }
}
