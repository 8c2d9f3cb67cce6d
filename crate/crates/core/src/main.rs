use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qaoa_transfer::error::{Error, Result};
use qaoa_transfer::experiments::{run, verify_manifest, Command, ExperimentConfig};

/// Depth-1 QAOA MaxCut parameter-transfer experiments.
///
/// Settings come from defaults, then `--config`, then `--set`, then the
/// dedicated flags; later sources win.
#[derive(Parser, Debug)]
#[command(name = "qaoa-transfer", version)]
struct Cli {
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 runs single-threaded, 0 uses every core.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Flat `key = value` config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Extra `key=value` overrides, repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Generate the parity-graded random graph ensemble.
    GenGraphs,
    /// Energy landscape of a lightcone class like "(3,3,0)" or a graph file.
    Landscape {
        subject: String,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Class-to-class transferability map over the lightcone catalog.
    TransferMap {
        #[arg(long)]
        max_degree: Option<usize>,
        #[arg(long)]
        regular_only: bool,
    },
    /// Transfer optimized parameters from one graph to another.
    Transfer { donor: PathBuf, acceptor: PathBuf },
    /// Transfer from a generated donor population to one acceptor.
    EnsembleTransfer {
        acceptor: PathBuf,
        #[arg(long)]
        donors: Option<usize>,
    },
    /// Pairwise transferability heatmap over a generated ensemble.
    ParityHeatmap { ensemble: PathBuf },
    /// Compare SS, PS and SPS against true transferability.
    SimilarityCompare { ensemble: PathBuf },
    /// Maximum cut of a graph file.
    Maxcut { graph: PathBuf },
    /// Re-hash the artifacts listed in a manifest.
    VerifyManifest { manifest: PathBuf },
}

fn config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::read(path)?,
        None => ExperimentConfig::default(),
    };
    for kv in &cli.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        cfg.set(k, v)?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(d) = &cli.cache_dir {
        cfg.cache_dir = Some(d.clone());
    }
    match &cli.command {
        Cmd::Landscape { resolution: Some(r), .. } => cfg.resolution = *r,
        Cmd::TransferMap { max_degree, regular_only } => {
            if let Some(d) = max_degree {
                cfg.catalog_max_degree = *d;
            }
            cfg.regular_only |= regular_only;
        }
        Cmd::EnsembleTransfer { donors: Some(n), .. } => cfg.donors = *n,
        _ => {}
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<()> {
    let command = match cli.command {
        Cmd::VerifyManifest { ref manifest } => {
            let drift = verify_manifest(manifest)?;
            if drift.is_empty() {
                println!("ok: {}", manifest.display());
                return Ok(());
            }
            for d in &drift {
                eprintln!("drift: {d:?}");
            }
            return Err(Error::Verification(format!("{} artifact(s) drifted", drift.len())));
        }
        Cmd::GenGraphs => Command::GenGraphs,
        Cmd::Landscape { ref subject, .. } => Command::Landscape { subject: subject.clone() },
        Cmd::TransferMap { .. } => Command::TransferMap,
        Cmd::Transfer { ref donor, ref acceptor } => Command::Transfer {
            donor: donor.clone(),
            acceptor: acceptor.clone(),
        },
        Cmd::EnsembleTransfer { ref acceptor, .. } => Command::EnsembleTransfer { acceptor: acceptor.clone() },
        Cmd::ParityHeatmap { ref ensemble } => Command::ParityHeatmap { ensemble: ensemble.clone() },
        Cmd::SimilarityCompare { ref ensemble } => Command::SimilarityCompare { ensemble: ensemble.clone() },
        Cmd::Maxcut { ref graph } => Command::MaxCut { graph: graph.clone() },
    };
    let cfg = config(&cli)?;
    let outcome = run(&command, &cfg)?;
    for a in &outcome.artifacts {
        println!("{}  {}", a.sha256(), cfg.out_dir.join(&a.name).display());
    }
    println!(
        "manifest {}{}",
        outcome.manifest.display(),
        if outcome.cache_hit { " (cached)" } else { "" }
    );
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
