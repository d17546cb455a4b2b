use clap::{Parser, Subcommand};
use nonlocal_diffusion::config::Config;
use nonlocal_diffusion::experiments::{calibration_constants, run_named, Report, EXPERIMENTS};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

/// Nonlocal diffusion experiments on model manifolds.
#[derive(Parser, Debug)]
#[command(name = "nldiff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config file, or `defaults` for the built-in configuration.
    #[arg(long, global = true, default_value = "defaults")]
    config: String,

    /// Directory for CSV tables and JSON summaries.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Overrides the config grid scale (multiplies radial panel counts).
    #[arg(long, global = true)]
    grid_scale: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    Spectrum,
    DecayCompact,
    Comparison,
    Limit,
    Transform,
    HeatDecay,
    MainTheorem,
    Conservation,
    /// Analytic bound suite (not part of `all`).
    Bounds,
    /// Every experiment except `bounds`.
    All,
    /// Print the effective configuration as TOML.
    PrintConfig,
}

impl Command {
    fn names(self) -> Vec<&'static str> {
        match self {
            Command::Spectrum => vec!["spectrum"],
            Command::DecayCompact => vec!["decay-compact"],
            Command::Comparison => vec!["comparison"],
            Command::Limit => vec!["limit"],
            Command::Transform => vec!["transform"],
            Command::HeatDecay => vec!["heat-decay"],
            Command::MainTheorem => vec!["main-theorem"],
            Command::Conservation => vec!["conservation"],
            Command::Bounds => vec!["bounds"],
            Command::All => EXPERIMENTS.to_vec(),
            Command::PrintConfig => vec![],
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, String> {
    let mut cfg = if cli.config == "defaults" {
        Config::default()
    } else {
        Config::load(&cli.config).map_err(|e| e.to_string())?
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(g) = cli.grid_scale {
        cfg.grid_scale = g;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn write_report(out: &Path, rep: &Report, cfg: &Config, elapsed: f64) -> std::io::Result<()> {
    for t in &rep.tables {
        std::fs::write(out.join(&t.file), t.to_csv())?;
    }
    let stamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let summary = json!({
        "experiment": rep.experiment,
        "passed": rep.passed,
        "checks": rep.checks,
        "metrics": rep.metrics,
        "tables": rep.tables.iter().map(|t| t.file.clone()).collect::<Vec<_>>(),
        "calibration": calibration_constants(),
        "config": cfg,
        "elapsed_seconds": elapsed,
        "generated_unix_time": stamp,
    });
    let text = serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)?;
    std::fs::write(out.join(format!("{}.json", rep.experiment)), text + "\n")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Command::PrintConfig = cli.command {
        print!("{}", cfg.to_toml_string());
        return ExitCode::SUCCESS;
    }
    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        eprintln!("error: cannot create {}: {e}", cli.out.display());
        return ExitCode::from(2);
    }
    let mut ok = true;
    for name in cli.command.names() {
        let t0 = Instant::now();
        let rep = match run_named(name, &cfg).expect("known experiment") {
            Ok(r) => r,
            Err(e) => {
                println!("{name:<14} ERROR {e}");
                ok = false;
                continue;
            }
        };
        let elapsed = t0.elapsed().as_secs_f64();
        println!("{}  {elapsed:.2}s", rep.summary_line());
        for c in rep.failed_checks() {
            println!(
                "    failed: {} = {:.6e} (threshold {:.6e})",
                c.name, c.value, c.threshold
            );
        }
        if let Err(e) = write_report(&cli.out, &rep, &cfg, elapsed) {
            eprintln!("error: writing reports: {e}");
            return ExitCode::from(2);
        }
        ok &= rep.passed;
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
