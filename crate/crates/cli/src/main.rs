use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use wallwalk::continuum::{check_clifford, convergence_study, ConvergenceSetup};
use wallwalk::{AngleMode, Flavor, StepPlan};
use wallwalk_cli::config::{parse_config_over, Overrides, RunConfig};
use wallwalk_cli::output::write_json;
use wallwalk_cli::presets::{describe, preset, PRESET_NAMES};
use wallwalk_cli::run::run;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Physical,
    Index,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Validation {
    /// Gamma-matrix relations of the measured 3D generator (writes clifford.json).
    Clifford,
    /// Walk versus continuum error ladder (writes convergence.json).
    Convergence,
}

/// Domain-wall quantum walk runs in 2D and 3D.
///
/// Settings are resolved in order: preset, then the config file, then flags.
#[derive(Debug, Parser)]
#[command(name = "wallwalk", version, after_help = preset_help())]
struct Cli {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// One of fig1, fig2, fig3, fig4.
    #[arg(long, value_parser = PRESET_NAMES)]
    preset: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    steps: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    mass: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    coupling: Option<f64>,
    /// Density snapshot interval; 0 writes only the first and last step.
    #[arg(long)]
    snapshot_every: Option<u64>,
    /// Argument of the wall profile: physical coordinate or bare site offset.
    #[arg(long, value_enum)]
    angle_mode: Option<Mode>,
    /// Runs are always seedless; accepted for compatibility.
    #[arg(long, num_args = 0)]
    seedless: bool,
    /// Run a numerical check instead of an evolution.
    #[arg(long, value_enum)]
    validate: Option<Validation>,
}

fn preset_help() -> String {
    let mut s = String::from("Presets:\n");
    for name in PRESET_NAMES {
        s.push_str(&format!("  {name}  {}\n", describe(name).unwrap_or_default()));
    }
    s
}

fn resolve(cli: &Cli) -> Result<RunConfig, String> {
    let mut config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            parse_config_over(&text, cli.preset.as_deref()).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => match &cli.preset {
            Some(name) => preset(name).ok_or_else(|| format!("unknown preset `{name}`"))?,
            None => RunConfig::defaults(Flavor::TwoD),
        },
    };
    config.apply(&Overrides {
        out_dir: cli.out_dir.clone(),
        steps: cli.steps,
        epsilon: cli.epsilon,
        mass: cli.mass,
        lambda: cli.lambda,
        coupling: cli.coupling,
        snapshot_every: cli.snapshot_every,
        angle_mode: cli.angle_mode.map(|m| match m {
            Mode::Physical => AngleMode::Physical,
            Mode::Index => AngleMode::Index,
        }),
    });
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn validate(kind: Validation, config: &RunConfig) -> Result<bool, String> {
    std::fs::create_dir_all(&config.out_dir).map_err(|e| format!("{}: {e}", config.out_dir.display()))?;
    match kind {
        Validation::Clifford => {
            let base = if config.flavor == Flavor::ThreeD {
                config.clone()
            } else {
                RunConfig::defaults(Flavor::ThreeD)
            };
            let geometry = base.geometry().map_err(|e| e.to_string())?;
            let plan = StepPlan::new(Flavor::ThreeD, &geometry, &base.params(), base.angle_mode)
                .map_err(|e| e.to_string())?;
            let report = check_clifford(&plan).map_err(|e| e.to_string())?;
            let path = config.out_dir.join("clifford.json");
            write_json(&path, &report).map_err(|e| format!("{}: {e}", path.display()))?;
            for r in &report.relations {
                println!("{:<28} {:.3e} {}", r.relation, r.residual, if r.passed { "ok" } else { "FAILED" });
            }
            for f in &report.failures {
                eprintln!("{f}");
            }
            Ok(report.passed)
        }
        Validation::Convergence => {
            let table = convergence_study(&ConvergenceSetup::standard()).map_err(|e| e.to_string())?;
            let path = config.out_dir.join("convergence.json");
            write_json(&path, &table).map_err(|e| format!("{}: {e}", path.display()))?;
            for row in &table.rows {
                println!("eps {:<6} error {:.4e}", row.epsilon, row.error);
            }
            println!("ratios {:?}", table.ratios);
            Ok(table.monotone && table.ratios.iter().all(|r| (1.5..=4.0).contains(r)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Some(kind) = cli.validate {
        return match validate(kind, &config) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::FAILURE,
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        };
    }
    match run(&config) {
        Ok(summary) => {
            let dir = config.out_dir.display();
            println!(
                "{} steps, {} snapshots, norm drift {:.2e} -> {dir}",
                config.steps,
                summary.snapshots.len(),
                summary.series.max_norm_drift()
            );
            if !summary.series.boundary_warnings.is_empty() {
                eprintln!(
                    "warning: probability reached the boundary shell at {} recorded steps (first j = {})",
                    summary.series.boundary_warnings.len(),
                    summary.series.boundary_warnings[0]
                );
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
