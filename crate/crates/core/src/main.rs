use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vpl_landau::experiment::{check_outputs, run_experiment, validate_config_with, Experiment, RunOptions};
use vpl_landau::Error;

#[derive(Parser)]
#[command(name = "vpl-landau", version, about = "Fixed-mode linear Vlasov-Poisson-Landau experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Penrose margins and kernel oracles per (k, nu)
    PenroseScan(Flags),
    /// sup |K^nu - K^0| against nu and its fitted slope
    KernelConvergence(Flags),
    /// Collisionless density of the coupled mode and its envelope
    LandauDamping(Flags),
    /// e-folding times of |h| against nu
    EnhancedDissipation(Flags),
    /// Energy/dissipation monitor and theta-hat across nu
    Hypocoercivity(Flags),
    /// Interpolation lemma on closed-form data and on a Landau run
    StrainGuo(Flags),
    /// Symmetry, sign and invariant floors of L, and the sigma checks
    OperatorSelftest(Flags),
}

#[derive(Args)]
struct Flags {
    /// TOML config; without it the experiment's defaults are used
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory [default: the config's `output`, else out/<experiment>]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override a config value, e.g. --set run.nu=[1e-3,1e-4]
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads for sweep points (0 = all cores)
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Re-run the config stored in --out and compare against its CSVs
    #[arg(long)]
    check: bool,
}

const CONFIG_ERROR: u8 = 2;
const NUMERICAL_FAILURE: u8 = 3;

fn split(command: Command) -> (Experiment, Flags) {
    match command {
        Command::PenroseScan(f) => (Experiment::PenroseScan, f),
        Command::KernelConvergence(f) => (Experiment::KernelConvergence, f),
        Command::LandauDamping(f) => (Experiment::LandauDamping, f),
        Command::EnhancedDissipation(f) => (Experiment::EnhancedDissipation, f),
        Command::Hypocoercivity(f) => (Experiment::Hypocoercivity, f),
        Command::StrainGuo(f) => (Experiment::StrainGuo, f),
        Command::OperatorSelftest(f) => (Experiment::OperatorSelftest, f),
    }
}

fn config_text(experiment: Experiment, path: Option<&PathBuf>) -> Result<String, String> {
    let Some(path) = path else {
        return Ok(format!("experiment = \"{experiment}\"\n"));
    };
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    // the subcommand names the experiment; a config may omit it but not contradict it
    match toml::from_str::<toml::Table>(&text) {
        Ok(table) => match table.get("experiment").and_then(|v| v.as_str()) {
            Some(name) if name != experiment.name() => Err(format!(
                "{}: config is for `{name}`, not `{experiment}`",
                path.display()
            )),
            Some(_) => Ok(text),
            None => Ok(format!("experiment = \"{experiment}\"\n{text}")),
        },
        Err(e) => Err(format!("{}: {e}", path.display())),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let (experiment, flags) = split(Cli::parse().command);
    let default_out = || PathBuf::from("out").join(experiment.name());

    if flags.check {
        let dir = flags.out.unwrap_or_else(default_out);
        return match check_outputs(&dir, flags.threads) {
            Ok(diffs) if diffs.is_empty() => {
                println!("check passed: {}", dir.display());
                ExitCode::SUCCESS
            }
            Ok(diffs) => {
                for d in &diffs {
                    println!("MISMATCH {d}");
                }
                ExitCode::from(1)
            }
            Err(e @ (Error::Io(_) | Error::Format(_) | Error::Config(_))) => {
                eprintln!("error: {}: {e}", dir.display());
                ExitCode::from(CONFIG_ERROR)
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(NUMERICAL_FAILURE)
            }
        };
    }

    let cfg = match config_text(experiment, flags.config.as_ref())
        .and_then(|text| validate_config_with(&text, &flags.set).map_err(|e| e.to_string()))
    {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    let out = flags.out.or_else(|| cfg.output.clone()).unwrap_or_else(default_out);
    match run_experiment(&cfg, &RunOptions { out: out.clone(), threads: flags.threads }) {
        Ok(manifest) => {
            for c in &manifest.checks {
                println!(
                    "{} {}: {:e} ({})",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.value,
                    c.criterion
                );
            }
            if let (Some(stage), Some(err)) = (&manifest.failed_stage, &manifest.error) {
                eprintln!("stage `{stage}` failed: {err} (outputs in {} are partial)", out.display());
            }
            println!("manifest: {}", out.join("manifest.json").display());
            ExitCode::from(manifest.status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {}: {e}", out.display());
            ExitCode::from(CONFIG_ERROR)
        }
    }
}
