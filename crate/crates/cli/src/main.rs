//! `gmfair`: run fair-bandit experiments and prepare dataset bundles.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gmfair_core::environments::{dataset_prepare, Table};
use gmfair_core::harness::{preset, Experiment, PRESET_NAMES};
use gmfair_core::{emit_outputs, DatasetColumns, Error, ExperimentConfig};

/// Overrides the output directory of `run` when `--output` is absent.
const OUTPUT_ENV: &str = "GMFAIR_OUTPUT_DIR";

#[derive(Parser)]
#[command(
    name = "gmfair",
    version,
    about = "Group meritocratic fair contextual bandit experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write curves, selection rates and a manifest.
    Run(RunArgs),
    /// Normalize a dataset, fit the reward model and write a JSON bundle.
    PrepareDataset(PrepareArgs),
    /// Print the names of the built-in presets.
    ListPresets,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config file (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Name of a built-in preset.
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (default: the config's `output_dir`, else results/<name>).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Number of seeds, replacing the config's value.
    #[arg(long)]
    seeds: Option<usize>,
    /// Horizon, replacing the config's value.
    #[arg(long)]
    horizon: Option<usize>,
    /// Replace existing output files.
    #[arg(long)]
    overwrite: bool,
}

#[derive(Args)]
struct PrepareArgs {
    /// CSV split used for the normalization statistics.
    #[arg(long)]
    reference: PathBuf,
    /// CSV split that candidates are drawn from.
    #[arg(long)]
    sampling: PathBuf,
    /// Column roles (TOML): feature_columns, group_column, target_column, ...
    #[arg(long)]
    spec: PathBuf,
    /// Where to write the bundle.
    #[arg(long)]
    out: PathBuf,
}

fn output_dir(args: &RunArgs, cfg: &ExperimentConfig) -> PathBuf {
    if let Some(dir) = &args.output {
        return dir.clone();
    }
    if let Some(dir) = std::env::var_os(OUTPUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(dir);
    }
    if let Some(dir) = &cfg.output_dir {
        return dir.clone();
    }
    let name = if cfg.name.is_empty() {
        "experiment"
    } else {
        &cfg.name
    };
    Path::new("results").join(name)
}

fn run(args: RunArgs) -> Result<(), Error> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), _) => ExperimentConfig::from_toml_file(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => unreachable!("clap requires --config or --preset"),
    };
    if let Some(n) = args.seeds {
        cfg.num_seeds = n;
    }
    if let Some(t) = args.horizon {
        cfg.horizon = t;
    }
    let dir = output_dir(&args, &cfg);
    let bundle = Experiment::prepare(cfg)?.run()?;
    let files = emit_outputs(&bundle, &dir, args.overwrite)?;
    let summary = serde_json::json!({
        "status": "ok",
        "output_dir": dir,
        "files": files.len(),
        "wall_clock_seconds": bundle.manifest.wall_clock_seconds,
    });
    println!("{summary}");
    Ok(())
}

fn prepare(args: PrepareArgs) -> Result<(), Error> {
    let text = std::fs::read_to_string(&args.spec).map_err(|source| Error::Io {
        path: args.spec.clone(),
        source,
    })?;
    let columns: DatasetColumns = toml::from_str(&text)?;
    let data = dataset_prepare(
        &Table::from_path(&args.reference)?,
        &Table::from_path(&args.sampling)?,
        &columns,
    )?;
    data.save_bundle(&args.out)?;
    let group_sizes: Vec<usize> = (0..data.group_names.len())
        .map(|g| data.group_size(g))
        .collect();
    let summary = serde_json::json!({
        "status": "ok",
        "bundle": args.out,
        "rows": data.num_rows(),
        "dim": data.fitted_mu.len(),
        "groups": data.group_names,
        "group_sizes": group_sizes,
    });
    println!("{summary}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::PrepareDataset(args) => prepare(args),
        Command::ListPresets => {
            for name in PRESET_NAMES {
                println!("{name}");
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = serde_json::json!({ "error": e.kind(), "message": e.to_string() });
            eprintln!("{line}");
            ExitCode::FAILURE
        }
    }
}
