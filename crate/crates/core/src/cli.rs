//! `osr` command line: run, evaluate, boundary-grid, gen-data.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::checkpoint::Checkpoint;
use crate::config::RunConfig;
use crate::datastore::{load_csv, split_known_unknown};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, Scoring};
use crate::pipeline::{decision_grid, grid_csv, run, write_artifacts};

#[derive(Debug, Parser)]
#[command(name = "osr", version, about = "Open-set recognition with placeholder training")]
pub struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train, calibrate and evaluate from a config; write all artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory, overriding `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a checkpoint and print the report.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Rebuild the test split from this config.
        #[arg(long, required_unless_present = "data", conflicts_with = "data")]
        config: Option<PathBuf>,
        /// CSV test set in model label space (K marks unknown rows), raw features.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export labels and knownness scores over a 2-D grid as CSV.
    BoundaryGrid {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Cells per axis.
        #[arg(long, default_value_t = 100)]
        resolution: usize,
        /// `lo,hi` for both axes or `xlo,xhi,ylo,yhi`, raw input coordinates.
        #[arg(long, default_value = "-10,10", allow_hyphen_values = true)]
        range: String,
        /// Replace the checkpoint's rejection threshold.
        #[arg(long, allow_hyphen_values = true)]
        bias: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the configured dataset as CSV (original labels).
    GenData {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn base_dir(config_path: &Path) -> &Path {
    config_path.parent().unwrap_or(Path::new("."))
}

fn emit(out: Option<&Path>, contents: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, contents).map_err(|e| Error::io(path, e)),
        None => std::io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

pub fn parse_range(text: &str) -> Result<((f64, f64), (f64, f64))> {
    let values = text
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| Error::Config(format!("bad --range {text:?}: {e}")))?;
    let (x, y) = match values[..] {
        [lo, hi] => ((lo, hi), (lo, hi)),
        [xlo, xhi, ylo, yhi] => ((xlo, xhi), (ylo, yhi)),
        _ => {
            return Err(Error::Config(format!(
                "--range takes 2 or 4 comma-separated numbers, got {text:?}"
            )))
        }
    };
    for (lo, hi) in [x, y] {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Config(format!("--range needs finite lo < hi, got {text:?}")));
        }
    }
    Ok((x, y))
}

fn cmd_run(config_path: &Path, out: Option<&Path>) -> Result<()> {
    let config = RunConfig::load(config_path)?;
    let run = run(&config, base_dir(config_path))?;
    let dir = out.unwrap_or(&config.output_dir);
    let written = write_artifacts(&run, dir)?;
    let r = &run.outcome.report;
    match r.auc {
        Some(auc) => println!("auc {auc:.4}  macro_f1 {:.4}  closed_accuracy {:.4}", r.macro_f1, r.argmax_accuracy),
        None => println!("auc omitted  macro_f1 {:.4}  closed_accuracy {:.4}", r.macro_f1, r.argmax_accuracy),
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_evaluate(checkpoint: &Path, config: Option<&Path>, data: Option<&Path>, out: Option<&Path>) -> Result<()> {
    let ck = Checkpoint::load(checkpoint)?;
    let model = ck.model()?;
    let k = model.num_known();
    let (test, counts) = match (config, data) {
        (Some(path), _) => {
            let config = RunConfig::load(path)?;
            let data = config.dataset.load(base_dir(path))?;
            let sets = split_known_unknown(&data, &config.split)?;
            if sets.known_class_ids != ck.known_class_ids {
                return Err(Error::Contract(format!(
                    "config known classes {:?} differ from checkpoint {:?}",
                    sets.known_class_ids, ck.known_class_ids
                )));
            }
            let counts = sets.openness_counts();
            (sets.test, counts)
        }
        (None, Some(path)) => {
            let test = load_csv(path)?;
            let unknown = usize::from(test.labels.contains(&k));
            (test, (k, k + unknown))
        }
        (None, None) => return Err(Error::Config("evaluate needs --config or --data".into())),
    };
    let test = ck.standardizer.apply_set(&test)?;
    let report = evaluate(&model, &test, ck.scoring()?, counts)?;
    emit(out, &report.to_json())
}

fn cmd_boundary_grid(
    checkpoint: &Path,
    resolution: usize,
    range: &str,
    bias: Option<f64>,
    out: Option<&Path>,
) -> Result<()> {
    let ck = Checkpoint::load(checkpoint)?;
    let mut model = ck.model()?;
    let mut scoring = ck.scoring()?;
    if let Some(b) = bias {
        match &mut scoring {
            Scoring::Knownness => model.calibration_bias = b,
            Scoring::MaxSoftmax { threshold } => *threshold = b,
        }
    }
    let (x, y) = parse_range(range)?;
    let cells = decision_grid(&model, scoring, &ck.standardizer, x, y, resolution)?;
    emit(out, &grid_csv(&cells))
}

fn cmd_gen_data(config_path: &Path, out: Option<&Path>) -> Result<()> {
    let config = RunConfig::load(config_path)?;
    let data = config.dataset.load(base_dir(config_path))?;
    emit(out, &data.to_csv())
}

pub fn dispatch(command: &Command) -> Result<()> {
    match command {
        Command::Run { config, out } => cmd_run(config, out.as_deref()),
        Command::Evaluate {
            checkpoint,
            config,
            data,
            out,
        } => cmd_evaluate(checkpoint, config.as_deref(), data.as_deref(), out.as_deref()),
        Command::BoundaryGrid {
            checkpoint,
            resolution,
            range,
            bias,
            out,
        } => cmd_boundary_grid(checkpoint, *resolution, range, *bias, out.as_deref()),
        Command::GenData { config, out } => cmd_gen_data(config, out.as_deref()),
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    match dispatch(&cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0,1").unwrap(), ((0.0, 1.0), (0.0, 1.0)));
        assert_eq!(parse_range("-2,2,-1,3").unwrap(), ((-2.0, 2.0), (-1.0, 3.0)));
        for bad in ["1", "1,0", "a,b", "0,1,2", "0,inf"] {
            assert!(matches!(parse_range(bad), Err(Error::Config(_))), "{bad}");
        }
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(main_with_args(["osr"]), 2);
        assert_eq!(main_with_args(["osr", "run"]), 2);
        assert_eq!(main_with_args(["osr", "frobnicate"]), 2);
        assert_eq!(main_with_args(["osr", "--help"]), 0);
    }
}
