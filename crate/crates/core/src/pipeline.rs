//! Split, standardize, pretrain, fine-tune, calibrate, evaluate.

use std::path::{Path, PathBuf};

use crate::calibration::{select_bias, select_confidence_threshold, CalibrationResult};
use crate::checkpoint::Checkpoint;
use crate::config::{CalibrationConfig, ModelConfig, RunConfig};
use crate::datastore::{split_known_unknown, LabeledSet, OpenSets, OpenSplit, Standardizer};
use crate::error::{Error, Result};
use crate::metrics::{evaluate, EvalReport, Scoring};
use crate::network::SplitMlp;
use crate::trainer::{pretrain_closed, train_proser, TrainConfig, TrainLog, TrainMode};

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const TRAIN_LOG_FILE: &str = "train_log.tsv";
pub const CALIBRATION_FILE: &str = "calibration.json";
pub const REPORT_FILE: &str = "report.json";

/// Open-set split with features standardized by training statistics.
#[derive(Clone, Debug)]
pub struct Prepared {
    pub sets: OpenSets,
    pub standardizer: Standardizer,
}

pub fn prepare(data: &LabeledSet, split: &OpenSplit) -> Result<Prepared> {
    let mut sets = split_known_unknown(data, split)?;
    let standardizer = Standardizer::fit(&sets.train.features)?;
    sets.train = standardizer.apply_set(&sets.train)?;
    sets.val = standardizer.apply_set(&sets.val)?;
    sets.test = standardizer.apply_set(&sets.test)?;
    Ok(Prepared { sets, standardizer })
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub pretrained: SplitMlp,
    /// Fine-tuned and calibrated; equal to `pretrained` in baseline mode.
    pub model: SplitMlp,
    pub scoring: Scoring,
    pub log: TrainLog,
    pub calibration: CalibrationResult,
    pub report: EvalReport,
}

pub fn pretrain(prepared: &Prepared, model: &ModelConfig, train: &TrainConfig) -> Result<(SplitMlp, TrainLog)> {
    let sets = &prepared.sets;
    let arch = model.architecture(sets.train.dim(), sets.num_known(), train.num_dummy);
    pretrain_closed(&sets.train, &arch, train)
}

/// Everything after pretraining. Separate so several modes can share one
/// pretrained model.
pub fn finish(
    pretrained: &SplitMlp,
    pretrain_log: TrainLog,
    prepared: &Prepared,
    train: &TrainConfig,
    calibration: &CalibrationConfig,
) -> Result<Outcome> {
    let sets = &prepared.sets;
    let mut log = pretrain_log;
    let (model, scoring, calibration) = if train.train_mode == TrainMode::Baseline {
        let result = select_confidence_threshold(pretrained, &sets.val, calibration.target_rate, calibration.intervals)?;
        let scoring = Scoring::MaxSoftmax {
            threshold: result.chosen_bias,
        };
        (pretrained.clone(), scoring, result)
    } else {
        let (mut model, finetune_log) = train_proser(pretrained, &sets.train, train)?;
        log.extend(finetune_log);
        let result = select_bias(&model, &sets.val, calibration.target_rate, calibration.intervals)?;
        model.calibration_bias = result.chosen_bias;
        (model, Scoring::Knownness, result)
    };
    let report = evaluate(&model, &sets.test, scoring, sets.openness_counts())?;
    Ok(Outcome {
        pretrained: pretrained.clone(),
        model,
        scoring,
        log,
        calibration,
        report,
    })
}

pub fn execute(
    prepared: &Prepared,
    model: &ModelConfig,
    train: &TrainConfig,
    calibration: &CalibrationConfig,
) -> Result<Outcome> {
    let (pretrained, log) = pretrain(prepared, model, train)?;
    finish(&pretrained, log, prepared, train, calibration)
}

/// A finished run: outcome plus the checkpoint to persist.
#[derive(Clone, Debug)]
pub struct Run {
    pub prepared: Prepared,
    pub outcome: Outcome,
    pub checkpoint: Checkpoint,
}

/// Runs a config in memory. `base_dir` resolves dataset paths.
pub fn run(config: &RunConfig, base_dir: &Path) -> Result<Run> {
    config.validate()?;
    let data = config.dataset.load(base_dir)?;
    let prepared = prepare(&data, &config.split)?;
    log::info!(
        "split: {} train, {} val, {} test rows; K = {}",
        prepared.sets.train.len(),
        prepared.sets.val.len(),
        prepared.sets.test.len(),
        prepared.sets.num_known()
    );
    let outcome = execute(&prepared, &config.model, &config.train, &config.calibration)?;
    let checkpoint = Checkpoint::new(
        &outcome.model,
        outcome.scoring,
        prepared.sets.known_class_ids.clone(),
        prepared.standardizer.clone(),
        config.train.clone(),
    );
    Ok(Run {
        prepared,
        outcome,
        checkpoint,
    })
}

/// Writes checkpoint, training log, calibration result and report into `dir`,
/// creating it if needed. Returns the written paths.
pub fn write_artifacts(run: &Run, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let calibration = format!(
        "{}\n",
        serde_json::to_string_pretty(&run.outcome.calibration).expect("calibration serializes")
    );
    let files = [
        (CHECKPOINT_FILE, run.checkpoint.to_json()),
        (TRAIN_LOG_FILE, run.outcome.log.to_tsv()),
        (CALIBRATION_FILE, calibration),
        (REPORT_FILE, run.outcome.report.to_json()),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(name);
        std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridCell {
    pub x: f64,
    pub y: f64,
    pub label: usize,
    pub score: f64,
}

/// `resolution` evenly spaced values from `lo` to `hi` inclusive; the midpoint
/// when `resolution` is 1.
pub fn axis_points(lo: f64, hi: f64, resolution: usize) -> Vec<f64> {
    match resolution {
        0 => Vec::new(),
        1 => vec![0.5 * (lo + hi)],
        n => {
            let step = (hi - lo) / (n - 1) as f64;
            (0..n).map(|i| if i == n - 1 { hi } else { lo + i as f64 * step }).collect()
        }
    }
}

/// Open-set labels and scores over a `resolution × resolution` grid given in
/// raw (unstandardized) input coordinates. Rows run over x fastest.
pub fn decision_grid(
    model: &SplitMlp,
    scoring: Scoring,
    standardizer: &Standardizer,
    x_range: (f64, f64),
    y_range: (f64, f64),
    resolution: usize,
) -> Result<Vec<GridCell>> {
    if model.input_dim() != 2 {
        return Err(Error::Contract(format!(
            "decision grid needs a 2-D model, this one takes {} inputs",
            model.input_dim()
        )));
    }
    if resolution == 0 {
        return Err(Error::Config("grid resolution must be >= 1".into()));
    }
    let xs = axis_points(x_range.0, x_range.1, resolution);
    let ys = axis_points(y_range.0, y_range.1, resolution);
    let points: Vec<f64> = ys.iter().flat_map(|&y| xs.iter().flat_map(move |&x| [x, y])).collect();
    let raw = crate::gradcore::Matrix::from_vec(xs.len() * ys.len(), 2, points)?;
    let scored = scoring.score_rows(model, &standardizer.apply(&raw)?)?;
    Ok(raw
        .row_iter()
        .zip(scored.labels.iter().zip(&scored.scores))
        .map(|(p, (&label, &score))| GridCell {
            x: p[0],
            y: p[1],
            label,
            score,
        })
        .collect())
}

pub fn grid_csv(cells: &[GridCell]) -> String {
    let mut out = String::from("x,y,label,score\n");
    for c in cells {
        out.push_str(&format!("{},{},{},{}\n", c.x, c.y, c.label, c.score));
    }
    out
}
