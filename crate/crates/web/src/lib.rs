//! Browser demo over the core crate. [`Session`] holds the logic and builds
//! natively; [`Demo`] is its JavaScript face.

use osr_core::calibration::CalibrationResult;
use osr_core::config::{CalibrationConfig, ModelConfig};
use osr_core::datastore::{gen_gaussian_blobs, LabeledSet, OpenSplit};
use osr_core::metrics::{evaluate, EvalReport, Scoring};
use osr_core::network::SplitMlp;
use osr_core::pipeline::{decision_grid, execute, prepare, Prepared};
use osr_core::trainer::{TrainConfig, TrainMode};
use osr_core::{Error, Result};
use wasm_bindgen::prelude::*;

pub const NUM_CLASSES: usize = 10;
pub const NUM_KNOWN: usize = 6;
pub const PER_CLASS: usize = 150;

pub fn parse_mode(name: &str) -> Result<TrainMode> {
    match name {
        "baseline" => Ok(TrainMode::Baseline),
        "dummy_only" => Ok(TrainMode::DummyOnly),
        "mixup_only" => Ok(TrainMode::MixupOnly),
        "full" => Ok(TrainMode::Full),
        other => Err(Error::Config(format!("unknown training mode {other:?}"))),
    }
}

/// A trained model on a fresh blob task plus an adjustable threshold.
pub struct Session {
    data: LabeledSet,
    prepared: Prepared,
    model: SplitMlp,
    scoring: Scoring,
    calibration: CalibrationResult,
}

impl Session {
    pub fn train(seed: u64, mode: TrainMode, gamma: f64) -> Result<Self> {
        let data = gen_gaussian_blobs(NUM_CLASSES, PER_CLASS, 2, 5.0, 0.6, seed)?;
        let split = OpenSplit::new((0..NUM_KNOWN).collect(), (NUM_KNOWN..NUM_CLASSES).collect(), seed);
        let prepared = prepare(&data, &split)?;
        let model = ModelConfig {
            pre_widths: vec![32, 32],
            post_widths: vec![16],
            embedding_dim: 8,
        };
        let train = TrainConfig {
            gamma,
            pretrain_learning_rate: Some(0.01),
            learning_rate: 0.003,
            batch_size: 64,
            pretrain_epochs: 60,
            finetune_epochs: 60,
            train_mode: mode,
            seed,
            ..TrainConfig::default()
        };
        let outcome = execute(&prepared, &model, &train, &CalibrationConfig::default())?;
        Ok(Self {
            data,
            prepared,
            model: outcome.model,
            scoring: outcome.scoring,
            calibration: outcome.calibration,
        })
    }

    /// `x, y, original class, 1 if known else 0` per row, raw coordinates.
    pub fn points(&self) -> Vec<f64> {
        self.data
            .features
            .row_iter()
            .zip(&self.data.labels)
            .flat_map(|(p, &c)| [p[0], p[1], c as f64, f64::from(u8::from(c < NUM_KNOWN))])
            .collect()
    }

    pub fn threshold(&self) -> f64 {
        self.scoring.threshold(&self.model)
    }

    pub fn calibrated_threshold(&self) -> f64 {
        self.calibration.chosen_bias
    }

    /// Span of the validation statistic the calibration searched.
    pub fn threshold_range(&self) -> (f64, f64) {
        (self.calibration.gap_min, self.calibration.gap_max)
    }

    pub fn set_threshold(&mut self, value: f64) {
        match &mut self.scoring {
            Scoring::Knownness => self.model.calibration_bias = value,
            Scoring::MaxSoftmax { threshold } => *threshold = value,
        }
    }

    /// `label, score` per cell, x fastest.
    pub fn grid(&self, resolution: usize, x: (f64, f64), y: (f64, f64)) -> Result<Vec<f64>> {
        let cells = decision_grid(&self.model, self.scoring, &self.prepared.standardizer, x, y, resolution)?;
        Ok(cells.iter().flat_map(|c| [c.label as f64, c.score]).collect())
    }

    pub fn report(&self) -> Result<EvalReport> {
        let sets = &self.prepared.sets;
        evaluate(&self.model, &sets.test, self.scoring, sets.openness_counts())
    }
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub struct Demo {
    inner: Session,
}

#[wasm_bindgen]
impl Demo {
    /// Generates a task from `seed` and trains in `mode`
    /// (`baseline`, `dummy_only`, `mixup_only` or `full`).
    #[wasm_bindgen(constructor)]
    pub fn new(seed: u32, mode: &str, gamma: f64) -> std::result::Result<Demo, JsError> {
        let mode = parse_mode(mode).map_err(js)?;
        Ok(Demo {
            inner: Session::train(u64::from(seed), mode, gamma).map_err(js)?,
        })
    }

    pub fn points(&self) -> Vec<f64> {
        self.inner.points()
    }

    #[wasm_bindgen(js_name = numKnown)]
    pub fn num_known(&self) -> usize {
        NUM_KNOWN
    }

    pub fn threshold(&self) -> f64 {
        self.inner.threshold()
    }

    #[wasm_bindgen(js_name = calibratedThreshold)]
    pub fn calibrated_threshold(&self) -> f64 {
        self.inner.calibrated_threshold()
    }

    #[wasm_bindgen(js_name = thresholdMin)]
    pub fn threshold_min(&self) -> f64 {
        self.inner.threshold_range().0
    }

    #[wasm_bindgen(js_name = thresholdMax)]
    pub fn threshold_max(&self) -> f64 {
        self.inner.threshold_range().1
    }

    #[wasm_bindgen(js_name = setThreshold)]
    pub fn set_threshold(&mut self, value: f64) {
        self.inner.set_threshold(value);
    }

    pub fn grid(
        &self,
        resolution: usize,
        x_lo: f64,
        x_hi: f64,
        y_lo: f64,
        y_hi: f64,
    ) -> std::result::Result<Vec<f64>, JsError> {
        self.inner.grid(resolution, (x_lo, x_hi), (y_lo, y_hi)).map_err(js)
    }

    /// Test-set report at the current threshold, as JSON.
    #[wasm_bindgen(js_name = reportJson)]
    pub fn report_json(&self) -> std::result::Result<String, JsError> {
        Ok(self.inner.report().map_err(js)?.to_json())
    }
}

/// Openness in percent for `train` known classes out of `test` test classes.
#[wasm_bindgen(js_name = opennessPercent)]
pub fn openness_percent(train: usize, test: usize) -> std::result::Result<f64, JsError> {
    osr_core::metrics::openness(train, test).map_err(js)
}
