//! Versioned JSON checkpoint. Floats are written in shortest round-trip form,
//! so save followed by load reproduces every weight bit for bit.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datastore::Standardizer;
use crate::error::{Error, Result};
use crate::gradcore::{Activation, DenseLayer, Matrix};
use crate::metrics::{ScoreKind, Scoring};
use crate::network::SplitMlp;
use crate::trainer::TrainConfig;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerRecord {
    pub activation: Activation,
    pub weights: Matrix,
    pub biases: Vec<f64>,
}

impl LayerRecord {
    fn from_layer(layer: &DenseLayer) -> Self {
        Self {
            activation: layer.activation(),
            weights: layer.weights().clone(),
            biases: layer.biases().to_vec(),
        }
    }

    fn to_layer(&self) -> Result<DenseLayer> {
        DenseLayer::new(self.weights.clone(), self.biases.clone(), self.activation)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Checkpoint {
    pub format_version: u32,
    pub input_dim: usize,
    pub pre_layers: Vec<LayerRecord>,
    pub post_layers: Vec<LayerRecord>,
    pub closed_head: LayerRecord,
    pub dummy_head: LayerRecord,
    pub calibration_bias: f64,
    /// How the saved model rejects: dummy head or closed-head confidence.
    pub score: ScoreKind,
    /// Confidence threshold when `score` is max-softmax.
    pub confidence_threshold: Option<f64>,
    /// Original dataset class id of each known label.
    pub known_class_ids: Vec<usize>,
    pub standardizer: Standardizer,
    pub train_config: TrainConfig,
}

impl Checkpoint {
    pub fn new(
        model: &SplitMlp,
        scoring: Scoring,
        known_class_ids: Vec<usize>,
        standardizer: Standardizer,
        train_config: TrainConfig,
    ) -> Self {
        let records = |layers: &[DenseLayer]| layers.iter().map(LayerRecord::from_layer).collect();
        Self {
            format_version: FORMAT_VERSION,
            input_dim: model.input_dim(),
            pre_layers: records(model.pre_layers()),
            post_layers: records(model.post_layers()),
            closed_head: LayerRecord::from_layer(model.closed_head()),
            dummy_head: LayerRecord::from_layer(model.dummy_head()),
            calibration_bias: model.calibration_bias,
            score: scoring.kind(),
            confidence_threshold: match scoring {
                Scoring::MaxSoftmax { threshold } => Some(threshold),
                Scoring::Knownness => None,
            },
            known_class_ids,
            standardizer,
            train_config,
        }
    }

    pub fn model(&self) -> Result<SplitMlp> {
        let layers = |records: &[LayerRecord]| records.iter().map(LayerRecord::to_layer).collect::<Result<Vec<_>>>();
        let mut model = SplitMlp::from_layers(
            self.input_dim,
            layers(&self.pre_layers)?,
            layers(&self.post_layers)?,
            self.closed_head.to_layer()?,
            self.dummy_head.to_layer()?,
        )?;
        model.calibration_bias = self.calibration_bias;
        if self.standardizer.mean.len() != self.input_dim {
            return Err(Error::Format(format!(
                "standardizer has {} dimensions, model expects {}",
                self.standardizer.mean.len(),
                self.input_dim
            )));
        }
        Ok(model)
    }

    pub fn scoring(&self) -> Result<Scoring> {
        match (self.score, self.confidence_threshold) {
            (ScoreKind::Knownness, _) => Ok(Scoring::Knownness),
            (ScoreKind::MaxSoftmax, Some(threshold)) => Ok(Scoring::MaxSoftmax { threshold }),
            (ScoreKind::MaxSoftmax, None) => Err(Error::Format(
                "max-softmax checkpoint without a confidence threshold".into(),
            )),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("checkpoint serializes");
        s.push('\n');
        s
    }

    /// Checks the version before the rest of the document so an old or newer
    /// file reports a version error rather than a field error.
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Format(format!("checkpoint: {e}")))?;
        let found = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::Format("checkpoint has no format_version".into()))?;
        if found != u64::from(FORMAT_VERSION) {
            return Err(Error::Version {
                found,
                expected: u64::from(FORMAT_VERSION),
            });
        }
        let checkpoint: Checkpoint =
            serde_json::from_value(value).map_err(|e| Error::Format(format!("checkpoint: {e}")))?;
        checkpoint.model()?;
        checkpoint.scoring()?;
        Ok(checkpoint)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}
