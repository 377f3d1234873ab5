//! Run configuration, read from TOML. Unknown keys anywhere are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::calibration::{DEFAULT_INTERVALS, DEFAULT_TARGET_RATE};
use crate::datastore::{gen_gaussian_blobs, gen_rings, load_csv, load_idx, LabeledSet, OpenSplit};
use crate::error::{Error, Result};
use crate::network::Architecture;
use crate::trainer::TrainConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DatasetConfig {
    Blobs {
        num_classes: usize,
        per_class: usize,
        dim: usize,
        center_scale: f64,
        spread: f64,
        seed: u64,
    },
    Rings {
        num_classes: usize,
        per_class: usize,
        noise: f64,
        seed: u64,
    },
    /// Paths are relative to the config file.
    Csv { path: PathBuf },
    Idx { images: PathBuf, labels: PathBuf },
}

impl DatasetConfig {
    /// Generates or loads the full dataset with its original labels.
    pub fn load(&self, base_dir: &Path) -> Result<LabeledSet> {
        match self {
            DatasetConfig::Blobs {
                num_classes,
                per_class,
                dim,
                center_scale,
                spread,
                seed,
            } => gen_gaussian_blobs(*num_classes, *per_class, *dim, *center_scale, *spread, *seed),
            DatasetConfig::Rings {
                num_classes,
                per_class,
                noise,
                seed,
            } => gen_rings(*num_classes, *per_class, *noise, *seed),
            DatasetConfig::Csv { path } => load_csv(base_dir.join(path)),
            DatasetConfig::Idx { images, labels } => {
                load_idx(base_dir.join(images), base_dir.join(labels))
            }
        }
    }
}

/// Layer widths; input width, K and C come from the data and training config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub pre_widths: Vec<usize>,
    pub post_widths: Vec<usize>,
    pub embedding_dim: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        let arch = Architecture::new(1, 2, 1);
        Self {
            pre_widths: arch.pre_widths,
            post_widths: arch.post_widths,
            embedding_dim: arch.embedding_dim,
        }
    }
}

impl ModelConfig {
    pub fn architecture(&self, input_dim: usize, num_known: usize, num_dummy: usize) -> Architecture {
        Architecture {
            input_dim,
            pre_widths: self.pre_widths.clone(),
            post_widths: self.post_widths.clone(),
            embedding_dim: self.embedding_dim,
            num_known,
            num_dummy,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CalibrationConfig {
    pub target_rate: f64,
    pub intervals: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            target_rate: DEFAULT_TARGET_RATE,
            intervals: DEFAULT_INTERVALS,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub output_dir: PathBuf,
    pub dataset: DatasetConfig,
    pub split: OpenSplit,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub calibration: CalibrationConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// The configuration with every default filled in.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        let c = &self.calibration;
        if !(0.0..=1.0).contains(&c.target_rate) {
            return Err(Error::Config(format!("target_rate {} outside [0, 1]", c.target_rate)));
        }
        if c.intervals == 0 {
            return Err(Error::Config("calibration intervals must be >= 1".into()));
        }
        if self.model.embedding_dim == 0 || self.model.pre_widths.iter().chain(&self.model.post_widths).any(|&w| w == 0) {
            return Err(Error::Config("layer widths must be positive".into()));
        }
        let s = &self.split;
        if !(s.val_fraction > 0.0 && s.val_fraction < 1.0) {
            return Err(Error::Config(format!("val_fraction {} outside (0, 1)", s.val_fraction)));
        }
        if !(0.0..1.0).contains(&s.test_fraction) || s.val_fraction + s.test_fraction >= 1.0 {
            return Err(Error::Config(format!(
                "test_fraction {} leaves no training rows",
                s.test_fraction
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
output_dir = "out"

[dataset]
kind = "blobs"
num_classes = 4
per_class = 20
dim = 2
center_scale = 4.0
spread = 0.3
seed = 1

[split]
known = [0, 1, 2]
unknown = [3]
"#;

    #[test]
    fn defaults_are_filled() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.train, TrainConfig::default());
        assert_eq!(c.calibration.intervals, 100);
        assert_eq!(c.split.val_fraction, 0.1);
        let again = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn unknown_keys_rejected() {
        for (needle, replacement) in [
            ("seed = 1\n", "seed = 1\nsigma = 2\n"),
            ("[split]\n", "[split]\nshuffle = true\n"),
            ("output_dir", "typo = 1\noutput_dir"),
        ] {
            let text = MINIMAL.replacen(needle, replacement, 1);
            assert!(matches!(RunConfig::from_toml(&text), Err(Error::Config(_))), "{replacement}");
        }
        let text = format!("{MINIMAL}\n[train]\nbeta = 1.0\nlearnig_rate = 0.1\n");
        assert!(matches!(RunConfig::from_toml(&text), Err(Error::Config(_))));
    }

    #[test]
    fn invalid_values_rejected() {
        let text = format!("{MINIMAL}\n[train]\nbatch_size = 1\n");
        assert!(matches!(RunConfig::from_toml(&text), Err(Error::Config(_))));
        let text = format!("{MINIMAL}\n[calibration]\ntarget_rate = 1.5\n");
        assert!(matches!(RunConfig::from_toml(&text), Err(Error::Config(_))));
        let text = MINIMAL.replace("unknown = [3]", "unknown = [3]\nval_fraction = 0.5\ntest_fraction = 0.5");
        assert!(matches!(RunConfig::from_toml(&text), Err(Error::Config(_))));
    }

    #[test]
    fn dataset_kinds_parse() {
        let text = MINIMAL.replace(
            "kind = \"blobs\"\nnum_classes = 4\nper_class = 20\ndim = 2\ncenter_scale = 4.0\nspread = 0.3\nseed = 1",
            "kind = \"csv\"\npath = \"data.csv\"",
        );
        let c = RunConfig::from_toml(&text).unwrap();
        assert_eq!(c.dataset, DatasetConfig::Csv { path: "data.csv".into() });
    }
}
