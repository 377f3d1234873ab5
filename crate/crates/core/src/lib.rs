//! Open-set recognition on a hand-written split MLP.
//!
//! A closed-set classifier is pretrained on the known classes, then fine-tuned
//! with two kinds of placeholders: extra dummy classifiers trained to rank
//! second on known data, and mixed hidden representations of different-class
//! pairs trained as the unknown class. A single bias on the dummy logit is
//! calibrated on held-out known data before evaluation.

pub mod calibration;
pub mod checkpoint;
#[cfg(feature = "cli")]
pub mod cli;
pub mod config;
pub mod datastore;
pub mod error;
pub mod gradcore;
pub mod metrics;
pub mod network;
pub mod pipeline;
pub mod placeholders;
pub mod trainer;

pub use error::{Error, Result};
