//! Runs every training mode from one config across several seeds and prints
//! AUC, closed-set accuracy and macro-F1 per mode. All modes in a seed share
//! one pretrained model.
//!
//! cargo run --release --example ablation -- [config] [seeds] [first_seed]
//!
//! GAMMA, BETA and LR in the environment override the config.

use std::path::Path;
use std::time::Instant;

use osr_core::config::RunConfig;
use osr_core::config::DatasetConfig;
use osr_core::pipeline::{finish, prepare, pretrain};
use osr_core::trainer::{TrainConfig, TrainMode};

const MODES: [TrainMode; 4] = [TrainMode::Baseline, TrainMode::DummyOnly, TrainMode::MixupOnly, TrainMode::Full];

fn env_f64(name: &str) -> Option<f64> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

fn main() -> osr_core::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = Path::new(args.first().map_or("configs/blobs6.toml", String::as_str));
    let seeds: u64 = args.get(1).and_then(|a| a.parse().ok()).unwrap_or(5);
    let first: u64 = args.get(2).and_then(|a| a.parse().ok()).unwrap_or(0);
    let mut config = RunConfig::load(path)?;
    let base_dir = path.parent().unwrap_or(Path::new("."));
    config.train.gamma = env_f64("GAMMA").unwrap_or(config.train.gamma);
    config.train.beta = env_f64("BETA").unwrap_or(config.train.beta);
    config.train.learning_rate = env_f64("LR").unwrap_or(config.train.learning_rate);

    let mut totals = [[0.0f64; 3]; 4];
    for seed in first..first + seeds {
        let start = Instant::now();
        let mut run = config.clone();
        if let DatasetConfig::Blobs { seed: s, .. } | DatasetConfig::Rings { seed: s, .. } = &mut run.dataset {
            *s = seed;
        }
        run.split.seed = seed;
        run.train.seed = seed;
        let prepared = prepare(&run.dataset.load(base_dir)?, &run.split)?;
        let (pretrained, log) = pretrain(&prepared, &run.model, &run.train)?;
        print!("seed {seed}:");
        for (mode, total) in MODES.iter().zip(&mut totals) {
            let train = TrainConfig { train_mode: *mode, ..run.train.clone() };
            let r = finish(&pretrained, log.clone(), &prepared, &train, &run.calibration)?.report;
            let auc = r.auc.unwrap_or(f64::NAN);
            for (t, v) in total.iter_mut().zip([auc, r.argmax_accuracy, r.macro_f1]) {
                *t += v;
            }
            print!(" {mode:?} auc={auc:.4} acc={:.4}", r.argmax_accuracy);
        }
        println!(" ({:.1}s)", start.elapsed().as_secs_f64());
    }
    let n = seeds as f64;
    for (mode, [auc, acc, f1]) in MODES.iter().zip(totals) {
        println!("mean {mode:?}: auc {:.4}  acc {:.4}  f1 {:.4}", auc / n, acc / n, f1 / n);
    }
    Ok(())
}
