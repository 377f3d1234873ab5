//! Labeled feature sets, synthetic generators, CSV/IDX loaders and the
//! known/unknown split.

use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gradcore::Matrix;

#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSet {
    pub features: Matrix,
    pub labels: Vec<usize>,
    /// Declared class count; every label is below it.
    pub num_classes: usize,
    pub class_names: Option<Vec<String>>,
}

impl LabeledSet {
    pub fn new(features: Matrix, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if features.rows() != labels.len() {
            return Err(Error::dimension(
                "labeled set",
                features.shape(),
                format!("{} labels", labels.len()),
            ));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
            return Err(Error::Index {
                what: "class label",
                index: bad,
                bound: num_classes,
            });
        }
        Ok(Self {
            features,
            labels,
            num_classes,
            class_names: None,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn subset(&self, rows: &[usize]) -> Result<LabeledSet> {
        Ok(LabeledSet {
            features: self.features.select_rows(rows)?,
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            num_classes: self.num_classes,
            class_names: self.class_names.clone(),
        })
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Features as CSV text, label in the last column.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (row, label) in self.features.row_iter().zip(&self.labels) {
            for v in row {
                out.push_str(&format!("{v},"));
            }
            out.push_str(&format!("{label}\n"));
        }
        out
    }
}

/// Isotropic Gaussian clusters around centers drawn uniformly in
/// `[-center_scale, center_scale]^dim`. Rows are grouped by class.
pub fn gen_gaussian_blobs(
    num_classes: usize,
    per_class: usize,
    dim: usize,
    center_scale: f64,
    spread: f64,
    seed: u64,
) -> Result<LabeledSet> {
    if num_classes == 0 || per_class == 0 || dim == 0 {
        return Err(Error::Contract("blob counts must be positive".into()));
    }
    if !(center_scale >= 0.0 && spread >= 0.0) {
        return Err(Error::Domain("center_scale and spread must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<Vec<f64>> = (0..num_classes)
        .map(|_| {
            (0..dim)
                .map(|_| rng.random_range(-center_scale..=center_scale))
                .collect()
        })
        .collect();
    let mut data = Vec::with_capacity(num_classes * per_class * dim);
    let mut labels = Vec::with_capacity(num_classes * per_class);
    for (class, center) in centers.iter().enumerate() {
        for _ in 0..per_class {
            for &c in center {
                let z: f64 = rng.sample(StandardNormal);
                data.push(c + spread * z);
            }
            labels.push(class);
        }
    }
    LabeledSet::new(
        Matrix::from_vec(labels.len(), dim, data)?,
        labels,
        num_classes,
    )
}

/// Concentric 2-D rings: class `c` lies at radius `c + 1` with Gaussian radial
/// noise of std `noise`.
pub fn gen_rings(num_classes: usize, per_class: usize, noise: f64, seed: u64) -> Result<LabeledSet> {
    if num_classes == 0 || per_class == 0 {
        return Err(Error::Contract("ring counts must be positive".into()));
    }
    if noise.is_nan() || noise < 0.0 {
        return Err(Error::Domain("noise must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(num_classes * per_class * 2);
    let mut labels = Vec::with_capacity(num_classes * per_class);
    for class in 0..num_classes {
        for _ in 0..per_class {
            let angle = rng.random_range(0.0..std::f64::consts::TAU);
            let z: f64 = rng.sample(StandardNormal);
            let r = (class + 1) as f64 + noise * z;
            data.push(r * angle.cos());
            data.push(r * angle.sin());
            labels.push(class);
        }
    }
    LabeledSet::new(
        Matrix::from_vec(labels.len(), 2, data)?,
        labels,
        num_classes,
    )
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<LabeledSet> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text)
}

/// Rows of `D` decimal features followed by an integer label. A first line
/// that does not parse as numbers is treated as a header.
pub fn parse_csv(text: &str) -> Result<LabeledSet> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut dim: Option<usize> = None;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(i + 1, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(i + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed = parse_record(&record);
        let (features, label) = match parsed {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(message) => return Err(Error::Parse { line, message }),
        };
        match dim {
            None => dim = Some(features.len()),
            Some(d) if d != features.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {d} features, found {}", features.len()),
                })
            }
            Some(_) => {}
        }
        data.extend(features);
        labels.push(label);
    }
    let dim = dim.ok_or(Error::Parse {
        line: 1,
        message: "no data rows".into(),
    })?;
    let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
    LabeledSet::new(Matrix::from_vec(labels.len(), dim, data)?, labels, num_classes)
}

fn parse_record(record: &csv::StringRecord) -> std::result::Result<(Vec<f64>, usize), String> {
    if record.len() < 2 {
        return Err("need at least one feature and a label".into());
    }
    let n = record.len();
    let mut features = Vec::with_capacity(n - 1);
    for cell in record.iter().take(n - 1) {
        let v: f64 = cell
            .parse()
            .map_err(|_| format!("feature {cell:?} is not a number"))?;
        if !v.is_finite() {
            return Err(format!("feature {cell:?} is not finite"));
        }
        features.push(v);
    }
    let label_cell = &record[n - 1];
    let label = label_cell
        .parse()
        .map_err(|_| format!("label {label_cell:?} is not a nonnegative integer"))?;
    Ok((features, label))
}

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn read_be_u32(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Format(format!("{what}: truncated header")))
}

pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<LabeledSet> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let images = std::fs::read(ip).map_err(|e| Error::io(ip, e))?;
    let labels = std::fs::read(lp).map_err(|e| Error::io(lp, e))?;
    parse_idx(&images, &labels)
}

/// Big-endian IDX unsigned-byte files: images `[n, rows, cols]`, labels `[n]`.
/// Pixels are scaled to `[0, 1]` and flattened row-major.
pub fn parse_idx(images: &[u8], labels: &[u8]) -> Result<LabeledSet> {
    let magic = read_be_u32(images, 0, "images")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::Format(format!(
            "images: magic {magic:#010x}, expected {IDX_IMAGES_MAGIC:#010x}"
        )));
    }
    let magic = read_be_u32(labels, 0, "labels")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::Format(format!(
            "labels: magic {magic:#010x}, expected {IDX_LABELS_MAGIC:#010x}"
        )));
    }
    let n = read_be_u32(images, 4, "images")? as usize;
    let rows = read_be_u32(images, 8, "images")? as usize;
    let cols = read_be_u32(images, 12, "images")? as usize;
    let n_labels = read_be_u32(labels, 4, "labels")? as usize;
    if n != n_labels {
        return Err(Error::Format(format!(
            "images file holds {n} items but labels file holds {n_labels}"
        )));
    }
    let pixels = rows * cols;
    let image_payload = &images[16..];
    if image_payload.len() != n * pixels {
        return Err(Error::Format(format!(
            "images: expected {} payload bytes, found {}",
            n * pixels,
            image_payload.len()
        )));
    }
    let label_payload = &labels[8..];
    if label_payload.len() != n {
        return Err(Error::Format(format!(
            "labels: expected {n} payload bytes, found {}",
            label_payload.len()
        )));
    }
    let data = image_payload.iter().map(|&p| f64::from(p) / 255.0).collect();
    let labels: Vec<usize> = label_payload.iter().map(|&l| usize::from(l)).collect();
    let num_classes = labels.iter().max().map_or(0, |&m| m + 1);
    LabeledSet::new(Matrix::from_vec(n, pixels, data)?, labels, num_classes)
}

pub const DEFAULT_VAL_FRACTION: f64 = 0.1;
pub const DEFAULT_TEST_FRACTION: f64 = 0.3;

/// Which original classes are known and unknown, and how known rows are
/// divided between train, validation and test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenSplit {
    pub known: Vec<usize>,
    pub unknown: Vec<usize>,
    #[serde(default = "default_val_fraction")]
    pub val_fraction: f64,
    #[serde(default = "default_test_fraction")]
    pub test_fraction: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_val_fraction() -> f64 {
    DEFAULT_VAL_FRACTION
}

fn default_test_fraction() -> f64 {
    DEFAULT_TEST_FRACTION
}

impl OpenSplit {
    pub fn new(known: Vec<usize>, unknown: Vec<usize>, seed: u64) -> Self {
        Self {
            known,
            unknown,
            val_fraction: DEFAULT_VAL_FRACTION,
            test_fraction: DEFAULT_TEST_FRACTION,
            seed,
        }
    }

    pub fn num_known(&self) -> usize {
        self.known.len()
    }

    /// Known classes sorted ascending; position is the new label.
    pub fn known_sorted(&self) -> Vec<usize> {
        let mut k = self.known.clone();
        k.sort_unstable();
        k
    }
}

/// Result of [`split_known_unknown`]. `*_rows` give the original row index of
/// every row in the corresponding set.
#[derive(Clone, Debug)]
pub struct OpenSets {
    pub train: LabeledSet,
    pub val: LabeledSet,
    /// Known rows relabeled to `0..K`, unknown rows labeled `K`.
    pub test: LabeledSet,
    pub train_rows: Vec<usize>,
    pub val_rows: Vec<usize>,
    pub test_rows: Vec<usize>,
    pub known_class_ids: Vec<usize>,
    pub unknown_class_ids: Vec<usize>,
}

impl OpenSets {
    pub fn num_known(&self) -> usize {
        self.known_class_ids.len()
    }

    /// Class counts for the openness measure: (training classes, test classes).
    pub fn openness_counts(&self) -> (usize, usize) {
        let k = self.known_class_ids.len();
        (k, k + self.unknown_class_ids.len())
    }
}

pub fn split_known_unknown(set: &LabeledSet, split: &OpenSplit) -> Result<OpenSets> {
    let known = split.known_sorted();
    let unknown: BTreeSet<usize> = split.unknown.iter().copied().collect();
    if known.len() < 2 {
        return Err(Error::Contract(format!(
            "need at least 2 known classes, got {}",
            known.len()
        )));
    }
    if known.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Contract("duplicate known class id".into()));
    }
    if let Some(c) = known.iter().find(|c| unknown.contains(c)) {
        return Err(Error::Contract(format!("class {c} is both known and unknown")));
    }
    if let Some(&c) = known.iter().chain(&unknown).find(|&&c| c >= set.num_classes) {
        return Err(Error::Contract(format!(
            "class {c} does not exist (set has {} classes)",
            set.num_classes
        )));
    }
    let fractions_ok = (0.0..1.0).contains(&split.val_fraction)
        && (0.0..1.0).contains(&split.test_fraction)
        && split.val_fraction + split.test_fraction < 1.0;
    if !fractions_ok {
        return Err(Error::Config(format!(
            "val_fraction {} and test_fraction {} must be in [0, 1) with sum below 1",
            split.val_fraction, split.test_fraction
        )));
    }

    let k = known.len();
    let mut rng = ChaCha8Rng::seed_from_u64(split.seed);
    let (mut train_rows, mut val_rows, mut test_rows) = (Vec::new(), Vec::new(), Vec::new());
    let mut new_label = vec![usize::MAX; set.num_classes];
    for (new, &orig) in known.iter().enumerate() {
        new_label[orig] = new;
        let mut rows: Vec<usize> = (0..set.len()).filter(|&r| set.labels[r] == orig).collect();
        let n = rows.len();
        if n < 2 {
            return Err(Error::Contract(format!(
                "known class {orig} has {n} rows; at least 2 are required"
            )));
        }
        rows.shuffle(&mut rng);
        let n_val = ((n as f64 * split.val_fraction).floor() as usize).max(1);
        let n_test = (n as f64 * split.test_fraction).floor() as usize;
        if n_val + n_test >= n {
            return Err(Error::Contract(format!(
                "known class {orig} has {n} rows, too few to leave training rows"
            )));
        }
        val_rows.extend_from_slice(&rows[..n_val]);
        test_rows.extend_from_slice(&rows[n_val..n_val + n_test]);
        train_rows.extend_from_slice(&rows[n_val + n_test..]);
    }
    test_rows.extend((0..set.len()).filter(|&r| unknown.contains(&set.labels[r])));
    for rows in [&mut train_rows, &mut val_rows, &mut test_rows] {
        rows.sort_unstable();
    }

    let relabel = |rows: &[usize]| -> Result<LabeledSet> {
        let labels = rows
            .iter()
            .map(|&r| {
                let l = new_label[set.labels[r]];
                if l == usize::MAX {
                    k
                } else {
                    l
                }
            })
            .collect();
        LabeledSet::new(set.features.select_rows(rows)?, labels, k + 1)
    };
    let mut train = relabel(&train_rows)?;
    let mut val = relabel(&val_rows)?;
    train.num_classes = k;
    val.num_classes = k;
    let test = relabel(&test_rows)?;
    Ok(OpenSets {
        train,
        val,
        test,
        train_rows,
        val_rows,
        test_rows,
        known_class_ids: known,
        unknown_class_ids: unknown.into_iter().collect(),
    })
}

/// Per-dimension standardization fitted on training features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Zero-variance dimensions get unit std.
    pub fn fit(features: &Matrix) -> Result<Self> {
        if features.rows() == 0 {
            return Err(Error::Contract("cannot standardize an empty set".into()));
        }
        let n = features.rows() as f64;
        let mean: Vec<f64> = features.column_sums().into_iter().map(|s| s / n).collect();
        let mut var = vec![0.0; features.cols()];
        for row in features.row_iter() {
            for ((v, x), m) in var.iter_mut().zip(row).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mean: vec![0.0; dim],
            std: vec![1.0; dim],
        }
    }

    pub fn apply(&self, features: &Matrix) -> Result<Matrix> {
        if features.cols() != self.mean.len() {
            return Err(Error::dimension(
                "standardize",
                features.shape(),
                format!("{} fitted dimensions", self.mean.len()),
            ));
        }
        let mut out = features.clone();
        for r in 0..out.rows() {
            for ((v, m), s) in out.row_mut(r).iter_mut().zip(&self.mean).zip(&self.std) {
                *v = (*v - m) / s;
            }
        }
        Ok(out)
    }

    pub fn apply_set(&self, set: &LabeledSet) -> Result<LabeledSet> {
        Ok(LabeledSet {
            features: self.apply(&set.features)?,
            ..set.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_spread_blobs_sit_on_centers() {
        let set = gen_gaussian_blobs(3, 5, 2, 4.0, 0.0, 1).unwrap();
        for class in 0..3 {
            let rows: Vec<&[f64]> = (0..set.len())
                .filter(|&r| set.labels[r] == class)
                .map(|r| set.features.row(r))
                .collect();
            assert_eq!(rows.len(), 5);
            assert!(rows.iter().all(|r| *r == rows[0]));
            assert!(rows[0].iter().all(|v| v.abs() <= 4.0));
        }
    }

    #[test]
    fn blobs_are_seed_deterministic() {
        let a = gen_gaussian_blobs(4, 10, 3, 5.0, 0.5, 99).unwrap();
        let b = gen_gaussian_blobs(4, 10, 3, 5.0, 0.5, 99).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
        let c = gen_gaussian_blobs(4, 10, 3, 5.0, 0.5, 100).unwrap();
        assert_ne!(a.features, c.features);
    }

    #[test]
    fn noiseless_rings_have_exact_radii() {
        let set = gen_rings(3, 20, 0.0, 5).unwrap();
        for (row, &l) in set.features.row_iter().zip(&set.labels) {
            let r = row[0].hypot(row[1]);
            assert!((r - (l + 1) as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn noisy_rings_keep_class_order() {
        let set = gen_rings(2, 200, 0.1, 6).unwrap();
        let radius = |c: usize| -> Vec<f64> {
            set.features
                .row_iter()
                .zip(&set.labels)
                .filter(|(_, &l)| l == c)
                .map(|(r, _)| r[0].hypot(r[1]))
                .collect()
        };
        let max0 = radius(0).into_iter().fold(f64::MIN, f64::max);
        let min1 = radius(1).into_iter().fold(f64::MAX, f64::min);
        assert!(max0 < min1);
        assert_eq!(gen_rings(2, 5, 0.1, 6).unwrap(), gen_rings(2, 5, 0.1, 6).unwrap());
    }

    #[test]
    fn csv_basic() {
        let set = parse_csv("1.0,2.0,0\n3.0,4.0,1").unwrap();
        assert_eq!(set.features, Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap());
        assert_eq!(set.labels, vec![0, 1]);
        assert_eq!(set.num_classes, 2);
    }

    #[test]
    fn csv_with_header() {
        let set = parse_csv("x,y,label\n1,2,0\n3,4,2\n").unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.num_classes, 3);
    }

    #[test]
    fn csv_errors() {
        assert!(matches!(parse_csv(""), Err(Error::Parse { .. })));
        match parse_csv("1.0,2.0,0\n1.0,2.0,3.0,1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_csv("1,2,0\n1,abc,1\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    fn idx_fixture(n: u32, rows: u32, cols: u32, pixels: &[u8]) -> Vec<u8> {
        let mut b = IDX_IMAGES_MAGIC.to_be_bytes().to_vec();
        for d in [n, rows, cols] {
            b.extend(d.to_be_bytes());
        }
        b.extend_from_slice(pixels);
        b
    }

    fn idx_labels(labels: &[u8]) -> Vec<u8> {
        let mut b = IDX_LABELS_MAGIC.to_be_bytes().to_vec();
        b.extend((labels.len() as u32).to_be_bytes());
        b.extend_from_slice(labels);
        b
    }

    #[test]
    fn idx_round_trip_fixture() {
        let images = idx_fixture(2, 2, 2, &[0, 255, 51, 102, 255, 0, 0, 255]);
        let labels = idx_labels(&[3, 1]);
        let set = parse_idx(&images, &labels).unwrap();
        assert_eq!(set.features.rows(), 2);
        assert_eq!(set.features.row(0), &[0.0, 1.0, 0.2, 0.4]);
        assert_eq!(set.features.row(1), &[1.0, 0.0, 0.0, 1.0]);
        assert_eq!(set.labels, vec![3, 1]);
    }

    #[test]
    fn idx_errors() {
        let labels = idx_labels(&[0, 1]);
        let mut wrong = idx_fixture(2, 1, 1, &[0, 0]);
        wrong[3] = 0x01;
        assert!(matches!(parse_idx(&wrong, &labels), Err(Error::Format(_))));

        let images = idx_fixture(3, 1, 1, &[0, 0, 0]);
        let msg = parse_idx(&images, &labels).unwrap_err().to_string();
        assert!(msg.contains('3') && msg.contains('2'), "{msg}");

        let truncated = idx_fixture(2, 2, 2, &[0; 5]);
        assert!(matches!(parse_idx(&truncated, &labels), Err(Error::Format(_))));
        assert!(matches!(parse_idx(&[0, 0], &labels), Err(Error::Format(_))));
    }

    fn ten_class_set(per_class: usize) -> LabeledSet {
        gen_gaussian_blobs(10, per_class, 2, 5.0, 0.3, 3).unwrap()
    }

    #[test]
    fn split_partitions_rows() {
        let set = ten_class_set(100);
        let split = OpenSplit::new(vec![5, 0, 1, 2, 3, 4], vec![6, 7, 8, 9], 1);
        let sets = split_known_unknown(&set, &split).unwrap();
        let mut all: Vec<usize> = sets
            .train_rows
            .iter()
            .chain(&sets.val_rows)
            .chain(&sets.test_rows)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..set.len()).collect::<Vec<_>>());

        assert_eq!(sets.val.class_counts(), vec![10; 6]);
        assert_eq!(sets.openness_counts(), (6, 10));
        for (&r, &l) in sets.train_rows.iter().zip(&sets.train.labels) {
            assert!(set.labels[r] < 6);
            assert_eq!(l, set.labels[r]);
        }
        for &r in sets.val_rows.iter() {
            assert!(set.labels[r] < 6);
        }
        let unknown_test = sets.test.labels.iter().filter(|&&l| l == 6).count();
        assert_eq!(unknown_test, 400);
    }

    #[test]
    fn relabeling_is_ascending_original_id() {
        let set = ten_class_set(20);
        let split = OpenSplit::new(vec![7, 2, 9], vec![0], 4);
        let sets = split_known_unknown(&set, &split).unwrap();
        assert_eq!(sets.known_class_ids, vec![2, 7, 9]);
        for (&r, &l) in sets.train_rows.iter().zip(&sets.train.labels) {
            assert_eq!(sets.known_class_ids[l], set.labels[r]);
        }
        let again = split_known_unknown(&set, &split).unwrap();
        assert_eq!(again.train_rows, sets.train_rows);
    }

    #[test]
    fn split_without_unknowns() {
        let set = ten_class_set(20);
        let sets = split_known_unknown(&set, &OpenSplit::new(vec![0, 1], vec![], 0)).unwrap();
        assert!(sets.test.labels.iter().all(|&l| l < 2));
    }

    #[test]
    fn split_rejects_tiny_classes() {
        let features = Matrix::zeros(5, 1);
        let set = LabeledSet::new(features, vec![0, 0, 0, 0, 1], 2).unwrap();
        assert!(matches!(
            split_known_unknown(&set, &OpenSplit::new(vec![0, 1], vec![], 0)),
            Err(Error::Contract(_))
        ));
        let set = ten_class_set(10);
        assert!(split_known_unknown(&set, &OpenSplit::new(vec![0, 1], vec![1], 0)).is_err());
        assert!(split_known_unknown(&set, &OpenSplit::new(vec![0], vec![1], 0)).is_err());
    }

    #[test]
    fn standardizer_uses_train_statistics() {
        let train = Matrix::from_rows(&[[1.0, 5.0], [3.0, 5.0]]).unwrap();
        let s = Standardizer::fit(&train).unwrap();
        assert_eq!(s.mean, vec![2.0, 5.0]);
        assert_eq!(s.std, vec![1.0, 1.0]);
        let z = s.apply(&Matrix::from_rows(&[[4.0, 6.0]]).unwrap()).unwrap();
        assert_eq!(z.data(), &[2.0, 1.0]);
    }
}
