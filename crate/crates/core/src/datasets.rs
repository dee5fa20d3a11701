//! Labeled classification data: synthetic Gaussian blobs, label noise and
//! stratified train/validation/test splits.

use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::Matrix;
use crate::math;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DataError {
    #[error("dataset is empty")]
    Empty,
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("label {label} at row {row} is outside [0, {num_classes})")]
    LabelOutOfRange { row: usize, label: usize, num_classes: usize },
    #[error("features contain a non-finite value")]
    NonFinite,
    #[error("split fractions must be positive and sum to 1, got {0:?}")]
    InvalidFractions([f64; 3]),
    #[error("the {0} split received no examples")]
    EmptySplit(SplitTag),
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitTag {
    Train,
    Validation,
    Test,
}

impl SplitTag {
    pub fn name(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Validation => "validation",
            SplitTag::Test => "test",
        }
    }
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    /// One example per row.
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub split_tag: Option<SplitTag>,
}

impl LabeledDataset {
    pub fn new(features: Matrix, labels: Vec<usize>, num_classes: usize) -> Result<Self, DataError> {
        if features.rows() == 0 {
            return Err(DataError::Empty);
        }
        if features.rows() != labels.len() {
            return Err(DataError::LengthMismatch { features: features.rows(), labels: labels.len() });
        }
        if !features.is_finite() {
            return Err(DataError::NonFinite);
        }
        if let Some((row, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= num_classes) {
            return Err(DataError::LabelOutOfRange { row, label, num_classes });
        }
        Ok(Self { features, labels, num_classes, split_tag: None })
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

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = alloc::vec![0; self.num_classes];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices`, in that order.
    pub fn subset(&self, indices: &[usize], tag: Option<SplitTag>) -> LabeledDataset {
        let d = self.dim();
        let mut data = Vec::with_capacity(indices.len() * d);
        for &i in indices {
            data.extend_from_slice(self.features.row(i));
        }
        LabeledDataset {
            features: Matrix::new(indices.len(), d, data).expect("subset shape"),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            num_classes: self.num_classes,
            split_tag: tag,
        }
    }
}

/// Cluster center of class `class` out of `num_classes`: evenly spaced on a
/// circle of radius `separation` in the first two coordinates, or on a line
/// when `dimension == 1`.
pub fn blob_center(class: usize, num_classes: usize, dimension: usize, separation: f64) -> Vec<f64> {
    let mut center = alloc::vec![0.0; dimension];
    if dimension == 1 {
        center[0] = separation * (class as f64 - 0.5 * (num_classes as f64 - 1.0));
    } else {
        let angle = TAU * class as f64 / num_classes as f64;
        center[0] = separation * libm::cos(angle);
        center[1] = separation * libm::sin(angle);
    }
    center
}

/// `per_class` standard-normal points around each class center, grouped by class.
pub fn make_blobs(
    num_classes: usize,
    per_class: usize,
    dimension: usize,
    separation: f64,
    seed: u64,
) -> Result<LabeledDataset, DataError> {
    if num_classes == 0 || per_class == 0 || dimension == 0 {
        return Err(DataError::InvalidArgument("counts and dimension must be >= 1"));
    }
    if !(separation >= 0.0 && separation.is_finite()) {
        return Err(DataError::InvalidArgument("separation must be finite and >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = num_classes * per_class;
    let mut data = Vec::with_capacity(n * dimension);
    let mut labels = Vec::with_capacity(n);
    for class in 0..num_classes {
        let center = blob_center(class, num_classes, dimension, separation);
        for _ in 0..per_class {
            for &c in &center {
                let z: f64 = StandardNormal.sample(&mut rng);
                data.push(c + z);
            }
            labels.push(class);
        }
    }
    let features = Matrix::new(n, dimension, data).expect("blob shape");
    LabeledDataset::new(features, labels, num_classes)
}

/// Replaces each label, with probability `rate`, by a uniformly drawn different class.
pub fn with_label_noise(dataset: &LabeledDataset, rate: f64, seed: u64) -> Result<LabeledDataset, DataError> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(DataError::InvalidArgument("noise rate must lie in [0, 1]"));
    }
    let mut out = dataset.clone();
    if dataset.num_classes < 2 {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for label in out.labels.iter_mut() {
        if rng.random::<f64>() < rate {
            let shift = rng.random_range(1..dataset.num_classes);
            *label = (*label + shift) % dataset.num_classes;
        }
    }
    Ok(out)
}

const DIGIT_GLYPHS: [[&str; 8]; 10] = [
    ["..####..", ".##..##.", ".##..##.", ".##..##.", ".##..##.", ".##..##.", ".##..##.", "..####.."],
    ["...##...", "..###...", ".####...", "...##...", "...##...", "...##...", "...##...", ".######."],
    ["..####..", ".##..##.", ".....##.", "....##..", "...##...", "..##....", ".##.....", ".######."],
    ["..####..", ".##..##.", ".....##.", "...###..", ".....##.", ".....##.", ".##..##.", "..####.."],
    ["....##..", "...###..", "..####..", ".##.##..", ".######.", "....##..", "....##..", "....##.."],
    [".######.", ".##.....", ".#####..", ".....##.", ".....##.", ".....##.", ".##..##.", "..####.."],
    ["..####..", ".##.....", ".##.....", ".#####..", ".##..##.", ".##..##.", ".##..##.", "..####.."],
    [".######.", ".....##.", "....##..", "....##..", "...##...", "...##...", "..##....", "..##...."],
    ["..####..", ".##..##.", ".##..##.", "..####..", ".##..##.", ".##..##.", ".##..##.", "..####.."],
    ["..####..", ".##..##.", ".##..##.", ".##..##.", "..#####.", ".....##.", ".....##.", "..####.."],
];

/// Noise-free 8×8 bitmap of `digit` (0–9), row-major, ink = 255.
pub fn digit_glyph(digit: usize) -> [u8; 64] {
    let mut out = [0u8; 64];
    for (r, line) in DIGIT_GLYPHS[digit % 10].iter().enumerate() {
        for (c, ch) in line.bytes().enumerate() {
            if ch == b'#' {
                out[r * 8 + c] = 255;
            }
        }
    }
    out
}

/// Raw 8×8 digit images: each glyph shifted by up to one pixel in each
/// direction, with Gaussian pixel noise of standard deviation `noise` (in
/// units of full intensity), clamped and quantized to bytes. Returns
/// `(images, labels)` with 64 bytes per image, grouped by class.
pub fn make_digit_bytes(per_class: usize, noise: f64, seed: u64) -> Result<(Vec<u8>, Vec<u8>), DataError> {
    if per_class == 0 {
        return Err(DataError::InvalidArgument("per_class must be >= 1"));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(DataError::InvalidArgument("noise must be finite and >= 0"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images = Vec::with_capacity(per_class * 640);
    let mut labels = Vec::with_capacity(per_class * 10);
    for digit in 0..10u8 {
        let glyph = digit_glyph(digit as usize);
        for _ in 0..per_class {
            let dr: i32 = rng.random_range(-1..=1);
            let dc: i32 = rng.random_range(-1..=1);
            for r in 0..8i32 {
                for c in 0..8i32 {
                    let (sr, sc) = (r - dr, c - dc);
                    let ink = if (0..8).contains(&sr) && (0..8).contains(&sc) {
                        glyph[(sr * 8 + sc) as usize] as f64 / 255.0
                    } else {
                        0.0
                    };
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let v = (ink + noise * z).clamp(0.0, 1.0);
                    images.push(libm::round(v * 255.0) as u8);
                }
            }
            labels.push(digit);
        }
    }
    Ok((images, labels))
}

/// Features from raw bytes, each divided by 255.
pub fn dataset_from_bytes(
    pixels: &[u8],
    labels: &[u8],
    num_classes: usize,
) -> Result<LabeledDataset, DataError> {
    if labels.is_empty() {
        return Err(DataError::Empty);
    }
    if pixels.len() % labels.len() != 0 {
        return Err(DataError::LengthMismatch { features: pixels.len(), labels: labels.len() });
    }
    let d = pixels.len() / labels.len();
    let data = pixels.iter().map(|&b| b as f64 / 255.0).collect();
    let features = Matrix::new(labels.len(), d, data).map_err(|_| DataError::InvalidArgument("bad image shape"))?;
    LabeledDataset::new(features, labels.iter().map(|&l| l as usize).collect(), num_classes)
}

/// Partition of `0..labels.len()` into train, validation and test indices.
///
/// Examples of each class are shuffled and spread evenly along one ordering
/// of the whole set, which is then cut at `round(n·cumulative fraction)`.
/// Every split therefore holds its share of each class to within about one
/// example. Indices inside a split are shuffled again.
pub fn split_indices(
    labels: &[usize],
    num_classes: usize,
    fractions: [f64; 3],
    seed: u64,
) -> Result<[Vec<usize>; 3], DataError> {
    let sum: f64 = fractions.iter().sum();
    if fractions.iter().any(|f| !(*f > 0.0)) || math::abs(sum - 1.0) > 1e-9 {
        return Err(DataError::InvalidFractions(fractions));
    }
    if labels.is_empty() {
        return Err(DataError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: Vec<Vec<usize>> = alloc::vec![Vec::new(); num_classes];
    for (i, &l) in labels.iter().enumerate() {
        if l >= num_classes {
            return Err(DataError::LabelOutOfRange { row: i, label: l, num_classes });
        }
        by_class[l].push(i);
    }
    let mut keyed: Vec<(f64, usize, usize)> = Vec::with_capacity(labels.len());
    for (class, members) in by_class.iter_mut().enumerate() {
        members.shuffle(&mut rng);
        let count = members.len() as f64;
        for (rank, &i) in members.iter().enumerate() {
            keyed.push(((rank as f64 + 0.5) / count, class, i));
        }
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let n = labels.len() as f64;
    let first = libm::round(n * fractions[0]) as usize;
    let second = (libm::round(n * (fractions[0] + fractions[1])) as usize).max(first);
    let cuts = [0, first, second.min(labels.len()), labels.len()];
    let tags = [SplitTag::Train, SplitTag::Validation, SplitTag::Test];
    let mut parts: [Vec<usize>; 3] = [Vec::new(), Vec::new(), Vec::new()];
    for (k, part) in parts.iter_mut().enumerate() {
        *part = keyed[cuts[k]..cuts[k + 1]].iter().map(|e| e.2).collect();
        if part.is_empty() {
            return Err(DataError::EmptySplit(tags[k]));
        }
        part.shuffle(&mut rng);
    }
    Ok(parts)
}

/// Stratified, seeded train/validation/test split.
pub fn split(
    dataset: &LabeledDataset,
    fractions: [f64; 3],
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset, LabeledDataset), DataError> {
    let [train, validation, test] = split_indices(&dataset.labels, dataset.num_classes, fractions, seed)?;
    Ok((
        dataset.subset(&train, Some(SplitTag::Train)),
        dataset.subset(&validation, Some(SplitTag::Validation)),
        dataset.subset(&test, Some(SplitTag::Test)),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_are_deterministic() {
        let a = make_blobs(3, 20, 4, 2.0, 9).unwrap();
        let b = make_blobs(3, 20, 4, 2.0, 9).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, make_blobs(3, 20, 4, 2.0, 10).unwrap());
        assert_eq!(a.class_counts(), vec![20, 20, 20]);
    }

    #[test]
    fn zero_separation_shares_one_center() {
        for c in 0..4 {
            assert_eq!(blob_center(c, 4, 3, 0.0), vec![0.0; 3]);
        }
    }

    #[test]
    fn split_sizes() {
        let data = make_blobs(10, 10, 2, 1.0, 1).unwrap();
        let (train, val, test) = split(&data, [0.8, 0.1, 0.1], 5).unwrap();
        assert_eq!((train.len(), val.len(), test.len()), (80, 10, 10));
        assert_eq!(train.split_tag, Some(SplitTag::Train));
        let again = split(&data, [0.8, 0.1, 0.1], 5).unwrap();
        assert_eq!(again.0, train);
    }

    #[test]
    fn split_errors() {
        let data = make_blobs(2, 5, 2, 1.0, 1).unwrap();
        assert!(matches!(split(&data, [0.5, 0.5, 0.1], 1), Err(DataError::InvalidFractions(_))));
        assert!(matches!(split(&data, [1.0, 0.0, 0.0], 1), Err(DataError::InvalidFractions(_))));
        assert_eq!(split(&data, [0.96, 0.02, 0.02], 1).unwrap_err(), DataError::EmptySplit(SplitTag::Validation));
    }

    #[test]
    fn label_noise_changes_expected_fraction() {
        let data = make_blobs(4, 500, 2, 1.0, 2).unwrap();
        let noisy = with_label_noise(&data, 0.2, 3).unwrap();
        let changed = data.labels.iter().zip(&noisy.labels).filter(|(a, b)| a != b).count();
        assert!((changed as f64 / 2000.0 - 0.2).abs() < 0.03);
        assert_eq!(with_label_noise(&data, 0.0, 3).unwrap(), data);
    }

    #[test]
    fn digits_are_scaled_and_labeled() {
        let (img, lab) = make_digit_bytes(3, 0.0, 1).unwrap();
        assert_eq!((img.len(), lab.len()), (30 * 64, 30));
        let data = dataset_from_bytes(&img, &lab, 10).unwrap();
        assert_eq!(data.dim(), 64);
        assert_eq!(data.class_counts(), vec![3; 10]);
        assert!(data.features.as_slice().iter().all(|&v| v == 0.0 || v == 1.0));
        let ink: usize = digit_glyph(1).iter().filter(|&&b| b == 255).count();
        assert_eq!(ink, 23);
    }

    #[test]
    fn dataset_validation() {
        let x = Matrix::zeros(2, 1);
        assert!(matches!(LabeledDataset::new(x.clone(), vec![0, 3], 2), Err(DataError::LabelOutOfRange { row: 1, .. })));
        assert!(matches!(LabeledDataset::new(x, vec![0], 2), Err(DataError::LengthMismatch { .. })));
        assert_eq!(LabeledDataset::new(Matrix::zeros(0, 1), vec![], 2).unwrap_err(), DataError::Empty);
    }
}
