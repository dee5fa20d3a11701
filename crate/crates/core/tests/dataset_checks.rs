use std::collections::BTreeSet;

use gausspen_core::datasets::{blob_center, make_blobs, split_indices, with_label_noise, LabeledDataset};

#[test]
fn stratified_split_is_a_balanced_partition() {
    let labels: Vec<usize> = (0..1000).map(|i| i % 10).collect();
    for seed in 1..=5 {
        let parts = split_indices(&labels, 10, [0.8, 0.1, 0.1], seed).unwrap();
        let sizes: Vec<usize> = parts.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![800, 100, 100]);

        let all: BTreeSet<usize> = parts.iter().flatten().copied().collect();
        assert_eq!(all.len(), 1000);
        assert_eq!(all, (0..1000).collect());

        for (part, fraction) in parts.iter().zip([0.8, 0.1, 0.1]) {
            let mut counts = [0usize; 10];
            for &i in part {
                counts[labels[i]] += 1;
            }
            let expected = 100.0 * fraction;
            assert!(counts.iter().all(|&c| (c as f64 - expected).abs() <= 1.0), "{counts:?}");
        }
    }
}

#[test]
fn uneven_classes_stay_within_one_per_class() {
    let labels: Vec<usize> = (0..337).map(|i| if i % 7 == 0 { 2 } else { i % 2 }).collect();
    let parts = split_indices(&labels, 3, [0.5, 0.3, 0.2], 9).unwrap();
    for class in 0..3 {
        let total = labels.iter().filter(|&&l| l == class).count() as f64;
        for (part, fraction) in parts.iter().zip([0.5, 0.3, 0.2]) {
            let c = part.iter().filter(|&&i| labels[i] == class).count() as f64;
            assert!((c - total * fraction).abs() <= 1.0 + 1e-9, "class {class}: {c} vs {}", total * fraction);
        }
    }
}

#[test]
fn well_separated_blobs_are_linearly_separable() {
    let data = make_blobs(2, 500, 2, 10.0, 4).unwrap();
    // The perpendicular bisector of the two centers separates the classes.
    let c0 = blob_center(0, 2, 2, 10.0);
    let c1 = blob_center(1, 2, 2, 10.0);
    let normal: Vec<f64> = c1.iter().zip(&c0).map(|(a, b)| a - b).collect();
    let mid: Vec<f64> = c1.iter().zip(&c0).map(|(a, b)| 0.5 * (a + b)).collect();
    let mut margin = f64::INFINITY;
    for i in 0..data.len() {
        let s: f64 = data.features.row(i).iter().zip(&mid).zip(&normal).map(|((x, m), n)| (x - m) * n).sum();
        let signed = if data.labels[i] == 1 { s } else { -s };
        margin = margin.min(signed);
    }
    assert!(margin > 0.0, "{margin}");
}

#[test]
fn noise_never_keeps_a_flipped_label() {
    let data = make_blobs(3, 50, 2, 1.0, 1).unwrap();
    let all = with_label_noise(&data, 1.0, 2).unwrap();
    assert!(data.labels.iter().zip(&all.labels).all(|(a, b)| a != b));
    let _: &LabeledDataset = &all;
}
