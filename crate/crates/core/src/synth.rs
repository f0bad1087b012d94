//! Seeded synthetic datasets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::sparse::{CsrMatrix, LabeledDataset};

/// Random sparse matrix with roughly `density · n` entries per row, values
/// in `±[0.1, 1)`, labelled by a planted hyperplane with 5% label noise.
/// `density = 1` gives a fully dense matrix.
pub fn sparse_gaussian(m: usize, n: usize, density: f64, seed: u64) -> Result<LabeledDataset> {
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::Config(format!("density {density} outside (0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut rows = Vec::with_capacity(m);
    let mut labels = Vec::with_capacity(m);
    for _ in 0..m {
        let row: Vec<f64> = (0..n)
            .map(|_| {
                if density < 1.0 && rng.random::<f64>() >= density {
                    0.0
                } else {
                    let mag = rng.random_range(0.1..1.0);
                    if rng.random::<bool>() {
                        mag
                    } else {
                        -mag
                    }
                }
            })
            .collect();
        let score: f64 = row.iter().zip(&planted).map(|(a, w)| a * w).sum();
        let flip = rng.random::<f64>() < 0.05;
        labels.push(if (score >= 0.0) != flip { 1.0 } else { -1.0 });
        rows.push(row);
    }
    LabeledDataset::new(CsrMatrix::from_dense(&rows, n)?, labels)
}

/// Category counts of the 21 one-hot attributes; they sum to 112 features.
const MUSHROOM_ATTRIBUTES: [usize; 21] = [
    6, 4, 10, 2, 9, 4, 3, 2, 12, 2, 5, 4, 4, 9, 9, 4, 3, 5, 9, 3, 3,
];

/// LIBSVM text shaped like the mushrooms set: `m` rows of 21 one-hot
/// categorical attributes (112 binary features, 21 nonzeros per row) with
/// labels encoded as 1 and 2.
pub fn mushrooms_like_libsvm(m: usize, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features: usize = MUSHROOM_ATTRIBUTES.iter().sum();
    let planted: Vec<f64> = (0..features).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut text = String::with_capacity(m * 21 * 7);
    for _ in 0..m {
        let mut offset = 0;
        let mut score = 0.0;
        let mut cols = Vec::with_capacity(MUSHROOM_ATTRIBUTES.len());
        for &card in &MUSHROOM_ATTRIBUTES {
            // skewed category frequencies: category k with weight 1/(k+1)
            let total: f64 = (1..=card).map(|k| 1.0 / k as f64).sum();
            let mut u = rng.random::<f64>() * total;
            let mut cat = card - 1;
            for k in 0..card {
                u -= 1.0 / (k + 1) as f64;
                if u < 0.0 {
                    cat = k;
                    break;
                }
            }
            cols.push(offset + cat);
            score += planted[offset + cat];
            offset += card;
        }
        let flip = rng.random::<f64>() < 0.02;
        let positive = (score >= 0.0) != flip;
        text.push_str(if positive { "1" } else { "2" });
        for c in cols {
            text.push_str(&format!(" {}:1", c + 1));
        }
        text.push('\n');
    }
    text
}
