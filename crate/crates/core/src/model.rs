//! Logistic loss over the label-scaled matrix `Ã`.
//!
//! `sig(t) = 1 / (1 + exp(t))` here, i.e. the standard logistic function
//! evaluated at `-t`. With that convention the gradient of the mean loss is
//! `-(1/m) Ãᵀ sig(Ã x)` and an SGD step *adds* `(η/m) Ãᵀ I sig(I Ã x)`.

use crate::error::{Error, Result};
use crate::sparse::LabeledDataset;

/// Beyond this magnitude `exp` of the smaller branch no longer changes a
/// double-precision sum with 1.
const SATURATION: f64 = 36.0;

/// `1 / (1 + exp(t))`, finite and monotone decreasing for every finite `t`.
#[inline]
pub fn sig(t: f64) -> f64 {
    if t > 0.0 {
        let e = (-t).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + t.exp())
    }
}

pub fn sig_vec(z: &[f64]) -> Vec<f64> {
    z.iter().map(|&t| sig(t)).collect()
}

/// `log(1 + exp(t))` without overflow.
#[inline]
pub fn softplus(t: f64) -> f64 {
    if t > SATURATION {
        t
    } else if t < -SATURATION {
        t.exp()
    } else {
        t.exp().ln_1p()
    }
}

fn check_len(d: &LabeledDataset, x: &[f64]) -> Result<()> {
    if x.len() != d.num_features() {
        return Err(Error::Dimension {
            expected: d.num_features(),
            actual: x.len(),
            context: "weight vector",
        });
    }
    Ok(())
}

fn scores<'a>(d: &'a LabeledDataset, x: &'a [f64]) -> impl Iterator<Item = f64> + 'a {
    let a = d.a_tilde();
    (0..a.num_rows()).map(move |i| {
        let (idx, val) = a.row(i);
        idx.iter().zip(val).map(|(&c, &v)| v * x[c]).sum::<f64>()
    })
}

/// Mean logistic loss `(1/m) Σ_i log(1 + exp(-ã_i x))`.
pub fn loss(d: &LabeledDataset, x: &[f64]) -> Result<f64> {
    check_len(d, x)?;
    let m = d.num_points();
    if m == 0 {
        return Ok(0.0);
    }
    let total = compensated_sum(scores(d, x).map(|s| softplus(-s)));
    Ok(total / m as f64)
}

/// Neumaier summation.
fn compensated_sum(terms: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for t in terms {
        let next = sum + t;
        carry += if sum.abs() >= t.abs() {
            (sum - next) + t
        } else {
            (t - next) + sum
        };
        sum = next;
    }
    sum + carry
}

/// `-(1/m) Ãᵀ sig(Ã x)`.
pub fn full_gradient(d: &LabeledDataset, x: &[f64]) -> Result<Vec<f64>> {
    check_len(d, x)?;
    let a = d.a_tilde();
    let m = d.num_points() as f64;
    let mut g = vec![0.0; d.num_features()];
    for (i, s) in scores(d, x).enumerate() {
        let w = sig(s);
        let (idx, val) = a.row(i);
        for (&c, &v) in idx.iter().zip(val) {
            g[c] += w * v;
        }
    }
    for gi in &mut g {
        *gi *= -1.0 / m;
    }
    Ok(g)
}

/// Fraction of points with `sign(a_i x) = y_i`, where a zero score predicts +1.
///
/// Works from `Ã` directly: `a_i x = y_i (ã_i x)` exactly because the
/// labels are ±1.
pub fn accuracy(d: &LabeledDataset, x: &[f64]) -> Result<f64> {
    check_len(d, x)?;
    let m = d.num_points();
    if m == 0 {
        return Ok(1.0);
    }
    let correct = scores(d, x)
        .zip(d.labels())
        .filter(|&(s, &y)| {
            let predicted = if y * s >= 0.0 { 1.0 } else { -1.0 };
            predicted == y
        })
        .count();
    Ok(correct as f64 / m as f64)
}

/// Central differences of [`loss`], one coordinate at a time.
pub fn finite_difference_gradient(d: &LabeledDataset, x: &[f64], h: f64) -> Result<Vec<f64>> {
    check_len(d, x)?;
    let mut probe = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        probe[j] = x[j] + h;
        let up = loss(d, &probe)?;
        probe[j] = x[j] - h;
        let down = loss(d, &probe)?;
        probe[j] = x[j];
        g.push((up - down) / (2.0 * h));
    }
    Ok(g)
}
