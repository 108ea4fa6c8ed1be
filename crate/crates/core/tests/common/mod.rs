#![allow(dead_code)]

use bregman_tweedie::dataset::Dataset;
use bregman_tweedie::seed::{rng_for, SplitMix64};
use rand::Rng;
use rand_distr::{Distribution, Normal};

/// Two unit-variance Gaussian classes centred at `±(shift, shift)`.
pub fn gaussian_pair(n: usize, shift: f64, seed: u64) -> Dataset {
    let mut rng = rng_for(seed, &[]);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = if i % 2 == 0 { 1.0 } else { -1.0 };
        rows.push(vec![y * shift + normal.sample(&mut rng), y * shift + normal.sample(&mut rng)]);
        labels.push(y);
    }
    Dataset::from_rows(rows, labels).unwrap()
}

/// Gaussian classes with every point closer than `gap` to the line
/// `x1 + x2 = 0` (or on the wrong side) rejected, so the set is exactly
/// separable.
pub fn separable_gaussians(n: usize, gap: f64, seed: u64) -> Dataset {
    let mut rng = rng_for(seed, &[]);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    while rows.len() < n {
        let y = if rows.len() % 2 == 0 { 1.0 } else { -1.0 };
        let p = [y * 1.5 + normal.sample(&mut rng), y * 1.5 + normal.sample(&mut rng)];
        if y * (p[0] + p[1]) / 2f64.sqrt() >= gap {
            rows.push(p.to_vec());
            labels.push(y);
        }
    }
    Dataset::from_rows(rows, labels).unwrap()
}

/// A 6-feature set shaped like the acute-inflammation data: body
/// temperature plus five yes/no symptoms, with a label that is a linear
/// threshold of the symptoms.
pub fn acute_like(n: usize, rng: &mut SplitMix64) -> Dataset {
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let temp = 35.5 + 6.0 * rng.random::<f64>();
        let b: Vec<f64> = (0..5).map(|_| f64::from(rng.random_bool(0.5) as u8)).collect();
        let y = if b[1] + b[2] + b[3] >= 2.0 { 1.0 } else { -1.0 };
        let mut row = vec![(temp * 10.0).round() / 10.0];
        row.extend(b);
        rows.push(row);
        labels.push(y);
    }
    Dataset::from_rows(rows, labels).unwrap()
}

pub fn uniform(rng: &mut SplitMix64, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..hi)
}
