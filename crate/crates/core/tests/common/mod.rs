//! Test-side oracles that do not share code with the library.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sht_auc::{Dataset, Label, Vector};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn random_vec(rng: &mut ChaCha8Rng, d: usize, scale: f64) -> Vec<f64> {
    (0..d).map(|_| scale * normal(rng)).collect()
}

/// Unit-scale Gaussian data with at least one example of each class.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Dataset {
    assert!(n >= 2);
    let n_pos = rng.random_range(1..n);
    let mut labels: Vec<Label> = (0..n).map(|i| if i < n_pos { Label::Positive } else { Label::Negative }).collect();
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        labels.swap(i, j);
    }
    let rows: Vec<Vec<f64>> = (0..n).map(|_| random_vec(rng, d, 1.0)).collect();
    Dataset::from_rows(&rows, labels).unwrap()
}

fn class_rows(data: &Dataset, positive: bool) -> Vec<&[f64]> {
    (0..data.n()).filter(|&i| data.label(i).is_positive() == positive).map(|i| data.row(i)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `F(w) = 1/(n₊n₋) Σ (1 − wᵀ(x₊ − x₋))²` over all pairs.
pub fn pairwise_value(data: &Dataset, w: &[f64]) -> f64 {
    let pos = class_rows(data, true);
    let neg = class_rows(data, false);
    let mut total = 0.0;
    for p in &pos {
        for q in &neg {
            let m = dot(w, p) - dot(w, q);
            total += (1.0 - m) * (1.0 - m);
        }
    }
    total / (pos.len() * neg.len()) as f64
}

/// `∇F(w) = −2/(n₊n₋) Σ (1 − wᵀ(x₊ − x₋))(x₊ − x₋)` over all pairs.
pub fn pairwise_gradient(data: &Dataset, w: &[f64]) -> Vec<f64> {
    let pos = class_rows(data, true);
    let neg = class_rows(data, false);
    let mut g = vec![0.0; data.d()];
    let scale = -2.0 / (pos.len() * neg.len()) as f64;
    for p in &pos {
        for q in &neg {
            let resid = 1.0 - (dot(w, p) - dot(w, q));
            for k in 0..g.len() {
                g[k] += scale * resid * (p[k] - q[k]);
            }
        }
    }
    g
}

/// Explicit `∇²F = 2/(n₊n₋) Σ (x₊ − x₋)(x₊ − x₋)ᵀ` over all pairs.
pub fn pairwise_hessian(data: &Dataset) -> nalgebra::DMatrix<f64> {
    let pos = class_rows(data, true);
    let neg = class_rows(data, false);
    let d = data.d();
    let mut h = nalgebra::DMatrix::zeros(d, d);
    let scale = 2.0 / (pos.len() * neg.len()) as f64;
    for p in &pos {
        for q in &neg {
            let diff = nalgebra::DVector::from_iterator(d, p.iter().zip(q.iter()).map(|(a, b)| a - b));
            h += scale * &diff * diff.transpose();
        }
    }
    h
}

pub fn vector(v: Vec<f64>) -> Vector {
    Vector::new(v).unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}
