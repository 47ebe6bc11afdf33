mod common;

use common::*;
use sht_auc::objective::{
    block_gradient, class_means, erm_objective, full_gradient, hessian_quadratic_form, pairwise_objective,
    BlockPartition,
};
use sht_auc::{Dataset, Label};

#[test]
fn reformulation_matches_pairs() {
    let mut rng = rng(1);
    for case in 0..60 {
        let n = 2 + case % 39;
        let d = 1 + case % 10;
        let data = random_dataset(&mut rng, n, d);
        let means = class_means(&data).unwrap();
        for _ in 0..5 {
            let w = vector(random_vec(&mut rng, d, 0.7));
            let oracle = pairwise_value(&data, w.as_slice());
            let erm = erm_objective(&data, &means, &w).unwrap();
            let brute = pairwise_objective(&data, &w).unwrap();
            assert!((oracle - erm).abs() <= 1e-9 * oracle.abs().max(1.0), "case {case}: {oracle} vs {erm}");
            assert!((oracle - brute).abs() <= 1e-12 * oracle.abs().max(1.0));
        }
        let zero = vector(vec![0.0; d]);
        assert!((erm_objective(&data, &means, &zero).unwrap() - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn hand_examples() {
    let data = Dataset::from_rows(&[vec![1.0], vec![0.0]], vec![Label::Positive, Label::Negative]).unwrap();
    let means = class_means(&data).unwrap();
    let w = vector(vec![1.0]);
    assert_eq!(pairwise_objective(&data, &w).unwrap(), 0.0);
    assert_eq!(erm_objective(&data, &means, &w).unwrap(), 0.0);
    assert_eq!(hessian_quadratic_form(&data, &means, &w).unwrap(), 2.0);
}

#[test]
fn gradient_matches_finite_differences_and_pair_form() {
    let mut rng = rng(2);
    let h = 1e-5;
    for case in 0..20 {
        let data = random_dataset(&mut rng, 10 + case, 2 + case % 7);
        let means = class_means(&data).unwrap();
        let d = data.d();
        let w = random_vec(&mut rng, d, 0.5);
        let g = full_gradient(&data, &means, &vector(w.clone())).unwrap();
        let oracle = pairwise_gradient(&data, &w);
        for i in 0..d {
            let mut up = w.clone();
            let mut down = w.clone();
            up[i] += h;
            down[i] -= h;
            let fd = (erm_objective(&data, &means, &vector(up)).unwrap()
                - erm_objective(&data, &means, &vector(down)).unwrap())
                / (2.0 * h);
            assert!(rel_err(fd, g[i]) <= 1e-5, "case {case} coord {i}: fd {fd} vs {}", g[i]);
            assert!(rel_err(oracle[i], g[i]) <= 1e-10);
        }
    }
}

#[test]
fn hessian_form_matches_second_differences_and_explicit_matrix() {
    let mut rng = rng(3);
    let t = 1e-3;
    for _ in 0..20 {
        let data = random_dataset(&mut rng, 25, 6);
        let means = class_means(&data).unwrap();
        let w = random_vec(&mut rng, 6, 0.5);
        let v = random_vec(&mut rng, 6, 1.0);
        let f = |x: Vec<f64>| pairwise_value(&data, &x);
        let plus: Vec<f64> = w.iter().zip(&v).map(|(a, b)| a + t * b).collect();
        let minus: Vec<f64> = w.iter().zip(&v).map(|(a, b)| a - t * b).collect();
        let second = (f(plus) - 2.0 * f(w.clone()) + f(minus)) / (t * t);
        let q = hessian_quadratic_form(&data, &means, &vector(v.clone())).unwrap();
        assert!(rel_err(second, q) <= 1e-8, "{second} vs {q}");

        let hm = pairwise_hessian(&data);
        let vv = nalgebra::DVector::from_vec(v.clone());
        let explicit = (vv.transpose() * &hm * &vv)[(0, 0)];
        assert!(rel_err(explicit, q) <= 1e-10);
    }
}

#[test]
fn quadratic_exactness() {
    let mut rng = rng(4);
    for _ in 0..20 {
        let data = random_dataset(&mut rng, 30, 5);
        let means = class_means(&data).unwrap();
        let w = random_vec(&mut rng, 5, 0.5);
        let v = random_vec(&mut rng, 5, 0.5);
        let wv: Vec<f64> = w.iter().zip(&v).map(|(a, b)| a + b).collect();
        let g = full_gradient(&data, &means, &vector(w.clone())).unwrap();
        let lhs = erm_objective(&data, &means, &vector(wv)).unwrap();
        let rhs = erm_objective(&data, &means, &vector(w)).unwrap()
            + g.as_slice().iter().zip(&v).map(|(a, b)| a * b).sum::<f64>()
            + 0.5 * hessian_quadratic_form(&data, &means, &vector(v)).unwrap();
        assert!(rel_err(lhs, rhs) <= 1e-8, "{lhs} vs {rhs}");
    }
}

#[test]
fn equal_blocks_average_to_full_gradient() {
    let mut rng = rng(5);
    for b in [1, 3, 6, 12, 36] {
        let data = random_dataset(&mut rng, 36, 4);
        let means = class_means(&data).unwrap();
        let w = vector(random_vec(&mut rng, 4, 0.5));
        let partition = BlockPartition::shuffled(36, b, &mut rng).unwrap();
        let mut avg = [0.0; 4];
        for block in partition.blocks() {
            let g = block_gradient(&data, &means, block, &w).unwrap();
            for (a, x) in avg.iter_mut().zip(g.as_slice()) {
                *a += x / partition.len() as f64;
            }
        }
        let full = full_gradient(&data, &means, &w).unwrap();
        for (a, f) in avg.iter().zip(full.as_slice()) {
            assert!((a - f).abs() <= 1e-12 * f.abs().max(1.0), "b = {b}");
        }
    }
}

#[test]
fn gradient_at_origin_is_mean_gap() {
    let mut rng = rng(6);
    let data = random_dataset(&mut rng, 20, 3);
    let means = class_means(&data).unwrap();
    let zero = vector(vec![0.0; 3]);
    for block in [vec![0], vec![3, 4, 5], (0..20).collect::<Vec<_>>()] {
        let g = block_gradient(&data, &means, &block, &zero).unwrap();
        for i in 0..3 {
            let expected = 2.0 * (means.mean_neg[i] - means.mean_pos[i]);
            assert!((g[i] - expected).abs() <= 1e-14);
        }
    }
    assert!(block_gradient(&data, &means, &[], &zero).is_err());
}
