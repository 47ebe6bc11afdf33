//! The pairwise least-squares AUC objective and its single-sum rewrite.
//!
//! For positives `i` and negatives `j` the pairwise objective is
//!
//! ```text
//! F(w) = 1/(n₊n₋) Σᵢⱼ (1 − wᵀ(xᵢ − xⱼ))²
//! ```
//!
//! Centering each example on its class mean makes the cross terms vanish, so
//! `F(w) = 1/n Σᵢ f̃(w; zᵢ)` with
//!
//! ```text
//! f̃(w; z) = (wᵀ(x − x̄₊))² / r        if y = +1
//!          + (wᵀ(x − x̄₋))² / (1 − r)  if y = −1
//!          + 1 + 2wᵀ(x̄₋ − x̄₊) + (wᵀ(x̄₋ − x̄₊))²
//! ```
//!
//! where `r = n₊/n` is the global imbalance ratio. The rewrite costs `O(nd)`
//! per evaluation instead of `O(n₊n₋d)` and supports minibatch gradients.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dataset::{Dataset, Label};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot, Vector};

/// Per-class feature means `x̄₊`, `x̄₋`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassMeans {
    pub mean_pos: Vector,
    pub mean_neg: Vector,
}

pub fn class_means(data: &Dataset) -> Result<ClassMeans> {
    data.require_both_classes()?;
    let d = data.d();
    let mut pos = vec![0.0; d];
    let mut neg = vec![0.0; d];
    for i in 0..data.n() {
        let target = match data.label(i) {
            Label::Positive => &mut pos,
            Label::Negative => &mut neg,
        };
        axpy(1.0, data.row(i), target);
    }
    let (np, nn) = (data.n_pos() as f64, data.n_neg() as f64);
    pos.iter_mut().for_each(|x| *x /= np);
    neg.iter_mut().for_each(|x| *x /= nn);
    Ok(ClassMeans { mean_pos: Vector::new(pos)?, mean_neg: Vector::new(neg)? })
}

/// A fixed split of `[0, n)` into `m` disjoint blocks. All blocks have
/// `block_size` members except possibly the last.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockPartition {
    blocks: Vec<Vec<usize>>,
    block_size: usize,
}

impl BlockPartition {
    /// Cuts `order` (a permutation of `[0, n)`) into consecutive blocks.
    pub fn from_order(order: &[usize], block_size: usize) -> Result<Self> {
        if block_size == 0 {
            return Err(Error::Argument("block size must be positive".into()));
        }
        if order.is_empty() {
            return Err(Error::EmptyDataset);
        }
        if block_size > order.len() {
            return Err(Error::Argument(format!("block size {block_size} exceeds sample count {}", order.len())));
        }
        let mut seen = vec![false; order.len()];
        for &i in order {
            if i >= order.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Argument(format!("block order is not a permutation (index {i})")));
            }
        }
        Ok(Self { blocks: order.chunks(block_size).map(<[usize]>::to_vec).collect(), block_size })
    }

    pub fn contiguous(n: usize, block_size: usize) -> Result<Self> {
        let order: Vec<usize> = (0..n).collect();
        Self::from_order(&order, block_size)
    }

    /// Shuffles `[0, n)` once with `rng`, then cuts it into blocks.
    pub fn shuffled<R: Rng + ?Sized>(n: usize, block_size: usize, rng: &mut R) -> Result<Self> {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        Self::from_order(&order, block_size)
    }

    /// Number of blocks `m = ⌈n / b⌉`.
    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn block(&self, i: usize) -> &[usize] {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }
}

/// The single-sum AUC objective bound to a dataset and its class means.
#[derive(Clone, Debug)]
pub struct AucObjective<'a> {
    data: &'a Dataset,
    mean_pos: Vec<f64>,
    mean_neg: Vec<f64>,
    /// `x̄₋ − x̄₊`
    mean_gap: Vec<f64>,
    ratio: f64,
}

impl<'a> AucObjective<'a> {
    pub fn new(data: &'a Dataset, means: &ClassMeans) -> Result<Self> {
        let ratio = data.imbalance_ratio()?;
        if means.mean_pos.len() != data.d() || means.mean_neg.len() != data.d() {
            return Err(Error::Dimension("class means do not match the data dimension".into()));
        }
        let mean_pos = means.mean_pos.as_slice().to_vec();
        let mean_neg = means.mean_neg.as_slice().to_vec();
        let mean_gap = mean_neg.iter().zip(&mean_pos).map(|(n, p)| n - p).collect();
        Ok(Self { data, mean_pos, mean_neg, mean_gap, ratio })
    }

    pub fn from_data(data: &'a Dataset) -> Result<Self> {
        Self::new(data, &class_means(data)?)
    }

    pub fn data(&self) -> &'a Dataset {
        self.data
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn d(&self) -> usize {
        self.data.d()
    }

    /// Class-dependent weight of the centered quadratic term, `1/r` or `1/(1 − r)`.
    fn class_weight(&self, label: Label) -> f64 {
        match label {
            Label::Positive => 1.0 / self.ratio,
            Label::Negative => 1.0 / (1.0 - self.ratio),
        }
    }

    fn class_mean(&self, label: Label) -> &[f64] {
        match label {
            Label::Positive => &self.mean_pos,
            Label::Negative => &self.mean_neg,
        }
    }

    /// `F(w)`, averaged over all examples.
    pub fn value(&self, w: &[f64]) -> f64 {
        let w_pos = dot(w, &self.mean_pos);
        let w_neg = dot(w, &self.mean_neg);
        let mut centered = 0.0;
        for i in 0..self.data.n() {
            let label = self.data.label(i);
            let offset = match label {
                Label::Positive => w_pos,
                Label::Negative => w_neg,
            };
            let proj = dot(w, self.data.row(i)) - offset;
            centered += self.class_weight(label) * proj * proj;
        }
        let g = dot(w, &self.mean_gap);
        centered / self.data.n() as f64 + 1.0 + 2.0 * g + g * g
    }

    /// Writes `∇f_B(w) = 1/|B| Σ_{j∈B} ∇f̃(w; zⱼ)` into `out`.
    ///
    /// The per-example gradient is `2c·(wᵀ(x − x̄_y))(x − x̄_y)` with `c` the
    /// class weight, plus the shared `2(x̄₋ − x̄₊) + 2(wᵀ(x̄₋ − x̄₊))(x̄₋ − x̄₊)`.
    pub fn block_gradient_into(&self, block: &[usize], w: &[f64], out: &mut [f64]) {
        debug_assert!(!block.is_empty());
        let w_pos = dot(w, &self.mean_pos);
        let w_neg = dot(w, &self.mean_neg);
        let scale = 2.0 / block.len() as f64;
        let (mut pos_total, mut neg_total) = (0.0, 0.0);
        out.iter_mut().for_each(|x| *x = 0.0);
        for &j in block {
            let label = self.data.label(j);
            let row = self.data.row(j);
            let coef = match label {
                Label::Positive => {
                    let c = scale * self.class_weight(label) * (dot(w, row) - w_pos);
                    pos_total += c;
                    c
                }
                Label::Negative => {
                    let c = scale * self.class_weight(label) * (dot(w, row) - w_neg);
                    neg_total += c;
                    c
                }
            };
            axpy(coef, row, out);
        }
        axpy(-pos_total, &self.mean_pos, out);
        axpy(-neg_total, &self.mean_neg, out);
        let g = dot(w, &self.mean_gap);
        axpy(2.0 + 2.0 * g, &self.mean_gap, out);
    }

    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        let all: Vec<usize> = (0..self.data.n()).collect();
        let mut out = vec![0.0; self.d()];
        self.block_gradient_into(&all, w, &mut out);
        out
    }

    /// `vᵀ∇²F v`, the exact second-order term: `F(w + tv) = F(w) + t⟨∇F(w), v⟩ + t²/2 · vᵀ∇²F v`.
    pub fn hessian_quadratic_form(&self, v: &[f64]) -> f64 {
        let all: Vec<usize> = (0..self.data.n()).collect();
        self.block_hessian_quadratic_form(&all, v)
    }

    /// `vᵀ∇²f_B v` for a block objective.
    pub fn block_hessian_quadratic_form(&self, block: &[usize], v: &[f64]) -> f64 {
        let v_pos = dot(v, &self.mean_pos);
        let v_neg = dot(v, &self.mean_neg);
        let mut acc = 0.0;
        for &j in block {
            let label = self.data.label(j);
            let offset = match label {
                Label::Positive => v_pos,
                Label::Negative => v_neg,
            };
            let proj = dot(v, self.data.row(j)) - offset;
            acc += self.class_weight(label) * proj * proj;
        }
        let g = dot(v, &self.mean_gap);
        2.0 * acc / block.len() as f64 + 2.0 * g * g
    }

    /// Mean of `f̃` over the block, `f_B(w)`.
    pub fn block_value(&self, block: &[usize], w: &[f64]) -> f64 {
        let mut acc = 0.0;
        for &j in block {
            let label = self.data.label(j);
            let proj = dot(w, self.data.row(j)) - dot(w, self.class_mean(label));
            acc += self.class_weight(label) * proj * proj;
        }
        let g = dot(w, &self.mean_gap);
        acc / block.len() as f64 + 1.0 + 2.0 * g + g * g
    }
}

/// `F(w)` by the direct double loop over positive–negative pairs, `O(n₊n₋d)`.
/// This is the reference the single-sum form is checked against.
pub fn pairwise_objective(data: &Dataset, w: &Vector) -> Result<f64> {
    data.require_both_classes()?;
    check_dim(data, w)?;
    let w = w.as_slice();
    let mut total = 0.0;
    for i in (0..data.n()).filter(|&i| data.label(i).is_positive()) {
        for j in (0..data.n()).filter(|&j| !data.label(j).is_positive()) {
            let margin: f64 = data.row(i).iter().zip(data.row(j)).zip(w).map(|((a, b), c)| (a - b) * c).sum();
            total += (1.0 - margin) * (1.0 - margin);
        }
    }
    Ok(total / (data.n_pos() * data.n_neg()) as f64)
}

pub fn erm_objective(data: &Dataset, means: &ClassMeans, w: &Vector) -> Result<f64> {
    check_dim(data, w)?;
    Ok(AucObjective::new(data, means)?.value(w.as_slice()))
}

pub fn block_gradient(data: &Dataset, means: &ClassMeans, block: &[usize], w: &Vector) -> Result<Vector> {
    check_dim(data, w)?;
    if block.is_empty() {
        return Err(Error::Argument("block is empty".into()));
    }
    if let Some(&bad) = block.iter().find(|&&j| j >= data.n()) {
        return Err(Error::Argument(format!("block index {bad} out of range for n = {}", data.n())));
    }
    let objective = AucObjective::new(data, means)?;
    let mut out = vec![0.0; data.d()];
    objective.block_gradient_into(block, w.as_slice(), &mut out);
    Vector::new(out)
}

pub fn full_gradient(data: &Dataset, means: &ClassMeans, w: &Vector) -> Result<Vector> {
    let all: Vec<usize> = (0..data.n()).collect();
    block_gradient(data, means, &all, w)
}

pub fn hessian_quadratic_form(data: &Dataset, means: &ClassMeans, v: &Vector) -> Result<f64> {
    check_dim(data, v)?;
    Ok(AucObjective::new(data, means)?.hessian_quadratic_form(v.as_slice()))
}

fn check_dim(data: &Dataset, w: &Vector) -> Result<()> {
    if w.len() != data.d() {
        return Err(Error::Dimension(format!("vector length {} vs data dimension {}", w.len(), data.d())));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;
    use rand_distr::{Distribution, StandardNormal};

    fn toy() -> Dataset {
        Dataset::from_rows(&[vec![1.0], vec![0.0]], vec![Label::Positive, Label::Negative]).unwrap()
    }

    fn random_data(n: usize, d: usize, s: u64) -> Dataset {
        let mut rng = seed::rng(s);
        let features: Vec<f64> = (0..n * d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut labels: Vec<Label> =
            (0..n).map(|i| if i % 3 == 0 { Label::Positive } else { Label::Negative }).collect();
        labels[1] = Label::Positive;
        Dataset::new(features, d, labels).unwrap()
    }

    fn random_vec(d: usize, s: u64) -> Vector {
        let mut rng = seed::rng(s);
        Vector::new((0..d).map(|_| StandardNormal.sample(&mut rng)).collect()).unwrap()
    }

    #[test]
    fn class_mean_examples() {
        let data =
            Dataset::from_rows(&[vec![2.0, 4.0], vec![0.0, 0.0]], vec![Label::Positive, Label::Negative]).unwrap();
        let m = class_means(&data).unwrap();
        assert_eq!(m.mean_pos.as_slice(), &[2.0, 4.0]);
        assert_eq!(m.mean_neg.as_slice(), &[0.0, 0.0]);

        let data = Dataset::from_rows(
            &[vec![1.0, 0.0], vec![3.0, 0.0], vec![9.0, 9.0]],
            vec![Label::Positive, Label::Positive, Label::Negative],
        )
        .unwrap();
        assert_eq!(class_means(&data).unwrap().mean_pos.as_slice(), &[2.0, 0.0]);

        let all_pos = Dataset::from_rows(&[vec![1.0], vec![2.0]], vec![Label::Positive; 2]).unwrap();
        assert!(matches!(class_means(&all_pos), Err(Error::DegenerateData(_))));
    }

    #[test]
    fn objective_anchors() {
        let data = toy();
        let means = class_means(&data).unwrap();
        let one = Vector::new(vec![1.0]).unwrap();
        assert_eq!(pairwise_objective(&data, &one).unwrap(), 0.0);
        assert!(erm_objective(&data, &means, &one).unwrap().abs() < 1e-15);

        let data = random_data(10, 4, 3);
        let means = class_means(&data).unwrap();
        let zero = Vector::zeros(4);
        assert_eq!(pairwise_objective(&data, &zero).unwrap(), 1.0);
        assert!((erm_objective(&data, &means, &zero).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn erm_matches_pairwise_on_random_data() {
        for s in 0..10 {
            let data = random_data(10, 4, s);
            let means = class_means(&data).unwrap();
            let w = random_vec(4, 100 + s);
            let a = pairwise_objective(&data, &w).unwrap();
            let b = erm_objective(&data, &means, &w).unwrap();
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn gradient_at_origin_is_twice_mean_gap() {
        let data = random_data(12, 3, 5);
        let means = class_means(&data).unwrap();
        let g = block_gradient(&data, &means, &[0, 4, 7], &Vector::zeros(3)).unwrap();
        for k in 0..3 {
            let want = 2.0 * (means.mean_neg[k] - means.mean_pos[k]);
            assert!((g[k] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn equal_blocks_average_to_full_gradient() {
        let data = random_data(12, 5, 9);
        let means = class_means(&data).unwrap();
        let w = random_vec(5, 1);
        let partition = BlockPartition::shuffled(12, 4, &mut seed::rng(2)).unwrap();
        assert_eq!(partition.len(), 3);
        let mut avg = vec![0.0; 5];
        for b in partition.blocks() {
            let g = block_gradient(&data, &means, b, &w).unwrap();
            axpy(1.0 / 3.0, g.as_slice(), &mut avg);
        }
        let full = full_gradient(&data, &means, &w).unwrap();
        for k in 0..5 {
            assert!((avg[k] - full[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn hessian_examples() {
        let data = toy();
        let means = class_means(&data).unwrap();
        let one = Vector::new(vec![1.0]).unwrap();
        assert!((hessian_quadratic_form(&data, &means, &one).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(hessian_quadratic_form(&data, &means, &Vector::zeros(1)).unwrap(), 0.0);
    }

    #[test]
    fn block_value_averages_to_objective() {
        let data = random_data(12, 3, 4);
        let obj = AucObjective::from_data(&data).unwrap();
        let w = random_vec(3, 8);
        let partition = BlockPartition::contiguous(12, 6).unwrap();
        let avg: f64 = partition.blocks().iter().map(|b| obj.block_value(b, w.as_slice())).sum::<f64>() / 2.0;
        assert!((avg - obj.value(w.as_slice())).abs() < 1e-12);
    }

    #[test]
    fn error_paths() {
        let data = toy();
        let means = class_means(&data).unwrap();
        assert!(block_gradient(&data, &means, &[], &Vector::zeros(1)).is_err());
        assert!(block_gradient(&data, &means, &[5], &Vector::zeros(1)).is_err());
        assert!(matches!(erm_objective(&data, &means, &Vector::zeros(2)), Err(Error::Dimension(_))));
    }

    #[test]
    fn ragged_partition() {
        let p = BlockPartition::contiguous(10, 4).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.block(2), &[8, 9]);
        assert!(BlockPartition::contiguous(3, 4).is_err());
        assert!(BlockPartition::from_order(&[0, 0, 1], 1).is_err());
    }
}
