//! Dense vectors, support sets, coordinate projection and hard thresholding.

mod select;

pub use select::select_nth;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A dense real vector whose entries are all finite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|x| !x.is_finite()) {
            return Err(Error::Argument(format!("vector entry {i} is not finite ({})", values[i])));
        }
        Ok(Self(values))
    }

    pub fn zeros(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Number of nonzero entries, `‖v‖₀`.
    pub fn nnz(&self) -> usize {
        self.0.iter().filter(|&&x| x != 0.0).count()
    }

    pub fn support(&self) -> SupportSet {
        SupportSet(self.0.iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(i, _)| i).collect())
    }

    pub fn dot(&self, other: &Vector) -> Result<f64> {
        check_len(self.len(), other.len())?;
        Ok(dot(&self.0, &other.0))
    }

    pub fn norm2(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn distance(&self, other: &Vector) -> Result<f64> {
        check_len(self.len(), other.len())?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt())
    }
}

impl TryFrom<Vec<f64>> for Vector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Vector::new(values)
    }
}

impl From<Vector> for Vec<f64> {
    fn from(v: Vector) -> Self {
        v.0
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// A set of coordinate indices, stored strictly increasing.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SupportSet(Vec<usize>);

impl SupportSet {
    /// Builds a support set from indices in any order. Duplicates are rejected.
    pub fn new(mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Argument(format!("duplicate support index {}", w[0])));
        }
        Ok(Self(indices))
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// Support of `values` after zeroing entries with `|x| <= eps`.
    pub fn of_truncated(values: &[f64], eps: f64) -> Self {
        Self(values.iter().enumerate().filter(|(_, x)| x.abs() > eps).map(|(i, _)| i).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn intersection_len(&self, other: &SupportSet) -> usize {
        let (mut a, mut b, mut count) = (0, 0, 0);
        while a < self.0.len() && b < other.0.len() {
            match self.0[a].cmp(&other.0[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    a += 1;
                    b += 1;
                }
            }
        }
        count
    }

    pub fn union_len(&self, other: &SupportSet) -> usize {
        self.len() + other.len() - self.intersection_len(other)
    }
}

impl TryFrom<Vec<usize>> for SupportSet {
    type Error = Error;

    fn try_from(indices: Vec<usize>) -> Result<Self> {
        SupportSet::new(indices)
    }
}

impl From<SupportSet> for Vec<usize> {
    fn from(s: SupportSet) -> Self {
        s.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `y += alpha * x`
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension(format!("lengths {a} and {b} differ")));
    }
    Ok(())
}

/// Orthogonal projection onto the coordinates in `omega`.
pub fn project(v: &Vector, omega: &SupportSet) -> Result<Vector> {
    if let Some(max) = omega.max_index() {
        if max >= v.len() {
            return Err(Error::Dimension(format!("support index {max} out of range for dimension {}", v.len())));
        }
    }
    let mut out = vec![0.0; v.len()];
    for &i in omega.indices() {
        out[i] = v.0[i];
    }
    Ok(Vector(out))
}

fn check_budget(k: usize, d: usize) -> Result<()> {
    if k == 0 || k > d {
        return Err(Error::Argument(format!("sparsity {k} must lie in [1, {d}]")));
    }
    Ok(())
}

/// The `k`-th largest of `|v_1|, …, |v_d|`, counting multiplicity.
///
/// Runs Floyd–Rivest on a scratch copy of the magnitudes; `v` is untouched.
pub fn select_kth_magnitude(v: &Vector, k: usize) -> Result<f64> {
    check_budget(k, v.len())?;
    let mut scratch = Vec::with_capacity(v.len());
    Ok(kth_magnitude(&v.0, k, &mut scratch))
}

fn kth_magnitude(values: &[f64], k: usize, scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.extend(values.iter().map(|x| x.abs()));
    let pos = values.len() - k;
    select_nth(scratch, pos);
    scratch[pos]
}

/// Index set kept by [`hard_threshold`]: every coordinate strictly above the
/// `k`-th largest magnitude, then coordinates tied with it in increasing
/// index order until `k` are kept.
pub fn hard_threshold_support(v: &Vector, k: usize) -> Result<SupportSet> {
    check_budget(k, v.len())?;
    let mut scratch = Vec::with_capacity(v.len());
    let tau = kth_magnitude(&v.0, k, &mut scratch);
    let above = v.0.iter().filter(|x| x.abs() > tau).count();
    let mut ties_left = k - above;
    let mut kept = Vec::with_capacity(k);
    for (i, x) in v.0.iter().enumerate() {
        let m = x.abs();
        if m > tau {
            kept.push(i);
        } else if m == tau && ties_left > 0 {
            kept.push(i);
            ties_left -= 1;
        }
    }
    Ok(SupportSet(kept))
}

/// `H_k(v)`: keep the `k` largest-magnitude coordinates of `v`, zero the rest.
/// Ties at the threshold magnitude go to the lowest indices.
pub fn hard_threshold(v: &Vector, k: usize) -> Result<Vector> {
    check_budget(k, v.len())?;
    let mut out = v.0.clone();
    let mut scratch = Vec::with_capacity(v.len());
    threshold_in_place(&mut out, k, &mut scratch);
    Ok(Vector(out))
}

/// In-place `H_k` for the training loop. `scratch` is reused across calls.
///
/// Requires `1 <= k <= values.len()` and finite entries.
pub fn threshold_in_place(values: &mut [f64], k: usize, scratch: &mut Vec<f64>) {
    debug_assert!(k >= 1 && k <= values.len());
    if k == values.len() {
        return;
    }
    let tau = kth_magnitude(values, k, scratch);
    let above = values.iter().filter(|x| x.abs() > tau).count();
    let mut ties_left = k - above;
    for x in values.iter_mut() {
        let m = x.abs();
        if m > tau {
            continue;
        }
        if m == tau && ties_left > 0 {
            ties_left -= 1;
        } else {
            *x = 0.0;
        }
    }
}
