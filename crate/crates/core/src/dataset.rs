use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, Vector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }

    pub fn flipped(self) -> Self {
        match self {
            Label::Positive => Label::Negative,
            Label::Negative => Label::Positive,
        }
    }
}

/// Dense `n × d` feature matrix (row-major) with ±1 labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    d: usize,
    features: Vec<f64>,
    labels: Vec<Label>,
    n_pos: usize,
}

impl Dataset {
    pub fn new(features: Vec<f64>, d: usize, labels: Vec<Label>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("feature dimension must be positive".into()));
        }
        if features.len() != labels.len() * d {
            return Err(Error::Dimension(format!(
                "{} feature values for {} rows of dimension {d}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(i) = features.iter().position(|x| !x.is_finite()) {
            return Err(Error::Argument(format!("non-finite feature in row {} column {}", i / d, i % d)));
        }
        let n_pos = labels.iter().filter(|l| l.is_positive()).count();
        Ok(Self { d, features, labels, n_pos })
    }

    pub fn from_rows(rows: &[Vec<f64>], labels: Vec<Label>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::Dimension(format!("row {bad} has length {}, expected {d}", rows[bad].len())));
        }
        Self::new(rows.concat(), d, labels)
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_pos(&self) -> usize {
        self.n_pos
    }

    pub fn n_neg(&self) -> usize {
        self.n() - self.n_pos
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.features[i * self.d..(i + 1) * self.d]
    }

    pub fn label(&self, i: usize) -> Label {
        self.labels[i]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn has_both_classes(&self) -> bool {
        self.n_pos > 0 && self.n_pos < self.n()
    }

    pub fn require_both_classes(&self) -> Result<()> {
        if !self.has_both_classes() {
            return Err(Error::DegenerateData(format!(
                "need both classes, have {} positive and {} negative",
                self.n_pos,
                self.n_neg()
            )));
        }
        Ok(())
    }

    /// Imbalance ratio `r = n₊ / n`.
    pub fn imbalance_ratio(&self) -> Result<f64> {
        self.require_both_classes()?;
        Ok(self.n_pos as f64 / self.n() as f64)
    }

    /// Rows `indices` in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.d);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        let n_pos = labels.iter().filter(|l| l.is_positive()).count();
        Dataset { d: self.d, features, labels, n_pos }
    }

    /// Linear decision values `wᵀxᵢ` for every row.
    pub fn scores(&self, w: &Vector) -> Result<Vec<f64>> {
        if w.len() != self.d {
            return Err(Error::Dimension(format!("weights have length {}, data has d = {}", w.len(), self.d)));
        }
        Ok((0..self.n()).map(|i| dot(self.row(i), w.as_slice())).collect())
    }

    /// Same examples with every label flipped.
    pub fn with_flipped_labels(&self) -> Dataset {
        let labels: Vec<Label> = self.labels.iter().map(|l| l.flipped()).collect();
        Dataset { d: self.d, features: self.features.clone(), n_pos: self.n() - self.n_pos, labels }
    }
}
