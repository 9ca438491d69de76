//! Experiment harness: the synthetic outlier-line dataset, 1-NN
//! classification, k-fold cross-validation and the benchmark grid runner.

pub mod cv;
pub mod eigendirs;
pub mod folds;
pub mod knn;
pub mod synth;

pub use cv::{
    cross_validate, round_half_up, run_table2, CellOutcome, ExperimentReport, Table2Config,
};
pub use eigendirs::{eigendirection_report, Direction};
pub use folds::{make_folds, FoldPlan};
pub use knn::knn1_classify;
pub use synth::{synth_line, synth_line_dataset, SynthConfig, SynthData};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Feature matrix with integer class labels in `0..class_count`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    pub name: String,
    pub features: Matrix,
    pub labels: Vec<usize>,
    pub class_count: usize,
    /// Original label text per class id.
    pub class_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(
        name: impl Into<String>,
        features: Matrix,
        labels: Vec<usize>,
        class_names: Vec<String>,
    ) -> Result<Self> {
        let class_count = class_names.len();
        if labels.len() != features.rows() {
            return Err(Error::dim(format!(
                "{} labels for {} samples",
                labels.len(),
                features.rows()
            )));
        }
        if class_count < 2 {
            return Err(Error::param(format!(
                "a labelled dataset needs at least two classes, got {class_count}"
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_count) {
            return Err(Error::param(format!(
                "label {bad} outside 0..{class_count}"
            )));
        }
        Ok(LabeledDataset {
            name: name.into(),
            features,
            labels,
            class_count,
            class_names,
        })
    }

    /// Builds a dataset whose class names are the ids themselves.
    pub fn from_ids(name: impl Into<String>, features: Matrix, labels: Vec<usize>) -> Result<Self> {
        let count = labels.iter().max().map_or(0, |m| m + 1);
        let names = (0..count).map(|c| c.to_string()).collect();
        LabeledDataset::new(name, features, labels, names)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Rows reordered by `perm` (row `i` of the result is row `perm[i]`).
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        Ok(LabeledDataset {
            name: self.name.clone(),
            features: self.features.select_rows(perm)?,
            labels: perm.iter().map(|&i| self.labels[i]).collect(),
            class_count: self.class_count,
            class_names: self.class_names.clone(),
        })
    }
}
