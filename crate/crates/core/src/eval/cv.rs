use serde::{Deserialize, Serialize};

use super::folds::{make_folds, FoldPlan};
use super::knn::knn1_classify;
use super::LabeledDataset;
use crate::error::{Error, Result};
use crate::par;
use crate::reducers::{Fitted, MethodSpec};

/// Rounds a nonnegative value half-up to two decimals.
pub fn round_half_up(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Outcome of one cross-validated (dataset, method, d) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: String,
    pub method: String,
    pub d: usize,
    pub params: String,
    pub fold_correct: Vec<usize>,
    pub fold_total: Vec<usize>,
    /// Percent per fold, unrounded.
    pub fold_accuracies: Vec<f64>,
    /// Mean of `fold_accuracies`, percent, rounded half-up to 2 decimals.
    pub mean_accuracy: f64,
    /// `(c, mean accuracy)` for every percentile tried; empty when no sweep ran.
    pub sweep: Vec<(u8, f64)>,
}

impl ExperimentReport {
    pub fn from_counts(
        dataset: &str,
        spec: &MethodSpec,
        d: usize,
        fold_correct: Vec<usize>,
        fold_total: Vec<usize>,
    ) -> Self {
        let fold_accuracies: Vec<f64> = fold_correct
            .iter()
            .zip(&fold_total)
            .map(|(&c, &t)| 100.0 * c as f64 / t as f64)
            .collect();
        let mean = fold_accuracies.iter().sum::<f64>() / fold_accuracies.len() as f64;
        ExperimentReport {
            dataset: dataset.to_string(),
            method: spec.tag().to_string(),
            d,
            params: spec.params(),
            fold_correct,
            fold_total,
            fold_accuracies,
            mean_accuracy: round_half_up(mean),
            sweep: Vec::new(),
        }
    }

    pub const TSV_HEADER: &'static str = "dataset\tmethod\td\tparams\tfold_accuracies\tmean";

    pub fn tsv_row(&self) -> String {
        let folds: Vec<String> = self
            .fold_accuracies
            .iter()
            .map(|a| format!("{a:.2}"))
            .collect();
        format!(
            "{}\t{}\t{}\t{}\t{}\t{:.2}",
            self.dataset,
            self.method,
            self.d,
            self.params,
            folds.join(","),
            self.mean_accuracy
        )
    }
}

/// Fits `spec` on the training split of `fold` only.
pub fn fit_fold(
    ds: &LabeledDataset,
    spec: &MethodSpec,
    d: usize,
    plan: &FoldPlan,
    fold: usize,
) -> Result<Fitted> {
    let train = ds.features.select_rows(&plan.train_indices(fold))?;
    spec.fit(&train, d)
}

fn run_fold(
    ds: &LabeledDataset,
    spec: &MethodSpec,
    d: usize,
    plan: &FoldPlan,
    fold: usize,
) -> Result<(usize, usize)> {
    let train_idx = plan.train_indices(fold);
    let test_idx = plan.test_indices(fold);
    if test_idx.is_empty() {
        return Err(Error::param("empty held-out fold"));
    }
    let model = fit_fold(ds, spec, d, plan, fold)?;
    let train_z = model.transform(&ds.features.select_rows(&train_idx)?)?;
    let test_z = model.transform(&ds.features.select_rows(&test_idx)?)?;
    let train_labels: Vec<usize> = train_idx.iter().map(|&i| ds.labels[i]).collect();
    let mut correct = 0;
    for (row, &i) in test_z.row_iter().zip(&test_idx) {
        if knn1_classify(&train_z, &train_labels, row)? == ds.labels[i] {
            correct += 1;
        }
    }
    Ok((correct, test_idx.len()))
}

/// k-fold cross-validation of reducer + 1-NN. Folds run concurrently; the
/// first failing fold (in fold order) aborts the experiment.
pub fn cross_validate(
    ds: &LabeledDataset,
    spec: &MethodSpec,
    d: usize,
    plan: &FoldPlan,
) -> Result<ExperimentReport> {
    if plan.assignment.len() != ds.len() {
        return Err(Error::dim(format!(
            "fold plan covers {} samples, dataset has {}",
            plan.assignment.len(),
            ds.len()
        )));
    }
    let results = par::map_range(plan.k, |f| run_fold(ds, spec, d, plan, f));
    let mut correct = Vec::with_capacity(plan.k);
    let mut total = Vec::with_capacity(plan.k);
    for (fold, r) in results.into_iter().enumerate() {
        let (c, t) = r.map_err(|e| Error::Fold {
            fold,
            source: Box::new(e),
        })?;
        correct.push(c);
        total.push(t);
    }
    Ok(ExperimentReport::from_counts(
        &ds.name, spec, d, correct, total,
    ))
}

/// Grid settings for [`run_table2`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table2Config {
    pub dims: Vec<usize>,
    pub k: usize,
    pub seed: u64,
    pub stratified: bool,
    /// Percentiles tried for Huber-weighted methods; the best mean wins,
    /// ties going to the smallest `c`. Empty means use each spec as given.
    pub sweep: Vec<u8>,
}

impl Default for Table2Config {
    fn default() -> Self {
        Table2Config {
            dims: vec![2, 3],
            k: 10,
            seed: 42,
            stratified: true,
            sweep: vec![85, 90, 95],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CellOutcome {
    Done(ExperimentReport),
    Failed {
        dataset: String,
        method: String,
        d: usize,
        error: String,
    },
}

impl CellOutcome {
    pub fn report(&self) -> Option<&ExperimentReport> {
        match self {
            CellOutcome::Done(r) => Some(r),
            CellOutcome::Failed { .. } => None,
        }
    }

    pub fn tsv_row(&self) -> String {
        match self {
            CellOutcome::Done(r) => r.tsv_row(),
            CellOutcome::Failed {
                dataset,
                method,
                d,
                error,
            } => {
                format!(
                    "{dataset}\t{method}\t{d}\tfailed: {}\t-\t-",
                    error.replace(['\t', '\n'], " ")
                )
            }
        }
    }
}

fn run_cell(
    ds: &LabeledDataset,
    spec: &MethodSpec,
    d: usize,
    plan: &FoldPlan,
    sweep: &[u8],
) -> Result<ExperimentReport> {
    if spec.huber_options().is_none() || sweep.is_empty() {
        return cross_validate(ds, spec, d, plan);
    }
    let mut cs = sweep.to_vec();
    cs.sort_unstable();
    cs.dedup();
    let mut best: Option<ExperimentReport> = None;
    let mut tried = Vec::with_capacity(cs.len());
    let mut last_err = None;
    for c in cs {
        match cross_validate(ds, &spec.with_percentile(c), d, plan) {
            Ok(r) => {
                tried.push((c, r.mean_accuracy));
                if best
                    .as_ref()
                    .is_none_or(|b| r.mean_accuracy > b.mean_accuracy)
                {
                    best = Some(r);
                }
            }
            Err(e) => {
                log::warn!("{} {} d={d} c={c}: {e}", ds.name, spec.tag());
                last_err = Some(e);
            }
        }
    }
    match best {
        Some(mut r) => {
            r.sweep = tried;
            Ok(r)
        }
        None => Err(last_err.expect("sweep is nonempty")),
    }
}

/// Full grid in benchmark-table order: dataset, then `d`, then method.
/// Cells run concurrently; a failing cell is recorded and the run continues.
pub fn run_table2(
    datasets: &[LabeledDataset],
    methods: &[MethodSpec],
    cfg: &Table2Config,
) -> Vec<CellOutcome> {
    let plans: Vec<Result<FoldPlan>> = datasets
        .iter()
        .map(|ds| make_folds(&ds.labels, cfg.k, cfg.seed, cfg.stratified))
        .collect();
    let mut cells = Vec::new();
    for (di, _) in datasets.iter().enumerate() {
        for &d in &cfg.dims {
            for m in methods {
                cells.push((di, d, m));
            }
        }
    }
    par::map_slice(&cells, |&(di, d, spec)| {
        let ds = &datasets[di];
        let result = match &plans[di] {
            Ok(plan) => run_cell(ds, spec, d, plan, &cfg.sweep),
            Err(e) => Err(Error::param(e.to_string())),
        };
        match result {
            Ok(r) => CellOutcome::Done(r),
            Err(e) => CellOutcome::Failed {
                dataset: ds.name.clone(),
                method: spec.tag().to_string(),
                d,
                error: e.to_string(),
            },
        }
    })
}
