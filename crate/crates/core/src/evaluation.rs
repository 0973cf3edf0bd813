//! Evaluation protocols: seeded k-fold cross-validation and leave-one-out,
//! with mean and sample standard deviation over the folds.
//!
//! Folds may train in parallel; results are assembled by fold index, so the
//! report is identical to sequential execution. Wall-clock times are kept
//! out of the serialized report so that repeated runs are byte-identical.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::{predict, train, PipelineConfig, TrainedModel};
use crate::rng::{derive_seed, rng_from_seed, shuffle};
use crate::tabular::Dataset;

/// Per-fold model summary kept for audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub formula: String,
    pub chosen_ell: usize,
}

/// Cross-validation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub k: usize,
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation (n-1 denominator); `None` for
    /// leave-one-out, where per-fold accuracies are 0/1 indicators.
    pub std: Option<f64>,
    pub per_fold: Vec<FoldSummary>,
    /// Wall-clock seconds per fold. Excluded from serialization so reports
    /// stay deterministic.
    #[serde(skip)]
    pub runtime_per_fold: Vec<f64>,
}

impl CvReport {
    /// Mean chosen feature count across folds.
    pub fn mean_chosen_ell(&self) -> f64 {
        if self.per_fold.is_empty() {
            return 0.0;
        }
        self.per_fold.iter().map(|f| f.chosen_ell as f64).sum::<f64>()
            / self.per_fold.len() as f64
    }
}

fn sample_std(values: &[f64], mean: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (n - 1) as f64).sqrt()
}

/// Contiguous fold boundaries over `n` shuffled rows: the first `n % k`
/// folds hold one extra row.
fn fold_ranges(n: usize, k: usize) -> Vec<(usize, usize)> {
    let base = n / k;
    let extra = n % k;
    let mut ranges = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let len = base + usize::from(i < extra);
        ranges.push((start, start + len));
        start += len;
    }
    ranges
}

fn run_fold(
    d: &Dataset,
    train_idx: &[usize],
    test_idx: &[usize],
    cfg: &PipelineConfig,
) -> Result<(f64, FoldSummary, f64)> {
    let started = std::time::Instant::now();
    let model: TrainedModel = train(&d.subset(train_idx), cfg)?;
    let targets = d.target_values();
    let mut correct = 0usize;
    for &i in test_idx {
        let p = predict(&model, &d.predictor_row(i))?;
        if Some(p) == targets[i] {
            correct += 1;
        }
    }
    let accuracy = correct as f64 / test_idx.len() as f64;
    let summary = FoldSummary {
        formula: model.formula_text(),
        chosen_ell: model.chosen_ell,
    };
    Ok((accuracy, summary, started.elapsed().as_secs_f64()))
}

/// Seeded k-fold cross-validation: shuffle once, split into contiguous
/// folds, train on each complement with a fold-derived pipeline seed, and
/// score on the held-out fold.
pub fn k_fold_cv(d: &Dataset, k: usize, cfg: &PipelineConfig, seed: u64) -> Result<CvReport> {
    if k < 2 {
        return Err(Error::InvalidParam(format!("k must be at least 2, got {k}")));
    }
    if d.n_rows() < k {
        return Err(Error::InvalidParam(format!(
            "k = {k} exceeds the {} available rows",
            d.n_rows()
        )));
    }
    let n = d.n_rows();
    let mut order: Vec<usize> = (0..n).collect();
    shuffle(&mut order, &mut rng_from_seed(seed));
    let ranges = fold_ranges(n, k);

    let folds: Vec<(Vec<usize>, Vec<usize>)> = ranges
        .iter()
        .map(|&(start, end)| {
            let mut test: Vec<usize> = order[start..end].to_vec();
            let mut train_idx: Vec<usize> = order[..start]
                .iter()
                .chain(&order[end..])
                .copied()
                .collect();
            test.sort_unstable();
            train_idx.sort_unstable();
            (train_idx, test)
        })
        .collect();

    let results: Vec<(f64, FoldSummary, f64)> = folds
        .par_iter()
        .enumerate()
        .map(|(i, (train_idx, test_idx))| {
            let fold_cfg = PipelineConfig {
                seed: derive_seed(seed, i as u64),
                ..cfg.clone()
            };
            run_fold(d, train_idx, test_idx, &fold_cfg)
        })
        .collect::<Result<_>>()?;

    let fold_accuracies: Vec<f64> = results.iter().map(|r| r.0).collect();
    let per_fold: Vec<FoldSummary> = results.iter().map(|r| r.1.clone()).collect();
    let runtime_per_fold: Vec<f64> = results.iter().map(|r| r.2).collect();
    let mean = fold_accuracies.iter().sum::<f64>() / k as f64;
    let std = sample_std(&fold_accuracies, mean);
    Ok(CvReport {
        k,
        fold_accuracies,
        mean,
        std: Some(std),
        per_fold,
        runtime_per_fold,
    })
}

/// Leave-one-out: one model per held-out row. The mean is the fraction of
/// rows classified correctly; the standard deviation is not applicable and
/// reported as `None`.
pub fn leave_one_out(d: &Dataset, cfg: &PipelineConfig, seed: u64) -> Result<CvReport> {
    let n = d.n_rows();
    if n < 2 {
        return Err(Error::InvalidParam(
            "leave-one-out needs at least two rows".into(),
        ));
    }
    let results: Vec<(f64, FoldSummary, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let train_idx: Vec<usize> = (0..n).filter(|&j| j != i).collect();
            let fold_cfg = PipelineConfig {
                seed: derive_seed(seed, i as u64),
                ..cfg.clone()
            };
            run_fold(d, &train_idx, &[i], &fold_cfg)
        })
        .collect::<Result<_>>()?;

    let fold_accuracies: Vec<f64> = results.iter().map(|r| r.0).collect();
    let per_fold: Vec<FoldSummary> = results.iter().map(|r| r.1.clone()).collect();
    let runtime_per_fold: Vec<f64> = results.iter().map(|r| r.2).collect();
    let mean = fold_accuracies.iter().sum::<f64>() / n as f64;
    Ok(CvReport {
        k: n,
        fold_accuracies,
        mean,
        std: None,
        per_fold,
        runtime_per_fold,
    })
}
