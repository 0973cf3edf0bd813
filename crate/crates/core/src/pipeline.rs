//! End-to-end training: seeded 70/30 split, Booleanization fitted on the
//! training part, a sweep over feature counts and scorers that records the
//! best validated classifier per count, the one-percentage-point rule to
//! pick the smallest sufficient feature count, a refit of thresholds on the
//! full data, and exact simplification of the final formula.
//!
//! Training is deterministic: identical (dataset, config) pairs produce
//! bit-identical models.

use serde::{Deserialize, Serialize};

use crate::booleanize::{
    apply_booleanization, fit_booleanization, BooleanizationMap,
};
use crate::dnf::{self, DnfFormula};
use crate::error::{Error, Result};
use crate::ideal::{accuracy, build_type_table, ideal_classifier};
use crate::rng::{rng_from_seed, shuffle};
use crate::scoring::{rank_features, FeatureSet, ScorerKind};
use crate::tabular::{AttributeSpec, Dataset, Value};

pub const MAX_SELECTABLE_FEATURES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Upper end of the feature-count sweep.
    pub max_features: usize,
    /// Width of the accuracy band, in percentage points, within which the
    /// smallest feature count is preferred.
    pub tolerance_points: f64,
    /// Fraction of the data held out for validation inside training.
    pub validation_fraction: f64,
    /// Scorers to try at each feature count; ties go to the earliest in
    /// canonical order (f_test, mutual_info, chi2).
    pub scorers: Vec<ScorerKind>,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            max_features: 10,
            tolerance_points: 1.0,
            validation_fraction: 0.30,
            scorers: ScorerKind::ALL.to_vec(),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_features == 0 || self.max_features > MAX_SELECTABLE_FEATURES {
            return Err(Error::InvalidParam(format!(
                "max_features must be in 1..={MAX_SELECTABLE_FEATURES}, got {}",
                self.max_features
            )));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::InvalidParam(format!(
                "validation_fraction must be in (0, 1), got {}",
                self.validation_fraction
            )));
        }
        if self.tolerance_points < 0.0 {
            return Err(Error::InvalidParam(format!(
                "tolerance_points must be non-negative, got {}",
                self.tolerance_points
            )));
        }
        if self.scorers.is_empty() {
            return Err(Error::InvalidParam("no scorers configured".into()));
        }
        let mut seen = self.scorers.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.scorers.len() {
            return Err(Error::InvalidParam("duplicate scorers configured".into()));
        }
        Ok(())
    }
}

/// The best validated classifier found at one feature count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRecord {
    pub ell: usize,
    pub scorer: ScorerKind,
    pub feature_names: Vec<String>,
    pub validation_accuracy: f64,
}

/// A trained classifier, self-contained for prediction on raw rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    /// Simplified formula over the feature-set vocabulary.
    pub formula: DnfFormula,
    /// Selected features: positions into the booleanization's feature list.
    pub feature_set: FeatureSet,
    /// Booleanization fitted on the full training data.
    pub booleanization: BooleanizationMap,
    pub records: Vec<SelectionRecord>,
    pub chosen_ell: usize,
    pub config: PipelineConfig,
}

impl TrainedModel {
    pub fn formula_text(&self) -> String {
        dnf::render(&self.formula, &self.feature_set.names)
            .expect("model formula matches its feature names")
    }
}

/// Seeded uniform split into validation and training index sets, both in
/// original row order.
fn split_indices(n: usize, fraction: f64, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut order: Vec<usize> = (0..n).collect();
    shuffle(&mut order, &mut rng_from_seed(seed));
    let mut n_val = (n as f64 * fraction).round() as usize;
    n_val = n_val.clamp(1, n - 1);
    let mut val: Vec<usize> = order[..n_val].to_vec();
    let mut train: Vec<usize> = order[n_val..].to_vec();
    val.sort_unstable();
    train.sort_unstable();
    (val, train)
}

/// Trains on a cleaned dataset. See the module docs for the exact steps.
///
/// A single-class target yields the constant formula directly; the F-test
/// scorer cannot rank features in that case and is skipped (configuring
/// only the F-test then errors).
pub fn train(d: &Dataset, cfg: &PipelineConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    if d.n_rows() < 2 {
        return Err(Error::EmptyDataset(
            "training needs at least two rows".into(),
        ));
    }
    if d.has_missing() {
        return Err(Error::SchemaMismatch(
            "dataset contains missing values; call drop_missing first".into(),
        ));
    }

    let (val_idx, train_idx) = split_indices(d.n_rows(), cfg.validation_fraction, cfg.seed);
    let d_train = d.subset(&train_idx);
    let d_val = d.subset(&val_idx);

    let map_train = fit_booleanization(&d_train)?;
    let bd_train = apply_booleanization(&map_train, &d_train)?;
    let bd_val = apply_booleanization(&map_train, &d_val)?;

    let single_class_train = bd_train.targets.iter().all(|&t| t == bd_train.targets[0]);
    let usable_scorers: Vec<ScorerKind> = if single_class_train {
        cfg.scorers
            .iter()
            .copied()
            .filter(|s| *s != ScorerKind::FTest)
            .collect()
    } else {
        cfg.scorers.clone()
    };
    if usable_scorers.is_empty() {
        return Err(Error::SingleClassTarget);
    }

    // One ranking per scorer; its prefixes are the top-k selections.
    let mut rankings: Vec<(ScorerKind, Vec<usize>)> = Vec::new();
    for &scorer in &usable_scorers {
        rankings.push((scorer, rank_features(&bd_train, scorer)?));
    }

    let n_features = bd_train.n_features();
    if n_features == 0 {
        return Err(Error::EmptyDataset("dataset has no predictor columns".into()));
    }
    let sweep_max = cfg.max_features.min(n_features);

    let mut records: Vec<SelectionRecord> = Vec::with_capacity(sweep_max);
    let mut best_sets: Vec<FeatureSet> = Vec::with_capacity(sweep_max);
    for ell in 1..=sweep_max {
        let mut best: Option<(f64, ScorerKind, FeatureSet)> = None;
        for (scorer, ranking) in &rankings {
            let indices: Vec<usize> = ranking[..ell].to_vec();
            let names: Vec<String> = indices
                .iter()
                .map(|&i| bd_train.feature_names[i].clone())
                .collect();
            let fs = FeatureSet::new(indices, names)?;
            let table = build_type_table(&bd_train, &fs)?;
            let classifier = ideal_classifier(&table);
            let r = accuracy(&classifier, &bd_val, &fs)?;
            let better = match &best {
                None => true,
                Some((best_r, best_scorer, _)) => {
                    r > *best_r || (r == *best_r && scorer < best_scorer)
                }
            };
            if better {
                best = Some((r, *scorer, fs));
            }
        }
        let (r, scorer, fs) = best.expect("at least one scorer is configured");
        records.push(SelectionRecord {
            ell,
            scorer,
            feature_names: fs.names.clone(),
            validation_accuracy: r,
        });
        best_sets.push(fs);
    }

    // One-percentage-point rule: smallest feature count whose validation
    // accuracy is within the tolerance of the best.
    let best_r = records
        .iter()
        .map(|rec| rec.validation_accuracy)
        .fold(f64::NEG_INFINITY, f64::max);
    let threshold = best_r - cfg.tolerance_points / 100.0;
    let chosen_pos = records
        .iter()
        .position(|rec| rec.validation_accuracy >= threshold)
        .expect("the best record satisfies its own threshold");
    let chosen_ell = records[chosen_pos].ell;

    // Refit thresholds on the full data; feature identities carry over.
    let map_full = fit_booleanization(d)?;
    let selected = &best_sets[chosen_pos];
    let mut indices = Vec::with_capacity(selected.len());
    for &old_idx in &selected.indices {
        let identity = map_train.features()[old_idx].identity();
        let new_idx = map_full.position_of(&identity).ok_or_else(|| {
            Error::SchemaMismatch(format!(
                "feature '{}' disappeared on refit",
                map_train.features()[old_idx].name()
            ))
        })?;
        indices.push(new_idx);
    }
    let names: Vec<String> = indices
        .iter()
        .map(|&i| map_full.features()[i].name())
        .collect();
    let feature_set = FeatureSet::new(indices, names)?;

    let bd_full = apply_booleanization(&map_full, d)?;
    let table = build_type_table(&bd_full, &feature_set)?;
    let formula = dnf::simplify(&ideal_classifier(&table))?;

    Ok(TrainedModel {
        formula,
        feature_set,
        booleanization: map_full,
        records,
        chosen_ell,
        config: cfg.clone(),
    })
}

/// Classifies one raw row (predictor values in schema order, target
/// excluded): Booleanize, project onto the selected features, evaluate.
pub fn predict(model: &TrainedModel, row: &[Value]) -> Result<bool> {
    let bits = model.booleanization.apply_row(row)?;
    let projection: Vec<bool> = model
        .feature_set
        .indices
        .iter()
        .map(|&i| bits[i])
        .collect();
    model.formula.evaluate(&projection)
}

/// Serialized form of a trained model plus the ingestion settings needed to
/// read prediction inputs. Field order is fixed, so equal models serialize
/// to identical documents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub library_version: String,
    pub config: PipelineConfig,
    pub target_name: String,
    pub positive_label: Option<String>,
    pub missing_tokens: Vec<String>,
    pub schema: Vec<AttributeSpec>,
    pub booleanization: BooleanizationMap,
    pub feature_indices: Vec<usize>,
    pub feature_names: Vec<String>,
    pub chosen_ell: usize,
    pub records: Vec<SelectionRecord>,
    pub formula: String,
}

/// Ingestion settings embedded in a model document so prediction inputs are
/// parsed exactly like the training data.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DatasetMeta {
    pub target_name: String,
    pub positive_label: Option<String>,
    pub missing_tokens: Vec<String>,
}

impl ModelDocument {
    pub fn from_model(model: &TrainedModel, meta: &DatasetMeta) -> Self {
        ModelDocument {
            library_version: env!("CARGO_PKG_VERSION").to_string(),
            config: model.config.clone(),
            target_name: meta.target_name.clone(),
            positive_label: meta.positive_label.clone(),
            missing_tokens: meta.missing_tokens.clone(),
            schema: model.booleanization.fitted_schema().to_vec(),
            booleanization: model.booleanization.clone(),
            feature_indices: model.feature_set.indices.clone(),
            feature_names: model.feature_set.names.clone(),
            chosen_ell: model.chosen_ell,
            records: model.records.clone(),
            formula: model.formula_text(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn into_model(self) -> Result<(TrainedModel, DatasetMeta)> {
        let feature_set = FeatureSet::new(self.feature_indices, self.feature_names)?;
        let formula = dnf::parse(&self.formula, &feature_set.names)?;
        let model = TrainedModel {
            formula,
            feature_set,
            booleanization: self.booleanization,
            records: self.records,
            chosen_ell: self.chosen_ell,
            config: self.config,
        };
        let meta = DatasetMeta {
            target_name: self.target_name,
            positive_label: self.positive_label,
            missing_tokens: self.missing_tokens,
        };
        Ok((model, meta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{next_f64, rng_from_seed};
    use crate::tabular::{load_csv_str, LoadOptions};

    /// 1000 rows over two informative numeric columns and two noise
    /// columns; target = (x1 > median) | (x2 > median), noise-free.
    fn planted_dataset(n: usize, seed: u64) -> Dataset {
        let mut r = rng_from_seed(seed);
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for _ in 0..4 {
            cols.push((0..n).map(|_| next_f64(&mut r)).collect());
        }
        let med = |values: &[f64]| {
            let mut v = values.to_vec();
            v.sort_by(|a, b| a.total_cmp(b));
            if n % 2 == 1 {
                v[n / 2]
            } else {
                (v[n / 2 - 1] + v[n / 2]) / 2.0
            }
        };
        let m1 = med(&cols[0]);
        let m2 = med(&cols[1]);
        let mut csv = String::from("x1,x2,n1,n2,q\n");
        for i in 0..n {
            let label = cols[0][i] > m1 || cols[1][i] > m2;
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                cols[0][i],
                cols[1][i],
                cols[2][i],
                cols[3][i],
                if label { "yes" } else { "no" }
            ));
        }
        let opts = LoadOptions::new("q").with_positive_label("yes");
        load_csv_str(&csv, &opts).unwrap()
    }

    #[test]
    fn recovers_a_planted_disjunction() {
        let d = planted_dataset(5000, 11);
        let cfg = PipelineConfig {
            max_features: 4,
            seed: 3,
            ..PipelineConfig::default()
        };
        let model = train(&d, &cfg).unwrap();
        assert!(model.chosen_ell <= 2, "chosen_ell = {}", model.chosen_ell);

        // The split medians differ slightly from the full-data medians the
        // labels were planted with, so validation sits just below 1.
        let rec = &model.records[model.chosen_ell - 1];
        assert!(
            rec.validation_accuracy >= 0.99,
            "validation accuracy {}",
            rec.validation_accuracy
        );

        // The refit uses full-data medians, which match the planted rule
        // exactly, so the final formula is the planted disjunction.
        assert_eq!(model.formula_text(), "x1_above_median | x2_above_median");
    }

    #[test]
    fn constant_true_target_trains_to_top() {
        let mut csv = String::from("a,q\n");
        for i in 0..20 {
            csv.push_str(&format!("{i},yes\n"));
        }
        let opts = LoadOptions::new("q").with_positive_label("yes");
        let d = load_csv_str(&csv, &opts).unwrap();
        let model = train(&d, &PipelineConfig::default()).unwrap();
        assert_eq!(model.formula_text(), "TRUE");
        assert!((model.records[0].validation_accuracy - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_class_with_only_f_test_errors() {
        let mut csv = String::from("a,q\n");
        for i in 0..10 {
            csv.push_str(&format!("{i},yes\n"));
        }
        let opts = LoadOptions::new("q").with_positive_label("yes");
        let d = load_csv_str(&csv, &opts).unwrap();
        let cfg = PipelineConfig {
            scorers: vec![ScorerKind::FTest],
            ..PipelineConfig::default()
        };
        assert!(matches!(train(&d, &cfg), Err(Error::SingleClassTarget)));
    }

    #[test]
    fn training_is_deterministic() {
        let d = planted_dataset(400, 21);
        let cfg = PipelineConfig {
            seed: 9,
            ..PipelineConfig::default()
        };
        let m1 = train(&d, &cfg).unwrap();
        let m2 = train(&d, &cfg).unwrap();
        assert_eq!(m1, m2);
        let meta = DatasetMeta {
            target_name: "q".into(),
            positive_label: Some("yes".into()),
            missing_tokens: vec![],
        };
        assert_eq!(
            ModelDocument::from_model(&m1, &meta).to_json(),
            ModelDocument::from_model(&m2, &meta).to_json()
        );
    }

    #[test]
    fn records_cover_every_swept_feature_count() {
        let d = planted_dataset(300, 5);
        let cfg = PipelineConfig {
            max_features: 10, // caps at the 4 available features
            seed: 2,
            ..PipelineConfig::default()
        };
        let model = train(&d, &cfg).unwrap();
        assert_eq!(model.records.len(), 4);
        for (i, rec) in model.records.iter().enumerate() {
            assert_eq!(rec.ell, i + 1);
            assert_eq!(rec.feature_names.len(), rec.ell);
        }
    }

    #[test]
    fn zero_tolerance_takes_the_accuracy_maximum() {
        let d = planted_dataset(600, 8);
        let cfg = PipelineConfig {
            tolerance_points: 0.0,
            seed: 4,
            ..PipelineConfig::default()
        };
        let model = train(&d, &cfg).unwrap();
        let best = model
            .records
            .iter()
            .map(|r| r.validation_accuracy)
            .fold(f64::NEG_INFINITY, f64::max);
        let chosen = &model.records[model.chosen_ell - 1];
        assert_eq!(chosen.validation_accuracy, best);
        // Smallest such count.
        for rec in &model.records {
            if rec.ell < model.chosen_ell {
                assert!(rec.validation_accuracy < best);
            }
        }
    }

    #[test]
    fn predict_round_trips_training_rows_on_clean_data() {
        let d = planted_dataset(500, 31);
        let model = train(&d, &PipelineConfig::default()).unwrap();
        let targets = d.target_values();
        let mut agree = 0;
        for i in 0..d.n_rows() {
            let p = predict(&model, &d.predictor_row(i)).unwrap();
            if Some(p) == targets[i] {
                agree += 1;
            }
        }
        // The planted rule is noise-free, so training rows classify exactly.
        assert_eq!(agree, d.n_rows());
    }

    #[test]
    fn value_at_threshold_predicts_the_negative_side() {
        let mut csv = String::from("x1,q\n");
        for i in 0..40 {
            csv.push_str(&format!("{}.0,{}\n", i, if i >= 20 { "yes" } else { "no" }));
        }
        let opts = LoadOptions::new("q").with_positive_label("yes");
        let d = load_csv_str(&csv, &opts).unwrap();
        let cfg = PipelineConfig {
            max_features: 1,
            ..PipelineConfig::default()
        };
        let model = train(&d, &cfg).unwrap();
        // Full-data median is 19.5; the formula is x1_above_median.
        assert_eq!(model.formula_text(), "x1_above_median");
        assert!(!predict(&model, &[Value::Num(19.5)]).unwrap());
        assert!(predict(&model, &[Value::Num(19.6)]).unwrap());
    }

    #[test]
    fn unrealized_type_predicts_negative() {
        // Only three of the four types over (a, b) are realized; a model
        // over both features must classify the unseen type (~a, b) negative.
        let csv = "a,b,q\n\
                   true,true,yes\n\
                   true,true,yes\n\
                   true,true,yes\n\
                   true,false,no\n\
                   true,false,no\n\
                   true,false,no\n\
                   true,false,no\n\
                   false,false,yes\n\
                   false,false,yes\n\
                   false,false,yes\n";
        let mut opts = LoadOptions::new("q").with_positive_label("yes");
        opts.schema_hints
            .insert("a".into(), crate::tabular::AttrKind::Boolean);
        opts.schema_hints
            .insert("b".into(), crate::tabular::AttrKind::Boolean);
        let d = load_csv_str(csv, &opts).unwrap();

        // Build the model over both features directly so the test does not
        // depend on how a tiny dataset happens to split.
        let map = fit_booleanization(&d).unwrap();
        let bd = apply_booleanization(&map, &d).unwrap();
        let fs = FeatureSet::new(vec![0, 1], bd.feature_names.clone()).unwrap();
        let formula = dnf::simplify(&ideal_classifier(
            &build_type_table(&bd, &fs).unwrap(),
        ))
        .unwrap();
        let model = TrainedModel {
            formula,
            feature_set: fs,
            booleanization: map,
            records: vec![],
            chosen_ell: 2,
            config: PipelineConfig::default(),
        };
        // Realized types follow their majority labels.
        assert!(predict(&model, &[Value::Bool(true), Value::Bool(true)]).unwrap());
        assert!(!predict(&model, &[Value::Bool(true), Value::Bool(false)]).unwrap());
        assert!(predict(&model, &[Value::Bool(false), Value::Bool(false)]).unwrap());
        // The unrealized type defaults to negative.
        assert!(!predict(&model, &[Value::Bool(false), Value::Bool(true)]).unwrap());
    }

    #[test]
    fn model_document_round_trips() {
        let d = planted_dataset(300, 77);
        let model = train(&d, &PipelineConfig::default()).unwrap();
        let meta = DatasetMeta {
            target_name: "q".into(),
            positive_label: Some("yes".into()),
            missing_tokens: vec!["?".into()],
        };
        let doc = ModelDocument::from_model(&model, &meta);
        let text = doc.to_json();
        let (back, meta2) = ModelDocument::from_json(&text).unwrap().into_model().unwrap();
        assert_eq!(back, model);
        assert_eq!(meta2, meta);
        // Reserialization is byte-identical.
        assert_eq!(ModelDocument::from_model(&back, &meta2).to_json(), text);
    }

    #[test]
    fn rejects_datasets_with_missing_values() {
        let csv = "a,q\n1,yes\n?,no\n3,yes\n";
        let opts = LoadOptions::new("q").with_positive_label("yes");
        let d = load_csv_str(csv, &opts).unwrap();
        assert!(matches!(
            train(&d, &PipelineConfig::default()),
            Err(Error::SchemaMismatch(_))
        ));
    }

    #[test]
    fn config_validation_rejects_out_of_range_values() {
        let bad = PipelineConfig {
            max_features: 0,
            ..PipelineConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = PipelineConfig {
            max_features: 17,
            ..PipelineConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = PipelineConfig {
            validation_fraction: 1.0,
            ..PipelineConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = PipelineConfig {
            tolerance_points: -0.5,
            ..PipelineConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = PipelineConfig {
            scorers: vec![],
            ..PipelineConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
