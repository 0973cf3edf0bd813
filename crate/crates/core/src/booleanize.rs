//! Conversion of typed datasets to purely Boolean form: numerical columns
//! thresholded strictly above their median, categorical columns one-hot
//! encoded over the categories observed at fit time, boolean columns passed
//! through.
//!
//! A feature's identity is (source attribute, kind, category); numeric
//! thresholds are not part of the identity and are re-derived whenever a
//! map is refit on different rows.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tabular::{AttrKind, AttributeSpec, Dataset, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeatureKind {
    AboveMedian { threshold: f64 },
    OneHot { category: String },
    Passthrough,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BooleanFeature {
    pub source_attribute: String,
    pub kind: FeatureKind,
}

/// Identity of a feature across refits: the threshold is excluded.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureIdentity {
    pub source_attribute: String,
    pub discriminator: &'static str,
    pub category: Option<String>,
}

impl BooleanFeature {
    pub fn identity(&self) -> FeatureIdentity {
        match &self.kind {
            FeatureKind::AboveMedian { .. } => FeatureIdentity {
                source_attribute: self.source_attribute.clone(),
                discriminator: "above_median",
                category: None,
            },
            FeatureKind::OneHot { category } => FeatureIdentity {
                source_attribute: self.source_attribute.clone(),
                discriminator: "one_hot",
                category: Some(category.clone()),
            },
            FeatureKind::Passthrough => FeatureIdentity {
                source_attribute: self.source_attribute.clone(),
                discriminator: "passthrough",
                category: None,
            },
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            FeatureKind::AboveMedian { .. } => format!("{}_above_median", self.source_attribute),
            FeatureKind::OneHot { category } => format!("{}_{}", self.source_attribute, category),
            FeatureKind::Passthrough => self.source_attribute.clone(),
        }
    }
}

/// Per-attribute recipe mapping raw rows to Boolean features, in a
/// deterministic order: schema order, categories lexicographic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BooleanizationMap {
    features: Vec<BooleanFeature>,
    fitted_schema: Vec<AttributeSpec>,
    target_name: String,
    fitted_on_rows: usize,
}

impl BooleanizationMap {
    pub fn features(&self) -> &[BooleanFeature] {
        &self.features
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.name()).collect()
    }

    pub fn fitted_on_rows(&self) -> usize {
        self.fitted_on_rows
    }

    pub fn fitted_schema(&self) -> &[AttributeSpec] {
        &self.fitted_schema
    }

    pub fn predictor_schema(&self) -> Vec<AttributeSpec> {
        self.fitted_schema
            .iter()
            .filter(|a| a.name != self.target_name)
            .cloned()
            .collect()
    }

    /// Position of the feature with the given identity, if present.
    pub fn position_of(&self, identity: &FeatureIdentity) -> Option<usize> {
        self.features.iter().position(|f| f.identity() == *identity)
    }

    /// Predictor-column position of each feature's source attribute.
    fn source_columns(&self) -> Result<Vec<usize>> {
        let predictors = self.predictor_schema();
        self.features
            .iter()
            .map(|f| {
                predictors
                    .iter()
                    .position(|a| a.name == f.source_attribute)
                    .ok_or_else(|| Error::MissingColumn(f.source_attribute.clone()))
            })
            .collect()
    }

    fn feature_bit(&self, feature: &BooleanFeature, value: &Value) -> Result<bool> {
        match (&feature.kind, value) {
            (FeatureKind::AboveMedian { threshold }, Value::Num(x)) => Ok(x > threshold),
            (FeatureKind::OneHot { category }, Value::Cat(c)) => Ok(c == category),
            (FeatureKind::Passthrough, Value::Bool(b)) => Ok(*b),
            (_, Value::Missing) => Err(Error::SchemaMismatch(format!(
                "missing value in column '{}'",
                feature.source_attribute
            ))),
            (_, other) => Err(Error::SchemaMismatch(format!(
                "column '{}' holds {:?}, which does not match its fitted kind",
                feature.source_attribute, other
            ))),
        }
    }

    /// Booleanizes one row of predictor values (schema order, target
    /// excluded). Missing cells are rejected.
    pub fn apply_row(&self, row: &[Value]) -> Result<Vec<bool>> {
        let columns = self.source_columns()?;
        self.apply_row_inner(row, &columns)
    }

    fn apply_row_inner(&self, row: &[Value], columns: &[usize]) -> Result<Vec<bool>> {
        if row.len() + 1 != self.fitted_schema.len() {
            return Err(Error::SchemaMismatch(format!(
                "row has {} predictor values, schema expects {}",
                row.len(),
                self.fitted_schema.len() - 1
            )));
        }
        self.features
            .iter()
            .zip(columns)
            .map(|(feature, &col)| self.feature_bit(feature, &row[col]))
            .collect()
    }
}

/// A dataset reduced to bit-vectors plus the Boolean target.
#[derive(Debug, Clone, PartialEq)]
pub struct BooleanDataset {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<bool>>,
    pub targets: Vec<bool>,
}

impl BooleanDataset {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }
}

/// Median with the arithmetic-midpoint convention for even counts.
fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Fits a Booleanization on a dataset: one above-median feature per
/// numerical attribute (threshold = median of its non-missing values), one
/// one-hot feature per observed category of each categorical attribute, and
/// a passthrough per boolean attribute.
pub fn fit_booleanization(d: &Dataset) -> Result<BooleanizationMap> {
    if d.n_rows() == 0 {
        return Err(Error::EmptyDataset("cannot fit a booleanization".into()));
    }
    let target = d.target_name();
    let mut features = Vec::new();
    for (col, attr) in d.schema().iter().enumerate() {
        if attr.name == target {
            continue;
        }
        match attr.kind {
            AttrKind::Numerical => {
                let mut values: Vec<f64> = d
                    .rows()
                    .iter()
                    .filter_map(|r| match &r[col] {
                        Value::Num(x) => Some(*x),
                        _ => None,
                    })
                    .collect();
                // An all-missing column yields a feature that is never true.
                let threshold = if values.is_empty() {
                    f64::INFINITY
                } else {
                    median(&mut values)
                };
                features.push(BooleanFeature {
                    source_attribute: attr.name.clone(),
                    kind: FeatureKind::AboveMedian { threshold },
                });
            }
            AttrKind::Categorical => {
                let categories: BTreeSet<String> = d
                    .rows()
                    .iter()
                    .filter_map(|r| match &r[col] {
                        Value::Cat(c) => Some(c.clone()),
                        _ => None,
                    })
                    .collect();
                for category in categories {
                    features.push(BooleanFeature {
                        source_attribute: attr.name.clone(),
                        kind: FeatureKind::OneHot { category },
                    });
                }
            }
            AttrKind::Boolean => {
                features.push(BooleanFeature {
                    source_attribute: attr.name.clone(),
                    kind: FeatureKind::Passthrough,
                });
            }
        }
    }
    Ok(BooleanizationMap {
        features,
        fitted_schema: d.schema().to_vec(),
        target_name: target.to_string(),
        fitted_on_rows: d.n_rows(),
    })
}

/// Applies a fitted map to a dataset with the same schema. A numeric value
/// exactly at the threshold maps to `false`; a category unseen at fit time
/// leaves its one-hot block all false.
pub fn apply_booleanization(map: &BooleanizationMap, d: &Dataset) -> Result<BooleanDataset> {
    if map.fitted_schema != d.schema() {
        return Err(Error::SchemaMismatch(
            "dataset schema differs from the schema the map was fitted on".into(),
        ));
    }
    let targets: Vec<bool> = d
        .target_values()
        .into_iter()
        .collect::<Option<Vec<bool>>>()
        .ok_or_else(|| {
            Error::SchemaMismatch("dataset has missing target values; clean it first".into())
        })?;
    let columns = map.source_columns()?;
    let mut rows = Vec::with_capacity(d.n_rows());
    for i in 0..d.n_rows() {
        rows.push(map.apply_row_inner(&d.predictor_row(i), &columns)?);
    }
    Ok(BooleanDataset {
        feature_names: map.feature_names(),
        rows,
        targets,
    })
}
