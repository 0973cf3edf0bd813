//! Typed tabular datasets: CSV loading, schema inference, and cleaning.
//!
//! A dataset owns its schema (including the Boolean target attribute) and
//! preserves row order everywhere; all randomness in the rest of the crate
//! is driven by explicit seeds. Missing markers are recognized at load time
//! and removed by [`Dataset::drop_missing`].

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column kind. Inference prefers `Numerical`; integer-coded categoricals
/// must be declared through schema hints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttrKind {
    Numerical,
    Categorical,
    Boolean,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttrKind,
}

/// A single typed cell. `Missing` only survives until cleaning.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Cat(String),
    Bool(bool),
    Missing,
}

impl Value {
    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }
}

/// The default missing markers: `""`, `"?"`, `"NA"`, `"NaN"`.
pub fn default_missing_tokens() -> BTreeSet<String> {
    ["", "?", "NA", "NaN"].iter().map(|s| s.to_string()).collect()
}

/// Options controlling CSV ingestion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadOptions {
    pub target_name: String,
    /// Token mapped to `true` in the target column. When absent the target
    /// must use one of the recognized boolean vocabularies
    /// (true/false, 1/0, yes/no).
    pub positive_label: Option<String>,
    pub missing_tokens: BTreeSet<String>,
    pub schema_hints: BTreeMap<String, AttrKind>,
    /// Columns removed before any other processing.
    pub drop_columns: BTreeSet<String>,
}

impl LoadOptions {
    pub fn new(target_name: &str) -> Self {
        LoadOptions {
            target_name: target_name.to_string(),
            positive_label: None,
            missing_tokens: default_missing_tokens(),
            schema_hints: BTreeMap::new(),
            drop_columns: BTreeSet::new(),
        }
    }

    pub fn with_positive_label(mut self, label: &str) -> Self {
        self.positive_label = Some(label.to_string());
        self
    }
}

/// A schema-typed column table with a designated Boolean target.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<AttributeSpec>,
    rows: Vec<Vec<Value>>,
    target_name: String,
    target_index: usize,
}

impl Dataset {
    pub fn schema(&self) -> &[AttributeSpec] {
        &self.schema
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn target_index(&self) -> usize {
        self.target_index
    }

    /// Target values; `None` for rows whose target cell is missing.
    pub fn target_values(&self) -> Vec<Option<bool>> {
        self.rows
            .iter()
            .map(|r| match &r[self.target_index] {
                Value::Bool(b) => Some(*b),
                _ => None,
            })
            .collect()
    }

    pub fn has_missing(&self) -> bool {
        self.rows.iter().any(|r| r.iter().any(Value::is_missing))
    }

    /// Predictor attributes in schema order (everything but the target).
    pub fn predictor_schema(&self) -> Vec<AttributeSpec> {
        self.schema
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.target_index)
            .map(|(_, a)| a.clone())
            .collect()
    }

    /// Predictor cells of one row, in schema order without the target.
    pub fn predictor_row(&self, row: usize) -> Vec<Value> {
        self.rows[row]
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != self.target_index)
            .map(|(_, v)| v.clone())
            .collect()
    }

    /// Rows with no missing cell, order preserved. Idempotent.
    pub fn drop_missing(&self) -> Result<Dataset> {
        let rows: Vec<Vec<Value>> = self
            .rows
            .iter()
            .filter(|r| !r.iter().any(Value::is_missing))
            .cloned()
            .collect();
        if rows.is_empty() {
            return Err(Error::EmptyDataset(
                "no rows remain after removing missing values".into(),
            ));
        }
        Ok(Dataset {
            schema: self.schema.clone(),
            rows,
            target_name: self.target_name.clone(),
            target_index: self.target_index,
        })
    }

    /// The subset given by `indices`, in the order given.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            target_name: self.target_name.clone(),
            target_index: self.target_index,
        }
    }

    /// Serializes back to CSV. Missing cells are written as `"?"`, booleans
    /// as `true`/`false`; numbers use the shortest round-tripping form.
    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.schema.iter().map(|a| a.name.as_str()))?;
        for row in &self.rows {
            let record: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Value::Num(x) => format!("{x}"),
                    Value::Cat(s) => s.clone(),
                    Value::Bool(b) => b.to_string(),
                    Value::Missing => "?".to_string(),
                })
                .collect();
            w.write_record(&record)?;
        }
        let bytes = w.into_inner().map_err(|e| {
            Error::InvalidParam(format!("csv writer flush failed: {e}"))
        })?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn parse_bool_token(token: &str) -> Option<bool> {
    match token.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" => Some(false),
        _ => None,
    }
}

/// Loads a CSV file with a header row. See [`load_csv_from_reader`].
pub fn load_csv(path: &Path, opts: &LoadOptions) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    load_csv_from_reader(file, opts)
}

pub fn load_csv_str(text: &str, opts: &LoadOptions) -> Result<Dataset> {
    load_csv_from_reader(text.as_bytes(), opts)
}

/// Parses CSV into a typed dataset. Column kinds are inferred (all cells
/// parseable as numbers -> numerical, otherwise categorical) unless
/// overridden by a schema hint; the target column is mapped to booleans via
/// the declared positive label.
pub fn load_csv_from_reader<R: Read>(reader: R, opts: &LoadOptions) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);

    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    for dropped in &opts.drop_columns {
        if !headers.iter().any(|h| h == dropped) {
            return Err(Error::MissingColumn(dropped.clone()));
        }
        if *dropped == opts.target_name {
            return Err(Error::InvalidParam(format!(
                "cannot drop the target column '{dropped}'"
            )));
        }
    }
    for hinted in opts.schema_hints.keys() {
        if !headers.iter().any(|h| h == hinted) {
            return Err(Error::MissingColumn(hinted.clone()));
        }
    }

    let keep: Vec<usize> = (0..headers.len())
        .filter(|&i| !opts.drop_columns.contains(&headers[i]))
        .collect();
    let names: Vec<String> = keep.iter().map(|&i| headers[i].clone()).collect();
    let target_index = names
        .iter()
        .position(|h| *h == opts.target_name)
        .ok_or_else(|| Error::MissingColumn(opts.target_name.clone()))?;

    let mut cells: Vec<Vec<String>> = Vec::new();
    for record in rdr.records() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::SchemaMismatch(format!(
                "row {} has {} cells, expected {}",
                cells.len() + 2,
                record.len(),
                headers.len()
            )));
        }
        cells.push(keep.iter().map(|&i| record[i].trim().to_string()).collect());
    }
    if cells.is_empty() {
        return Err(Error::EmptyDataset("file has a header but no rows".into()));
    }

    // Kind inference for predictor columns.
    let mut schema = Vec::with_capacity(names.len());
    for (j, name) in names.iter().enumerate() {
        if j == target_index {
            schema.push(AttributeSpec {
                name: name.clone(),
                kind: AttrKind::Boolean,
            });
            continue;
        }
        let kind = if let Some(&hint) = opts.schema_hints.get(name) {
            hint
        } else {
            let numeric = cells.iter().all(|row| {
                let token = &row[j];
                opts.missing_tokens.contains(token) || token.parse::<f64>().is_ok()
            });
            if numeric {
                AttrKind::Numerical
            } else {
                AttrKind::Categorical
            }
        };
        schema.push(AttributeSpec {
            name: name.clone(),
            kind,
        });
    }

    // Target mapping.
    let positive = match &opts.positive_label {
        Some(label) => label.clone(),
        None => {
            let distinct: BTreeSet<&String> = cells
                .iter()
                .map(|row| &row[target_index])
                .filter(|t| !opts.missing_tokens.contains(*t))
                .collect();
            let lowered: BTreeSet<String> =
                distinct.iter().map(|t| t.to_ascii_lowercase()).collect();
            let recognized = !distinct.is_empty()
                && lowered
                    .iter()
                    .all(|t| parse_bool_token(t).is_some());
            if !recognized {
                return Err(Error::TargetNotBinary {
                    column: opts.target_name.clone(),
                    detail: format!(
                        "{} distinct values and no positive label declared",
                        distinct.len()
                    ),
                });
            }
            // Use the literal token whose boolean reading is true.
            match distinct
                .iter()
                .find(|t| parse_bool_token(t) == Some(true))
            {
                Some(t) => (*t).clone(),
                // All tokens read as false; equality with an unused label
                // keeps every row negative.
                None => "true".to_string(),
            }
        }
    };

    let mut rows = Vec::with_capacity(cells.len());
    for (i, raw) in cells.iter().enumerate() {
        let mut row = Vec::with_capacity(raw.len());
        for (j, token) in raw.iter().enumerate() {
            if opts.missing_tokens.contains(token) {
                row.push(Value::Missing);
                continue;
            }
            if j == target_index {
                row.push(Value::Bool(*token == positive));
                continue;
            }
            match schema[j].kind {
                AttrKind::Numerical => match token.parse::<f64>() {
                    Ok(x) => row.push(Value::Num(x)),
                    Err(_) => {
                        return Err(Error::UnparseableNumeric {
                            column: schema[j].name.clone(),
                            row: i + 2,
                            value: token.clone(),
                        })
                    }
                },
                AttrKind::Categorical => row.push(Value::Cat(token.clone())),
                AttrKind::Boolean => match parse_bool_token(token) {
                    Some(b) => row.push(Value::Bool(b)),
                    None => {
                        return Err(Error::SchemaMismatch(format!(
                            "column '{}', row {}: '{}' is not a boolean token",
                            schema[j].name,
                            i + 2,
                            token
                        )))
                    }
                },
            }
        }
        rows.push(row);
    }

    Ok(Dataset {
        schema,
        rows,
        target_name: opts.target_name.clone(),
        target_index,
    })
}

/// Parses predictor rows from CSV against a known schema, matching columns
/// by name. Extra columns (including a target column) are ignored. Used to
/// feed trained models with new data.
pub fn load_rows_with_schema<R: Read>(
    reader: R,
    schema: &[AttributeSpec],
    missing_tokens: &BTreeSet<String>,
) -> Result<Vec<Vec<Value>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let positions: Vec<usize> = schema
        .iter()
        .map(|attr| {
            headers
                .iter()
                .position(|h| *h == attr.name)
                .ok_or_else(|| Error::MissingColumn(attr.name.clone()))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        let mut row = Vec::with_capacity(schema.len());
        for (attr, &pos) in schema.iter().zip(&positions) {
            if pos >= record.len() {
                return Err(Error::SchemaMismatch(format!(
                    "row {} is shorter than the header",
                    i + 2
                )));
            }
            let token = record[pos].trim();
            if missing_tokens.contains(token) {
                return Err(Error::SchemaMismatch(format!(
                    "column '{}', row {}: missing value in prediction input",
                    attr.name,
                    i + 2
                )));
            }
            match attr.kind {
                AttrKind::Numerical => match token.parse::<f64>() {
                    Ok(x) => row.push(Value::Num(x)),
                    Err(_) => {
                        return Err(Error::UnparseableNumeric {
                            column: attr.name.clone(),
                            row: i + 2,
                            value: token.to_string(),
                        })
                    }
                },
                AttrKind::Categorical => row.push(Value::Cat(token.to_string())),
                AttrKind::Boolean => match parse_bool_token(token) {
                    Some(b) => row.push(Value::Bool(b)),
                    None => {
                        return Err(Error::SchemaMismatch(format!(
                            "column '{}', row {}: '{}' is not a boolean token",
                            attr.name,
                            i + 2,
                            token
                        )))
                    }
                },
            }
        }
        rows.push(row);
    }
    Ok(rows)
}
