//! Short, human-readable Boolean DNF classifiers for tabular data.
//!
//! The pipeline discretizes a typed table to Boolean features (numerical
//! columns split strictly above their median, categorical columns one-hot
//! encoded), ranks the features with univariate statistics, and computes
//! the exact empirical-error-minimal Boolean formula over each candidate
//! feature set by tallying row types in a single linear pass. A nested
//! 70/30 validation sweep picks the smallest feature count whose accuracy
//! is within a configurable band of the best, the thresholds are refit on
//! the full data, and the final formula is minimized exactly.
//!
//! Alongside the classifier pipeline, [`bounds`] provides closed-form
//! sample-size calculators for the agreement between the empirical
//! construction and the one induced by a known distribution, plus a Monte
//! Carlo harness that measures that agreement empirically.
//!
//! ```
//! use ideal_dnf::pipeline::{train, PipelineConfig};
//! use ideal_dnf::tabular::{load_csv_str, LoadOptions};
//!
//! let csv = "pressure,flow,q\n1.0,8.0,hi\n2.0,7.0,hi\n3.0,2.0,lo\n4.0,1.0,lo\n";
//! let opts = LoadOptions::new("q").with_positive_label("hi");
//! let data = load_csv_str(csv, &opts)?.drop_missing()?;
//! let model = train(&data, &PipelineConfig { max_features: 2, ..Default::default() })?;
//! println!("{}", model.formula_text());
//! # Ok::<(), ideal_dnf::Error>(())
//! ```

pub mod booleanize;
pub mod bounds;
pub mod dnf;
pub mod error;
pub mod evaluation;
pub mod ideal;
pub mod pipeline;
mod rng;
pub mod scoring;
pub mod tabular;

pub use booleanize::{BooleanDataset, BooleanFeature, BooleanizationMap, FeatureKind};
pub use dnf::{Conjunction, DnfFormula, Literal, Polarity};
pub use error::{Error, Result};
pub use ideal::{TypeKey, TypeStats, TypeTable};
pub use pipeline::{PipelineConfig, SelectionRecord, TrainedModel};
pub use scoring::{FeatureSet, ScorerKind};
pub use tabular::{AttrKind, AttributeSpec, Dataset, LoadOptions, Value};

/// Library version, echoed into serialized reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
