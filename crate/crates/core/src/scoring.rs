//! Univariate scoring of Boolean features against a Boolean target.
//!
//! All three statistics operate on the 2x2 contingency table of a feature
//! and the target, so they have closed forms. Degenerate (constant) columns
//! score 0 instead of erroring; a feature that separates the classes
//! perfectly gets an infinite F statistic so it sorts above every finite
//! score.

use serde::{Deserialize, Serialize};

use crate::booleanize::BooleanDataset;
use crate::error::{Error, Result};

/// The available scoring statistics. Declaration order is the canonical
/// order used for tie-breaking across scorers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScorerKind {
    FTest,
    MutualInfo,
    Chi2,
}

impl ScorerKind {
    pub const ALL: [ScorerKind; 3] = [ScorerKind::FTest, ScorerKind::MutualInfo, ScorerKind::Chi2];

    pub fn name(&self) -> &'static str {
        match self {
            ScorerKind::FTest => "f_test",
            ScorerKind::MutualInfo => "mutual_info",
            ScorerKind::Chi2 => "chi2",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "f_test" => Ok(ScorerKind::FTest),
            "mutual_info" => Ok(ScorerKind::MutualInfo),
            "chi2" => Ok(ScorerKind::Chi2),
            other => Err(Error::InvalidParam(format!("unknown scorer '{other}'"))),
        }
    }
}

/// An ordered selection of feature positions in a [`BooleanDataset`].
/// Indices are strictly increasing after canonicalization.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSet {
    pub indices: Vec<usize>,
    pub names: Vec<String>,
}

impl FeatureSet {
    /// Canonicalizes by sorting on index; names follow their indices.
    pub fn new(indices: Vec<usize>, names: Vec<String>) -> Result<Self> {
        if indices.len() != names.len() {
            return Err(Error::LengthMismatch {
                left: indices.len(),
                right: names.len(),
            });
        }
        if indices.is_empty() {
            return Err(Error::InvalidParam("feature set is empty".into()));
        }
        let mut pairs: Vec<(usize, String)> = indices.into_iter().zip(names).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidParam(format!(
                    "duplicate feature index {}",
                    w[0].0
                )));
            }
        }
        let (indices, names) = pairs.into_iter().unzip();
        Ok(FeatureSet { indices, names })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

struct Table2x2 {
    n11: u64, // x & y
    n10: u64, // x & !y
    n01: u64, // !x & y
    n00: u64, // !x & !y
}

impl Table2x2 {
    fn build(x: &[bool], y: &[bool]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::LengthMismatch {
                left: x.len(),
                right: y.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::EmptyDataset("scoring needs at least one row".into()));
        }
        let mut t = Table2x2 {
            n11: 0,
            n10: 0,
            n01: 0,
            n00: 0,
        };
        for (&a, &b) in x.iter().zip(y) {
            match (a, b) {
                (true, true) => t.n11 += 1,
                (true, false) => t.n10 += 1,
                (false, true) => t.n01 += 1,
                (false, false) => t.n00 += 1,
            }
        }
        Ok(t)
    }

    fn n(&self) -> u64 {
        self.n11 + self.n10 + self.n01 + self.n00
    }

    fn x1(&self) -> u64 {
        self.n11 + self.n10
    }

    fn y1(&self) -> u64 {
        self.n11 + self.n01
    }
}

/// Pearson chi-squared statistic of the 2x2 table, without continuity
/// correction. Returns 0 when the feature or the target is constant.
pub fn score_chi2(x: &[bool], y: &[bool]) -> Result<f64> {
    let t = Table2x2::build(x, y)?;
    let n = t.n() as f64;
    let (x1, y1) = (t.x1(), t.y1());
    let (x0, y0) = (t.n() - x1, t.n() - y1);
    if x1 == 0 || x0 == 0 || y1 == 0 || y0 == 0 {
        return Ok(0.0);
    }
    let observed = [t.n11, t.n10, t.n01, t.n00];
    let expected = [
        x1 as f64 * y1 as f64 / n,
        x1 as f64 * y0 as f64 / n,
        x0 as f64 * y1 as f64 / n,
        x0 as f64 * y0 as f64 / n,
    ];
    let stat = observed
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| {
            let d = o as f64 - e;
            d * d / e
        })
        .sum();
    Ok(stat)
}

/// One-way ANOVA F statistic of the feature (as 0/1) grouped by the target.
/// Perfect separation (zero within-group variance, positive between-group
/// variance) returns +inf so it sorts above all finite scores; a constant
/// feature returns 0. Degeneracy checks are exact integer tests.
pub fn score_f_test(x: &[bool], y: &[bool]) -> Result<f64> {
    let t = Table2x2::build(x, y)?;
    let (n1, o1) = (t.y1(), t.n11); // group y = true
    let (n0, o0) = (t.n() - t.y1(), t.n10); // group y = false
    if n1 == 0 || n0 == 0 {
        return Err(Error::SingleClassTarget);
    }
    // Between-group sum of squares is zero iff the group means are equal.
    let between_zero = o1 * n0 == o0 * n1;
    // Within-group sum of squares is zero iff both groups are pure.
    let within_zero = (o1 == 0 || o1 == n1) && (o0 == 0 || o0 == n0);
    if between_zero {
        return Ok(0.0);
    }
    if within_zero {
        return Ok(f64::INFINITY);
    }
    let n = t.n() as f64;
    let m = t.x1() as f64 / n;
    let m1 = o1 as f64 / n1 as f64;
    let m0 = o0 as f64 / n0 as f64;
    let ss_between = n1 as f64 * (m1 - m) * (m1 - m) + n0 as f64 * (m0 - m) * (m0 - m);
    // For 0/1 data: sum of squared deviations in a group of size g with o
    // ones and mean mg is o*(1-mg)^2 + (g-o)*mg^2 = o*(g-o)/g.
    let ss_within =
        o1 as f64 * (n1 - o1) as f64 / n1 as f64 + o0 as f64 * (n0 - o0) as f64 / n0 as f64;
    let df_within = n - 2.0;
    if df_within <= 0.0 {
        // Two rows, one per class, not pure would require fractional bits;
        // unreachable, but keep the guard explicit.
        return Ok(f64::INFINITY);
    }
    Ok(ss_between / (ss_within / df_within))
}

/// Plug-in discrete mutual information of the empirical joint distribution,
/// in nats. `0 * ln 0` terms contribute nothing.
pub fn score_mutual_info(x: &[bool], y: &[bool]) -> Result<f64> {
    let t = Table2x2::build(x, y)?;
    let n = t.n() as f64;
    let cells = [
        (t.n11, t.x1(), t.y1()),
        (t.n10, t.x1(), t.n() - t.y1()),
        (t.n01, t.n() - t.x1(), t.y1()),
        (t.n00, t.n() - t.x1(), t.n() - t.y1()),
    ];
    let mut mi = 0.0;
    for (joint, mx, my) in cells {
        if joint == 0 {
            continue;
        }
        let p = joint as f64 / n;
        let px = mx as f64 / n;
        let py = my as f64 / n;
        mi += p * (p / (px * py)).ln();
    }
    Ok(mi.max(0.0))
}

pub fn score(kind: ScorerKind, x: &[bool], y: &[bool]) -> Result<f64> {
    match kind {
        ScorerKind::FTest => score_f_test(x, y),
        ScorerKind::MutualInfo => score_mutual_info(x, y),
        ScorerKind::Chi2 => score_chi2(x, y),
    }
}

/// Ranks all features by descending score, ties broken by lower index.
/// Prefixes of the ranking are exactly the top-k selections.
pub fn rank_features(bd: &BooleanDataset, scorer: ScorerKind) -> Result<Vec<usize>> {
    let n_features = bd.feature_names.len();
    let mut column = vec![false; bd.rows.len()];
    let mut scores = Vec::with_capacity(n_features);
    for j in 0..n_features {
        for (i, row) in bd.rows.iter().enumerate() {
            column[i] = row[j];
        }
        scores.push(score(scorer, &column, &bd.targets)?);
    }
    let mut order: Vec<usize> = (0..n_features).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .partial_cmp(&scores[a])
            .expect("scores are never NaN")
            .then(a.cmp(&b))
    });
    Ok(order)
}

/// The `k` highest-scoring features, ties broken by lower feature index.
pub fn select_top_k(bd: &BooleanDataset, k: usize, scorer: ScorerKind) -> Result<FeatureSet> {
    let n_features = bd.feature_names.len();
    if k == 0 || k > n_features {
        return Err(Error::InvalidParam(format!(
            "k = {k} out of range 1..={n_features}"
        )));
    }
    let ranking = rank_features(bd, scorer)?;
    let indices: Vec<usize> = ranking[..k].to_vec();
    let names: Vec<String> = indices
        .iter()
        .map(|&i| bd.feature_names[i].clone())
        .collect();
    FeatureSet::new(indices, names)
}
