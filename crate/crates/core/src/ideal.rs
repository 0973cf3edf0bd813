//! The counting core: tally realized row types over a selected feature set
//! in a single pass, build the empirical ideal classifier from the tallies,
//! and measure empirical error.
//!
//! A type fixes the polarity of every selected feature; each row realizes
//! exactly one type. The empirical ideal classifier is the disjunction of
//! the realized types whose positive fraction c_t/n_t is at least 1/2, and
//! it attains the minimum empirical error among all Boolean functions of
//! the selected features. Types never realized predict negative.

use std::collections::HashMap;

use crate::booleanize::BooleanDataset;
use crate::dnf::{Conjunction, DnfFormula, Literal};
use crate::error::{Error, Result};
use crate::scoring::FeatureSet;

/// A row's projection onto the feature set, packed with bit j = feature j
/// in feature-set order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeKey(pub u32);

impl TypeKey {
    pub fn from_bits(bits: &[bool]) -> Self {
        let mut key = 0u32;
        for (j, &b) in bits.iter().enumerate() {
            if b {
                key |= 1 << j;
            }
        }
        TypeKey(key)
    }

    pub fn bit(&self, j: usize) -> bool {
        self.0 >> j & 1 == 1
    }

    pub fn to_bits(self, width: usize) -> Vec<bool> {
        (0..width).map(|j| self.bit(j)).collect()
    }
}

/// Counters for one realized type: rows realizing it, and rows realizing it
/// with a positive target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TypeStats {
    pub n_t: u64,
    pub c_t: u64,
}

/// Tally of realized types over a feature set.
#[derive(Debug, Clone)]
pub struct TypeTable {
    entries: HashMap<u32, TypeStats>,
    feature_set: FeatureSet,
    total_rows: u64,
}

impl TypeTable {
    pub fn feature_set(&self) -> &FeatureSet {
        &self.feature_set
    }

    pub fn total_rows(&self) -> u64 {
        self.total_rows
    }

    pub fn num_types(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, key: TypeKey) -> Option<TypeStats> {
        self.entries.get(&key.0).copied()
    }

    /// Entries in ascending key order.
    pub fn sorted_entries(&self) -> Vec<(TypeKey, TypeStats)> {
        let mut out: Vec<(TypeKey, TypeStats)> = self
            .entries
            .iter()
            .map(|(&k, &s)| (TypeKey(k), s))
            .collect();
        out.sort_by_key(|(k, _)| k.0);
        out
    }

    /// Merges two shard tables by summing counters. The merged table equals
    /// the table built from the concatenated rows.
    pub fn merge(mut self, other: TypeTable) -> Result<TypeTable> {
        if self.feature_set != other.feature_set {
            return Err(Error::SchemaMismatch(
                "cannot merge type tables over different feature sets".into(),
            ));
        }
        for (key, stats) in other.entries {
            let entry = self.entries.entry(key).or_insert(TypeStats { n_t: 0, c_t: 0 });
            entry.n_t += stats.n_t;
            entry.c_t += stats.c_t;
        }
        self.total_rows += other.total_rows;
        Ok(self)
    }
}

/// Single pass over the rows: each row's projection onto the feature set
/// increments n_t, and c_t as well when the target is true. Expected time
/// is proportional to rows x selected features via the hashed lookup.
pub fn build_type_table(bd: &BooleanDataset, fs: &FeatureSet) -> Result<TypeTable> {
    if bd.n_rows() == 0 {
        return Err(Error::EmptyDataset("cannot tally an empty dataset".into()));
    }
    if fs.len() > 32 {
        return Err(Error::VocabularyTooLarge {
            size: fs.len(),
            limit: 32,
        });
    }
    if let Some(&max) = fs.indices.iter().max() {
        if max >= bd.n_features() {
            return Err(Error::InvalidParam(format!(
                "feature index {} out of range for {} features",
                max,
                bd.n_features()
            )));
        }
    }
    let mut entries: HashMap<u32, TypeStats> = HashMap::new();
    for (row, &target) in bd.rows.iter().zip(&bd.targets) {
        let mut key = 0u32;
        for (j, &idx) in fs.indices.iter().enumerate() {
            if row[idx] {
                key |= 1 << j;
            }
        }
        let entry = entries.entry(key).or_insert(TypeStats { n_t: 0, c_t: 0 });
        entry.n_t += 1;
        if target {
            entry.c_t += 1;
        }
    }
    Ok(TypeTable {
        entries,
        feature_set: fs.clone(),
        total_rows: bd.n_rows() as u64,
    })
}

/// The empirical ideal classifier: the disjunction of realized full types
/// with c_t/n_t >= 1/2. The comparison is the exact integer test
/// 2*c_t >= n_t, so the tie at exactly one half is classified positive.
pub fn ideal_classifier(tt: &TypeTable) -> DnfFormula {
    let width = tt.feature_set.len();
    let mut conjunctions = Vec::new();
    for (key, stats) in tt.sorted_entries() {
        if 2 * stats.c_t >= stats.n_t {
            let lits: Vec<Literal> = (0..width)
                .map(|j| {
                    if key.bit(j) {
                        Literal::positive(j)
                    } else {
                        Literal::negative(j)
                    }
                })
                .collect();
            conjunctions.push(Conjunction::new(lits).expect("type literals are distinct"));
        }
    }
    DnfFormula::new(conjunctions, width).expect("type conjunctions are in range")
}

/// Fraction of rows where the formula (over the feature-set vocabulary)
/// disagrees with the target.
pub fn empirical_error(f: &DnfFormula, bd: &BooleanDataset, fs: &FeatureSet) -> Result<f64> {
    if bd.n_rows() == 0 {
        return Err(Error::EmptyDataset("cannot score an empty dataset".into()));
    }
    if f.vocabulary_size() != fs.len() {
        return Err(Error::LengthMismatch {
            left: f.vocabulary_size(),
            right: fs.len(),
        });
    }
    if let Some(&max) = fs.indices.iter().max() {
        if max >= bd.n_features() {
            return Err(Error::InvalidParam(format!(
                "feature index {} out of range for {} features",
                max,
                bd.n_features()
            )));
        }
    }
    let mut mismatches = 0u64;
    let mut projection = vec![false; fs.len()];
    for (row, &target) in bd.rows.iter().zip(&bd.targets) {
        for (j, &idx) in fs.indices.iter().enumerate() {
            projection[j] = row[idx];
        }
        if f.evaluate(&projection)? != target {
            mismatches += 1;
        }
    }
    Ok(mismatches as f64 / bd.n_rows() as f64)
}

/// `1 - empirical_error`.
pub fn accuracy(f: &DnfFormula, bd: &BooleanDataset, fs: &FeatureSet) -> Result<f64> {
    Ok(1.0 - empirical_error(f, bd, fs)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand_core::RngCore;

    fn bd(rows: Vec<Vec<bool>>, targets: Vec<bool>) -> BooleanDataset {
        let n = rows.first().map_or(0, |r| r.len());
        BooleanDataset {
            feature_names: (0..n).map(|j| format!("p{j}")).collect(),
            rows,
            targets,
        }
    }

    fn fs_all(bd: &BooleanDataset) -> FeatureSet {
        FeatureSet::new(
            (0..bd.n_features()).collect(),
            bd.feature_names.clone(),
        )
        .unwrap()
    }

    #[test]
    fn counts_three_row_example() {
        // rows {(p=T,q=T),(p=T,q=F),(p=F,q=F)}
        let data = bd(
            vec![vec![true], vec![true], vec![false]],
            vec![true, false, false],
        );
        let fs = fs_all(&data);
        let tt = build_type_table(&data, &fs).unwrap();
        assert_eq!(tt.get(TypeKey(1)), Some(TypeStats { n_t: 2, c_t: 1 }));
        assert_eq!(tt.get(TypeKey(0)), Some(TypeStats { n_t: 1, c_t: 0 }));
        assert_eq!(tt.total_rows(), 3);
    }

    #[test]
    fn identical_rows_collapse_to_one_type() {
        let data = bd(vec![vec![true, false]; 8], vec![true; 8]);
        let fs = fs_all(&data);
        let tt = build_type_table(&data, &fs).unwrap();
        assert_eq!(tt.num_types(), 1);
        assert_eq!(tt.get(TypeKey(0b01)), Some(TypeStats { n_t: 8, c_t: 8 }));
    }

    #[test]
    fn random_counts_match_naive_recount() {
        let mut r = rng::rng_from_seed(99);
        let n = 1000;
        let rows: Vec<Vec<bool>> = (0..n)
            .map(|_| (0..3).map(|_| r.next_u64() % 2 == 1).collect())
            .collect();
        let targets: Vec<bool> = (0..n).map(|_| r.next_u64() % 2 == 1).collect();
        let data = bd(rows.clone(), targets.clone());
        let fs = fs_all(&data);
        let tt = build_type_table(&data, &fs).unwrap();

        let mut total = 0u64;
        for key in 0u32..8 {
            let mut n_t = 0u64;
            let mut c_t = 0u64;
            for (row, &t) in rows.iter().zip(&targets) {
                let k = (row[0] as u32) | (row[1] as u32) << 1 | (row[2] as u32) << 2;
                if k == key {
                    n_t += 1;
                    if t {
                        c_t += 1;
                    }
                }
            }
            assert_eq!(
                tt.get(TypeKey(key)),
                if n_t > 0 {
                    Some(TypeStats { n_t, c_t })
                } else {
                    None
                }
            );
            total += n_t;
        }
        assert_eq!(total, tt.total_rows());
    }

    #[test]
    fn tie_at_one_half_is_classified_positive() {
        let data = bd(
            vec![vec![true], vec![true], vec![false]],
            vec![true, false, false],
        );
        let fs = fs_all(&data);
        let tt = build_type_table(&data, &fs).unwrap();
        let f = ideal_classifier(&tt);
        // Type p has ratio 1/2 -> included; type ~p has ratio 0 -> excluded.
        assert!(f.evaluate(&[true]).unwrap());
        assert!(!f.evaluate(&[false]).unwrap());
    }

    #[test]
    fn all_negative_targets_give_bottom() {
        let data = bd(vec![vec![true], vec![false]], vec![false, false]);
        let fs = fs_all(&data);
        let f = ideal_classifier(&build_type_table(&data, &fs).unwrap());
        assert!(f.is_bottom());
    }

    #[test]
    fn single_positive_row_yields_its_type() {
        let data = bd(vec![vec![true, false, true]], vec![true]);
        let fs = fs_all(&data);
        let f = ideal_classifier(&build_type_table(&data, &fs).unwrap());
        assert_eq!(f.conjunctions().len(), 1);
        assert!(f.evaluate(&[true, false, true]).unwrap());
        assert!(!f.evaluate(&[true, true, true]).unwrap());
    }

    #[test]
    fn empirical_error_three_row_model() {
        let data = bd(
            vec![vec![true], vec![true], vec![false]],
            vec![true, false, false],
        );
        let fs = fs_all(&data);
        let tt = build_type_table(&data, &fs).unwrap();
        let f = ideal_classifier(&tt);
        let err = empirical_error(&f, &data, &fs).unwrap();
        assert!((err - 1.0 / 3.0).abs() < 1e-15);

        // Brute force over all four one-variable Boolean functions: the
        // minimum error is 1/3 and the ideal classifier attains it.
        let mut best = f64::INFINITY;
        for table in 0u32..4 {
            let mut wrong = 0;
            for (row, &t) in data.rows.iter().zip(&data.targets) {
                let v = table >> (row[0] as u32) & 1 == 1;
                if v != t {
                    wrong += 1;
                }
            }
            best = best.min(wrong as f64 / 3.0);
        }
        assert!((best - err).abs() < 1e-15);
    }

    #[test]
    fn bottom_on_all_negative_has_zero_error() {
        let data = bd(vec![vec![true], vec![false]], vec![false, false]);
        let fs = fs_all(&data);
        let err = empirical_error(&DnfFormula::bottom(1), &data, &fs).unwrap();
        assert_eq!(err, 0.0);
        assert_eq!(accuracy(&DnfFormula::bottom(1), &data, &fs).unwrap(), 1.0);
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let data = bd(vec![], vec![]);
        let fs = FeatureSet::new(vec![0], vec!["p0".into()]).unwrap();
        assert!(build_type_table(&data, &fs).is_err());
        assert!(empirical_error(&DnfFormula::bottom(1), &data, &fs).is_err());
    }

    #[test]
    fn table_is_row_order_invariant() {
        let mut r = rng::rng_from_seed(5);
        let rows: Vec<Vec<bool>> = (0..200)
            .map(|_| (0..4).map(|_| r.next_u64() % 2 == 1).collect())
            .collect();
        let targets: Vec<bool> = (0..200).map(|_| r.next_u64() % 2 == 1).collect();
        let data = bd(rows.clone(), targets.clone());
        let fs = fs_all(&data);
        let t1 = build_type_table(&data, &fs).unwrap();

        let mut perm: Vec<usize> = (0..200).collect();
        rng::shuffle(&mut perm, &mut r);
        let shuffled = bd(
            perm.iter().map(|&i| rows[i].clone()).collect(),
            perm.iter().map(|&i| targets[i]).collect(),
        );
        let t2 = build_type_table(&shuffled, &fs).unwrap();
        assert_eq!(t1.sorted_entries(), t2.sorted_entries());
    }

    #[test]
    fn sharded_build_merges_to_the_single_pass_table() {
        let mut r = rng::rng_from_seed(17);
        let rows: Vec<Vec<bool>> = (0..300)
            .map(|_| (0..3).map(|_| r.next_u64() % 2 == 1).collect())
            .collect();
        let targets: Vec<bool> = (0..300).map(|_| r.next_u64() % 2 == 1).collect();
        let data = bd(rows.clone(), targets.clone());
        let fs = fs_all(&data);
        let whole = build_type_table(&data, &fs).unwrap();

        let first = bd(rows[..120].to_vec(), targets[..120].to_vec());
        let second = bd(rows[120..].to_vec(), targets[120..].to_vec());
        let merged = build_type_table(&first, &fs)
            .unwrap()
            .merge(build_type_table(&second, &fs).unwrap())
            .unwrap();
        assert_eq!(whole.sorted_entries(), merged.sorted_entries());
        assert_eq!(whole.total_rows(), merged.total_rows());
    }

    /// The central property: the empirical ideal classifier minimizes the
    /// number of disagreements over every Boolean function of the features.
    #[test]
    fn ideal_classifier_is_error_minimal() {
        let mut r = rng::rng_from_seed(123);
        for trial in 0..60u32 {
            let width = (1 + trial % 3) as usize; // 1..=3
            let n = 4 + (r.next_u64() % 40) as usize;
            let rows: Vec<Vec<bool>> = (0..n)
                .map(|_| (0..width).map(|_| r.next_u64() % 2 == 1).collect())
                .collect();
            let targets: Vec<bool> = (0..n).map(|_| r.next_u64() % 2 == 1).collect();
            let data = bd(rows.clone(), targets.clone());
            let fs = fs_all(&data);
            let f = ideal_classifier(&build_type_table(&data, &fs).unwrap());

            let mut ideal_wrong = 0usize;
            for (row, &t) in rows.iter().zip(&targets) {
                if f.evaluate(row).unwrap() != t {
                    ideal_wrong += 1;
                }
            }

            let n_types = 1u32 << width;
            let mut best = usize::MAX;
            for table in 0u64..(1u64 << n_types) {
                let mut wrong = 0;
                for (row, &t) in rows.iter().zip(&targets) {
                    let mut key = 0u32;
                    for (j, &b) in row.iter().enumerate() {
                        if b {
                            key |= 1 << j;
                        }
                    }
                    let v = table >> key & 1 == 1;
                    if v != t {
                        wrong += 1;
                    }
                }
                best = best.min(wrong);
            }
            assert_eq!(ideal_wrong, best, "width {width}, n {n}");
        }
    }
}
