//! Benchmark helpers: seeded synthetic Boolean data shared by the criterion
//! targets and the scaling checks in the acceptance suite.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use ideal_dnf::{BooleanDataset, FeatureSet};

/// Random Boolean dataset with independent uniform bits.
pub fn random_boolean_dataset(rows: usize, features: usize, seed: u64) -> BooleanDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data_rows: Vec<Vec<bool>> = (0..rows)
        .map(|_| (0..features).map(|_| rng.next_u64() % 2 == 1).collect())
        .collect();
    let targets: Vec<bool> = (0..rows).map(|_| rng.next_u64() % 2 == 1).collect();
    BooleanDataset {
        feature_names: (0..features).map(|j| format!("p{j}")).collect(),
        rows: data_rows,
        targets,
    }
}

/// Feature set selecting every column of a dataset.
pub fn full_feature_set(bd: &BooleanDataset) -> FeatureSet {
    FeatureSet::new((0..bd.n_features()).collect(), bd.feature_names.clone())
        .expect("non-empty dataset")
}
