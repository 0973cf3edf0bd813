//! Distribution-level machinery: explicit distributions over extended
//! types, true error, the ideal classifier of a known distribution,
//! closed-form sample-size calculators, and a Monte Carlo validator that
//! samples datasets and checks how often the empirical ideal classifier
//! agrees with the distribution's ideal classifier on separated types.
//!
//! Extended-type keys pack the feature bits with the target bit in the
//! least significant position: `key = (feature_bits << 1) | q`.
//!
//! The two calculators evaluate their closed-form expressions verbatim and
//! round up: `theorem_sample_size(3, 0.05, 0.01) = 5903` and
//! `corollary_sample_size(3, 0.05, 0.01) = 377742`. A figure of 18887
//! sometimes quoted for those parameters matches neither expression;
//! this implementation follows the expressions as stated.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::booleanize::BooleanDataset;
use crate::dnf::{Conjunction, DnfFormula, Literal};
use crate::error::{Error, Result};
use crate::ideal::{build_type_table, ideal_classifier};
use crate::rng::{derive_seed, next_f64, rng_from_seed};
use crate::scoring::FeatureSet;

const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;

/// An explicit probability distribution over all `2^(tau_size + 1)`
/// extended types (feature bits plus target bit).
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDistribution {
    tau_size: usize,
    /// Dense table indexed by extended key; absent mass is zero.
    probs: Vec<f64>,
}

/// On-disk form: bit patterns are strings of `0`/`1` of length
/// `tau_size + 1`, feature bits first (p0 leftmost), target bit last.
#[derive(Debug, Serialize, Deserialize)]
struct DistributionDocument {
    tau_size: usize,
    probs: std::collections::BTreeMap<String, f64>,
}

impl SyntheticDistribution {
    /// Builds a distribution from `(extended_key, probability)` pairs.
    pub fn new(tau_size: usize, entries: &[(u32, f64)]) -> Result<Self> {
        if tau_size > 16 {
            return Err(Error::VocabularyTooLarge {
                size: tau_size,
                limit: 16,
            });
        }
        let len = 1usize << (tau_size + 1);
        let mut probs = vec![0.0; len];
        for &(key, p) in entries {
            if key as usize >= len {
                return Err(Error::InvalidDistribution(format!(
                    "key {key} out of range for tau_size {tau_size}"
                )));
            }
            if p < 0.0 {
                return Err(Error::InvalidDistribution(format!(
                    "negative probability {p} for key {key}"
                )));
            }
            probs[key as usize] += p;
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, expected 1"
            )));
        }
        Ok(SyntheticDistribution { tau_size, probs })
    }

    pub fn tau_size(&self) -> usize {
        self.tau_size
    }

    /// Mass of one extended type.
    pub fn prob_ext(&self, key: u32) -> f64 {
        self.probs.get(key as usize).copied().unwrap_or(0.0)
    }

    /// Mass of a feature type: mu(t and q) + mu(t and not q).
    pub fn prob_type(&self, t: u32) -> f64 {
        self.prob_ext(t << 1 | 1) + self.prob_ext(t << 1)
    }

    fn check_type_key(&self, t: u32) -> Result<()> {
        if (t as usize) < (1usize << self.tau_size) {
            Ok(())
        } else {
            Err(Error::InvalidParam(format!(
                "type key {t} out of range for tau_size {}",
                self.tau_size
            )))
        }
    }

    /// Parses the JSON document format (see module docs).
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: DistributionDocument = serde_json::from_str(text)?;
        let width = doc.tau_size + 1;
        let mut entries = Vec::with_capacity(doc.probs.len());
        for (pattern, p) in &doc.probs {
            if pattern.len() != width || !pattern.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::InvalidDistribution(format!(
                    "bit pattern '{pattern}' is not {width} binary digits"
                )));
            }
            let bits: Vec<bool> = pattern.chars().map(|c| c == '1').collect();
            let mut feature_bits = 0u32;
            for (j, &b) in bits[..doc.tau_size].iter().enumerate() {
                if b {
                    feature_bits |= 1 << j;
                }
            }
            let key = feature_bits << 1 | bits[doc.tau_size] as u32;
            entries.push((key, *p));
        }
        SyntheticDistribution::new(doc.tau_size, &entries)
    }

    pub fn to_json(&self) -> String {
        let mut probs = std::collections::BTreeMap::new();
        for (key, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                let q = key as u32 & 1;
                let feature_bits = key as u32 >> 1;
                let mut pattern = String::with_capacity(self.tau_size + 1);
                for j in 0..self.tau_size {
                    pattern.push(if feature_bits >> j & 1 == 1 { '1' } else { '0' });
                }
                pattern.push(if q == 1 { '1' } else { '0' });
                probs.insert(pattern, p);
            }
        }
        serde_json::to_string_pretty(&DistributionDocument {
            tau_size: self.tau_size,
            probs,
        })
        .expect("distribution document serializes")
    }
}

/// Parameters of the sample-size bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub tau_size: usize,
    pub epsilon: f64,
    pub delta: f64,
}

impl BoundParams {
    pub fn new(tau_size: usize, epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "epsilon must be in (0, 1], got {epsilon}"
            )));
        }
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidParam(format!(
                "delta must be in (0, 1), got {delta}"
            )));
        }
        if tau_size > 24 {
            return Err(Error::VocabularyTooLarge {
                size: tau_size,
                limit: 24,
            });
        }
        Ok(BoundParams {
            tau_size,
            epsilon,
            delta,
        })
    }
}

/// ln(2^(tau+1) / delta), computed in log space.
fn log_term(tau_size: usize, delta: f64) -> f64 {
    (tau_size as f64 + 1.0) * std::f64::consts::LN_2 - delta.ln()
}

/// ceil( 2 ln(2^(|tau|+1)/delta) / epsilon^2 ): sample size at which the
/// empirical ideal classifier agrees with the distribution's ideal
/// classifier on every epsilon-separated type with probability >= 1-delta.
pub fn theorem_sample_size(p: &BoundParams) -> u64 {
    let raw = 2.0 * log_term(p.tau_size, p.delta) / (p.epsilon * p.epsilon);
    raw.ceil() as u64
}

/// ceil( 2^(2|tau|+1) ln(2^(|tau|+1)/delta) / epsilon^2 ): sample size at
/// which the empirical ideal classifier's true error exceeds the optimum
/// by less than epsilon with probability >= 1-delta.
pub fn corollary_sample_size(p: &BoundParams) -> u64 {
    let factor = 2f64.powi(2 * p.tau_size as i32 + 1);
    let raw = factor * log_term(p.tau_size, p.delta) / (p.epsilon * p.epsilon);
    raw.ceil() as u64
}

/// |mu(t and q) - mu(t and not q)| for a feature type `t`.
pub fn epsilon_separation(mu: &SyntheticDistribution, t: u32) -> Result<f64> {
    mu.check_type_key(t)?;
    Ok((mu.prob_ext(t << 1 | 1) - mu.prob_ext(t << 1)).abs())
}

/// Probability mass of the extended types where the formula's value on the
/// feature part disagrees with the target bit.
pub fn true_error(f: &DnfFormula, mu: &SyntheticDistribution) -> Result<f64> {
    if f.vocabulary_size() != mu.tau_size {
        return Err(Error::LengthMismatch {
            left: f.vocabulary_size(),
            right: mu.tau_size,
        });
    }
    let mut err = 0.0;
    for t in 0u32..(1u32 << mu.tau_size) {
        let predicted = f.evaluate(&type_bits(t, mu.tau_size))?;
        if predicted {
            err += mu.prob_ext(t << 1); // actual negative
        } else {
            err += mu.prob_ext(t << 1 | 1); // actual positive
        }
    }
    Ok(err)
}

fn type_bits(t: u32, width: usize) -> Vec<bool> {
    (0..width).map(|j| t >> j & 1 == 1).collect()
}

/// The ideal classifier of a known distribution: the disjunction of the
/// feature types with mu(t and q)/mu(t) >= 1/2. Types with zero mass are
/// excluded (they predict negative), mirroring the unrealized-type rule of
/// the empirical construction.
pub fn ideal_of_distribution(mu: &SyntheticDistribution) -> DnfFormula {
    let width = mu.tau_size;
    let mut conjunctions = Vec::new();
    for t in 0u32..(1u32 << width) {
        let pos = mu.prob_ext(t << 1 | 1);
        let neg = mu.prob_ext(t << 1);
        if pos + neg > 0.0 && pos >= neg {
            let lits: Vec<Literal> = (0..width)
                .map(|j| {
                    if t >> j & 1 == 1 {
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

/// Draws `n` i.i.d. extended types and returns them as a Boolean dataset
/// with features `p0..p{tau-1}` and the target bit as target.
pub fn sample_model(mu: &SyntheticDistribution, n: usize, seed: u64) -> Result<BooleanDataset> {
    if n == 0 {
        return Err(Error::InvalidParam("sample size must be at least 1".into()));
    }
    let mut cumulative = Vec::with_capacity(mu.probs.len());
    let mut acc = 0.0;
    for &p in &mu.probs {
        acc += p;
        cumulative.push(acc);
    }
    let mut rng = rng_from_seed(seed);
    let mut rows = Vec::with_capacity(n);
    let mut targets = Vec::with_capacity(n);
    for _ in 0..n {
        let u = next_f64(&mut rng);
        let key = match cumulative.iter().position(|&c| u < c) {
            Some(k) => k as u32,
            // Rounding at the top of the table: take the last positive key.
            None => (mu.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)) as u32,
        };
        targets.push(key & 1 == 1);
        rows.push(type_bits(key >> 1, mu.tau_size));
    }
    Ok(BooleanDataset {
        feature_names: (0..mu.tau_size).map(|j| format!("p{j}")).collect(),
        rows,
        targets,
    })
}

/// Fraction of trials in which the empirical ideal classifier of a size-`n`
/// sample agrees with the distribution's ideal classifier on every type
/// that is `epsilon`-separated (membership compared type by type). Trials
/// run in parallel with per-trial derived seeds, so the result does not
/// depend on scheduling.
pub fn monte_carlo_agreement(
    mu: &SyntheticDistribution,
    n: usize,
    trials: usize,
    epsilon: f64,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidParam("trials must be at least 1".into()));
    }
    let width = mu.tau_size;
    let ideal = ideal_of_distribution(mu);
    let checked: Vec<u32> = (0..(1u32 << width))
        .filter(|&t| epsilon_separation(mu, t).expect("key in range") >= epsilon)
        .collect();
    let ideal_membership: Vec<bool> = checked
        .iter()
        .map(|&t| ideal.evaluate(&type_bits(t, width)).expect("width matches"))
        .collect();
    let fs = FeatureSet::new(
        (0..width).collect(),
        (0..width).map(|j| format!("p{j}")).collect(),
    )?;

    let successes: u64 = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let sample = sample_model(mu, n, derive_seed(seed, trial as u64))
                .expect("n >= 1 checked above");
            let table = build_type_table(&sample, &fs).expect("sample is non-empty");
            let empirical = ideal_classifier(&table);
            let agrees = checked.iter().zip(&ideal_membership).all(|(&t, &member)| {
                empirical
                    .evaluate(&type_bits(t, width))
                    .expect("width matches")
                    == member
            });
            u64::from(agrees)
        })
        .sum();
    Ok(successes as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dnf;

    fn mu_one_var() -> SyntheticDistribution {
        // tau_size = 1: keys are (p << 1) | q.
        SyntheticDistribution::new(
            1,
            &[
                (0b11, 0.4), // p, q
                (0b10, 0.1), // p, not q
                (0b01, 0.2), // not p, q
                (0b00, 0.3), // not p, not q
            ],
        )
        .unwrap()
    }

    #[test]
    fn theorem_sample_size_matches_direct_evaluation() {
        let p = BoundParams::new(3, 0.05, 0.01).unwrap();
        assert_eq!(theorem_sample_size(&p), 5903);
        let p = BoundParams::new(2, 0.3, 0.1).unwrap();
        assert_eq!(theorem_sample_size(&p), 98);
    }

    #[test]
    fn corollary_sample_size_matches_direct_evaluation() {
        let p = BoundParams::new(3, 0.05, 0.01).unwrap();
        assert_eq!(corollary_sample_size(&p), 377_742);
    }

    #[test]
    fn corollary_reduces_to_theorem_at_tau_zero() {
        let p = BoundParams::new(0, 0.2, 0.05).unwrap();
        assert_eq!(corollary_sample_size(&p), theorem_sample_size(&p));
    }

    #[test]
    fn halving_epsilon_quadruples_the_preceiling_value() {
        let p1 = BoundParams::new(4, 0.2, 0.05).unwrap();
        let p2 = BoundParams::new(4, 0.1, 0.05).unwrap();
        let raw1 = 2.0 * log_term(4, 0.05) / (0.2 * 0.2);
        let raw2 = 2.0 * log_term(4, 0.05) / (0.1 * 0.1);
        assert!((raw2 - 4.0 * raw1).abs() < 1e-9);
        assert!(theorem_sample_size(&p2) >= theorem_sample_size(&p1));
    }

    #[test]
    fn bounds_are_monotone() {
        let base = BoundParams::new(3, 0.1, 0.05).unwrap();
        let tighter_eps = BoundParams::new(3, 0.05, 0.05).unwrap();
        let tighter_delta = BoundParams::new(3, 0.1, 0.01).unwrap();
        let bigger_tau = BoundParams::new(4, 0.1, 0.05).unwrap();
        for f in [theorem_sample_size, corollary_sample_size] {
            assert!(f(&tighter_eps) >= f(&base));
            assert!(f(&tighter_delta) >= f(&base));
            assert!(f(&bigger_tau) >= f(&base));
        }
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(BoundParams::new(3, 0.0, 0.1).is_err());
        assert!(BoundParams::new(3, 0.1, 1.0).is_err());
        assert!(BoundParams::new(3, 0.1, 0.0).is_err());
        assert!(BoundParams::new(3, 1.5, 0.1).is_err());
    }

    #[test]
    fn separation_examples() {
        let mu = SyntheticDistribution::new(1, &[(0b11, 0.3), (0b10, 0.1), (0b00, 0.6)]).unwrap();
        assert!((epsilon_separation(&mu, 1).unwrap() - 0.2).abs() < 1e-15);

        let sym = SyntheticDistribution::new(1, &[(0b11, 0.25), (0b10, 0.25), (0b00, 0.5)]).unwrap();
        assert_eq!(epsilon_separation(&sym, 1).unwrap(), 0.0);

        let uniform = SyntheticDistribution::new(
            2,
            &(0u32..8).map(|k| (k, 0.125)).collect::<Vec<_>>(),
        )
        .unwrap();
        for t in 0u32..4 {
            assert_eq!(epsilon_separation(&uniform, t).unwrap(), 0.0);
        }
    }

    #[test]
    fn separation_rejects_out_of_range_keys() {
        let mu = mu_one_var();
        assert!(epsilon_separation(&mu, 2).is_err());
    }

    #[test]
    fn true_error_term_by_term() {
        let mu = mu_one_var();
        let p = DnfFormula::new(
            vec![Conjunction::new(vec![Literal::positive(0)]).unwrap()],
            1,
        )
        .unwrap();
        // Formula p: wrong mass is mu(p, not q) + mu(not p, q) = 0.1 + 0.2.
        assert!((true_error(&p, &mu).unwrap() - 0.3).abs() < 1e-15);

        let bottom = DnfFormula::bottom(1);
        assert!((true_error(&bottom, &mu).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn deterministic_distribution_has_zero_optimal_error() {
        // q fixed per feature type.
        let mu = SyntheticDistribution::new(1, &[(0b11, 0.5), (0b00, 0.5)]).unwrap();
        let f = ideal_of_distribution(&mu);
        assert_eq!(true_error(&f, &mu).unwrap(), 0.0);
    }

    #[test]
    fn ideal_of_distribution_includes_ties_and_skips_zero_mass() {
        let mu = mu_one_var();
        let f = ideal_of_distribution(&mu);
        // p: 0.4/0.5 >= 1/2 included; not p: 0.2/0.5 < 1/2 excluded.
        assert!(f.evaluate(&[true]).unwrap());
        assert!(!f.evaluate(&[false]).unwrap());

        let tie = SyntheticDistribution::new(1, &[(0b11, 0.25), (0b10, 0.25), (0b00, 0.5)]).unwrap();
        assert!(ideal_of_distribution(&tie).evaluate(&[true]).unwrap());

        let hole = SyntheticDistribution::new(1, &[(0b11, 1.0)]).unwrap();
        let f = ideal_of_distribution(&hole);
        assert!(f.evaluate(&[true]).unwrap());
        assert!(!f.evaluate(&[false]).unwrap());
    }

    #[test]
    fn all_positive_mass_gives_top_equivalent_formula() {
        let mu = SyntheticDistribution::new(1, &[(0b01, 0.5), (0b11, 0.5)]).unwrap();
        let f = ideal_of_distribution(&mu);
        assert!(f.evaluate(&[true]).unwrap());
        assert!(f.evaluate(&[false]).unwrap());
        assert!(dnf::equivalent(&f, &DnfFormula::top(1)).unwrap());
    }

    #[test]
    fn point_mass_sampling_is_constant() {
        let mu = SyntheticDistribution::new(2, &[(0b101, 1.0)]).unwrap();
        let bd = sample_model(&mu, 50, 7).unwrap();
        assert!(bd.rows.iter().all(|r| r == &vec![false, true]));
        assert!(bd.targets.iter().all(|&t| t));
    }

    #[test]
    fn zero_sample_size_is_rejected() {
        let mu = mu_one_var();
        assert!(sample_model(&mu, 0, 1).is_err());
    }

    #[test]
    fn large_sample_frequencies_match_the_distribution() {
        // Frozen statistical fixture: every extended type's empirical
        // frequency lands within 3 standard errors of its mass.
        let mu = mu_one_var();
        let n = 1_000_000usize;
        let bd = sample_model(&mu, n, 424242).unwrap();
        let mut counts = [0u64; 4];
        for (row, &t) in bd.rows.iter().zip(&bd.targets) {
            let key = (row[0] as usize) << 1 | t as usize;
            counts[key] += 1;
        }
        for key in 0u32..4 {
            let p = mu.prob_ext(key);
            let se = (p * (1.0 - p) / n as f64).sqrt();
            let observed = counts[key as usize] as f64 / n as f64;
            assert!(
                (observed - p).abs() <= 3.0 * se,
                "key {key}: observed {observed}, expected {p}"
            );
        }
    }

    #[test]
    fn agreement_is_one_for_deterministic_distributions() {
        let mu = SyntheticDistribution::new(1, &[(0b11, 0.5), (0b00, 0.5)]).unwrap();
        let freq = monte_carlo_agreement(&mu, 500, 1, 0.1, 3).unwrap();
        assert_eq!(freq, 1.0);
    }

    #[test]
    fn agreement_is_vacuously_one_when_nothing_is_separated() {
        let mu = mu_one_var(); // separations are 0.3 and 0.1
        let freq = monte_carlo_agreement(&mu, 5, 20, 0.9, 11).unwrap();
        assert_eq!(freq, 1.0);
    }

    #[test]
    fn agreement_improves_with_sample_size() {
        // Both types separated by 0.2; small samples misidentify the
        // majority label sometimes, large samples almost never.
        let mu = SyntheticDistribution::new(
            1,
            &[(0b11, 0.35), (0b10, 0.15), (0b01, 0.15), (0b00, 0.35)],
        )
        .unwrap();
        let small = monte_carlo_agreement(&mu, 10, 400, 0.2, 5).unwrap();
        let large = monte_carlo_agreement(&mu, 400, 400, 0.2, 5).unwrap();
        assert!(large >= small);
        assert!(large >= 0.95, "large-sample agreement was {large}");
    }

    #[test]
    fn theorem_guarantee_holds_on_a_separated_distribution() {
        // tau_size = 1, both types 0.4-separated.
        let mu = SyntheticDistribution::new(
            1,
            &[(0b11, 0.45), (0b10, 0.05), (0b01, 0.05), (0b00, 0.45)],
        )
        .unwrap();
        let params = BoundParams::new(1, 0.4, 0.1).unwrap();
        let n = theorem_sample_size(&params) as usize;
        let trials = 400;
        let freq = monte_carlo_agreement(&mu, n, trials, 0.4, 99).unwrap();
        let slack = 3.0 * (0.1f64 * 0.9 / trials as f64).sqrt();
        assert!(
            freq >= 0.9 - slack,
            "agreement {freq} below guarantee with slack {slack}"
        );
    }

    /// The distribution's ideal classifier minimizes true error over every
    /// Boolean function of the features, checked exhaustively.
    #[test]
    fn ideal_of_distribution_minimizes_true_error() {
        let mut rng = crate::rng::rng_from_seed(314);
        for trial in 0..30u32 {
            let tau = (1 + trial % 3) as usize; // 1..=3
            let len = 1usize << (tau + 1);
            let mut masses: Vec<f64> = (0..len)
                .map(|_| crate::rng::next_f64(&mut rng))
                .collect();
            let total: f64 = masses.iter().sum();
            for m in &mut masses {
                *m /= total;
            }
            // Renormalize exactly enough for the constructor's tolerance.
            let drift: f64 = 1.0 - masses.iter().sum::<f64>();
            masses[0] += drift;
            let entries: Vec<(u32, f64)> = masses
                .iter()
                .enumerate()
                .map(|(k, &p)| (k as u32, p))
                .collect();
            let mu = SyntheticDistribution::new(tau, &entries).unwrap();

            let ideal_err = true_error(&ideal_of_distribution(&mu), &mu).unwrap();
            let n_types = 1u32 << tau;
            let mut best = f64::INFINITY;
            for table in 0u64..(1u64 << n_types) {
                let mut err = 0.0;
                for t in 0..n_types {
                    let predicted = table >> t & 1 == 1;
                    err += if predicted {
                        mu.prob_ext(t << 1)
                    } else {
                        mu.prob_ext(t << 1 | 1)
                    };
                }
                best = best.min(err);
            }
            assert!(
                ideal_err <= best + 1e-12,
                "tau {tau}: ideal {ideal_err} vs best {best}"
            );
        }
    }

    #[test]
    fn distribution_document_round_trips() {
        let mu = mu_one_var();
        let text = mu.to_json();
        let back = SyntheticDistribution::from_json(&text).unwrap();
        assert_eq!(mu, back);
    }

    #[test]
    fn distribution_rejects_bad_mass() {
        assert!(SyntheticDistribution::new(1, &[(0b11, 0.5)]).is_err());
        assert!(SyntheticDistribution::new(1, &[(0b11, -0.5), (0b00, 1.5)]).is_err());
    }
}
