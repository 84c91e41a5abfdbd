use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{Corpus, Split};
use crate::error::{Error, Result};
use crate::seed::{rng_for, stream};

/// Eight labeling budgets between 64 and 1024.
pub const DEFAULT_BUDGETS: [usize; 8] = [64, 128, 192, 256, 384, 512, 768, 1024];

/// Labeled train ids for one (budget, repetition) cell, shared by every
/// downstream setting.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetSample {
    pub budget: usize,
    pub repetition: usize,
    pub doc_ids: Vec<u64>,
}

/// Draw one sample per (budget, repetition), each uniform without
/// replacement from the train split and keyed only by
/// `(seed, budget, repetition)`.
pub fn sample_budgets(
    corpus: &Corpus,
    budgets: &[usize],
    repetitions: usize,
    seed: u64,
) -> Result<Vec<BudgetSample>> {
    if repetitions == 0 {
        return Err(Error::InvalidConfig("repetitions must be at least 1".into()));
    }
    let train = corpus.split_ids(Split::Train);
    if let Some(&budget) = budgets.iter().find(|&&b| b > train.len() || b == 0) {
        if budget == 0 {
            return Err(Error::InvalidConfig("budgets must be positive".into()));
        }
        return Err(Error::BudgetTooLarge {
            budget,
            train_size: train.len(),
        });
    }
    let mut samples = Vec::with_capacity(budgets.len() * repetitions);
    for &budget in budgets {
        for repetition in 0..repetitions {
            let mut rng = rng_for(seed, &[stream::BUDGET, budget as u64, repetition as u64]);
            let mut doc_ids: Vec<u64> = index::sample(&mut rng, train.len(), budget)
                .into_iter()
                .map(|i| train[i])
                .collect();
            doc_ids.sort_unstable();
            samples.push(BudgetSample {
                budget,
                repetition,
                doc_ids,
            });
        }
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{split_corpus, Document, SplitRatios};

    fn corpus(n: u64) -> Corpus {
        let docs = (0..n)
            .map(|i| Document::new(i, "text").with_label(if i % 4 == 0 { "a" } else { "b" }))
            .collect();
        split_corpus(docs, SplitRatios::default(), 1).unwrap()
    }

    #[test]
    fn five_samples_of_sixty_four() {
        let c = corpus(200);
        let samples = sample_budgets(&c, &[64], 5, 3).unwrap();
        assert_eq!(samples.len(), 5);
        let train: std::collections::HashSet<u64> = c.split_ids(Split::Train).into_iter().collect();
        for (rep, s) in samples.iter().enumerate() {
            assert_eq!(s.repetition, rep);
            assert_eq!(s.doc_ids.len(), 64);
            let distinct: std::collections::HashSet<_> = s.doc_ids.iter().collect();
            assert_eq!(distinct.len(), 64);
            assert!(s.doc_ids.iter().all(|id| train.contains(id)));
        }
        assert_ne!(samples[0].doc_ids, samples[1].doc_ids);
    }

    #[test]
    fn exhaustive_budget_is_whole_train_split() {
        let c = corpus(50);
        let n = c.split_len(Split::Train);
        for s in sample_budgets(&c, &[n], 3, 0).unwrap() {
            assert_eq!(s.doc_ids, c.split_ids(Split::Train));
        }
    }

    #[test]
    fn samples_depend_only_on_budget_and_repetition() {
        let c = corpus(500);
        let a = sample_budgets(&c, &[64, 128], 2, 11).unwrap();
        let b = sample_budgets(&c, &[128], 2, 11).unwrap();
        assert_eq!(a[2..], b[..]);
    }

    #[test]
    fn oversized_budget_rejected() {
        let c = corpus(20);
        assert!(matches!(
            sample_budgets(&c, &[64], 1, 0),
            Err(Error::BudgetTooLarge { budget: 64, .. })
        ));
        assert!(sample_budgets(&c, &[4], 0, 0).is_err());
    }

    /// Class frequencies of pooled uniform draws match the train prior.
    #[test]
    fn pooled_draws_follow_class_prior() {
        let c = corpus(1000);
        let train = c.split_ids(Split::Train);
        let prior_a = train.iter().filter(|&&id| id % 4 == 0).count() as f64 / train.len() as f64;
        let mut observed_a = 0.0;
        let mut total = 0.0;
        for seed in 0..200 {
            for s in sample_budgets(&c, &[32], 1, seed).unwrap() {
                observed_a += s.doc_ids.iter().filter(|&&id| id % 4 == 0).count() as f64;
                total += s.doc_ids.len() as f64;
            }
        }
        let expected_a = prior_a * total;
        let expected_b = total - expected_a;
        let observed_b = total - observed_a;
        let chi2 = (observed_a - expected_a).powi(2) / expected_a
            + (observed_b - expected_b).powi(2) / expected_b;
        // 1 degree of freedom, 0.999 quantile; the sampling without
        // replacement only shrinks the variance.
        assert!(chi2 < 10.83, "chi2 = {chi2}");
    }
}
