//! Ranks within pooled two-sample data and exact two-sample linear rank
//! statistics.
//!
//! A [`PooledSample`] holds the scored positive sample (size `n`) and the
//! scored negative sample (size `m`); every rank operation works on the
//! pooled `N = n + m` values. Ties receive the mid-rank (the average of the
//! integer ranks the tied group occupies), which keeps the Wilcoxon/AUC
//! identity exact under the half-weight tie convention used by
//! [`crate::roceval::empirical_auc`].

use crate::error::{Error, Result};
use crate::scoregen::ScoreGen;

/// Two labeled vectors of univariate scores, the domain of all rank
/// statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledSample {
    positives: Vec<f64>,
    negatives: Vec<f64>,
}

impl PooledSample {
    /// Validates that both samples are nonempty and every entry is finite.
    pub fn new(positives: Vec<f64>, negatives: Vec<f64>) -> Result<Self> {
        if positives.is_empty() || negatives.is_empty() {
            return Err(Error::InvalidInput(
                "both samples must contain at least one score".into(),
            ));
        }
        if positives
            .iter()
            .chain(negatives.iter())
            .any(|v| !v.is_finite())
        {
            return Err(Error::InvalidInput("scores must be finite".into()));
        }
        Ok(Self {
            positives,
            negatives,
        })
    }

    pub fn positives(&self) -> &[f64] {
        &self.positives
    }

    pub fn negatives(&self) -> &[f64] {
        &self.negatives
    }

    /// Number of positive scores, `n`.
    pub fn n(&self) -> usize {
        self.positives.len()
    }

    /// Number of negative scores, `m`.
    pub fn m(&self) -> usize {
        self.negatives.len()
    }

    /// Pooled size `N = n + m`.
    pub fn pooled_size(&self) -> usize {
        self.positives.len() + self.negatives.len()
    }

    /// All pooled scores, positives first.
    pub fn pooled_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.positives.iter().chain(self.negatives.iter()).copied()
    }

    /// Rank of each positive score within the pooled sample, in the order the
    /// positives were given.
    ///
    /// Distinct values receive integer ranks in `1..=N`; a tied group
    /// receives the average of the integer ranks it occupies, so the multiset
    /// of pooled ranks always sums to `N(N+1)/2`.
    pub fn rank_positives(&self) -> Vec<f64> {
        let n = self.n();
        let total = self.pooled_size();

        // Label-agnostic sort: order depends on values only, so any
        // permutation of the inputs yields the same ranks.
        let mut order: Vec<usize> = (0..total).collect();
        order.sort_by(|&a, &b| {
            let va = self.pooled_at(a);
            let vb = self.pooled_at(b);
            va.partial_cmp(&vb).expect("scores are finite")
        });

        let mut ranks = vec![0.0; total];
        let mut start = 0;
        while start < total {
            let value = self.pooled_at(order[start]);
            let mut end = start + 1;
            while end < total && self.pooled_at(order[end]) == value {
                end += 1;
            }
            // Positions start..end hold integer ranks start+1 ..= end.
            let mid_rank = (start + 1 + end) as f64 / 2.0;
            for &idx in &order[start..end] {
                ranks[idx] = mid_rank;
            }
            start = end;
        }
        ranks.truncate(n);
        ranks
    }

    /// Raw empirical c.d.f. of the pooled sample: `#{pooled values <= t} / N`.
    pub fn pooled_ecdf(&self, t: f64) -> f64 {
        let count = self.pooled_values().filter(|&v| v <= t).count();
        count as f64 / self.pooled_size() as f64
    }

    /// Exact two-sample linear rank statistic
    /// `sum_i phi(Rank(x_i) / (N + 1))`.
    ///
    /// The arguments `Rank/(N+1)` always lie strictly inside `(0, 1)`, so
    /// every catalogue score-generating function is admissible here,
    /// including the ones singular at the endpoints.
    pub fn linear_rank_statistic(&self, phi: &ScoreGen) -> f64 {
        let denom = (self.pooled_size() + 1) as f64;
        self.rank_positives()
            .iter()
            .map(|&r| {
                phi.value(r / denom)
                    .expect("normalized ranks lie strictly inside (0, 1)")
            })
            .sum()
    }

    /// Rank-sum Wilcoxon statistic `sum_i Rank(x_i)`.
    pub fn wilcoxon_statistic(&self) -> f64 {
        self.rank_positives().iter().sum()
    }

    fn pooled_at(&self, idx: usize) -> f64 {
        if idx < self.positives.len() {
            self.positives[idx]
        } else {
            self.negatives[idx - self.positives.len()]
        }
    }
}
