//! Point-count distributions, per-score breakdown tables and the
//! law-of-total-variance accumulator used to combine conditional moments.

use serde::{Deserialize, Serialize};

/// A (possibly truncated) PMF over the number of points played.
///
/// `mean` and `variance` are the exact values of the untruncated
/// distribution, not sums over `support`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCountDistribution {
    pub support: Vec<(u64, f64)>,
    pub truncation_mass: f64,
    pub mean: f64,
    pub variance: f64,
}

impl PointCountDistribution {
    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Sum of the retained masses.
    pub fn retained_mass(&self) -> f64 {
        self.support.iter().map(|&(_, m)| m).sum()
    }

    pub fn mass_at(&self, n: u64) -> f64 {
        self.support
            .iter()
            .find(|&&(k, _)| k == n)
            .map_or(0.0, |&(_, m)| m)
    }

    /// Mean and variance computed from the retained masses only.
    pub fn truncated_moments(&self) -> (f64, f64) {
        let mut acc = Mixture::default();
        for &(n, m) in &self.support {
            acc.add(m, n as f64, 0.0);
        }
        let total = acc.weight();
        let (s1, s2) = (acc.first / total, acc.second / total);
        (s1, s2 - s1 * s1)
    }
}

/// One row of a per-final-score summary table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    /// Final score label, e.g. "6-2", "7-6" or "TB".
    pub label: String,
    pub prob_a: f64,
    pub prob_b: f64,
    pub cond_mean: f64,
    pub cond_var: f64,
}

impl BreakdownRow {
    pub fn prob(&self) -> f64 {
        self.prob_a + self.prob_b
    }
}

/// Per-score rows plus the overall line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Breakdown {
    pub rows: Vec<BreakdownRow>,
    pub win_prob: f64,
    pub lose_prob: f64,
    pub mean: f64,
    pub variance: f64,
}

impl Breakdown {
    /// Assembles the overall line from the rows by iterated mean and variance.
    pub fn from_rows(rows: Vec<BreakdownRow>) -> Self {
        let mut acc = Mixture::default();
        let mut win = 0.0;
        let mut lose = 0.0;
        for r in &rows {
            acc.add(r.prob(), r.cond_mean, r.cond_var);
            win += r.prob_a;
            lose += r.prob_b;
        }
        let (mean, variance) = acc.moments();
        Breakdown {
            rows,
            win_prob: win,
            lose_prob: lose,
            mean,
            variance,
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

/// Accumulates weighted conditional moments:
/// E[N] = sum w m, Var[N] = sum w v + (sum w m^2 - E[N]^2).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Mixture {
    weight: f64,
    first: f64,
    second: f64,
    within: f64,
}

impl Mixture {
    pub fn add(&mut self, weight: f64, mean: f64, var: f64) {
        if weight == 0.0 {
            return;
        }
        self.weight += weight;
        self.first += weight * mean;
        self.second += weight * mean * mean;
        self.within += weight * var;
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Mean and variance, assuming the weights sum to one.
    pub fn moments(&self) -> (f64, f64) {
        let mean = self.first;
        let var = self.within + (self.second - mean * mean);
        (mean, var.max(0.0))
    }
}
