//! Best-of-(2Q+1)-sets match.

use serde::{Deserialize, Serialize};

use crate::dist::{Breakdown, BreakdownRow};
use crate::error::{Error, Result};
use crate::prob::{binomial, ServePair};
use crate::set::{set_breakdown_with, TieRule};

/// Match format: ST target `k0` in sets 1..2Q, `k1` in the deciding set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchSpec {
    pub k0: u32,
    pub k1: u32,
    pub q: u32,
    #[serde(default)]
    pub rule: TieRule,
}

impl MatchSpec {
    pub fn new(k0: u32, k1: u32, q: u32) -> Result<Self> {
        if k0 < 2 {
            return Err(Error::invalid("k0", "must be at least 2"));
        }
        if k1 < 2 {
            return Err(Error::invalid("k1", "must be at least 2"));
        }
        if q < 1 {
            return Err(Error::invalid("q", "must be at least 1"));
        }
        Ok(MatchSpec {
            k0,
            k1,
            q,
            rule: TieRule::Exact,
        })
    }

    pub fn with_rule(mut self, rule: TieRule) -> Self {
        self.rule = rule;
        self
    }
}

/// Joint mass of the final set score (S_A, S_B).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetScoreJpmf {
    pub q: u32,
    /// Pr{(Q+1, b)} for b = 0..=Q.
    pub a_wins: Vec<f64>,
    /// Pr{(a, Q+1)} for a = 0..=Q.
    pub b_wins: Vec<f64>,
    theta0: f64,
}

impl SetScoreJpmf {
    /// Mass at any score; transient scores (a, b <= Q) get C(a+b, a) th^a (1-th)^b.
    pub fn mass(&self, a: u32, b: u32) -> f64 {
        let q = self.q;
        match (a, b) {
            (a, b) if a == q + 1 && b <= q => self.a_wins[b as usize],
            (a, b) if b == q + 1 && a <= q => self.b_wins[a as usize],
            (a, b) if a <= q && b <= q => {
                let t = self.theta0;
                binomial(a + b, a) * t.powi(a as i32) * (1.0 - t).powi(b as i32)
            }
            _ => 0.0,
        }
    }

    pub fn win_prob(&self) -> f64 {
        self.a_wins.iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.a_wins.iter().chain(&self.b_wins).sum()
    }
}

fn jpmf_from(theta0: f64, theta1: f64, q: u32) -> SetScoreJpmf {
    let t = theta0;
    let mut a_wins = Vec::with_capacity(q as usize + 1);
    let mut b_wins = Vec::with_capacity(q as usize + 1);
    for h in 0..q {
        let c = binomial(q + h, h);
        a_wins.push(c * t.powi(q as i32 + 1) * (1.0 - t).powi(h as i32));
        b_wins.push(c * (1.0 - t).powi(q as i32 + 1) * t.powi(h as i32));
    }
    let level = binomial(2 * q, q) * (t * (1.0 - t)).powi(q as i32);
    a_wins.push(level * theta1);
    b_wins.push(level * (1.0 - theta1));
    SetScoreJpmf {
        q,
        a_wins,
        b_wins,
        theta0,
    }
}

/// Set-score distribution; every set is independent with A serving first.
pub fn match_set_jpmf(pair: ServePair, spec: MatchSpec) -> Result<SetScoreJpmf> {
    let s0 = set_breakdown_with(pair, spec.k0, spec.rule)?;
    let s1 = set_breakdown_with(pair, spec.k1, spec.rule)?;
    Ok(jpmf_from(s0.win_prob, s1.win_prob, spec.q))
}

pub fn match_win_prob(pair: ServePair, spec: MatchSpec) -> Result<f64> {
    Ok(match_set_jpmf(pair, spec)?.win_prob())
}

/// Rows for loser set counts 0..=Q with conditional point moments.
pub fn match_breakdown(pair: ServePair, spec: MatchSpec) -> Result<Breakdown> {
    let s0 = set_breakdown_with(pair, spec.k0, spec.rule)?;
    let s1 = set_breakdown_with(pair, spec.k1, spec.rule)?;
    let jp = jpmf_from(s0.win_prob, s1.win_prob, spec.q);
    let q = spec.q;
    let rows = (0..=q)
        .map(|h| {
            let (cond_mean, cond_var) = if h < q {
                let n = f64::from(q + 1 + h);
                (n * s0.mean, n * s0.variance)
            } else {
                let n = f64::from(2 * q);
                (n * s0.mean + s1.mean, n * s0.variance + s1.variance)
            };
            BreakdownRow {
                label: format!("{}-{h}", q + 1),
                prob_a: jp.a_wins[h as usize],
                prob_b: jp.b_wins[h as usize],
                cond_mean,
                cond_var,
            }
        })
        .collect();
    Ok(Breakdown::from_rows(rows))
}

pub fn match_points_moments(pair: ServePair, spec: MatchSpec) -> Result<(f64, f64)> {
    let b = match_breakdown(pair, spec)?;
    Ok((b.mean, b.variance))
}
