//! Alternating-server subsystem: the set tie-breaker's tie-breaker (STT),
//! the K-point set tie-breaker (ST) and the full set.

use serde::{Deserialize, Serialize};

use crate::dist::{Breakdown, BreakdownRow, Mixture, PointCountDistribution};
use crate::error::{Error, Result};
use crate::game::{game_moments, game_win_prob};
use crate::prob::{
    binomial_convolution_mass, first_serves_point, game_split, geometric_moments, serve_split,
    ServePair,
};

/// How A's chance in the STT is taken when B serves its first point.
///
/// Both players serve once in every pair of STT points, so the STT winner
/// does not depend on who starts; `Exact` uses that. `SwappedOdds` credits A
/// with `stt_win_prob(pB, pA)` whenever B starts the STT, i.e. the algebraic
/// rewrite 1 - theta_STT(qB, qA). Several published tables were computed that
/// way; the option exists to reproduce them.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    #[default]
    Exact,
    SwappedOdds,
}

fn non_terminating(what: &str) -> Error {
    Error::NonTerminating(format!(
        "{what}: with pA = pB in {{0, 1}} every pair of tie-breaker points is split"
    ))
}

/// Probability that A wins the STT: pA*qB / (pA*qB + qA*pB).
pub fn stt_win_prob(pair: ServePair) -> Result<f64> {
    let eta = pair.split_prob();
    if eta == 0.0 {
        return Err(non_terminating("STT"));
    }
    Ok(pair.a.p() * pair.b.q() / eta)
}

/// Success probability of the pair-level geometric inside the STT.
pub fn stt_end_prob(pair: ServePair) -> f64 {
    pair.split_prob()
}

/// Mean and variance of the points played in the STT.
pub fn stt_moments(pair: ServePair) -> Result<(f64, f64)> {
    let (m, v) = geometric_moments(pair.split_prob()).map_err(|_| non_terminating("STT"))?;
    Ok((2.0 * m, 4.0 * v))
}

/// PMF of N_STT on even n = 2, 4, ..., n_max.
pub fn stt_points_distribution(pair: ServePair, n_max: u32) -> Result<PointCountDistribution> {
    let (mean, variance) = stt_moments(pair)?;
    let eta = pair.split_prob();
    let r = 1.0 - eta;
    let support = (1..=n_max / 2)
        .map(|l| (2 * u64::from(l), eta * r.powi(l as i32 - 1)))
        .collect();
    Ok(PointCountDistribution {
        support,
        truncation_mass: r.powi((n_max / 2) as i32),
        mean,
        variance,
    })
}

/// Probabilities of every way an ST can end.
#[derive(Debug, Clone, PartialEq)]
pub struct StParts {
    pub k: u32,
    /// A wins K-h, for h = 0..=K-2.
    pub a_wins: Vec<f64>,
    /// B wins K-h, for h = 0..=K-2.
    pub b_wins: Vec<f64>,
    /// Probability of reaching K-1 all.
    pub tie: f64,
    /// Probability that A wins from K-1 all, when the tie is reachable.
    pub tie_win: f64,
    /// STT moments, zero when the tie is unreachable.
    pub stt_mean: f64,
    pub stt_var: f64,
}

impl StParts {
    pub fn new(pair: ServePair, k: u32, rule: TieRule) -> Result<Self> {
        if k < 2 {
            return Err(Error::invalid("k", "the set tie-breaker needs K >= 2"));
        }
        let (pa, qa) = (pair.a.p(), pair.a.q());
        let (pb, qb) = (pair.b.p(), pair.b.q());
        let mut a_wins = Vec::with_capacity(k as usize - 1);
        let mut b_wins = Vec::with_capacity(k as usize - 1);
        for h in 0..=k - 2 {
            let (sa, sb) = serve_split(k + h - 1);
            let a_serves_last = first_serves_point(k + h);
            a_wins.push(
                binomial_convolution_mass(sa, pa, sb, qb, k - 1) * if a_serves_last { pa } else { qb },
            );
            b_wins.push(
                binomial_convolution_mass(sa, pa, sb, qb, h) * if a_serves_last { qa } else { pb },
            );
        }
        let tie = binomial_convolution_mass(k - 1, pa, k - 1, qb, k - 1);
        let (tie_win, stt_mean, stt_var) = if tie > 0.0 {
            let win = match rule {
                TieRule::Exact => stt_win_prob(pair)?,
                TieRule::SwappedOdds if first_serves_point(2 * k - 1) => stt_win_prob(pair)?,
                TieRule::SwappedOdds => stt_win_prob(pair.swapped())?,
            };
            let (m, v) = stt_moments(pair)?;
            (win, m, v)
        } else {
            (0.0, 0.0, 0.0)
        };
        Ok(StParts {
            k,
            a_wins,
            b_wins,
            tie,
            tie_win,
            stt_mean,
            stt_var,
        })
    }

    pub fn win_prob(&self) -> f64 {
        self.a_wins.iter().sum::<f64>() + self.tie * self.tie_win
    }

    /// Mean and variance by iterated moments over the ending category.
    pub fn moments(&self) -> (f64, f64) {
        let mut acc = Mixture::default();
        for (h, (a, b)) in self.a_wins.iter().zip(&self.b_wins).enumerate() {
            acc.add(a + b, f64::from(self.k + h as u32), 0.0);
        }
        acc.add(
            self.tie,
            f64::from(2 * self.k - 2) + self.stt_mean,
            self.stt_var,
        );
        acc.moments()
    }
}

/// Probability that A, the first server, wins a first-to-K ST.
pub fn st_win_prob(pair: ServePair, k: u32) -> Result<f64> {
    st_win_prob_with(pair, k, TieRule::Exact)
}

pub fn st_win_prob_with(pair: ServePair, k: u32, rule: TieRule) -> Result<f64> {
    Ok(StParts::new(pair, k, rule)?.win_prob())
}

pub fn st_moments(pair: ServePair, k: u32) -> Result<(f64, f64)> {
    Ok(StParts::new(pair, k, TieRule::Exact)?.moments())
}

/// PMF of N_ST for n = K..=n_max.
pub fn st_points_distribution(
    pair: ServePair,
    k: u32,
    n_max: u32,
) -> Result<PointCountDistribution> {
    let parts = StParts::new(pair, k, TieRule::Exact)?;
    if n_max < 2 * k - 2 {
        return Err(Error::invalid("n_max", format!("must be at least {}", 2 * k - 2)));
    }
    let (mean, variance) = parts.moments();
    let mut support: Vec<(u64, f64)> = (0..=k - 2)
        .map(|h| {
            let i = h as usize;
            (u64::from(k + h), parts.a_wins[i] + parts.b_wins[i])
        })
        .collect();
    let mut truncation_mass = 0.0;
    if parts.tie > 0.0 {
        let stt = stt_points_distribution(pair, n_max - (2 * k - 2))?;
        support.extend(
            stt.support
                .iter()
                .map(|&(n, m)| (n + u64::from(2 * k - 2), parts.tie * m)),
        );
        truncation_mass = parts.tie * stt.truncation_mass;
    }
    Ok(PointCountDistribution {
        support,
        truncation_mass,
        mean,
        variance,
    })
}

/// Game-level probabilities of every set score.
#[derive(Debug, Clone, PartialEq)]
struct SetScores {
    /// (A wins, B wins) for loser scores 0..=4, then 7-5.
    rows: [(f64, f64); 6],
    /// Games played to reach each row.
    games: [u32; 6],
    /// Probability of six games all.
    tie: f64,
}

fn set_scores(pair: ServePair) -> SetScores {
    let ga = game_win_prob(pair.a);
    let gb = game_win_prob(pair.b);
    let mut rows = [(0.0, 0.0); 6];
    let mut games = [0; 6];
    for h in 0..=4u32 {
        let (ta, tb) = game_split(5 + h);
        let a_serves_last = (6 + h) % 2 == 1;
        let a = binomial_convolution_mass(ta, ga, tb, 1.0 - gb, 5)
            * if a_serves_last { ga } else { 1.0 - gb };
        let b = binomial_convolution_mass(ta, ga, tb, 1.0 - gb, h)
            * if a_serves_last { 1.0 - ga } else { gb };
        rows[h as usize] = (a, b);
        games[h as usize] = 6 + h;
    }
    let s55 = binomial_convolution_mass(5, ga, 5, 1.0 - gb, 5);
    rows[5] = (s55 * ga * (1.0 - gb), s55 * (1.0 - ga) * gb);
    games[5] = 12;
    let tie = s55 * (ga * gb + (1.0 - ga) * (1.0 - gb));
    SetScores { rows, games, tie }
}

/// Per-score breakdown of a set with a first-to-K tie-breaker at six all.
pub fn set_breakdown(pair: ServePair, k: u32) -> Result<Breakdown> {
    set_breakdown_with(pair, k, TieRule::Exact)
}

pub fn set_breakdown_with(pair: ServePair, k: u32, rule: TieRule) -> Result<Breakdown> {
    if k < 2 {
        return Err(Error::invalid("k", "the set tie-breaker needs K >= 2"));
    }
    let scores = set_scores(pair);
    let st = if scores.tie > 0.0 {
        Some(StParts::new(pair, k, rule)?)
    } else {
        None
    };
    let st_win = st.as_ref().map_or(0.0, StParts::win_prob);
    let (st_mean, st_var) = st.as_ref().map_or((0.0, 0.0), StParts::moments);
    let (ma, va) = game_moments(pair.a);
    let (mb, vb) = game_moments(pair.b);
    let rows = (0..7)
        .map(|i| {
            let (g, (prob_a, prob_b)) = if i < 6 {
                (scores.games[i], scores.rows[i])
            } else {
                (12, (scores.tie * st_win, scores.tie * (1.0 - st_win)))
            };
            let (ta, tb) = game_split(g);
            let (ta, tb) = (f64::from(ta), f64::from(tb));
            let mut cond_mean = ta * ma + tb * mb;
            let mut cond_var = ta * va + tb * vb;
            if i == 6 {
                cond_mean += st_mean;
                cond_var += st_var;
            }
            let label = match i {
                5 => "7-5".to_string(),
                6 => "7-6".to_string(),
                h => format!("6-{h}"),
            };
            BreakdownRow {
                label,
                prob_a,
                prob_b,
                cond_mean,
                cond_var,
            }
        })
        .collect();
    Ok(Breakdown::from_rows(rows))
}

/// Probability that A, serving the first game, wins the set.
pub fn set_win_prob(pair: ServePair, k: u32) -> Result<f64> {
    set_win_prob_with(pair, k, TieRule::Exact)
}

pub fn set_win_prob_with(pair: ServePair, k: u32, rule: TieRule) -> Result<f64> {
    Ok(set_breakdown_with(pair, k, rule)?.win_prob)
}

/// Mean and variance of the points played in a set, by conditioning on
/// the final score.
pub fn set_points_moments(pair: ServePair, k: u32) -> Result<(f64, f64)> {
    let b = set_breakdown(pair, k)?;
    Ok((b.mean, b.variance))
}
