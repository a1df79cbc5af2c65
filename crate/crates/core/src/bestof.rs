//! Comparison systems: best-of-(2L+1) points with one server, and
//! best-of-(2L+1) games with alternating serve and three tie-breaks at L-L.

use serde::{Deserialize, Serialize};

use crate::dist::{Breakdown, BreakdownRow, Mixture, PointCountDistribution};
use crate::error::{Error, Result};
use crate::game::{game_moments, game_win_prob};
use crate::prob::{binomial, binomial_convolution_mass, game_split, ServePair, ServeProb};
use crate::set::{stt_moments, stt_win_prob};

/// Probability that the player winning each point with probability `p`
/// is first to L+1 points.
pub fn bofk_win_prob(p: ServeProb, l: u32) -> Result<f64> {
    check_l(l)?;
    let (pp, q) = (p.p(), p.q());
    Ok((0..=l)
        .map(|j| binomial(l + j, l) * pp.powi(l as i32 + 1) * q.powi(j as i32))
        .sum())
}

fn check_l(l: u32) -> Result<()> {
    if l == 0 {
        Err(Error::invalid("l", "must be at least 1"))
    } else {
        Ok(())
    }
}

/// PMF of the number of points, supported on L+1..=2L+1.
pub fn bofk_points_distribution(p: ServeProb, l: u32) -> Result<PointCountDistribution> {
    check_l(l)?;
    let (pp, q) = (p.p(), p.q());
    let support: Vec<(u64, f64)> = (l + 1..=2 * l + 1)
        .map(|n| {
            let c = binomial(n - 1, l);
            let rest = (n - 1 - l) as i32;
            let m = c * (pp.powi(l as i32 + 1) * q.powi(rest) + q.powi(l as i32 + 1) * pp.powi(rest));
            (u64::from(n), m)
        })
        .collect();
    let mut acc = Mixture::default();
    for &(n, m) in &support {
        acc.add(m, n as f64, 0.0);
    }
    let (mean, variance) = acc.moments();
    Ok(PointCountDistribution {
        support,
        truncation_mass: 0.0,
        mean,
        variance,
    })
}

/// Tie-break played at L games all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieBreak {
    /// One sudden-death game with the server drawn by coin flip.
    Sg,
    /// Games continue until one player leads by two games.
    Sttg,
    /// Points continue until one player leads by two points.
    Sttp,
}

/// How the STTG tie-break's length is counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TieCount {
    /// Points: a geometric number of game pairs, each costing N_G(pA) + N_G(pB).
    #[default]
    Compound,
    /// Games: the STT moments evaluated at the game probabilities.
    Games,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestOfGamesSpec {
    pub l: u32,
    pub tiebreak: TieBreak,
    #[serde(default)]
    pub count: TieCount,
}

impl BestOfGamesSpec {
    pub fn new(l: u32, tiebreak: TieBreak) -> Result<Self> {
        check_l(l)?;
        Ok(BestOfGamesSpec {
            l,
            tiebreak,
            count: TieCount::Compound,
        })
    }

    pub fn with_count(mut self, count: TieCount) -> Self {
        self.count = count;
        self
    }
}

/// Win probability and length moments of the tie-break from L-L.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TieBranch {
    pub win: f64,
    pub mean: f64,
    pub var: f64,
}

fn non_terminating(what: &str) -> Error {
    Error::NonTerminating(format!("{what}: both players always hold (or always lose) serve"))
}

pub fn tie_branch(pair: ServePair, spec: BestOfGamesSpec) -> Result<TieBranch> {
    let ga = game_win_prob(pair.a);
    let gb = game_win_prob(pair.b);
    let (ma, va) = game_moments(pair.a);
    let (mb, vb) = game_moments(pair.b);
    Ok(match spec.tiebreak {
        TieBreak::Sg => {
            let mut acc = Mixture::default();
            acc.add(0.5, ma, va);
            acc.add(0.5, mb, vb);
            let (mean, var) = acc.moments();
            TieBranch {
                win: 0.5 * (ga + 1.0 - gb),
                mean,
                var,
            }
        }
        TieBreak::Sttg => {
            let eta = ga * (1.0 - gb) + (1.0 - ga) * gb;
            if eta == 0.0 {
                return Err(non_terminating("STTG tie-break"));
            }
            let win = ga * (1.0 - gb) / eta;
            let (mean, var) = match spec.count {
                TieCount::Games => (2.0 / eta, 4.0 * (1.0 - eta) / (eta * eta)),
                TieCount::Compound => {
                    let (cm, cv) = (ma + mb, va + vb);
                    let (gm, gv) = (1.0 / eta, (1.0 - eta) / (eta * eta));
                    (gm * cm, gm * cv + gv * cm * cm)
                }
            };
            TieBranch { win, mean, var }
        }
        TieBreak::Sttp => {
            let win = stt_win_prob(pair).map_err(|_| non_terminating("STTP tie-break"))?;
            let (mean, var) = stt_moments(pair)?;
            TieBranch { win, mean, var }
        }
    })
}

/// Joint mass of the final game score: A reaching L+1 with b < L, B
/// reaching L+1 with a < L, and the L-L tie.
#[derive(Debug, Clone, PartialEq)]
pub struct GameScoreJpmf {
    pub l: u32,
    pub a_wins: Vec<f64>,
    pub b_wins: Vec<f64>,
    pub tie: f64,
}

pub fn bog_game_jpmf(pair: ServePair, l: u32) -> Result<GameScoreJpmf> {
    check_l(l)?;
    let ga = game_win_prob(pair.a);
    let gb = game_win_prob(pair.b);
    let mut a_wins = Vec::with_capacity(l as usize);
    let mut b_wins = Vec::with_capacity(l as usize);
    for h in 0..l {
        let (ta, tb) = game_split(l + h);
        let a_serves_last = (l + h + 1) % 2 == 1;
        a_wins.push(
            binomial_convolution_mass(ta, ga, tb, 1.0 - gb, l)
                * if a_serves_last { ga } else { 1.0 - gb },
        );
        b_wins.push(
            binomial_convolution_mass(ta, 1.0 - ga, tb, gb, l)
                * if a_serves_last { 1.0 - ga } else { gb },
        );
    }
    let tie = binomial_convolution_mass(l, ga, l, 1.0 - gb, l);
    Ok(GameScoreJpmf {
        l,
        a_wins,
        b_wins,
        tie,
    })
}

pub fn bog_breakdown(pair: ServePair, spec: BestOfGamesSpec) -> Result<Breakdown> {
    let jp = bog_game_jpmf(pair, spec.l)?;
    let tb = if jp.tie > 0.0 {
        tie_branch(pair, spec)?
    } else {
        TieBranch {
            win: 0.0,
            mean: 0.0,
            var: 0.0,
        }
    };
    let (ma, va) = game_moments(pair.a);
    let (mb, vb) = game_moments(pair.b);
    let games = |g: u32| {
        let (ta, tb) = game_split(g);
        let (ta, tb) = (f64::from(ta), f64::from(tb));
        (ta * ma + tb * mb, ta * va + tb * vb)
    };
    let l = spec.l;
    let mut rows: Vec<BreakdownRow> = (0..l)
        .map(|h| {
            let (cond_mean, cond_var) = games(l + 1 + h);
            BreakdownRow {
                label: format!("{}-{h}", l + 1),
                prob_a: jp.a_wins[h as usize],
                prob_b: jp.b_wins[h as usize],
                cond_mean,
                cond_var,
            }
        })
        .collect();
    let (m, v) = games(2 * l);
    rows.push(BreakdownRow {
        label: "TB".into(),
        prob_a: jp.tie * tb.win,
        prob_b: jp.tie * (1.0 - tb.win),
        cond_mean: m + tb.mean,
        cond_var: v + tb.var,
    });
    Ok(Breakdown::from_rows(rows))
}

/// Probability that A, serving the first game, wins.
pub fn bog_match_win_prob(pair: ServePair, spec: BestOfGamesSpec) -> Result<f64> {
    check_l(spec.l)?;
    let ga = game_win_prob(pair.a);
    let gb = game_win_prob(pair.b);
    let l = spec.l;
    let mut head = 0.0;
    let mut tie = 0.0;
    for k in l..=2 * l {
        let m = binomial_convolution_mass(l, ga, l, 1.0 - gb, k);
        if k == l {
            tie = m;
        } else {
            head += m;
        }
    }
    if tie == 0.0 {
        return Ok(head);
    }
    Ok(head + tie * tie_branch(pair, spec)?.win)
}

pub fn bog_match_points_moments(pair: ServePair, spec: BestOfGamesSpec) -> Result<(f64, f64)> {
    let b = bog_breakdown(pair, spec)?;
    Ok((b.mean, b.variance))
}
