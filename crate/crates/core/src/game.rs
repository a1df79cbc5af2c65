//! One-server subsystem: the game tie-breaker (deuce) and the full game.

use crate::dist::{Breakdown, BreakdownRow, PointCountDistribution};
use crate::error::{Error, Result};
use crate::prob::{binomial, ServeProb};

/// Probability that the server wins the game tie-breaker started at deuce.
pub fn gt_win_prob(p: ServeProb) -> f64 {
    let (p, q) = (p.p(), p.q());
    p * p / (p * p + q * q)
}

/// Mean and variance of the points played in the game tie-breaker.
pub fn gt_moments(p: ServeProb) -> (f64, f64) {
    let s = p.p() * p.p() + p.q() * p.q();
    // 2 * Geometric(s) points; s >= 1/2 always
    (2.0 / s, 4.0 * (1.0 - s) / (s * s))
}

/// Probability that the server wins the game.
pub fn game_win_prob(p: ServeProb) -> f64 {
    let (pp, q) = (p.p(), p.q());
    let p3q3 = (pp * q).powi(3);
    pp.powi(4) * (1.0 + 4.0 * q + 10.0 * q * q) + 20.0 * p3q3 * gt_win_prob(p)
}

/// Probability of reaching deuce (three points all).
pub fn deuce_prob(p: ServeProb) -> f64 {
    20.0 * (p.p() * p.q()).powi(3)
}

/// Mass at n = 4, 5, 6 for the server (first) and the receiver (second).
fn short_masses(p: ServeProb, n: u32) -> (f64, f64) {
    let (pp, q) = (p.p(), p.q());
    let c = binomial(n - 1, 3);
    let h = (n - 4) as i32;
    (c * pp.powi(4) * q.powi(h), c * q.powi(4) * pp.powi(h))
}

/// Per-score breakdown: rows for the loser on 0, 1, 2 points and the tie-breaker.
pub fn game_breakdown(p: ServeProb) -> Breakdown {
    let mut rows: Vec<BreakdownRow> = (4..=6)
        .map(|n| {
            let (a, b) = short_masses(p, n);
            BreakdownRow {
                label: format!("4-{}", n - 4),
                prob_a: a,
                prob_b: b,
                cond_mean: f64::from(n),
                cond_var: 0.0,
            }
        })
        .collect();
    let d = deuce_prob(p);
    let g = gt_win_prob(p);
    let (gm, gv) = gt_moments(p);
    rows.push(BreakdownRow {
        label: "TB".into(),
        prob_a: d * g,
        prob_b: d * (1.0 - g),
        cond_mean: 6.0 + gm,
        cond_var: gv,
    });
    Breakdown::from_rows(rows)
}

/// Mean and variance of the points played in a game.
pub fn game_moments(p: ServeProb) -> (f64, f64) {
    let b = game_breakdown(p);
    (b.mean, b.variance)
}

/// PMF of the number of points in a game, listed for n = 4..=n_max; the
/// geometric tail beyond `n_max` is reported in `truncation_mass`.
pub fn game_points_pmf(p: ServeProb, n_max: u32) -> Result<PointCountDistribution> {
    if n_max < 6 {
        return Err(Error::invalid("n_max", "must be at least 6"));
    }
    let (pp, q) = (p.p(), p.q());
    let d = deuce_prob(p);
    let s = pp * pp + q * q;
    let r = 2.0 * pp * q;
    let mut support = Vec::with_capacity(n_max as usize);
    for n in 4..=n_max {
        let m = match n {
            4..=6 => {
                let (a, b) = short_masses(p, n);
                a + b
            }
            n if n % 2 == 0 => d * s * r.powi(((n - 6) / 2 - 1) as i32),
            _ => 0.0,
        };
        support.push((u64::from(n), m));
    }
    let pairs_kept = (n_max - 6) / 2;
    let (mean, variance) = game_moments(p);
    Ok(PointCountDistribution {
        support,
        truncation_mass: d * r.powi(pairs_kept as i32),
        mean,
        variance,
    })
}
