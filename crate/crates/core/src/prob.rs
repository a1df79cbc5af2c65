//! Shared primitives: serve probabilities, odds, serve-order counting,
//! binomial convolutions and geometric moments.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Probability that the server wins a point on serve.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ServeProb(f64);

impl ServeProb {
    pub fn new(p: f64) -> Result<Self> {
        Self::named(p, "p")
    }

    /// Like [`ServeProb::new`] but reports `name` in the error.
    pub fn named(p: f64, name: &'static str) -> Result<Self> {
        if p.is_finite() && (0.0..=1.0).contains(&p) {
            Ok(ServeProb(p))
        } else {
            Err(Error::invalid(name, format!("{p} is not a probability in [0, 1]")))
        }
    }

    #[inline]
    pub fn p(self) -> f64 {
        self.0
    }

    #[inline]
    pub fn q(self) -> f64 {
        1.0 - self.0
    }
}

impl TryFrom<f64> for ServeProb {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        ServeProb::new(p)
    }
}

impl From<ServeProb> for f64 {
    fn from(p: ServeProb) -> f64 {
        p.0
    }
}

/// Serve probabilities of player A (the first server) and player B.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ServePair {
    pub a: ServeProb,
    pub b: ServeProb,
}

impl ServePair {
    pub fn new(pa: f64, pb: f64) -> Result<Self> {
        Ok(ServePair {
            a: ServeProb::named(pa, "pa")?,
            b: ServeProb::named(pb, "pb")?,
        })
    }

    /// The pair with roles exchanged: B becomes the first server.
    pub fn swapped(self) -> Self {
        ServePair { a: self.b, b: self.a }
    }

    /// The pair (qB, qA).
    pub fn reversed(self) -> Self {
        ServePair {
            a: ServeProb(self.b.q()),
            b: ServeProb(self.a.q()),
        }
    }

    /// Probability that a pair of points, one on each serve, is split
    /// (each player wins exactly one): pA*qB + qA*pB.
    pub fn split_prob(self) -> f64 {
        self.a.p() * self.b.q() + self.a.q() * self.b.p()
    }
}

/// A nonnegative odds value, or the flag for division by zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Odds {
    Finite(f64),
    Infinite,
}

impl Odds {
    pub fn value(self) -> f64 {
        match self {
            Odds::Finite(v) => v,
            Odds::Infinite => f64::INFINITY,
        }
    }
}

/// p / (1 - p), with `Infinite` at p = 1.
pub fn odds(p: ServeProb) -> Odds {
    if p.q() == 0.0 {
        Odds::Infinite
    } else {
        Odds::Finite(p.p() / p.q())
    }
}

/// (pA/qA) / (pB/qB), computed as pA*qB / (qA*pB). `None` when both
/// numerator and denominator vanish.
pub fn odds_ratio(pair: ServePair) -> Option<Odds> {
    let num = pair.a.p() * pair.b.q();
    let den = pair.a.q() * pair.b.p();
    match (num == 0.0, den == 0.0) {
        (true, true) => None,
        (false, true) => Some(Odds::Infinite),
        _ => Some(Odds::Finite(num / den)),
    }
}

fn positive(n: u32, name: &'static str) -> Result<()> {
    if n == 0 {
        Err(Error::invalid(name, "must be at least 1"))
    } else {
        Ok(())
    }
}

/// Points served by the tie-breaker's first server among the first `n`
/// points of the ABBAABBA... order, for any n >= 0.
#[inline]
pub(crate) fn serve_split(n: u32) -> (u32, u32) {
    // each ABBA block gives two; a partial block opens with A
    let a = 2 * (n / 4) + u32::from(n % 4 >= 1);
    (a, n - a)
}

/// s_A(n): number of the first `n` points served by the first server.
pub fn serves_by_first_server(n: u32) -> Result<u32> {
    positive(n, "n")?;
    Ok(serve_split(n).0)
}

/// s_B(n) = n - s_A(n).
pub fn serves_by_second_server(n: u32) -> Result<u32> {
    positive(n, "n")?;
    Ok(serve_split(n).1)
}

#[inline]
pub(crate) fn first_serves_point(n: u32) -> bool {
    matches!(n % 4, 0 | 1)
}

/// I_A(n): whether the first server serves point `n`.
pub fn first_server_on_point(n: u32) -> Result<bool> {
    positive(n, "n")?;
    Ok(first_serves_point(n))
}

#[inline]
pub(crate) fn game_split(g: u32) -> (u32, u32) {
    let a = g.div_ceil(2);
    (a, g - a)
}

/// t_A(g): games served by the first server among the first `g` games.
pub fn games_served_by_first_server(g: u32) -> Result<u32> {
    positive(g, "g")?;
    Ok(game_split(g).0)
}

/// J_A(g): whether the first server serves game `g`.
pub fn first_server_on_game(g: u32) -> Result<bool> {
    positive(g, "g")?;
    Ok(g % 2 == 1)
}

/// Binomial coefficient by multiplicative recurrence in floating point.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut c = 1.0;
    for i in 0..k {
        c = c * f64::from(n - i) / f64::from(i + 1);
    }
    c
}

/// Full PMF of Binomial(n, p) over 0..=n.
pub fn binomial_pmf(n: u32, p: f64) -> Vec<f64> {
    let q = 1.0 - p;
    (0..=n)
        .map(|k| binomial(n, k) * p.powi(k as i32) * q.powi((n - k) as i32))
        .collect()
}

/// PMF of X + Y for independent X ~ Bin(n1, p1) and Y ~ Bin(n2, p2).
pub fn binomial_convolution(n1: u32, p1: f64, n2: u32, p2: f64) -> Vec<f64> {
    let x = binomial_pmf(n1, p1);
    let y = binomial_pmf(n2, p2);
    let mut out = vec![0.0; x.len() + y.len() - 1];
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            out[i + j] += xi * yj;
        }
    }
    out
}

/// Pr{X + Y = k} for independent binomials.
pub fn binomial_convolution_mass(n1: u32, p1: f64, n2: u32, p2: f64, k: u32) -> f64 {
    if k > n1 + n2 {
        return 0.0;
    }
    let q1 = 1.0 - p1;
    let q2 = 1.0 - p2;
    let lo = k.saturating_sub(n2);
    let hi = k.min(n1);
    (lo..=hi)
        .map(|i| {
            let j = k - i;
            binomial(n1, i)
                * p1.powi(i as i32)
                * q1.powi((n1 - i) as i32)
                * binomial(n2, j)
                * p2.powi(j as i32)
                * q2.powi((n2 - j) as i32)
        })
        .sum()
}

/// Pr{X + Y >= k} for independent binomials.
pub fn binomial_convolution_tail(n1: u32, p1: f64, n2: u32, p2: f64, k: u32) -> f64 {
    (k..=n1 + n2)
        .map(|m| binomial_convolution_mass(n1, p1, n2, p2, m))
        .sum()
}

/// Mean and variance of the Geometric(eta) count of trials to the first success.
pub fn geometric_moments(eta: f64) -> Result<(f64, f64)> {
    if !(eta.is_finite() && eta > 0.0 && eta <= 1.0) {
        if eta == 0.0 {
            return Err(Error::NonTerminating(
                "success probability 0: the process never stops".into(),
            ));
        }
        return Err(Error::invalid("eta", format!("{eta} is not in (0, 1]")));
    }
    Ok((1.0 / eta, (1.0 - eta) / (eta * eta)))
}
