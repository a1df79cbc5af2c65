//! Exact joint law of (winner, points played) by forward propagation over
//! score states.
//!
//! The conditional-moment tables treat game lengths inside a set as
//! independent of who won each game. They are not, so those variances are
//! approximations. This module carries the joint law instead, either as
//! moment triples (mass, E[N; win], E[N^2; win]) or as truncated PMFs, and
//! is the reference the simulator is checked against.

use std::collections::BTreeMap;

use crate::dist::PointCountDistribution;
use crate::error::{Error, Result};
use crate::prob::{first_serves_point, ServePair, ServeProb};
use crate::set::stt_win_prob;
use crate::system::{Params, SystemSpec};
use crate::bestof::TieBreak;

/// Sub-probability law of the points played on some event.
pub trait Tally: Clone {
    /// Zero measure of the same shape.
    fn empty(&self) -> Self;
    /// Unit mass at zero points.
    fn origin(&self) -> Self;
    /// Mass `prob` at exactly `len` points.
    fn unit(&self, prob: f64, len: u64) -> Self;
    /// Mass `mass` spread as base + 2G points, G ~ Geometric(eta) on 1, 2, ...
    fn pairs(&self, mass: f64, base: u64, eta: f64) -> Self;
    /// Sequential composition: lengths add, masses multiply.
    fn then(&self, next: &Self) -> Self;
    fn add(&mut self, other: &Self);
    fn scaled(&self, w: f64) -> Self;
    /// Sum over k >= 0 of the k-fold composition; requires mass < 1.
    fn repeat(&self) -> Self;
    fn mass(&self) -> f64;
}

/// (mass, E[N 1{event}], E[N^2 1{event}]).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Triple {
    pub m0: f64,
    pub m1: f64,
    pub m2: f64,
}

impl Triple {
    fn from_moments(mass: f64, mean: f64, var: f64) -> Self {
        Triple {
            m0: mass,
            m1: mass * mean,
            m2: mass * (var + mean * mean),
        }
    }
}

impl Tally for Triple {
    fn empty(&self) -> Self {
        Triple::default()
    }

    fn origin(&self) -> Self {
        Triple {
            m0: 1.0,
            m1: 0.0,
            m2: 0.0,
        }
    }

    fn unit(&self, prob: f64, len: u64) -> Self {
        let n = len as f64;
        Triple {
            m0: prob,
            m1: prob * n,
            m2: prob * n * n,
        }
    }

    fn pairs(&self, mass: f64, base: u64, eta: f64) -> Self {
        Triple::from_moments(
            mass,
            base as f64 + 2.0 / eta,
            4.0 * (1.0 - eta) / (eta * eta),
        )
    }

    fn then(&self, b: &Self) -> Self {
        Triple {
            m0: self.m0 * b.m0,
            m1: self.m1 * b.m0 + self.m0 * b.m1,
            m2: self.m2 * b.m0 + 2.0 * self.m1 * b.m1 + self.m0 * b.m2,
        }
    }

    fn add(&mut self, o: &Self) {
        self.m0 += o.m0;
        self.m1 += o.m1;
        self.m2 += o.m2;
    }

    fn scaled(&self, w: f64) -> Self {
        Triple {
            m0: w * self.m0,
            m1: w * self.m1,
            m2: w * self.m2,
        }
    }

    fn repeat(&self) -> Self {
        let r = 1.0 - self.m0;
        let s0 = 1.0 / r;
        let s1 = self.m1 * s0 / r;
        let s2 = (self.m2 * s0 + 2.0 * self.m1 * s1) / r;
        Triple {
            m0: s0,
            m1: s1,
            m2: s2,
        }
    }

    fn mass(&self) -> f64 {
        self.m0
    }
}

/// PMF over 0..=n_max points; mass beyond n_max is dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    pub masses: Vec<f64>,
}

impl Pmf {
    pub fn zeros(n_max: usize) -> Self {
        Pmf {
            masses: vec![0.0; n_max + 1],
        }
    }

    fn n_max(&self) -> usize {
        self.masses.len() - 1
    }
}

impl Tally for Pmf {
    fn empty(&self) -> Self {
        Pmf::zeros(self.n_max())
    }

    fn origin(&self) -> Self {
        self.unit(1.0, 0)
    }

    fn unit(&self, prob: f64, len: u64) -> Self {
        let mut out = self.empty();
        if let Some(slot) = out.masses.get_mut(len as usize) {
            *slot = prob;
        }
        out
    }

    fn pairs(&self, mass: f64, base: u64, eta: f64) -> Self {
        let mut out = self.empty();
        let mut w = mass * eta;
        let mut n = base as usize + 2;
        while n <= self.n_max() && w > 0.0 {
            out.masses[n] = w;
            w *= 1.0 - eta;
            n += 2;
        }
        out
    }

    fn then(&self, b: &Self) -> Self {
        let n_max = self.n_max();
        let mut out = self.empty();
        for (i, &x) in self.masses.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (j, &y) in b.masses[..=n_max - i].iter().enumerate() {
                out.masses[i + j] += x * y;
            }
        }
        out
    }

    fn add(&mut self, o: &Self) {
        for (x, y) in self.masses.iter_mut().zip(&o.masses) {
            *x += y;
        }
    }

    fn scaled(&self, w: f64) -> Self {
        Pmf {
            masses: self.masses.iter().map(|x| w * x).collect(),
        }
    }

    fn repeat(&self) -> Self {
        let mut total = self.origin();
        let mut term = self.origin();
        loop {
            term = term.then(self);
            if term.mass() == 0.0 {
                break;
            }
            total.add(&term);
        }
        total
    }

    fn mass(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// Laws of the points played on "A wins" and "B wins".
#[derive(Debug, Clone, PartialEq)]
pub struct Split<T> {
    pub a: T,
    pub b: T,
}

impl<T: Tally> Split<T> {
    /// The same unit seen from the other player.
    fn flipped(&self) -> Self {
        Split {
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }

    fn after(&self, prefix: &T) -> Self {
        Split {
            a: prefix.then(&self.a),
            b: prefix.then(&self.b),
        }
    }

    fn add(&mut self, o: &Self) {
        self.a.add(&o.a);
        self.b.add(&o.b);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Open,
    A,
    B,
    Tie,
}

struct Ends<T> {
    a: T,
    b: T,
    tie: T,
}

/// Forward propagation over scores (a, b) in order of a + b.
fn race<T: Tally>(
    t: &T,
    cap: u32,
    status: impl Fn(u32, u32) -> Status,
    mut unit: impl FnMut(u32, u32) -> Split<T>,
) -> Ends<T> {
    let mut open: BTreeMap<(u32, u32), T> = BTreeMap::new();
    open.insert((0, 0), t.origin());
    let mut ends = Ends {
        a: t.empty(),
        b: t.empty(),
        tie: t.empty(),
    };
    for total in 0..=2 * cap {
        let level: Vec<((u32, u32), T)> = (0..=total)
            .filter_map(|a| open.remove(&(a, total - a)).map(|s| ((a, total - a), s)))
            .collect();
        for ((a, b), s) in level {
            let step = unit(a, b).after(&s);
            for ((na, nb), law) in [((a + 1, b), step.a), ((a, b + 1), step.b)] {
                match status(na, nb) {
                    Status::Open => match open.get_mut(&(na, nb)) {
                        Some(slot) => slot.add(&law),
                        None => {
                            open.insert((na, nb), law);
                        }
                    },
                    Status::A => ends.a.add(&law),
                    Status::B => ends.b.add(&law),
                    Status::Tie => ends.tie.add(&law),
                }
            }
        }
    }
    debug_assert!(open.is_empty());
    ends
}

fn non_terminating(what: &str) -> Error {
    Error::NonTerminating(format!("{what} never ends for this serve pair"))
}

/// Game tie-breaker from deuce.
pub fn gt<T: Tally>(t: &T, p: ServeProb) -> Split<T> {
    let (pp, q) = (p.p(), p.q());
    let s = pp * pp + q * q;
    Split {
        a: t.pairs(pp * pp / s, 0, s),
        b: t.pairs(q * q / s, 0, s),
    }
}

/// A game; `a` is the server.
pub fn game<T: Tally>(t: &T, p: ServeProb) -> Split<T> {
    let unit = |_, _| Split {
        a: t.unit(p.p(), 1),
        b: t.unit(p.q(), 1),
    };
    let status = |a: u32, b: u32| match (a, b) {
        (4, b) if b <= 2 => Status::A,
        (a, 4) if a <= 2 => Status::B,
        (3, 3) => Status::Tie,
        _ => Status::Open,
    };
    let ends = race(t, 4, status, unit);
    let mut out = Split {
        a: ends.a,
        b: ends.b,
    };
    out.add(&gt(t, p).after(&ends.tie));
    out
}

/// STT started by A; the winner does not depend on who starts.
pub fn stt<T: Tally>(t: &T, pair: ServePair) -> Result<Split<T>> {
    let eta = pair.split_prob();
    let win = stt_win_prob(pair).map_err(|_| non_terminating("the STT"))?;
    Ok(Split {
        a: t.pairs(win, 0, eta),
        b: t.pairs(1.0 - win, 0, eta),
    })
}

/// First-to-K ST with A serving first in the ABBA order.
pub fn st<T: Tally>(t: &T, pair: ServePair, k: u32) -> Result<Split<T>> {
    if k < 2 {
        return Err(Error::invalid("k", "the set tie-breaker needs K >= 2"));
    }
    let unit = |a: u32, b: u32| {
        if first_serves_point(a + b + 1) {
            Split {
                a: t.unit(pair.a.p(), 1),
                b: t.unit(pair.a.q(), 1),
            }
        } else {
            Split {
                a: t.unit(pair.b.q(), 1),
                b: t.unit(pair.b.p(), 1),
            }
        }
    };
    let status = |a: u32, b: u32| {
        if a == k && b + 2 <= k {
            Status::A
        } else if b == k && a + 2 <= k {
            Status::B
        } else if a == k - 1 && b == k - 1 {
            Status::Tie
        } else {
            Status::Open
        }
    };
    let ends = race(t, k, status, unit);
    let mut out = Split {
        a: ends.a,
        b: ends.b,
    };
    if ends.tie.mass() > 0.0 {
        out.add(&stt(t, pair)?.after(&ends.tie));
    }
    Ok(out)
}

/// Alternating games starting with A: (A-serve game, B-serve game) seen
/// from A.
fn service_games<T: Tally>(t: &T, pair: ServePair) -> (Split<T>, Split<T>) {
    (game(t, pair.a), game(t, pair.b).flipped())
}

/// A set with a first-to-K ST at six all; A serves the first game.
pub fn set<T: Tally>(t: &T, pair: ServePair, k: u32) -> Result<Split<T>> {
    let (ga, gb) = service_games(t, pair);
    let unit = |a: u32, b: u32| {
        if (a + b).is_multiple_of(2) {
            ga.clone()
        } else {
            gb.clone()
        }
    };
    let status = |a: u32, b: u32| match (a, b) {
        (6, b) if b <= 4 => Status::A,
        (a, 6) if a <= 4 => Status::B,
        (7, 5) => Status::A,
        (5, 7) => Status::B,
        (6, 6) => Status::Tie,
        _ => Status::Open,
    };
    let ends = race(t, 7, status, unit);
    let mut out = Split {
        a: ends.a,
        b: ends.b,
    };
    if ends.tie.mass() > 0.0 {
        out.add(&st(t, pair, k)?.after(&ends.tie));
    }
    Ok(out)
}

/// Best-of-(2Q+1) sets; A serves first in every set.
pub fn match_play<T: Tally>(t: &T, pair: ServePair, k0: u32, k1: u32, q: u32) -> Result<Split<T>> {
    let s0 = set(t, pair, k0)?;
    let s1 = if k1 == k0 { s0.clone() } else { set(t, pair, k1)? };
    let unit = |a: u32, b: u32| {
        if a == q && b == q {
            s1.clone()
        } else {
            s0.clone()
        }
    };
    let status = |a: u32, b: u32| {
        if a == q + 1 {
            Status::A
        } else if b == q + 1 {
            Status::B
        } else {
            Status::Open
        }
    };
    let ends = race(t, q + 1, status, unit);
    Ok(Split {
        a: ends.a,
        b: ends.b,
    })
}

/// First to L+1 points, one server.
pub fn bofk<T: Tally>(t: &T, p: ServeProb, l: u32) -> Split<T> {
    let unit = |_, _| Split {
        a: t.unit(p.p(), 1),
        b: t.unit(p.q(), 1),
    };
    let status = |a: u32, b: u32| {
        if a == l + 1 {
            Status::A
        } else if b == l + 1 {
            Status::B
        } else {
            Status::Open
        }
    };
    let ends = race(t, l + 1, status, unit);
    Split {
        a: ends.a,
        b: ends.b,
    }
}

/// Best-of-(2L+1) games with the given tie-break at L-L.
pub fn bog<T: Tally>(t: &T, pair: ServePair, l: u32, tiebreak: TieBreak) -> Result<Split<T>> {
    let (ga, gb) = service_games(t, pair);
    let unit = |a: u32, b: u32| {
        if (a + b).is_multiple_of(2) {
            ga.clone()
        } else {
            gb.clone()
        }
    };
    let status = |a: u32, b: u32| {
        if a == l + 1 {
            Status::A
        } else if b == l + 1 {
            Status::B
        } else if a == l && b == l {
            Status::Tie
        } else {
            Status::Open
        }
    };
    let ends = race(t, l + 1, status, unit);
    let mut out = Split {
        a: ends.a,
        b: ends.b,
    };
    if ends.tie.mass() == 0.0 {
        return Ok(out);
    }
    let tail = match tiebreak {
        TieBreak::Sg => {
            // coin-flip server
            let mut s = Split {
                a: ga.a.scaled(0.5),
                b: ga.b.scaled(0.5),
            };
            s.add(&Split {
                a: gb.a.scaled(0.5),
                b: gb.b.scaled(0.5),
            });
            s
        }
        TieBreak::Sttg => {
            // game 2L+1 is A's; a pair of games ends it unless split 1-1
            let mut cont = ga.a.then(&gb.b);
            cont.add(&ga.b.then(&gb.a));
            if cont.mass() >= 1.0 {
                return Err(non_terminating("the games tie-break"));
            }
            let lead = cont.repeat();
            Split {
                a: lead.then(&ga.a.then(&gb.a)),
                b: lead.then(&ga.b.then(&gb.b)),
            }
        }
        TieBreak::Sttp => stt(t, pair)?,
    };
    out.add(&tail.after(&ends.tie));
    Ok(out)
}

/// Dispatches on the system description.
pub fn joint<T: Tally>(t: &T, system: &SystemSpec, params: Params) -> Result<Split<T>> {
    match *system {
        SystemSpec::Gt => Ok(gt(t, params.one()?)),
        SystemSpec::Game => Ok(game(t, params.one()?)),
        SystemSpec::Bofk { l } => {
            if l == 0 {
                return Err(Error::invalid("l", "must be at least 1"));
            }
            Ok(bofk(t, params.one()?, l))
        }
        SystemSpec::Stt => stt(t, params.two()?),
        SystemSpec::St { k, .. } => st(t, params.two()?, k),
        SystemSpec::Set { k, .. } => set(t, params.two()?, k),
        SystemSpec::Match(m) => match_play(t, params.two()?, m.k0, m.k1, m.q),
        SystemSpec::Bog(b) => {
            if b.l == 0 {
                return Err(Error::invalid("l", "must be at least 1"));
            }
            bog(t, params.two()?, b.l, b.tiebreak)
        }
    }
}

/// Exact win probability and point-count moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub win_prob: f64,
    pub mean: f64,
    pub variance: f64,
}

pub fn summary(system: &SystemSpec, params: Params) -> Result<Summary> {
    let s = joint(&Triple::default(), system, params)?;
    let mut all = s.a;
    all.add(&s.b);
    let mean = all.m1 / all.m0;
    Ok(Summary {
        win_prob: s.a.m0 / all.m0,
        mean,
        variance: (all.m2 / all.m0 - mean * mean).max(0.0),
    })
}

/// PMF of the number of points, kept up to `n_max`; whatever the forward
/// pass never delivered below `n_max` is reported as truncation mass.
pub fn length_distribution(
    system: &SystemSpec,
    params: Params,
    n_max: usize,
) -> Result<PointCountDistribution> {
    let s = joint(&Pmf::zeros(n_max), system, params)?;
    let exact = summary(system, params)?;
    let mut all = s.a;
    all.add(&s.b);
    let support: Vec<(u64, f64)> = all
        .masses
        .iter()
        .enumerate()
        .filter(|&(_, &m)| m > 0.0)
        .map(|(n, &m)| (n as u64, m))
        .collect();
    let kept: f64 = support.iter().map(|&(_, m)| m).sum();
    Ok(PointCountDistribution {
        support,
        truncation_mass: (1.0 - kept).max(0.0),
        mean: exact.mean,
        variance: exact.variance,
    })
}
