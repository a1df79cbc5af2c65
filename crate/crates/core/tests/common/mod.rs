//! Point-by-point reference model shared by the integration tests.
//!
//! Every system is written as a flat state machine over single points and
//! solved by pushing probability mass forward one point at a time. Nothing
//! here reuses the library's game/set/match composition.

#![allow(dead_code)]

use std::collections::HashMap;
use std::hash::Hash;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Who {
    A,
    B,
}

pub enum Step<S> {
    Go(S),
    Won(Who),
}

pub trait Rules {
    type S: Copy + Eq + Hash;
    fn start(&self) -> Self::S;
    fn server(&self, s: &Self::S) -> Who;
    fn play(&self, s: Self::S, w: Who) -> Step<Self::S>;
}

/// Outcome of the forward pass.
#[derive(Debug, Clone)]
pub struct Solved {
    pub win_a: f64,
    pub pmf: Vec<f64>,
    pub unresolved: f64,
}

impl Solved {
    pub fn mean(&self) -> f64 {
        let m: f64 = self.pmf.iter().sum();
        self.pmf.iter().enumerate().map(|(n, x)| n as f64 * x).sum::<f64>() / m
    }

    pub fn variance(&self) -> f64 {
        let m: f64 = self.pmf.iter().sum();
        let mu = self.mean();
        self.pmf
            .iter()
            .enumerate()
            .map(|(n, x)| (n as f64 - mu).powi(2) * x)
            .sum::<f64>()
            / m
    }

    pub fn mix(&self, other: &Solved, w: f64) -> Solved {
        let len = self.pmf.len().max(other.pmf.len());
        let at = |v: &Vec<f64>, i: usize| v.get(i).copied().unwrap_or(0.0);
        Solved {
            win_a: w * self.win_a + (1.0 - w) * other.win_a,
            pmf: (0..len)
                .map(|i| w * at(&self.pmf, i) + (1.0 - w) * at(&other.pmf, i))
                .collect(),
            unresolved: w * self.unresolved + (1.0 - w) * other.unresolved,
        }
    }
}

/// Pushes mass forward until less than `eps` is still in play or
/// `max_points` points have been played.
pub fn solve<R: Rules>(r: &R, pa: f64, pb: f64, eps: f64, max_points: usize) -> Solved {
    let mut live: HashMap<R::S, f64> = HashMap::new();
    live.insert(r.start(), 1.0);
    let mut pmf = vec![0.0];
    let mut win_a = 0.0;
    for _ in 0..max_points {
        let mut next: HashMap<R::S, f64> = HashMap::new();
        let mut done = 0.0;
        for (s, m) in live {
            let (p, srv_wins) = match r.server(&s) {
                Who::A => (pa, Who::A),
                Who::B => (pb, Who::B),
            };
            let other = if srv_wins == Who::A { Who::B } else { Who::A };
            for (w, pr) in [(srv_wins, p), (other, 1.0 - p)] {
                if pr == 0.0 {
                    continue;
                }
                match r.play(s, w) {
                    Step::Go(t) => *next.entry(t).or_insert(0.0) += m * pr,
                    Step::Won(who) => {
                        done += m * pr;
                        if who == Who::A {
                            win_a += m * pr;
                        }
                    }
                }
            }
        }
        pmf.push(done);
        live = next;
        if live.values().sum::<f64>() < eps {
            break;
        }
    }
    Solved {
        win_a,
        pmf,
        unresolved: live.values().sum(),
    }
}

fn race(a: u32, b: u32, to: u32) -> Option<Who> {
    if a >= to && a >= b + 2 {
        Some(Who::A)
    } else if b >= to && b >= a + 2 {
        Some(Who::B)
    } else {
        None
    }
}

/// Folds long deuce runs back by an even number of points each, which keeps
/// the state space finite without moving the ABBA phase.
fn fold(a: u32, b: u32, to: u32) -> (u32, u32) {
    let lo = a.min(b);
    if lo + 1 > to {
        let m = (lo + 1 - to) & !1;
        (a - m, b - m)
    } else {
        (a, b)
    }
}

fn bump(a: u32, b: u32, w: Who) -> (u32, u32) {
    match w {
        Who::A => (a + 1, b),
        Who::B => (a, b + 1),
    }
}

/// ABBA order over 0-based point indices.
pub fn abba_first(n: u32) -> bool {
    n.div_ceil(2).is_multiple_of(2)
}

/// One service game; `from` lets the deuce sub-game start at 3-3.
pub struct Game {
    pub from: u32,
}

impl Rules for Game {
    type S = (u32, u32);
    fn start(&self) -> Self::S {
        (self.from, self.from)
    }
    fn server(&self, _: &Self::S) -> Who {
        Who::A
    }
    fn play(&self, (a, b): Self::S, w: Who) -> Step<Self::S> {
        let (a, b) = bump(a, b, w);
        race(a, b, 4).map_or(Step::Go(fold(a, b, 4)), Step::Won)
    }
}

/// Points race to `to` with a two-point margin, starting from
/// (`from`, `from`), in ABBA order or, with `abab`, strict alternation.
pub struct TieBreaker {
    pub to: u32,
    pub from: u32,
    pub abab: bool,
}

impl TieBreaker {
    pub fn new(to: u32) -> Self {
        TieBreaker { to, from: 0, abab: false }
    }
}

impl Rules for TieBreaker {
    type S = (u32, u32);
    fn start(&self) -> Self::S {
        (self.from, self.from)
    }
    fn server(&self, &(a, b): &Self::S) -> Who {
        let first = if self.abab { (a + b) % 2 == 0 } else { abba_first(a + b) };
        if first { Who::A } else { Who::B }
    }
    fn play(&self, (a, b): Self::S, w: Who) -> Step<Self::S> {
        let (a, b) = bump(a, b, w);
        race(a, b, self.to).map_or(Step::Go(fold(a, b, self.to)), Step::Won)
    }
}

/// Full tennis match: A serves first in every set and opens every
/// tie-breaker; best of 2q+1 sets; the last set's tie-breaker goes to k1.
#[derive(Clone, Copy)]
pub struct Tennis {
    pub k0: u32,
    pub k1: u32,
    pub q: u32,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TennisState {
    sets: (u32, u32),
    games: (u32, u32),
    points: (u32, u32),
}

impl Tennis {
    /// A single set.
    pub fn set(k: u32) -> Self {
        Tennis { k0: k, k1: k, q: 0 }
    }

    fn tie_break(&self, s: &TennisState) -> bool {
        s.games == (6, 6)
    }

    fn target(&self, s: &TennisState) -> u32 {
        if s.sets.0 + s.sets.1 == 2 * self.q { self.k1 } else { self.k0 }
    }
}

impl Rules for Tennis {
    type S = TennisState;
    fn start(&self) -> TennisState {
        TennisState {
            sets: (0, 0),
            games: (0, 0),
            points: (0, 0),
        }
    }
    fn server(&self, s: &TennisState) -> Who {
        let first = if self.tie_break(s) {
            abba_first(s.points.0 + s.points.1)
        } else {
            (s.games.0 + s.games.1).is_multiple_of(2)
        };
        if first { Who::A } else { Who::B }
    }
    fn play(&self, mut s: TennisState, w: Who) -> Step<TennisState> {
        let (pa, pb) = bump(s.points.0, s.points.1, w);
        let to = if self.tie_break(&s) { self.target(&s) } else { 4 };
        let Some(gw) = race(pa, pb, to) else {
            s.points = fold(pa, pb, to);
            return Step::Go(s);
        };
        s.points = (0, 0);
        let (ga, gb) = bump(s.games.0, s.games.1, gw);
        let set_won = (ga == 7 || (ga == 6 && gb <= 4)) && ga > gb
            || (gb == 7 || (gb == 6 && ga <= 4)) && gb > ga;
        if !set_won {
            s.games = (ga, gb);
            return Step::Go(s);
        }
        s.games = (0, 0);
        s.sets = bump(s.sets.0, s.sets.1, gw);
        if s.sets.0 == self.q + 1 || s.sets.1 == self.q + 1 {
            Step::Won(gw)
        } else {
            Step::Go(s)
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
pub enum Tie {
    /// Sudden game served by the given player.
    Sudden(Who),
    Games,
    Points,
}

/// First to l+1 games, alternating serve from A, tie at l-l.
pub struct GamesRace {
    pub l: u32,
    pub tie: Tie,
}

impl Rules for GamesRace {
    type S = ((u32, u32), (u32, u32));
    fn start(&self) -> Self::S {
        ((0, 0), (0, 0))
    }
    fn server(&self, &((ga, gb), (pa, pb)): &Self::S) -> Who {
        let tied = ga == self.l && gb == self.l;
        let first = match self.tie {
            Tie::Points if tied => abba_first(pa + pb),
            Tie::Sudden(who) if tied => who == Who::A,
            _ => (ga + gb) % 2 == 0,
        };
        if first { Who::A } else { Who::B }
    }
    fn play(&self, ((ga, gb), (pa, pb)): Self::S, w: Who) -> Step<Self::S> {
        let (pa, pb) = bump(pa, pb, w);
        if ga == self.l && gb == self.l && self.tie == Tie::Points {
            return match race(pa, pb, 2) {
                Some(x) => Step::Won(x),
                None => Step::Go(((ga, gb), fold(pa, pb, 2))),
            };
        }
        let Some(gw) = race(pa, pb, 4) else {
            return Step::Go(((ga, gb), fold(pa, pb, 4)));
        };
        let (ga, gb) = bump(ga, gb, gw);
        let past_tie = ga + gb > 2 * self.l;
        let over = match self.tie {
            Tie::Games if past_tie => race(ga, gb, self.l + 1),
            Tie::Sudden(_) if past_tie => Some(gw),
            _ if ga == self.l + 1 && gb < self.l => Some(Who::A),
            _ if gb == self.l + 1 && ga < self.l => Some(Who::B),
            _ => None,
        };
        match over {
            Some(x) => Step::Won(x),
            None => Step::Go((fold(ga, gb, self.l + 1), (0, 0))),
        }
    }
}

/// First to l+1 points, single server.
pub struct PointsRace {
    pub l: u32,
}

impl Rules for PointsRace {
    type S = (u32, u32);
    fn start(&self) -> Self::S {
        (0, 0)
    }
    fn server(&self, _: &Self::S) -> Who {
        Who::A
    }
    fn play(&self, (a, b): Self::S, w: Who) -> Step<Self::S> {
        let (a, b) = bump(a, b, w);
        if a > self.l {
            Step::Won(Who::A)
        } else if b > self.l {
            Step::Won(Who::B)
        } else {
            Step::Go((a, b))
        }
    }
}

pub fn games_race(l: u32, tie: Tie, pa: f64, pb: f64, eps: f64, cap: usize) -> Solved {
    match tie {
        Tie::Sudden(_) => {
            let a = solve(&GamesRace { l, tie: Tie::Sudden(Who::A) }, pa, pb, eps, cap);
            let b = solve(&GamesRace { l, tie: Tie::Sudden(Who::B) }, pa, pb, eps, cap);
            a.mix(&b, 0.5)
        }
        _ => solve(&GamesRace { l, tie }, pa, pb, eps, cap),
    }
}
