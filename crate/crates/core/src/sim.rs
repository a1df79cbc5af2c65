//! Seeded Monte-Carlo replay of the scoring rules, point by point.
//!
//! Replication `i` draws from ChaCha8 keyed by the seed on stream `i`, so
//! results do not depend on thread count or scheduling. Replications are
//! grouped in fixed chunks, and chunk accumulators are merged pairwise in
//! index order.

use std::collections::BTreeMap;

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bestof::TieBreak;
use crate::error::{Error, Result};
use crate::prob::{ServePair, ServeProb};
use crate::system::{Params, SystemSpec};

pub const DEFAULT_CAP: u64 = 100_000;
const CHUNK: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub system: SystemSpec,
    pub params: Params,
    pub replications: u64,
    pub seed: u64,
    pub max_points: u64,
    /// Keep a histogram of completed replication lengths.
    #[serde(default)]
    pub record_lengths: bool,
}

impl SimConfig {
    pub fn new(system: SystemSpec, params: Params, replications: u64, seed: u64) -> Self {
        SimConfig {
            system,
            params,
            replications,
            seed,
            max_points: DEFAULT_CAP,
            record_lengths: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::invalid("reps", "must be at least 1"));
        }
        if self.max_points < 100 {
            return Err(Error::invalid("cap", "must be at least 100"));
        }
        self.system.validate()?;
        // shape check only; the value does not matter
        if self.system.two_player() {
            self.params.two()?;
        } else {
            self.params.one()?;
        }
        Ok(())
    }
}

/// Streaming central moments up to order four, mergeable (Pebay's formulas).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    m3: f64,
    m4: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.merge(&Moments {
            n: 1.0,
            mean: x,
            ..Default::default()
        });
    }

    fn merge(&mut self, o: &Moments) {
        if o.n == 0.0 {
            return;
        }
        if self.n == 0.0 {
            *self = *o;
            return;
        }
        let (na, nb) = (self.n, o.n);
        let n = na + nb;
        let d = o.mean - self.mean;
        let d2 = d * d;
        let m2 = self.m2 + o.m2 + d2 * na * nb / n;
        let m3 = self.m3
            + o.m3
            + d * d2 * na * nb * (na - nb) / (n * n)
            + 3.0 * d * (na * o.m2 - nb * self.m2) / n;
        let m4 = self.m4
            + o.m4
            + d2 * d2 * na * nb * (na * na - na * nb + nb * nb) / (n * n * n)
            + 6.0 * d2 * (na * na * o.m2 + nb * nb * self.m2) / (n * n)
            + 4.0 * d * (na * o.m3 - nb * self.m3) / n;
        *self = Moments {
            n,
            mean: self.mean + d * nb / n,
            m2,
            m3,
            m4,
        };
    }

    fn variance(&self) -> f64 {
        if self.n > 1.0 {
            self.m2 / (self.n - 1.0)
        } else {
            0.0
        }
    }

    fn summary(&self) -> StatSummary {
        let n = self.n;
        let var = self.variance();
        let sd = var.sqrt();
        // delta method: Var(s) ~ (mu4 - sigma^4) / (4 n sigma^2)
        let sd_se = if n > 1.0 && var > 0.0 {
            let mu4 = self.m4 / n;
            let pop = self.m2 / n;
            ((mu4 - pop * pop).max(0.0) / (4.0 * n * pop)).sqrt()
        } else {
            0.0
        };
        let var_se = if n > 1.0 {
            let mu4 = self.m4 / n;
            let pop = self.m2 / n;
            ((mu4 - pop * pop).max(0.0) / n).sqrt()
        } else {
            0.0
        };
        StatSummary {
            count: n as u64,
            mean: self.mean,
            mean_se: if n > 0.0 { (var / n).sqrt() } else { 0.0 },
            variance: var,
            variance_se: var_se,
            std: sd,
            std_se: sd_se,
        }
    }
}

/// Sample statistics of the points played over a set of replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub count: u64,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub std: f64,
    pub std_se: f64,
}

/// Statistics for one final-score row, in breakdown-row order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowSummary {
    pub label: String,
    pub a_wins: u64,
    pub b_wins: u64,
    pub points: StatSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimSummary {
    pub replications: u64,
    pub seed: u64,
    pub capped_replications: u64,
    pub win_rate_a: f64,
    pub win_rate_a_se: f64,
    pub mean_points: f64,
    pub mean_points_se: f64,
    pub std_points: f64,
    pub std_points_se: f64,
    pub variance_points: f64,
    pub variance_points_se: f64,
    pub rows: Vec<RowSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lengths: Option<BTreeMap<u64, u64>>,
}

#[derive(Debug, Clone, Default)]
struct Acc {
    capped: u64,
    a_wins: u64,
    all: Moments,
    rows: Vec<(u64, u64, Moments)>,
    lengths: Option<BTreeMap<u64, u64>>,
}

impl Acc {
    fn merge(mut self, o: Acc) -> Acc {
        self.capped += o.capped;
        self.a_wins += o.a_wins;
        self.all.merge(&o.all);
        if self.rows.len() < o.rows.len() {
            self.rows.resize(o.rows.len(), (0, 0, Moments::default()));
        }
        for (mine, theirs) in self.rows.iter_mut().zip(o.rows) {
            mine.0 += theirs.0;
            mine.1 += theirs.1;
            mine.2.merge(&theirs.2);
        }
        if let Some(theirs) = o.lengths {
            let mine = self.lengths.get_or_insert_with(BTreeMap::new);
            for (k, v) in theirs {
                *mine.entry(k).or_insert(0) += v;
            }
        }
        self
    }
}

/// Merges in a fixed binary tree so the result is order-deterministic.
fn pairwise(mut parts: Vec<Acc>) -> Acc {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(a) = it.next() {
            next.push(match it.next() {
                Some(b) => a.merge(b),
                None => a,
            });
        }
        parts = next;
    }
    parts.pop().unwrap_or_default()
}

/// Replication hit the point cap.
#[derive(Debug)]
struct Capped;

type Play<T> = std::result::Result<T, Capped>;

struct Rally {
    rng: ChaCha8Rng,
    points: u64,
    cap: u64,
}

impl Rally {
    /// True when the player serving with probability `p` wins the point.
    fn point(&mut self, p: f64) -> Play<bool> {
        if self.points >= self.cap {
            return Err(Capped);
        }
        self.points += 1;
        Ok(self.rng.random::<f64>() < p)
    }

    fn coin(&mut self) -> bool {
        self.rng.random::<f64>() < 0.5
    }
}

/// Whether the tie-breaker's first server serves point n (1-based) in the
/// order A, B, B, A, A, B, B, ...
pub fn st_first_server_serves(n: u64) -> bool {
    (n / 2).is_multiple_of(2)
}

/// Who won, and which breakdown row the final score falls in.
#[derive(Debug, Clone, Copy)]
struct End {
    a: bool,
    row: usize,
}

/// Points until one side leads by two; the server sequence is given by
/// `serves_a(n)`. Returns whether A won.
fn advantage(r: &mut Rally, pa: f64, pb: f64, serves_a: impl Fn(u64) -> bool) -> Play<bool> {
    let (mut a, mut b) = (0u64, 0u64);
    let mut n = 0;
    loop {
        n += 1;
        if serves_a(n) {
            if r.point(pa)? {
                a += 1
            } else {
                b += 1
            }
        } else if r.point(pb)? {
            b += 1
        } else {
            a += 1
        }
        if a >= b + 2 {
            return Ok(true);
        }
        if b >= a + 2 {
            return Ok(false);
        }
    }
}

/// One game; `a` is the server.
fn game(r: &mut Rally, p: f64) -> Play<End> {
    let (mut a, mut b) = (0u32, 0u32);
    loop {
        if r.point(p)? {
            a += 1
        } else {
            b += 1
        }
        if a >= 4 && a >= b + 2 || b >= 4 && b >= a + 2 {
            let row = if a + b <= 6 { a.min(b) as usize } else { 3 };
            return Ok(End { a: a > b, row });
        }
    }
}

fn gt(r: &mut Rally, p: f64) -> Play<End> {
    let a = advantage(r, p, 1.0 - p, |_| true)?;
    Ok(End { a, row: 0 })
}

fn stt(r: &mut Rally, pair: ServePair) -> Play<End> {
    let a = advantage(r, pair.a.p(), pair.b.p(), st_first_server_serves)?;
    Ok(End { a, row: 0 })
}

/// ST with A serving first.
fn st(r: &mut Rally, pair: ServePair, k: u32) -> Play<End> {
    let (pa, pb) = (pair.a.p(), pair.b.p());
    let (mut a, mut b) = (0u32, 0u32);
    let mut n = 0u64;
    loop {
        n += 1;
        let a_point = if st_first_server_serves(n) {
            r.point(pa)?
        } else {
            !r.point(pb)?
        };
        if a_point {
            a += 1
        } else {
            b += 1
        }
        let (hi, lo) = (a.max(b), a.min(b));
        if hi >= k && hi >= lo + 2 {
            let row = if hi == k { lo as usize } else { k as usize - 1 };
            return Ok(End { a: a > b, row });
        }
    }
}

/// Set with A serving the first game and the ST at six all.
fn set(r: &mut Rally, pair: ServePair, k: u32) -> Play<End> {
    let (mut a, mut b) = (0u32, 0u32);
    loop {
        let g = a + b + 1;
        let a_game = if g % 2 == 1 {
            game(r, pair.a.p())?.a
        } else {
            !game(r, pair.b.p())?.a
        };
        if a_game {
            a += 1
        } else {
            b += 1
        }
        let (hi, lo) = (a.max(b), a.min(b));
        if hi == 6 && lo <= 4 {
            return Ok(End {
                a: a > b,
                row: lo as usize,
            });
        }
        if hi == 7 {
            return Ok(End { a: a > b, row: 5 });
        }
        if a == 6 && b == 6 {
            let t = st(r, pair, k)?;
            return Ok(End { a: t.a, row: 6 });
        }
    }
}

fn match_play(r: &mut Rally, pair: ServePair, k0: u32, k1: u32, q: u32) -> Play<End> {
    let (mut a, mut b) = (0u32, 0u32);
    loop {
        let k = if a == q && b == q { k1 } else { k0 };
        if set(r, pair, k)?.a {
            a += 1
        } else {
            b += 1
        }
        if a == q + 1 || b == q + 1 {
            return Ok(End {
                a: a > b,
                row: a.min(b) as usize,
            });
        }
    }
}

fn bofk(r: &mut Rally, p: f64, l: u32) -> Play<End> {
    let (mut a, mut b) = (0u32, 0u32);
    loop {
        if r.point(p)? {
            a += 1
        } else {
            b += 1
        }
        if a == l + 1 || b == l + 1 {
            return Ok(End {
                a: a > b,
                row: a.min(b) as usize,
            });
        }
    }
}

fn bog(r: &mut Rally, pair: ServePair, l: u32, tiebreak: TieBreak) -> Play<End> {
    let (pa, pb) = (pair.a.p(), pair.b.p());
    let (mut a, mut b) = (0u32, 0u32);
    let mut g = 0u32;
    let mut play_game = |r: &mut Rally| -> Play<bool> {
        g += 1;
        Ok(if g % 2 == 1 {
            game(r, pa)?.a
        } else {
            !game(r, pb)?.a
        })
    };
    loop {
        if play_game(r)? {
            a += 1
        } else {
            b += 1
        }
        if a == l + 1 || b == l + 1 {
            return Ok(End {
                a: a > b,
                row: a.min(b) as usize,
            });
        }
        if a == l && b == l {
            let won = match tiebreak {
                TieBreak::Sg => {
                    if r.coin() {
                        game(r, pa)?.a
                    } else {
                        !game(r, pb)?.a
                    }
                }
                TieBreak::Sttg => {
                    let mut lead = 0i32;
                    while lead.abs() < 2 {
                        lead += if play_game(r)? { 1 } else { -1 };
                    }
                    lead > 0
                }
                TieBreak::Sttp => stt(r, pair)?.a,
            };
            return Ok(End {
                a: won,
                row: l as usize,
            });
        }
    }
}

fn replicate(r: &mut Rally, system: &SystemSpec, params: Params) -> Play<End> {
    // shapes were checked up front
    let one = |p: Params| match p {
        Params::One(p) => p,
        Params::Two(pair) => pair.a,
    };
    let two = |p: Params| match p {
        Params::Two(pair) => pair,
        Params::One(p) => ServePair { a: p, b: p },
    };
    match *system {
        SystemSpec::Gt => gt(r, one(params).p()),
        SystemSpec::Game => game(r, one(params).p()),
        SystemSpec::Bofk { l } => bofk(r, one(params).p(), l),
        SystemSpec::Stt => stt(r, two(params)),
        SystemSpec::St { k, .. } => st(r, two(params), k),
        SystemSpec::Set { k, .. } => set(r, two(params), k),
        SystemSpec::Match(m) => match_play(r, two(params), m.k0, m.k1, m.q),
        SystemSpec::Bog(b) => bog(r, two(params), b.l, b.tiebreak),
    }
}

/// Row labels matching `SystemSpec::breakdown`.
fn row_labels(system: &SystemSpec) -> Vec<String> {
    match *system {
        SystemSpec::Gt => vec!["GT".into()],
        SystemSpec::Stt => vec!["STT".into()],
        SystemSpec::Game => vec!["4-0".into(), "4-1".into(), "4-2".into(), "TB".into()],
        SystemSpec::St { k, .. } => (0..=k - 2)
            .map(|h| format!("{k}-{h}"))
            .chain(["TB".to_string()])
            .collect(),
        SystemSpec::Set { .. } => (0..=4)
            .map(|h| format!("6-{h}"))
            .chain(["7-5".to_string(), "7-6".to_string()])
            .collect(),
        SystemSpec::Match(m) => (0..=m.q).map(|h| format!("{}-{h}", m.q + 1)).collect(),
        SystemSpec::Bofk { l } => (0..=l).map(|h| format!("{}-{h}", l + 1)).collect(),
        SystemSpec::Bog(b) => (0..b.l)
            .map(|h| format!("{}-{h}", b.l + 1))
            .chain(["TB".to_string()])
            .collect(),
    }
}

fn run_chunk(cfg: &SimConfig, lo: u64, hi: u64, n_rows: usize) -> Acc {
    let mut acc = Acc {
        rows: vec![(0, 0, Moments::default()); n_rows],
        lengths: cfg.record_lengths.then(BTreeMap::new),
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for i in lo..hi {
        rng.set_stream(i);
        rng.set_word_pos(0);
        let mut rally = Rally {
            rng,
            points: 0,
            cap: cfg.max_points,
        };
        match replicate(&mut rally, &cfg.system, cfg.params) {
            Ok(end) => {
                let n = rally.points;
                acc.all.push(n as f64);
                let row = &mut acc.rows[end.row];
                if end.a {
                    acc.a_wins += 1;
                    row.0 += 1;
                } else {
                    row.1 += 1;
                }
                row.2.push(n as f64);
                if let Some(h) = acc.lengths.as_mut() {
                    *h.entry(n).or_insert(0) += 1;
                }
            }
            Err(Capped) => acc.capped += 1,
        }
        rng = rally.rng;
    }
    acc
}

/// Runs the simulation; identical configurations give identical summaries.
pub fn simulate(cfg: &SimConfig) -> Result<SimSummary> {
    cfg.validate()?;
    let labels = row_labels(&cfg.system);
    let chunks: Vec<(u64, u64)> = (0..cfg.replications.div_ceil(CHUNK))
        .map(|c| (c * CHUNK, ((c + 1) * CHUNK).min(cfg.replications)))
        .collect();
    let parts: Vec<Acc> = chunks
        .par_iter()
        .map(|&(lo, hi)| run_chunk(cfg, lo, hi, labels.len()))
        .collect();
    let acc = pairwise(parts);
    let done = acc.all.n;
    let w = if done > 0.0 {
        acc.a_wins as f64 / done
    } else {
        f64::NAN
    };
    let mut all = acc.all.summary();
    if done == 0.0 {
        all = StatSummary {
            count: 0,
            mean: f64::NAN,
            mean_se: f64::NAN,
            variance: f64::NAN,
            variance_se: f64::NAN,
            std: f64::NAN,
            std_se: f64::NAN,
        };
    }
    let rows = labels
        .into_iter()
        .zip(acc.rows)
        .map(|(label, (a_wins, b_wins, m))| RowSummary {
            label,
            a_wins,
            b_wins,
            points: m.summary(),
        })
        .collect();
    Ok(SimSummary {
        replications: cfg.replications,
        seed: cfg.seed,
        capped_replications: acc.capped,
        win_rate_a: w,
        win_rate_a_se: if done > 0.0 {
            (w * (1.0 - w) / done).sqrt()
        } else {
            f64::NAN
        },
        mean_points: all.mean,
        mean_points_se: all.mean_se,
        std_points: all.std,
        std_points_se: all.std_se,
        variance_points: all.variance,
        variance_points_se: all.variance_se,
        rows,
        lengths: acc.lengths,
    })
}

/// Convenience for a one-parameter system.
pub fn simulate_one(system: SystemSpec, p: ServeProb, reps: u64, seed: u64) -> Result<SimSummary> {
    simulate(&SimConfig::new(system, Params::One(p), reps, seed))
}
