//! One handle over every scoring system, so callers (CLI, quadrature,
//! simulator, FFI) can dispatch without matching on each module.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bestof::{
    bofk_points_distribution, bofk_win_prob, bog_breakdown, bog_match_win_prob, tie_branch,
    BestOfGamesSpec,
};
use crate::dist::{Breakdown, BreakdownRow};
use crate::error::{Error, Result};
use crate::game::{game_breakdown, game_moments, game_win_prob, gt_moments, gt_win_prob};
use crate::matchplay::{match_breakdown, MatchSpec};
use crate::prob::{ServePair, ServeProb};
use crate::set::{set_breakdown_with, stt_moments, stt_win_prob, StParts, TieRule};

/// Which scoring system is analysed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum SystemSpec {
    Gt,
    Game,
    Stt,
    St {
        k: u32,
        #[serde(default)]
        rule: TieRule,
    },
    Set {
        k: u32,
        #[serde(default)]
        rule: TieRule,
    },
    Match(MatchSpec),
    Bofk {
        l: u32,
    },
    Bog(BestOfGamesSpec),
}

/// Parameters: one serve probability or an (A, B) pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Params {
    One(ServeProb),
    Two(ServePair),
}

impl Params {
    pub fn one(self) -> Result<ServeProb> {
        match self {
            Params::One(p) => Ok(p),
            Params::Two(_) => Err(Error::invalid(
                "p",
                "this system takes a single serve probability",
            )),
        }
    }

    pub fn two(self) -> Result<ServePair> {
        match self {
            Params::Two(pair) => Ok(pair),
            Params::One(_) => Err(Error::invalid("pa", "this system takes a serve pair (pa, pb)")),
        }
    }
}

impl SystemSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SystemSpec::Gt => "gt",
            SystemSpec::Game => "game",
            SystemSpec::Stt => "stt",
            SystemSpec::St { .. } => "st",
            SystemSpec::Set { .. } => "set",
            SystemSpec::Match(_) => "match",
            SystemSpec::Bofk { .. } => "bofk",
            SystemSpec::Bog(_) => "bog",
        }
    }

    /// Symbol used to tag the win probability in output.
    pub fn symbol(&self) -> &'static str {
        match self {
            SystemSpec::Gt => "GT",
            SystemSpec::Game => "G",
            SystemSpec::Stt => "STT",
            SystemSpec::St { .. } => "ST",
            SystemSpec::Set { .. } => "S",
            SystemSpec::Match(_) => "M",
            SystemSpec::Bofk { .. } => "BofK",
            SystemSpec::Bog(_) => "BofG",
        }
    }

    pub fn two_player(&self) -> bool {
        !matches!(
            self,
            SystemSpec::Gt | SystemSpec::Game | SystemSpec::Bofk { .. }
        )
    }

    /// Checks the structural parameters.
    pub fn validate(&self) -> Result<()> {
        match *self {
            SystemSpec::St { k, .. } | SystemSpec::Set { k, .. } if k < 2 => {
                Err(Error::invalid("k", "must be at least 2"))
            }
            SystemSpec::Match(m) => MatchSpec::new(m.k0, m.k1, m.q).map(|_| ()),
            SystemSpec::Bofk { l: 0 } => Err(Error::invalid("l", "must be at least 1")),
            SystemSpec::Bog(b) if b.l == 0 => Err(Error::invalid("l", "must be at least 1")),
            _ => Ok(()),
        }
    }

    /// Returns the same system with its tie rule replaced, where it has one.
    pub fn with_rule(self, rule: TieRule) -> Self {
        match self {
            SystemSpec::St { k, .. } => SystemSpec::St { k, rule },
            SystemSpec::Set { k, .. } => SystemSpec::Set { k, rule },
            SystemSpec::Match(m) => SystemSpec::Match(m.with_rule(rule)),
            s => s,
        }
    }

    /// Probability that A (the server, or first server) wins.
    pub fn win_prob(&self, params: Params) -> Result<f64> {
        self.validate()?;
        match *self {
            SystemSpec::Gt => Ok(gt_win_prob(params.one()?)),
            SystemSpec::Game => Ok(game_win_prob(params.one()?)),
            SystemSpec::Bofk { l } => bofk_win_prob(params.one()?, l),
            SystemSpec::Stt => stt_win_prob(params.two()?),
            SystemSpec::St { k, rule } => Ok(StParts::new(params.two()?, k, rule)?.win_prob()),
            SystemSpec::Set { k, rule } => Ok(set_breakdown_with(params.two()?, k, rule)?.win_prob),
            SystemSpec::Match(m) => Ok(match_breakdown(params.two()?, m)?.win_prob),
            SystemSpec::Bog(b) => bog_match_win_prob(params.two()?, b),
        }
    }

    /// Mean and variance of the points played, from the closed forms and
    /// conditional-moment tables.
    pub fn moments(&self, params: Params) -> Result<(f64, f64)> {
        self.validate()?;
        match *self {
            SystemSpec::Gt => Ok(gt_moments(params.one()?)),
            SystemSpec::Game => Ok(game_moments(params.one()?)),
            SystemSpec::Bofk { l } => {
                let d = bofk_points_distribution(params.one()?, l)?;
                Ok((d.mean, d.variance))
            }
            SystemSpec::Stt => stt_moments(params.two()?),
            SystemSpec::St { k, rule } => Ok(StParts::new(params.two()?, k, rule)?.moments()),
            _ => {
                let b = self.breakdown(params)?;
                Ok((b.mean, b.variance))
            }
        }
    }

    /// Per-final-score table.
    pub fn breakdown(&self, params: Params) -> Result<Breakdown> {
        self.validate()?;
        match *self {
            SystemSpec::Gt => {
                let p = params.one()?;
                let w = gt_win_prob(p);
                let (m, v) = gt_moments(p);
                Ok(Breakdown::from_rows(vec![row("GT", w, 1.0 - w, m, v)]))
            }
            SystemSpec::Game => Ok(game_breakdown(params.one()?)),
            SystemSpec::Bofk { l } => {
                let p = params.one()?;
                let (pp, q) = (p.p(), p.q());
                let rows = (0..=l)
                    .map(|h| {
                        let c = crate::prob::binomial(l + h, h);
                        let n = f64::from(l + 1 + h);
                        row(
                            &format!("{}-{h}", l + 1),
                            c * pp.powi(l as i32 + 1) * q.powi(h as i32),
                            c * q.powi(l as i32 + 1) * pp.powi(h as i32),
                            n,
                            0.0,
                        )
                    })
                    .collect();
                Ok(Breakdown::from_rows(rows))
            }
            SystemSpec::Stt => {
                let pair = params.two()?;
                let w = stt_win_prob(pair)?;
                let (m, v) = stt_moments(pair)?;
                Ok(Breakdown::from_rows(vec![row("STT", w, 1.0 - w, m, v)]))
            }
            SystemSpec::St { k, rule } => {
                let parts = StParts::new(params.two()?, k, rule)?;
                let mut rows: Vec<BreakdownRow> = (0..=k - 2)
                    .map(|h| {
                        let i = h as usize;
                        row(
                            &format!("{k}-{h}"),
                            parts.a_wins[i],
                            parts.b_wins[i],
                            f64::from(k + h),
                            0.0,
                        )
                    })
                    .collect();
                rows.push(row(
                    "TB",
                    parts.tie * parts.tie_win,
                    parts.tie * (1.0 - parts.tie_win),
                    f64::from(2 * k - 2) + parts.stt_mean,
                    parts.stt_var,
                ));
                Ok(Breakdown::from_rows(rows))
            }
            SystemSpec::Set { k, rule } => set_breakdown_with(params.two()?, k, rule),
            SystemSpec::Match(m) => match_breakdown(params.two()?, m),
            SystemSpec::Bog(b) => bog_breakdown(params.two()?, b),
        }
    }

    /// Games-count STTG tie-branch moments, kept as a diagnostic.
    pub fn tie_branch_games(&self, params: Params) -> Result<Option<(f64, f64)>> {
        match *self {
            SystemSpec::Bog(b) => {
                let t = tie_branch(params.two()?, b.with_count(crate::bestof::TieCount::Games))?;
                Ok(Some((t.mean, t.var)))
            }
            _ => Ok(None),
        }
    }
}

fn row(label: &str, prob_a: f64, prob_b: f64, cond_mean: f64, cond_var: f64) -> BreakdownRow {
    BreakdownRow {
        label: label.to_string(),
        prob_a,
        prob_b,
        cond_mean,
        cond_var,
    }
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemSpec::St { k, .. } => write!(f, "st(k={k})"),
            SystemSpec::Set { k, .. } => write!(f, "set(k={k})"),
            SystemSpec::Match(m) => write!(f, "match(k0={},k1={},q={})", m.k0, m.k1, m.q),
            SystemSpec::Bofk { l } => write!(f, "bofk(l={l})"),
            SystemSpec::Bog(b) => {
                let tb = match b.tiebreak {
                    crate::bestof::TieBreak::Sg => "sg",
                    crate::bestof::TieBreak::Sttg => "sttg",
                    crate::bestof::TieBreak::Sttp => "sttp",
                };
                write!(f, "bog(l={},tiebreak={tb}", b.l)?;
                if b.count == crate::bestof::TieCount::Games {
                    f.write_str(",count=games")?;
                }
                f.write_str(")")
            }
            s => f.write_str(s.name()),
        }
    }
}
