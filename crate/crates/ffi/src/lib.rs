//! C interface to `tennisprob`.
//!
//! Models are opaque handles created by a `tp_*_new` constructor and
//! released with `tp_model_free`. Every fallible call returns a
//! `TpStatus`; on failure `tp_last_error_message` describes the problem
//! for the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tennisprob::bestof::{BestOfGamesSpec, TieBreak, TieCount};
use tennisprob::efficiency::{system_efficiency, BetaPrior, Prior, QuadratureConfig};
use tennisprob::matchplay::MatchSpec;
use tennisprob::set::TieRule;
use tennisprob::sim::{simulate, SimConfig};
use tennisprob::{exact, Error, Params, ServePair, ServeProb, SystemSpec};

/// Result of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    InvalidParameter = 2,
    /// A tie-breaker reachable with positive probability never ends.
    NonTerminating = 3,
    Numerical = 4,
    /// The library panicked; treat the handle as unusable.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TpTieBreak {
    Sg = 0,
    Sttg = 1,
    Sttp = 2,
}

/// Opaque model: a scoring system with its serve probabilities.
pub struct TpModel {
    system: SystemSpec,
    params: Params,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TpSimSummary {
    pub replications: u64,
    pub capped_replications: u64,
    pub win_rate_a: f64,
    pub win_rate_a_se: f64,
    pub mean_points: f64,
    pub mean_points_se: f64,
    pub std_points: f64,
    pub std_points_se: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct TpEfficiency {
    pub value: f64,
    pub error_estimate: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> TpStatus {
    match e {
        Error::InvalidParameter { .. } => TpStatus::InvalidParameter,
        Error::NonTerminating(_) => TpStatus::NonTerminating,
        Error::Numerical { .. } => TpStatus::Numerical,
    }
}

/// Runs `f`, converting errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), TpStatus>) -> TpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            TpStatus::Ok
        }
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("internal panic");
            TpStatus::Panic
        }
    }
}

fn lib<T>(r: tennisprob::Result<T>) -> Result<T, TpStatus> {
    r.map_err(|e| {
        set_error(&e.to_string());
        status_of(&e)
    })
}

fn null(what: &str) -> TpStatus {
    set_error(&format!("null pointer passed for `{what}`"));
    TpStatus::NullPointer
}

fn write_out<T>(out: *mut T, name: &str, value: T) -> Result<(), TpStatus> {
    if out.is_null() {
        return Err(null(name));
    }
    // SAFETY: non-null and, per the API contract, valid for writes.
    unsafe { out.write(value) };
    Ok(())
}

fn model<'a>(m: *const TpModel) -> Result<&'a TpModel, TpStatus> {
    // SAFETY: handles come from `tp_*_new` and stay valid until freed.
    unsafe { m.as_ref() }.ok_or_else(|| null("model"))
}

fn model_mut<'a>(m: *mut TpModel) -> Result<&'a mut TpModel, TpStatus> {
    // SAFETY: as for `model`; callers must not alias the handle across threads.
    unsafe { m.as_mut() }.ok_or_else(|| null("model"))
}

fn create(out: *mut *mut TpModel, build: impl FnOnce() -> tennisprob::Result<TpModel>) -> TpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        // SAFETY: checked non-null above.
        unsafe { *out = ptr::null_mut() };
        let m = lib(build())?;
        lib(m.system.validate())?;
        write_out(out, "out", Box::into_raw(Box::new(m)))
    })
}

fn one(system: SystemSpec, p: f64) -> tennisprob::Result<TpModel> {
    Ok(TpModel {
        system,
        params: Params::One(ServeProb::named(p, "p")?),
    })
}

fn two(system: SystemSpec, pa: f64, pb: f64) -> tennisprob::Result<TpModel> {
    Ok(TpModel {
        system,
        params: Params::Two(ServePair::new(pa, pb)?),
    })
}

/// Game tie-breaker (deuce) for a server winning each point with `p`.
#[no_mangle]
pub extern "C" fn tp_gt_new(p: f64, out: *mut *mut TpModel) -> TpStatus {
    create(out, || one(SystemSpec::Gt, p))
}

#[no_mangle]
pub extern "C" fn tp_game_new(p: f64, out: *mut *mut TpModel) -> TpStatus {
    create(out, || one(SystemSpec::Game, p))
}

/// First to `l + 1` points with a single server.
#[no_mangle]
pub extern "C" fn tp_bofk_new(p: f64, l: u32, out: *mut *mut TpModel) -> TpStatus {
    create(out, || one(SystemSpec::Bofk { l }, p))
}

#[no_mangle]
pub extern "C" fn tp_stt_new(pa: f64, pb: f64, out: *mut *mut TpModel) -> TpStatus {
    create(out, || two(SystemSpec::Stt, pa, pb))
}

#[no_mangle]
pub extern "C" fn tp_st_new(pa: f64, pb: f64, k: u32, out: *mut *mut TpModel) -> TpStatus {
    create(out, || {
        two(
            SystemSpec::St {
                k,
                rule: TieRule::Exact,
            },
            pa,
            pb,
        )
    })
}

#[no_mangle]
pub extern "C" fn tp_set_new(pa: f64, pb: f64, k: u32, out: *mut *mut TpModel) -> TpStatus {
    create(out, || {
        two(
            SystemSpec::Set {
                k,
                rule: TieRule::Exact,
            },
            pa,
            pb,
        )
    })
}

/// Best of 2q+1 sets; ST target `k0` in the first 2q sets, `k1` in the last.
#[no_mangle]
pub extern "C" fn tp_match_new(
    pa: f64,
    pb: f64,
    k0: u32,
    k1: u32,
    q: u32,
    out: *mut *mut TpModel,
) -> TpStatus {
    create(out, || {
        two(SystemSpec::Match(MatchSpec::new(k0, k1, q)?), pa, pb)
    })
}

/// Best of 2l+1 games with tie-break `tiebreak` (a `TpTieBreak` value) at
/// l games all.
#[no_mangle]
pub extern "C" fn tp_bog_new(
    pa: f64,
    pb: f64,
    l: u32,
    tiebreak: u32,
    out: *mut *mut TpModel,
) -> TpStatus {
    create(out, || {
        let tb = match tiebreak {
            x if x == TpTieBreak::Sg as u32 => TieBreak::Sg,
            x if x == TpTieBreak::Sttg as u32 => TieBreak::Sttg,
            x if x == TpTieBreak::Sttp as u32 => TieBreak::Sttp,
            x => {
                return Err(Error::InvalidParameter {
                    name: "tiebreak",
                    reason: format!("unknown tie-break code {x}"),
                })
            }
        };
        two(SystemSpec::Bog(BestOfGamesSpec::new(l, tb)?), pa, pb)
    })
}

/// Selects how A's STT chance is taken when B serves first in it:
/// 0 = exact (default), 1 = swapped odds. Ignored by systems without an ST.
#[no_mangle]
pub extern "C" fn tp_model_set_tie_rule(model: *mut TpModel, swapped: bool) -> TpStatus {
    guard(|| {
        let m = model_mut(model)?;
        let rule = if swapped {
            TieRule::SwappedOdds
        } else {
            TieRule::Exact
        };
        m.system = m.system.with_rule(rule);
        Ok(())
    })
}

/// Counts the STTG tie-break in games (1) instead of points (0).
#[no_mangle]
pub extern "C" fn tp_model_set_tie_count_games(model: *mut TpModel, games: bool) -> TpStatus {
    guard(|| {
        let m = model_mut(model)?;
        if let SystemSpec::Bog(b) = m.system {
            let count = if games {
                TieCount::Games
            } else {
                TieCount::Compound
            };
            m.system = SystemSpec::Bog(b.with_count(count));
        }
        Ok(())
    })
}

/// Releases a model; null is ignored.
#[no_mangle]
#[allow(clippy::not_unsafe_ptr_arg_deref)]
pub extern "C" fn tp_model_free(model: *mut TpModel) {
    if !model.is_null() {
        // SAFETY: the pointer came from Box::into_raw in `create`.
        drop(unsafe { Box::from_raw(model) });
    }
}

/// Probability that A (the server or first server) wins.
#[no_mangle]
pub extern "C" fn tp_win_prob(model: *const TpModel, out: *mut f64) -> TpStatus {
    guard(|| {
        let m = self::model(model)?;
        let w = lib(m.system.win_prob(m.params))?;
        write_out(out, "out", w)
    })
}

/// Mean and variance of the points played, by conditioning on final scores.
#[no_mangle]
pub extern "C" fn tp_points_moments(
    model: *const TpModel,
    mean: *mut f64,
    variance: *mut f64,
) -> TpStatus {
    guard(|| {
        let m = self::model(model)?;
        let (mu, var) = lib(m.system.moments(m.params))?;
        write_out(mean, "mean", mu)?;
        write_out(variance, "variance", var)
    })
}

/// Mean and variance of the points played from the exact joint law of
/// winner and length.
#[no_mangle]
pub extern "C" fn tp_exact_moments(
    model: *const TpModel,
    mean: *mut f64,
    variance: *mut f64,
) -> TpStatus {
    guard(|| {
        let m = self::model(model)?;
        let s = lib(exact::summary(&m.system, m.params))?;
        write_out(mean, "mean", s.mean)?;
        write_out(variance, "variance", s.variance)
    })
}

/// Monte-Carlo run; `cap` is the per-replication point limit (0 = default).
#[no_mangle]
pub extern "C" fn tp_simulate(
    model: *const TpModel,
    replications: u64,
    seed: u64,
    cap: u64,
    out: *mut TpSimSummary,
) -> TpStatus {
    guard(|| {
        let m = self::model(model)?;
        let mut cfg = SimConfig::new(m.system, m.params, replications, seed);
        if cap != 0 {
            cfg.max_points = cap;
        }
        let r = lib(simulate(&cfg))?;
        write_out(
            out,
            "out",
            TpSimSummary {
                replications: r.replications,
                capped_replications: r.capped_replications,
                win_rate_a: r.win_rate_a,
                win_rate_a_se: r.win_rate_a_se,
                mean_points: r.mean_points,
                mean_points_se: r.mean_points_se,
                std_points: r.std_points,
                std_points_se: r.std_points_se,
            },
        )
    })
}

/// Efficiency of the model's system under Beta(a1, b1) on p (one-server
/// systems) or Beta(a1, b1) x Beta(a2, b2) on (pA, pB). The model's serve
/// probabilities are not used.
#[no_mangle]
pub extern "C" fn tp_efficiency(
    model: *const TpModel,
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
    out: *mut TpEfficiency,
) -> TpStatus {
    guard(|| {
        let m = self::model(model)?;
        let first = lib(BetaPrior::new(a1, b1))?;
        let prior = if m.system.two_player() {
            Prior::Two(first, lib(BetaPrior::new(a2, b2))?)
        } else {
            Prior::One(first)
        };
        let r = lib(system_efficiency(&m.system, prior, QuadratureConfig::default()))?;
        write_out(
            out,
            "out",
            TpEfficiency {
                value: r.value,
                error_estimate: r.quadrature_error_estimate,
            },
        )
    })
}

/// Message for the last failed call on this thread; empty after a success.
/// The pointer stays valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn tp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
