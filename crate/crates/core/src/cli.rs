//! Command-line front end. `run` returns the text for stdout so the
//! commands can be exercised without spawning a process.

use std::collections::BTreeMap;
use std::ffi::OsString;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{Map, Value};

use crate::bestof::{BestOfGamesSpec, TieBreak, TieCount};
use crate::dist::Breakdown;
use crate::efficiency::{system_efficiency, BetaPrior, Prior, QuadratureConfig};
use crate::error::{Error, Result};
use crate::exact;
use crate::matchplay::MatchSpec;
use crate::output::{csv_table, flat_csv, record, to_json, Fields, Precision};
use crate::prob::{ServePair, ServeProb};
use crate::set::TieRule;
use crate::sim::{simulate, SimConfig, DEFAULT_CAP};
use crate::system::{Params, SystemSpec};

#[derive(Debug, Parser)]
#[command(
    name = "tennisprob",
    version,
    about = "Exact probabilities, point counts and efficiencies of tennis scoring systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Win probability and point-count moments.
    Compute {
        /// gt, game, stt, st, set, match, bofk or bog; `name:key=value,...` also accepted
        system: String,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Per-final-score table.
    Breakdown {
        system: String,
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// A quantity over a grid of serve probabilities, as CSV.
    Grid {
        /// system name, optionally suffixed -win, -mean or -std (e.g. match-mean)
        system: String,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 99)]
        res: usize,
        #[arg(long, default_value_t = 0.01)]
        pmin: f64,
        #[arg(long, default_value_t = 0.99)]
        pmax: f64,
        #[arg(long, value_enum)]
        quantity: Option<Quantity>,
        /// second system for diff, log_ratio, mean_ratio and std_ratio
        #[arg(long)]
        versus: Option<String>,
        #[arg(long, default_value_t = 6)]
        precision: usize,
    },
    /// Efficiency against the oracle system under beta priors.
    Efficiency {
        /// one or more systems
        #[arg(required = true)]
        systems: Vec<String>,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        /// a1,b1,a2,b2 for independent Beta(a1,b1) on pA and Beta(a2,b2) on pB
        #[arg(long, value_delimiter = ',', num_args = 4)]
        prior: Option<Vec<f64>>,
        #[arg(long, default_value_t = 16)]
        panels: usize,
        #[arg(long, default_value_t = 20)]
        nodes: usize,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Monte-Carlo replay of the scoring rules.
    Simulate {
        system: String,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 100_000)]
        reps: u64,
        /// drawn from the OS and echoed when absent
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: u64,
        /// include the histogram of match lengths
        #[arg(long)]
        lengths: bool,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct ModelArgs {
    /// serve probability for one-server systems
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub pa: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub pb: Option<f64>,
    /// ST target points (st, set)
    #[arg(long)]
    pub k: Option<u32>,
    #[arg(long)]
    pub k0: Option<u32>,
    #[arg(long)]
    pub k1: Option<u32>,
    /// match is best of 2Q+1 sets
    #[arg(long)]
    pub q: Option<u32>,
    /// best of 2L+1 points (bofk) or games (bog)
    #[arg(long)]
    pub l: Option<u32>,
    #[arg(long, value_enum)]
    pub tiebreak: Option<TieBreakArg>,
    #[arg(long, value_enum, default_value = "compound")]
    pub tie_count: TieCountArg,
    #[arg(long, value_enum, default_value = "exact")]
    pub tie_rule: TieRuleArg,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// significant digits, 1 to 15
    #[arg(long, default_value_t = 6)]
    pub precision: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TieBreakArg {
    Sg,
    Sttg,
    Sttp,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum TieCountArg {
    #[default]
    Compound,
    Games,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum TieRuleArg {
    #[default]
    Exact,
    Swapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Quantity {
    WinProb,
    MeanPoints,
    StdPoints,
    Diff,
    LogRatio,
    MeanRatio,
    StdRatio,
}

/// Failure of a command: a library error or a usage problem found by clap.
#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Usage(clap::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Lib(e) => e.exit_code(),
            CliError::Usage(e) => e.exit_code(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> std::result::Result<String, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(CliError::Usage)?;
    Ok(execute(cli.command)?)
}

/// Entry point for the binary; returns the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match run(args) {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(CliError::Lib(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Settings from `name:key=value,...`, overriding the flags.
struct Settings<'a> {
    name: String,
    over: BTreeMap<String, String>,
    flags: &'a ModelArgs,
}

impl<'a> Settings<'a> {
    fn parse(spec: &str, flags: &'a ModelArgs) -> Result<Self> {
        let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
        let mut over = BTreeMap::new();
        for kv in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = kv.split_once('=').ok_or_else(|| {
                Error::invalid("system", format!("expected key=value in `{spec}`, got `{kv}`"))
            })?;
            over.insert(k.trim().replace('-', "_"), v.trim().to_string());
        }
        Ok(Settings {
            name: name.trim().to_ascii_lowercase(),
            over,
            flags,
        })
    }

    fn count(&self, key: &'static str, flag: Option<u32>) -> Result<Option<u32>> {
        match self.over.get(key) {
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| Error::invalid(key, format!("not a non-negative integer: `{v}`"))),
            None => Ok(flag),
        }
    }

    fn required(&self, key: &'static str, flag: Option<u32>, default: Option<u32>) -> Result<u32> {
        self.count(key, flag)?
            .or(default)
            .ok_or_else(|| Error::invalid(key, format!("--{key} is required for {}", self.name)))
    }

    fn choice<T: ValueEnum>(&self, key: &'static str, flag: Option<T>) -> Result<Option<T>> {
        match self.over.get(key) {
            Some(v) => T::from_str(v, true)
                .map(Some)
                .map_err(|_| Error::invalid(key, format!("unknown value `{v}`"))),
            None => Ok(flag),
        }
    }

    fn system(&self) -> Result<SystemSpec> {
        let f = self.flags;
        let rule = match self.choice("tie_rule", Some(f.tie_rule))?.unwrap_or_default() {
            TieRuleArg::Exact => TieRule::Exact,
            TieRuleArg::Swapped => TieRule::SwappedOdds,
        };
        let s = match self.name.as_str() {
            "gt" => SystemSpec::Gt,
            "game" => SystemSpec::Game,
            "stt" => SystemSpec::Stt,
            "st" => SystemSpec::St {
                k: self.required("k", f.k, Some(7))?,
                rule,
            },
            "set" => SystemSpec::Set {
                k: self.required("k", f.k, Some(7))?,
                rule,
            },
            "match" => {
                let k0 = self.required("k0", f.k0, Some(7))?;
                let k1 = self.required("k1", f.k1, Some(k0))?;
                let q = self.required("q", f.q, Some(2))?;
                SystemSpec::Match(MatchSpec::new(k0, k1, q)?.with_rule(rule))
            }
            "bofk" => SystemSpec::Bofk {
                l: self.required("l", f.l, None)?,
            },
            "bog" => {
                let l = self.required("l", f.l, None)?;
                let tb = match self.choice("tiebreak", f.tiebreak)? {
                    Some(TieBreakArg::Sg) => TieBreak::Sg,
                    Some(TieBreakArg::Sttg) => TieBreak::Sttg,
                    Some(TieBreakArg::Sttp) => TieBreak::Sttp,
                    None => {
                        return Err(Error::invalid("tiebreak", "--tiebreak is required for bog"))
                    }
                };
                let count = match self.choice("tie_count", Some(f.tie_count))?.unwrap_or_default() {
                    TieCountArg::Compound => TieCount::Compound,
                    TieCountArg::Games => TieCount::Games,
                };
                SystemSpec::Bog(BestOfGamesSpec::new(l, tb)?.with_count(count))
            }
            other => {
                return Err(Error::invalid(
                    "system",
                    format!(
                        "unknown system `{other}`; expected gt, game, stt, st, set, match, bofk or bog"
                    ),
                ))
            }
        };
        s.validate()?;
        Ok(s)
    }
}

fn parse_system(spec: &str, model: &ModelArgs) -> Result<SystemSpec> {
    Settings::parse(spec, model)?.system()
}

fn params_for(system: &SystemSpec, m: &ModelArgs) -> Result<Params> {
    if system.two_player() {
        let pa = m
            .pa
            .ok_or_else(|| Error::invalid("pa", format!("--pa is required for {}", system.name())))?;
        let pb = m
            .pb
            .ok_or_else(|| Error::invalid("pb", format!("--pb is required for {}", system.name())))?;
        Ok(Params::Two(ServePair::new(pa, pb)?))
    } else {
        let p = m
            .p
            .ok_or_else(|| Error::invalid("p", format!("--p is required for {}", system.name())))?;
        Ok(Params::One(ServeProb::named(p, "p")?))
    }
}

/// Echo of the inputs that define the computation.
fn inputs(system: &SystemSpec, params: Option<Params>) -> Value {
    let mut m = match serde_json::to_value(system) {
        Ok(Value::Object(m)) => m,
        _ => Map::new(),
    };
    m.remove("system");
    match params {
        Some(Params::One(p)) => {
            m.insert("p".into(), Value::from(p.p()));
        }
        Some(Params::Two(pair)) => {
            m.insert("pa".into(), Value::from(pair.a.p()));
            m.insert("pb".into(), Value::from(pair.b.p()));
        }
        None => {}
    }
    Value::Object(m)
}

fn execute(cmd: Command) -> Result<String> {
    match cmd {
        Command::Compute { system, model, out } => {
            let s = parse_system(&system, &model)?;
            let params = params_for(&s, &model)?;
            compute(&s, params, &out)
        }
        Command::Breakdown { system, model, out } => {
            let s = parse_system(&system, &model)?;
            let params = params_for(&s, &model)?;
            breakdown(&s, params, &out)
        }
        Command::Grid {
            system,
            model,
            res,
            pmin,
            pmax,
            quantity,
            versus,
            precision,
        } => grid(&system, &model, res, (pmin, pmax), quantity, versus.as_deref(), precision),
        Command::Efficiency {
            systems,
            model,
            alpha,
            beta,
            prior,
            panels,
            nodes,
            out,
        } => efficiency(&systems, &model, (alpha, beta, prior), panels, nodes, &out),
        Command::Simulate {
            system,
            model,
            reps,
            seed,
            cap,
            lengths,
            out,
        } => {
            let s = parse_system(&system, &model)?;
            let params = params_for(&s, &model)?;
            let seed = seed.unwrap_or_else(rand::random::<u64>);
            let cfg = SimConfig {
                max_points: cap,
                record_lengths: lengths,
                ..SimConfig::new(s, params, reps, seed)
            };
            run_simulation(&cfg, &out)
        }
    }
}

fn compute(s: &SystemSpec, params: Params, out: &OutArgs) -> Result<String> {
    let prec = Precision::new(out.precision)?;
    let sym = s.symbol();
    let win = s.win_prob(params)?;
    let (mean, var) = s.moments(params)?;
    let mut f = Fields::new(prec);
    f.num(format!("theta_{sym}"), win)
        .num(format!("mu_{sym}"), mean)
        .num(format!("sigma2_{sym}"), var)
        .num(format!("sigma_{sym}"), var.sqrt());
    if matches!(
        s,
        SystemSpec::Set { .. } | SystemSpec::Match(_) | SystemSpec::Bog(_)
    ) {
        // conditional tables treat game lengths as independent of game winners
        let e = exact::summary(s, params)?;
        f.num(format!("sigma2_{sym}_exact"), e.variance)
            .num(format!("sigma_{sym}_exact"), e.variance.sqrt());
    }
    if let Some((m, v)) = s.tie_branch_games(params)? {
        if matches!(s, SystemSpec::Bog(b) if b.tiebreak == TieBreak::Sttg) {
            f.num("mu_TB_games", m).num("sigma2_TB_games", v);
        }
    }
    emit(out.format, "compute", s, Some(params), f)
}

fn emit(
    format: Format,
    command: &str,
    s: &SystemSpec,
    params: Option<Params>,
    f: Fields,
) -> Result<String> {
    Ok(match format {
        Format::Json => to_json(&record(
            command,
            Some(&s.to_string()),
            inputs(s, params),
            f.into_value(),
        )),
        Format::Csv => {
            let mut m = Map::new();
            m.insert("system".into(), Value::from(s.to_string()));
            m.extend(f.into_map());
            flat_csv(&m)
        }
    })
}

fn breakdown(s: &SystemSpec, params: Params, out: &OutArgs) -> Result<String> {
    let prec = Precision::new(out.precision)?;
    let b: Breakdown = s.breakdown(params)?;
    match out.format {
        Format::Json => {
            let rows: Vec<Value> = b
                .rows
                .iter()
                .map(|r| {
                    let mut f = Fields::new(prec);
                    f.text("score", r.label.clone())
                        .num("prob_a", r.prob_a)
                        .num("prob_b", r.prob_b)
                        .num("prob", r.prob())
                        .num("cond_mean", r.cond_mean)
                        .num("cond_var", r.cond_var);
                    f.into_value()
                })
                .collect();
            let mut overall = Fields::new(prec);
            overall
                .num("prob_a", b.win_prob)
                .num("prob_b", b.lose_prob)
                .num("prob", b.win_prob + b.lose_prob)
                .num("mean", b.mean)
                .num("variance", b.variance)
                .num("std", b.std_dev());
            let mut res = Fields::new(prec);
            res.value("rows", Value::Array(rows))
                .value("overall", overall.into_value());
            Ok(to_json(&record(
                "breakdown",
                Some(&s.to_string()),
                inputs(s, Some(params)),
                res.into_value(),
            )))
        }
        Format::Csv => {
            let header: Vec<String> = ["score", "prob_a", "prob_b", "prob", "cond_mean", "cond_var"]
                .iter()
                .map(|h| h.to_string())
                .collect();
            let mut rows: Vec<Vec<String>> = b
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.label.clone(),
                        prec.cell(r.prob_a),
                        prec.cell(r.prob_b),
                        prec.cell(r.prob()),
                        prec.cell(r.cond_mean),
                        prec.cell(r.cond_var),
                    ]
                })
                .collect();
            rows.push(vec![
                "overall".into(),
                prec.cell(b.win_prob),
                prec.cell(b.lose_prob),
                prec.cell(b.win_prob + b.lose_prob),
                prec.cell(b.mean),
                prec.cell(b.variance),
            ]);
            Ok(csv_table(&header, &rows))
        }
    }
}

fn grid(
    system: &str,
    model: &ModelArgs,
    res: usize,
    (pmin, pmax): (f64, f64),
    quantity: Option<Quantity>,
    versus: Option<&str>,
    precision: usize,
) -> Result<String> {
    let prec = Precision::new(precision)?;
    if res < 2 {
        return Err(Error::invalid("res", "must be at least 2"));
    }
    if !(0.0..=1.0).contains(&pmin) || !(0.0..=1.0).contains(&pmax) || pmin >= pmax {
        return Err(Error::invalid("pmin", "need 0 <= pmin < pmax <= 1"));
    }
    let (name, suffix) = match system.split_once(':') {
        Some((head, _)) => (head, &system[head.len()..]),
        None => (system, ""),
    };
    let (base, implied) = match name.rsplit_once('-') {
        Some((b, "win")) => (b, Some(Quantity::WinProb)),
        Some((b, "mean")) => (b, Some(Quantity::MeanPoints)),
        Some((b, "std")) => (b, Some(Quantity::StdPoints)),
        _ => (name, None),
    };
    let quantity = quantity.or(implied).unwrap_or(Quantity::WinProb);
    let s1 = parse_system(&format!("{base}{suffix}"), model)?;
    let s2 = match (quantity, versus) {
        (Quantity::Diff | Quantity::LogRatio | Quantity::MeanRatio | Quantity::StdRatio, Some(v)) => {
            Some(parse_system(v, model)?)
        }
        (Quantity::Diff | Quantity::LogRatio | Quantity::MeanRatio | Quantity::StdRatio, None) => {
            return Err(Error::invalid("versus", "this quantity compares two systems"))
        }
        _ => None,
    };
    if let Some(s2) = &s2 {
        if s2.two_player() != s1.two_player() {
            return Err(Error::invalid(
                "versus",
                "both systems must take the same parameters",
            ));
        }
    }
    let axis: Vec<f64> = (0..res)
        .map(|i| pmin + (pmax - pmin) * i as f64 / (res - 1) as f64)
        .collect();
    let value = |params: Params| -> Result<f64> {
        let win = |s: &SystemSpec| s.win_prob(params);
        let moment = |s: &SystemSpec, std: bool| -> Result<f64> {
            let (m, v) = s.moments(params)?;
            Ok(if std { v.sqrt() } else { m })
        };
        Ok(match (quantity, &s2) {
            (Quantity::WinProb, _) => win(&s1)?,
            (Quantity::MeanPoints, _) => moment(&s1, false)?,
            (Quantity::StdPoints, _) => moment(&s1, true)?,
            (Quantity::Diff, Some(t)) => win(&s1)? - win(t)?,
            (Quantity::LogRatio, Some(t)) => (win(&s1)? / win(t)?).ln(),
            (Quantity::MeanRatio, Some(t)) => moment(&s1, false)? / moment(t, false)?,
            (Quantity::StdRatio, Some(t)) => moment(&s1, true)? / moment(t, true)?,
            _ => unreachable!("checked above"),
        })
    };
    // non-terminating cells print as nan rather than failing the grid
    let cell = |params: Params| -> Result<String> {
        match value(params) {
            Ok(x) => Ok(prec.cell(x)),
            Err(Error::NonTerminating(_)) => Ok("nan".into()),
            Err(e) => Err(e),
        }
    };
    if s1.two_player() {
        let rows: Vec<Vec<String>> = axis
            .par_iter()
            .map(|&pa| {
                let mut row = vec![prec.cell(pa)];
                for &pb in &axis {
                    row.push(cell(Params::Two(ServePair::new(pa, pb)?))?);
                }
                Ok(row)
            })
            .collect::<Result<_>>()?;
        let mut header = vec!["pa\\pb".to_string()];
        header.extend(axis.iter().map(|&x| prec.cell(x)));
        Ok(csv_table(&header, &rows))
    } else {
        let rows: Vec<Vec<String>> = axis
            .par_iter()
            .map(|&p| Ok(vec![prec.cell(p), cell(Params::One(ServeProb::new(p)?))?]))
            .collect::<Result<_>>()?;
        Ok(csv_table(&["p".to_string(), quantity_name(quantity).into()], &rows))
    }
}

fn quantity_name(q: Quantity) -> &'static str {
    match q {
        Quantity::WinProb => "win_prob",
        Quantity::MeanPoints => "mean_points",
        Quantity::StdPoints => "std_points",
        Quantity::Diff => "diff",
        Quantity::LogRatio => "log_ratio",
        Quantity::MeanRatio => "mean_ratio",
        Quantity::StdRatio => "std_ratio",
    }
}

fn efficiency(
    systems: &[String],
    model: &ModelArgs,
    (alpha, beta, prior): (Option<f64>, Option<f64>, Option<Vec<f64>>),
    panels: usize,
    nodes: usize,
    out: &OutArgs,
) -> Result<String> {
    let prec = Precision::new(out.precision)?;
    if panels == 0 {
        return Err(Error::invalid("panels", "must be positive"));
    }
    let cfg = QuadratureConfig {
        panels,
        nodes,
        ..QuadratureConfig::default()
    };
    let one = match (alpha, beta) {
        (Some(a), Some(b)) => Some(BetaPrior::new(a, b)?),
        (None, None) => None,
        (None, Some(_)) => return Err(Error::invalid("alpha", "--alpha is required with --beta")),
        (Some(_), None) => return Err(Error::invalid("beta", "--beta is required with --alpha")),
    };
    let two = match prior.as_deref() {
        Some(&[a1, b1, a2, b2]) => Some((BetaPrior::new(a1, b1)?, BetaPrior::new(a2, b2)?)),
        Some(_) => return Err(Error::invalid("prior", "expected a1,b1,a2,b2")),
        None => None,
    };
    let mut reports = Vec::with_capacity(systems.len());
    for spec in systems {
        let s = parse_system(spec, model)?;
        let prior = if s.two_player() {
            match (two, one) {
                (Some((a, b)), _) => Prior::Two(a, b),
                (None, Some(b)) => Prior::Two(b, b),
                (None, None) => {
                    return Err(Error::invalid("prior", format!("--prior is required for {}", s.name())))
                }
            }
        } else {
            Prior::One(one.ok_or_else(|| {
                Error::invalid("alpha", format!("--alpha and --beta are required for {}", s.name()))
            })?)
        };
        reports.push(system_efficiency(&s, prior, cfg)?);
    }
    let prior_text = |p: &Prior| match p {
        Prior::One(b) => format!("Beta({},{})", b.alpha, b.beta),
        Prior::Two(a, b) => format!("Beta({},{})xBeta({},{})", a.alpha, a.beta, b.alpha, b.beta),
    };
    match out.format {
        Format::Json => {
            let items: Vec<Value> = reports
                .iter()
                .map(|r| {
                    let mut f = Fields::new(prec);
                    f.text(
                        "system",
                        r.system.map_or_else(String::new, |s| s.to_string()),
                    )
                    .text("prior", prior_text(&r.prior))
                    .num("efficiency", r.value)
                    .num("quadrature_error_estimate", r.quadrature_error_estimate);
                    f.into_value()
                })
                .collect();
            let mut inp = Fields::new(prec);
            inp.int("panels", panels as u64).int("nodes", nodes as u64);
            Ok(to_json(&record(
                "efficiency",
                None,
                inp.into_value(),
                Value::Array(items),
            )))
        }
        Format::Csv => {
            let header: Vec<String> = ["system", "prior", "efficiency", "quadrature_error_estimate"]
                .iter()
                .map(|h| h.to_string())
                .collect();
            let rows: Vec<Vec<String>> = reports
                .iter()
                .map(|r| {
                    vec![
                        r.system.map_or_else(String::new, |s| s.to_string()),
                        prior_text(&r.prior),
                        prec.cell(r.value),
                        prec.cell(r.quadrature_error_estimate),
                    ]
                })
                .collect();
            Ok(csv_table(&header, &rows))
        }
    }
}

fn run_simulation(cfg: &SimConfig, out: &OutArgs) -> Result<String> {
    let prec = Precision::new(out.precision)?;
    let r = simulate(cfg)?;
    let mut f = Fields::new(prec);
    f.int("replications", r.replications)
        .int("seed", r.seed)
        .int("capped_replications", r.capped_replications)
        .num("win_rate_A", r.win_rate_a)
        .num("win_rate_A_se", r.win_rate_a_se)
        .num("mean_points", r.mean_points)
        .num("mean_points_se", r.mean_points_se)
        .num("std_points", r.std_points)
        .num("std_points_se", r.std_points_se);
    if out.format == Format::Json {
        let rows: Vec<Value> = r
            .rows
            .iter()
            .map(|row| {
                let mut g = Fields::new(prec);
                g.text("score", row.label.clone())
                    .int("a_wins", row.a_wins)
                    .int("b_wins", row.b_wins)
                    .num("cond_mean", row.points.mean)
                    .num("cond_var", row.points.variance);
                g.into_value()
            })
            .collect();
        f.value("rows", Value::Array(rows));
        if let Some(h) = &r.lengths {
            let m: Map<String, Value> = h.iter().map(|(k, v)| (k.to_string(), Value::from(*v))).collect();
            f.value("lengths", Value::Object(m));
        }
    }
    let mut inp = match inputs(&cfg.system, Some(cfg.params)) {
        Value::Object(m) => m,
        _ => Map::new(),
    };
    inp.insert("reps".into(), Value::from(cfg.replications));
    inp.insert("seed".into(), Value::from(cfg.seed));
    inp.insert("cap".into(), Value::from(cfg.max_points));
    Ok(match out.format {
        Format::Json => to_json(&record(
            "simulate",
            Some(&cfg.system.to_string()),
            Value::Object(inp),
            f.into_value(),
        )),
        Format::Csv => {
            let mut m = Map::new();
            m.insert("system".into(), Value::from(cfg.system.to_string()));
            m.extend(f.into_map());
            flat_csv(&m)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(args: &[&str]) -> String {
        run(std::iter::once("tennisprob").chain(args.iter().copied())).unwrap()
    }

    fn code(args: &[&str]) -> i32 {
        run(std::iter::once("tennisprob").chain(args.iter().copied()))
            .unwrap_err()
            .exit_code()
    }

    #[test]
    fn compact_spec_equals_flags() {
        let a = ok(&["compute", "match:k0=7,k1=10,q=2", "--pa", "0.6", "--pb", "0.55"]);
        let b = ok(&["compute", "match", "--k0", "7", "--k1", "10", "--q", "2", "--pa", "0.6", "--pb", "0.55"]);
        assert_eq!(a, b);
        assert!(a.contains("\"theta_M\": 0.794822"));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(code(&["compute", "stt", "--pa", "1", "--pb", "1"]), 3);
        assert_eq!(code(&["compute", "game", "--p", "1.5"]), 2);
        assert_eq!(code(&["compute", "game"]), 2);
        assert_eq!(code(&["compute", "nope", "--p", "0.5"]), 2);
        assert_eq!(code(&["frobnicate"]), 2);
        assert_eq!(code(&["compute", "game", "--p", "0.5", "--precision", "16"]), 2);
    }

    #[test]
    fn grid_shape_and_suffix() {
        let g = ok(&["grid", "st", "--k", "7", "--res", "5"]);
        let lines: Vec<&str> = g.lines().collect();
        assert_eq!(lines.len(), 6);
        assert!(lines.iter().all(|l| l.split(',').count() == 6));
        let m = ok(&["grid", "match-mean", "--k0", "7", "--k1", "10", "--q", "2", "--res", "3", "--pmin", "0.5", "--pmax", "0.7"]);
        let first: Vec<&str> = m.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(first[1], "271.808");
    }
}
