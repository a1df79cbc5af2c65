//! Efficiency of a scoring system against the oracle that always picks the
//! better player, averaged over beta priors by composite Gauss-Legendre
//! quadrature.
//!
//! One parameter: E = int sign(p - 1/2) (2 theta(p) - 1) dPi(p).
//! Two parameters: E = int sign(pA - pB) (2 theta(pA, pB) - 1) dPi.
//! The integrand has a kink on p = 1/2 (resp. pA = pB), so each side is
//! integrated separately.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prob::{ServePair, ServeProb};
use crate::system::{Params, SystemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaPrior {
    pub alpha: f64,
    pub beta: f64,
}

impl BetaPrior {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("alpha", format!("must be positive, got {alpha}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid("beta", format!("must be positive, got {beta}")));
        }
        Ok(BetaPrior { alpha, beta })
    }

    fn singular(&self) -> bool {
        self.alpha < 1.0 || self.beta < 1.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Prior {
    One(BetaPrior),
    Two(BetaPrior, BetaPrior),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Panels per half interval (1-D) or per unit side (2-D).
    pub panels: usize,
    pub nodes: usize,
    pub tolerance_1d: f64,
    pub tolerance_2d: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            panels: 16,
            nodes: 20,
            tolerance_1d: 1e-5,
            tolerance_2d: 5e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyReport {
    pub system: Option<SystemSpec>,
    pub prior: Prior,
    pub value: f64,
    /// |refined - coarse|, the refined rule using twice the panels.
    pub quadrature_error_estimate: f64,
}

/// Maps t in [0,1] to (p, unnormalised prior density in t).
#[derive(Debug, Clone, Copy)]
enum Chart {
    /// p = t
    Plain(BetaPrior),
    /// p = sin^2(pi t / 2); absorbs the endpoint singularities when a
    /// shape parameter is below one.
    Sine(BetaPrior),
}

impl Chart {
    fn for_prior(prior: BetaPrior, sine: bool) -> Self {
        if sine {
            Chart::Sine(prior)
        } else {
            Chart::Plain(prior)
        }
    }

    fn at(self, t: f64) -> (f64, f64) {
        match self {
            Chart::Plain(b) => (t, t.powf(b.alpha - 1.0) * (1.0 - t).powf(b.beta - 1.0)),
            Chart::Sine(b) => {
                let (s, c) = (0.5 * PI * t).sin_cos();
                (
                    s * s,
                    PI * s.powf(2.0 * b.alpha - 1.0) * c.powf(2.0 * b.beta - 1.0),
                )
            }
        }
    }
}

/// Composite rule on [lo, hi]: (node, weight) pairs.
fn composite(gl: &GaussLegendre, lo: f64, hi: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (hi - lo) / panels as f64;
    let mut out = Vec::with_capacity(panels * gl.degree());
    for i in 0..panels {
        let a = lo + i as f64 * h;
        let (mid, half) = (a + 0.5 * h, 0.5 * h);
        out.extend(
            gl.as_node_weight_pairs()
                .iter()
                .map(|&(x, w)| (mid + half * x, half * w)),
        );
    }
    out
}

fn rule(nodes: usize) -> Result<GaussLegendre> {
    let n = NonZeroUsize::new(nodes).ok_or_else(|| Error::invalid("nodes", "must be positive"))?;
    Ok(GaussLegendre::new(n))
}

fn one_param_pass<F>(curve: &F, chart: Chart, gl: &GaussLegendre, panels: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let mut num = 0.0;
    let mut den = 0.0;
    for (lo, hi, sign) in [(0.0, 0.5, -1.0), (0.5, 1.0, 1.0)] {
        let pts = composite(gl, lo, hi, panels);
        let vals: Vec<(f64, f64)> = pts
            .par_iter()
            .map(|&(t, w)| {
                let (p, d) = chart.at(t);
                Ok((w * d * sign * (2.0 * curve(p)? - 1.0), w * d))
            })
            .collect::<Result<_>>()?;
        for (n, d) in vals {
            num += n;
            den += d;
        }
    }
    Ok(num / den)
}

/// One-parameter efficiency of `curve` under a beta prior.
pub fn efficiency_one_param<F>(
    curve: F,
    prior: BetaPrior,
    cfg: QuadratureConfig,
) -> Result<EfficiencyReport>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let gl = rule(cfg.nodes)?;
    let chart = Chart::for_prior(prior, prior.singular());
    let coarse = one_param_pass(&curve, chart, &gl, cfg.panels)?;
    let fine = one_param_pass(&curve, chart, &gl, 2 * cfg.panels)?;
    finish(None, Prior::One(prior), coarse, fine, cfg.tolerance_1d)
}

fn two_param_pass<F>(
    surface: &F,
    charts: (Chart, Chart),
    gl: &GaussLegendre,
    panels: usize,
) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let pts = composite(gl, 0.0, 1.0, panels);
    // triangle tA > tB as (u, u v) with Jacobian u; the other by symmetry
    let per_u: Vec<(f64, f64)> = pts
        .par_iter()
        .map(|&(u, wu)| {
            let mut num = 0.0;
            let mut den = 0.0;
            for &(v, wv) in &pts {
                let w = wu * wv * u;
                let (hi, lo) = (u, u * v);
                for (ta, tb, sign) in [(hi, lo, 1.0), (lo, hi, -1.0)] {
                    let (pa, da) = charts.0.at(ta);
                    let (pb, db) = charts.1.at(tb);
                    let d = w * da * db;
                    num += d * sign * (2.0 * surface(pa, pb)? - 1.0);
                    den += d;
                }
            }
            Ok((num, den))
        })
        .collect::<Result<_>>()?;
    let (num, den) = per_u
        .iter()
        .fold((0.0, 0.0), |(n, d), &(a, b)| (n + a, d + b));
    Ok(num / den)
}

/// Two-parameter efficiency under independent beta priors on pA and pB.
pub fn efficiency_two_param<F>(
    surface: F,
    priors: (BetaPrior, BetaPrior),
    cfg: QuadratureConfig,
) -> Result<EfficiencyReport>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let gl = rule(cfg.nodes)?;
    // one chart for both axes keeps the diagonal pA = pB on tA = tB
    let sine = priors.0.singular() || priors.1.singular();
    let charts = (
        Chart::for_prior(priors.0, sine),
        Chart::for_prior(priors.1, sine),
    );
    let coarse = two_param_pass(&surface, charts, &gl, cfg.panels)?;
    let fine = two_param_pass(&surface, charts, &gl, 2 * cfg.panels)?;
    finish(
        None,
        Prior::Two(priors.0, priors.1),
        coarse,
        fine,
        cfg.tolerance_2d,
    )
}

fn finish(
    system: Option<SystemSpec>,
    prior: Prior,
    coarse: f64,
    fine: f64,
    tol: f64,
) -> Result<EfficiencyReport> {
    let err = (fine - coarse).abs();
    if !fine.is_finite() || err.is_nan() || err > tol {
        return Err(Error::Numerical {
            reason: format!("quadrature error estimate {err:.3e} exceeds {tol:.0e}"),
            estimate: fine,
        });
    }
    Ok(EfficiencyReport {
        system,
        prior,
        value: fine,
        quadrature_error_estimate: err,
    })
}

/// Efficiency of a named system; the prior shape must match the system.
pub fn system_efficiency(
    system: &SystemSpec,
    prior: Prior,
    cfg: QuadratureConfig,
) -> Result<EfficiencyReport> {
    system.validate()?;
    let mut report = match (system.two_player(), prior) {
        (false, Prior::One(b)) => efficiency_one_param(
            |p| system.win_prob(Params::One(ServeProb::new(p)?)),
            b,
            cfg,
        )?,
        (true, Prior::Two(a, b)) => efficiency_two_param(
            |pa, pb| system.win_prob(Params::Two(ServePair::new(pa, pb)?)),
            (a, b),
            cfg,
        )?,
        (false, Prior::Two(..)) => {
            return Err(Error::invalid(
                "prior",
                "a one-parameter system takes --alpha/--beta",
            ))
        }
        (true, Prior::One(_)) => {
            return Err(Error::invalid(
                "prior",
                "a two-parameter system takes --prior a1,b1,a2,b2",
            ))
        }
    };
    report.system = Some(*system);
    Ok(report)
}
