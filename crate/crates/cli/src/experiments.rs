//! The four experiments and the individual verify checks.

use birkhoff_core::fourier::{
    choose_cutoff, envelope_ratios, osc_coeffs, reconstruct, CoeffRule, Model, ModelContext,
};
use birkhoff_core::lattice::{reduce, sample_geodesic_pushforward, sample_haar};
use birkhoff_core::limit_dist::{box_sum_detail, sample_coupled, LimitTermParams, MAX_LAWS};
use birkhoff_core::observable::sample_norms;
use birkhoff_core::rng::Streams;
use birkhoff_core::rotation::in_exclusion;
use birkhoff_core::stats::{ks, ks_critical_95, l2_gap, measure_estimate, Ecdf, GapModel, McEstimate};
use birkhoff_core::{Error, Params};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::pinned;
use crate::CliError;

pub const FINITE_TAG: &str = "finite-law";
pub const LIMIT_TAG: &str = "limit-law";

/// `S/N^a` at `samples` uniform `(alpha, x)`, in draw order.
pub fn finite_samples(a: f64, n: u64, samples: u64, seed: u64) -> Result<Vec<f64>, CliError> {
    let p = Params::new(a, n, 0.5)?;
    Ok(sample_norms(&p, samples, &Streams::new(seed, FINITE_TAG))?)
}

/// `D_eps` for every `eps` on the same draws; `out[i][j]` is draw `j` at
/// `eps[i]`.
pub fn limit_samples(a: f64, eps: &[f64], samples: u64, seed: u64, rule: CoeffRule) -> Result<Vec<Vec<f64>>, CliError> {
    let streams = Streams::new(seed, LIMIT_TAG);
    let tps = eps.iter().map(|&e| LimitTermParams::new(a, e, rule)).collect::<Result<Vec<_>, _>>()?;
    let mut out = Vec::with_capacity(eps.len());
    for chunk in tps.chunks(MAX_LAWS) {
        out.extend(sample_coupled(chunk, samples, &streams)?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareCell {
    pub n: u64,
    pub eps: f64,
    pub ks: f64,
    pub n_finite: u64,
    pub n_limit: u64,
    /// Two-sample KS critical value at 95%.
    pub ks_crit95: f64,
}

pub fn compare_cell(n: u64, eps: f64, finite: &Ecdf, limit: &Ecdf) -> CompareCell {
    CompareCell {
        n,
        eps,
        ks: ks(finite, limit),
        n_finite: finite.len() as u64,
        n_limit: limit.len() as u64,
        ks_crit95: ks_critical_95(finite.len(), limit.len()),
    }
}

/// Whether KS does not grow along increasing `N`, allowing each step the
/// larger of the two critical values.
pub fn nonincreasing(cells: &[CompareCell]) -> Vec<bool> {
    let mut v = vec![true];
    for w in cells.windows(2) {
        v.push(w[1].ks <= w[0].ks + w[0].ks_crit95.max(w[1].ks_crit95));
    }
    v
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub a: f64,
    pub n: Option<u64>,
    pub eps: Option<f64>,
    pub value: f64,
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub samples: u64,
    pub pass: bool,
}

impl Check {
    fn bounded(name: &'static str, a: f64, value: f64, lo: Option<f64>, hi: Option<f64>, samples: u64) -> Self {
        let pass = lo.is_none_or(|l| value >= l) && hi.is_none_or(|h| value <= h);
        Self { name, a, n: None, eps: None, value, lo, hi, ci_low: None, ci_high: None, samples, pass }
    }

    fn at(mut self, n: Option<u64>, eps: Option<f64>) -> Self {
        self.n = n;
        self.eps = eps;
        self
    }

    fn with_ci(mut self, m: &McEstimate) -> Self {
        self.ci_low = Some(m.ci_low);
        self.ci_high = Some(m.ci_high);
        self
    }
}

/// Largest `|S_capped - (partial + tail)|` over `points` uniform
/// `(alpha, x)`, with `K` from the remainder bound.
pub fn reconstruction_check(p: &Params, points: u64, seed: u64) -> Result<Check, CliError> {
    let k = choose_cutoff(p, pinned::RECONSTRUCTION_CUTOFF_TOL)
        .ok_or_else(|| CliError::Check(format!("no reconstruction cutoff for {p:?}")))?;
    let ctx = ModelContext::with_k_max(p, k);
    let s = Streams::new(seed, "verify/reconstruction");
    let residuals = (0..points)
        .into_par_iter()
        .map(|i| {
            let mut rng = s.stream(i);
            let (alpha, x): (f64, f64) = (rng.gen(), rng.gen());
            Ok(reconstruct(alpha, x, &ctx, k)?.residual())
        })
        .collect::<Result<Vec<f64>, Error>>()?;
    let worst = residuals.into_iter().fold(0.0, f64::max);
    Ok(Check::bounded("reconstruction", p.a(), worst, None, Some(pinned::RECONSTRUCTION_TOL), points)
        .at(Some(p.n()), Some(p.eps())))
}

/// Sup of the four envelope ratios over the pinned grid, per exponent.
pub fn envelope_checks() -> Result<Vec<Check>, CliError> {
    pinned::ENVELOPE_C
        .iter()
        .map(|&(a, c)| {
            let mut sup = 0.0f64;
            for n in pinned::ENVELOPE_N {
                for eps in pinned::ENVELOPE_EPS {
                    let p = Params::new(a, n, eps)?;
                    let worst = (1..=pinned::ENVELOPE_K_MAX)
                        .into_par_iter()
                        .map(|k| envelope_ratios(k, &p, &osc_coeffs(k, &p)).into_iter().fold(0.0, f64::max))
                        .reduce(|| 0.0, f64::max);
                    sup = sup.max(worst);
                }
            }
            let grid = pinned::ENVELOPE_N.len() * pinned::ENVELOPE_EPS.len();
            Ok(Check::bounded("envelope", a, sup, None, Some(c), pinned::ENVELOPE_K_MAX * grid as u64))
        })
        .collect()
}

/// `||Delta - bar||^2` and `||Delta - tilde||^2` on all of the torus.
pub fn l2_checks(p: &Params, samples: u64, seed: u64) -> Result<[(Check, McEstimate); 2], CliError> {
    let s = Streams::new(seed, "verify/l2");
    let hi = (p.a() == pinned::L2_A).then(|| pinned::L2_C * p.eps());
    let one = |model, name| -> Result<(Check, McEstimate), CliError> {
        let g = l2_gap(GapModel::Direct, model, p, samples, false, &s)?.gap;
        let c = Check::bounded(name, p.a(), g.estimate, None, hi, samples).at(Some(p.n()), Some(p.eps())).with_ci(&g);
        Ok((c, g))
    };
    Ok([one(GapModel::Bar, "l2-bar")?, one(GapModel::Tilde, "l2-tilde")?])
}

/// Ratio `est1 / est0` of gap estimates at `eps0` and `eps1`, which should
/// follow `eps1 / eps0` up to a factor 3 either way.
pub fn halving_check(name: &'static str, p: &Params, eps0: f64, est0: f64, eps1: f64, est1: f64) -> Check {
    let pred = eps1 / eps0;
    Check::bounded(name, p.a(), est1 / est0, Some(pred / 3.0), Some(pred * 3.0), 0).at(Some(p.n()), Some(eps1))
}

/// `lambda(E)` against `(2/a) eps`, passing when the interval reaches
/// below the bound.
pub fn exclusion_check(p: &Params, samples: u64, seed: u64) -> Check {
    let m = measure_estimate(|alpha, _| in_exclusion(alpha, p), samples, &Streams::new(seed, "verify/exclusion"));
    let bound = pinned::exclusion_c(p.a()) * p.eps();
    let mut c = Check::bounded("exclusion-mass", p.a(), m.estimate, None, Some(bound), samples)
        .at(Some(p.n()), Some(p.eps()))
        .with_ci(&m);
    c.pass = m.ci_low <= bound;
    c
}

/// `|e_1|` under the Haar sampler and under the pushed-forward rotation
/// lattices at `N`.
pub fn shortest_lengths(n: Option<u64>, samples: u64, seed: u64) -> Result<Vec<f64>, CliError> {
    let tag = if n.is_some() { "verify/pushforward" } else { "verify/haar" };
    let s = Streams::new(seed, tag);
    Ok((0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = s.stream(i);
            let l = match n {
                Some(n) => sample_geodesic_pushforward(&mut rng, n),
                None => sample_haar(&mut rng),
            };
            let f = reduce(&l)?;
            Ok(f.e1[0].hypot(f.e1[1]))
        })
        .collect::<Result<_, Error>>()?)
}

pub fn sampler_check(a: f64, n: u64, samples: u64, seed: u64) -> Result<Check, CliError> {
    let haar = Ecdf::new(shortest_lengths(None, samples, seed)?)?;
    let push = Ecdf::new(shortest_lengths(Some(n), samples, seed)?)?;
    let bound = pinned::SAMPLER_KS.max(ks_critical_95(haar.len(), push.len()));
    Ok(Check::bounded("sampler-ks", a, ks(&haar, &push), None, Some(bound), samples).at(Some(n), None))
}

/// Largest `|box - diamond over U|` over `points` uniform `(alpha, x)`
/// with `alpha` outside the exclusion set.
pub fn box_diamond_check(p: &Params, points: u64, seed: u64, rule: CoeffRule) -> Result<Check, CliError> {
    let ctx = ModelContext::with_k_max(p, 0).with_rule(rule);
    let s = Streams::new(seed, "verify/box");
    let residuals = (0..points)
        .into_par_iter()
        .map(|i| {
            let mut rng = s.stream(i);
            let (alpha, x): (f64, f64) = (rng.gen(), rng.gen());
            if in_exclusion(alpha, p) {
                return Ok(None);
            }
            let b = box_sum_detail(alpha, x, p, rule)?;
            let d = ctx.model_sum(alpha, x, Model::Diamond, Some(&b.indices))?;
            Ok(Some((b.value - d).abs()))
        })
        .collect::<Result<Vec<Option<f64>>, Error>>()?;
    let used = residuals.iter().flatten().count() as u64;
    let worst = residuals.into_iter().flatten().fold(0.0, f64::max);
    Ok(Check::bounded("box-diamond", p.a(), worst, None, Some(pinned::BOX_DIAMOND_TOL), used)
        .at(Some(p.n()), Some(p.eps())))
}

/// Mean of `D_eps` against zero, passing within three standard errors.
pub fn gamma_mean_check(a: f64, eps: f64, values: &[f64], seed: u64) -> Result<Check, CliError> {
    let m = McEstimate::from_values(values, seed)?;
    let three_se = 3.0 * m.standard_error();
    Ok(Check::bounded("gamma-mean", a, m.estimate, Some(-three_se), Some(three_se), values.len() as u64)
        .at(None, Some(eps))
        .with_ci(&m))
}
