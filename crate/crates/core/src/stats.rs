//! Empirical CDFs, Kolmogorov-Smirnov distances, Monte Carlo estimates with
//! confidence intervals, and L2 gaps between model sums.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::fourier::{CoeffRule, Model, ModelContext};
use crate::numerics::NeumaierSum;
use crate::observable::birkhoff_norm;
use crate::rng::Streams;
use crate::rotation::in_exclusion;
use crate::{Error, Params, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ecdf {
    samples: Vec<f64>,
}

impl Ecdf {
    /// Sorts the sample; NaN is rejected.
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySample);
        }
        if samples.iter().any(|s| s.is_nan()) {
            return Err(Error::InvalidParams("NaN in sample".into()));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// `#{s <= z} / n`.
    pub fn eval(&self, z: f64) -> f64 {
        self.samples.partition_point(|&s| s <= z) as f64 / self.samples.len() as f64
    }

    /// Smallest sample `s` with `eval(s) >= q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.samples.len();
        let i = ((q * n as f64).ceil() as usize).clamp(1, n) - 1;
        self.samples[i]
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().copied().collect::<NeumaierSum>().value() / self.samples.len() as f64
    }
}

/// Two-sample Kolmogorov-Smirnov distance, evaluated after each block of
/// tied values.
pub fn ks(a: &Ecdf, b: &Ecdf) -> f64 {
    let (x, y) = (&a.samples, &b.samples);
    let (na, nb) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() || j < y.len() {
        let z = match (x.get(i), y.get(j)) {
            (Some(&u), Some(&v)) => u.min(v),
            (Some(&u), None) => u,
            (None, Some(&v)) => v,
            (None, None) => unreachable!(),
        };
        while i < x.len() && x[i] <= z {
            i += 1;
        }
        while j < y.len() && y[j] <= z {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// One-sample distance to a continuous CDF.
pub fn ks_against<F: Fn(f64) -> f64>(a: &Ecdf, cdf: F) -> f64 {
    let n = a.samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &s) in a.samples.iter().enumerate() {
        let f = cdf(s);
        d = d.max((f - i as f64 / n).abs()).max(((i + 1) as f64 / n - f).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at level 5%.
pub fn ks_critical_95(n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    1.358 * ((n + m) / (n * m)).sqrt()
}

/// Wilson score interval for `successes` out of `n`.
pub fn wilson(successes: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn from_counts(successes: u64, n: u64, seed: u64) -> Self {
        let (ci_low, ci_high) = wilson(successes, n);
        Self { estimate: successes as f64 / n.max(1) as f64, ci_low, ci_high, n, seed }
    }

    /// Mean with a normal interval from the sample standard deviation.
    pub fn from_values(values: &[f64], seed: u64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        let n = values.len() as f64;
        let mean = values.iter().copied().collect::<NeumaierSum>().value() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).collect::<NeumaierSum>().value() / (n - 1.0).max(1.0);
        let half = Z95 * (var / n).sqrt();
        Ok(Self { estimate: mean, ci_low: mean - half, ci_high: mean + half, n: values.len() as u64, seed })
    }

    /// Standard error recovered from the interval width.
    pub fn standard_error(&self) -> f64 {
        (self.ci_high - self.ci_low) / (2.0 * Z95)
    }
}

/// Fraction of uniform `(alpha, x)` satisfying `pred`, with a Wilson
/// interval.
pub fn measure_estimate<F>(pred: F, n: u64, streams: &Streams) -> McEstimate
where
    F: Fn(f64, f64) -> bool + Sync,
{
    let hits: u64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(i);
            let (alpha, x): (f64, f64) = (rng.gen(), rng.gen());
            pred(alpha, x) as u64
        })
        .sum();
    McEstimate::from_counts(hits, n, streams.seed())
}

/// Quantities compared by `l2_gap`. `Direct` is the capped Birkhoff sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GapModel {
    Direct,
    Bar,
    Tilde,
    Hat,
    Diamond(CoeffRule),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct L2Gap {
    /// Mean of the squared difference over the usable samples.
    pub gap: McEstimate,
    pub usable: u64,
    /// Samples in the exclusion set (when excluded).
    pub excluded: u64,
    /// Samples where a model was not evaluable (singular hit, breakpoint,
    /// vanishing denominator).
    pub failed: u64,
}

struct Evaluator {
    p: Params,
    bar: Option<ModelContext>,
    plain: ModelContext,
    truncated: ModelContext,
}

impl Evaluator {
    fn new(p: &Params, models: [GapModel; 2]) -> Self {
        let bar = models.contains(&GapModel::Bar).then(|| ModelContext::new(p));
        let plain = ModelContext::with_k_max(p, 0);
        let truncated = ModelContext::with_k_max(p, 0).with_rule(CoeffRule::Truncated);
        Self { p: *p, bar, plain, truncated }
    }

    fn eval(&self, m: GapModel, alpha: f64, x: f64) -> Result<f64> {
        match m {
            GapModel::Direct => birkhoff_norm(alpha, x, &self.p, true),
            GapModel::Bar => self.bar.as_ref().expect("tabulated").partial_sum(alpha, x, self.p.last_k()),
            GapModel::Tilde => self.plain.model_sum(alpha, x, Model::Tilde, None),
            GapModel::Hat => self.plain.model_sum(alpha, x, Model::Hat, None),
            GapModel::Diamond(CoeffRule::Constant) => self.plain.model_sum(alpha, x, Model::Diamond, None),
            GapModel::Diamond(CoeffRule::Truncated) => self.truncated.model_sum(alpha, x, Model::Diamond, None),
        }
    }
}

enum Outcome {
    Value(f64),
    Excluded,
    Failed,
}

/// Monte Carlo estimate of `int (A - B)^2` over uniform `(alpha, x)`,
/// skipping the exclusion set when `exclude` is set.
pub fn l2_gap(a: GapModel, b: GapModel, p: &Params, n: u64, exclude: bool, streams: &Streams) -> Result<L2Gap> {
    let ev = Evaluator::new(p, [a, b]);
    let outcomes: Vec<Outcome> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(i);
            let (alpha, x): (f64, f64) = (rng.gen(), rng.gen());
            if exclude && in_exclusion(alpha, p) {
                return Ok(Outcome::Excluded);
            }
            if a == b {
                return Ok(Outcome::Value(0.0));
            }
            match (ev.eval(a, alpha, x), ev.eval(b, alpha, x)) {
                (Ok(u), Ok(v)) => Ok(Outcome::Value((u - v) * (u - v))),
                (Err(e), _) | (_, Err(e)) => match e {
                    Error::SingularHit { .. } | Error::OnBreakpoint { .. } | Error::SmallDenominator { .. } => {
                        Ok(Outcome::Failed)
                    }
                    e => Err(e),
                },
            }
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(outcomes.len());
    let (mut excluded, mut failed) = (0, 0);
    for o in outcomes {
        match o {
            Outcome::Value(v) => values.push(v),
            Outcome::Excluded => excluded += 1,
            Outcome::Failed => failed += 1,
        }
    }
    let usable = values.len();
    if (usable as u64) * 10 < n || usable == 0 {
        return Err(Error::InsufficientSamples { usable, requested: n as usize });
    }
    Ok(L2Gap { gap: McEstimate::from_values(&values, streams.seed())?, usable: usable as u64, excluded, failed })
}
