//! Per-frequency terms `g_k`, their resonant approximations and the model
//! sums built from them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::coeffs::{osc_coeffs, CoeffRule, LimitCoeffs, OscTable, UpperTable};
use std::sync::Arc;
use crate::numerics::{cis_2pi, frac, frac_mul, mod2_mul, pow_pos, signed_frac_mul, sin_pi, NeumaierSum};
use crate::rotation::{resonant_set, Band, ResonantSet};
use crate::{Error, Params, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Dirichlet kernel `sin(pi N k alpha) / sin(pi k alpha)` and the
    /// finite-range coefficients.
    Exact,
    /// Kernel `sin(pi N k alpha) / (pi {k alpha})`, signed to match the
    /// exact kernel, with coefficients chosen by a `CoeffRule`.
    Tilde,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// All `0 < k < N / eps^{1+2a}`.
    Bar,
    /// Resonant `k` of the full band.
    Tilde,
    /// Resonant `k` of the hat band.
    Hat,
    /// Hat band with the tilde variant.
    Diamond,
}

/// Cosine and sine brackets multiplying the phase in `g_k`.
#[inline]
fn brackets(k: u64, b: f64, d: f64, p: &Params, cap_coef: f64) -> (f64, f64) {
    let kf = k as f64;
    let amp = 2.0 / (pow_pos(kf, 1.0 - p.a()) * p.n_pow_a());
    let r = kf * p.delta();
    let s = sin_pi(r);
    let c = sin_pi(r + 0.5);
    let sin2 = 2.0 * s * c;
    let cos2m1 = -2.0 * s * s;
    let w = cap_coef / (2.0 * PI * kf);
    (amp * b + w * sin2, amp * d - w * cos2m1)
}

/// `2 / ((1-a) eps^a)`.
fn cap_coefficient(p: &Params) -> f64 {
    2.0 / ((1.0 - p.a()) * p.eps().powf(p.a()))
}

/// `j k alpha` mod 2, exact while `j k` fits in an `i64`.
#[inline]
fn mul_mod2(j: u64, k: u64, alpha: f64) -> f64 {
    match (j as i64).checked_mul(k as i64) {
        Some(jk) => mod2_mul(jk, alpha),
        None => (j as f64 * mod2_mul(k as i64, alpha)).rem_euclid(2.0),
    }
}

/// `k x + (N-1) k alpha / 2` mod 1.
#[inline]
fn phase(k: u64, alpha: f64, x: f64, n: u64) -> f64 {
    frac(frac_mul(k as i64, frac(x)) + 0.5 * mul_mod2(n - 1, k, alpha))
}

/// Kernel of the requested variant, or the small-denominator error.
#[inline]
fn kernel(k: u64, alpha: f64, n: u64, variant: Variant) -> Result<f64> {
    let (v, kp) = signed_frac_mul(k as i64, alpha);
    let sign = if kp.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let den = match variant {
        Variant::Exact => sign * sin_pi(v),
        Variant::Tilde => sign * PI * v,
    };
    let bad = match variant {
        Variant::Exact => den.abs() < 1e-12,
        Variant::Tilde => v == 0.0,
    };
    if bad {
        return Err(Error::SmallDenominator { k });
    }
    Ok(sin_pi(mul_mod2(n, k, alpha)) / den)
}

#[inline]
fn assemble(k: u64, alpha: f64, x: f64, n: u64, br: (f64, f64), variant: Variant) -> Result<f64> {
    let ker = kernel(k, alpha, n, variant)?;
    let w = cis_2pi(phase(k, alpha, x, n));
    Ok((br.0 * w.re + br.1 * w.im) * ker)
}

/// `g_k` (or its tilde approximation with constant coefficients)
/// evaluated from scratch, with the coefficients computed by direct
/// quadrature.
pub fn term_g(k: u64, alpha: f64, x: f64, p: &Params, variant: Variant) -> Result<f64> {
    let (b, d) = match variant {
        Variant::Exact => {
            let c = osc_coeffs(k, p);
            (c.b, c.d)
        }
        Variant::Tilde => {
            let l = super::coeffs::limit_coeffs(p.a());
            (l.b, l.d)
        }
    };
    let br = brackets(k, b, d, p, cap_coefficient(p));
    assemble(k, alpha, x, p.n(), br, variant)
}

/// Shared state for repeated model evaluations at fixed `(a, N, eps)`:
/// tabulated brackets for `k <= k_max` and the limit coefficients.
#[derive(Debug, Clone)]
pub struct ModelContext {
    p: Params,
    table: OscTable,
    limit: LimitCoeffs,
    cap_coef: f64,
    brackets: Vec<(f64, f64)>,
    rule: CoeffRule,
    upper: Arc<UpperTable>,
}

impl ModelContext {
    /// Tabulates every frequency of the bar model.
    pub fn new(p: &Params) -> Self {
        Self::with_k_max(p, p.last_k())
    }

    pub fn with_k_max(p: &Params, k_max: u64) -> Self {
        let table = OscTable::new(p);
        let limit = table.limit();
        let cap_coef = cap_coefficient(p);
        let brackets = (1..=k_max)
            .map(|k| {
                let (b, d) = table.coeffs(k);
                brackets(k, b, d, p, cap_coef)
            })
            .collect();
        Self {
            p: *p,
            table,
            limit,
            cap_coef,
            brackets,
            rule: CoeffRule::Constant,
            upper: UpperTable::shared(p.a()),
        }
    }

    /// Coefficient rule used by the tilde variant (constant by default).
    pub fn with_rule(mut self, rule: CoeffRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn rule(&self) -> CoeffRule {
        self.rule
    }

    pub fn params(&self) -> &Params {
        &self.p
    }

    pub fn limit(&self) -> LimitCoeffs {
        self.limit
    }

    pub fn k_max(&self) -> u64 {
        self.brackets.len() as u64
    }

    fn exact_brackets(&self, k: u64) -> (f64, f64) {
        match self.brackets.get((k as usize).wrapping_sub(1)) {
            Some(&br) => br,
            None => {
                let (b, d) = self.table.coeffs(k);
                brackets(k, b, d, &self.p, self.cap_coef)
            }
        }
    }

    fn tilde_brackets(&self, k: u64) -> (f64, f64) {
        let (b, d) = match self.rule {
            CoeffRule::Constant => (self.limit.b, self.limit.d),
            CoeffRule::Truncated => self.upper.coeffs(k as f64 * self.p.delta(), CoeffRule::Truncated),
        };
        brackets(k, b, d, &self.p, self.cap_coef)
    }

    pub fn term(&self, k: u64, alpha: f64, x: f64, variant: Variant) -> Result<f64> {
        let br = match variant {
            Variant::Exact => self.exact_brackets(k),
            Variant::Tilde => self.tilde_brackets(k),
        };
        assemble(k, alpha, x, self.p.n(), br, variant)
    }

    /// Sum of the terms over an explicit index list, in the given order.
    pub fn sum_over(&self, indices: &[u64], alpha: f64, x: f64, variant: Variant) -> Result<f64> {
        let mut s = NeumaierSum::new();
        for &k in indices {
            s.add(self.term(k, alpha, x, variant)?);
        }
        Ok(s.value())
    }

    /// `sum_{k=1}^{last} g_k` with the exact variant. Phases and kernels
    /// advance by complex rotation, reseeded exactly every 64 steps;
    /// near-resonant kernels are always recomputed exactly.
    pub fn partial_sum(&self, alpha: f64, x: f64, last: u64) -> Result<f64> {
        const BLOCK: u64 = 64;
        let n = self.p.n();
        let x = frac(x);
        let step_w = cis_2pi(phase(1, alpha, x, n));
        let step_n = pi_rot(mul_mod2(n, 1, alpha));
        let step_1 = pi_rot(mod2_mul(1, alpha));
        let mut s = NeumaierSum::new();
        let mut k0 = 1;
        while k0 <= last {
            let k1 = (k0 + BLOCK - 1).min(last);
            let mut w = cis_2pi(phase(k0, alpha, x, n));
            let mut zn = pi_rot(mul_mod2(n, k0, alpha));
            let mut z1 = pi_rot(mod2_mul(k0 as i64, alpha));
            for k in k0..=k1 {
                let br = self.exact_brackets(k);
                let ker = if z1.im.abs() < 1e-3 {
                    kernel(k, alpha, n, Variant::Exact)?
                } else {
                    zn.im / z1.im
                };
                s.add((br.0 * w.re + br.1 * w.im) * ker);
                w *= step_w;
                zn *= step_n;
                z1 *= step_1;
            }
            k0 = k1 + 1;
        }
        Ok(s.value())
    }

    /// The model sum; `index_override` replaces the model's index set.
    pub fn model_sum(&self, alpha: f64, x: f64, model: Model, index_override: Option<&ResonantSet>) -> Result<f64> {
        let variant = match model {
            Model::Diamond => Variant::Tilde,
            _ => Variant::Exact,
        };
        if let Some(u) = index_override {
            return self.sum_over(&u.indices, alpha, x, variant);
        }
        match model {
            Model::Bar => self.partial_sum(alpha, x, self.p.last_k()),
            Model::Tilde => self.sum_over(&resonant_set(alpha, &self.p, Band::Full).indices, alpha, x, variant),
            Model::Hat | Model::Diamond => {
                self.sum_over(&resonant_set(alpha, &self.p, Band::Hat).indices, alpha, x, variant)
            }
        }
    }
}

/// `e^{i pi t}`.
#[inline]
fn pi_rot(t: f64) -> Complex64 {
    cis_2pi(0.5 * t)
}

/// Convenience wrapper building a fresh context.
pub fn model_sum(alpha: f64, x: f64, p: &Params, model: Model, index_override: Option<&ResonantSet>) -> Result<f64> {
    let ctx = match model {
        Model::Bar => ModelContext::new(p),
        _ => ModelContext::with_k_max(p, 0),
    };
    ctx.model_sum(alpha, x, model, index_override)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rotation::ResonantSet;

    const ALPHA: f64 = std::f64::consts::SQRT_2 - 1.0;

    #[test]
    fn rational_alpha_is_rejected() {
        let p = Params::new(0.5, 100, 0.1).unwrap();
        assert_eq!(term_g(3, 0.0, 0.2, &p, Variant::Exact), Err(Error::SmallDenominator { k: 3 }));
        assert_eq!(term_g(3, 0.0, 0.2, &p, Variant::Tilde), Err(Error::SmallDenominator { k: 3 }));
    }

    #[test]
    fn single_step_kernel_is_one() {
        let p = Params::new(0.5, 1, 0.1).unwrap();
        for k in 1..20 {
            assert!((kernel(k, ALPHA, 1, Variant::Exact).unwrap() - 1.0).abs() < 1e-12);
        }
        // With N = 1 the term is 2 Re(phi_hat(k) e^{2 pi i k x}).
        let x = 0.37;
        let k = 3;
        let c = osc_coeffs(k, &p);
        let a = p.a();
        // Cap on [0, delta) plus the constant -c0 on [delta, 1).
        let step = (1.0 - cis_2pi(-(k as f64) * p.delta())) / Complex64::new(0.0, 2.0 * PI * k as f64);
        let hat = Complex64::new(c.b, -c.d) / (k as f64).powf(1.0 - a) + (p.cap() + p.c0()) * step;
        let expected = 2.0 * (hat * cis_2pi(k as f64 * x)).re;
        let g = term_g(k, ALPHA, x, &p, Variant::Exact).unwrap();
        assert!((g - expected).abs() < 1e-12, "{g} vs {expected}");
    }

    #[test]
    fn context_terms_match_reference() {
        let p = Params::new(0.5, 1000, 0.2).unwrap();
        let ctx = ModelContext::new(&p);
        for k in [1u64, 5, 50, 1234, 20_000] {
            for v in [Variant::Exact, Variant::Tilde] {
                let a = ctx.term(k, ALPHA, 0.3, v).unwrap();
                let b = term_g(k, ALPHA, 0.3, &p, v).unwrap();
                assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
            }
        }
    }

    #[test]
    fn fast_partial_sum_matches_termwise() {
        let p = Params::new(0.5, 1000, 0.3).unwrap();
        let ctx = ModelContext::new(&p);
        for (alpha, x) in [(ALPHA, 0.1), (0.123_456_789, 0.77), (0.5 + 1e-7, 0.0)] {
            let last = p.last_k();
            let fast = ctx.partial_sum(alpha, x, last).unwrap();
            let idx: Vec<u64> = (1..=last).collect();
            let slow = ctx.sum_over(&idx, alpha, x, Variant::Exact).unwrap();
            assert!((fast - slow).abs() < 1e-10, "{fast} vs {slow}");
        }
    }

    #[test]
    fn empty_override_is_zero() {
        let p = Params::new(0.5, 1000, 0.2).unwrap();
        let ctx = ModelContext::with_k_max(&p, 0);
        let u = ResonantSet::empty(Band::Hat);
        assert_eq!(ctx.model_sum(ALPHA, 0.3, Model::Diamond, Some(&u)).unwrap(), 0.0);
    }

    #[test]
    fn hat_equals_tilde_minus_low_terms() {
        let p = Params::new(0.5, 1_000_000, 0.4).unwrap();
        let ctx = ModelContext::with_k_max(&p, 0);
        for alpha in [ALPHA, std::f64::consts::FRAC_1_PI, std::f64::consts::FRAC_1_SQRT_2] {
            let tilde = ctx.model_sum(alpha, 0.4, Model::Tilde, None).unwrap();
            let hat = ctx.model_sum(alpha, 0.4, Model::Hat, None).unwrap();
            let low: f64 = resonant_set(alpha, &p, Band::Full)
                .indices
                .iter()
                .filter(|&&k| k as f64 <= p.k_lower())
                .map(|&k| ctx.term(k, alpha, 0.4, Variant::Exact).unwrap())
                .sum();
            assert!((tilde - low - hat).abs() < 1e-9 * (1.0 + tilde.abs()));
        }
    }

    fn hat_band_gaps(n: u64, rule: CoeffRule, kernel_only: bool) -> f64 {
        let p = Params::new(0.5, n, 0.3).unwrap();
        let ctx = ModelContext::with_k_max(&p, 0).with_rule(rule);
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..20 {
            let alpha = frac(0.1 + (i as f64 + PI) * ALPHA * 0.731);
            let set = resonant_set(alpha, &p, Band::Hat);
            for &k in &set.indices {
                let (e, t) = if kernel_only {
                    (
                        kernel(k, alpha, n, Variant::Exact).unwrap(),
                        kernel(k, alpha, n, Variant::Tilde).unwrap(),
                    )
                } else {
                    (
                        ctx.term(k, alpha, 0.25, Variant::Exact).unwrap(),
                        ctx.term(k, alpha, 0.25, Variant::Tilde).unwrap(),
                    )
                };
                num += (e - t).abs();
                den += e.abs();
            }
        }
        num / den
    }

    #[test]
    fn tilde_converges_to_exact_on_hat_band() {
        let ns = [1_000u64, 10_000, 100_000];
        let kernel: Vec<f64> = ns.iter().map(|&n| hat_band_gaps(n, CoeffRule::Constant, true)).collect();
        assert!(kernel[1] < kernel[0] && kernel[2] < kernel[1], "{kernel:?}");
        let trunc: Vec<f64> = ns.iter().map(|&n| hat_band_gaps(n, CoeffRule::Truncated, false)).collect();
        assert!(trunc[1] < trunc[0] && trunc[2] < trunc[1], "{trunc:?}");
        assert!(trunc[2] < 0.05, "{trunc:?}");
        // With constant coefficients the gap does not close: the dropped
        // integral over (0, k eps / N) is fixed in lattice coordinates.
        let constant = hat_band_gaps(100_000, CoeffRule::Constant, false);
        assert!(constant > 0.3, "{constant}");
    }
}
