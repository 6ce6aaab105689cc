//! Fourier reconstruction of the capped Birkhoff sum.
//!
//! The coefficients of the capped observable decay only like `1/k`, because
//! of its jumps at `0` and at `eps/N`. The series is therefore evaluated as
//! a partial sum up to `K` plus the asymptotic contribution of the jumps of
//! the observable and of its first `M` derivatives, summed in closed form
//! over `k > K` by Euler-Maclaurin. What remains is bounded by
//! `2 N^{1-a} V_M / ((2 pi)^{M+1} M K^M)`, with `V_M` the total variation
//! of the `M`-th derivative on `[eps/N, 1]`.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use super::models::ModelContext;
use crate::numerics::{bernoulli_ratios, cis_2pi, expint, two_prod, NeumaierSum};
use crate::observable::{birkhoff_norm, orbit_point};
use crate::{Error, Params, Result};

/// Order of the endpoint expansion.
pub const TAIL_ORDER: usize = 8;

const CUTOFF_LADDER: [u64; 12] = [
    1_000, 2_000, 5_000, 10_000, 20_000, 50_000, 100_000, 200_000, 500_000, 1_000_000, 2_000_000, 5_000_000,
];

/// `sum_{k >= start} e^{2 pi i k t} k^{-s}` for `s = 1..=s_max`, with `t`
/// taken mod 1. Fails for `t = 0` mod 1 (the `s = 1` series diverges).
pub fn lerch_tail(t: f64, start: u64, s_max: usize) -> Option<Vec<Complex64>> {
    let t = t - t.round();
    if t == 0.0 {
        return None;
    }
    let af = start as f64;
    let theta = 2.0 * PI * t;
    let (hi, lo) = two_prod(af, t);
    let e_a = cis_2pi((hi - hi.round()) + lo);
    let z = Complex64::new(0.0, -theta * af);
    let it = Complex64::new(0.0, theta);
    let bern = bernoulli_ratios();
    let mut out = Vec::with_capacity(s_max);
    for s in 1..=s_max {
        let sf = s as f64;
        let a_pow = af.powf(-sf);
        let integral = expint(s as u32, z) * af.powf(1.0 - sf);
        let mut total = integral + e_a * a_pow * 0.5;
        // F^{(r)}(A) = e^{i theta A} sum_l C(r,l) (i theta)^{r-l} (-1)^l (s)_l A^{-s-l}
        for (j, &bj) in bern.iter().enumerate() {
            let r = 2 * j + 1;
            let mut d = Complex64::new(0.0, 0.0);
            let mut binom = 1.0;
            let mut poch = 1.0;
            let mut a_l = a_pow;
            for l in 0..=r {
                let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
                d += it.powi((r - l) as i32) * (binom * sign * poch * a_l);
                binom *= (r - l) as f64 / (l + 1) as f64;
                poch *= sf + l as f64;
                a_l /= af;
            }
            let term = e_a * d * bj;
            total -= term;
            if term.norm() < 1e-18 * total.norm() {
                break;
            }
        }
        out.push(total);
    }
    Some(out)
}

/// Jumps of the capped observable and its derivatives at `0` and `eps/N`.
#[derive(Debug, Clone)]
pub struct EndpointTail {
    delta: f64,
    jumps: [[f64; TAIL_ORDER + 1]; 2],
    start: u64,
}

impl EndpointTail {
    /// Expansion for `k > k_cut`.
    pub fn new(p: &Params, k_cut: u64) -> Self {
        let a = p.a();
        let delta = p.delta();
        let c0 = p.c0();
        let cap = p.cap();
        let mut at_zero = [0.0; TAIL_ORDER + 1];
        let mut at_delta = [0.0; TAIL_ORDER + 1];
        at_zero[0] = cap - (1.0 - c0);
        at_delta[0] = delta.powf(-a) - c0 - cap;
        // D_m = (-a)(-a-1)...(-a-m+1), the m-th derivative of x^{-a} at 1.
        let mut dm = 1.0;
        for m in 1..=TAIL_ORDER {
            dm *= -a - (m - 1) as f64;
            at_zero[m] = -dm;
            at_delta[m] = dm * delta.powf(-a - m as f64);
        }
        Self { delta, jumps: [at_zero, at_delta], start: k_cut + 1 }
    }

    /// `sum_{k > K} 2 Re(phi_hat(k) e^{2 pi i k y})` to order `M`.
    pub fn at(&self, y: f64) -> Option<f64> {
        let mut total = 0.0;
        for (pt, jumps) in [0.0, self.delta].iter().zip(&self.jumps) {
            let l = lerch_tail(y - pt, self.start, TAIL_ORDER + 1)?;
            let mut fac = Complex64::new(0.0, 2.0 * PI);
            for m in 0..=TAIL_ORDER {
                total += 2.0 * (l[m] * jumps[m] / fac).re;
                fac *= Complex64::new(0.0, 2.0 * PI);
            }
        }
        Some(total)
    }
}

/// Bound on the error of partial sum plus endpoint expansion.
pub fn remainder_bound(p: &Params, k_cut: u64) -> f64 {
    let a = p.a();
    let m = TAIL_ORDER as i32;
    let mut dm = 1.0f64;
    for j in 0..TAIL_ORDER {
        dm *= a + j as f64;
    }
    let v = dm * (p.delta().powf(-a - m as f64) - 1.0);
    2.0 * p.n_f64().powf(1.0 - a) * v / ((2.0 * PI).powi(m + 1) * m as f64 * (k_cut as f64).powi(m))
}

/// Smallest cutoff of a fixed ladder whose remainder bound is below `tol`.
pub fn choose_cutoff(p: &Params, tol: f64) -> Option<u64> {
    CUTOFF_LADDER.iter().copied().find(|&k| remainder_bound(p, k) <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reconstruction {
    /// Capped Birkhoff sum evaluated along the orbit.
    pub direct: f64,
    /// `sum_{k <= K} g_k`.
    pub partial: f64,
    /// Endpoint expansion of `sum_{k > K} g_k`.
    pub tail: f64,
    pub k_cut: u64,
    pub tail_bound: f64,
}

impl Reconstruction {
    pub fn series(&self) -> f64 {
        self.partial + self.tail
    }

    pub fn residual(&self) -> f64 {
        (self.direct - self.series()).abs()
    }
}

/// Compares the capped Birkhoff sum with its Fourier series. The context
/// must tabulate at least `k_cut` frequencies for speed (missing ones are
/// computed on the fly).
pub fn reconstruct(alpha: f64, x: f64, ctx: &ModelContext, k_cut: u64) -> Result<Reconstruction> {
    let p = ctx.params();
    let direct = birkhoff_norm(alpha, x, p, true)?;
    let partial = ctx.partial_sum(alpha, x, k_cut)?;
    let et = EndpointTail::new(p, k_cut);
    let mut s = NeumaierSum::new();
    for n in 0..p.n() {
        let y = orbit_point(alpha, x, n);
        s.add(et.at(y).ok_or(Error::OnBreakpoint { index: n })?);
    }
    Ok(Reconstruction {
        direct,
        partial,
        tail: s.value() / p.n_pow_a(),
        k_cut,
        tail_bound: remainder_bound(p, k_cut),
    })
}
