//! The lattice functional `D_eps(L, gamma)`: its terms `q`, the finite-`N`
//! box sum `h_m`, Monte Carlo sampling of its law over Haar lattices and
//! uniform `gamma`, and the coupled Cauchy-in-measure estimate.
//!
//! Terms are summed over the resonant region
//! `{x_lo < X < x_hi, |Z| <= c X^{a-1}}` of `Region::resonant`, which is the
//! image of the hat band under the frequency/lattice correspondence.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::fourier::{CoeffRule, LimitCoeffs, UpperTable};
use crate::lattice::enumerate::{for_each_row, region_points, Region};
use crate::lattice::{coords, gamma_of, lattice_of, radius, reduce, sample_haar, GammaPoint, Lattice2, ReducedFrame};
use crate::numerics::{cis_2pi, frac, frac_mul, pow_pos, sinc, NeumaierSum};
use crate::rng::Streams;
use crate::rotation::{is_resonant, signed_frac, Band, ResonantSet};
use crate::stats::{Ecdf, McEstimate};
use crate::{Error, Params, Result};

/// `eps` values at which the law of `D` is represented.
pub const EPS_SCHEDULE: [f64; 4] = [0.2, 0.1, 0.05, 0.02];

/// Rows are advanced by complex rotation and reseeded this often.
const RESEED: i64 = 64;

/// Most `eps` values evaluated in one pass of `d_eps_frame`.
pub const MAX_LAWS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Phase {
    /// `pi Z`.
    Limit,
    /// `pi (N-1) Z / N`.
    Finite(u64),
}

impl Phase {
    /// `e^{i phi Z}`.
    #[inline]
    fn rotation(self, z: f64) -> Complex64 {
        match self {
            Phase::Limit => cis_2pi(frac(0.5 * z)),
            Phase::Finite(n) => cis_2pi(frac(0.5 * z) - 0.5 * z / n as f64),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitTermParams {
    pub eps: f64,
    pub a: f64,
    pub limit_coeffs: LimitCoeffs,
    /// `eps^{-1-2a} + eps^{-a^2-a-2/a}`; reported, not used as a cutoff.
    pub radius: f64,
    pub rule: CoeffRule,
    pub region: Region,
    cap_over_2pi: f64,
    eps_neg_a: f64,
    inv_eps: f64,
    #[serde(skip)]
    upper: Arc<UpperTable>,
}

impl LimitTermParams {
    pub fn new(a: f64, eps: f64, rule: CoeffRule) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidParams(format!("exponent a = {a} outside (0, 1)")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParams(format!("eps = {eps} outside (0, 1)")));
        }
        let upper = UpperTable::shared(a);
        let g = upper.full();
        Ok(Self {
            eps,
            a,
            limit_coeffs: LimitCoeffs { b: g.re, d: g.im },
            radius: radius(a, eps),
            rule,
            region: Region::resonant(a, eps),
            cap_over_2pi: 1.0 / (PI * (1.0 - a) * eps.powf(a)),
            eps_neg_a: eps.powf(-a),
            inv_eps: 1.0 / eps,
            upper,
        })
    }

    pub fn of_params(p: &Params, rule: CoeffRule) -> Self {
        Self::new(p.a(), p.eps(), rule).expect("validated parameters")
    }

    /// Cosine and sine brackets at `X`, given `1/X`, `X^{a-1}`, `X^{-a}`
    /// and `e^{i pi X eps}`.
    #[inline(always)]
    fn brackets_with(&self, x: f64, inv_x: f64, xa: f64, x_neg_a: f64, half: Complex64) -> (f64, f64) {
        let (b, d) = match self.rule {
            CoeffRule::Constant => (self.limit_coeffs.b, self.limit_coeffs.d),
            CoeffRule::Truncated => {
                let u = self.upper.eval_inv(x * self.eps, inv_x * self.inv_eps, half * half, x_neg_a * self.eps_neg_a);
                (u.re, u.im)
            }
        };
        let (sp, cp) = (half.im, half.re);
        let w = self.cap_over_2pi * inv_x;
        (2.0 * b * xa + w * (2.0 * sp * cp), 2.0 * d * xa + w * (2.0 * sp * sp))
    }

    #[inline]
    fn brackets(&self, x: f64) -> (f64, f64) {
        let inv_x = 1.0 / x;
        let half = cis_2pi(frac(0.5 * x * self.eps));
        self.brackets_with(x, inv_x, pow_pos(inv_x, 1.0 - self.a), pow_pos(inv_x, self.a), half)
    }
}

/// `m . gamma` mod 1.
#[inline]
fn pairing(m: [i64; 2], g: GammaPoint) -> f64 {
    frac(frac_mul(m[0], g.g1) + frac_mul(m[1], g.g2))
}

#[inline]
fn q_at(x: f64, z: f64, mg: f64, tp: &LimitTermParams, phase: Phase) -> f64 {
    if !(x > 0.0) {
        return 0.0;
    }
    let (ca, cb) = tp.brackets(x);
    let w = cis_2pi(mg) * phase.rotation(z);
    (ca * w.re + cb * w.im) * sinc(z)
}

/// `q(L, gamma, m, eps)` with the limit phase, or `h_m` with the finite one.
pub fn q_term(f: &ReducedFrame, gamma: GammaPoint, m: [i64; 2], tp: &LimitTermParams, phase: Phase) -> Result<f64> {
    if m == [0, 0] {
        return Err(Error::InvalidParams("q is not defined at m = 0".into()));
    }
    let c = coords(f, m)?;
    Ok(q_at(c.x, c.z, pairing(m, gamma), tp, phase))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoxSum {
    pub value: f64,
    /// Frequencies `k = v_1` of the summed vectors, increasing.
    pub indices: ResonantSet,
    pub frame: ReducedFrame,
}

/// Finite-`N` box sum with its index set. Each summed vector is `(k, k')`
/// with `k'` the integer part of `{k alpha}` and `k` resonant in the hat
/// band, enumerated through the reduced frame of `L(N, alpha)`.
pub fn box_sum_detail(alpha: f64, x: f64, p: &Params, rule: CoeffRule) -> Result<BoxSum> {
    let tp = LimitTermParams::of_params(p, rule);
    let l = lattice_of(p.n(), alpha);
    let frame = reduce(&l)?;
    let gamma = gamma_of(&frame, x)?;
    let first = p.k_lower().floor() as i64 + 1;
    let last = p.last_k() as i64;
    let mut picked = Vec::new();
    for pt in region_points(&l, &tp.region, 1e-9)? {
        let k = pt.v[0];
        if k < first.max(1) || k > last {
            continue;
        }
        let sf = signed_frac(k as u64, alpha);
        if pt.v[1] == sf.integer_part && is_resonant(k as u64, alpha, p) {
            picked.push(pt.v);
        }
    }
    picked.sort();
    let mut s = NeumaierSum::new();
    let mut indices = Vec::with_capacity(picked.len());
    let mut degenerate = Vec::new();
    let phase = Phase::Finite(p.n());
    for v in picked {
        let m = frame.frame_coords(v)?;
        s.add(q_term(&frame, gamma, m, &tp, phase)?);
        indices.push(v[0] as u64);
        if signed_frac(v[0] as u64, alpha).value == 0.0 {
            degenerate.push(v[0] as u64);
        }
    }
    Ok(BoxSum { value: s.value(), indices: ResonantSet { indices, band: Band::Hat, degenerate }, frame })
}

pub fn box_sum(alpha: f64, x: f64, p: &Params, rule: CoeffRule) -> Result<f64> {
    Ok(box_sum_detail(alpha, x, p, rule)?.value)
}

/// `D_eps` by enumerating the region point by point; reference for the
/// row-recurrence evaluation of `d_eps_frame`.
pub fn d_eps_reference(l: &Lattice2, gamma: GammaPoint, tp: &LimitTermParams) -> Result<f64> {
    let frame = reduce(l)?;
    let fl = frame.frame_lattice();
    let mut s = NeumaierSum::new();
    for pt in region_points(&fl, &tp.region, 0.0)? {
        s.add(q_at(pt.x, pt.z, pairing(pt.v, gamma), tp, Phase::Limit));
    }
    Ok(s.value())
}

/// Smallest region containing the regions of all `tps`.
fn union_region(tps: &[LimitTermParams]) -> Result<Region> {
    let first = tps.first().ok_or(Error::EmptySample)?;
    if tps.iter().any(|t| t.a != first.a) {
        return Err(Error::InvalidParams("term parameters with different exponents".into()));
    }
    Ok(tps.iter().skip(1).fold(first.region, |r, t| Region {
        a: r.a,
        x_lo: r.x_lo.min(t.region.x_lo),
        x_hi: r.x_hi.max(t.region.x_hi),
        c: r.c.max(t.region.c),
    }))
}

/// `D_eps` for several `eps` on one frame and `gamma`, sharing the
/// enumeration of the largest region. Along each row the characters
/// `e^{2 pi i m.gamma}`, `e^{i pi Z}` and `e^{i pi X eps}` advance by
/// complex rotation and are recomputed every few steps.
pub fn d_eps_frame(frame: &ReducedFrame, gamma: GammaPoint, tps: &[LimitTermParams]) -> Result<Vec<f64>> {
    // Fixed-size dispatch lets the per-law loops unroll.
    match tps.len() {
        1 => frame_sums::<1>(frame, gamma, tps),
        2 => frame_sums::<2>(frame, gamma, tps),
        3 => frame_sums::<3>(frame, gamma, tps),
        4 => frame_sums::<4>(frame, gamma, tps),
        5 => frame_sums::<5>(frame, gamma, tps),
        6 => frame_sums::<6>(frame, gamma, tps),
        7 => frame_sums::<7>(frame, gamma, tps),
        8 => frame_sums::<8>(frame, gamma, tps),
        0 => Ok(Vec::new()),
        _ => Err(Error::InvalidParams(format!("at most {MAX_LAWS} eps values per pass"))),
    }
}

fn frame_sums<const NT: usize>(frame: &ReducedFrame, gamma: GammaPoint, tps: &[LimitTermParams]) -> Result<Vec<f64>> {
    let tps: &[LimitTermParams; NT] = tps.try_into().expect("dispatched on length");
    let region = union_region(tps)?;
    let fl = frame.frame_lattice();
    let e = 1.0 - region.a;
    let same_power = e == region.a;
    let one = Complex64::new(1.0, 0.0);
    let mut totals = [NeumaierSum::new(); NT];
    let mut row_sums = [0.0; NT];
    let mut halves = [one; NT];
    let mut half_steps = [one; NT];
    for_each_row(&fl, &region, 0.0, |row| {
        let p0 = fl.point(row.v0);
        let dp = fl.point(row.dv);
        let mg0 = pairing(row.v0, gamma);
        let dmg = pairing(row.dv, gamma);
        let step_z = cis_2pi(frac(0.5 * dp[1]));
        let step_w = cis_2pi(dmg) * step_z;
        for i in 0..NT {
            half_steps[i] = cis_2pi(frac(0.5 * dp[0] * tps[i].eps));
            row_sums[i] = 0.0;
        }
        let x_above = row.xl.max(region.x_lo);
        let x_upto = row.xh;
        let x_below = region.x_hi;
        // w = e^{i (2 pi m.gamma + pi Z)}, ez = e^{i pi Z}.
        let (mut w, mut ez) = (one, one);
        let mut j = 0;
        while j < row.len {
            let jf = j as f64;
            let x = p0[0] + jf * dp[0];
            let z = p0[1] + jf * dp[1];
            if j % RESEED == 0 {
                ez = cis_2pi(frac(0.5 * z));
                w = cis_2pi(frac(mg0 + frac_mul(j, dmg))) * ez;
                for i in 0..NT {
                    halves[i] = cis_2pi(frac(0.5 * x * tps[i].eps));
                }
            } else {
                w *= step_w;
                ez *= step_z;
                for i in 0..NT {
                    halves[i] *= half_steps[i];
                }
            }
            j += 1;
            if !(x > x_above && x <= x_upto && x < x_below) {
                continue;
            }
            let inv_x = 1.0 / x;
            let xa = pow_pos(inv_x, e);
            let za = z.abs();
            if za > region.c * xa {
                continue;
            }
            let x_neg_a = if same_power { xa } else { pow_pos(inv_x, region.a) };
            let sc = if za < 1e-4 { sinc(z) } else { ez.im / (PI * z) };
            for i in 0..NT {
                let t = &tps[i];
                if NT == 1 || (x > t.region.x_lo && x < t.region.x_hi && za <= t.region.c * xa) {
                    let (ca, cb) = t.brackets_with(x, inv_x, xa, x_neg_a, halves[i]);
                    row_sums[i] += (ca * w.re + cb * w.im) * sc;
                }
            }
        }
        for i in 0..NT {
            totals[i].add(row_sums[i]);
        }
        Ok(())
    })?;
    Ok(totals.iter().map(NeumaierSum::value).collect())
}

pub fn d_eps_multi(l: &Lattice2, gamma: GammaPoint, tps: &[LimitTermParams]) -> Result<Vec<f64>> {
    d_eps_frame(&reduce(l)?, gamma, tps)
}

pub fn d_eps(l: &Lattice2, gamma: GammaPoint, tp: &LimitTermParams) -> Result<f64> {
    Ok(d_eps_multi(l, gamma, std::slice::from_ref(tp))?[0])
}

/// One draw of a Haar lattice and a uniform `gamma`.
pub fn draw<R: Rng + ?Sized>(rng: &mut R) -> (Lattice2, GammaPoint) {
    let l = sample_haar(rng);
    let g1 = rng.gen();
    let g2 = rng.gen();
    (l, GammaPoint { g1, g2 })
}

/// `D_eps` for every entry of `tps` at `n` coupled draws; `out[i][j]` is
/// draw `j` under `tps[i]`.
pub fn sample_coupled(tps: &[LimitTermParams], n: u64, streams: &Streams) -> Result<Vec<Vec<f64>>> {
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (l, g) = draw(&mut streams.stream(i));
            d_eps_multi(&l, g, tps)
        })
        .collect::<Result<_>>()?;
    let mut out = vec![Vec::with_capacity(n as usize); tps.len()];
    for r in rows {
        for (o, v) in out.iter_mut().zip(r) {
            o.push(v);
        }
    }
    Ok(out)
}

pub fn sample_law(tp: &LimitTermParams, n: u64, streams: &Streams) -> Result<Ecdf> {
    let mut v = sample_coupled(std::slice::from_ref(tp), n, streams)?;
    Ecdf::new(v.pop().expect("one law"))
}

/// Fraction of paired values farther apart than `delta`.
pub fn coupled_gap(u: &[f64], v: &[f64], delta: f64, seed: u64) -> McEstimate {
    let hits = u.iter().zip(v).filter(|(a, b)| (*a - *b).abs() > delta).count() as u64;
    McEstimate::from_counts(hits, u.len().min(v.len()) as u64, seed)
}

/// `mu{|D_eps - D_eps'| > delta}` on coupled draws.
pub fn cauchy_gap(
    tp: &LimitTermParams,
    tp2: &LimitTermParams,
    delta: f64,
    n: u64,
    streams: &Streams,
) -> Result<McEstimate> {
    let v = sample_coupled(&[tp.clone(), tp2.clone()], n, streams)?;
    Ok(coupled_gap(&v[0], &v[1], delta, streams.seed()))
}

/// Laws of `D_eps` along `EPS_SCHEDULE` on coupled draws.
pub fn proxy_laws(a: f64, rule: CoeffRule, n: u64, streams: &Streams) -> Result<Vec<(f64, Ecdf)>> {
    let tps = EPS_SCHEDULE.iter().map(|&e| LimitTermParams::new(a, e, rule)).collect::<Result<Vec<_>>>()?;
    let v = sample_coupled(&tps, n, streams)?;
    EPS_SCHEDULE.iter().zip(v).map(|(&e, s)| Ok((e, Ecdf::new(s)?))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionReport {
    pub points: usize,
    pub max_norm: f64,
    pub radius: f64,
    /// Region points farther from the origin than `radius`.
    pub outside_radius: usize,
}

pub fn region_report(l: &Lattice2, tp: &LimitTermParams) -> Result<RegionReport> {
    let pts = region_points(l, &tp.region, 0.0)?;
    let norms = pts.iter().map(|p| p.x.hypot(p.z));
    let max_norm = norms.clone().fold(0.0, f64::max);
    let outside = norms.filter(|&n| n > tp.radius).count();
    Ok(RegionReport { points: pts.len(), max_norm, radius: tp.radius, outside_radius: outside })
}
