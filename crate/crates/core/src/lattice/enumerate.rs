//! Lattice points in the resonant region
//! `{x_lo < X < x_hi, |Z| <= c X^{a-1}}`.
//!
//! The region is cut into dyadic slabs in `X`. Each slab's bounding box is
//! rescaled by `diag(t, 1/t)` into a square, the rescaled lattice is
//! Gauss-reduced, and the square is swept row by row along the shorter
//! reduced vector.

use serde::Serialize;

use super::{gauss_reduce, Lattice2};
use crate::{Error, Params, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Region {
    pub a: f64,
    pub x_lo: f64,
    pub x_hi: f64,
    /// `|Z| <= c X^{a-1}`.
    pub c: f64,
}

impl Region {
    /// Region attached to the hat band: `X = k/N` in
    /// `(eps^{1+2/a+2a}, eps^{-1-2a})` and `c = eps^{-(1+a+2a^2)}`.
    pub fn resonant(a: f64, eps: f64) -> Self {
        Self {
            a,
            x_lo: eps.powf(1.0 + 2.0 / a + 2.0 * a),
            x_hi: eps.powf(-1.0 - 2.0 * a),
            c: eps.powf(-(1.0 + a + 2.0 * a * a)),
        }
    }

    pub fn of_params(p: &Params) -> Self {
        Self::resonant(p.a(), p.eps())
    }

    /// Height of the region above `x`.
    #[inline]
    pub fn height(&self, x: f64) -> f64 {
        self.c * x.powf(self.a - 1.0)
    }

    #[inline]
    pub fn contains(&self, x: f64, z: f64) -> bool {
        x > self.x_lo && x < self.x_hi && z.abs() <= self.height(x)
    }

    /// Largest `|Z|` in the region, reached at `x_lo`.
    pub fn max_height(&self) -> f64 {
        self.height(self.x_lo)
    }

    /// Area `2c (x_hi^a - x_lo^a) / a`, the expected number of points of a
    /// random unimodular lattice in the region.
    pub fn area(&self) -> f64 {
        2.0 * self.c * (self.x_hi.powf(self.a) - self.x_lo.powf(self.a)) / self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegionPoint {
    /// Integer coordinates in the generator basis.
    pub v: [i64; 2],
    pub x: f64,
    pub z: f64,
}

/// A run of lattice points `v0 + j dv`, `0 <= j < len`, inside the
/// bounding box of the slab `X` in `(xl, xh]`, `|Z| <= h`, plus possibly a
/// few just outside.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Row {
    pub v0: [i64; 2],
    pub dv: [i64; 2],
    pub len: i64,
    pub xl: f64,
    pub xh: f64,
    pub h: f64,
}

fn comb(c1: i64, u1: [i64; 2], c2: i64, u2: [i64; 2]) -> Result<[i64; 2]> {
    let f = |i: usize| c1.checked_mul(u1[i])?.checked_add(c2.checked_mul(u2[i])?);
    Ok([f(0).ok_or(Error::Overflow)?, f(1).ok_or(Error::Overflow)?])
}

fn box_rows<F: FnMut(Row) -> Result<()>>(l: &Lattice2, xl: f64, xh: f64, h: f64, f: &mut F) -> Result<()> {
    let w = xh - xl;
    let t = (2.0 * h / w).sqrt();
    let (u1, u2) = gauss_reduce(|v| l.scaled_point(v, t), [1, 0], [0, 1])?;
    let b1 = l.scaled_point(u1, t);
    let b2 = l.scaled_point(u2, t);
    let det = b1[0] * b2[1] - b1[1] * b2[0];
    // Scaled box: [t xl, t xh] x [-h/t, h/t].
    let (sx0, sx1) = (t * xl, t * xh);
    let (sz0, sz1) = (-h / t, h / t);
    // Coefficient of b2 is the dual pairing <p, b1^perp> / det.
    let m2_of = |p: [f64; 2]| (b1[0] * p[1] - b1[1] * p[0]) / det;
    let corners = [[sx0, sz0], [sx0, sz1], [sx1, sz0], [sx1, sz1]];
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in corners {
        let m = m2_of(c);
        lo = lo.min(m);
        hi = hi.max(m);
    }
    if !(hi - lo < 1e12) {
        return Err(Error::Overflow);
    }
    let (m2_lo, m2_hi) = (lo.floor() as i64 - 1, hi.ceil() as i64 + 1);
    for m2 in m2_lo..=m2_hi {
        let base = [m2 as f64 * b2[0], m2 as f64 * b2[1]];
        // Solve sx0 <= base.x + s b1.x <= sx1 and the same for z.
        let mut s_lo = f64::NEG_INFINITY;
        let mut s_hi = f64::INFINITY;
        let mut feasible = true;
        for (bi, pi, lo_i, hi_i) in [(b1[0], base[0], sx0, sx1), (b1[1], base[1], sz0, sz1)] {
            if bi == 0.0 {
                if pi < lo_i || pi > hi_i {
                    feasible = false;
                }
                continue;
            }
            let (e0, e1) = ((lo_i - pi) / bi, (hi_i - pi) / bi);
            s_lo = s_lo.max(e0.min(e1));
            s_hi = s_hi.min(e0.max(e1));
        }
        if !feasible || s_lo > s_hi + 2.0 {
            continue;
        }
        let (m1_lo, m1_hi) = (s_lo.floor() as i64 - 1, s_hi.ceil() as i64 + 1);
        f(Row { v0: comb(m1_lo, u1, m2, u2)?, dv: u1, len: m1_hi - m1_lo + 1, xl, xh, h })?;
    }
    Ok(())
}

/// Visits rows covering the region enlarged by the relative `slack`. The
/// slabs `(xl, xh]` partition the `X` range; a point belongs to the region
/// only if it also passes the slab and region tests.
pub fn for_each_row<F: FnMut(Row) -> Result<()>>(l: &Lattice2, region: &Region, slack: f64, mut f: F) -> Result<()> {
    let x_lo = region.x_lo * (1.0 - slack);
    let x_hi = region.x_hi * (1.0 + slack);
    let mut xl = x_lo;
    while xl < x_hi {
        let xh = (2.0 * xl).min(x_hi);
        // Height is decreasing in X, so the left edge bounds the slab.
        let h = region.height(xl) * (1.0 + slack) * (1.0 + 1e-12);
        box_rows(l, xl, xh, h, &mut f)?;
        xl = xh;
    }
    Ok(())
}

/// All lattice points of `region` enlarged by the relative `slack` (in both
/// `X` limits and the height), sorted by `X`. With `slack = 0` the result
/// is exactly the points satisfying `region.contains`.
pub fn region_points(l: &Lattice2, region: &Region, slack: f64) -> Result<Vec<RegionPoint>> {
    let x_lo = region.x_lo * (1.0 - slack);
    let x_hi = region.x_hi * (1.0 + slack);
    let mut out = Vec::new();
    for_each_row(l, region, slack, |row| {
        for j in 0..row.len {
            let v = comb(1, row.v0, j, row.dv)?;
            let p = l.point(v);
            if p[0] > row.xl
                && p[0] <= row.xh
                && p[0] > x_lo
                && p[0] < x_hi
                && p[1].abs() <= region.height(p[0]) * (1.0 + slack)
            {
                out.push(RegionPoint { v, x: p[0], z: p[1] });
            }
        }
        Ok(())
    })?;
    out.sort_by(|p, q| p.x.total_cmp(&q.x).then(p.z.total_cmp(&q.z)));
    Ok(out)
}
