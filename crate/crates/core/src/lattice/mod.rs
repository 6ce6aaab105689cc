//! Unimodular planar lattices, their Gauss-reduced frames and the lattices
//! `L(N, alpha) = diag(1/N, N) [[1, 0], [alpha, 1]] Z^2` attached to a
//! rotation.

pub mod enumerate;

use rand::Rng;
use serde::Serialize;
use std::f64::consts::PI;

use crate::numerics::{frac_mul, two_prod, two_sum};
use crate::rotation::{resonant_set, signed_frac, Band};
use crate::{Error, Params, Result};

const DET_TOL: f64 = 1e-9;

/// Where a lattice came from; rotation lattices keep `(N, alpha)` so that
/// points can be formed without rounding the integer structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Provenance {
    General,
    Rotation { n: u64, alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lattice2 {
    /// Row-major; the columns generate the lattice.
    pub generator: [[f64; 2]; 2],
    /// `|det - 1|` as computed.
    pub det_tol: f64,
    pub provenance: Provenance,
}

#[inline]
fn norm2(v: [f64; 2]) -> f64 {
    v[0] * v[0] + v[1] * v[1]
}

#[inline]
fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// `a x + b y` with one rounding at the end.
#[inline]
fn dot2(a: f64, x: i64, b: f64, y: i64) -> f64 {
    let (p1, e1) = two_prod(a, x as f64);
    let (p2, e2) = two_prod(b, y as f64);
    let (s, e3) = two_sum(p1, p2);
    s + (e1 + e2 + e3)
}

impl Lattice2 {
    pub fn from_columns(c0: [f64; 2], c1: [f64; 2]) -> Result<Self> {
        let det = c0[0] * c1[1] - c1[0] * c0[1];
        let det_tol = (det - 1.0).abs();
        if !(det_tol <= DET_TOL) {
            return Err(Error::NotUnimodular(det_tol));
        }
        Ok(Self { generator: [[c0[0], c1[0]], [c0[1], c1[1]]], det_tol, provenance: Provenance::General })
    }

    pub fn column(&self, j: usize) -> [f64; 2] {
        [self.generator[0][j], self.generator[1][j]]
    }

    pub fn det(&self) -> f64 {
        let b = &self.generator;
        b[0][0] * b[1][1] - b[0][1] * b[1][0]
    }

    /// `B v` for an integer coordinate vector.
    #[inline]
    pub fn point(&self, v: [i64; 2]) -> [f64; 2] {
        match self.provenance {
            Provenance::Rotation { n, alpha } => {
                let nf = n as f64;
                let (hi, lo) = two_prod(v[0] as f64, alpha);
                let (s, e) = two_sum(hi, v[1] as f64);
                [v[0] as f64 / nf, nf * (s + (lo + e))]
            }
            Provenance::General => {
                let b = &self.generator;
                [dot2(b[0][0], v[0], b[0][1], v[1]), dot2(b[1][0], v[0], b[1][1], v[1])]
            }
        }
    }

    /// Lattice with columns scaled by `diag(t, 1/t)`; used for enumeration.
    pub(crate) fn scaled_point(&self, v: [i64; 2], t: f64) -> [f64; 2] {
        let p = self.point(v);
        [p[0] * t, p[1] / t]
    }
}

/// `L(N, alpha)`: columns `(1/N, N alpha)` and `(0, N)`.
pub fn lattice_of(n: u64, alpha: f64) -> Lattice2 {
    let nf = n as f64;
    let generator = [[1.0 / nf, 0.0], [nf * alpha, nf]];
    let det = generator[0][0] * generator[1][1];
    Lattice2 { generator, det_tol: (det - 1.0).abs(), provenance: Provenance::Rotation { n, alpha } }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReducedFrame {
    pub e1: [f64; 2],
    pub e2: [f64; 2],
    pub u1: [i64; 2],
    pub u2: [i64; 2],
    pub source: Lattice2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointCoords {
    pub x: f64,
    pub z: f64,
    pub m: [i64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaPoint {
    pub g1: f64,
    pub g2: f64,
}

fn checked_comb(c1: i64, u1: [i64; 2], c2: i64, u2: [i64; 2]) -> Result<[i64; 2]> {
    let f = |i: usize| -> Option<i64> { c1.checked_mul(u1[i])?.checked_add(c2.checked_mul(u2[i])?) };
    Ok([f(0).ok_or(Error::Overflow)?, f(1).ok_or(Error::Overflow)?])
}

/// Lagrange-Gauss reduction on integer coordinates; `apply` maps integer
/// coordinates to the plane. Returns `(u1, u2)` with `|b1| <= |b2|` and
/// `|<b1, b2>| <= |b1|^2 / 2`.
pub(crate) fn gauss_reduce<F: Fn([i64; 2]) -> [f64; 2]>(
    apply: F,
    mut u1: [i64; 2],
    mut u2: [i64; 2],
) -> Result<([i64; 2], [i64; 2])> {
    let mut b1 = apply(u1);
    let mut b2 = apply(u2);
    if norm2(b1) > norm2(b2) {
        std::mem::swap(&mut u1, &mut u2);
        std::mem::swap(&mut b1, &mut b2);
    }
    for _ in 0..10_000 {
        let mu = dot(b1, b2) / norm2(b1);
        let r = if mu.abs() <= 0.5 { 0.0 } else { mu.round() };
        if r != 0.0 {
            if !(r.abs() < 9.0e15) {
                return Err(Error::Overflow);
            }
            u2 = checked_comb(1, u2, -(r as i64), u1)?;
            b2 = apply(u2);
        }
        if norm2(b2) < norm2(b1) {
            std::mem::swap(&mut u1, &mut u2);
            std::mem::swap(&mut b1, &mut b2);
        } else if r == 0.0 {
            return Ok((u1, u2));
        }
    }
    Err(Error::NoConvergence)
}

/// Orders candidates by length, then prefers larger first coordinate, then
/// larger second coordinate. Lengths within a relative `1e-12` tie.
fn better(a: [f64; 2], b: [f64; 2]) -> bool {
    let (na, nb) = (norm2(a), norm2(b));
    let tol = 1e-12 * na.max(nb);
    if (na - nb).abs() > tol {
        return na < nb;
    }
    if a[0] != b[0] {
        return a[0] > b[0];
    }
    a[1] > b[1]
}

/// Shortest vector `e1` and the shortest `e2` completing it to a basis,
/// with the sign and tie rules of `better`.
pub fn reduce(l: &Lattice2) -> Result<ReducedFrame> {
    if !(l.det_tol <= DET_TOL) {
        return Err(Error::NotUnimodular(l.det_tol));
    }
    let (r1, r2) = gauss_reduce(|v| l.point(v), [1, 0], [0, 1])?;
    let mut cands = Vec::with_capacity(8);
    for (c1, c2) in [(1, 0), (0, 1), (1, 1), (1, -1)] {
        for s in [1, -1] {
            let u = checked_comb(s * c1, r1, s * c2, r2)?;
            cands.push((u, l.point(u)));
        }
    }
    let mut first = cands[0];
    for &c in &cands[1..] {
        if better(c.1, first.1) {
            first = c;
        }
    }
    let mut second: Option<([i64; 2], [f64; 2])> = None;
    for &c in &cands {
        let det = first.0[0] as i128 * c.0[1] as i128 - first.0[1] as i128 * c.0[0] as i128;
        if det.abs() != 1 {
            continue;
        }
        if second.is_none_or(|s| better(c.1, s.1)) {
            second = Some(c);
        }
    }
    let second = second.ok_or(Error::NoConvergence)?;
    Ok(ReducedFrame { e1: first.1, e2: second.1, u1: first.0, u2: second.0, source: *l })
}

impl ReducedFrame {
    /// The lattice generated by `e1, e2`; its integer coordinates are frame
    /// coordinates.
    pub fn frame_lattice(&self) -> Lattice2 {
        let (e1, e2) = (self.e1, self.e2);
        Lattice2 {
            generator: [[e1[0], e2[0]], [e1[1], e2[1]]],
            det_tol: self.source.det_tol,
            provenance: Provenance::General,
        }
    }

    /// Integer coordinates in the generator basis of `m1 e1 + m2 e2`.
    pub fn integer_vector(&self, m: [i64; 2]) -> Result<[i64; 2]> {
        checked_comb(m[0], self.u1, m[1], self.u2)
    }

    /// Frame coordinates `m` of an integer vector `v`.
    pub fn frame_coords(&self, v: [i64; 2]) -> Result<[i64; 2]> {
        let (u1, u2) = (self.u1, self.u2);
        let det = u1[0] as i128 * u2[1] as i128 - u2[0] as i128 * u1[1] as i128;
        let m1 = (u2[1] as i128 * v[0] as i128 - u2[0] as i128 * v[1] as i128) * det;
        let m2 = (-(u1[1] as i128) * v[0] as i128 + u1[0] as i128 * v[1] as i128) * det;
        Ok([i64::try_from(m1).map_err(|_| Error::Overflow)?, i64::try_from(m2).map_err(|_| Error::Overflow)?])
    }
}

/// `(X_m, Z_m)` of `m1 e1 + m2 e2`.
pub fn coords(f: &ReducedFrame, m: [i64; 2]) -> Result<PointCoords> {
    let v = f.integer_vector(m)?;
    let p = f.source.point(v);
    Ok(PointCoords { x: p[0], z: p[1], m })
}

/// Haar-distributed unimodular lattice: a point of the modular fundamental
/// domain drawn from the hyperbolic area, then a uniform rotation.
pub fn sample_haar<R: Rng + ?Sized>(rng: &mut R) -> Lattice2 {
    let theta = (rng.gen::<f64>() - 0.5) * (PI / 3.0);
    let x = theta.sin();
    let u: f64 = rng.gen();
    let y = theta.cos() / (1.0 - u);
    let psi = rng.gen::<f64>() * 2.0 * PI;
    let sy = y.sqrt();
    let (s, c) = psi.sin_cos();
    let rot = |v: [f64; 2]| [c * v[0] - s * v[1], s * v[0] + c * v[1]];
    let c0 = rot([1.0 / sy, 0.0]);
    let c1 = rot([x / sy, sy]);
    let det = c0[0] * c1[1] - c1[0] * c0[1];
    Lattice2 {
        generator: [[c0[0], c1[0]], [c0[1], c1[1]]],
        det_tol: (det - 1.0).abs(),
        provenance: Provenance::General,
    }
}

/// `L(N, alpha)` with `alpha` uniform on `[0, 1)`.
pub fn sample_geodesic_pushforward<R: Rng + ?Sized>(rng: &mut R, n: u64) -> Lattice2 {
    lattice_of(n, rng.gen())
}

/// `gamma = (x kappa_1, x kappa_2)` mod 1, where `kappa_i` is the first
/// integer coordinate of `u_i`, so that `m . gamma = k x` mod 1.
pub fn gamma_of(f: &ReducedFrame, x: f64) -> Result<GammaPoint> {
    match f.source.provenance {
        Provenance::Rotation { .. } => Ok(GammaPoint { g1: frac_mul(f.u1[0], x), g2: frac_mul(f.u2[0], x) }),
        Provenance::General => Err(Error::MissingProvenance),
    }
}

/// `eps^{-1-2a} + eps^{-a^2-a-2/a}`.
pub fn radius(a: f64, eps: f64) -> f64 {
    eps.powf(-1.0 - 2.0 * a) + eps.powf(-a * a - a - 2.0 / a)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceEntry {
    pub k: u64,
    pub k_prime: i64,
    pub coords: PointCoords,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Correspondence {
    pub frame: ReducedFrame,
    pub entries: Vec<CorrespondenceEntry>,
    pub radius: f64,
    pub max_norm: f64,
    /// Frequencies whose vector is longer than `radius`.
    pub outside_radius: Vec<u64>,
}

/// Frame coordinates of the vectors `(k, k')` of the hat band.
pub fn correspondence(alpha: f64, p: &Params) -> Result<Correspondence> {
    let l = lattice_of(p.n(), alpha);
    let frame = reduce(&l)?;
    let r = radius(p.a(), p.eps());
    let set = resonant_set(alpha, p, Band::Hat);
    let mut entries = Vec::with_capacity(set.len());
    let mut max_norm: f64 = 0.0;
    let mut outside = Vec::new();
    for &k in &set.indices {
        let sf = signed_frac(k, alpha);
        let v = [k as i64, sf.integer_part];
        let m = frame.frame_coords(v)?;
        if frame.integer_vector(m)? != v {
            return Err(Error::Correspondence { k, reason: "round trip through the frame failed".into() });
        }
        let c = coords(&frame, m)?;
        if !(c.x > 0.0) {
            return Err(Error::Correspondence { k, reason: "non-positive X".into() });
        }
        let norm = c.x.hypot(c.z);
        max_norm = max_norm.max(norm);
        if norm > r {
            outside.push(k);
        }
        entries.push(CorrespondenceEntry { k, k_prime: sf.integer_part, coords: c });
    }
    Ok(Correspondence { frame, entries, radius: r, max_norm, outside_radius: outside })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Streams;

    #[test]
    fn rotation_lattice_examples() {
        let l = lattice_of(1, 0.0);
        assert_eq!(l.generator, [[1.0, 0.0], [0.0, 1.0]]);
        let l = lattice_of(2, 0.5);
        assert_eq!(l.column(0), [0.5, 1.0]);
        assert_eq!(l.column(1), [0.0, 2.0]);
        let alpha = std::f64::consts::SQRT_2 - 1.0;
        let l = lattice_of(1000, alpha);
        let sf = signed_frac(7, alpha);
        let p = l.point([7, sf.integer_part]);
        assert_eq!(p[0], 7.0 / 1000.0);
        assert!((p[1] - 1000.0 * sf.value).abs() < 1e-12);
    }

    #[test]
    fn reduce_examples() {
        let z2 = Lattice2::from_columns([1.0, 0.0], [0.0, 1.0]).unwrap();
        let f = reduce(&z2).unwrap();
        assert_eq!((f.e1, f.u1, f.e2), ([1.0, 0.0], [1, 0], [0.0, 1.0]));
        let f = reduce(&lattice_of(2, 0.5)).unwrap();
        assert_eq!(f.e1, [1.0, 0.0]);
        assert_eq!(f.u1, [2, -1]);
        assert_eq!(f.e2, [0.5, 1.0]);
        let f = reduce(&lattice_of(1000, 0.0)).unwrap();
        assert_eq!(f.e1, [1e-3, 0.0]);
        assert!(Lattice2::from_columns([1.0, 0.0], [0.0, 2.0]).is_err());
    }

    #[test]
    fn coords_examples() {
        let f = reduce(&Lattice2::from_columns([1.0, 0.0], [0.0, 1.0]).unwrap()).unwrap();
        let c = coords(&f, [1, 1]).unwrap();
        assert_eq!((c.x, c.z), (1.0, 1.0));
        let c = coords(&f, [1, 0]).unwrap();
        assert_eq!([c.x, c.z], f.e1);
    }

    #[test]
    fn frame_invariants_on_haar_samples() {
        let s = Streams::new(3, "frame");
        for i in 0..2000 {
            let l = sample_haar(&mut s.stream(i));
            assert!(l.det_tol <= 1e-12);
            let f = reduce(&l).unwrap();
            let (n1, n2) = (norm2(f.e1), norm2(f.e2));
            assert!(n1 <= n2 * (1.0 + 1e-12));
            let plus = [f.e2[0] + f.e1[0], f.e2[1] + f.e1[1]];
            let minus = [f.e2[0] - f.e1[0], f.e2[1] - f.e1[1]];
            assert!(n1 <= norm2(plus) * (1.0 + 1e-12) && n1 <= norm2(minus) * (1.0 + 1e-12));
            let det = f.u1[0] * f.u2[1] - f.u1[1] * f.u2[0];
            assert_eq!(det.abs(), 1);
            for e in [f.e1, f.e2] {
                assert!(e[0] > 0.0 || (e[0] == 0.0 && e[1] > 0.0));
            }
            assert!(n1.sqrt() <= (4.0f64 / 3.0).powf(0.25) + 1e-12);
            // Idempotent.
            let l2 = Lattice2::from_columns(f.e1, f.e2)
                .or_else(|_| Lattice2::from_columns(f.e2, f.e1))
                .unwrap();
            let g = reduce(&l2).unwrap();
            assert!((g.e1[0] - f.e1[0]).abs() < 1e-12 && (g.e1[1] - f.e1[1]).abs() < 1e-12);
            assert!((g.e2[0] - f.e2[0]).abs() < 1e-12 && (g.e2[1] - f.e2[1]).abs() < 1e-12);
            // Coordinates are the frame combination.
            let c = coords(&f, [3, -2]).unwrap();
            assert!((c.x - (3.0 * f.e1[0] - 2.0 * f.e2[0])).abs() < 1e-12);
            assert!((c.z - (3.0 * f.e1[1] - 2.0 * f.e2[1])).abs() < 1e-12);
        }
    }

    #[test]
    fn gamma_examples() {
        let f = reduce(&lattice_of(100, std::f64::consts::FRAC_1_PI)).unwrap();
        assert_eq!(gamma_of(&f, 0.0).unwrap(), GammaPoint { g1: 0.0, g2: 0.0 });
        let g = GammaPoint { g1: frac_mul(2, 0.5), g2: frac_mul(3, 0.5) };
        assert_eq!(g, GammaPoint { g1: 0.0, g2: 0.5 });
        let z2 = reduce(&Lattice2::from_columns([1.0, 0.0], [0.0, 1.0]).unwrap()).unwrap();
        assert_eq!(gamma_of(&z2, 0.3), Err(Error::MissingProvenance));
        // Agrees with the floating-point formula N x e_{i1} mod 1.
        let s = Streams::new(5, "gamma");
        for i in 0..500 {
            let mut rng = s.stream(i);
            let n = 100_000;
            let f = reduce(&sample_geodesic_pushforward(&mut rng, n)).unwrap();
            let x: f64 = rng.gen();
            let g = gamma_of(&f, x).unwrap();
            for (gi, e) in [(g.g1, f.e1), (g.g2, f.e2)] {
                let naive = (n as f64 * x * e[0]).rem_euclid(1.0);
                let d = (gi - naive).abs();
                assert!(d.min(1.0 - d) < 1e-9);
            }
        }
    }

    #[test]
    fn correspondence_example() {
        let alpha = std::f64::consts::SQRT_2 - 1.0;
        let p = Params::new(0.5, 100_000, 0.3).unwrap();
        let c = correspondence(alpha, &p).unwrap();
        assert!(!c.entries.is_empty());
        let mut ks: Vec<u64> = c.entries.iter().map(|e| e.k).collect();
        ks.dedup();
        assert_eq!(ks.len(), c.entries.len());
        for e in &c.entries {
            let v = c.frame.integer_vector(e.coords.m).unwrap();
            assert_eq!(v, [e.k as i64, e.k_prime]);
            let x = e.k as f64 / p.n_f64();
            assert_eq!(e.coords.x, x);
            assert!(x.hypot(e.coords.z) <= c.radius);
        }
        assert!(c.outside_radius.is_empty());
    }
}
