//! The oscillatory integrals `int e^{2 pi i u} u^{-a} du` behind the Fourier
//! coefficients of the capped observable.

use num_complex::Complex64;
use serde::Serialize;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::numerics::{cis_2pi, pow_neg, GaussLegendre};
use crate::Params;

const TWO_PI: f64 = 2.0 * PI;

/// `b = int_{k eps/N}^{k} cos(2 pi u) u^{-a} du`, `d` likewise with sine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscCoeffs {
    pub b: f64,
    pub d: f64,
    pub k: u64,
    pub quadrature_error: f64,
}

/// The integrals of `OscCoeffs` taken over `(0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitCoeffs {
    pub b: f64,
    pub d: f64,
}

/// `int_0^t e^{2 pi i u} u^{-a} du` by its power series, for `t <= 1/2`.
pub fn g_series(t: f64, a: f64) -> Complex64 {
    if t <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let w = Complex64::new(0.0, TWO_PI * t);
    let base = t.powf(1.0 - a);
    let mut pw = Complex64::new(1.0, 0.0);
    let mut sum = Complex64::new(0.0, 0.0);
    for j in 0..60 {
        let jf = j as f64;
        sum += pw / (jf + 1.0 - a);
        pw = pw * w / (jf + 1.0);
        if pw.norm() < 1e-18 {
            break;
        }
    }
    sum * base
}

/// `H(t) = t^{a-1} int_0^t e^{2 pi i u} u^{-a} du` and `H'(t)`; `H` is
/// entire, so it tabulates well down to `t = 0`.
fn g_reduced(t: f64, a: f64) -> (Complex64, Complex64) {
    let w = Complex64::new(0.0, TWO_PI);
    let mut pw = Complex64::new(1.0, 0.0); // (2 pi i)^n t^n / n!
    let mut dpw = Complex64::new(0.0, 0.0); // (2 pi i)^n t^{n-1} / (n-1)!
    let mut h = Complex64::new(0.0, 0.0);
    let mut dh = Complex64::new(0.0, 0.0);
    for j in 0..80 {
        let jf = j as f64;
        h += pw / (jf + 1.0 - a);
        dh += dpw / (jf + 1.0 - a);
        dpw = pw * w;
        pw = pw * w * t / (jf + 1.0);
        if pw.norm() < 1e-18 && dpw.norm() < 1e-18 {
            break;
        }
    }
    (h, dh)
}

/// One Gauss-Legendre panel; returns the 20-point value and its distance
/// to the 10-point value.
fn panel(lo: f64, hi: f64, a: f64) -> (Complex64, f64) {
    let (g10, g20) = GaussLegendre::pair();
    let f = |u: f64| cis_2pi(u) * u.powf(-a);
    let fine = g20.integrate_complex(lo, hi, f);
    let coarse = g10.integrate_complex(lo, hi, f);
    (fine, (fine - coarse).norm())
}

/// `int_lo^hi e^{2 pi i u} u^{-a} du` with panels split at half-periods.
pub fn osc_integral(lo: f64, hi: f64, a: f64) -> (Complex64, f64) {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut err = 0.0;
    if hi <= lo {
        return (acc, err);
    }
    let mut t = lo;
    if lo < 0.25 {
        let s = hi.min(0.25);
        acc += g_series(s, a) - g_series(lo, a);
        err += 1e-16 * acc.norm();
        t = s;
    }
    // Compensated accumulation across panels.
    let mut comp = Complex64::new(0.0, 0.0);
    while t < hi {
        let next = (((2.0 * t).floor() + 1.0) * 0.5).min(hi);
        let (v, e) = panel(t, next, a);
        let y = v - comp;
        let s = acc + y;
        comp = (s - acc) - y;
        acc = s;
        err += e;
        t = next;
    }
    (acc, err)
}

/// `int_t^inf e^{2 pi i u} u^{-a} du` by its asymptotic expansion, valid
/// for `t` of order ten and beyond. Returns the value and a bound on the
/// truncation error.
pub fn osc_tail(t: f64, a: f64) -> (Complex64, f64) {
    let z = Complex64::new(0.0, -1.0 / (TWO_PI * t));
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut last = 1.0;
    for j in 0..200 {
        let next = term * z * (a + j as f64);
        let m = next.norm();
        if m > last {
            break;
        }
        sum += next;
        term = next;
        last = m;
        if m < 1e-18 {
            break;
        }
    }
    let pre = Complex64::new(0.0, 1.0 / TWO_PI) * cis_2pi(t) * t.powf(-a);
    (pre * sum, pre.norm() * last)
}

/// Quadrature of the coefficients over `(k eps/N, k)`.
pub fn osc_coeffs(k: u64, p: &Params) -> OscCoeffs {
    let (v, err) = osc_integral(k as f64 * p.delta(), k as f64, p.a());
    OscCoeffs { b: v.re, d: v.im, k, quadrature_error: err }
}

const LIMIT_CUT: f64 = 64.0;

fn limit_integral(a: f64) -> (Complex64, f64) {
    let (head, e1) = osc_integral(0.0, LIMIT_CUT, a);
    let (tail, e2) = osc_tail(LIMIT_CUT, a);
    (head + tail, e1 + e2)
}

/// Quadrature on `(0, 64)` plus the asymptotic tail.
pub fn limit_coeffs(a: f64) -> LimitCoeffs {
    let (v, _) = limit_integral(a);
    LimitCoeffs { b: v.re, d: v.im }
}

/// `(2 pi)^{a-1} Gamma(1-a) (sin, cos)(pi a / 2)`.
pub fn limit_coeffs_closed_form(a: f64) -> LimitCoeffs {
    let g = statrs::function::gamma::gamma(1.0 - a) * TWO_PI.powf(a - 1.0);
    LimitCoeffs { b: g * (0.5 * PI * a).sin(), d: g * (0.5 * PI * a).cos() }
}

const TABLE_SWITCH: f64 = 16.0;

/// Constant-time evaluation of `G(t) = int_0^t e^{2 pi i u} u^{-a} du` for
/// batches of coefficients: series below 1/4, tabulated half-periods plus
/// one panel up to 16, and `G(inf)` minus the asymptotic tail beyond.
#[derive(Debug, Clone)]
pub struct OscTable {
    a: f64,
    delta: f64,
    halves: Vec<Complex64>,
    g_inf: Complex64,
}

impl OscTable {
    pub fn new(p: &Params) -> Self {
        let a = p.a();
        let mut halves = vec![Complex64::new(0.0, 0.0); 2 * TABLE_SWITCH as usize + 1];
        halves[1] = g_series(0.25, a) + panel(0.25, 0.5, a).0;
        for j in 2..halves.len() {
            halves[j] = halves[j - 1] + panel((j - 1) as f64 * 0.5, j as f64 * 0.5, a).0;
        }
        let (g_inf, _) = limit_integral(a);
        Self { a, delta: p.delta(), halves, g_inf }
    }

    pub fn g(&self, t: f64) -> Complex64 {
        if t <= 0.25 {
            g_series(t, self.a)
        } else if t < TABLE_SWITCH {
            let j = (2.0 * t).floor() as usize;
            let (base, from) = if j == 0 {
                (g_series(0.25, self.a), 0.25)
            } else {
                (self.halves[j], j as f64 * 0.5)
            };
            if t > from {
                base + panel(from, t, self.a).0
            } else {
                base
            }
        } else {
            self.g_inf - osc_tail(t, self.a).0
        }
    }

    pub fn limit(&self) -> LimitCoeffs {
        LimitCoeffs { b: self.g_inf.re, d: self.g_inf.im }
    }

    /// `(b_k, d_k)`.
    pub fn coeffs(&self, k: u64) -> (f64, f64) {
        let kf = k as f64;
        let v = self.g(kf) - self.g(kf * self.delta);
        (v.re, v.im)
    }
}

/// Which integrals stand in for the finite-range coefficients in the
/// resonant approximation and in the limit kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoeffRule {
    /// The constants `b`, `d` over `(0, inf)`.
    Constant,
    /// `int_{X eps}^{inf}`, keeping the lower limit of the finite-range
    /// integrals, which stays fixed in lattice coordinates as `N` grows.
    Truncated,
}

const UPPER_LO: f64 = 0.5;
const LOW_STEPS_PER_UNIT: f64 = 1024.0;
/// Intervals of the far table over `s = 1/t` in `[0, 2]`.
const FAR_STEPS: usize = 4096;
const FAR_SWITCH: f64 = 64.0;

/// `U(t) = int_t^inf e^{2 pi i u} u^{-a} du`. Below `1/2` it is `G(inf)`
/// minus `t^{1-a} H(t)` with `H` tabulated; above, `U = e^{2 pi i t} t^{-a}
/// V(1/t)` with the non-oscillating `V` tabulated on `[0, 2]`. Both tables
/// use cubic Hermite interpolation.
#[derive(Debug, Clone)]
pub struct UpperTable {
    a: f64,
    g_inf: Complex64,
    /// `(H, h H')` of `g_reduced` on `[0, 1/2]`.
    low: Vec<[Complex64; 2]>,
    /// `(V, h V')` on `s` in `[0, 2]`.
    far: Vec<[Complex64; 2]>,
}

#[inline]
fn hermite(table: &[[Complex64; 2]], s: f64) -> Complex64 {
    // `s >= 0` always; clamping in floating point keeps the cast cheap.
    let j = s.min((table.len() - 2) as f64) as i32 as usize;
    let ([v0, d0], [v1, d1]) = (table[j], table[j + 1]);
    let u = s - j as f64;
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    v0 * h00 + d0 * h10 + v1 * h01 + d1 * h11
}

/// `V(s)` and `dV/ds` from the asymptotic series
/// `V = (i / 2 pi) sum_j (a)_j (-i s / 2 pi)^j`, for small `s`.
fn far_series(s: f64, a: f64) -> (Complex64, Complex64) {
    let z = Complex64::new(0.0, -1.0 / TWO_PI);
    let mut coef = Complex64::new(1.0, 0.0); // (a)_j z^j
    let mut v = Complex64::new(0.0, 0.0);
    let mut dv = Complex64::new(0.0, 0.0);
    let mut sp = 1.0;
    for j in 0..60 {
        let jf = j as f64;
        v += coef * sp;
        if j + 1 < 60 {
            let next = coef * z * (a + jf);
            dv += next * ((jf + 1.0) * sp);
            coef = next;
        }
        sp *= s;
        if (coef * sp).norm() < 1e-20 {
            break;
        }
    }
    let pre = Complex64::new(0.0, 1.0 / TWO_PI);
    (pre * v, pre * dv)
}

impl UpperTable {
    pub fn new(a: f64) -> Self {
        let p = Params::new(a, 1, 0.5).expect("valid exponent");
        let table = OscTable::new(&p);
        let g_inf = table.g_inf;
        let h = 1.0 / LOW_STEPS_PER_UNIT;
        let n_low = (UPPER_LO * LOW_STEPS_PER_UNIT) as usize + 1;
        let low = (0..n_low)
            .map(|j| {
                let (v, d) = g_reduced(j as f64 * h, a);
                [v, d * h]
            })
            .collect();
        let hs = (1.0 / UPPER_LO) / FAR_STEPS as f64;
        let far = (0..=FAR_STEPS)
            .map(|j| {
                let s = j as f64 * hs;
                if s == 0.0 || 1.0 / s >= FAR_SWITCH {
                    let (v, d) = far_series(s, a);
                    return [v, d * hs];
                }
                let t = 1.0 / s;
                let u = g_inf - table.g(t);
                let v = u * cis_2pi(-t) * t.powf(a);
                // dV/dt = -2 pi i V + a V / t - 1 and ds = -dt / t^2.
                let dvdt = Complex64::new(0.0, -TWO_PI) * v + v * (a / t) - 1.0;
                [v, -dvdt * (t * t) * hs]
            })
            .collect();
        Self { a, g_inf, low, far }
    }

    /// Process-wide instance for exponent `a`.
    pub fn shared(a: f64) -> Arc<UpperTable> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<UpperTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(a.to_bits()).or_insert_with(|| Arc::new(UpperTable::new(a))).clone()
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `int_0^inf`.
    pub fn full(&self) -> Complex64 {
        self.g_inf
    }

    #[inline]
    pub fn eval(&self, t: f64) -> Complex64 {
        if !(t > 0.0) {
            return self.g_inf;
        }
        self.eval_with(t, cis_2pi(t), pow_neg(t, self.a))
    }

    /// `U(t)` given `e^{2 pi i t}` and `t^{-a}`.
    #[inline]
    pub fn eval_with(&self, t: f64, e2: Complex64, t_neg_a: f64) -> Complex64 {
        if t < UPPER_LO {
            if !(t > 0.0) {
                return self.g_inf;
            }
            let h = hermite(&self.low, t * LOW_STEPS_PER_UNIT);
            return self.g_inf - h * (t * t_neg_a);
        }
        e2 * (t_neg_a * hermite(&self.far, FAR_STEPS as f64 * UPPER_LO / t))
    }

    /// `U(t)` given `1/t`, `e^{2 pi i t}` and `t^{-a}`.
    #[inline]
    pub fn eval_inv(&self, t: f64, inv_t: f64, e2: Complex64, t_neg_a: f64) -> Complex64 {
        if t < UPPER_LO {
            return self.eval_with(t, e2, t_neg_a);
        }
        e2 * (t_neg_a * hermite(&self.far, (FAR_STEPS as f64 * UPPER_LO) * inv_t))
    }

    /// Coefficient pair `(b, d)` for lower limit `t` under `rule`.
    #[inline]
    pub fn coeffs(&self, t: f64, rule: CoeffRule) -> (f64, f64) {
        let v = match rule {
            CoeffRule::Constant => self.g_inf,
            CoeffRule::Truncated => self.eval(t),
        };
        (v.re, v.im)
    }
}

/// The four ratios whose suprema are bounded by a constant depending only
/// on `a`: `|b| max(1, r^a)`, `|d| max(1, r^a)`,
/// `|sin 2 pi r| max(1, r^{-a})`, `|cos 2 pi r - 1| max(1, r^{-a})`, with
/// `r = k eps / N`.
pub fn envelope_ratios(k: u64, p: &Params, c: &OscCoeffs) -> [f64; 4] {
    let r = k as f64 * p.delta();
    let a = p.a();
    let up = r.powf(a).max(1.0);
    let down = r.powf(-a).max(1.0);
    let (s, co) = (TWO_PI * r).sin_cos();
    [c.b.abs() * up, c.d.abs() * up, s.abs() * down, (co - 1.0).abs() * down]
}
