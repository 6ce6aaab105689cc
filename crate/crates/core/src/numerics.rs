//! Floating-point helpers: error-free products, exact fractional parts of
//! integer multiples, trig with argument reduction, compensated sums,
//! Gauss-Legendre rules and the complex exponential integral.

use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::OnceLock;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `a * b == hi + lo` exactly (barring overflow).
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let hi = a * b;
    (hi, a.mul_add(b, -hi))
}

/// `a + b == s + e` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// Representative of `x` mod 1 in `[0, 1)`.
#[inline]
pub fn frac(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        r - 1.0
    } else {
        r
    }
}

/// `{k x}` in `[0, 1)`, with `k x` formed exactly as a double-double.
#[inline]
pub fn frac_mul(k: i64, x: f64) -> f64 {
    debug_assert!(k.unsigned_abs() < 1 << 53);
    let (hi, lo) = two_prod(k as f64, x);
    frac(frac(hi) + lo)
}

/// `k x` mod 2 in `[0, 2)`.
#[inline]
pub fn mod2_mul(k: i64, x: f64) -> f64 {
    let (hi, lo) = if k.unsigned_abs() < 1 << 53 {
        two_prod(k as f64, x)
    } else {
        // Split k so each partial product stays exact.
        let k_hi = (k >> 26) << 26;
        let (a, b) = two_prod(k_hi as f64, x);
        let (c, d) = two_prod((k - k_hi) as f64, x);
        let a = a - 2.0 * (a * 0.5).floor();
        let (s, e) = two_sum(a, c);
        (s, e + b + d)
    };
    let r = hi - 2.0 * (hi * 0.5).floor();
    let r = r + lo;
    let r = r - 2.0 * (r * 0.5).floor();
    if r >= 2.0 {
        r - 2.0
    } else {
        r
    }
}

/// Signed fractional part of `k x` in `(-1/2, 1/2]` together with the
/// integer `k'` such that `k x + k'` equals it.
#[inline]
pub fn signed_frac_mul(k: i64, x: f64) -> (f64, i64) {
    let (hi, lo) = two_prod(k as f64, x);
    let fl = hi.floor();
    let mut f = (hi - fl) + lo;
    let mut n = fl as i64;
    if f >= 1.0 {
        f -= 1.0;
        n += 1;
    } else if f < 0.0 {
        f += 1.0;
        n -= 1;
        if f >= 1.0 {
            f -= 1.0;
            n += 1;
        }
    }
    if f > 0.5 {
        (f - 1.0, -(n + 1))
    } else {
        (f, -n)
    }
}

/// `sin(pi t)` with exact reduction of `t` mod 2.
#[inline]
pub fn sin_pi(t: f64) -> f64 {
    let r = t - 2.0 * (t * 0.5).round();
    let r = if r > 0.5 {
        1.0 - r
    } else if r < -0.5 {
        -1.0 - r
    } else {
        r
    };
    (PI * r).sin()
}

/// `cos(pi t)` with exact reduction of `t` mod 2.
#[inline]
pub fn cos_pi(t: f64) -> f64 {
    let r = t - 2.0 * (t * 0.5).round();
    (PI * r).cos()
}

/// `(sin 2 pi t, cos 2 pi t)` after reducing `t` mod 1.
#[inline]
pub fn sin_cos_2pi(t: f64) -> (f64, f64) {
    let r = t - t.round();
    (2.0 * PI * r).sin_cos()
}

/// `e^{2 pi i t}`.
#[inline]
pub fn cis_2pi(t: f64) -> Complex64 {
    let (s, c) = sin_cos_2pi(t);
    Complex64::new(c, s)
}

/// `sin(pi z) / (pi z)`, continuous at 0.
#[inline]
pub fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let u = PI * z;
        let u2 = u * u;
        1.0 - u2 / 6.0 * (1.0 - u2 / 20.0)
    } else {
        sin_pi(z) / (PI * z)
    }
}

/// `x^{-a}`, with the common case `a = 1/2` done by a square root.
#[inline]
pub fn pow_neg(x: f64, a: f64) -> f64 {
    if a == 0.5 {
        1.0 / x.sqrt()
    } else {
        x.powf(-a)
    }
}

/// `x^{e}` for `e` in `(0, 1)`, with `e = 1/2` done by a square root.
#[inline]
pub fn pow_pos(x: f64, e: f64) -> f64 {
    if e == 0.5 {
        x.sqrt()
    } else {
        x.powf(e)
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<NeumaierSum>().value()
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp = 0.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
                }
                pp = nf * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() < 1e-16 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    /// Shared 10- and 20-point rules.
    pub fn pair() -> &'static (GaussLegendre, GaussLegendre) {
        static RULES: OnceLock<(GaussLegendre, GaussLegendre)> = OnceLock::new();
        RULES.get_or_init(|| (GaussLegendre::new(10), GaussLegendre::new(20)))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, lo: f64, hi: f64, f: F) -> f64 {
        let h = 0.5 * (hi - lo);
        let c = 0.5 * (hi + lo);
        let s: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(c + h * x))
            .sum();
        s * h
    }

    pub fn integrate_complex<F: Fn(f64) -> Complex64>(&self, lo: f64, hi: f64, f: F) -> Complex64 {
        let h = 0.5 * (hi - lo);
        let c = 0.5 * (hi + lo);
        let mut s = Complex64::new(0.0, 0.0);
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            s += f(c + h * x) * w;
        }
        s * h
    }
}

/// Generalized exponential integral `E_n(z) = int_1^inf e^{-z t} t^{-n} dt`
/// for `n >= 1` and complex `z` off the non-positive real axis.
pub fn expint(n: u32, z: Complex64) -> Complex64 {
    const MAXIT: usize = 100_000;
    const EPS: f64 = 1e-16;
    let nf = n as f64;
    if z.norm() > 1.0 {
        // Modified Lentz on the continued fraction.
        let tiny = 1e-300;
        let mut b = z + nf;
        let mut c = Complex64::new(1.0 / tiny, 0.0);
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAXIT {
            let fi = i as f64;
            let an = -fi * (nf - 1.0 + fi);
            b += 2.0;
            d = 1.0 / (d * an + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).norm() < 4.0 * EPS {
                break;
            }
        }
        h * (-z).exp()
    } else {
        let mut ans = if n == 1 {
            -z.ln() - EULER_GAMMA
        } else {
            Complex64::new(1.0 / (nf - 1.0), 0.0)
        };
        let mut fact = Complex64::new(1.0, 0.0);
        for i in 1..MAXIT {
            let fi = i as f64;
            fact *= -z / fi;
            let del = if i as u32 != n - 1 {
                -fact / (fi - nf + 1.0)
            } else {
                let psi = -EULER_GAMMA + (1..n).map(|j| 1.0 / j as f64).sum::<f64>();
                fact * (-z.ln() + psi)
            };
            ans += del;
            if del.norm() < ans.norm() * EPS {
                break;
            }
        }
        ans
    }
}

/// `B_{2j} / (2j)!` for `j = 1..=40`, index `j - 1`.
pub fn bernoulli_ratios() -> &'static [f64; 40] {
    static TABLE: OnceLock<[f64; 40]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [0.0; 40];
        for (i, slot) in t.iter_mut().enumerate() {
            let j = (i + 1) as i32;
            let s = 2 * j;
            // zeta(2j) by direct summation with an Euler-Maclaurin tail.
            let m = 1000.0f64;
            let mut z: f64 = (1..1000).rev().map(|n| (n as f64).powi(-s)).sum();
            let sf = s as f64;
            z += m.powf(1.0 - sf) / (sf - 1.0) + 0.5 * m.powi(-s) + sf * m.powi(-s - 1) / 12.0;
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            *slot = sign * 2.0 * z / (2.0 * PI).powi(s);
        }
        t
    })
}
