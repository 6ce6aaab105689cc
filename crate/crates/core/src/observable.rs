//! The singular observable, its capped version and direct Birkhoff sums.

use rand::Rng;
use rayon::prelude::*;

use crate::numerics::{frac, frac_mul, pow_neg, NeumaierSum};
use crate::rng::Streams;
use crate::{Error, Params, Result};

/// `x^{-a} - 1/(1-a)` for `x > 0`.
pub fn phi(x: f64, a: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::SingularHit { index: None });
    }
    Ok(pow_neg(x, a) - 1.0 / (1.0 - a))
}

/// The observable capped at `(1/(1-a)) (N^a/eps^a - 1)` on `[0, eps/N)`.
pub fn phi_trunc(x: f64, p: &Params) -> f64 {
    if x < p.delta() {
        p.cap()
    } else {
        pow_neg(x, p.a()) - p.c0()
    }
}

/// `{x + n alpha}` in `[0, 1)`.
#[inline]
pub fn orbit_point(alpha: f64, x: f64, n: u64) -> f64 {
    frac(x + frac_mul(n as i64, alpha))
}

/// `(1/N^a) sum_{n<N} f({x + n alpha})` with `f` the observable or its
/// capped version.
pub fn birkhoff_norm(alpha: f64, x: f64, p: &Params, truncated: bool) -> Result<f64> {
    let a = p.a();
    let c0 = p.c0();
    let mut s = NeumaierSum::new();
    if truncated {
        let delta = p.delta();
        let cap = p.cap();
        for n in 0..p.n() {
            let y = orbit_point(alpha, x, n);
            s.add(if y < delta { cap } else { pow_neg(y, a) - c0 });
        }
    } else {
        for n in 0..p.n() {
            let y = orbit_point(alpha, x, n);
            if y == 0.0 {
                return Err(Error::SingularHit { index: Some(n) });
            }
            s.add(pow_neg(y, a) - c0);
        }
    }
    Ok(s.value() / p.n_pow_a())
}

/// `S/N^a` of the uncapped observable at `n` uniform `(alpha, x)`; draw
/// `i` comes from stream `i`, so the same points are used for every `N`.
pub fn sample_norms(p: &Params, n: u64, streams: &Streams) -> Result<Vec<f64>> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = streams.stream(i);
            let (alpha, x): (f64, f64) = (rng.gen(), rng.gen());
            birkhoff_norm(alpha, x, p, false)
        })
        .collect()
}

/// Smallest orbit point among the first `N`; the capped and uncapped sums
/// differ exactly when it falls below `eps/N`.
pub fn orbit_min(alpha: f64, x: f64, n: u64) -> f64 {
    (0..n)
        .map(|i| orbit_point(alpha, x, i))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::GaussLegendre;
    use approx::assert_relative_eq;

    #[test]
    fn phi_examples() {
        assert_eq!(phi(0.25, 0.5).unwrap(), 0.0);
        assert_eq!(phi(1.0, 0.5).unwrap(), -1.0);
        assert_eq!(phi(0.0, 0.5), Err(Error::SingularHit { index: None }));
        assert!(phi(-0.1, 0.5).is_err());
    }

    #[test]
    fn phi_integrates_to_zero() {
        // Substituting x = t^q with q = 4/(1-a) makes the integrand smooth.
        for a in [0.3, 0.5, 0.7] {
            let q = 4.0 / (1.0 - a);
            let g = GaussLegendre::new(40);
            let mut total = 0.0;
            let panels = 64;
            for i in 0..panels {
                let lo = i as f64 / panels as f64;
                let hi = (i + 1) as f64 / panels as f64;
                total += g.integrate(lo, hi, |t| {
                    let x = t.powf(q);
                    q * t.powf(q - 1.0) * phi(x, a).unwrap()
                });
            }
            assert!(total.abs() < 1e-10, "a = {a}: {total}");
        }
    }

    #[test]
    fn midpoint_mean_with_tail_converges() {
        // Midpoint rule in log x over (delta, 1).
        for a in [0.3, 0.5] {
            for delta in [1e-2, 1e-4, 1e-6] {
                let m = 200_000;
                let lo = f64::ln(delta);
                let h = -lo / m as f64;
                let mid: f64 = (0..m)
                    .map(|i| {
                        let x = (lo + (i as f64 + 0.5) * h).exp();
                        phi(x, a).unwrap() * x * h
                    })
                    .sum();
                let tail = delta.powf(1.0 - a) / (1.0 - a) - delta / (1.0 - a);
                assert!((mid + tail).abs() < 1e-8, "a = {a}, delta = {delta}");
            }
        }
    }

    #[test]
    fn trunc_examples() {
        let p = Params::new(0.5, 100, 0.01).unwrap();
        assert_relative_eq!(phi_trunc(1e-5, &p), 198.0, max_relative = 1e-13);
        assert_eq!(phi_trunc(0.25, &p), 0.0);
        let d = p.delta();
        assert_eq!(phi_trunc(d, &p), phi(d, 0.5).unwrap());
        assert_eq!(phi_trunc(0.0, &p), p.cap());
    }

    #[test]
    fn birkhoff_examples() {
        let p = Params::new(0.5, 16, 0.1).unwrap();
        assert_eq!(birkhoff_norm(0.0, 0.25, &p, false).unwrap(), 0.0);
        let p1 = Params::new(0.5, 1, 0.1).unwrap();
        // x = 1 is reduced mod 1 onto the singular point.
        assert_eq!(
            birkhoff_norm(0.0, 1.0, &p1, false),
            Err(Error::SingularHit { index: Some(0) })
        );
        assert_eq!(birkhoff_norm(0.0, 1.0 - 1e-16, &p1, false).unwrap(), phi(1.0 - 1e-16, 0.5).unwrap());
    }

    #[test]
    fn capped_and_plain_agree_away_from_zero() {
        let p = Params::new(0.5, 1000, 0.1).unwrap();
        let alpha = std::f64::consts::SQRT_2 - 1.0;
        let x = 0.3;
        assert!(orbit_min(alpha, x, 1000) >= p.delta());
        assert_eq!(
            birkhoff_norm(alpha, x, &p, true).unwrap(),
            birkhoff_norm(alpha, x, &p, false).unwrap()
        );
    }

    #[test]
    fn sampled_norms_follow_the_streams() {
        let p = Params::new(0.5, 200, 0.1).unwrap();
        let s = Streams::new(3, "norms");
        let v = sample_norms(&p, 50, &s).unwrap();
        assert_eq!(v, sample_norms(&p, 50, &s).unwrap());
        let mut rng = s.stream(7);
        let (alpha, x): (f64, f64) = (rng.gen(), rng.gen());
        assert_eq!(v[7], birkhoff_norm(alpha, x, &p, false).unwrap());
    }
}
