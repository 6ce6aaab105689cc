use serde::Serialize;

use crate::{Error, Result};

/// The triple `(a, N, eps)` and the cutoffs derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    a: f64,
    n: u64,
    eps: f64,
}

impl Params {
    pub fn new(a: f64, n: u64, eps: f64) -> Result<Self> {
        if !(a > 0.0 && a < 1.0) {
            return Err(Error::InvalidParams(format!("a = {a} not in (0, 1)")));
        }
        if n == 0 {
            return Err(Error::InvalidParams("N must be at least 1".into()));
        }
        if n >= 1 << 40 {
            return Err(Error::InvalidParams(format!("N = {n} too large")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParams(format!("eps = {eps} not in (0, 1)")));
        }
        let p = Self { a, n, eps };
        for (name, v) in [
            ("eps^(1+2a)", p.eps_bar()),
            ("eps^(1+a+2a^2)", p.eps_res()),
            ("eps^(1+2/a+2a)", p.eps_hat()),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!("{name} underflows")));
            }
        }
        if !(p.k_upper() < 9.0e15) {
            return Err(Error::InvalidParams("frequency cutoff N/eps^(1+2a) too large".into()));
        }
        Ok(p)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn n_f64(&self) -> f64 {
        self.n as f64
    }

    pub fn n_pow_a(&self) -> f64 {
        self.n_f64().powf(self.a)
    }

    /// `1 / (1 - a)`, the mean of `x^{-a}` on the unit interval.
    pub fn c0(&self) -> f64 {
        1.0 / (1.0 - self.a)
    }

    /// Width `eps / N` of the capped region.
    pub fn delta(&self) -> f64 {
        self.eps / self.n_f64()
    }

    /// Value of the capped observable on `[0, eps/N)`.
    pub fn cap(&self) -> f64 {
        self.c0() * (self.n_pow_a() / self.eps.powf(self.a) - 1.0)
    }

    pub fn eps_bar(&self) -> f64 {
        self.eps.powf(1.0 + 2.0 * self.a)
    }

    pub fn eps_res(&self) -> f64 {
        self.eps.powf(1.0 + self.a + 2.0 * self.a * self.a)
    }

    pub fn eps_hat(&self) -> f64 {
        self.eps.powf(1.0 + 2.0 / self.a + 2.0 * self.a)
    }

    /// Frequencies of the bar model satisfy `k < k_upper`.
    pub fn k_upper(&self) -> f64 {
        self.n_f64() / self.eps_bar()
    }

    /// Frequencies of the hat band satisfy `k > k_lower`; the exclusion set
    /// is built from `k <= k_lower`.
    pub fn k_lower(&self) -> f64 {
        self.eps_hat() * self.n_f64()
    }

    /// Resonance threshold on `k^{1-a} |{k alpha}|`.
    pub fn resonance_threshold(&self) -> f64 {
        1.0 / (self.eps_res() * self.n_pow_a())
    }

    /// Largest `k` with `k < k_upper`.
    pub fn last_k(&self) -> u64 {
        let u = self.k_upper();
        (u.ceil() as u64).saturating_sub(1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_inputs() {
        assert!(Params::new(0.0, 10, 0.1).is_err());
        assert!(Params::new(1.0, 10, 0.1).is_err());
        assert!(Params::new(0.5, 0, 0.1).is_err());
        assert!(Params::new(0.5, 10, 1.0).is_err());
        assert!(Params::new(0.5, 10, 0.0).is_err());
        assert!(Params::new(0.01, 10, 0.01).is_err());
    }

    #[test]
    fn derived_cutoffs() {
        let p = Params::new(0.5, 1000, 0.1).unwrap();
        assert!((p.k_upper() - 1.0e5).abs() < 1e-6);
        assert_eq!(p.last_k(), 99_999);
        assert!((p.cap() - 2.0 * (100.0 - 1.0)).abs() < 1e-10);
        assert!((p.delta() - 1e-4).abs() < 1e-20);
    }
}
