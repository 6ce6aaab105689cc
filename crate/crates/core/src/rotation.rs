//! Signed fractional parts `{k alpha}` and the resonant index sets.

use rayon::prelude::*;
use serde::Serialize;

use crate::numerics::{pow_pos, signed_frac_mul};
use crate::Params;

/// `value = k alpha + integer_part`, with `value` in `(-1/2, 1/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignedFrac {
    pub value: f64,
    pub integer_part: i64,
}

pub fn signed_frac(k: u64, alpha: f64) -> SignedFrac {
    let (value, integer_part) = signed_frac_mul(k as i64, alpha);
    SignedFrac { value, integer_part }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Band {
    /// `0 < k < N / eps^{1+2a}`.
    Full,
    /// Additionally `k > eps^{1+2/a+2a} N`.
    Hat,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResonantSet {
    pub indices: Vec<u64>,
    pub band: Band,
    /// Members with `{k alpha} = 0` exactly; terms dividing by it will fail.
    pub degenerate: Vec<u64>,
}

impl ResonantSet {
    pub fn empty(band: Band) -> Self {
        Self { indices: Vec::new(), band, degenerate: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Inclusive scan range of a band, `None` when empty.
pub fn scan_range(p: &Params, band: Band) -> Option<(u64, u64)> {
    let last = p.last_k();
    let first = match band {
        Band::Full => 1,
        Band::Hat => p.k_lower().floor() as u64 + 1,
    };
    (first <= last).then_some((first, last))
}

/// `k^{1-a} |{k alpha}| <= 1 / (eps^{1+a+2a^2} N^a)`.
#[inline]
pub fn is_resonant(k: u64, alpha: f64, p: &Params) -> bool {
    let (v, _) = signed_frac_mul(k as i64, alpha);
    pow_pos(k as f64, 1.0 - p.a()) * v.abs() <= p.resonance_threshold()
}

const CHUNK: u64 = 1 << 14;

fn scan(alpha: f64, p: &Params, first: u64, last: u64) -> (Vec<u64>, Vec<u64>) {
    let thr = p.resonance_threshold();
    let e = 1.0 - p.a();
    let starts: Vec<u64> = (first..=last).step_by(CHUNK as usize).collect();
    let parts: Vec<(Vec<u64>, Vec<u64>)> = starts
        .par_iter()
        .map(|&k0| {
            let k1 = (k0 + CHUNK - 1).min(last);
            // k^{1-a} >= k0^{1-a} on the chunk, so this rejects only
            // indices that certainly fail the exact test.
            let reject = thr / pow_pos(k0 as f64, e) * (1.0 + 1e-9);
            let mut hits = Vec::new();
            let mut degenerate = Vec::new();
            for k in k0..=k1 {
                let (v, _) = signed_frac_mul(k as i64, alpha);
                if v.abs() > reject {
                    continue;
                }
                if pow_pos(k as f64, e) * v.abs() <= thr {
                    hits.push(k);
                    if v == 0.0 {
                        degenerate.push(k);
                    }
                }
            }
            (hits, degenerate)
        })
        .collect();
    let mut hits = Vec::new();
    let mut degenerate = Vec::new();
    for (h, d) in parts {
        hits.extend(h);
        degenerate.extend(d);
    }
    (hits, degenerate)
}

/// All `k` in the band's range satisfying the resonance inequality.
pub fn resonant_set(alpha: f64, p: &Params, band: Band) -> ResonantSet {
    match scan_range(p, band) {
        None => ResonantSet::empty(band),
        Some((first, last)) => {
            let (indices, degenerate) = scan(alpha, p, first, last);
            ResonantSet { indices, band, degenerate }
        }
    }
}

/// Whether some `k <= eps^{1+2/a+2a} N` is resonant.
pub fn in_exclusion(alpha: f64, p: &Params) -> bool {
    let last = p.k_lower().floor() as u64;
    (1..=last).any(|k| is_resonant(k, alpha, p))
}
