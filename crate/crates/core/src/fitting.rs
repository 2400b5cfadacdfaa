//! Log-log rate fitting and fitted-constant envelope checks.

use crate::{Error, Result};

/// Least-squares line through (log k, log e).
///
/// Returns (slope, intercept, residual_spread), where the spread is the
/// full range of the fit residuals expressed in decades. Rejects fewer
/// than three points and non-positive error values.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 3 {
        return Err(Error::Other(format!(
            "rate fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    for &(k, e) in points {
        if !(k > 0.0) || !(e > 0.0) {
            return Err(Error::Other(format!(
                "rate fit requires positive (k, e) pairs, got ({k}, {e})"
            )));
        }
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Other("rate fit needs at least two distinct k".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (x, y) in xs.iter().zip(&ys) {
        let r = y - (slope * x + intercept);
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((slope, intercept, (hi - lo) / std::f64::consts::LN_10))
}

/// Fitted-constant check for an upper-bound envelope |f| ≤ M g.
///
/// Input: for each parameter group (typically one per k), the largest
/// observed ratio |f|/g. Returns (M, spread) where M is the overall
/// constant and spread is the ratio between the largest and smallest
/// per-group maxima, in decades. A bounded quantity keeps the spread small;
/// genuine growth in k pushes it past a decade.
pub fn envelope_constant(per_group_max: &[f64]) -> Result<(f64, f64)> {
    if per_group_max.is_empty() {
        return Err(Error::Other("envelope check needs at least one group".into()));
    }
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for &r in per_group_max {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::Other(format!("envelope ratio {r} must be positive and finite")));
        }
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok((hi, (hi / lo).log10()))
}

/// Tiny deterministic generator for reproducible synthetic noise in tests
/// and seeded sampling in the experiment driver (xorshift64*).
#[derive(Debug, Clone)]
pub struct SmallRng {
    state: u64,
}

impl SmallRng {
    pub fn new(seed: u64) -> Self {
        SmallRng {
            state: seed.wrapping_mul(0x9E3779B97F4A7C15).max(1),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545F4914F6CDD1D)
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in [lo, hi).
    pub fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }
}
