//! Sample statistics for the Monte Carlo harness: moments and the two-sample
//! Kolmogorov–Smirnov test with asymptotic p-value.

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (denominator n − 1).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standardized third central moment (biased form; diagnostic only).
pub fn skewness(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let n = xs.len() as f64;
    let m2 = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    let m3 = xs.iter().map(|x| (x - m).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

#[derive(Clone, Copy, Debug, serde::Serialize)]
pub struct KsResult {
    pub d: f64,
    pub p_value: f64,
}

/// Kolmogorov distribution survival function Q(λ) = P(K > λ). The
/// alternating series 2Σ(−1)^{j−1}e^{−2j²λ²} converges fast for large λ; for
/// small λ the theta-function form of the CDF is used instead.
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        let mut cdf = 0.0;
        for j in 1..100u32 {
            let k = (2 * j - 1) as f64;
            let term = (-k * k * std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda)).exp();
            cdf += term;
            if term < 1e-18 * cdf.max(1e-300) {
                break;
            }
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / lambda;
        (1.0 - cdf).clamp(0.0, 1.0)
    } else {
        let mut q = 0.0;
        let mut sign = 1.0;
        for j in 1..100u32 {
            let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
            q += sign * term;
            sign = -sign;
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * q).clamp(0.0, 1.0)
    }
}

/// Two-sample KS test: D is the sup distance between empirical CDFs (exact,
/// tie-aware merge walk), p the asymptotic value with the small-sample
/// effective-size correction λ = (√nₑ + 0.12 + 0.11/√nₑ)·D.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InvalidArgument(
            "ks_two_sample needs at least 2 points per sample".into(),
        ));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = a[i].min(b[j]);
        while i < n && a[i] == v {
            i += 1;
        }
        while j < m && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    // once one sample is exhausted the gap only shrinks back to 0
    let ne = (n as f64 * m as f64) / (n + m) as f64;
    let lambda = (ne.sqrt() + 0.12 + 0.11 / ne.sqrt()) * d;
    Ok(KsResult {
        d,
        p_value: kolmogorov_sf(lambda),
    })
}
