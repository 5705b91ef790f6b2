//! Spectral constants of the L² modulus limit theory.
//!
//! The index-level constants
//!
//!   c_{β,0} = (2/π)∫₀^∞ sin²(p/2) p^{-β} dp,
//!   c_{β,1} = (16/π)∫₀^∞ sin⁴(p/2) p^{-2β} dp,
//!
//! and their finite-h counterparts for a general exponent ψ,
//!
//!   c_{ψ,h,0} = (1/π)∫₀^∞ (1 − cos ph)/ψ(p) dp,
//!   c_{ψ,h,1} = (16/π)∫₀^∞ sin⁴(ph/2)/ψ²(p) dp,
//!
//! linked by the limits h·ψ(1/h)·c_{ψ,h,0} → c_{β,0} and
//! h·ψ²(1/h)·c_{ψ,h,1} → c_{β,1} as h ↓ 0, where β is the top index of ψ.
//! For a pure stable exponent both rescalings are exact at every h, which the
//! tests exploit.
//!
//! All integrals are mean-split: the oscillating factor is decomposed into its
//! average plus cosines, the average part of the tail is integrated in closed
//! form or by inverse substitution, and the cosine parts by Euler-accelerated
//! half-period sums. Tolerances are set relative to the natural scale of each
//! constant so small h costs no relative accuracy.

use crate::density::DensityEvaluator;
use crate::error::{Error, Result};
use crate::exponent::LevyExponent;
use crate::quad;
use serde::Serialize;
use std::f64::consts::PI;

fn check_index_range(beta: f64) -> Result<()> {
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "index must lie in (1, 2], got {beta}"
        )));
    }
    Ok(())
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "h must be positive and finite, got {h}"
        )));
    }
    Ok(())
}

/// c_{β,0} = (2/π)∫₀^∞ sin²(p/2) p^{-β} dp, to absolute accuracy ~1e-9.
/// Closed checks: 1/2 at β = 2, √(2/π) at β = 3/2.
pub fn c_beta_0(beta: f64) -> Result<f64> {
    check_index_range(beta)?;
    let tol = 1e-9;
    // 2 sin²(p/2) = 1 − cos p; head to P0, then the mean and cosine tails.
    let p0 = 8.0 * PI;
    let head = quad::oscillatory(
        |p| (1.0 - p.cos()) * p.powf(-beta),
        0.0,
        p0,
        1.0,
        0.3 * tol * PI,
        None,
    )?;
    let mean_tail = p0.powf(1.0 - beta) / (beta - 1.0);
    let cos_tail = quad::cos_tail(|p| p.powf(-beta), 1.0, p0, 0.3 * tol * PI)?;
    Ok((head.value + mean_tail - cos_tail.value) / PI)
}

/// c_{β,1} = (16/π)∫₀^∞ sin⁴(p/2) p^{-2β} dp, to absolute accuracy ~1e-9.
/// Closed checks: 2/3 at β = 2, 4·ln2/π at β = 3/2.
pub fn c_beta_1(beta: f64) -> Result<f64> {
    check_index_range(beta)?;
    let tol = 1e-9;
    // 16 sin⁴(p/2) = 6 − 8 cos p + 2 cos 2p.
    let p0 = 8.0 * PI;
    let head = quad::oscillatory(
        |p| {
            let s = (0.5 * p).sin();
            16.0 * s.powi(4) * p.powf(-2.0 * beta)
        },
        0.0,
        p0,
        2.0,
        0.3 * tol * PI,
        None,
    )?;
    let mean_tail = 6.0 * p0.powf(1.0 - 2.0 * beta) / (2.0 * beta - 1.0);
    let c1 = quad::cos_tail(|p| p.powf(-2.0 * beta), 1.0, p0, 0.05 * tol * PI)?;
    let c2 = quad::cos_tail(|p| p.powf(-2.0 * beta), 2.0, p0, 0.05 * tol * PI)?;
    Ok((head.value + mean_tail - 8.0 * c1.value + 2.0 * c2.value) / PI)
}

/// c_{ψ,h,0} = (1/π)∫₀^∞ (1 − cos ph)/ψ(p) dp, accurate to ~1e-8 relative
/// to its natural scale 1/(h ψ(1/h)).
pub fn c_psi_h_0(exponent: &LevyExponent, h: f64) -> Result<f64> {
    check_h(h)?;
    let scale = 1.0 / (h * exponent.eval_psi(1.0 / h));
    let tol = 1e-9 * scale * PI;
    let p0 = 4.0 * PI / h;
    let head = quad::oscillatory(
        |p| {
            if p == 0.0 {
                return 0.0;
            }
            // 1 − cos(ph) = 2 sin²(ph/2), stable against cancellation.
            let s = (0.5 * p * h).sin();
            2.0 * s * s / exponent.eval_psi(p)
        },
        0.0,
        p0,
        h,
        0.3 * tol,
        None,
    )?;
    let mean_tail = quad::tail_by_inversion(|p| 1.0 / exponent.eval_psi(p), p0, 0.3 * tol)?;
    let cos_tail = quad::cos_tail(|p| 1.0 / exponent.eval_psi(p), h, p0, 0.3 * tol)?;
    Ok((head.value + mean_tail.value - cos_tail.value) / PI)
}

/// Same constant from the time side, ∫₀^∞ (p_s(0) − p_s(h)) ds: the bulk
/// s ∈ [δ, S] integrates pointwise density differences; the endcaps are
/// restored by the exact time-slab kernels (1 − e^{-δψ})/ψ and e^{-Sψ}/ψ.
/// Good to ~1e-6 relative; serves as an independent cross-check of
/// `c_psi_h_0`.
pub fn c_psi_h_0_time_domain(exponent: &LevyExponent, h: f64) -> Result<f64> {
    check_h(h)?;
    let scale = 1.0 / (h * exponent.eval_psi(1.0 / h));
    let tol = 1e-7 * scale;
    let (delta, s_max) = (0.25_f64, 40.0_f64);

    let ev = DensityEvaluator::new(exponent.clone());
    let bulk = quad::adaptive(
        |s| match (ev.density(s, 0.0), ev.density(s, h)) {
            (Ok(a), Ok(b)) => a - b,
            _ => f64::NAN,
        },
        delta,
        s_max,
        0.3 * tol,
        4000,
    )?;

    // ∫₀^δ (p_s(0) − p_s(h)) ds = (1/π)∫₀^∞ (1 − cos ph)(1 − e^{-δψ})/ψ dp.
    let head_kernel = |p: f64| {
        let psi = exponent.eval_psi(p);
        if psi == 0.0 {
            delta
        } else {
            (-(-delta * psi).exp_m1()) / psi
        }
    };
    let p_split = 4.0 * PI / h;
    let head_osc = quad::oscillatory(
        |p| {
            let s = (0.5 * p * h).sin();
            2.0 * s * s * head_kernel(p)
        },
        0.0,
        p_split,
        h,
        0.1 * tol * PI,
        None,
    )?;
    let head_mean = quad::tail_by_inversion(head_kernel, p_split, 0.1 * tol * PI)?;
    let head_cos = quad::cos_tail(head_kernel, h, p_split, 0.1 * tol * PI)?;
    let head = (head_osc.value + head_mean.value - head_cos.value) / PI;

    // ∫_S^∞ (p_s(0) − p_s(h)) ds = (1/π)∫₀^∞ (1 − cos ph) e^{-Sψ}/ψ dp.
    let tail_kernel = |p: f64| {
        let psi = exponent.eval_psi(p);
        (-s_max * psi).exp() / psi
    };
    let tail_cut = exponent.psi_inverse(37.0 / s_max)?;
    let env = |p: f64| {
        let psi = exponent.eval_psi(p);
        2.0 * (-s_max * psi).exp() / psi
    };
    let tail = quad::oscillatory(
        |p| {
            if p == 0.0 {
                return 0.0;
            }
            let s = (0.5 * p * h).sin();
            2.0 * s * s * tail_kernel(p)
        },
        0.0,
        tail_cut,
        h.max(1.0),
        0.1 * tol * PI,
        Some(&env),
    )?;

    Ok(bulk.value + head + tail.value / PI)
}

/// c_{ψ,h,1} = (16/π)∫₀^∞ sin⁴(ph/2)/ψ²(p) dp, accurate to ~1e-8 relative
/// to its natural scale 1/(h ψ²(1/h)).
pub fn c_psi_h_1(exponent: &LevyExponent, h: f64) -> Result<f64> {
    check_h(h)?;
    let psi_inv_h = exponent.eval_psi(1.0 / h);
    let scale = 1.0 / (h * psi_inv_h * psi_inv_h);
    let tol = 1e-9 * scale * PI;
    let p0 = 4.0 * PI / h;
    let head = quad::oscillatory(
        |p| {
            if p == 0.0 {
                return 0.0;
            }
            let s = (0.5 * p * h).sin();
            let psi = exponent.eval_psi(p);
            16.0 * s.powi(4) / (psi * psi)
        },
        0.0,
        p0,
        2.0 * h,
        0.3 * tol,
        None,
    )?;
    let inv_sq = |p: f64| {
        let psi = exponent.eval_psi(p);
        1.0 / (psi * psi)
    };
    // 16 sin⁴(ph/2) = 6 − 8 cos(ph) + 2 cos(2ph).
    let mean_tail = quad::tail_by_inversion(inv_sq, p0, 0.05 * tol)?;
    let c1 = quad::cos_tail(inv_sq, h, p0, 0.05 * tol)?;
    let c2 = quad::cos_tail(inv_sq, 2.0 * h, p0, 0.05 * tol)?;
    Ok((head.value + 6.0 * mean_tail.value - 8.0 * c1.value + 2.0 * c2.value) / PI)
}

/// One h of the finite-h-to-limit comparison.
#[derive(Clone, Debug, Serialize)]
pub struct LimitRow {
    pub h: f64,
    pub c0: f64,
    pub c1: f64,
    /// h·ψ(1/h)·c0; converges to c_{β,0}.
    pub scaled_0: f64,
    /// h·ψ²(1/h)·c1; converges to c_{β,1}.
    pub scaled_1: f64,
    /// Signed deviations scaled − limit. These can change sign: for a
    /// mixture the scaled sequence may cross its limit on the way down.
    pub dev_0: f64,
    pub dev_1: f64,
}

/// Finite-h constants against their h → 0 limits over an h schedule.
#[derive(Clone, Debug, Serialize)]
pub struct ConstantsTable {
    pub exponent: String,
    pub beta_infinity: f64,
    pub c_beta_0: f64,
    pub c_beta_1: f64,
    pub rows: Vec<LimitRow>,
    /// |scaled(h_{k+1}) − scaled(h_k)| per column.
    pub successive_diffs_0: Vec<f64>,
    pub successive_diffs_1: Vec<f64>,
    /// Aitken Δ² extrapolation of the last three scaled values. With a
    /// geometric h schedule the deviations decay geometrically in log h,
    /// which Δ² removes exactly to first order.
    pub extrapolated_0: f64,
    pub extrapolated_1: f64,
}

fn aitken(s: &[f64]) -> f64 {
    let n = s.len();
    if n < 3 {
        return s[n - 1];
    }
    let (s1, s2, s3) = (s[n - 3], s[n - 2], s[n - 1]);
    let den = (s3 - s2) - (s2 - s1);
    if den.abs() < 1e-13 * s3.abs().max(1e-300) {
        return s3;
    }
    s3 - (s3 - s2) * (s3 - s2) / den
}

/// Builds the convergence table h ↦ (c_{ψ,h,0}, c_{ψ,h,1}) with rescalings
/// and extrapolation. The schedule must be strictly decreasing.
pub fn limit_table(exponent: &LevyExponent, h_schedule: &[f64]) -> Result<ConstantsTable> {
    if h_schedule.len() < 2 {
        return Err(Error::InvalidArgument(
            "limit table needs at least two h values".into(),
        ));
    }
    for w in h_schedule.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidArgument(
                "h schedule must be strictly decreasing".into(),
            ));
        }
    }
    let beta = exponent.beta_infinity();
    let cb0 = c_beta_0(beta)?;
    let cb1 = c_beta_1(beta)?;
    let mut rows = Vec::with_capacity(h_schedule.len());
    for &h in h_schedule {
        check_h(h)?;
        let c0 = c_psi_h_0(exponent, h)?;
        let c1 = c_psi_h_1(exponent, h)?;
        let psi_h = exponent.eval_psi(1.0 / h);
        let scaled_0 = h * psi_h * c0;
        let scaled_1 = h * psi_h * psi_h * c1;
        rows.push(LimitRow {
            h,
            c0,
            c1,
            scaled_0,
            scaled_1,
            dev_0: scaled_0 - cb0,
            dev_1: scaled_1 - cb1,
        });
    }
    let s0: Vec<f64> = rows.iter().map(|r| r.scaled_0).collect();
    let s1: Vec<f64> = rows.iter().map(|r| r.scaled_1).collect();
    Ok(ConstantsTable {
        exponent: exponent.to_string(),
        beta_infinity: beta,
        c_beta_0: cb0,
        c_beta_1: cb1,
        successive_diffs_0: s0.windows(2).map(|w| (w[1] - w[0]).abs()).collect(),
        successive_diffs_1: s1.windows(2).map(|w| (w[1] - w[0]).abs()).collect(),
        extrapolated_0: aitken(&s0),
        extrapolated_1: aitken(&s1),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_constants_closed_forms() {
        assert!((c_beta_0(2.0).unwrap() - 0.5).abs() < 1e-8);
        assert!((c_beta_0(1.5).unwrap() - (2.0 / PI).sqrt()).abs() < 1e-8);
        assert!((c_beta_1(2.0).unwrap() - 2.0 / 3.0).abs() < 1e-8);
        assert!((c_beta_1(1.5).unwrap() - 4.0 * 2.0_f64.ln() / PI).abs() < 1e-8);
    }

    #[test]
    fn index_constants_reject_bad_beta() {
        assert!(c_beta_0(1.0).is_err());
        assert!(c_beta_1(2.5).is_err());
    }

    // For ψ(λ) = |λ|^β the rescaled finite-h constants equal the index
    // constants at every h, not just in the limit.
    #[test]
    fn pure_stable_rescaling_is_exact() {
        for &(beta, h) in &[(1.7, 0.05_f64), (2.0, 0.2), (1.2, 0.01)] {
            let e = LevyExponent::stable(beta).unwrap();
            let c0 = c_psi_h_0(&e, h).unwrap();
            let c1 = c_psi_h_1(&e, h).unwrap();
            let want0 = c_beta_0(beta).unwrap() * h.powf(beta - 1.0);
            let psi_h = h.powf(-beta);
            assert!(
                (c0 - want0).abs() < 1e-8 * want0,
                "beta={beta} h={h}: c0={c0} want {want0}"
            );
            let scaled1 = h * psi_h * psi_h * c1;
            let want1 = c_beta_1(beta).unwrap();
            assert!(
                (scaled1 - want1).abs() < 1e-7 * want1,
                "beta={beta} h={h}: scaled1={scaled1} want {want1}"
            );
        }
    }

    #[test]
    fn frequency_and_time_routes_agree() {
        let cases = [
            (LevyExponent::stable(1.5).unwrap(), 0.1),
            (LevyExponent::stable(2.0).unwrap(), 0.05),
            (
                LevyExponent::mixture(&[(1.0, 1.8), (1.0, 1.2)]).unwrap(),
                0.1,
            ),
        ];
        for (e, h) in cases {
            let a = c_psi_h_0(&e, h).unwrap();
            let b = c_psi_h_0_time_domain(&e, h).unwrap();
            assert!(
                (a - b).abs() < 1e-5 * a,
                "{e} h={h}: frequency {a} vs time {b}"
            );
        }
    }

    #[test]
    fn limit_table_mixture_converges() {
        let e = LevyExponent::mixture(&[(1.0, 1.8), (1.0, 1.2)]).unwrap();
        let t = limit_table(&e, &[0.1, 0.05, 0.025, 0.0125]).unwrap();
        // Deviations from the limit shrink monotonically along the schedule
        // (this schedule stays above the scale where scaled_1 crosses c_beta_1).
        for w in t.rows.windows(2) {
            assert!(w[1].dev_0.abs() < w[0].dev_0.abs());
            assert!(w[1].dev_1.abs() < w[0].dev_1.abs());
        }
        // Extrapolation lands closer than the finest row.
        assert!((t.extrapolated_0 - t.c_beta_0).abs() < t.rows.last().unwrap().dev_0.abs());
    }
}
