//! Transition densities p_s(x) of a symmetric Lévy process by Fourier-cosine
//! inversion, their increments in x, and the time-integrated kernels
//!
//!   u(x) = ∫₀¹ p_s(x) ds,
//!   v(x) = ∫₀¹ |p_s(x+h) − p_s(x)| ds,
//!   w(x) = ∫₀¹ |p_s(x+h) − 2p_s(x) + p_s(x−h)| ds,
//!
//! which control the variance of the L² modulus of the local time.
//!
//! Strategy: p_s(x) = (1/π)∫₀^∞ cos(px) e^{-sψ(p)} dp is truncated where the
//! envelope reaches e^{-37} and swept in quarter-oscillation panels. The
//! time-integrated kernels never integrate pointwise densities over s (the
//! s → 0 endpoint would force unbounded frequency cutoffs); instead the
//! r-integral is done in closed form under the p-integral, leaving a single
//! cosine transform of (e^{-aψ} − e^{-bψ})/ψ per time slab. Absolute values
//! are recovered by splitting [0, 1] at the (finitely many) sign changes of
//! the slab integrand, located by dyadic refinement.

use crate::error::{Error, Result};
use crate::exponent::LevyExponent;
use crate::quad::{self, Quad};
use serde::Serialize;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

/// ln(1e16): envelope cutoff exponent, e^{-sψ(P)} ≤ 1e-16 beyond the sweep.
const CUTOFF_LOG: f64 = 37.0;

pub struct DensityEvaluator {
    exponent: LevyExponent,
    abs_tol: f64,
    clamp_count: AtomicU64,
    clamp_warned: AtomicBool,
}

impl DensityEvaluator {
    pub fn new(exponent: LevyExponent) -> Self {
        DensityEvaluator {
            exponent,
            abs_tol: 1e-9,
            clamp_count: AtomicU64::new(0),
            clamp_warned: AtomicBool::new(false),
        }
    }

    pub fn with_tol(exponent: LevyExponent, abs_tol: f64) -> Result<Self> {
        if !(abs_tol > 0.0 && abs_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "abs_tol must be positive and finite, got {abs_tol:e}"
            )));
        }
        Ok(DensityEvaluator {
            exponent,
            abs_tol,
            clamp_count: AtomicU64::new(0),
            clamp_warned: AtomicBool::new(false),
        })
    }

    pub fn exponent(&self) -> &LevyExponent {
        &self.exponent
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    /// How many times a slightly negative quadrature result was clamped to 0.
    pub fn clamp_count(&self) -> u64 {
        self.clamp_count.load(Ordering::Relaxed)
    }

    fn check_time(&self, s: f64) -> Result<()> {
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "time argument must be positive and finite, got {s}"
            )));
        }
        Ok(())
    }

    /// Frequency beyond which e^{-sψ(p)} ≤ 1e-16.
    fn cutoff(&self, s: f64) -> Result<f64> {
        self.exponent.psi_inverse(CUTOFF_LOG / s)
    }

    /// For p ≥ P: sψ(p) ≥ sψ(P)·p/P since ψ(p)/p is nondecreasing, so the
    /// discarded tail of the cosine transform is at most P·e^{-37}/37.
    fn truncation_bound(cutoff: f64) -> f64 {
        cutoff / CUTOFF_LOG * (-CUTOFF_LOG).exp()
    }

    fn clamp_small_negative(&self, v: f64, what: &str) -> Result<f64> {
        if v >= 0.0 {
            return Ok(v);
        }
        if v >= -self.abs_tol {
            if !self.clamp_warned.swap(true, Ordering::Relaxed) {
                eprintln!(
                    "warning: clamping small negative {what} value {v:e} to 0 \
                     (within quadrature tolerance; further clamps counted silently)"
                );
            }
            self.clamp_count.fetch_add(1, Ordering::Relaxed);
            return Ok(0.0);
        }
        Err(Error::Quadrature(format!(
            "{what} came out {v:e}, more negative than the tolerance allows"
        )))
    }

    /// Transition density p_s(x). Symmetric in x; nonnegative up to the
    /// quadrature tolerance, with sub-tolerance negatives clamped to 0.
    pub fn density(&self, s: f64, x: f64) -> Result<f64> {
        self.check_time(s)?;
        if !x.is_finite() {
            return Err(Error::InvalidArgument("x must be finite".into()));
        }
        let xa = x.abs();
        let cutoff = self.cutoff(s)?;
        let env = |p: f64| (-s * self.exponent.eval_psi(p)).exp();
        let q = quad::oscillatory(
            |p| (p * xa).cos() * (-s * self.exponent.eval_psi(p)).exp(),
            0.0,
            cutoff,
            xa.max(1.0),
            0.5 * PI * self.abs_tol,
            Some(&env),
        )?;
        let err = (q.error + Self::truncation_bound(cutoff)) / PI;
        if err > self.abs_tol {
            return Err(Error::Quadrature(format!(
                "density(s={s:e}, x={x:e}) error estimate {err:e} exceeds {:e}",
                self.abs_tol
            )));
        }
        self.clamp_small_negative(q.value / PI, "density")
    }

    /// Increment p_s(x+h) − p_s(x) from two density evaluations.
    pub fn delta_h(&self, s: f64, x: f64, h: f64) -> Result<f64> {
        self.check_h(h)?;
        Ok(self.density(s, x + h)? - self.density(s, x)?)
    }

    /// Same increment from the single transform
    /// −(2/π)∫₀^∞ sin(p(x+h/2)) sin(ph/2) e^{-sψ(p)} dp,
    /// which avoids the cancellation of the two-call route.
    pub fn delta_h_spectral(&self, s: f64, x: f64, h: f64) -> Result<f64> {
        self.check_time(s)?;
        self.check_h(h)?;
        let cutoff = self.cutoff(s)?;
        let freq = (x + 0.5 * h).abs() + 0.5 * h;
        let env = |p: f64| (-s * self.exponent.eval_psi(p)).exp();
        let q = quad::oscillatory(
            |p| {
                (p * (x + 0.5 * h)).sin()
                    * (0.5 * p * h).sin()
                    * (-s * self.exponent.eval_psi(p)).exp()
            },
            0.0,
            cutoff,
            freq.max(1.0),
            0.5 * PI * self.abs_tol,
            Some(&env),
        )?;
        Ok(-2.0 * q.value / PI)
    }

    /// Symmetric second difference p_s(x+h) − 2p_s(x) + p_s(x−h), computed
    /// spectrally as −(4/π)∫₀^∞ cos(px) sin²(ph/2) e^{-sψ(p)} dp.
    pub fn second_diff(&self, s: f64, x: f64, h: f64) -> Result<f64> {
        self.check_time(s)?;
        self.check_h(h)?;
        let cutoff = self.cutoff(s)?;
        let xa = x.abs();
        let env = |p: f64| (-s * self.exponent.eval_psi(p)).exp();
        let q = quad::oscillatory(
            |p| {
                let sh = (0.5 * p * h).sin();
                (p * xa).cos() * sh * sh * (-s * self.exponent.eval_psi(p)).exp()
            },
            0.0,
            cutoff,
            (xa + h).max(1.0),
            0.5 * PI * self.abs_tol,
            Some(&env),
        )?;
        Ok(-4.0 * q.value / PI)
    }

    /// Three-point version of `second_diff`, for cross-checking.
    pub fn second_diff_direct(&self, s: f64, x: f64, h: f64) -> Result<f64> {
        self.check_h(h)?;
        Ok(self.density(s, x + h)? - 2.0 * self.density(s, x)? + self.density(s, x - h)?)
    }

    fn check_h(&self, h: f64) -> Result<()> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "increment h must be positive and finite, got {h}"
            )));
        }
        Ok(())
    }

    /// ∫₀^∞ cos(ξp) · ∫_a^b e^{-rψ(p)} dr dp with the inner integral in
    /// closed form: the building block of every ∫ p ds kernel. ξ ≥ 0.
    pub(crate) fn time_slab_cosine(&self, xi: f64, a: f64, b: f64, abs_tol: f64) -> Result<Quad> {
        debug_assert!(xi >= 0.0 && a >= 0.0 && b > a);
        let g = |p: f64| {
            let psi = self.exponent.eval_psi(p);
            if psi == 0.0 {
                b - a
            } else {
                // (e^{-aψ} − e^{-bψ})/ψ without cancellation near ψ = 0.
                (-a * psi).exp() * (-((a - b) * psi).exp_m1()) / psi
            }
        };
        if xi == 0.0 {
            let p0 = (self.exponent.psi_inverse(1.0)?.max(1.0)) * 4.0;
            let head = quad::adaptive(g, 0.0, p0, 0.5 * abs_tol, 4000)?;
            let tail = quad::tail_by_inversion(g, p0, 0.5 * abs_tol)?;
            return Ok(Quad {
                value: head.value + tail.value,
                error: head.error + tail.error,
            });
        }
        quad::cos_tail(g, xi, 0.0, abs_tol)
    }

    /// u(x) = ∫₀¹ p_s(x) ds.
    pub fn u_integral(&self, x: f64) -> Result<f64> {
        let q = self.time_slab_cosine(x.abs(), 0.0, 1.0, 0.5 * PI * self.abs_tol)?;
        self.clamp_small_negative(q.value / PI, "u_integral")
    }

    /// ∫₀¹ |Σⱼ coefⱼ p_s(ξⱼ)| ds for the signed kernel described by `parts`.
    ///
    /// The integrand F(s) changes sign at most a couple of times on (0, 1]
    /// (it tracks an inflection of a symmetric unimodal density crossing a
    /// fixed point, and never below s ≈ h^β). Roots are bracketed by a
    /// geometric scan of narrow-window slab averages, sharpened by sign
    /// bisection, and the absolute mass is the sum of |signed slab| over the
    /// root-partitioned cells. Each cell is then audited by split checks at
    /// 1/2 and 1/3: hidden sign structure would make the split masses exceed
    /// the whole, which turns into an error instead of a silent deficit.
    fn abs_time_integral(&self, parts: &[(f64, f64)], abs_tol: f64) -> Result<f64> {
        let eval_tol = 0.02 * abs_tol * PI;
        let coef_sum: f64 = parts.iter().map(|&(c, _)| c.abs()).sum();
        let slab = |a: f64, b: f64| -> Result<f64> {
            let mut v = 0.0;
            for &(c, xi) in parts {
                v += c * self.time_slab_cosine(xi, a, b, eval_tol / coef_sum)?.value;
            }
            Ok(v / PI)
        };
        // Sign of F near s through a ±0.1% slab window.
        let window_sign = |s: f64| -> Result<f64> {
            let w = (s * 1e-3).max(1e-9);
            Ok(slab((s - w).max(0.0), (s + w).min(1.0))?.signum())
        };

        const SCAN: usize = 17;
        let mut scan_pts = Vec::with_capacity(SCAN);
        for k in 0..SCAN {
            scan_pts.push(10f64.powf(-6.0 + 6.0 * k as f64 / (SCAN - 1) as f64));
        }
        let mut signs = Vec::with_capacity(SCAN);
        for &s in &scan_pts {
            signs.push(window_sign(s)?);
        }

        let mut boundaries = vec![0.0_f64];
        for k in 1..SCAN {
            if signs[k - 1] * signs[k] < 0.0 {
                let (mut lo, mut hi) = (scan_pts[k - 1], scan_pts[k]);
                let mut s_lo = signs[k - 1];
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    let sm = window_sign(mid)?;
                    if sm == s_lo {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-10 {
                        break;
                    }
                    s_lo = window_sign(lo)?;
                }
                boundaries.push(0.5 * (lo + hi));
            }
        }
        boundaries.push(1.0);
        if boundaries.len() > 10 {
            return Err(Error::Quadrature(
                "kernel sign structure has too many changes to be credible".into(),
            ));
        }

        let mut total = 0.0;
        for win in boundaries.windows(2) {
            let (a, b) = (win[0], win[1]);
            let whole = slab(a, b)?;
            // Split audits: a root-free cell satisfies |left| + |right| = |whole|
            // up to quadrature noise, whichever way it is cut.
            for frac in [0.5, 1.0 / 3.0] {
                let m = a + frac * (b - a);
                let gain = slab(a, m)?.abs() + slab(m, b)?.abs() - whole.abs();
                if gain > 0.2 * abs_tol {
                    return Err(Error::Quadrature(format!(
                        "unresolved sign structure inside cell [{a:e}, {b:e}] (gain {gain:e})"
                    )));
                }
            }
            total += whole.abs();
        }
        Ok(total)
    }

    /// v(x) = ∫₀¹ |p_s(x+h) − p_s(x)| ds. Resolved to 10× the pointwise
    /// tolerance: the sign-splitting layer spends accuracy on locating the
    /// slab boundaries, and the panel sums bottom out near the f64 roundoff
    /// of the underlying transforms.
    pub fn v_integral(&self, x: f64, h: f64) -> Result<f64> {
        self.check_h(h)?;
        self.abs_time_integral(
            &[(1.0, (x + h).abs()), (-1.0, x.abs())],
            10.0 * self.abs_tol,
        )
    }

    /// w(x) = ∫₀¹ |p_s(x+h) − 2p_s(x) + p_s(x−h)| ds; tolerance as for `v_integral`.
    pub fn w_integral(&self, x: f64, h: f64) -> Result<f64> {
        self.check_h(h)?;
        self.abs_time_integral(
            &[(1.0, (x + h).abs()), (1.0, (x - h).abs()), (-2.0, x.abs())],
            10.0 * self.abs_tol,
        )
    }

    /// |∫_{-∞}^∞ p_s(x) dx − 1|, with the body mass taken by the transform
    /// (2/π)∫₀^∞ sin(pX)/p · e^{-sψ(p)} dp (exact mass of [−X, X]) and the
    /// two-sided tail mass beyond X restored from the first-order stable tail
    /// 2sΣᵢwᵢ Γ(βᵢ)sin(πβᵢ/2)/π · X^{-βᵢ}. X is sized so the tail correction
    /// is ~1e-4 and its own error, one order smaller, sets the defect floor
    /// for β < 2; a β = 2 exponent has no jump tail and resolves to ~1e-12.
    pub fn normalization_defect(&self, s: f64) -> Result<f64> {
        self.check_time(s)?;
        let comps = self.exponent.components();
        // Gaussian component scale: variance of the β = 2 part is 2ws.
        let mut x_span = 1.0_f64;
        for &(w, b) in &comps {
            if b >= 2.0 {
                x_span = x_span.max(12.0 * (2.0 * w * s).sqrt());
            } else {
                let tail_coef =
                    2.0 * w * s * statrs::function::gamma::gamma(b) * (0.5 * PI * b).sin() / PI;
                // Aim each component's tail mass at 1e-4 / #components.
                let target = 1e-4 / comps.len() as f64;
                x_span = x_span.max((tail_coef / target).powf(1.0 / b));
            }
        }
        let mut tail_mass = 0.0;
        for &(w, b) in &comps {
            if b < 2.0 {
                tail_mass += 2.0 * w * s * statrs::function::gamma::gamma(b) * (0.5 * PI * b).sin()
                    / PI
                    * x_span.powf(-b);
            }
        }
        let cutoff = self.cutoff(s)?;
        let env = |p: f64| (-s * self.exponent.eval_psi(p)).exp() / p.max(1.0 / x_span);
        let q = quad::oscillatory(
            |p| {
                let c = if p == 0.0 {
                    x_span
                } else {
                    (p * x_span).sin() / p
                };
                c * (-s * self.exponent.eval_psi(p)).exp()
            },
            0.0,
            cutoff,
            x_span,
            0.5 * PI * 1e-9,
            Some(&env),
        )?;
        let body = 2.0 * q.value / PI;
        Ok((body + tail_mass - 1.0).abs())
    }
}

/// One audited inequality at one parameter point.
#[derive(Clone, Debug, Serialize)]
pub struct BoundAuditRow {
    pub bound: String,
    pub h: Option<f64>,
    pub x: Option<f64>,
    pub s: Option<f64>,
    pub observed: Option<f64>,
    pub shape: f64,
    pub ratio: Option<f64>,
    pub flagged: bool,
}

/// Sup of observed/shape per bound and per h, and an overall verdict.
#[derive(Clone, Debug, Serialize)]
pub struct BoundAuditReport {
    pub exponent: String,
    pub x_grid: Vec<f64>,
    pub h_grid: Vec<f64>,
    pub rows: Vec<BoundAuditRow>,
    pub sup_ratio: Vec<(String, f64)>,
    pub h_trend: Vec<(String, f64, f64)>,
    pub flagged_points: usize,
    pub verdict: String,
}

/// Trapezoid rule over the given nodes.
fn trapezoid(xs: &[f64], fs: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 1..xs.len() {
        acc += 0.5 * (fs[i] + fs[i - 1]) * (xs[i] - xs[i - 1]);
    }
    acc
}

/// Full-line mass of an even function sampled on [0, x_max]: twice the
/// trapezoid mass plus a tail extrapolated from the last point under the
/// quadratic-decay envelope f ≈ f(x_max)·(x_max/x)².
fn even_mass_with_tail(xs: &[f64], fs: &[f64]) -> f64 {
    let n = xs.len() - 1;
    2.0 * (trapezoid(xs, fs) + fs[n] * xs[n])
}

/// Same, for the square of the sampled function: tail ∫(C/x²)² = f(x_max)²·x_max/3.
fn even_sq_mass_with_tail(xs: &[f64], fs: &[f64]) -> f64 {
    let n = xs.len() - 1;
    let sq: Vec<f64> = fs.iter().map(|f| f * f).collect();
    2.0 * (trapezoid(xs, &sq) + sq[n] * xs[n] / 3.0)
}

impl DensityEvaluator {
    /// Audits the decay bounds behind the variance estimates: pointwise decay
    /// of p_s and u, pointwise envelopes of v and w, and the L¹/L² masses of
    /// v and w against their h-dependent shapes (constants stripped). The
    /// verdict is "consistent" when no sup ratio blows up as h shrinks:
    /// sup(h_min) ≤ 3·sup(h_max) per bound, every unflagged ratio finite, and
    /// under 20% of the points flagged for quadrature failure.
    pub fn audit_decay_bounds(&self, x_grid: &[f64], h_grid: &[f64]) -> Result<BoundAuditReport> {
        if x_grid.len() < 2 {
            return Err(Error::InvalidArgument(
                "audit needs at least two x grid points".into(),
            ));
        }
        for win in x_grid.windows(2) {
            if !(win[1] > win[0]) {
                return Err(Error::InvalidArgument(
                    "x grid must be strictly increasing".into(),
                ));
            }
        }
        if !(x_grid[0] >= 0.0) {
            return Err(Error::InvalidArgument("x grid must be nonnegative".into()));
        }
        if h_grid.is_empty() {
            return Err(Error::InvalidArgument("audit needs at least one h".into()));
        }
        for &h in h_grid {
            if !(h > 0.0 && h < 1.0) {
                return Err(Error::InvalidArgument(format!(
                    "audit h values must lie in (0, 1), got {h}"
                )));
            }
        }

        // Ensure x = 0 is present so even-extension masses start at the origin.
        let mut xs: Vec<f64> = Vec::new();
        if x_grid[0] > 0.0 {
            xs.push(0.0);
        }
        xs.extend_from_slice(x_grid);

        let mut rows: Vec<BoundAuditRow> = Vec::new();
        let mut flagged_points = 0usize;

        let push_row = |rows: &mut Vec<BoundAuditRow>,
                        flagged_points: &mut usize,
                        bound: &str,
                        h: Option<f64>,
                        x: Option<f64>,
                        s: Option<f64>,
                        observed: Result<f64>,
                        shape: f64| {
            match observed {
                Ok(v) => rows.push(BoundAuditRow {
                    bound: bound.to_string(),
                    h,
                    x,
                    s,
                    observed: Some(v),
                    shape,
                    ratio: Some(if shape > 0.0 { v / shape } else { f64::MAX }),
                    flagged: false,
                }),
                Err(_) => {
                    *flagged_points += 1;
                    rows.push(BoundAuditRow {
                        bound: bound.to_string(),
                        h,
                        x,
                        s,
                        observed: None,
                        shape,
                        ratio: None,
                        flagged: true,
                    });
                }
            }
        };

        // h-independent rows: density decay on a fixed s grid, u decay, and
        // the occupation mass ∫∫₀¹ p ds dx = 1.
        for &s in &[0.05_f64, 0.25, 1.0] {
            let scale = self.exponent.psi_inverse(1.0 / s)?.max(1.0);
            for &x in &xs {
                let shape = scale / (1.0 + x * x);
                push_row(
                    &mut rows,
                    &mut flagged_points,
                    "density_decay",
                    None,
                    Some(x),
                    Some(s),
                    self.density(s, x),
                    shape,
                );
            }
        }
        let mut u_vals: Vec<f64> = Vec::with_capacity(xs.len());
        let mut u_ok = true;
        for &x in &xs {
            let r = self.u_integral(x);
            if let Ok(v) = r {
                u_vals.push(v);
            } else {
                u_ok = false;
            }
            push_row(
                &mut rows,
                &mut flagged_points,
                "u_decay",
                None,
                Some(x),
                None,
                self.u_integral(x),
                1.0 / (1.0 + x * x),
            );
        }
        if u_ok {
            push_row(
                &mut rows,
                &mut flagged_points,
                "occupation_mass",
                None,
                None,
                None,
                Ok(even_mass_with_tail(&xs, &u_vals)),
                1.0,
            );
        }

        // h-dependent rows.
        for &h in h_grid {
            let psi_h = self.exponent.eval_psi(1.0 / h);
            let log_h = (1.0 / h).ln();
            let mut v_vals = Vec::with_capacity(xs.len());
            let mut w_vals = Vec::with_capacity(xs.len());
            let mut all_ok = true;
            for &x in &xs {
                let v = self.v_integral(x, h);
                let w = self.w_integral(x, h);
                let v_shape = {
                    let mut sh = 1.0 / (h * psi_h);
                    if x > 0.0 {
                        sh = sh.min(h / x).min(h / (x * x));
                    }
                    sh
                };
                let w_shape = {
                    let mut sh = 1.0 / (h * psi_h);
                    if x > 0.0 {
                        sh = sh.min(1.0 / (psi_h * x)).min(h * h / (x * x));
                    }
                    sh
                };
                if let Ok(val) = v {
                    v_vals.push(val);
                } else {
                    all_ok = false;
                }
                if let Ok(val) = w {
                    w_vals.push(val);
                } else {
                    all_ok = false;
                }
                push_row(
                    &mut rows,
                    &mut flagged_points,
                    "v_pointwise",
                    Some(h),
                    Some(x),
                    None,
                    v,
                    v_shape,
                );
                push_row(
                    &mut rows,
                    &mut flagged_points,
                    "w_pointwise",
                    Some(h),
                    Some(x),
                    None,
                    w,
                    w_shape,
                );
            }
            if all_ok {
                push_row(
                    &mut rows,
                    &mut flagged_points,
                    "v_l1",
                    Some(h),
                    None,
                    None,
                    Ok(even_mass_with_tail(&xs, &v_vals)),
                    h * log_h,
                );
                push_row(
                    &mut rows,
                    &mut flagged_points,
                    "v_l2",
                    Some(h),
                    None,
                    None,
                    Ok(even_sq_mass_with_tail(&xs, &v_vals)),
                    1.0 / psi_h,
                );
                push_row(
                    &mut rows,
                    &mut flagged_points,
                    "w_l1",
                    Some(h),
                    None,
                    None,
                    Ok(even_mass_with_tail(&xs, &w_vals)),
                    log_h / psi_h,
                );
                push_row(
                    &mut rows,
                    &mut flagged_points,
                    "w_l2",
                    Some(h),
                    None,
                    None,
                    Ok(even_sq_mass_with_tail(&xs, &w_vals)),
                    1.0 / (h * psi_h * psi_h),
                );
                // Far-field mass of w² beyond u0 = 1 (only if the grid reaches it).
                if xs.last().copied().unwrap_or(0.0) > 1.0 {
                    let far: (Vec<f64>, Vec<f64>) = xs
                        .iter()
                        .zip(&w_vals)
                        .filter(|(x, _)| **x >= 1.0)
                        .map(|(x, w)| (*x, *w))
                        .unzip();
                    if far.0.len() >= 2 {
                        push_row(
                            &mut rows,
                            &mut flagged_points,
                            "w_l2_far",
                            Some(h),
                            None,
                            None,
                            Ok(even_sq_mass_with_tail(&far.0, &far.1)),
                            1.0 / (psi_h * psi_h),
                        );
                    }
                }
            }
        }

        // Sup ratios per bound, and per (bound, h) for the trend.
        let mut names: Vec<String> = rows.iter().map(|r| r.bound.clone()).collect();
        names.sort();
        names.dedup();
        let mut sup_ratio = Vec::new();
        let mut h_trend = Vec::new();
        for name in &names {
            let sup = rows
                .iter()
                .filter(|r| &r.bound == name)
                .filter_map(|r| r.ratio)
                .fold(0.0_f64, f64::max);
            sup_ratio.push((name.clone(), sup));
            if rows.iter().any(|r| &r.bound == name && r.h.is_some()) {
                for &h in h_grid {
                    let sup_h = rows
                        .iter()
                        .filter(|r| &r.bound == name && r.h == Some(h))
                        .filter_map(|r| r.ratio)
                        .fold(0.0_f64, f64::max);
                    h_trend.push((name.clone(), h, sup_h));
                }
            }
        }

        // Verdict: ratios finite, flags rare, and no blow-up as h shrinks.
        let mut consistent = rows
            .iter()
            .all(|r| r.ratio.map(f64::is_finite).unwrap_or(true));
        if flagged_points * 5 > rows.len() {
            consistent = false;
        }
        let h_min = h_grid.iter().cloned().fold(f64::INFINITY, f64::min);
        let h_max = h_grid.iter().cloned().fold(0.0_f64, f64::max);
        if h_min < h_max {
            for name in &names {
                let at = |h: f64| {
                    h_trend
                        .iter()
                        .find(|(n, hh, _)| n == name && *hh == h)
                        .map(|(_, _, s)| *s)
                };
                if let (Some(small), Some(large)) = (at(h_min), at(h_max)) {
                    if small > 3.0 * large + 1e-9 {
                        consistent = false;
                    }
                }
            }
        }

        Ok(BoundAuditReport {
            exponent: self.exponent.to_string(),
            x_grid: x_grid.to_vec(),
            h_grid: h_grid.to_vec(),
            rows,
            sup_ratio,
            h_trend,
            flagged_points,
            verdict: if consistent {
                "consistent".to_string()
            } else {
                "inconsistent".to_string()
            },
        })
    }
}
