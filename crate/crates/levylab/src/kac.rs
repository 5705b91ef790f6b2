//! Exact moments of local-time functionals via Kac's moment formula:
//!
//!   E^z[∏ᵢ L^{xᵢ}_t] = Σ_π ∫_{r ≥ 0, Σrⱼ ≤ t} ∏ⱼ p_{rⱼ}(x_{π(j)} − x_{π(j−1)}) dr,
//!
//! summed over permutations π, with x_{π(0)} := z and the terminal weight ≡ 1.
//! These quadrature values are the ground truth the Monte Carlo side is
//! measured against.
//!
//! Numerical layout: each nested level is a time convolution
//! ∫₀^t p_r(a)·K(t−r) dr. Integrating the half nearest r = 0 by parts against
//! H(r, a) = ∫₀^r p_ρ(a) dρ (computed by an exact frequency-side transform)
//! keeps every pointwise density evaluation at times ≥ t/2 of the current
//! level, where the Fourier sweeps are short. Small times never meet
//! pointwise densities, so the r^{-1/β} singularity costs nothing.

use crate::density::DensityEvaluator;
use crate::error::{Error, Result};
use crate::exponent::LevyExponent;
use crate::quad::{self, Cheb, Quad};
use serde::Serialize;
use statrs::function::gamma::gamma;
use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;

/// A product-moment request: E^z[L^{x₁}_t ··· L^{x_m}_t], m ≤ 3.
/// The terminal weight is fixed to 1 (plain expectation, no killing).
#[derive(Clone, Debug)]
pub struct MomentRequest {
    pub exponent: LevyExponent,
    pub t: f64,
    pub points: Vec<f64>,
    pub start: f64,
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "time horizon must lie in (0, 1], got {t}"
        )));
    }
    Ok(())
}

/// Adaptive quadrature over a Result-returning integrand: the first inner
/// error is caught and returned instead of the quadrature result.
fn try_adaptive<F: Fn(f64) -> Result<f64>>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_regions: usize,
) -> Result<Quad> {
    let caught: RefCell<Option<Error>> = RefCell::new(None);
    let q = quad::adaptive(
        |x| match f(x) {
            Ok(v) => v,
            Err(e) => {
                caught.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        abs_tol,
        max_regions,
    );
    match caught.into_inner() {
        Some(e) => Err(e),
        None => q,
    }
}

/// Pointwise and time-integrated density kernels with per-octave Chebyshev
/// caching of r ↦ p_r(a) (the permutation sum and the outer adaptive rules
/// revisit the same small-time octaves many times).
struct Kernels<'a> {
    ev: &'a DensityEvaluator,
    /// Some((β, Γ(1+1/β)/π)) for a pure stable exponent: closed peak forms.
    pure: Option<(f64, f64)>,
    t_top: f64,
    p_cache: RefCell<HashMap<(u64, i32), Cheb>>,
}

impl<'a> Kernels<'a> {
    fn new(ev: &'a DensityEvaluator, t_top: f64) -> Self {
        let pure = ev
            .exponent()
            .pure_beta()
            .map(|b| (b, gamma(1.0 + 1.0 / b) / PI));
        Kernels {
            ev,
            pure,
            t_top,
            p_cache: RefCell::new(HashMap::new()),
        }
    }

    fn p_point(&self, r: f64, a: f64) -> Result<f64> {
        if let Some((beta, c)) = self.pure {
            if a == 0.0 {
                return Ok(c * r.powf(-1.0 / beta));
            }
        }
        self.ev.density(r, a)
    }

    fn p(&self, r: f64, a: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "density time must be positive, got {r:e}"
            )));
        }
        if self.pure.is_some() && a == 0.0 {
            return self.p_point(r, a);
        }
        if r >= 0.25 * self.t_top {
            return self.p_point(r, a);
        }
        let k = (self.t_top / r).log2().floor() as i32;
        if k > 40 {
            return Err(Error::Quadrature(format!(
                "density requested at time {r:e}, far below the resolvable scale"
            )));
        }
        let lo = self.t_top * 2f64.powi(-k - 1);
        let hi = self.t_top * 2f64.powi(-k);
        let key = (a.to_bits(), k);
        if !self.p_cache.borrow().contains_key(&key) {
            let fit = Cheb::fit(lo, hi, 16, |r| self.p_point(r, a))?;
            self.p_cache.borrow_mut().insert(key, fit);
        }
        Ok(self.p_cache.borrow()[&key].eval(r))
    }

    /// H(τ, a) = ∫₀^τ p_r(a) dr.
    fn h_int(&self, tau: f64, a: f64) -> Result<f64> {
        if tau <= 0.0 {
            return Ok(0.0);
        }
        if let Some((beta, c)) = self.pure {
            if a == 0.0 {
                let e = 1.0 - 1.0 / beta;
                return Ok(c * tau.powf(e) / e);
            }
        }
        Ok(self.ev.time_slab_cosine(a, 0.0, tau, PI * 1e-10)?.value / PI)
    }
}

/// ∫₀^t p_r(a1)·H(t−r, a2) dr: the two-point simplex integral. The [0, t/2]
/// half is integrated by parts so its density arguments stay in [t/2, t].
fn pair_integral(kern: &Kernels, t: f64, a1: f64, a2: f64) -> Result<f64> {
    let half = 0.5 * t;
    let boundary = kern.h_int(half, a1)? * kern.h_int(half, a2)?;
    let tol = 1e-4 * (boundary + kern.h_int(t, a1)? * kern.h_int(t, a2)?) + 1e-12;
    let left = try_adaptive(
        |r| Ok(kern.h_int(r, a1)? * kern.p(t - r, a2)?),
        0.0,
        half,
        0.5 * tol,
        4000,
    )?;
    let right = try_adaptive(
        |r| Ok(kern.p(r, a1)? * kern.h_int(t - r, a2)?),
        half,
        t,
        0.5 * tol,
        4000,
    )?;
    Ok(boundary + left.value + right.value)
}

/// ∫∫ over the three-increment simplex. The two inner increments reduce to
/// `pair_integral` at horizon τ; the outer time is floored at δ = 1e-4·t with
/// the head ∫₀^δ p_r(a1)·J(t−r) dr ≈ J(t)·H(δ, a1), a second-order-accurate
/// cap since J is differentiable at t.
fn triple_integral(kern: &Kernels, t: f64, a1: f64, a2: f64, a3: f64) -> Result<f64> {
    let j = |tau: f64| -> Result<f64> { pair_integral(kern, tau, a2, a3) };
    let j_t = j(t)?;
    let delta = 1e-4 * t;
    let cap = j_t * kern.h_int(delta, a1)?;
    let tol = 1e-4 * (j_t * kern.h_int(t, a1)? / t).abs() + 1e-12;
    let body = try_adaptive(|r| Ok(kern.p(r, a1)? * j(t - r)?), delta, t, tol, 2000)?;
    Ok(cap + body.value)
}

fn perms(m: usize) -> Vec<Vec<usize>> {
    match m {
        1 => vec![vec![0]],
        2 => vec![vec![0, 1], vec![1, 0]],
        3 => vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0],
        ],
        _ => unreachable!("m validated to 1..=3"),
    }
}

/// E^z[∏ᵢ L^{xᵢ}_t] by permutation-summed nested quadrature over the time
/// simplex; relative accuracy ~1e-3 or better.
pub fn kac_moment(req: &MomentRequest) -> Result<f64> {
    let m = req.points.len();
    if m == 0 || m > 3 {
        return Err(Error::InvalidArgument(format!(
            "kac_moment supports 1 to 3 points, got {m} (cost grows as m!·quadratureᵐ)"
        )));
    }
    check_t(req.t)?;
    for &x in req.points.iter().chain(std::iter::once(&req.start)) {
        if !x.is_finite() {
            return Err(Error::InvalidArgument("points must be finite".into()));
        }
    }
    let ev = DensityEvaluator::new(req.exponent.clone());
    let kern = Kernels::new(&ev, req.t);
    let mut total = 0.0;
    for perm in perms(m) {
        let mut prev = req.start;
        let mut a = Vec::with_capacity(m);
        for &idx in &perm {
            a.push((req.points[idx] - prev).abs());
            prev = req.points[idx];
        }
        total += match m {
            1 => kern.h_int(req.t, a[0])?,
            2 => pair_integral(&kern, req.t, a[0], a[1])?,
            3 => triple_integral(&kern, req.t, a[0], a[1], a[2])?,
            _ => unreachable!(),
        };
    }
    Ok(total)
}

/// Closed form for the pure stable moment at the origin,
/// E^0[(L⁰_t)^m] = m!·cᵐ·Γ(a)ᵐ/Γ(ma+1)·t^{ma} with c = Γ(1+1/β)/π and
/// a = 1−1/β: the Kac simplex integral of ∏ c·rⱼ^{-1/β} is a Dirichlet
/// integral. At β = 2, t = 1 this gives 1/√π, 1/2, 1/√π for m = 1, 2, 3.
pub fn stable_origin_moment(beta: f64, m: usize, t: f64) -> Result<f64> {
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "index must lie in (1, 2], got {beta}"
        )));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("moment order must be ≥ 1".into()));
    }
    check_t(t)?;
    let c = gamma(1.0 + 1.0 / beta) / PI;
    let a = 1.0 - 1.0 / beta;
    let mf = (1..=m).product::<usize>() as f64;
    let ma = m as f64 * a;
    Ok(mf * c.powi(m as i32) * gamma(a).powi(m as i32) / gamma(ma + 1.0) * t.powf(ma))
}

/// Time-weight kernel ∫₀^t (t−r) e^{-rψ} dr in closed form (series-switched
/// against cancellation for small tψ).
fn g2(psi: f64, t: f64) -> f64 {
    let x = t * psi;
    if x < 1e-4 {
        t * t * (0.5 - x / 6.0 + x * x / 24.0)
    } else {
        (x + (-x).exp_m1()) / (psi * psi)
    }
}

/// E[α_t] = E∫(L^x_t)² dx = 2∫₀^t (t−r) p_r(0) dr, computed in the frequency
/// domain as (2/π)∫₀^∞ g₂(ψ(p)) dp. At β = 2, t = 1: 4/(3√π).
pub fn mean_alpha(exponent: &LevyExponent, t: f64) -> Result<f64> {
    check_t(t)?;
    let scale = t * t * exponent.psi_inverse(1.0 / t)?.max(1.0);
    let tol = 1e-9 * scale * PI;
    let p0 = 4.0 * exponent.psi_inverse(1.0 / t)?.max(1.0);
    let head = quad::adaptive(|p| g2(exponent.eval_psi(p), t), 0.0, p0, 0.5 * tol, 4000)?;
    let tail = quad::tail_by_inversion(|p| g2(exponent.eval_psi(p), t), p0, 0.5 * tol)?;
    Ok(2.0 * (head.value + tail.value) / PI)
}

/// E[J_h] = E∫(L^{x+h}_t − L^x_t)² dx = 4∫₀^t (t−r)(p_r(0) − p_r(h)) dr,
/// computed spectrally as (8/π)∫₀^∞ sin²(hp/2)·g₂(ψ(p)) dp.
pub fn mean_sq_increment(exponent: &LevyExponent, t: f64, h: f64) -> Result<f64> {
    check_t(t)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "h must be positive and finite, got {h}"
        )));
    }
    let scale = 4.0 * t / (h * exponent.eval_psi(1.0 / h)).max(1e-300);
    let tol = 1e-9 * scale.min(t * t * exponent.psi_inverse(1.0 / t)?.max(1.0)) * PI;
    let p0 = 4.0 * PI / h;
    let head = quad::oscillatory(
        |p| {
            let s = (0.5 * h * p).sin();
            2.0 * s * s * g2(exponent.eval_psi(p), t)
        },
        0.0,
        p0,
        h,
        0.4 * tol,
        None,
    )?;
    let mean_tail = quad::tail_by_inversion(|p| g2(exponent.eval_psi(p), t), p0, 0.3 * tol)?;
    let cos_t = quad::cos_tail(|p| g2(exponent.eval_psi(p), t), h, p0, 0.3 * tol)?;
    Ok(4.0 * (head.value + mean_tail.value - cos_t.value) / PI)
}

/// The same mean from the time side: pointwise density differences over
/// r ∈ [δ, t] plus the exact spectral form of the ∫₀^δ head, where
/// ∫₀^δ (t−r)e^{-rψ} dr is closed-form. Independent cross-check route.
pub fn mean_sq_increment_time_domain(exponent: &LevyExponent, t: f64, h: f64) -> Result<f64> {
    check_t(t)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "h must be positive and finite, got {h}"
        )));
    }
    let delta = 0.05 * t;
    let ev = DensityEvaluator::new(exponent.clone());
    let scale = 4.0 * t / (h * exponent.eval_psi(1.0 / h)).max(1e-300);
    let tol = 1e-7 * scale.min(t * t * exponent.psi_inverse(1.0 / t)?.max(1.0));

    let bulk = try_adaptive(
        |r| Ok(4.0 * (t - r) * (ev.density(r, 0.0)? - ev.density(r, h)?)),
        delta,
        t,
        0.4 * tol,
        4000,
    )?;

    // k_δ(ψ) = ∫₀^δ (t−r)e^{-rψ} dr, series-switched near δψ = 0.
    let k_delta = |p: f64| {
        let psi = exponent.eval_psi(p);
        let x = delta * psi;
        if x < 0.01 {
            let mut acc = 0.0;
            let mut pw = 1.0; // (−ψ)^n/n!
            for n in 0..5u32 {
                let n1 = n as f64 + 1.0;
                acc += pw
                    * (t * delta.powi(n as i32 + 1) / n1 - delta.powi(n as i32 + 2) / (n1 + 1.0));
                pw *= -psi / n1;
            }
            acc
        } else {
            let e = (-x).exp();
            t * (1.0 - e) / psi - (1.0 - (1.0 + x) * e) / (psi * psi)
        }
    };
    let p0 = 4.0 * PI / h;
    let head_osc = quad::oscillatory(
        |p| {
            let s = (0.5 * h * p).sin();
            2.0 * s * s * k_delta(p)
        },
        0.0,
        p0,
        h,
        0.1 * tol * PI,
        None,
    )?;
    let head_mean = quad::tail_by_inversion(k_delta, p0, 0.1 * tol * PI)?;
    let head_cos = quad::cos_tail(k_delta, h, p0, 0.1 * tol * PI)?;
    let head = 4.0 * (head_osc.value + head_mean.value - head_cos.value) / PI;

    Ok(bulk.value + head)
}

/// The four variance-bound terms for Var(J_h) and the remainder shape g(h,t),
/// by index case. Used to size Monte Carlo error bars, never asserted tight.
#[derive(Clone, Debug, Serialize)]
pub struct VarianceBudget {
    pub beta_infinity: f64,
    pub case: String,
    pub g_h_t: f64,
    pub terms: Vec<(String, f64)>,
    pub dominant: String,
    pub total_bound: f64,
}

/// Remainder shape g(h, t): h²t²(ψ⁻¹(1/t))³ above index 3/2, h²·log(1/h) at
/// exactly 3/2 (slowly varying factor instantiated as the logarithm), and
/// 1/(hψ²(1/h)) below.
pub fn remainder_shape(exponent: &LevyExponent, t: f64, h: f64) -> Result<(f64, String)> {
    let beta = exponent.beta_infinity();
    let psi_h = exponent.eval_psi(1.0 / h);
    if (beta - 1.5).abs() < 1e-9 {
        Ok((h * h * (1.0 / h).ln(), "index = 3/2".to_string()))
    } else if beta > 1.5 {
        let s = exponent.psi_inverse(1.0 / t)?;
        Ok((h * h * t * t * s.powi(3), "index > 3/2".to_string()))
    } else {
        Ok((1.0 / (h * psi_h * psi_h), "index < 3/2".to_string()))
    }
}

pub fn variance_bound_check(exponent: &LevyExponent, t: f64, h: f64) -> Result<VarianceBudget> {
    check_t(t)?;
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "variance budget needs h in (0, 1), got {h}"
        )));
    }
    let beta = exponent.beta_infinity();
    let psi_h = exponent.eval_psi(1.0 / h);
    let (g, case) = remainder_shape(exponent, t, h)?;
    let psi_inv_t = exponent.psi_inverse(1.0 / t)?;
    let log_h = (1.0 / h).ln();
    let terms = vec![
        ("mean_remainder".to_string(), t * g / (h * psi_h)),
        (
            "occupation_scale".to_string(),
            t * t * psi_inv_t / (h * psi_h * psi_h),
        ),
        (
            "increment_fourth".to_string(),
            t / (h.powf(1.5) * psi_h.powf(2.5)),
        ),
        (
            "log_correction".to_string(),
            t * log_h / (h * h * psi_h.powi(3)),
        ),
    ];
    let (dominant, _) = terms
        .iter()
        .cloned()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let total = terms.iter().map(|(_, v)| v).sum();
    Ok(VarianceBudget {
        beta_infinity: beta,
        case,
        g_h_t: g,
        terms,
        dominant,
        total_bound: total,
    })
}
