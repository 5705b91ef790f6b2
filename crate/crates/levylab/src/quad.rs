//! Quadrature toolkit.
//!
//! Everything downstream (densities, spectral constants, exact moments) reduces to
//! one-dimensional integrals of three shapes: smooth-but-singular-at-an-endpoint,
//! oscillatory with a decaying envelope, and alternating tails that converge too
//! slowly to truncate. The engine here is a 15-point Gauss–Kronrod rule driven
//! globally (worst-interval-first), plus purpose-built helpers for the other two
//! shapes: fixed-width panel sweeps sized to the oscillation, Euler-accelerated
//! half-period sums for cosine tails, and an inverse substitution for monotone
//! algebraic tails.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

/// Integral estimate with an error bound from the rule that produced it.
#[derive(Clone, Copy, Debug)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
}

// QK15 abscissae and weights (positive half; node 7 is the midpoint).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
// Embedded 7-point Gauss weights, indexed by (j-1)/2 for odd j.
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One application of the 15-point Kronrod rule with the QUADPACK error estimate.
fn qk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64)> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let fc = f(center);
    let mut fv1 = [0.0_f64; 7];
    let mut fv2 = [0.0_f64; 7];
    let mut res_g = WG[3] * fc;
    let mut res_k = WGK[7] * fc;
    let mut res_abs = res_k.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[(j - 1) / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    if !value.is_finite() {
        return Err(Error::Quadrature(format!(
            "non-finite integrand values on [{a:e}, {b:e}]"
        )));
    }
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    // Do not claim accuracy below roundoff of the absolute mass.
    err = err.max(50.0 * f64::EPSILON * res_abs);
    Ok((value, err))
}

struct Region {
    err: f64,
    a: f64,
    b: f64,
    value: f64,
}

impl PartialEq for Region {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Region {}
impl PartialOrd for Region {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Region {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive integration of `f` over the finite interval `[a, b]`.
///
/// Bisects the current worst interval until the summed error estimate drops
/// below `abs_tol`. Worst-first ordering lets the refinement concentrate at
/// integrable endpoint singularities (x^-γ with γ < 1, log) without a depth
/// parameter. Fails if `max_regions` bisections are not enough or an interval
/// can no longer be split in f64.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_regions: usize,
) -> Result<Quad> {
    if !(abs_tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "abs_tol must be positive, got {abs_tol:e}"
        )));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidArgument(
            "adaptive requires finite endpoints".into(),
        ));
    }
    if a == b {
        return Ok(Quad {
            value: 0.0,
            error: 0.0,
        });
    }

    let (v0, e0) = qk15(&mut f, a, b)?;
    let mut total_value = v0;
    let mut total_err = e0;
    let mut heap = BinaryHeap::new();
    heap.push(Region {
        err: e0,
        a,
        b,
        value: v0,
    });
    let mut regions = 1usize;

    while total_err > abs_tol {
        let worst = match heap.pop() {
            Some(r) => r,
            None => break,
        };
        if regions >= max_regions {
            return Err(Error::Quadrature(format!(
                "region budget {max_regions} exhausted on [{a:e}, {b:e}] (err {total_err:e}, target {abs_tol:e})"
            )));
        }
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature(format!(
                "interval near {:e} is not splittable in f64 (err {:e}, target {:e})",
                worst.a, total_err, abs_tol
            )));
        }
        let (lv, le) = qk15(&mut f, worst.a, mid)?;
        let (rv, re) = qk15(&mut f, mid, worst.b)?;
        total_value += lv + rv - worst.value;
        total_err += le + re - worst.err;
        heap.push(Region {
            err: le,
            a: worst.a,
            b: mid,
            value: lv,
        });
        heap.push(Region {
            err: re,
            a: mid,
            b: worst.b,
            value: rv,
        });
        regions += 1;
    }

    Ok(Quad {
        value: total_value,
        error: total_err.max(0.0),
    })
}

/// Integration of an oscillatory integrand over `[a, b]`.
///
/// `freq` is (an upper bound on) the angular frequency: the integrand should
/// look like cos(freq·p) or sin(freq·p) times a slowly varying factor. Panels
/// of width π/(4·freq) guarantee at most a quarter oscillation per panel, so
/// the Kronrod rule sees a smooth function. When an `envelope` bound on the
/// slowly varying factor is supplied, the sweep stops early once the Dirichlet
/// bound 2·envelope(p)/freq on the remaining range drops below the tolerance.
pub fn oscillatory<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    freq: f64,
    abs_tol: f64,
    envelope: Option<&dyn Fn(f64) -> f64>,
) -> Result<Quad> {
    if b <= a {
        return Ok(Quad {
            value: 0.0,
            error: 0.0,
        });
    }
    if !(freq > 0.0) || freq * (b - a) <= 2.0 * PI {
        return adaptive(f, a, b, abs_tol, 4000);
    }
    let width = PI / (4.0 * freq);
    let n = ((b - a) / width).ceil() as usize;
    const PANEL_CAP: usize = 2_000_000;
    if n > PANEL_CAP {
        return Err(Error::Quadrature(format!(
            "oscillatory sweep over [{a:e}, {b:e}] at frequency {freq:e} needs {n} panels (cap {PANEL_CAP})"
        )));
    }
    let panel_tol = abs_tol / n as f64;
    let mut value = 0.0;
    let mut error = 0.0;
    let mut lo = a;
    for k in 1..=n {
        let hi = if k == n { b } else { a + k as f64 * width };
        let (v, e) = qk15(&mut f, lo, hi)?;
        if e > panel_tol {
            let q = adaptive(&mut f, lo, hi, panel_tol, 2000)?;
            value += q.value;
            error += q.error;
        } else {
            value += v;
            error += e;
        }
        lo = hi;
        if let Some(env) = envelope {
            let rest = 2.0 * env(hi) / freq;
            if rest <= 0.25 * abs_tol {
                error += rest;
                break;
            }
        }
    }
    Ok(Quad { value, error })
}

/// ∫_start^∞ cos(freq·p)·g(p) dp for g positive, decreasing to zero, of smooth
/// algebraic or exponential decay.
///
/// The range up to the first cosine zero past `start` is integrated directly;
/// after that the integral is summed over half-period panels, whose signs
/// alternate, and the partial-sum sequence is accelerated by iterated pairwise
/// averaging (Euler transformation). That turns the O(g(P)/freq) truncation
/// error of a plain cutoff into a factor shrinking geometrically in the panel
/// count, which is what makes slowly decaying envelopes like 1/ψ(p) affordable.
pub fn cos_tail<G: Fn(f64) -> f64>(g: G, freq: f64, start: f64, abs_tol: f64) -> Result<Quad> {
    if !(freq > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cos_tail requires a positive frequency, got {freq:e}"
        )));
    }
    if start < 0.0 {
        return Err(Error::InvalidArgument(
            "cos_tail requires a nonnegative start".into(),
        ));
    }
    let mut f = |p: f64| (freq * p).cos() * g(p);
    // First zero of cos(freq·p) at or beyond start: (k+1/2)π/freq.
    let k0 = ((start * freq / PI) - 0.5).ceil().max(0.0);
    let z0 = (k0 + 0.5) * PI / freq;
    let head = adaptive(&mut f, start, z0, 0.25 * abs_tol, 4000)?;

    const N: usize = 32;
    let half = PI / freq;
    let mut partial = [0.0_f64; N];
    let mut acc = 0.0;
    let mut panel_err = 0.0;
    for (j, slot) in partial.iter_mut().enumerate() {
        let lo = z0 + j as f64 * half;
        let q = adaptive(&mut f, lo, lo + half, 0.25 * abs_tol / N as f64, 2000)?;
        acc += q.value;
        panel_err += q.error;
        *slot = acc;
    }

    // Iterated averaging of partial sums; successive stages estimate the limit
    // of the alternating series, and the last stage difference bounds the
    // acceleration error.
    let mut stage: Vec<f64> = partial.to_vec();
    let mut prev_final = stage[N - 1];
    let mut accel_err = f64::INFINITY;
    while stage.len() > 1 {
        for i in 0..stage.len() - 1 {
            stage[i] = 0.5 * (stage[i] + stage[i + 1]);
        }
        stage.pop();
        let fin = *stage.last().unwrap();
        accel_err = (fin - prev_final).abs();
        prev_final = fin;
    }

    Ok(Quad {
        value: head.value + stage[0],
        error: head.error + panel_err + accel_err,
    })
}

/// ∫_start^∞ g(p) dp for monotone, non-oscillatory g decaying like p^-γ with
/// γ > 1, via the substitution p = start/v mapping the tail onto (0, 1].
pub fn tail_by_inversion<G: Fn(f64) -> f64>(g: G, start: f64, abs_tol: f64) -> Result<Quad> {
    if !(start > 0.0) {
        return Err(Error::InvalidArgument(
            "tail_by_inversion requires a positive start".into(),
        ));
    }
    adaptive(
        |v: f64| {
            let p = start / v;
            g(p) * start / (v * v)
        },
        0.0,
        1.0,
        abs_tol,
        4000,
    )
}

/// Chebyshev interpolant of a smooth function on [a, b].
#[derive(Clone, Debug)]
pub struct Cheb {
    a: f64,
    b: f64,
    coef: Vec<f64>,
}

impl Cheb {
    /// Fits an n-coefficient interpolant through the Chebyshev nodes.
    pub fn fit<F: FnMut(f64) -> Result<f64>>(a: f64, b: f64, n: usize, mut f: F) -> Result<Cheb> {
        if !(b > a) || n < 2 {
            return Err(Error::InvalidArgument(
                "Cheb::fit needs b > a and at least two nodes".into(),
            ));
        }
        let mut fv = Vec::with_capacity(n);
        for k in 0..n {
            let theta = PI * (k as f64 + 0.5) / n as f64;
            let x = 0.5 * (a + b) + 0.5 * (b - a) * theta.cos();
            fv.push(f(x)?);
        }
        let mut coef = Vec::with_capacity(n);
        for j in 0..n {
            let mut s = 0.0;
            for (k, v) in fv.iter().enumerate() {
                s += v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos();
            }
            let scale = if j == 0 { 1.0 } else { 2.0 };
            coef.push(scale * s / n as f64);
        }
        Ok(Cheb { a, b, coef })
    }

    /// Clenshaw evaluation; `x` must lie in the fitted interval.
    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coef.iter().skip(1).rev() {
            let b0 = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        self.coef[0] + t * b1 - b2
    }

    /// Magnitude of the trailing coefficient pair, a cheap convergence gauge.
    pub fn tail_magnitude(&self) -> f64 {
        let n = self.coef.len();
        self.coef[n - 1].abs().max(self.coef[n - 2].abs())
    }
}
