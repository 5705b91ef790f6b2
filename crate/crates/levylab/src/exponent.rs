//! Symmetric Lévy exponents ψ(λ) = Σᵢ cᵢ|λ|^{βᵢ} with every βᵢ in (1, 2].
//!
//! This family covers the symmetric stable processes and their independent
//! mixtures. The restriction βᵢ > 1 keeps local times existing and jointly
//! continuous; βᵢ ≤ 2 is forced by negative definiteness.

use crate::error::{Error, Result};
use crate::quad;
use serde::Serialize;
use std::fmt;

#[derive(Clone, Debug, PartialEq)]
pub enum LevyExponent {
    /// ψ(λ) = |λ|^β. β = 2 is Brownian motion run at twice the usual speed
    /// (E e^{iλX_t} = e^{-tλ²}, i.e. variance 2t).
    Stable { beta: f64 },
    /// ψ(λ) = Σ wᵢ|λ|^{βᵢ}, the exponent of a sum of independent scaled
    /// stable processes. Pairs are (weight, index).
    StableMixture { components: Vec<(f64, f64)> },
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 1.0 && beta <= 2.0) {
        return Err(Error::InvalidExponent(format!(
            "stability index must lie in (1, 2], got {beta}"
        )));
    }
    Ok(())
}

impl LevyExponent {
    pub fn stable(beta: f64) -> Result<Self> {
        check_beta(beta)?;
        Ok(LevyExponent::Stable { beta })
    }

    pub fn mixture(components: &[(f64, f64)]) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidExponent(
                "mixture needs at least one component".into(),
            ));
        }
        for &(w, beta) in components {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::InvalidExponent(format!(
                    "component weight must be positive and finite, got {w}"
                )));
            }
            check_beta(beta)?;
        }
        Ok(LevyExponent::StableMixture {
            components: components.to_vec(),
        })
    }

    /// Component list in (weight, index) form; a pure stable is one unit-weight
    /// component.
    pub fn components(&self) -> Vec<(f64, f64)> {
        match self {
            LevyExponent::Stable { beta } => vec![(1.0, *beta)],
            LevyExponent::StableMixture { components } => components.clone(),
        }
    }

    /// The index governing small-scale behaviour: max of the component indices.
    pub fn beta_infinity(&self) -> f64 {
        self.components()
            .iter()
            .map(|&(_, b)| b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Some(β) when the exponent is exactly |λ|^β.
    pub fn pure_beta(&self) -> Option<f64> {
        match self {
            LevyExponent::Stable { beta } => Some(*beta),
            LevyExponent::StableMixture { components } => {
                if components.len() == 1 && components[0].0 == 1.0 {
                    Some(components[0].1)
                } else {
                    None
                }
            }
        }
    }

    pub fn eval_psi(&self, lambda: f64) -> f64 {
        let a = lambda.abs();
        if a == 0.0 {
            return 0.0;
        }
        self.components().iter().map(|&(w, b)| w * a.powf(b)).sum()
    }

    /// First and second derivatives of ψ at λ > 0.
    pub fn eval_psi_derivs(&self, lambda: f64) -> Result<(f64, f64)> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "derivatives of ψ are evaluated at λ > 0 only, got {lambda}"
            )));
        }
        let mut d1 = 0.0;
        let mut d2 = 0.0;
        for (w, b) in self.components() {
            d1 += w * b * lambda.powf(b - 1.0);
            d2 += w * b * (b - 1.0) * lambda.powf(b - 2.0);
        }
        Ok((d1, d2))
    }

    /// Inverse of ψ on [0, ∞). Closed form for a pure stable; otherwise a
    /// doubling bracket followed by bisection to relative residual 1e-12.
    pub fn psi_inverse(&self, u: f64) -> Result<f64> {
        if !(u >= 0.0) || !u.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "psi_inverse needs a finite u ≥ 0, got {u}"
            )));
        }
        if u == 0.0 {
            return Ok(0.0);
        }
        if let Some(beta) = self.pure_beta() {
            return Ok(u.powf(1.0 / beta));
        }
        let tol = 1e-12 * u.max(1.0);
        let mut hi = 1.0_f64;
        let mut doublings = 0;
        while self.eval_psi(hi) < u {
            hi *= 2.0;
            doublings += 1;
            if doublings > 1100 {
                return Err(Error::RootFinding(format!(
                    "bracket for psi_inverse({u:e}) did not close"
                )));
            }
        }
        let mut lo = 0.0_f64;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let v = self.eval_psi(mid);
            if (v - u).abs() <= tol {
                return Ok(mid);
            }
            if v < u {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= f64::EPSILON * hi {
                break;
            }
        }
        // ψ is smooth and strictly monotone, so the bisection limit sits at
        // the f64 resolution of the root; accept it.
        Ok(0.5 * (lo + hi))
    }

    /// Checks the standing regularity assumptions on ψ over a grid of λ ≥ 1:
    /// boundedness of λ|ψ′|/ψ and λ²|ψ″|/ψ, plus finiteness of the three
    /// low-frequency integrals ∫₀¹(ψ′)²dλ, ∫₀¹|ψ″|dλ, ∫₀¹ψ(λ)/λ dλ.
    pub fn check_regularity(&self, grid: &[f64]) -> Result<RegularityReport> {
        if grid.is_empty() {
            return Err(Error::InvalidArgument(
                "regularity check needs a nonempty λ grid".into(),
            ));
        }
        for &l in grid {
            if !(l >= 1.0) || !l.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "regularity grid points must be finite and ≥ 1, got {l}"
                )));
            }
        }
        let mut ratios_d1 = Vec::with_capacity(grid.len());
        let mut ratios_d2 = Vec::with_capacity(grid.len());
        for &l in grid {
            let psi = self.eval_psi(l);
            let (d1, d2) = self.eval_psi_derivs(l)?;
            ratios_d1.push(l * d1.abs() / psi);
            ratios_d2.push(l * l * d2.abs() / psi);
        }
        let sup_ratio_d1 = ratios_d1.iter().cloned().fold(0.0, f64::max);
        let sup_ratio_d2 = ratios_d2.iter().cloned().fold(0.0, f64::max);

        // (ψ′)² and ψ/λ vanish at 0 for β > 1; ψ″ ~ λ^{β-2} is an integrable
        // endpoint singularity the adaptive rule refines into.
        let integral_d1_sq = quad::adaptive(
            |l| {
                self.eval_psi_derivs(l)
                    .map(|(d1, _)| d1 * d1)
                    .unwrap_or(f64::NAN)
            },
            0.0,
            1.0,
            1e-10,
            4000,
        )?
        .value;
        let integral_d2_abs = quad::adaptive(
            |l| {
                self.eval_psi_derivs(l)
                    .map(|(_, d2)| d2.abs())
                    .unwrap_or(f64::NAN)
            },
            0.0,
            1.0,
            1e-10,
            4000,
        )?
        .value;
        let integral_low_freq = quad::adaptive(
            |l| if l == 0.0 { 0.0 } else { self.eval_psi(l) / l },
            0.0,
            1.0,
            1e-10,
            4000,
        )?
        .value;

        // For this parametric family λψ′/ψ and λ²ψ″/ψ are exact mixtures of
        // βᵢ and βᵢ(βᵢ−1), so 2 + slack is the sharp admissibility bound.
        let pass = sup_ratio_d1 <= 2.0 * (1.0 + 1e-12)
            && sup_ratio_d2 <= 2.0 * (1.0 + 1e-12)
            && integral_d1_sq.is_finite()
            && integral_d2_abs.is_finite()
            && integral_low_freq.is_finite();

        Ok(RegularityReport {
            exponent: self.to_string(),
            grid: grid.to_vec(),
            ratios_d1,
            ratios_d2,
            sup_ratio_d1,
            sup_ratio_d2,
            integral_d1_sq,
            integral_d2_abs,
            integral_low_freq,
            pass,
        })
    }

    /// Parses "stable:B" or "mix:W1*B1+W2*B2+...".
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix("stable:") {
            let beta: f64 = rest
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad stability index in {s:?}")))?;
            return LevyExponent::stable(beta);
        }
        if let Some(rest) = s.strip_prefix("mix:") {
            let mut components = Vec::new();
            for part in rest.split('+') {
                let (w_str, b_str) = part.split_once('*').ok_or_else(|| {
                    Error::Parse(format!(
                        "mixture component {part:?} must look like WEIGHT*INDEX"
                    ))
                })?;
                let w: f64 = w_str
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad weight in {part:?}")))?;
                let b: f64 = b_str
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad index in {part:?}")))?;
                components.push((w, b));
            }
            return LevyExponent::mixture(&components);
        }
        Err(Error::Parse(format!(
            "exponent {s:?} must start with \"stable:\" or \"mix:\""
        )))
    }
}

impl fmt::Display for LevyExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LevyExponent::Stable { beta } => write!(f, "stable:{beta}"),
            LevyExponent::StableMixture { components } => {
                write!(f, "mix:")?;
                for (i, (w, b)) in components.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{w}*{b}")?;
                }
                Ok(())
            }
        }
    }
}

// reports echo the exponent as its canonical parseable string
impl Serialize for LevyExponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Outcome of `check_regularity`: pointwise derivative-to-ψ ratios on the
/// grid and the three low-frequency integrals the local-time theory needs.
#[derive(Clone, Debug, Serialize)]
pub struct RegularityReport {
    pub exponent: String,
    pub grid: Vec<f64>,
    pub ratios_d1: Vec<f64>,
    pub ratios_d2: Vec<f64>,
    pub sup_ratio_d1: f64,
    pub sup_ratio_d2: f64,
    pub integral_d1_sq: f64,
    pub integral_d2_abs: f64,
    pub integral_low_freq: f64,
    pub pass: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_indices() {
        assert!(LevyExponent::stable(1.0).is_err());
        assert!(LevyExponent::stable(2.2).is_err());
        assert!(LevyExponent::stable(f64::NAN).is_err());
        assert!(LevyExponent::mixture(&[]).is_err());
        assert!(LevyExponent::mixture(&[(-1.0, 1.5)]).is_err());
        assert!(LevyExponent::mixture(&[(1.0, 0.9)]).is_err());
    }

    #[test]
    fn psi_values() {
        let e = LevyExponent::stable(1.5).unwrap();
        assert_eq!(e.eval_psi(0.0), 0.0);
        assert!((e.eval_psi(2.0) - 2.0_f64.powf(1.5)).abs() < 1e-15);
        assert!((e.eval_psi(-2.0) - 2.0_f64.powf(1.5)).abs() < 1e-15);

        let m = LevyExponent::mixture(&[(0.5, 1.8), (2.0, 1.2)]).unwrap();
        let l = 3.0_f64;
        assert!((m.eval_psi(l) - (0.5 * l.powf(1.8) + 2.0 * l.powf(1.2))).abs() < 1e-12);
        assert!((m.beta_infinity() - 1.8).abs() < 1e-15);
    }

    #[test]
    fn derivs_match_finite_differences() {
        let m = LevyExponent::mixture(&[(1.0, 1.7), (0.3, 1.3)]).unwrap();
        for &l in &[0.5, 1.0, 4.0] {
            let (d1, d2) = m.eval_psi_derivs(l).unwrap();
            let dl = 1e-5 * l;
            let fd1 = (m.eval_psi(l + dl) - m.eval_psi(l - dl)) / (2.0 * dl);
            let fd2 = (m.eval_psi(l + dl) - 2.0 * m.eval_psi(l) + m.eval_psi(l - dl)) / (dl * dl);
            assert!((d1 - fd1).abs() < 1e-6 * d1.abs());
            assert!((d2 - fd2).abs() < 1e-4 * d2.abs());
        }
        assert!(m.eval_psi_derivs(0.0).is_err());
    }

    #[test]
    fn psi_inverse_roundtrip() {
        let pure = LevyExponent::stable(1.5).unwrap();
        assert!((pure.psi_inverse(8.0).unwrap() - 4.0).abs() < 1e-12);

        let m = LevyExponent::mixture(&[(1.0, 2.0), (1.0, 1.5)]).unwrap();
        for &u in &[1e-6, 0.37, 1.0, 55.0, 1e9] {
            let l = m.psi_inverse(u).unwrap();
            assert!(
                (m.eval_psi(l) - u).abs() <= 1e-11 * u.max(1.0),
                "u={u}: ψ(λ*)={}",
                m.eval_psi(l)
            );
        }
        assert_eq!(m.psi_inverse(0.0).unwrap(), 0.0);
        assert!(m.psi_inverse(-1.0).is_err());
    }

    #[test]
    fn parse_display_roundtrip() {
        for s in ["stable:1.5", "mix:0.5*1.8+0.5*1.2", "mix:1*2+3*1.4"] {
            let e = LevyExponent::parse(s).unwrap();
            let e2 = LevyExponent::parse(&e.to_string()).unwrap();
            assert_eq!(e, e2);
        }
        assert!(LevyExponent::parse("gaussian").is_err());
        assert!(LevyExponent::parse("mix:1.8").is_err());
        assert!(LevyExponent::parse("stable:0.5").is_err());
    }

    // Closed forms for the pure stable case: ∫₀¹(ψ′)² = β²/(2β−1),
    // ∫₀¹ψ″ = β, ∫₀¹ψ/λ = 1/β.
    #[test]
    fn regularity_integrals_pure_stable() {
        for &beta in &[1.2, 1.5, 2.0] {
            let e = LevyExponent::stable(beta).unwrap();
            let r = e.check_regularity(&[1.0, 4.0, 64.0]).unwrap();
            assert!(
                (r.integral_d1_sq - beta * beta / (2.0 * beta - 1.0)).abs() < 1e-8,
                "beta={beta}"
            );
            assert!((r.integral_d2_abs - beta).abs() < 1e-8, "beta={beta}");
            assert!(
                (r.integral_low_freq - 1.0 / beta).abs() < 1e-8,
                "beta={beta}"
            );
            assert!((r.sup_ratio_d1 - beta).abs() < 1e-12);
            assert!((r.sup_ratio_d2 - beta * (beta - 1.0)).abs() < 1e-12);
            assert!(r.pass);
        }
    }

    // Mixture cross terms: ∫₀¹(Σwᵢβᵢλ^{βᵢ−1})² = ΣᵢΣⱼ wᵢwⱼβᵢβⱼ/(βᵢ+βⱼ−1).
    #[test]
    fn regularity_integrals_mixture() {
        let comps = [(0.7, 1.9), (1.3, 1.4)];
        let e = LevyExponent::mixture(&comps).unwrap();
        let r = e.check_regularity(&[1.0, 10.0]).unwrap();
        let mut want = 0.0;
        for &(wi, bi) in &comps {
            for &(wj, bj) in &comps {
                want += wi * wj * bi * bj / (bi + bj - 1.0);
            }
        }
        assert!((r.integral_d1_sq - want).abs() < 1e-8);
        let want_d2: f64 = comps.iter().map(|&(w, b)| w * b).sum();
        assert!((r.integral_d2_abs - want_d2).abs() < 1e-8);
        let want_lf: f64 = comps.iter().map(|&(w, b)| w / b).sum();
        assert!((r.integral_low_freq - want_lf).abs() < 1e-8);
        assert!(r.pass);
    }
}
