//! Monte Carlo experiments tying the path-level estimators to their
//! quadrature ground truth: the central limit law of the L² modulus J_h, the
//! occupation-square scaling in t, mean convergence of J_h, and moment-norm
//! bounds for α_t.
//!
//! Determinism: replicate i of every batch is generated from a seed derived
//! as (base seed, purpose tag, i), and parallel collection preserves index
//! order, so reports are byte-identical for any thread count.

use crate::constants;
use crate::error::{Error, Result};
use crate::exponent::LevyExponent;
use crate::kac;
use crate::localtime::{estimate_local_time, GridSpec, LocalTimeField};
use crate::simulate::{derive_seed, standard_symmetric_stable, PathConfig, SamplePath};
use crate::stats;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::SQRT_2;
use std::time::Instant;

const TAG_Z_PATHS: u64 = 0xA1;
const TAG_MIX_ALPHA: u64 = 0xA2;
const TAG_MIX_ETA: u64 = 0xA3;
const TAG_BATCH: u64 = 0xB0;

/// Which exact mean m(h) to subtract from J_h before rescaling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Centering {
    /// m(h) = E[J_h] from the moment quadrature (any exponent).
    KacExact,
    /// m(h) = 4c_{β,0}h^{β-1}t, the exact leading term; pure stable only.
    StableClosedForm,
}

impl std::str::FromStr for Centering {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kac_exact" => Ok(Centering::KacExact),
            "stable_closed_form" => Ok(Centering::StableClosedForm),
            other => Err(Error::Parse(format!(
                "unknown centering '{other}' (expected kac_exact or stable_closed_form)"
            ))),
        }
    }
}

/// Configuration of the CLT experiment. The spatial grid policy is: each
/// path gets a covering grid of bin width `eps` padded two bins past its
/// range, and every h in the schedule must be an integer multiple of eps.
#[derive(Clone, Debug, Serialize)]
pub struct CltConfig {
    pub exponent: LevyExponent,
    pub h_schedule: Vec<f64>,
    pub n_paths: usize,
    pub n_steps: usize,
    pub horizon: f64,
    pub eps: f64,
    pub seed: u64,
    pub centering: Centering,
}

impl CltConfig {
    fn validate(&self) -> Result<()> {
        if self.h_schedule.is_empty() {
            return Err(Error::InvalidArgument("h_schedule must be nonempty".into()));
        }
        for w in self.h_schedule.windows(2) {
            if !(w[1] < w[0]) {
                return Err(Error::InvalidArgument(
                    "h_schedule must be strictly decreasing".into(),
                ));
            }
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad eps {}", self.eps)));
        }
        for &h in &self.h_schedule {
            let ratio = h / self.eps;
            let k = ratio.round();
            if !(k >= 1.0) || (ratio - k).abs() > 1e-9 * k.max(1.0) {
                return Err(Error::InvalidArgument(format!(
                    "h = {h} is not an integer multiple of eps = {}",
                    self.eps
                )));
            }
        }
        if self.n_paths < 100 {
            return Err(Error::InvalidArgument(format!(
                "n_paths must be at least 100 for stable sample statistics, got {}",
                self.n_paths
            )));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidArgument("n_steps must be positive".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "bad horizon {}",
                self.horizon
            )));
        }
        Ok(())
    }
}

fn field_for(path: &SamplePath, eps: f64) -> Result<LocalTimeField> {
    let lo = path.positions.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = path
        .positions
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(estimate_local_time(path, GridSpec::cover(lo, hi, eps)?))
}

/// Independent α̂ batch: replicate i is a fresh path at the given horizon.
fn alpha_batch(
    exponent: &LevyExponent,
    t: f64,
    n_steps: usize,
    eps: f64,
    base_seed: u64,
    n_paths: usize,
) -> Result<Vec<f64>> {
    let cfg = PathConfig::new(exponent.clone(), t, n_steps, base_seed)?;
    (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let p = cfg.sample(i as u64);
            Ok(field_for(&p, eps)?.alpha())
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct HLevel {
    pub h: f64,
    /// exact mean m(h) subtracted before rescaling
    pub centering_value: f64,
    /// √(hψ²(1/h))
    pub scale: f64,
    /// Z_h per path, in replicate order
    pub samples: Vec<f64>,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub skewness: f64,
    /// Var(Z_h) / (8c_{β,1}E[α₁])
    pub variance_ratio: f64,
    pub ks_d: f64,
    pub ks_p: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MixtureInfo {
    /// derived seeds actually used for the α' batch and the η stream
    pub seed_alpha: u64,
    pub seed_eta: u64,
    pub n: usize,
    pub n_steps: usize,
    pub eps: f64,
    /// W = √(8c_{β,1} α̂')·η per replicate
    pub samples: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CltReport {
    pub config: CltConfig,
    pub beta_infinity: f64,
    pub c_beta_1: f64,
    pub mean_alpha_one: f64,
    /// 8c_{β,1}E[α₁], the variance of the limit law
    pub limit_variance: f64,
    pub levels: Vec<HLevel>,
    pub mixture: MixtureInfo,
    pub verdicts: Vec<Verdict>,
    #[serde(skip)]
    pub runtime_seconds: f64,
}

/// Samples Z_h = √(hψ²(1/h))·(J_h − m(h)) across the h schedule and compares
/// against the limit mixture W = √(8c_{β,1}α₁)·η drawn from an independent
/// α batch and an independent Gaussian stream.
pub fn clt_experiment(config: &CltConfig) -> Result<CltReport> {
    let start = Instant::now();
    config.validate()?;
    if config.horizon != 1.0 {
        return Err(Error::InvalidArgument(
            "the modulus CLT is normalized at horizon 1; scale time first".into(),
        ));
    }
    let beta = config.exponent.beta_infinity();
    let c1 = constants::c_beta_1(beta)?;
    let e_alpha = kac::mean_alpha(&config.exponent, 1.0)?;
    let limit_variance = 8.0 * c1 * e_alpha;

    let centering: Vec<f64> = match config.centering {
        Centering::KacExact => config
            .h_schedule
            .iter()
            .map(|&h| kac::mean_sq_increment(&config.exponent, 1.0, h))
            .collect::<Result<_>>()?,
        Centering::StableClosedForm => {
            let b = config.exponent.pure_beta().ok_or_else(|| {
                Error::InvalidArgument(
                    "closed-form centering is exact only for a pure stable exponent".into(),
                )
            })?;
            let c0 = constants::c_beta_0(b)?;
            config
                .h_schedule
                .iter()
                .map(|&h| 4.0 * c0 * h.powf(b - 1.0))
                .collect()
        }
    };
    let scales: Vec<f64> = config
        .h_schedule
        .iter()
        .map(|&h| {
            let psi = config.exponent.eval_psi(1.0 / h);
            (h * psi * psi).sqrt()
        })
        .collect();

    let path_cfg = PathConfig::new(
        config.exponent.clone(),
        1.0,
        config.n_steps,
        derive_seed(config.seed, TAG_Z_PATHS, 0),
    )?;
    let j_rows: Vec<Vec<f64>> = (0..config.n_paths)
        .into_par_iter()
        .map(|i| {
            let path = path_cfg.sample(i as u64);
            let field = field_for(&path, config.eps)?;
            config
                .h_schedule
                .iter()
                .map(|&h| field.l2_modulus(h))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let seed_alpha = derive_seed(config.seed, TAG_MIX_ALPHA, 0);
    let seed_eta = derive_seed(config.seed, TAG_MIX_ETA, 0);
    let alphas = alpha_batch(
        &config.exponent,
        1.0,
        config.n_steps,
        config.eps,
        seed_alpha,
        config.n_paths,
    )?;
    let mut eta_rng = ChaCha8Rng::seed_from_u64(seed_eta);
    let w_samples: Vec<f64> = alphas
        .iter()
        .map(|&a| {
            let eta = standard_symmetric_stable(&mut eta_rng, 2.0) / SQRT_2;
            (8.0 * c1 * a).sqrt() * eta
        })
        .collect();

    let mut levels = Vec::with_capacity(config.h_schedule.len());
    for (k, &h) in config.h_schedule.iter().enumerate() {
        let samples: Vec<f64> = j_rows
            .iter()
            .map(|row| scales[k] * (row[k] - centering[k]))
            .collect();
        let sample_mean = stats::mean(&samples);
        let sample_variance = stats::sample_variance(&samples);
        let ks = stats::ks_two_sample(&samples, &w_samples)?;
        levels.push(HLevel {
            h,
            centering_value: centering[k],
            scale: scales[k],
            sample_mean,
            sample_variance,
            skewness: stats::skewness(&samples),
            variance_ratio: sample_variance / limit_variance,
            ks_d: ks.d,
            ks_p: ks.p_value,
            samples,
        });
    }

    let vr_first = levels.first().map(|l| l.variance_ratio).unwrap();
    let last = levels.last().unwrap();
    let verdicts = vec![
        Verdict {
            name: "variance ratio drifts toward one".into(),
            pass: (last.variance_ratio - 1.0).abs() <= (vr_first - 1.0).abs() + 0.05,
        },
        Verdict {
            name: "final variance ratio within [0.7, 1.3]".into(),
            pass: (0.7..=1.3).contains(&last.variance_ratio),
        },
        Verdict {
            name: "KS p-value at smallest h above 0.01".into(),
            pass: last.ks_p > 0.01,
        },
    ];

    Ok(CltReport {
        config: config.clone(),
        beta_infinity: beta,
        c_beta_1: c1,
        mean_alpha_one: e_alpha,
        limit_variance,
        levels,
        mixture: MixtureInfo {
            seed_alpha,
            seed_eta,
            n: config.n_paths,
            n_steps: config.n_steps,
            eps: config.eps,
            samples: w_samples,
        },
        verdicts,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingRow {
    pub t: f64,
    pub eps: f64,
    pub alpha_mean: f64,
    pub alpha_mean_se: f64,
    pub alpha_second_moment: f64,
    pub predicted_mean: f64,
    pub predicted_second_moment: f64,
    pub ratio_mean: f64,
    pub ratio_second_moment: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub exponent: LevyExponent,
    pub beta: f64,
    /// E α_t = t^γ E α₁ with γ = (2β−1)/β for the pure stable process
    pub gamma: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub eps_base: f64,
    pub seed: u64,
    pub base_mean: f64,
    pub base_second_moment: f64,
    pub rows: Vec<ScalingRow>,
    #[serde(skip)]
    pub runtime_seconds: f64,
}

/// Self-similarity of α_t for a pure stable process: the mean and second
/// moment of an independent α̂ batch at each t against t^γ (resp. t^{2γ})
/// times the reference batch at t = 1. The grid width shrinks like t^{1/β}
/// so relative spatial resolution is constant across horizons.
pub fn scaling_experiment(
    exponent: &LevyExponent,
    t_grid: &[f64],
    n_paths: usize,
    n_steps: usize,
    eps_base: f64,
    seed: u64,
) -> Result<ScalingReport> {
    let start = Instant::now();
    let beta = exponent.pure_beta().ok_or_else(|| {
        Error::InvalidArgument("the scaling law is exact only for a pure stable exponent".into())
    })?;
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("t_grid must be nonempty".into()));
    }
    for &t in t_grid {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "scaling horizons must lie in (0, 1], got {t}"
            )));
        }
    }
    if n_paths < 2 {
        return Err(Error::InvalidArgument("need at least 2 paths".into()));
    }
    let gamma = (2.0 * beta - 1.0) / beta;

    let base = alpha_batch(
        exponent,
        1.0,
        n_steps,
        eps_base,
        derive_seed(seed, TAG_BATCH, 0),
        n_paths,
    )?;
    let base_mean = stats::mean(&base);
    let base_second = base.iter().map(|a| a * a).sum::<f64>() / n_paths as f64;

    let mut rows = Vec::with_capacity(t_grid.len());
    for (idx, &t) in t_grid.iter().enumerate() {
        let eps = eps_base * t.powf(1.0 / beta);
        let batch = alpha_batch(
            exponent,
            t,
            n_steps,
            eps,
            derive_seed(seed, TAG_BATCH, 1 + idx as u64),
            n_paths,
        )?;
        let mean = stats::mean(&batch);
        let se = (stats::sample_variance(&batch) / n_paths as f64).sqrt();
        let second = batch.iter().map(|a| a * a).sum::<f64>() / n_paths as f64;
        let predicted_mean = t.powf(gamma) * base_mean;
        let predicted_second = t.powf(2.0 * gamma) * base_second;
        rows.push(ScalingRow {
            t,
            eps,
            alpha_mean: mean,
            alpha_mean_se: se,
            alpha_second_moment: second,
            predicted_mean,
            predicted_second_moment: predicted_second,
            ratio_mean: mean / predicted_mean,
            ratio_second_moment: second / predicted_second,
        });
    }

    Ok(ScalingReport {
        exponent: exponent.clone(),
        beta,
        gamma,
        n_paths,
        n_steps,
        eps_base,
        seed,
        base_mean,
        base_second_moment: base_second,
        rows,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanRow {
    pub h: f64,
    pub mc_mean: f64,
    pub mc_se: f64,
    /// E[J_h] from the moment quadrature
    pub exact_mean: f64,
    /// 4c_{ψ,h,0}·t
    pub leading_term: f64,
    pub residual_mc: f64,
    pub residual_exact: f64,
    /// remainder shape ḡ(h) the residual is measured against
    pub ghat: f64,
    pub variance_bound: f64,
    /// J̄_h / h^{β−1} for the pure-stable rescaling (None for mixtures)
    pub scaled_mc_mean: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MeanConvergenceReport {
    pub exponent: LevyExponent,
    pub t: f64,
    pub n_paths: usize,
    pub n_steps: usize,
    pub eps: f64,
    pub seed: u64,
    /// 4c_{β,0}·t, the pure-stable limit of J̄_h/h^{β−1} (None for mixtures)
    pub scaled_limit: Option<f64>,
    pub rows: Vec<MeanRow>,
    #[serde(skip)]
    pub runtime_seconds: f64,
}

/// h-independent remainder shape ḡ(h): h² above index 3/2, h²log(1/h) at
/// 3/2, 1/(hψ²(1/h)) below.
pub fn ghat(exponent: &LevyExponent, h: f64) -> f64 {
    let beta = exponent.beta_infinity();
    if (beta - 1.5).abs() < 1e-9 {
        h * h * (1.0 / h).ln()
    } else if beta > 1.5 {
        h * h
    } else {
        let psi_h = exponent.eval_psi(1.0 / h);
        1.0 / (h * psi_h * psi_h)
    }
}

/// Monte Carlo means of J_h against the exact quadrature mean, with error
/// bars from the sample variance and the a-priori variance bound, and the
/// residual measured against the remainder shape ḡ(h).
pub fn mean_convergence_experiment(
    exponent: &LevyExponent,
    t: f64,
    h_schedule: &[f64],
    n_paths: usize,
    n_steps: usize,
    eps: f64,
    seed: u64,
) -> Result<MeanConvergenceReport> {
    let start = Instant::now();
    if n_paths == 0 {
        return Err(Error::InvalidArgument(
            "mean convergence needs at least one path".into(),
        ));
    }
    if n_paths < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 paths for a standard error".into(),
        ));
    }
    if h_schedule.is_empty() {
        return Err(Error::InvalidArgument("h_schedule must be nonempty".into()));
    }
    let pure = exponent.pure_beta();
    let scaled_limit = match pure {
        Some(b) => Some(4.0 * constants::c_beta_0(b)? * t),
        None => None,
    };

    let cfg = PathConfig::new(
        exponent.clone(),
        t,
        n_steps,
        derive_seed(seed, TAG_Z_PATHS, 0),
    )?;
    let j_rows: Vec<Vec<f64>> = (0..n_paths)
        .into_par_iter()
        .map(|i| {
            let path = cfg.sample(i as u64);
            let field = field_for(&path, eps)?;
            h_schedule
                .iter()
                .map(|&h| field.l2_modulus(h))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(h_schedule.len());
    for (k, &h) in h_schedule.iter().enumerate() {
        let js: Vec<f64> = j_rows.iter().map(|r| r[k]).collect();
        let mc_mean = stats::mean(&js);
        let mc_se = (stats::sample_variance(&js) / n_paths as f64).sqrt();
        let exact_mean = kac::mean_sq_increment(exponent, t, h)?;
        let leading = 4.0 * constants::c_psi_h_0(exponent, h)? * t;
        let bound = kac::variance_bound_check(exponent, t, h)?.total_bound;
        rows.push(MeanRow {
            h,
            mc_mean,
            mc_se,
            exact_mean,
            leading_term: leading,
            residual_mc: mc_mean - leading,
            residual_exact: exact_mean - leading,
            ghat: ghat(exponent, h),
            variance_bound: bound,
            scaled_mc_mean: pure.map(|b| mc_mean / h.powf(b - 1.0)),
        });
    }

    Ok(MeanConvergenceReport {
        exponent: exponent.clone(),
        t,
        n_paths,
        n_steps,
        eps,
        seed,
        scaled_limit,
        rows,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentBoundRow {
    pub t: f64,
    pub eps: f64,
    /// ‖α_t‖_n = (mean α̂ⁿ)^{1/n} for n = 1, 2, 3
    pub norms: [f64; 3],
    pub mean_se: f64,
    /// t²ψ⁻¹(1/t)
    pub bound_scale: f64,
    pub ratios: [f64; 3],
    pub exact_mean: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MomentBoundReport {
    pub exponent: LevyExponent,
    pub n_paths: usize,
    pub n_steps: usize,
    pub eps_base: f64,
    pub seed: u64,
    pub rows: Vec<MomentBoundRow>,
    pub max_ratios: [f64; 3],
    #[serde(skip)]
    pub runtime_seconds: f64,
}

/// Moment norms of α_t against the scale t²ψ⁻¹(1/t) over a grid of horizons:
/// the ratios should stay bounded as t decreases. The first norm is also
/// cross-checked against the exact mean.
pub fn moment_bound_experiment(
    exponent: &LevyExponent,
    t_grid: &[f64],
    n_paths: usize,
    n_steps: usize,
    eps_base: f64,
    seed: u64,
) -> Result<MomentBoundReport> {
    let start = Instant::now();
    if t_grid.is_empty() {
        return Err(Error::InvalidArgument("t_grid must be nonempty".into()));
    }
    if n_paths < 2 {
        return Err(Error::InvalidArgument("need at least 2 paths".into()));
    }
    let beta = exponent.beta_infinity();
    let mut rows = Vec::with_capacity(t_grid.len());
    for (idx, &t) in t_grid.iter().enumerate() {
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "horizons must lie in (0, 1], got {t}"
            )));
        }
        let eps = eps_base * t.powf(1.0 / beta);
        let batch = alpha_batch(
            exponent,
            t,
            n_steps,
            eps,
            derive_seed(seed, TAG_BATCH, idx as u64),
            n_paths,
        )?;
        let mut norms = [0.0; 3];
        for (n, norm) in norms.iter_mut().enumerate() {
            let p = (n + 1) as f64;
            let m = batch.iter().map(|a| a.powf(p)).sum::<f64>() / n_paths as f64;
            *norm = m.powf(1.0 / p);
        }
        let mean_se = (stats::sample_variance(&batch) / n_paths as f64).sqrt();
        let scale = t * t * exponent.psi_inverse(1.0 / t)?;
        rows.push(MomentBoundRow {
            t,
            eps,
            norms,
            mean_se,
            bound_scale: scale,
            ratios: [norms[0] / scale, norms[1] / scale, norms[2] / scale],
            exact_mean: kac::mean_alpha(exponent, t)?,
        });
    }
    let mut max_ratios = [0.0f64; 3];
    for row in &rows {
        for (m, r) in max_ratios.iter_mut().zip(&row.ratios) {
            *m = m.max(*r);
        }
    }
    Ok(MomentBoundReport {
        exponent: exponent.clone(),
        n_paths,
        n_steps,
        eps_base,
        seed,
        rows,
        max_ratios,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report;

    fn quick_cfg() -> CltConfig {
        CltConfig {
            exponent: LevyExponent::stable(2.0).unwrap(),
            h_schedule: vec![0.2, 0.1],
            n_paths: 100,
            n_steps: 2000,
            horizon: 1.0,
            eps: 0.1 / 16.0,
            seed: 7,
            centering: Centering::KacExact,
        }
    }

    #[test]
    fn clt_config_validation() {
        let mut c = quick_cfg();
        c.n_paths = 50;
        assert!(clt_experiment(&c).is_err());
        let mut c = quick_cfg();
        c.h_schedule = vec![0.1, 0.2];
        assert!(clt_experiment(&c).is_err());
        let mut c = quick_cfg();
        c.h_schedule = vec![0.15];
        c.eps = 0.1;
        assert!(clt_experiment(&c).is_err());
        let mut c = quick_cfg();
        c.horizon = 0.5;
        assert!(clt_experiment(&c).is_err());
    }

    #[test]
    fn clt_report_shape_and_determinism() {
        let cfg = quick_cfg();
        let a = clt_experiment(&cfg).unwrap();
        assert_eq!(a.levels.len(), 2);
        for level in &a.levels {
            assert_eq!(level.samples.len(), 100);
            assert!((0.0..=1.0).contains(&level.ks_p));
            assert!(level.sample_variance > 0.0);
        }
        assert_eq!(a.mixture.samples.len(), 100);
        assert_eq!(a.verdicts.len(), 3);
        assert!(a.runtime_seconds > 0.0);
        let b = clt_experiment(&cfg).unwrap();
        assert_eq!(report::to_json(&a).unwrap(), report::to_json(&b).unwrap());
    }

    #[test]
    fn closed_form_centering_requires_pure() {
        let mut c = quick_cfg();
        c.exponent = LevyExponent::mixture(&[(0.5, 2.0), (0.5, 1.5)]).unwrap();
        c.centering = Centering::StableClosedForm;
        assert!(clt_experiment(&c).is_err());
    }

    #[test]
    fn scaling_rejects_mixture_and_bad_grid() {
        let mix = LevyExponent::mixture(&[(0.5, 2.0), (0.5, 1.5)]).unwrap();
        assert!(scaling_experiment(&mix, &[0.5], 10, 100, 0.02, 1).is_err());
        let pure = LevyExponent::stable(2.0).unwrap();
        assert!(scaling_experiment(&pure, &[], 10, 100, 0.02, 1).is_err());
        assert!(scaling_experiment(&pure, &[1.5], 10, 100, 0.02, 1).is_err());
    }

    #[test]
    fn scaling_mini_run_tracks_prediction() {
        let pure = LevyExponent::stable(2.0).unwrap();
        let r = scaling_experiment(&pure, &[0.5, 1.0], 150, 3000, 0.02, 3).unwrap();
        assert_eq!(r.rows.len(), 2);
        for row in &r.rows {
            assert!(
                (row.ratio_mean - 1.0).abs() < 0.25,
                "t={}: ratio {}",
                row.t,
                row.ratio_mean
            );
        }
        // the t = 1 row reuses the batch geometry of the base, not the seed
        assert!((r.rows[1].predicted_mean - r.base_mean).abs() < 1e-15);
    }

    #[test]
    fn mean_convergence_rejects_empty() {
        let e = LevyExponent::stable(1.5).unwrap();
        assert!(mean_convergence_experiment(&e, 1.0, &[0.1], 0, 100, 0.01, 1).is_err());
        assert!(mean_convergence_experiment(&e, 1.0, &[], 10, 100, 0.01, 1).is_err());
    }

    #[test]
    fn moment_bound_rejects_empty_grid() {
        let e = LevyExponent::stable(1.5).unwrap();
        assert!(moment_bound_experiment(&e, &[], 10, 100, 0.01, 1).is_err());
    }
}
