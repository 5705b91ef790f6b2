//! Monte Carlo cross-checks that tie the simulation pipeline to quadrature
//! or closed-form values. Everything runs on fixed seeds; tolerances are
//! three standard errors or a stated relative band, whichever is looser.

use levylab::exponent::LevyExponent;
use levylab::harness::{self, Centering, CltConfig};
use levylab::localtime::{estimate_local_time, GridSpec};
use levylab::simulate::PathConfig;
use levylab::stats;
use std::f64::consts::PI;

const SEED: u64 = 42;

fn alpha_samples(config: &PathConfig, n_paths: usize, eps: f64) -> Vec<f64> {
    (0..n_paths)
        .map(|i| {
            let path = config.sample(i as u64);
            let (lo, hi) = path
                .positions
                .iter()
                .fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
            estimate_local_time(&path, GridSpec::cover(lo, hi, eps).unwrap()).alpha()
        })
        .collect()
}

#[test]
fn alpha_mc_matches_closed_form() {
    // E[α₁] = 4/(3√π) for the Gaussian case
    let config = PathConfig::new(LevyExponent::stable(2.0).unwrap(), 1.0, 20_000, SEED).unwrap();
    let samples = alpha_samples(&config, 2000, 0.01);
    let mean = stats::mean(&samples);
    let se = (stats::sample_variance(&samples) / samples.len() as f64).sqrt();
    let exact = 4.0 / (3.0 * PI.sqrt());
    let tol = (3.0 * se).max(0.1 * exact);
    assert!(
        (mean - exact).abs() <= tol,
        "alpha mean {mean:.6} vs closed {exact:.6}, se {se:.2e}"
    );
}

#[test]
fn centering_modes_shift_samples_by_constant() {
    // Z = scale·(J − m): switching the centering mode translates every
    // sample by scale·Δm and changes nothing else
    let base = CltConfig {
        exponent: LevyExponent::stable(1.5).unwrap(),
        h_schedule: vec![0.2],
        n_paths: 120,
        n_steps: 3000,
        horizon: 1.0,
        eps: 0.0125,
        seed: SEED,
        centering: Centering::KacExact,
    };
    let kac = harness::clt_experiment(&base).unwrap();
    let closed = harness::clt_experiment(&CltConfig {
        centering: Centering::StableClosedForm,
        ..base.clone()
    })
    .unwrap();

    let (lk, lc) = (&kac.levels[0], &closed.levels[0]);
    // normalization: for ψ = |λ|^β the scale √(hψ²(1/h)) is h^{1/2−β}
    assert!((lk.scale - 0.2_f64.powf(0.5 - 1.5)).abs() <= 1e-12 * lk.scale);
    let shift = lk.scale * (lc.centering_value - lk.centering_value);
    assert!(
        shift.abs() > 0.0,
        "modes coincide; both {:.6}",
        lk.centering_value
    );
    for (zk, zc) in lk.samples.iter().zip(&lc.samples) {
        assert!(
            ((zk - zc) - shift).abs() <= 1e-9 * shift.abs(),
            "per-sample shift {} vs {}",
            zk - zc,
            shift
        );
    }
}

#[test]
fn modulus_fluctuation_shrinks_with_h() {
    // J_h concentrates on its mean as h ↓ 0: the relative fluctuation decays
    // like √h, so a fourfold h drop should halve it
    let config =
        PathConfig::new(LevyExponent::stable(2.0).unwrap(), 1.0, 50_000, SEED + 1).unwrap();
    let eps = 0.00625;
    let n = 200;
    let mut j_coarse = Vec::with_capacity(n);
    let mut j_fine = Vec::with_capacity(n);
    for i in 0..n {
        let path = config.sample(i as u64);
        let (lo, hi) = path
            .positions
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        let field = estimate_local_time(&path, GridSpec::cover(lo, hi, eps).unwrap());
        j_coarse.push(field.l2_modulus(0.4).unwrap());
        j_fine.push(field.l2_modulus(0.1).unwrap());
    }
    let rel_fluct = |js: &[f64]| {
        let m = stats::mean(js);
        (stats::sample_variance(js).sqrt() / m, m)
    };
    let (rf_coarse, mean_coarse) = rel_fluct(&j_coarse);
    let (rf_fine, mean_fine) = rel_fluct(&j_fine);
    // E[J_h]/h → 4c_{2,0} = 2 (exact at every h for β = 2 up to remainder)
    assert!(
        (mean_coarse / 0.4 - 2.0).abs() <= 0.5,
        "coarse mean {mean_coarse}"
    );
    assert!(
        (mean_fine / 0.1 - 2.0).abs() <= 0.5,
        "fine mean {mean_fine}"
    );
    assert!(
        rf_fine < 0.7 * rf_coarse,
        "relative fluctuation {rf_fine:.3} at h=0.1 vs {rf_coarse:.3} at h=0.4"
    );
}

#[test]
fn mean_convergence_rows_track_exact() {
    let e = LevyExponent::stable(1.5).unwrap();
    let report =
        harness::mean_convergence_experiment(&e, 1.0, &[0.2, 0.1], 400, 60_000, 0.0015625, SEED)
            .unwrap();
    let scaled_limit = report.scaled_limit.unwrap();
    for row in &report.rows {
        let tol = (3.0 * row.mc_se).max(0.1 * row.exact_mean);
        assert!(
            (row.mc_mean - row.exact_mean).abs() <= tol,
            "h={}: mc {:.5} vs exact {:.5} (tol {:.1e})",
            row.h,
            row.mc_mean,
            row.exact_mean,
            tol
        );
        let scaled = row.scaled_mc_mean.unwrap();
        assert!(
            (scaled / scaled_limit - 1.0).abs() <= 0.35,
            "h={}: J̄/h^(β−1) = {scaled:.3} vs limit {scaled_limit:.3}",
            row.h
        );
    }
}

#[test]
fn moment_norm_ratios_uniformly_bounded() {
    let e = LevyExponent::stable(1.5).unwrap();
    let report =
        harness::moment_bound_experiment(&e, &[0.05, 0.25, 1.0], 300, 20_000, 0.02, SEED).unwrap();
    for n in 0..3 {
        let ratios: Vec<f64> = report.rows.iter().map(|r| r.ratios[n]).collect();
        let (lo, hi) = ratios
            .iter()
            .fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        assert!(lo > 0.0 && hi.is_finite());
        assert!(
            hi / lo <= 3.0,
            "norm {} ratio spread {:.3}..{:.3} across t",
            n + 1,
            lo,
            hi
        );
    }
    // the first ratio is E[α_t]/(t²ψ⁻¹(1/t)), constant in t by self-similarity
    for row in &report.rows {
        let tol = (3.0 * row.mean_se).max(0.15 * row.exact_mean);
        assert!(
            (row.norms[0] - row.exact_mean).abs() <= tol,
            "t={}: mean {:.4} vs exact {:.4}",
            row.t,
            row.norms[0],
            row.exact_mean
        );
    }
}
