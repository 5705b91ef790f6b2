//! Command-line driver: quadrature tables, density queries, exact-vs-MC mean
//! comparisons, path dumps, and the CLT / scaling / moment experiments.

use clap::{Parser, Subcommand};
use levylab::error::Result;
use levylab::exponent::LevyExponent;
use levylab::harness::{self, Centering, CltConfig};
use levylab::simulate::{PathConfig, SamplePath};
use levylab::{constants, density, kac, report};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(
    name = "levylab",
    version,
    about = "Local times of symmetric stable processes: spectral constants, \
             transition densities, exact moments, and Monte Carlo experiments"
)]
struct Cli {
    /// Base RNG seed; every batch derives its streams from this.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Worker threads (default: all cores; the LEVYLAB_THREADS environment
    /// variable overrides the default when the flag is absent).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Directory for report.json and CSV artifacts.
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Finite-h spectral constants against their h → 0 limits.
    Constants {
        #[arg(long)]
        exponent: String,
        /// Strictly decreasing h schedule.
        #[arg(long, value_delimiter = ',', default_value = "0.1,0.01,0.001,0.0001")]
        h: Vec<f64>,
    },
    /// Transition density and potential-kernel values at one time slice.
    Density {
        #[arg(long)]
        exponent: String,
        #[arg(long)]
        s: f64,
        #[arg(long, value_delimiter = ',', default_value = "0,0.5,1")]
        x: Vec<f64>,
        /// Also evaluate the h-difference kernels v and w at each x.
        #[arg(long)]
        h: Option<f64>,
    },
    /// E[J_h] in both quadrature representations; with --n-paths, the Monte
    /// Carlo comparison experiment.
    Mean {
        #[arg(long)]
        exponent: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
        h: Vec<f64>,
        #[arg(long)]
        n_paths: Option<usize>,
        #[arg(long, default_value_t = 100_000)]
        n_steps: usize,
        /// Grid bin width (default: smallest h divided by 10).
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Sample one path and dump it (.csv by extension, else the binary
    /// format: "LVLT", version u32, n_steps u64, dt f64, seed u64, then
    /// little-endian f64 positions).
    Simulate {
        #[arg(long)]
        exponent: String,
        #[arg(long, default_value_t = 100_000)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        /// Replicate index within the seed's ensemble.
        #[arg(long, default_value_t = 0)]
        index: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// The modulus CLT experiment: Z_h ensembles vs the simulated limit
    /// mixture.
    Clt {
        #[arg(long)]
        exponent: String,
        #[arg(long, value_delimiter = ',', default_value = "0.2,0.1,0.05")]
        h_schedule: Vec<f64>,
        #[arg(long, default_value_t = 2000)]
        n_paths: usize,
        #[arg(long, default_value_t = 100_000)]
        n_steps: usize,
        /// Grid bin width (default: smallest h divided by 10).
        #[arg(long)]
        eps: Option<f64>,
        /// kac_exact or stable_closed_form.
        #[arg(long, default_value = "kac_exact")]
        centering: String,
    },
    /// Self-similarity of α_t across horizons (pure stable only).
    Scaling {
        #[arg(long)]
        exponent: String,
        #[arg(long, value_delimiter = ',', default_value = "0.25,0.5,1")]
        t_grid: Vec<f64>,
        #[arg(long, default_value_t = 2000)]
        n_paths: usize,
        #[arg(long, default_value_t = 50_000)]
        n_steps: usize,
        #[arg(long, default_value_t = 0.02)]
        eps_base: f64,
    },
    /// Moment norms of α_t against the scale t²ψ⁻¹(1/t).
    Moments {
        #[arg(long)]
        exponent: String,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.05,0.25,1")]
        t_grid: Vec<f64>,
        #[arg(long, default_value_t = 2000)]
        n_paths: usize,
        #[arg(long, default_value_t = 50_000)]
        n_steps: usize,
        #[arg(long, default_value_t = 0.02)]
        eps_base: f64,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads.or_else(|| {
        std::env::var("LEVYLAB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if n > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .ok();
        }
    }
    match cli.cmd {
        Cmd::Constants { exponent, h } => cmd_constants(&cli.out_dir, &exponent, &h),
        Cmd::Density { exponent, s, x, h } => cmd_density(&exponent, s, &x, h),
        Cmd::Mean {
            exponent,
            t,
            h,
            n_paths,
            n_steps,
            eps,
        } => cmd_mean(
            &cli.out_dir,
            cli.seed,
            &exponent,
            t,
            &h,
            n_paths,
            n_steps,
            eps,
        ),
        Cmd::Simulate {
            exponent,
            steps,
            horizon,
            index,
            out,
        } => cmd_simulate(cli.seed, &exponent, steps, horizon, index, &out),
        Cmd::Clt {
            exponent,
            h_schedule,
            n_paths,
            n_steps,
            eps,
            centering,
        } => cmd_clt(
            &cli.out_dir,
            cli.seed,
            &exponent,
            h_schedule,
            n_paths,
            n_steps,
            eps,
            &centering,
        ),
        Cmd::Scaling {
            exponent,
            t_grid,
            n_paths,
            n_steps,
            eps_base,
        } => cmd_scaling(
            &cli.out_dir,
            cli.seed,
            &exponent,
            &t_grid,
            n_paths,
            n_steps,
            eps_base,
        ),
        Cmd::Moments {
            exponent,
            t_grid,
            n_paths,
            n_steps,
            eps_base,
        } => cmd_moments(
            &cli.out_dir,
            cli.seed,
            &exponent,
            &t_grid,
            n_paths,
            n_steps,
            eps_base,
        ),
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn cmd_constants(out_dir: &Path, exponent: &str, h: &[f64]) -> Result<()> {
    let e = LevyExponent::parse(exponent)?;
    let table = constants::limit_table(&e, h)?;
    ensure_dir(out_dir)?;
    report::write_json(&out_dir.join("report.json"), &table)?;
    let rows: Vec<Vec<f64>> = table
        .rows
        .iter()
        .map(|r| vec![r.h, r.c0, r.c1, r.scaled_0, r.scaled_1, r.dev_0, r.dev_1])
        .collect();
    report::write_csv(
        &out_dir.join("table.csv"),
        &["h", "c0", "c1", "scaled_0", "scaled_1", "dev_0", "dev_1"],
        &rows,
    )?;
    println!(
        "limits: c_beta_0 = {:.12}, c_beta_1 = {:.12} (beta_infinity = {})",
        table.c_beta_0, table.c_beta_1, table.beta_infinity
    );
    for r in &table.rows {
        println!(
            "h = {:<10} scaled_0 = {:.10} (dev {:+.3e})  scaled_1 = {:.10} (dev {:+.3e})",
            r.h, r.scaled_0, r.dev_0, r.scaled_1, r.dev_1
        );
    }
    println!(
        "extrapolated: {:.12}, {:.12}; artifacts in {}",
        table.extrapolated_0,
        table.extrapolated_1,
        out_dir.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct DensityRow {
    x: f64,
    density: f64,
    u: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    v: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    w: Option<f64>,
}

#[derive(Serialize)]
struct DensityOut {
    exponent: String,
    s: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    h: Option<f64>,
    normalization_defect: f64,
    rows: Vec<DensityRow>,
}

fn cmd_density(exponent: &str, s: f64, xs: &[f64], h: Option<f64>) -> Result<()> {
    let e = LevyExponent::parse(exponent)?;
    let ev = density::DensityEvaluator::new(e);
    let mut rows = Vec::with_capacity(xs.len());
    for &x in xs {
        rows.push(DensityRow {
            x,
            density: ev.density(s, x)?,
            u: ev.u_integral(x)?,
            v: h.map(|h| ev.v_integral(x, h)).transpose()?,
            w: h.map(|h| ev.w_integral(x, h)).transpose()?,
        });
    }
    let out = DensityOut {
        exponent: exponent.to_string(),
        s,
        h,
        normalization_defect: ev.normalization_defect(s)?,
        rows,
    };
    println!("{}", report::to_json(&out)?);
    Ok(())
}

#[derive(Serialize)]
struct MeanQuadRow {
    h: f64,
    spectral: f64,
    time_domain: f64,
    leading_term: f64,
    ghat: f64,
    variance_budget: kac::VarianceBudget,
}

#[derive(Serialize)]
struct MeanQuadOut {
    exponent: String,
    t: f64,
    mean_alpha: f64,
    rows: Vec<MeanQuadRow>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_mean(
    out_dir: &Path,
    seed: u64,
    exponent: &str,
    t: f64,
    h: &[f64],
    n_paths: Option<usize>,
    n_steps: usize,
    eps: Option<f64>,
) -> Result<()> {
    let e = LevyExponent::parse(exponent)?;
    match n_paths {
        None => {
            let mut rows = Vec::with_capacity(h.len());
            for &h in h {
                rows.push(MeanQuadRow {
                    h,
                    spectral: kac::mean_sq_increment(&e, t, h)?,
                    time_domain: kac::mean_sq_increment_time_domain(&e, t, h)?,
                    leading_term: 4.0 * constants::c_psi_h_0(&e, h)? * t,
                    ghat: harness::ghat(&e, h),
                    variance_budget: kac::variance_bound_check(&e, t, h)?,
                });
            }
            let out = MeanQuadOut {
                exponent: exponent.to_string(),
                t,
                mean_alpha: kac::mean_alpha(&e, t)?,
                rows,
            };
            println!("{}", report::to_json(&out)?);
        }
        Some(n_paths) => {
            let h_min = h.iter().cloned().fold(f64::INFINITY, f64::min);
            let eps = eps.unwrap_or(h_min / 10.0);
            let r = harness::mean_convergence_experiment(&e, t, h, n_paths, n_steps, eps, seed)?;
            ensure_dir(out_dir)?;
            report::write_json(&out_dir.join("report.json"), &r)?;
            let rows: Vec<Vec<f64>> = r
                .rows
                .iter()
                .map(|row| {
                    vec![
                        row.h,
                        row.mc_mean,
                        row.mc_se,
                        row.exact_mean,
                        row.leading_term,
                        row.residual_mc,
                        row.ghat,
                    ]
                })
                .collect();
            report::write_csv(
                &out_dir.join("table.csv"),
                &[
                    "h",
                    "mc_mean",
                    "mc_se",
                    "exact_mean",
                    "leading_term",
                    "residual_mc",
                    "ghat",
                ],
                &rows,
            )?;
            for row in &r.rows {
                println!(
                    "h = {:<8} MC {:.6} ± {:.2e}  exact {:.6}  (diff {:+.2e})",
                    row.h,
                    row.mc_mean,
                    row.mc_se,
                    row.exact_mean,
                    row.mc_mean - row.exact_mean
                );
            }
            eprintln!("runtime: {:.1} s", r.runtime_seconds);
        }
    }
    Ok(())
}

fn write_path_binary(path: &Path, sp: &SamplePath, seed: u64) -> Result<()> {
    let mut buf = Vec::with_capacity(32 + sp.positions.len() * 8);
    buf.extend_from_slice(b"LVLT");
    buf.extend_from_slice(&1u32.to_le_bytes());
    buf.extend_from_slice(&((sp.positions.len() - 1) as u64).to_le_bytes());
    buf.extend_from_slice(&sp.dt.to_le_bytes());
    buf.extend_from_slice(&seed.to_le_bytes());
    for v in &sp.positions {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, buf)?;
    Ok(())
}

fn cmd_simulate(
    seed: u64,
    exponent: &str,
    steps: usize,
    horizon: f64,
    index: u64,
    out: &Path,
) -> Result<()> {
    let e = LevyExponent::parse(exponent)?;
    let cfg = PathConfig::new(e, horizon, steps, seed)?;
    let path = cfg.sample(index);
    if out.extension().is_some_and(|x| x == "csv") {
        let rows: Vec<Vec<f64>> = path
            .positions
            .iter()
            .enumerate()
            .map(|(i, &x)| vec![i as f64 * path.dt, x])
            .collect();
        report::write_csv(out, &["time", "position"], &rows)?;
    } else {
        write_path_binary(out, &path, seed)?;
    }
    let last = *path.positions.last().unwrap();
    println!(
        "wrote {} ({} steps, dt = {:.3e}, X_T = {:.6})",
        out.display(),
        steps,
        path.dt,
        last
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_clt(
    out_dir: &Path,
    seed: u64,
    exponent: &str,
    h_schedule: Vec<f64>,
    n_paths: usize,
    n_steps: usize,
    eps: Option<f64>,
    centering: &str,
) -> Result<()> {
    let e = LevyExponent::parse(exponent)?;
    let h_min = h_schedule.iter().cloned().fold(f64::INFINITY, f64::min);
    let config = CltConfig {
        exponent: e,
        h_schedule,
        n_paths,
        n_steps,
        horizon: 1.0,
        eps: eps.unwrap_or(h_min / 10.0),
        seed,
        centering: centering.parse::<Centering>()?,
    };
    let r = harness::clt_experiment(&config)?;
    ensure_dir(out_dir)?;
    report::write_json(&out_dir.join("report.json"), &r)?;
    for level in &r.levels {
        report::write_column_csv(
            &out_dir.join(format!("samples_{}.csv", level.h)),
            "z",
            &level.samples,
        )?;
    }
    report::write_column_csv(&out_dir.join("mixture.csv"), "w", &r.mixture.samples)?;
    let rows: Vec<Vec<f64>> = r
        .levels
        .iter()
        .map(|l| vec![l.h, l.variance_ratio, l.ks_d, l.ks_p])
        .collect();
    report::write_csv(
        &out_dir.join("table.csv"),
        &["h", "var_ratio", "ks_stat", "p_value"],
        &rows,
    )?;
    println!(
        "limit variance 8·c_beta_1·E[alpha_1] = {:.6}",
        r.limit_variance
    );
    for l in &r.levels {
        println!(
            "h = {:<8} var_ratio = {:.4}  skew = {:+.3}  KS D = {:.4}  p = {:.4}",
            l.h, l.variance_ratio, l.skewness, l.ks_d, l.ks_p
        );
    }
    for v in &r.verdicts {
        println!("{}: {}", if v.pass { "PASS" } else { "FAIL" }, v.name);
    }
    println!("artifacts in {}", out_dir.display());
    eprintln!("runtime: {:.1} s", r.runtime_seconds);
    Ok(())
}

fn cmd_scaling(
    out_dir: &Path,
    seed: u64,
    exponent: &str,
    t_grid: &[f64],
    n_paths: usize,
    n_steps: usize,
    eps_base: f64,
) -> Result<()> {
    let e = LevyExponent::parse(exponent)?;
    let r = harness::scaling_experiment(&e, t_grid, n_paths, n_steps, eps_base, seed)?;
    ensure_dir(out_dir)?;
    report::write_json(&out_dir.join("report.json"), &r)?;
    let rows: Vec<Vec<f64>> = r
        .rows
        .iter()
        .map(|row| {
            vec![
                row.t,
                row.alpha_mean,
                row.alpha_mean_se,
                row.alpha_second_moment,
                row.predicted_mean,
                row.predicted_second_moment,
                row.ratio_mean,
                row.ratio_second_moment,
            ]
        })
        .collect();
    report::write_csv(
        &out_dir.join("table.csv"),
        &[
            "t",
            "alpha_mean",
            "alpha_mean_se",
            "alpha_second_moment",
            "predicted_mean",
            "predicted_second_moment",
            "ratio_mean",
            "ratio_second_moment",
        ],
        &rows,
    )?;
    println!("gamma = (2*beta-1)/beta = {:.6}", r.gamma);
    for row in &r.rows {
        println!(
            "t = {:<6} mean ratio = {:.4}  second-moment ratio = {:.4}",
            row.t, row.ratio_mean, row.ratio_second_moment
        );
    }
    eprintln!("runtime: {:.1} s", r.runtime_seconds);
    Ok(())
}

fn cmd_moments(
    out_dir: &Path,
    seed: u64,
    exponent: &str,
    t_grid: &[f64],
    n_paths: usize,
    n_steps: usize,
    eps_base: f64,
) -> Result<()> {
    let e = LevyExponent::parse(exponent)?;
    let r = harness::moment_bound_experiment(&e, t_grid, n_paths, n_steps, eps_base, seed)?;
    ensure_dir(out_dir)?;
    report::write_json(&out_dir.join("report.json"), &r)?;
    let rows: Vec<Vec<f64>> = r
        .rows
        .iter()
        .map(|row| {
            vec![
                row.t,
                row.norms[0],
                row.norms[1],
                row.norms[2],
                row.bound_scale,
                row.ratios[0],
                row.ratios[1],
                row.ratios[2],
                row.exact_mean,
            ]
        })
        .collect();
    report::write_csv(
        &out_dir.join("table.csv"),
        &[
            "t",
            "norm_1",
            "norm_2",
            "norm_3",
            "bound_scale",
            "ratio_1",
            "ratio_2",
            "ratio_3",
            "exact_mean",
        ],
        &rows,
    )?;
    for row in &r.rows {
        println!(
            "t = {:<6} norms = [{:.4}, {:.4}, {:.4}]  ratios = [{:.3}, {:.3}, {:.3}]",
            row.t,
            row.norms[0],
            row.norms[1],
            row.norms[2],
            row.ratios[0],
            row.ratios[1],
            row.ratios[2]
        );
    }
    println!("max ratios over grid: {:?}", r.max_ratios);
    eprintln!("runtime: {:.1} s", r.runtime_seconds);
    Ok(())
}
