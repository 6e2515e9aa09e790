//! Subcommand implementations. Each command resolves its configuration,
//! computes through the library crate, writes CSV/JSON artifacts plus a run
//! manifest into the output directory, and optionally renders SVG plots.

use anyhow::{anyhow, bail, Context, Result};

use chaology_core::classical::{
    self, divergence, fit_lyapunov, integrate, sweep_csv, sweep_g, sweep_g_seq, FitWindow,
    SweepSettings,
};
use chaology_core::complexity::{
    complexity_series, complexity_series_seq, perturbed_params, single_mode, ComplexityConfig,
};
use chaology_core::eigen::{
    self, estimate_errors, fit_linear_spectrum, load_cache, save_cache, solve, EigenDecomposition,
    ErrorReport, Retain,
};
use chaology_core::levelstats::{
    compare_templates, goe_density, histogram, histogram_csv, poisson_density_hand_normalized,
    poisson_density_unit, spacings, split_parity, unfold, SpacingDistribution, TemplateScaling,
};
use chaology_core::otoc::{
    fit_otoc_short_time, mss_report, operator_matrix, otoc_series_multi, otoc_series_multi_seq,
    FitTarget, OperatorKind, OtocInputs,
};
use chaology_core::spectral::{assemble_hamiltonian_with, Grid2D};
use chaology_core::{PendulumParams, PhaseState};

use crate::config::{RunConfig, ScalingChoice};
use crate::manifest::ManifestBuilder;
use crate::plot::Plot;

use std::path::{Path, PathBuf};

pub struct Context2 {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub cache_dir: PathBuf,
    pub plot: bool,
    pub threads: Option<usize>,
}

impl Context2 {
    pub fn sequential(&self) -> bool {
        self.threads == Some(1)
    }
}

/// Cache key from the physical inputs that determine a decomposition.
fn cache_key(params: &PendulumParams, n: usize, stencil: chaology_core::spectral::Stencil) -> u64 {
    let mut bytes = Vec::new();
    for v in [
        params.m1,
        params.m2,
        params.l1,
        params.l2,
        params.g,
        params.hbar,
    ] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    bytes.extend_from_slice(&(n as u64).to_le_bytes());
    bytes.push(match stencil {
        chaology_core::spectral::Stencil::Standard => 0,
        chaology_core::spectral::Stencil::Legacy => 1,
    });
    eigen::crc64(&bytes)
}

/// Loads a cached decomposition or assembles and solves, caching the result.
/// The cache file is never rewritten once present.
fn obtain_decomposition(
    ctx: &Context2,
    manifest: &mut ManifestBuilder,
    params: &PendulumParams,
    n: usize,
) -> Result<EigenDecomposition> {
    std::fs::create_dir_all(&ctx.cache_dir)?;
    let key = cache_key(params, n, ctx.config.stencil);
    let path = ctx.cache_dir.join(format!("eig-{key:016x}.dpnd"));
    if path.exists() {
        let eig = load_cache(&path).with_context(|| format!("loading cache {}", path.display()))?;
        eprintln!("cache hit: {}", path.display());
        manifest.record_cache(&path)?;
        return Ok(eig);
    }
    let grid = Grid2D::square(n)?;
    let h = assemble_hamiltonian_with(params, &grid, ctx.config.stencil, ctx.config.budget_bytes)?;
    let eig = solve(&h, Retain::All)?;
    save_cache(&eig, &path)?;
    manifest.record_cache(&path)?;
    Ok(eig)
}

fn reference_pair(config: &RunConfig) -> (PhaseState, PhaseState) {
    let c = &config.classical;
    (
        PhaseState::at_rest(c.q1, c.q2),
        PhaseState::at_rest(c.q1, c.q2 + c.epsilon),
    )
}

// ---------------------------------------------------------------------------
// classical
// ---------------------------------------------------------------------------

pub fn classical_simulate(
    ctx: &Context2,
    theta1: f64,
    theta2: f64,
    p1: f64,
    p2: f64,
) -> Result<()> {
    let mut manifest = ManifestBuilder::new(&ctx.out_dir);
    let c = &ctx.config.classical;
    let initial = PhaseState::new(theta1, theta2, p1, p2);
    let traj = integrate(&ctx.config.params, &initial, c.t_max, c.dt, c.tol)?;
    manifest.write_output("trajectory.csv", &traj.to_csv())?;
    println!(
        "trajectory: {} samples, max energy drift {:.3e}",
        traj.len(),
        traj.max_energy_drift()
    );
    if ctx.plot {
        let angles: Vec<(f64, f64)> = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(t, s)| (*t, s.theta1))
            .collect();
        let angles2: Vec<(f64, f64)> = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(t, s)| (*t, s.theta2))
            .collect();
        let svg = Plot::new("trajectory", "t", "angle")
            .with_series("theta1", angles)
            .with_series("theta2", angles2)
            .render();
        manifest.write_output("trajectory.svg", &svg)?;
    }
    manifest.finish(&ctx.config, ctx.threads)?;
    Ok(())
}

pub fn classical_lyapunov(ctx: &Context2, paper_literal: bool, full_window: bool) -> Result<()> {
    let mut manifest = ManifestBuilder::new(&ctx.out_dir);
    let c = &ctx.config.classical;
    let (ic_a, ic_b) = reference_pair(&ctx.config);
    let series = divergence(&ctx.config.params, &ic_a, &ic_b, c.k, c.t_max, c.dt, c.tol)?;
    manifest.write_output("divergence.csv", &series.to_csv())?;

    // The published difference-of-norms variant can be fitted instead of the
    // standard metric by swapping the series.
    let fit_series = if paper_literal {
        classical::DivergenceSeries {
            times: series.times.clone(),
            delta_std: series.delta_paper.clone(),
            delta_paper: series.delta_paper.clone(),
            k: series.k,
        }
    } else {
        series.clone()
    };
    let mode = if full_window {
        FitWindow::Full
    } else {
        FitWindow::UntilOrderOne
    };
    let fit = fit_lyapunov(&fit_series, mode)?;
    manifest.write_output("lyapunov.json", &serde_json::to_string_pretty(&fit)?)?;
    println!(
        "lambda = {:.6}, t_star = {}, rms = {:.3e}",
        fit.lambda,
        fit.t_star
            .map(|t| format!("{t:.4}"))
            .unwrap_or_else(|| "none".into()),
        fit.rms
    );

    if ctx.plot {
        let pts: Vec<(f64, f64)> = series
            .times
            .iter()
            .zip(&series.delta_std)
            .map(|(t, d)| (*t, *d))
            .collect();
        let line: Vec<(f64, f64)> = series
            .times
            .iter()
            .map(|t| (*t, 10f64.powf(fit.a1 + fit.a2 * t)))
            .collect();
        let svg = Plot::new("trajectory divergence", "t", "delta")
            .with_series("delta_omega_std", pts)
            .with_series("fit", line)
            .log_y()
            .render();
        manifest.write_output("divergence.svg", &svg)?;
    }
    manifest.finish(&ctx.config, ctx.threads)?;
    Ok(())
}

pub fn classical_sweep(ctx: &Context2, g_list: Vec<f64>) -> Result<()> {
    if g_list.is_empty() {
        bail!("sweep needs at least one g value");
    }
    let mut manifest = ManifestBuilder::new(&ctx.out_dir);
    let c = &ctx.config.classical;
    let (ic_a, ic_b) = reference_pair(&ctx.config);
    let settings = SweepSettings {
        k: c.k,
        t_max: c.t_max,
        dt: c.dt,
        tol: c.tol,
        mode: FitWindow::UntilOrderOne,
    };
    let rows = if ctx.sequential() {
        sweep_g_seq(&ctx.config.params, &g_list, &ic_a, &ic_b, &settings)
    } else {
        sweep_g(&ctx.config.params, &g_list, &ic_a, &ic_b, &settings)
    };
    for row in &rows {
        if let Some(err) = &row.error {
            eprintln!("g = {}: {err}", row.g);
        }
    }
    manifest.write_output("sweep.csv", &sweep_csv(&rows))?;
    if ctx.plot {
        let lambda: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.fit.as_ref().map(|f| (r.g, f.lambda)))
            .collect();
        let tstar: Vec<(f64, f64)> = rows
            .iter()
            .filter_map(|r| r.fit.as_ref().and_then(|f| f.t_star).map(|t| (r.g, t)))
            .collect();
        let svg = Plot::new("lyapunov exponent and scrambling time", "g", "value")
            .with_series("lambda", lambda)
            .with_series("t_star", tstar)
            .render();
        manifest.write_output("sweep.svg", &svg)?;
    }
    manifest.finish(&ctx.config, ctx.threads)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// quantize
// ---------------------------------------------------------------------------

fn two_grid_solve(
    ctx: &Context2,
    manifest: &mut ManifestBuilder,
) -> Result<(EigenDecomposition, EigenDecomposition, ErrorReport)> {
    let coarse = obtain_decomposition(ctx, manifest, &ctx.config.params, ctx.config.grids.coarse)?;
    let fine = obtain_decomposition(ctx, manifest, &ctx.config.params, ctx.config.grids.fine)?;
    let report = estimate_errors(&coarse, &fine)?;
    Ok((coarse, fine, report))
}

pub fn quantize_spectrum(ctx: &Context2) -> Result<()> {
    let mut manifest = ManifestBuilder::new(&ctx.out_dir);
    let (_, fine, report) = two_grid_solve(ctx, &mut manifest)?;
    manifest.write_output(
        "eigenvalues.csv",
        &eigen::eigenvalue_csv(&fine, Some(&report)),
    )?;
    println!(
        "levels: {}, reliable at 1e-4: {}, at 1e-3: {}",
        fine.count(),
        report.reliable_count,
        report.reliable_count_at(1e-3)
    );
    if report.reliable_count > 20 {
        let hi = report.reliable_count - 1;
        let lo = hi / 5;
        let fit = fit_linear_spectrum(&fine, lo, hi)?;
        println!(
            "linear spectrum fit over [{lo},{hi}]: E_n ~ {:.5} n + {:.5} (rms {:.3e})",
            fit.slope, fit.intercept, fit.rms
        );
    }
    if ctx.plot {
        let levels: Vec<(f64, f64)> = fine
            .eigenvalues
            .iter()
            .enumerate()
            .map(|(n, e)| (n as f64, *e))
            .collect();
        let svg = Plot::new("eigenvalue ladder", "n", "E_n")
            .with_series("E_n", levels)
            .render();
        manifest.write_output("eigenvalues.svg", &svg)?;
    }
    manifest.finish(&ctx.config, ctx.threads)?;
    Ok(())
}

pub fn quantize_errors(ctx: &Context2) -> Result<()> {
    let mut manifest = ManifestBuilder::new(&ctx.out_dir);
    let (_, fine, report) = two_grid_solve(ctx, &mut manifest)?;
    manifest.write_output("errors.csv", &eigen::eigenvalue_csv(&fine, Some(&report)))?;
    println!(
        "reliable at 1e-4: {}, at 1e-3: {}",
        report.reliable_count,
        report.reliable_count_at(1e-3)
    );
    if ctx.plot {
        let ratios: Vec<(f64, f64)> = report
            .estimates
            .iter()
            .map(|e| (e.level as f64, e.ratio.max(1e-18)))
            .collect();
        let svg = Plot::new("two-resolution eigenvalue error", "n", "ratio")
            .with_series("|dE|/(E+E)", ratios)
            .log_y()
            .render();
        manifest.write_output("errors.svg", &svg)?;
    }
    manifest.finish(&ctx.config, ctx.threads)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

fn stats_window(config: &RunConfig, report: &ErrorReport, r: usize) -> usize {
    match config.stats.window {
        Some(w) => w,
        None => {
            let strict = report.reliable_count;
            // The strict window must hold enough spacings for the KS
            // comparison; fall back to the 1e-3 window otherwise.
            if strict >= 200 + r + 2 {
                strict
            } else {
                report.reliable_count_at(1e-3)
            }
        }
    }
}

pub fn stats(
    ctx: &Context2,
    r: usize,
    scaling_flag: Option<ScalingChoice>,
    parity: bool,
) -> Result<()> {
    let mut manifest = ManifestBuilder::new(&ctx.out_dir);
    let (_, fine, report) = two_grid_solve(ctx, &mut manifest)?;
    let window = stats_window(&ctx.config, &report, r).min(fine.count());
    let scaling_choice = scaling_flag.unwrap_or(ctx.config.stats.scaling);
    let scaling = match scaling_choice {
        ScalingChoice::PaperHandFit => TemplateScaling::HandFit,
        ScalingChoice::UnitMean => TemplateScaling::UnitMean,
    };

    let (dist, unfolded_tag) = match ctx.config.stats.unfold_degree {
        Some(degree) => {
            let unfolded = unfold(&fine.eigenvalues[..window], degree)?;
            (
                spacings(&unfolded, r, window)?,
                format!("unfolded d={degree}, "),
            )
        }
        None => (spacings(&fine.eigenvalues, r, window)?, String::new()),
    };

    let stem = if r == 1 { "nnsd" } else { "nnnsd" };
    let hist = histogram(&dist_for_hist(&dist, scaling), ctx.config.stats.bins);
    manifest.write_output(
        &format!("{stem}_histogram.csv"),
        &histogram_csv(&hist, scaling),
    )?;
    let fit = compare_templates(&dist, scaling)?;
    manifest.write_output(&format!("{stem}_report.json"), &fit.to_json())?;
    println!(
        "{stem}: {}{} spacings, KS goe {:.4}, KS poisson {:.4}, verdict {:?}",
        unfolded_tag, fit.n_spacings, fit.ks_goe, fit.ks_poisson, fit.verdict
    );

    if parity {
        let split = split_parity(&fine);
        for (sector, evals) in [("even", &split.even), ("odd", &split.odd)] {
            let evals: Vec<f64> = evals.iter().cloned().take(window).collect();
            if evals.len() < 200 + r + 2 {
                eprintln!(
                    "parity sector {sector}: only {} levels, skipping",
                    evals.len()
                );
                continue;
            }
            let d = spacings(&evals, r, evals.len())?;
            let f = compare_templates(&d, scaling)?;
            manifest.write_output(&format!("{stem}_{sector}_report.json"), &f.to_json())?;
            println!(
                "{stem} {sector} sector: KS goe {:.4}, KS poisson {:.4}, verdict {:?}",
                f.ks_goe, f.ks_poisson, f.verdict
            );
        }
    }

    if ctx.plot {
        let mids: Vec<f64> = hist.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let bars: Vec<(f64, f64, f64)> = hist
            .densities
            .iter()
            .enumerate()
            .map(|(i, d)| (hist.edges[i], hist.edges[i + 1], *d))
            .collect();
        let goe: Vec<(f64, f64)> = mids.iter().map(|x| (*x, goe_density(*x))).collect();
        let poisson: Vec<(f64, f64)> = mids
            .iter()
            .map(|x| {
                let v = match scaling {
                    TemplateScaling::HandFit => poisson_density_hand_normalized(*x),
                    TemplateScaling::UnitMean => poisson_density_unit(*x),
                };
                (*x, v)
            })
            .collect();
        let svg = Plot::new(&format!("{stem} vs templates"), "s", "density")
            .with_bars(bars)
            .with_series("goe", goe)
            .with_series("poisson", poisson)
            .render();
        manifest.write_output(&format!("{stem}.svg"), &svg)?;
    }
    manifest.finish(&ctx.config, ctx.threads)?;
    Ok(())
}

/// Histogramming uses the same sample the KS comparison sees.
fn dist_for_hist(dist: &SpacingDistribution, scaling: TemplateScaling) -> SpacingDistribution {
    match scaling {
        TemplateScaling::HandFit => dist.clone(),
        TemplateScaling::UnitMean => dist.to_unit_mean(),
    }
}

// ---------------------------------------------------------------------------
// otoc
// ---------------------------------------------------------------------------

struct OtocSetup {
    theta: chaology_core::otoc::OperatorMatrix,
    p: chaology_core::otoc::OperatorMatrix,
    psq: chaology_core::otoc::OperatorMatrix,
    eigenvalues: Vec<f64>,
    hbar: f64,
}

fn otoc_setup(ctx: &Context2, manifest: &mut ManifestBuilder) -> Result<OtocSetup> {
    let (_, fine, report) = two_grid_solve(ctx, manifest)?;
    let m = match ctx.config.otoc.m {
        Some(m) => m,
        None => report.reliable_count_at(1e-3).min(2000).max(1),
    };
    let axis1 = ctx.config.otoc.axis == 1;
    let (kt, kp, kp2) = if axis1 {
        (OperatorKind::Theta1, OperatorKind::P1, OperatorKind::P1Sq)
    } else {
        (OperatorKind::Theta2, OperatorKind::P2, OperatorKind::P2Sq)
    };
    Ok(OtocSetup {
        theta: operator_matrix(&fine, kt, m)?,
        p: operator_matrix(&fine, kp, m)?,
        psq: operator_matrix(&fine, kp2, m)?,
        eigenvalues: fine.eigenvalues.clone(),
        hbar: fine.params.hbar,
    })
}

fn beta_tag(beta: f64) -> String {
    // 2 pi / beta = 2^k pi for the configured grid; tag files with "<2^k>pi".
    let ratio = 2.0 / beta;
    let rounded = ratio.round();
    if (ratio - rounded).abs() < 1e-9 && rounded >= 1.0 {
        format!("{}pi", rounded as u64)
    } else {
        format!("beta{beta}")
    }
}

pub fn otoc_compute(ctx: &Context2) -> Result<()> {
    let mut manifest = ManifestBuilder::new(&ctx.out_dir);
    let setup = otoc_setup(ctx, &mut manifest)?;
    let inputs = OtocInputs {
        theta: &setup.theta,
        p: &setup.p,
        psq: &setup.psq,
        eigenvalues: &setup.eigenvalues,
        hbar: setup.hbar,
    };
    let betas = ctx.config.betas();
    let o = &ctx.config.otoc;
    let times: Vec<f64> = (0..o.long_samples)
        .map(|i| o.long_t_max * i as f64 / (o.long_samples.max(2) - 1) as f64)
        .collect();
    let series = if ctx.sequential() {
        otoc_series_multi_seq(&inputs, &betas, &times)?
    } else {
        otoc_series_multi(&inputs, &betas, &times)?
    };
    for s in &series {
        let tag = beta_tag(s.beta);
        manifest.write_output(&format!("otoc_{tag}.csv"), &s.to_csv())?;
        println!(
            "beta {} (2pi/beta = {tag}): M = {}, C(0) = {:.4}, max Im D = {:.2e}",
            s.beta, s.m, s.c[0], s.max_im_d
        );
        if ctx.plot {
            let f_pts: Vec<(f64, f64)> = s
                .times
                .iter()
                .zip(&s.f)
                .map(|(t, z)| (*t, z.norm()))
                .collect();
            let c_pts: Vec<(f64, f64)> = s.times.iter().zip(&s.c).map(|(t, c)| (*t, *c)).collect();
            let svg = Plot::new(&format!("otoc at 2pi/beta = {tag}"), "t", "value")
                .with_series("|F|", f_pts)
                .with_series("C", c_pts)
                .render();
            manifest.write_output(&format!("otoc_{tag}.svg"), &svg)?;
        }
    }
    manifest.finish(&ctx.config, ctx.threads)?;
    Ok(())
}

pub fn otoc_fit(ctx: &Context2, target_c: bool) -> Result<()> {
    let mut manifest = ManifestBuilder::new(&ctx.out_dir);
    let setup = otoc_setup(ctx, &mut manifest)?;
    let inputs = OtocInputs {
        theta: &setup.theta,
        p: &setup.p,
        psq: &setup.psq,
        eigenvalues: &setup.eigenvalues,
        hbar: setup.hbar,
    };
    let o = &ctx.config.otoc;
    let times: Vec<f64> = (0..o.short_samples)
        .map(|i| o.short_dt * i as f64)
        .collect();
    let betas = ctx.config.betas();
    let series = if ctx.sequential() {
        otoc_series_multi_seq(&inputs, &betas, &times)?
    } else {
        otoc_series_multi(&inputs, &betas, &times)?
    };
    let target = if target_c {
        FitTarget::C
    } else {
        FitTarget::ReF
    };
    for s in &series {
        let tag = beta_tag(s.beta);
        match fit_otoc_short_time(s, o.fit_window, target) {
            Ok(fit) => {
                manifest.write_output(&format!("otoc_fit_{tag}.json"), &fit.to_json())?;
                let report = mss_report(&fit);
                println!(
                    "2pi/beta = {tag}: a = {:.4}, b = {:.4}, lambda_q = {:.4}, \
                     bound = {:.4}, saturation = {:.5}{}",
                    fit.a,
                    fit.b,
                    fit.lambda_q,
                    report.bound,
                    report.ratio,
                    if report.saturated {
                        "  ** BOUND EXCEEDED **"
                    } else {
                        ""
                    }
                );
            }
            Err(e) => eprintln!("2pi/beta = {tag}: fit failed: {e}"),
        }
    }
    manifest.finish(&ctx.config, ctx.threads)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// cc
// ---------------------------------------------------------------------------

pub fn cc_compute(
    ctx: &Context2,
    g_override: Option<Vec<f64>>,
    single_pendulum: bool,
) -> Result<()> {
    let mut manifest = ManifestBuilder::new(&ctx.out_dir);
    let cc = &ctx.config.cc;
    let grid_n = cc.grid.unwrap_or(ctx.config.grids.coarse);
    let g_list = g_override.unwrap_or_else(|| cc.g_list.clone());
    if g_list.is_empty() {
        bail!("cc compute needs at least one g value");
    }
    let times: Vec<f64> = (0..cc.samples)
        .map(|i| cc.t_max * i as f64 / (cc.samples.max(2) - 1) as f64)
        .collect();

    if single_pendulum {
        let p = ctx.config.params;
        let series = single_mode::single_pendulum_series(
            p.m1,
            p.l1,
            p.g,
            p.hbar,
            grid_n * grid_n / 8,
            cc.epsilon,
            &times,
        )?;
        manifest.write_output("cc_single.csv", &series.to_csv())?;
        manifest.write_output("cc_fit_single.json", &series.fit_json())?;
        println!(
            "single pendulum: slope = {:.4e}, r2 = {:.4}",
            series.fit.slope, series.fit.r2
        );
    }

    for &g in &g_list {
        let params = ctx.config.params.with_g(g);
        let eig_h = obtain_decomposition(ctx, &mut manifest, &params, grid_n)?;
        let perturbed = perturbed_params(&params, cc.epsilon);
        let eig_hp = obtain_decomposition(ctx, &mut manifest, &perturbed, grid_n)?;
        let config = ComplexityConfig {
            epsilon: cc.epsilon,
            k: cc.k,
            ell_eff: cc.ell_eff,
            truncation: None,
        };
        let series = if ctx.sequential() {
            complexity_series_seq(&eig_h, &eig_hp, &config, &times)?
        } else {
            complexity_series(&eig_h, &eig_hp, &config, &times)?
        };
        let tag = format_g(g);
        manifest.write_output(&format!("cc_g{tag}.csv"), &series.to_csv())?;
        manifest.write_output(&format!("cc_fit_g{tag}.json"), &series.fit_json())?;
        println!(
            "g = {g}: slope = {:.4e}, r2 = {:.4}, gaussianity deficit = {:.4}",
            series.fit.slope, series.fit.r2, series.reference_gaussianity_deficit
        );
        if ctx.plot {
            let pts: Vec<(f64, f64)> = series
                .times
                .iter()
                .zip(&series.values)
                .map(|(t, c)| (*t, *c))
                .collect();
            let svg = Plot::new(&format!("circuit complexity, g = {g}"), "t", "C")
                .with_series("C(t)", pts)
                .render();
            manifest.write_output(&format!("cc_g{tag}.svg"), &svg)?;
        }
    }
    manifest.finish(&ctx.config, ctx.threads)?;
    Ok(())
}

fn format_g(g: f64) -> String {
    if g == g.trunc() && g.abs() < 1e15 {
        format!("{}", g as i64)
    } else {
        format!("{g}")
    }
}

/// Resolves the cache directory: CHAOLOGY_CACHE_DIR overrides, otherwise a
/// `cache` directory under the output directory.
pub fn resolve_cache_dir(out_dir: &Path) -> PathBuf {
    match std::env::var_os("CHAOLOGY_CACHE_DIR") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => out_dir.join("cache"),
    }
}

pub fn parse_g_list(spec: &str) -> Result<Vec<f64>> {
    spec.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| anyhow!("bad g value {s:?}: {e}"))
        })
        .collect()
}
