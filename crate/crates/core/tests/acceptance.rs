//! Acceptance suite: one test per criterion, each printing a single
//! [PASS]/[FAIL] line (run with `--nocapture` to see them as they finish).
//!
//! Criteria 6 and 7 contain clauses that desk-scale truncation provably
//! cannot reach; those assertions are kept faithful and fail with the
//! blocking analysis in the message rather than being loosened.

mod common;

use common::Rng;

use chaology_core::classical::{
    divergence, fit_lyapunov, reference_initial_pair, sweep_g, FitWindow, SweepSettings,
};
use chaology_core::complexity::{
    complexity_series, complexity_value, perturbed_params, ComplexityConfig, CovarianceMatrix,
};
use chaology_core::eigen::{
    estimate_errors, fit_linear_spectrum, solve, EigenDecomposition, Retain,
};
use chaology_core::levelstats::{
    compare_templates, histogram, spacings, unfold, Normalization, SpacingDistribution,
    TemplateScaling, Verdict,
};
use chaology_core::otoc::{
    fit_otoc_short_time, operator_matrix, otoc_series_multi, FitTarget, OperatorKind, OtocInputs,
};
use chaology_core::spectral::{assemble_hamiltonian, Grid2D};
use chaology_core::{fit, PendulumParams, PhaseState};

use std::sync::OnceLock;

fn decompose(params: &PendulumParams, n: usize) -> EigenDecomposition {
    let grid = Grid2D::square(n).unwrap();
    let h = assemble_hamiltonian(params, &grid).unwrap();
    solve(&h, Retain::All).unwrap()
}

fn unit_params() -> PendulumParams {
    PendulumParams::unit()
}

fn config_b() -> PendulumParams {
    PendulumParams {
        l1: 4.0 / 3.0,
        l2: 2.0 / 3.0,
        ..PendulumParams::unit()
    }
}

fn config_c() -> PendulumParams {
    PendulumParams::unit().with_g(10.0)
}

static UNIT_48: OnceLock<EigenDecomposition> = OnceLock::new();
static UNIT_64: OnceLock<EigenDecomposition> = OnceLock::new();
static C10_48: OnceLock<EigenDecomposition> = OnceLock::new();
static C10_64: OnceLock<EigenDecomposition> = OnceLock::new();

fn unit_48() -> &'static EigenDecomposition {
    UNIT_48.get_or_init(|| decompose(&unit_params(), 48))
}

fn unit_64() -> &'static EigenDecomposition {
    UNIT_64.get_or_init(|| decompose(&unit_params(), 64))
}

fn c10_48() -> &'static EigenDecomposition {
    C10_48.get_or_init(|| decompose(&config_c(), 48))
}

fn c10_64() -> &'static EigenDecomposition {
    C10_64.get_or_init(|| decompose(&config_c(), 64))
}

/// Collects clause failures, prints the one-line verdict, then panics if red.
struct Criterion {
    name: &'static str,
    failures: Vec<String>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            failures: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, clause: impl Into<String>) {
        if !ok {
            self.failures.push(clause.into());
        }
    }

    fn finish(self) {
        if self.failures.is_empty() {
            println!("[PASS] {}", self.name);
        } else {
            println!("[FAIL] {}: {}", self.name, self.failures.join("; "));
            panic!("{} failed: {}", self.name, self.failures.join("; "));
        }
    }
}

#[test]
fn criterion_1_hamiltonian_oracle_equivalence() {
    let mut c = Criterion::new("criterion 1: Hamiltonian oracle equivalence (1e4 points, 1e-10)");
    let mut rng = Rng::new(0x0ac5);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let p = PendulumParams {
            m1: rng.range(0.2, 3.0),
            m2: rng.range(0.2, 3.0),
            l1: rng.range(0.2, 3.0),
            l2: rng.range(0.2, 3.0),
            g: rng.range(0.0, 50.0),
            hbar: 1.0,
        };
        let t1 = rng.range(-std::f64::consts::PI, std::f64::consts::PI);
        let t2 = rng.range(-std::f64::consts::PI, std::f64::consts::PI);
        let (a, b, x) = common::inertia_oracle(&p, t1, t2);
        let coeff = chaology_core::model::inertia_coefficients(&p, t1, t2);
        worst = worst
            .max((coeff.inv_2i1 - a).abs() / a.abs())
            .max((coeff.inv_2i2 - b).abs() / b.abs())
            .max((coeff.inv_i12 - x).abs() / x.abs().max(1e-12));

        let p1 = rng.range(-5.0, 5.0);
        let p2 = rng.range(-5.0, 5.0);
        let state = PhaseState {
            theta1: t1,
            theta2: t2,
            p1,
            p2,
        };
        let oracle = common::hamiltonian_oracle(&p, t1, t2, p1, p2);
        let value = chaology_core::model::hamiltonian_value(&p, &state);
        worst = worst.max((value - oracle).abs() / oracle.abs().max(1.0));
    }
    c.check(
        worst <= 1e-10,
        format!("worst relative deviation {worst:.3e} > 1e-10"),
    );
    c.finish();
}

#[test]
fn criterion_2_classical_chaos_reproduction() {
    let mut c =
        Criterion::new("criterion 2: classical chaos (lambda > 0, t* and lambda monotone in g)");
    let (ic_a, ic_b) = reference_initial_pair();

    // Unit parameters: positive exponent, finite scrambling time, tight drift.
    let series = divergence(&unit_params(), &ic_a, &ic_b, None, 40.0, 0.05, 1e-8).unwrap();
    let fit = fit_lyapunov(&series, FitWindow::UntilOrderOne).unwrap();
    c.check(
        fit.lambda > 0.0,
        format!("lambda {} not positive at g=1", fit.lambda),
    );
    c.check(fit.t_star.is_some(), "no scrambling time at g=1");

    let settings = SweepSettings {
        k: None,
        t_max: 40.0,
        dt: 0.05,
        tol: 1e-8,
        mode: FitWindow::UntilOrderOne,
    };
    let rows = sweep_g(&unit_params(), &[1.0, 10.0, 100.0], &ic_a, &ic_b, &settings);
    let mut lambdas = Vec::new();
    let mut t_stars = Vec::new();
    for row in &rows {
        match &row.fit {
            Some(f) => {
                lambdas.push(f.lambda);
                match f.t_star {
                    Some(t) => t_stars.push(t),
                    None => c.check(false, format!("g={} never reached order one", row.g)),
                }
            }
            None => c.check(false, format!("g={} failed: {:?}", row.g, row.error)),
        }
    }
    if lambdas.len() == 3 {
        c.check(
            lambdas[0] < lambdas[1] && lambdas[1] < lambdas[2],
            format!("lambda not strictly increasing: {lambdas:?}"),
        );
    }
    if t_stars.len() == 3 {
        c.check(
            t_stars[0] > t_stars[1] && t_stars[1] > t_stars[2],
            format!("t* not strictly decreasing: {t_stars:?}"),
        );
    }
    // Energy drift on each row's underlying runs.
    for g in [1.0, 10.0, 100.0] {
        let traj =
            chaology_core::classical::integrate(&unit_params().with_g(g), &ic_a, 40.0, 0.05, 1e-8)
                .unwrap();
        let drift = traj.max_energy_drift();
        c.check(drift < 1e-8, format!("g={g} drift {drift:.2e} >= 1e-8"));
    }
    c.finish();
}

#[test]
fn criterion_3_eigenvalue_reliability() {
    let mut c = Criterion::new("criterion 3: 48^2 vs 64^2 eigenvalue reliability");
    let report = estimate_errors(unit_48(), unit_64()).unwrap();
    let max100 = report.estimates[..100]
        .iter()
        .map(|e| e.ratio)
        .fold(0.0f64, f64::max);
    let max500 = report.estimates[..500]
        .iter()
        .map(|e| e.ratio)
        .fold(0.0f64, f64::max);
    c.check(
        max100 <= 1e-4,
        format!("lowest 100 max ratio {max100:.2e} > 1e-4"),
    );
    c.check(
        max500 <= 1e-3,
        format!("lowest 500 max ratio {max500:.2e} > 1e-3"),
    );
    println!(
        "  criterion 3 detail: reliable@1e-4 = {}, max ratio lowest100 = {max100:.2e}, lowest500 = {max500:.2e}",
        report.reliable_count
    );
    c.finish();
}

#[test]
fn criterion_4_linear_spectrum() {
    let mut c = Criterion::new("criterion 4: high-n linear spectrum slope vs 0.13293 (10%)");
    let report = estimate_errors(unit_48(), unit_64()).unwrap();
    let hi = report.reliable_count - 1;
    let lo = hi / 5;
    let fit = fit_linear_spectrum(unit_64(), lo, hi).unwrap();
    let rel = (fit.slope / 0.13293 - 1.0).abs();
    c.check(
        rel <= 0.10,
        format!(
            "slope {:.5} off by {:.1}% from 0.13293",
            fit.slope,
            rel * 100.0
        ),
    );
    println!(
        "  criterion 4 detail: fit over [{lo},{hi}] gives E_n ~ {:.5} n + {:.5} ({:.2}% off)",
        fit.slope,
        fit.intercept,
        rel * 100.0
    );
    c.finish();
}

#[test]
fn criterion_5_nnsd_verdicts() {
    let mut c = Criterion::new("criterion 5: NNSD Poisson / NNNSD GOE verdicts + synthetic checks");
    // Strong-chaos configuration (third reference config, g = 10); at g = 1
    // the free-rotor parity doublets dominate the desk-scale window and keep
    // every spacing order Poisson-like.
    let report = estimate_errors(c10_48(), c10_64()).unwrap();
    let window = report.reliable_count_at(1e-3);

    let nnsd = spacings(&c10_64().eigenvalues, 1, window).unwrap();
    let raw = compare_templates(&nnsd, TemplateScaling::HandFit).unwrap();
    c.check(
        raw.ks_poisson < raw.ks_goe,
        format!(
            "raw NNSD: KS poisson {:.3} !< KS goe {:.3}",
            raw.ks_poisson, raw.ks_goe
        ),
    );
    c.check(
        raw.verdict == Verdict::Poisson,
        "raw NNSD verdict not Poisson",
    );

    let nnnsd = spacings(&c10_64().eigenvalues, 2, window).unwrap();
    let fit2 = compare_templates(&nnnsd, TemplateScaling::UnitMean).unwrap();
    c.check(
        fit2.verdict == Verdict::Goe,
        format!(
            "NNNSD verdict did not flip: KS goe {:.3} vs poisson {:.3}",
            fit2.ks_goe, fit2.ks_poisson
        ),
    );
    println!(
        "  criterion 5 detail: window {window}; NNSD KS (goe {:.3}, poisson {:.3}); NNNSD KS (goe {:.3}, poisson {:.3})",
        raw.ks_goe, raw.ks_poisson, fit2.ks_goe, fit2.ks_poisson
    );

    // Property-based templates.
    let mut rng = Rng::new(0x5eed);
    let exp_sample: Vec<f64> = (0..4000).map(|_| -rng.uniform().max(1e-12).ln()).collect();
    let exp_dist = SpacingDistribution {
        spacings: exp_sample,
        r: 1,
        normalization: Normalization::Raw,
    };
    let exp_fit = compare_templates(&exp_dist, TemplateScaling::UnitMean).unwrap();
    c.check(
        exp_fit.verdict == Verdict::Poisson,
        "i.i.d. exponential input not Poisson-closer",
    );

    let goe_levels = common::goe_spectrum(500, 0x60e);
    // Bulk of the semicircle; the pooled edge density would smear the shape.
    let bulk = &goe_levels[125..375];
    let d = spacings(bulk, 1, bulk.len()).unwrap();
    let goe_fit = compare_templates(&d, TemplateScaling::UnitMean).unwrap();
    c.check(
        goe_fit.verdict == Verdict::Goe,
        format!(
            "GOE sample not GOE-closer: goe {:.3} poisson {:.3}",
            goe_fit.ks_goe, goe_fit.ks_poisson
        ),
    );
    c.finish();
}

struct OtocBundle {
    theta: chaology_core::otoc::OperatorMatrix,
    p: chaology_core::otoc::OperatorMatrix,
    psq: chaology_core::otoc::OperatorMatrix,
    eigenvalues: Vec<f64>,
}

fn otoc_bundle(eig: &EigenDecomposition, m: usize) -> OtocBundle {
    OtocBundle {
        theta: operator_matrix(eig, OperatorKind::Theta1, m).unwrap(),
        p: operator_matrix(eig, OperatorKind::P1, m).unwrap(),
        psq: operator_matrix(eig, OperatorKind::P1Sq, m).unwrap(),
        eigenvalues: eig.eigenvalues.clone(),
    }
}

impl OtocBundle {
    fn inputs(&self) -> OtocInputs<'_> {
        OtocInputs {
            theta: &self.theta,
            p: &self.p,
            psq: &self.psq,
            eigenvalues: &self.eigenvalues,
            hbar: 1.0,
        }
    }
}

#[test]
fn criterion_6_otoc_structure() {
    let mut c =
        Criterion::new("criterion 6: OTOC structure (C(0), decay, flatness, lambda fits, bound)");
    let m = 500;

    // C(0) = hbar^2 within 10% at M >= 500. Evaluated at beta = 4: a colder
    // ensemble stays below the potential barrier at theta = +-pi where the
    // wrapped angle operator would otherwise distort the commutator.
    let unit_bundle = otoc_bundle(unit_64(), m);
    let s = otoc_series_multi(&unit_bundle.inputs(), &[4.0], &[0.0])
        .unwrap()
        .pop()
        .unwrap();
    let c0 = s.c[0];
    c.check(
        (c0 - 1.0).abs() <= 0.10,
        format!("C(0) = {c0:.4}, off hbar^2 by more than 10%"),
    );

    // Long-time decay and C flatness over t in [0, 200] at the 2^4 pi row
    // (beta = 1/8), strong-chaos configuration: its thermal band stays below
    // the barrier so the correlator actually dephases at desk scale.
    let c10_bundle = otoc_bundle(c10_64(), m);
    let times: Vec<f64> = (0..101).map(|i| 2.0 * i as f64).collect();
    let series = otoc_series_multi(&c10_bundle.inputs(), &[0.125], &times)
        .unwrap()
        .pop()
        .unwrap();
    let early_max = series.f[..25]
        .iter()
        .map(|z| z.norm())
        .fold(0.0f64, f64::max);
    let late: Vec<f64> = series.f[75..].iter().map(|z| z.norm()).collect();
    let late_mean = late.iter().sum::<f64>() / late.len() as f64;
    c.check(
        late_mean < 0.10 * early_max,
        format!("late mean |F| {late_mean:.3} !< 10% of early max {early_max:.3}"),
    );
    let flat = fit::fit_line(&series.times[75..], &series.c[75..]).unwrap();
    c.check(
        flat.slope.abs() <= 2.0 * flat.slope_stderr,
        format!(
            "late C slope {:.3e} not consistent with 0 at 2 sigma ({:.3e})",
            flat.slope, flat.slope_stderr
        ),
    );

    // Short-time exponential fits across the three reference configurations;
    // first ten samples at dt = 0.04, beta = 1/8, Re F target.
    let short: Vec<f64> = (0..12).map(|i| 0.04 * i as f64).collect();
    let b_bundle = otoc_bundle(&decompose(&config_b(), 64), m);
    let mut lambdas = Vec::new();
    for bundle in [&unit_bundle, &b_bundle, &c10_bundle] {
        let s = otoc_series_multi(&bundle.inputs(), &[0.125], &short)
            .unwrap()
            .pop()
            .unwrap();
        let fit = fit_otoc_short_time(&s, 10, FitTarget::ReF).unwrap();
        c.check(
            fit.lambda_q > 0.0,
            format!("lambda_q {:.3} not positive", fit.lambda_q),
        );
        c.check(
            fit.saturation_ratio < 1.0,
            format!("saturation ratio {:.3} >= 1", fit.saturation_ratio),
        );
        lambdas.push(fit.lambda_q);
    }
    println!(
        "  criterion 6 detail: C(0) = {c0:.4}; decay ratio {:.4}; lambda_q = {lambdas:?}",
        late_mean / early_max
    );
    // Desk-scale blocker, kept faithful: the g = 10 chaotic band sits at
    // E ~ 10..60 and needs T >~ 30, but those ensembles are not converged at
    // the reliable desk truncation (F(0) moves ~45% between M = 500 and
    // M = 793 at beta = 1/32), so its fitted rate stays below the g = 1 pair.
    c.check(
        lambdas[0] < lambdas[1] && lambdas[1] < lambdas[2],
        format!(
            "lambda_q not monotone over the three configurations: {:.3} / {:.3} / {:.3} \
             (third configuration requires ensembles beyond the desk-scale reliable truncation)",
            lambdas[0], lambdas[1], lambdas[2]
        ),
    );
    c.finish();
}

#[test]
fn criterion_7_complexity_structure() {
    let mut c = Criterion::new("criterion 7: complexity structure (C(0)=0, oracle, growth fits)");

    // Single-mode squeezed-state closed form: C = |r| exactly.
    let eye = CovarianceMatrix([
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);
    let r: f64 = 0.37;
    let squeezed = CovarianceMatrix([
        [(2.0 * r).exp(), 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, (-2.0 * r).exp(), 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ]);
    let got = complexity_value(&eye, &squeezed).unwrap();
    c.check(
        (got - r).abs() <= 1e-6,
        format!("squeezed oracle: {got} vs {r}"),
    );

    let times: Vec<f64> = (0..301).map(|i| 40.0 * i as f64 / 300.0).collect();
    let mut slopes = Vec::new();
    let mut all_r2 = Vec::new();
    for g in [10.0, 40.0, 90.0] {
        let params = unit_params().with_g(g);
        let eig_h = if g == 10.0 {
            c10_48().clone()
        } else {
            decompose(&params, 48)
        };
        let eig_hp = decompose(&perturbed_params(&params, 1e-6), 48);
        let config = ComplexityConfig {
            epsilon: 1e-6,
            ..Default::default()
        };
        let series = complexity_series(&eig_h, &eig_hp, &config, &times).unwrap();
        c.check(
            series.values[0].abs() <= 1e-8,
            format!("C(0) = {:.2e} at g={g}", series.values[0]),
        );
        slopes.push(series.fit.slope);
        all_r2.push(series.fit.r2);
    }
    println!("  criterion 7 detail: slopes {slopes:?}, r2 {all_r2:?}");
    // Desk-scale blocker, kept faithful: at epsilon = 1e-6 the target state
    // stays perturbatively close to the reference, so C(t) is a bounded
    // almost-periodic signal (amplitude ~2.5e-6 for every g measured here);
    // no window of the last-half fit shows sustained linear growth, and the
    // coherent-ramp slope scales like sqrt(g), the opposite ordering.
    c.check(
        all_r2.iter().all(|r2| *r2 > 0.95),
        format!("last-half linear fits are not growth-dominated: r2 = {all_r2:?}"),
    );
    c.check(
        slopes[0] > slopes[1] && slopes[1] > slopes[2],
        format!("fitted slopes not decreasing in g: {slopes:?}"),
    );
    c.finish();
}

#[test]
fn criterion_8_invariant_suites() {
    let mut c = Criterion::new("criterion 8: module invariant suites (consolidated)");

    // Time-reversal integration.
    let tol = 1e-10;
    let ic = PhaseState::at_rest(1.1, 2.3);
    let fwd = chaology_core::classical::integrate(&unit_params(), &ic, 6.0, 6.0, tol).unwrap();
    let end = *fwd.states.last().unwrap();
    let back = chaology_core::classical::integrate(
        &unit_params(),
        &PhaseState {
            p1: -end.p1,
            p2: -end.p2,
            ..end
        },
        6.0,
        6.0,
        tol,
    )
    .unwrap();
    let fin = back.states.last().unwrap();
    let err = (fin.theta1 - ic.theta1)
        .abs()
        .max((fin.theta2 - ic.theta2).abs())
        .max((fin.p1 + ic.p1).abs())
        .max((fin.p2 + ic.p2).abs());
    c.check(err < 100.0 * tol, format!("time reversal error {err:.2e}"));

    // Hamiltonian symmetry + parity commutant on a fresh grid.
    let grid = Grid2D::square(20).unwrap();
    let h = assemble_hamiltonian(&unit_params(), &grid).unwrap();
    c.check(h.asymmetry() == 0.0, "H not exactly symmetric");
    let perm = grid.parity_permutation();
    let mut parity_violation = 0.0f64;
    for k in 0..h.dim {
        for l in 0..h.dim {
            parity_violation = parity_violation.max((h.at(perm[k], perm[l]) - h.at(k, l)).abs());
        }
    }
    c.check(
        parity_violation <= 1e-10 * h.max_abs(),
        format!("parity violation {parity_violation:.2e}"),
    );

    // Eigen residuals, spectrum bound, orthonormality (small grid).
    let eig = solve(&h, Retain::All).unwrap();
    c.check(
        eig.eigenvalues[0] >= -1e-8,
        format!("E0 = {}", eig.eigenvalues[0]),
    );
    let residual_ok = (0..eig.count()).all(|n| {
        let v = eig.vector(n);
        let hv = h.apply(v);
        let e = eig.eigenvalues[n];
        let res: f64 = hv
            .iter()
            .zip(v)
            .map(|(a, b)| (a - e * b) * (a - e * b))
            .sum::<f64>()
            .sqrt();
        let vnorm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        res / (vnorm * e.abs().max(1.0)) <= 1e-8
    });
    c.check(residual_ok, "eigenpair residual exceeded 1e-8");

    // Spacing positivity over the reliable range: strict between degenerate
    // clusters (tunneling doublets in the rotor regime split below f64
    // resolution, so the tie-break clusters them first).
    let report = estimate_errors(unit_48(), unit_64()).unwrap();
    let reliable = report.reliable_count;
    let evals = &unit_64().eigenvalues[..reliable];
    c.check(
        evals.windows(2).all(|w| w[1] >= w[0]),
        "eigenvalues not sorted",
    );
    let gap = chaology_core::eigen::DEGENERACY_GAP;
    let mut cluster_heads: Vec<f64> = Vec::new();
    for &e in evals {
        match cluster_heads.last() {
            Some(&head) if e - head < gap => {}
            _ => cluster_heads.push(e),
        }
    }
    c.check(
        cluster_heads.windows(2).all(|w| w[1] - w[0] > 0.0),
        "degenerate spacing between distinct clusters",
    );

    // Cache round trip (bitwise) and corruption detection.
    let bytes = chaology_core::eigen::cache_bytes(&eig);
    let loaded = chaology_core::eigen::decode_cache(&bytes).unwrap();
    c.check(
        loaded.eigenvalues == eig.eigenvalues,
        "cache round trip not bit-identical",
    );
    let mut corrupted = bytes.clone();
    let idx = bytes.len() - 9;
    corrupted[idx] ^= 1;
    c.check(
        chaology_core::eigen::decode_cache(&corrupted).is_err(),
        "corrupted cache accepted",
    );

    // Unfolded unit mean on the real spectrum.
    let window = reliable.min(unit_64().count());
    let unfolded = unfold(&unit_64().eigenvalues[..window], 5).unwrap();
    let mean = (1..unfolded.len())
        .map(|i| unfolded[i] - unfolded[i - 1])
        .sum::<f64>()
        / (unfolded.len() - 1) as f64;
    c.check(
        (mean - 1.0).abs() <= 0.02,
        format!("unfolded mean spacing {mean:.4}"),
    );

    // Histogram mass.
    let d = spacings(&unit_64().eigenvalues, 1, window).unwrap();
    let hist = histogram(&d, 50);
    let width = hist.edges[1] - hist.edges[0];
    let mass: f64 = hist.densities.iter().map(|x| x * width).sum();
    c.check((mass - 1.0).abs() <= 1e-9, format!("histogram mass {mass}"));

    // OTOC hermiticity invariants at modest truncation.
    let bundle = otoc_bundle(unit_64(), 300);
    let theta_res = bundle.theta.hermiticity_residual();
    let p_res = bundle.p.hermiticity_residual();
    c.check(
        theta_res <= 1e-8 * bundle.theta.max_abs().max(1.0),
        "theta not symmetric",
    );
    c.check(
        p_res <= 1e-8 * bundle.p.max_abs().max(1.0),
        "p not hermitian",
    );
    let times: Vec<f64> = (0..20).map(|i| 0.25 * i as f64).collect();
    let s = otoc_series_multi(&bundle.inputs(), &[2.0], &times)
        .unwrap()
        .pop()
        .unwrap();
    let max_c = s.c.iter().cloned().fold(0.0f64, f64::max);
    c.check(
        s.max_im_d <= 1e-8 * max_c.max(1.0),
        format!("Im D residue {:.2e}", s.max_im_d),
    );
    c.check(
        s.f[0].im.abs() <= 1e-8 * s.f[0].norm().max(1.0),
        format!("Im F(0) = {:.2e}", s.f[0].im),
    );
    c.check(
        s.c.iter().all(|v| *v >= -1e-6 * max_c),
        "C(t) negative beyond truncation noise",
    );

    // Covariance PSD + complexity zero point at the strong-chaos config.
    let state: Vec<num_complex::Complex64> = c10_48()
        .vector(0)
        .iter()
        .map(|&x| num_complex::Complex64::new(x, 0.0))
        .collect();
    let g_r =
        chaology_core::complexity::covariance(&state, &c10_48().grid, 2.0, 1.0, c10_48().stencil);
    c.check(
        g_r.min_eigenvalue() >= -1e-10,
        format!("covariance min eig {:.2e}", g_r.min_eigenvalue()),
    );
    c.check(
        complexity_value(&g_r, &g_r).unwrap() <= 1e-8,
        "complexity of identical covariances not zero",
    );

    c.finish();
}

/// Harmonic-oracle spot check from the solver contract: hbar = 0.1, g = 10,
/// ground state within 5% of (hbar/2)(omega+ + omega-).
#[test]
fn ground_state_matches_normal_mode_oracle() {
    let params = PendulumParams {
        g: 10.0,
        hbar: 0.1,
        ..PendulumParams::unit()
    };
    let eig = decompose(&params, 64);
    let wp = ((2.0 + std::f64::consts::SQRT_2) * 10.0).sqrt();
    let wm = ((2.0 - std::f64::consts::SQRT_2) * 10.0).sqrt();
    let oracle = 0.05 * (wp + wm);
    let rel = (eig.eigenvalues[0] - oracle).abs() / oracle;
    assert!(
        rel <= 0.05,
        "E0 = {} vs oracle {} ({:.1}% off)",
        eig.eigenvalues[0],
        oracle,
        rel * 100.0
    );
}

/// Spectrum-shape invariance under the g / hbar^2 rescaling: doubling hbar
/// and quadrupling g multiplies every eigenvalue by hbar^2's factor.
#[test]
fn spectrum_scales_with_g_over_hbar_squared() {
    let base = decompose(&PendulumParams::unit().with_g(4.0), 32);
    let scaled = decompose(
        &PendulumParams {
            g: 16.0,
            hbar: 2.0,
            ..PendulumParams::unit()
        },
        32,
    );
    for n in 0..40 {
        let ratio = scaled.eigenvalues[n] / base.eigenvalues[n];
        assert!(
            (ratio - 4.0).abs() < 1e-6 * 4.0,
            "level {n}: ratio {ratio} != hbar^2 scaling"
        );
    }
}
