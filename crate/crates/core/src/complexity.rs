//! Covariance-matrix circuit complexity of the length-perturbed evolution.
//!
//! Reference state: ground state of H. Target state:
//! exp(i H' t) exp(-i H t) |psi0> with H' the Hamiltonian at rod lengths
//! l1 (1 + eps), l2 (1 - eps). Both states are summarized by second moments
//! of xi = (theta1, theta2, k p1, k p2),
//!
//! ```text
//! G_ij = Re <psi| xi_i xi_j |psi>   (the symmetrized moment, a Gram matrix)
//! C    = sqrt(Tr[(log GT GR^-1)^2]) / (2 sqrt 2)
//! ```
//!
//! evaluated through the symmetric similarity transform
//! GR^-1/2 GT GR^-1/2, whose eigenvalues are real and positive whenever both
//! covariances are positive definite.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use faer::{Mat, MatRef};

use crate::eigen::EigenDecomposition;
use crate::fit;
use crate::gridops;
use crate::model::PendulumParams;
use crate::spectral::{build_diff_ops_with, DiffOps, Grid2D, Stencil};

use std::f64::consts::TAU;

#[derive(Debug, Error)]
pub enum ComplexityError {
    #[error("decompositions live on different grids")]
    GridMismatch,
    #[error("target expansion lost norm ({deficit:.3e}); retain the full basis of H'")]
    IncompleteBasis { deficit: f64 },
    #[error("reference covariance is numerically singular (cond {cond:.3e})")]
    SingularReference { cond: f64 },
    #[error(
        "similarity-transformed covariance has a non-positive eigenvalue {value:.3e} at t={t}"
    )]
    NonPositiveDelta { value: f64, t: f64 },
    #[error("invalid arguments: {0}")]
    BadArguments(String),
    #[error("linear fit failed: {0}")]
    FitFailed(#[from] fit::FitError),
}

/// Settings for the complexity run.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ComplexityConfig {
    /// Relative rod-length perturbation.
    pub epsilon: f64,
    /// Dimensional balancing constant; `None` uses 2 pi sqrt(ell_eff / g).
    pub k: Option<f64>,
    /// Effective length; `None` uses l1 + l2.
    pub ell_eff: Option<f64>,
    /// Levels of H' retained in the re-expansion; `None` keeps all.
    pub truncation: Option<usize>,
}

impl Default for ComplexityConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            k: None,
            ell_eff: None,
            truncation: None,
        }
    }
}

impl ComplexityConfig {
    pub fn resolve_ell_eff(&self, params: &PendulumParams) -> f64 {
        self.ell_eff.unwrap_or(params.l1 + params.l2)
    }

    pub fn resolve_k(&self, params: &PendulumParams) -> f64 {
        match self.k {
            Some(k) => k,
            None => TAU * (self.resolve_ell_eff(params) / params.g).sqrt(),
        }
    }
}

/// Parameters of the perturbed Hamiltonian: l1 -> (1 + eps) l1,
/// l2 -> (1 - eps) l2, everything else unchanged.
pub fn perturbed_params(params: &PendulumParams, epsilon: f64) -> PendulumParams {
    PendulumParams {
        l1: params.l1 * (1.0 + epsilon),
        l2: params.l2 * (1.0 - epsilon),
        ..*params
    }
}

/// Symmetrized second-moment matrix over xi = (theta1, theta2, k p1, k p2).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CovarianceMatrix(pub [[f64; 4]; 4]);

impl CovarianceMatrix {
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                worst = worst.max((self.0[i][j] - self.0[j][i]).abs());
            }
        }
        worst
    }

    /// Smallest eigenvalue (PSD check).
    pub fn min_eigenvalue(&self) -> f64 {
        let flat: Vec<f64> = (0..16).map(|i| self.0[i % 4][i / 4]).collect();
        symmetric_eigenvalues(&flat, 4)[0]
    }

    /// Same matrix with components relabeled 1 <-> 2 (angles and momenta).
    pub fn relabeled(&self) -> CovarianceMatrix {
        let perm = [1usize, 0, 3, 2];
        let mut out = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = self.0[perm[i]][perm[j]];
            }
        }
        CovarianceMatrix(out)
    }
}

fn symmetric_eigenvalues(flat_col_major: &[f64], n: usize) -> Vec<f64> {
    let mat = MatRef::from_column_major_slice(flat_col_major, n, n);
    let evd = mat
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("tiny symmetric eigensolve");
    let mut vals: Vec<f64> = (0..n).map(|i| evd.S()[i]).collect();
    vals.sort_by(f64::total_cmp);
    vals
}

fn symmetric_eigenpairs(flat_col_major: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mat = MatRef::from_column_major_slice(flat_col_major, n, n);
    let evd = mat
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("tiny symmetric eigensolve");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| evd.S()[a].total_cmp(&evd.S()[b]));
    let vals = order.iter().map(|&i| evd.S()[i]).collect();
    let mut vecs = vec![0.0; n * n];
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            vecs[col * n + row] = evd.U()[(row, src)];
        }
    }
    (vals, vecs)
}

/// Evolved target state exp(i H' t) exp(-i H t) |psi0> sampled on the grid.
pub fn target_state(
    eig_h: &EigenDecomposition,
    eig_hp: &EigenDecomposition,
    t: f64,
) -> Result<Vec<Complex64>, ComplexityError> {
    if eig_h.grid.n1 != eig_hp.grid.n1 || eig_h.grid.n2 != eig_hp.grid.n2 {
        return Err(ComplexityError::GridMismatch);
    }
    let overlaps = expansion_overlaps(eig_h, eig_hp);
    let state = evolve_with_overlaps(eig_h, eig_hp, &overlaps, t);
    check_norm(eig_h, &state)?;
    Ok(state)
}

fn expansion_overlaps(eig_h: &EigenDecomposition, eig_hp: &EigenDecomposition) -> Vec<f64> {
    // c_n = <psi'_n | psi0>_w.
    let dim = eig_h.dim;
    let count = eig_hp.count();
    let psi_p = MatRef::from_column_major_slice(&eig_hp.eigenvectors, dim, count);
    let psi0 = MatRef::from_column_major_slice(eig_h.vector(0), dim, 1);
    let prod = psi_p.transpose() * psi0;
    let w = eig_h.grid.weight();
    (0..count).map(|n| prod[(n, 0)] * w).collect()
}

fn evolve_with_overlaps(
    eig_h: &EigenDecomposition,
    eig_hp: &EigenDecomposition,
    overlaps: &[f64],
    t: f64,
) -> Vec<Complex64> {
    let dim = eig_h.dim;
    let count = overlaps.len();
    // Amplitudes c_n exp(i E'_n t), split into real and imaginary columns so
    // the grid synthesis is two real matrix-vector products.
    let mut amps = Mat::<f64>::zeros(count, 2);
    for n in 0..count {
        let phase = Complex64::from_polar(overlaps[n], eig_hp.eigenvalues[n] * t);
        amps[(n, 0)] = phase.re;
        amps[(n, 1)] = phase.im;
    }
    let psi_p = MatRef::from_column_major_slice(&eig_hp.eigenvectors, dim, count);
    let grid_parts = psi_p * amps.as_ref();
    let global = Complex64::from_polar(1.0, -eig_h.eigenvalues[0] * t);
    (0..dim)
        .map(|k| Complex64::new(grid_parts[(k, 0)], grid_parts[(k, 1)]) * global)
        .collect()
}

fn check_norm(eig: &EigenDecomposition, state: &[Complex64]) -> Result<(), ComplexityError> {
    let w = eig.grid.weight();
    let norm: f64 = state.iter().map(|z| z.norm_sqr()).sum::<f64>() * w;
    let deficit = (norm - 1.0).abs();
    if deficit > 1e-8 {
        return Err(ComplexityError::IncompleteBasis { deficit });
    }
    Ok(())
}

/// Covariance of a normalized grid state for xi = (theta1, theta2, k p1, k p2).
pub fn covariance(
    state: &[Complex64],
    grid: &Grid2D,
    k_balance: f64,
    hbar: f64,
    stencil: Stencil,
) -> CovarianceMatrix {
    let ops1 = build_diff_ops_with(grid.n1, stencil);
    let ops2 = build_diff_ops_with(grid.n2, stencil);
    covariance_with_ops(state, grid, k_balance, hbar, &ops1, &ops2)
}

fn covariance_with_ops(
    state: &[Complex64],
    grid: &Grid2D,
    k_balance: f64,
    hbar: f64,
    ops1: &DiffOps,
    ops2: &DiffOps,
) -> CovarianceMatrix {
    let dim = grid.dim();
    let mut components: Vec<Vec<Complex64>> = Vec::with_capacity(4);
    for axis in 0..2 {
        let scaled: Vec<Complex64> = (0..dim)
            .map(|idx| {
                let (t1, t2) = grid.point(idx);
                state[idx] * if axis == 0 { t1 } else { t2 }
            })
            .collect();
        components.push(scaled);
    }
    // k p = -i hbar k d/dtheta.
    let factor = Complex64::new(0.0, -hbar * k_balance);
    let d1 = gridops::d1_axis1(ops1, grid.n2, state);
    components.push(d1.iter().map(|z| z * factor).collect());
    let d2 = gridops::d1_axis2(ops2, grid.n1, state);
    components.push(d2.iter().map(|z| z * factor).collect());

    let w = grid.weight();
    let mut g = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in i..4 {
            let dot: Complex64 = components[i]
                .iter()
                .zip(&components[j])
                .map(|(a, b)| a.conj() * b)
                .sum();
            let value = dot.re * w;
            g[i][j] = value;
            g[j][i] = value;
        }
    }
    CovarianceMatrix(g)
}

/// How far the marginal fourth moments deviate from the Gaussian relation
/// <x^4> = 3 <x^2>^2 (largest relative deviation over the two angles).
/// Diagnostic only; the complexity value is never corrected by it.
pub fn gaussianity_deficit(state: &[Complex64], grid: &Grid2D) -> f64 {
    let w = grid.weight();
    let mut worst = 0.0f64;
    for axis in 0..2 {
        let mut m2 = 0.0;
        let mut m4 = 0.0;
        for idx in 0..grid.dim() {
            let (t1, t2) = grid.point(idx);
            let x = if axis == 0 { t1 } else { t2 };
            let density = state[idx].norm_sqr() * w;
            m2 += x * x * density;
            m4 += x * x * x * x * density;
        }
        worst = worst.max((m4 / (3.0 * m2 * m2) - 1.0).abs());
    }
    worst
}

fn covariance_complexity(gr: &[f64], gt: &[f64], n: usize, t: f64) -> Result<f64, ComplexityError> {
    let (mu, u) = symmetric_eigenpairs(gr, n);
    let cond = mu[n - 1] / mu[0].max(f64::MIN_POSITIVE);
    if mu[0] <= 0.0 || cond > 1e12 {
        return Err(ComplexityError::SingularReference { cond });
    }
    // R^-1/2 = U diag(mu^-1/2) U^T.
    let mut rinv_sqrt = vec![0.0; n * n];
    for col in 0..n {
        for row in 0..n {
            let mut acc = 0.0;
            for m in 0..n {
                acc += u[m * n + row] * u[m * n + col] / mu[m].sqrt();
            }
            rinv_sqrt[col * n + row] = acc;
        }
    }
    // S = R^-1/2 GT R^-1/2, symmetrized against round-off.
    let mut tmp = vec![0.0; n * n];
    for col in 0..n {
        for row in 0..n {
            let mut acc = 0.0;
            for m in 0..n {
                acc += rinv_sqrt[m * n + row] * gt[col * n + m];
            }
            tmp[col * n + row] = acc;
        }
    }
    let mut s = vec![0.0; n * n];
    for col in 0..n {
        for row in 0..n {
            let mut acc = 0.0;
            for m in 0..n {
                acc += tmp[m * n + row] * rinv_sqrt[col * n + m];
            }
            s[col * n + row] = acc;
        }
    }
    for col in 0..n {
        for row in 0..col {
            let mean = 0.5 * (s[col * n + row] + s[row * n + col]);
            s[col * n + row] = mean;
            s[row * n + col] = mean;
        }
    }
    let deltas = symmetric_eigenvalues(&s, n);
    if deltas[0] <= 0.0 {
        return Err(ComplexityError::NonPositiveDelta {
            value: deltas[0],
            t,
        });
    }
    let sum: f64 = deltas.iter().map(|d| d.ln().powi(2)).sum();
    Ok(sum.sqrt() / (2.0 * std::f64::consts::SQRT_2))
}

/// Complexity between two 4x4 covariances.
pub fn complexity_value(
    g_r: &CovarianceMatrix,
    g_t: &CovarianceMatrix,
) -> Result<f64, ComplexityError> {
    let flatten =
        |g: &CovarianceMatrix| -> Vec<f64> { (0..16).map(|i| g.0[i % 4][i / 4]).collect() };
    covariance_complexity(&flatten(g_r), &flatten(g_t), 4, 0.0)
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub window: (f64, f64),
}

/// Complexity time series with the long-time linear fit over the last half.
#[derive(Clone, Debug)]
pub struct ComplexitySeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: GrowthFit,
    pub epsilon: f64,
    pub k: f64,
    pub ell_eff: f64,
    pub g: f64,
    /// Fourth-moment Gaussianity deficit of the reference state.
    pub reference_gaussianity_deficit: f64,
}

impl ComplexitySeries {
    /// CSV with columns t,C.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,C\n");
        for (t, c) in self.times.iter().zip(&self.values) {
            out.push_str(&format!("{t},{c}\n"));
        }
        out
    }

    /// Fit report with the pinned key set.
    pub fn fit_json(&self) -> String {
        serde_json::json!({
            "slope": self.fit.slope,
            "intercept": self.fit.intercept,
            "r2": self.fit.r2,
            "window": [self.fit.window.0, self.fit.window.1],
            "epsilon": self.epsilon,
            "k": self.k,
            "ell_eff": self.ell_eff,
            "g": self.g,
        })
        .to_string()
    }
}

struct SeriesSetup<'a> {
    eig_h: &'a EigenDecomposition,
    eig_hp: &'a EigenDecomposition,
    overlaps: Vec<f64>,
    g_r: CovarianceMatrix,
    k: f64,
    ops1: DiffOps,
    ops2: DiffOps,
}

fn prepare_series<'a>(
    eig_h: &'a EigenDecomposition,
    eig_hp: &'a EigenDecomposition,
    config: &ComplexityConfig,
    times: &[f64],
) -> Result<SeriesSetup<'a>, ComplexityError> {
    if eig_h.grid.n1 != eig_hp.grid.n1 || eig_h.grid.n2 != eig_hp.grid.n2 {
        return Err(ComplexityError::GridMismatch);
    }
    if times.is_empty() {
        return Err(ComplexityError::BadArguments("empty time grid".into()));
    }
    let mut overlaps = expansion_overlaps(eig_h, eig_hp);
    if let Some(m) = config.truncation {
        if m < overlaps.len() {
            overlaps.truncate(m);
        }
    }
    let k = config.resolve_k(&eig_h.params);
    let ops1 = build_diff_ops_with(eig_h.grid.n1, eig_h.stencil);
    let ops2 = build_diff_ops_with(eig_h.grid.n2, eig_h.stencil);
    let reference: Vec<Complex64> = eig_h
        .vector(0)
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    let g_r = covariance_with_ops(&reference, &eig_h.grid, k, eig_h.params.hbar, &ops1, &ops2);
    Ok(SeriesSetup {
        eig_h,
        eig_hp,
        overlaps,
        g_r,
        k,
        ops1,
        ops2,
    })
}

fn value_at(setup: &SeriesSetup, t: f64) -> Result<f64, ComplexityError> {
    let state = evolve_with_overlaps(setup.eig_h, setup.eig_hp, &setup.overlaps, t);
    check_norm(setup.eig_h, &state)?;
    let g_t = covariance_with_ops(
        &state,
        &setup.eig_h.grid,
        setup.k,
        setup.eig_h.params.hbar,
        &setup.ops1,
        &setup.ops2,
    );
    let flatten =
        |g: &CovarianceMatrix| -> Vec<f64> { (0..16).map(|i| g.0[i % 4][i / 4]).collect() };
    covariance_complexity(&flatten(&setup.g_r), &flatten(&g_t), 4, t)
}

fn finish_series(
    setup: &SeriesSetup,
    config: &ComplexityConfig,
    times: &[f64],
    values: Vec<f64>,
) -> Result<ComplexitySeries, ComplexityError> {
    let half = times.len() / 2;
    let fit_line = fit::fit_line(&times[half..], &values[half..])?;
    let reference: Vec<Complex64> = setup
        .eig_h
        .vector(0)
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    let params = &setup.eig_h.params;
    Ok(ComplexitySeries {
        times: times.to_vec(),
        values,
        fit: GrowthFit {
            slope: fit_line.slope,
            intercept: fit_line.intercept,
            r2: fit_line.r2,
            window: (times[half], *times.last().unwrap()),
        },
        epsilon: config.epsilon,
        k: setup.k,
        ell_eff: config.resolve_ell_eff(params),
        g: params.g,
        reference_gaussianity_deficit: gaussianity_deficit(&reference, &setup.eig_h.grid),
    })
}

/// Complexity of the perturbed evolution at each time; per-time evaluations
/// run in parallel under the `parallel` feature.
pub fn complexity_series(
    eig_h: &EigenDecomposition,
    eig_hp: &EigenDecomposition,
    config: &ComplexityConfig,
    times: &[f64],
) -> Result<ComplexitySeries, ComplexityError> {
    let setup = prepare_series(eig_h, eig_hp, config, times)?;
    #[cfg(feature = "parallel")]
    let values: Vec<f64> = {
        use rayon::prelude::*;
        times
            .par_iter()
            .map(|&t| value_at(&setup, t))
            .collect::<Result<_, _>>()?
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<f64> = times
        .iter()
        .map(|&t| value_at(&setup, t))
        .collect::<Result<_, _>>()?;
    finish_series(&setup, config, times, values)
}

/// Sequential twin of [`complexity_series`].
pub fn complexity_series_seq(
    eig_h: &EigenDecomposition,
    eig_hp: &EigenDecomposition,
    config: &ComplexityConfig,
    times: &[f64],
) -> Result<ComplexitySeries, ComplexityError> {
    let setup = prepare_series(eig_h, eig_hp, config, times)?;
    let values: Vec<f64> = times
        .iter()
        .map(|&t| value_at(&setup, t))
        .collect::<Result<_, _>>()?;
    finish_series(&setup, config, times, values)
}

/// Single-pendulum sanity mode: the same complexity pipeline on the 1-D
/// pendulum H = -hbar^2/(2 m l^2) d^2/dtheta^2 + 2 m g l sin^2(theta/2) with
/// xi = (theta, k p).
pub mod single_mode {
    use super::*;

    pub struct SingleModeDecomposition {
        pub eigenvalues: Vec<f64>,
        /// Column-major n x n, weight-normalized.
        pub eigenvectors: Vec<f64>,
        pub points: Vec<f64>,
        pub weight: f64,
        pub ops: DiffOps,
    }

    /// Dense 1-D pendulum eigensolve on an n-point periodic grid.
    pub fn solve_single(
        mass: f64,
        length: f64,
        g: f64,
        hbar: f64,
        n: usize,
    ) -> SingleModeDecomposition {
        let grid = Grid2D::new(n, 3).expect("axis grid");
        let points = grid.theta1.clone();
        let ops = build_diff_ops_with(n, Stencil::Standard);
        let coeff = -hbar * hbar / (2.0 * mass * length * length);
        let mut entries = vec![0.0; n * n];
        for col in 0..n {
            for row in 0..n {
                let mut v = coeff * ops.dd1_at(row, col);
                if row == col {
                    let s = (0.5 * points[row]).sin();
                    v += 2.0 * mass * g * length * s * s;
                }
                entries[col * n + row] = v;
            }
        }
        let mat = MatRef::from_column_major_slice(&entries, n, n);
        let evd = mat
            .self_adjoint_eigen(faer::Side::Lower)
            .expect("1-D eigensolve");
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| evd.S()[a].total_cmp(&evd.S()[b]));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| evd.S()[i]).collect();
        let weight = TAU / n as f64;
        let scale = 1.0 / weight.sqrt();
        let mut eigenvectors = vec![0.0; n * n];
        for (col, &src) in order.iter().enumerate() {
            let mut best = 0;
            for row in 0..n {
                if evd.U()[(row, src)].abs() > evd.U()[(best, src)].abs() {
                    best = row;
                }
            }
            let sign = if evd.U()[(best, src)] < 0.0 {
                -1.0
            } else {
                1.0
            };
            for row in 0..n {
                eigenvectors[col * n + row] = sign * scale * evd.U()[(row, src)];
            }
        }
        SingleModeDecomposition {
            eigenvalues,
            eigenvectors,
            points,
            weight,
            ops,
        }
    }

    /// 2x2 covariance of a 1-D state over xi = (theta, k p).
    pub fn covariance_1d(
        state: &[Complex64],
        points: &[f64],
        weight: f64,
        ops: &DiffOps,
        k_balance: f64,
        hbar: f64,
    ) -> [[f64; 2]; 2] {
        let n = points.len();
        let theta_comp: Vec<Complex64> = (0..n).map(|i| state[i] * points[i]).collect();
        let factor = Complex64::new(0.0, -hbar * k_balance);
        let mut p_comp = vec![Complex64::default(); n];
        for i in 0..n {
            let mut acc = Complex64::default();
            for j in 0..n {
                acc += state[j] * ops.d1_at(i, j);
            }
            p_comp[i] = acc * factor;
        }
        let comps = [theta_comp, p_comp];
        let mut g = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in i..2 {
                let dot: Complex64 = comps[i]
                    .iter()
                    .zip(&comps[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                g[i][j] = dot.re * weight;
                g[j][i] = g[i][j];
            }
        }
        g
    }

    /// Complexity between two 2x2 covariances.
    pub fn complexity_value_1d(
        g_r: &[[f64; 2]; 2],
        g_t: &[[f64; 2]; 2],
    ) -> Result<f64, ComplexityError> {
        let flatten = |g: &[[f64; 2]; 2]| vec![g[0][0], g[1][0], g[0][1], g[1][1]];
        covariance_complexity(&flatten(g_r), &flatten(g_t), 2, 0.0)
    }

    /// Complexity series of the length-perturbed single pendulum.
    pub fn single_pendulum_series(
        mass: f64,
        length: f64,
        g: f64,
        hbar: f64,
        n: usize,
        epsilon: f64,
        times: &[f64],
    ) -> Result<ComplexitySeries, ComplexityError> {
        if times.is_empty() {
            return Err(ComplexityError::BadArguments("empty time grid".into()));
        }
        let base = solve_single(mass, length, g, hbar, n);
        let pert = solve_single(mass, length * (1.0 + epsilon), g, hbar, n);
        let k = TAU * (length / g).sqrt();
        let weight = base.weight;

        // Overlaps of the perturbed basis with the reference ground state.
        let psi0 = &base.eigenvectors[..n];
        let overlaps: Vec<f64> = (0..n)
            .map(|m| {
                let v = &pert.eigenvectors[m * n..(m + 1) * n];
                v.iter().zip(psi0).map(|(a, b)| a * b).sum::<f64>() * weight
            })
            .collect();

        let reference: Vec<Complex64> = psi0.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let g_r = covariance_1d(&reference, &base.points, weight, &base.ops, k, hbar);

        let mut values = Vec::with_capacity(times.len());
        for &t in times {
            let mut state = vec![Complex64::default(); n];
            for m in 0..n {
                let amp = Complex64::from_polar(overlaps[m], pert.eigenvalues[m] * t);
                let v = &pert.eigenvectors[m * n..(m + 1) * n];
                for i in 0..n {
                    state[i] += v[i] * amp;
                }
            }
            let phase = Complex64::from_polar(1.0, -base.eigenvalues[0] * t);
            for z in state.iter_mut() {
                *z *= phase;
            }
            let g_t = covariance_1d(&state, &base.points, weight, &base.ops, k, hbar);
            values.push(complexity_value_1d(&g_r, &g_t)?);
        }

        let half = times.len() / 2;
        let line = fit::fit_line(&times[half..], &values[half..])?;
        Ok(ComplexitySeries {
            times: times.to_vec(),
            values,
            fit: GrowthFit {
                slope: line.slope,
                intercept: line.intercept,
                r2: line.r2,
                window: (times[half], *times.last().unwrap()),
            },
            epsilon,
            k,
            ell_eff: length,
            g,
            reference_gaussianity_deficit: 0.0,
        })
    }
}
