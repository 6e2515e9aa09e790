//! Thermal out-of-time-order correlators in the truncated eigenbasis.
//!
//! With operator matrices O_nk = <psi_n|O|psi_k> over the lowest M states,
//! the correlators evaluate as traces of phase-dressed matrix products,
//!
//! ```text
//! F(t) = tr[ W theta(t) p theta(t) p ] / Z
//! D(t) = tr[ W theta  psq(-t) theta ] / Z
//! C(t) = 2 (Re D - Re F)
//! ```
//!
//! where theta(t) carries the eigenphases exp(+-i E t) as diagonal scalings,
//! W = diag(exp(-beta (E_n - E_0))) and Z = sum of the shifted weights (the
//! E_0 shift cancels between numerator and Z and keeps every exponential in
//! range). C combines D with the real part of F, which is the hermitian
//! commutator-square combination; the imaginary residue of the D trace is
//! checked and reported, never silently used.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use faer::{Mat, MatRef};

use crate::eigen::EigenDecomposition;
use crate::fit::{self, FitError};
use crate::gridops;
use crate::spectral::build_diff_ops_with;

use std::f64::consts::TAU;

#[derive(Debug, Error)]
pub enum OtocError {
    #[error("truncation {m} exceeds the {available} available levels")]
    TruncationError { m: usize, available: usize },
    #[error("invalid arguments: {0}")]
    BadArguments(String),
    #[error("short-time fit failed: {0}")]
    NoConvergence(#[from] FitError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Theta1,
    Theta2,
    P1,
    P2,
    P1Sq,
    P2Sq,
}

/// Matrix of an observable over the lowest M eigenstates, column-major M x M.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub m: usize,
    pub entries: Vec<Complex64>,
}

impl OperatorMatrix {
    pub fn at(&self, n: usize, k: usize) -> Complex64 {
        self.entries[k * self.m + n]
    }

    /// Max |A - A^dagger| entry.
    pub fn hermiticity_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for n in 0..self.m {
            for k in n..self.m {
                worst = worst.max((self.at(n, k) - self.at(k, n).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |acc, z| acc.max(z.norm()))
    }
}

fn gram(eig: &EigenDecomposition, m: usize, applied: &[f64]) -> Vec<f64> {
    let psi = MatRef::from_column_major_slice(&eig.eigenvectors[..eig.dim * m], eig.dim, m);
    let rhs = MatRef::from_column_major_slice(applied, eig.dim, m);
    let prod = psi.transpose() * rhs;
    let w = eig.grid.weight();
    let mut out = vec![0.0; m * m];
    for k in 0..m {
        for n in 0..m {
            out[k * m + n] = prod[(n, k)] * w;
        }
    }
    out
}

/// Builds <psi_n|O|psi_k> for the lowest `m` states. Angle operators multiply
/// on the grid; momenta act as -i hbar times the first-derivative stencil and
/// their squares as -hbar^2 times the second-derivative stencil.
pub fn operator_matrix(
    eig: &EigenDecomposition,
    kind: OperatorKind,
    m: usize,
) -> Result<OperatorMatrix, OtocError> {
    if m > eig.count() {
        return Err(OtocError::TruncationError {
            m,
            available: eig.count(),
        });
    }
    if m == 0 {
        return Err(OtocError::BadArguments(
            "truncation must be positive".into(),
        ));
    }
    let dim = eig.dim;
    let grid = &eig.grid;
    let hbar = eig.params.hbar;

    let entries: Vec<Complex64> = match kind {
        OperatorKind::Theta1 | OperatorKind::Theta2 => {
            let mut applied = vec![0.0; dim * m];
            for col in 0..m {
                let v = eig.vector(col);
                let dst = &mut applied[col * dim..(col + 1) * dim];
                for k in 0..dim {
                    let (t1, t2) = grid.point(k);
                    let x = if kind == OperatorKind::Theta1 { t1 } else { t2 };
                    dst[k] = x * v[k];
                }
            }
            gram(eig, m, &applied)
                .iter()
                .map(|&x| Complex64::new(x, 0.0))
                .collect()
        }
        OperatorKind::P1 | OperatorKind::P2 => {
            let axis1 = kind == OperatorKind::P1;
            let ops = build_diff_ops_with(if axis1 { grid.n1 } else { grid.n2 }, eig.stencil);
            let mut applied = vec![0.0; dim * m];
            for col in 0..m {
                let v = eig.vector(col);
                let dv = if axis1 {
                    gridops::d1_axis1(&ops, grid.n2, v)
                } else {
                    gridops::d1_axis2(&ops, grid.n1, v)
                };
                applied[col * dim..(col + 1) * dim].copy_from_slice(&dv);
            }
            // p = -i hbar d/dtheta: real antisymmetric sandwich, imaginary result.
            gram(eig, m, &applied)
                .iter()
                .map(|&x| Complex64::new(0.0, -hbar * x))
                .collect()
        }
        OperatorKind::P1Sq | OperatorKind::P2Sq => {
            let axis1 = kind == OperatorKind::P1Sq;
            let ops = build_diff_ops_with(if axis1 { grid.n1 } else { grid.n2 }, eig.stencil);
            let mut applied = vec![0.0; dim * m];
            for col in 0..m {
                let v = eig.vector(col);
                let dv = if axis1 {
                    gridops::dd1_axis1(&ops, grid.n2, v)
                } else {
                    gridops::dd1_axis2(&ops, grid.n1, v)
                };
                applied[col * dim..(col + 1) * dim].copy_from_slice(&dv);
            }
            let h2 = hbar * hbar;
            gram(eig, m, &applied)
                .iter()
                .map(|&x| Complex64::new(-h2 * x, 0.0))
                .collect()
        }
    };
    Ok(OperatorMatrix { kind, m, entries })
}

/// Everything the trace evaluation needs, shared read-only across times.
pub struct OtocInputs<'a> {
    pub theta: &'a OperatorMatrix,
    pub p: &'a OperatorMatrix,
    pub psq: &'a OperatorMatrix,
    pub eigenvalues: &'a [f64],
    pub hbar: f64,
}

impl OtocInputs<'_> {
    fn validate(&self) -> Result<usize, OtocError> {
        let m = self.theta.m;
        if self.p.m != m || self.psq.m != m {
            return Err(OtocError::BadArguments(
                "operator matrices have mismatched truncations".into(),
            ));
        }
        if self.eigenvalues.len() < m {
            return Err(OtocError::TruncationError {
                m,
                available: self.eigenvalues.len(),
            });
        }
        Ok(m)
    }
}

/// F, C series at one inverse temperature.
#[derive(Clone, Debug)]
pub struct OtocSeries {
    pub times: Vec<f64>,
    pub f: Vec<Complex64>,
    pub c: Vec<f64>,
    pub beta: f64,
    pub m: usize,
    /// Partition sum of the E_0-shifted weights actually used.
    pub z: f64,
    pub hbar: f64,
    /// Largest |Im| of the D trace seen across the series (hermiticity check).
    pub max_im_d: f64,
}

impl OtocSeries {
    /// CSV with columns t,ReF,ImF,C.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,ReF,ImF,C\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.times[i], self.f[i].re, self.f[i].im, self.c[i]
            ));
        }
        out
    }
}

struct TimeSlice {
    /// (F, D) per beta.
    per_beta: Vec<(Complex64, Complex64)>,
}

fn evaluate_time(
    t: f64,
    m: usize,
    theta: &OperatorMatrix,
    p: &OperatorMatrix,
    psq: &OperatorMatrix,
    evals: &[f64],
    weights: &[Vec<f64>],
) -> TimeSlice {
    let phases: Vec<Complex64> = evals[..m]
        .iter()
        .map(|e| Complex64::from_polar(1.0, e * t))
        .collect();

    // theta(t) = diag(d) theta diag(conj d), K(t) = diag(conj d) psq diag(d).
    let theta_t = Mat::from_fn(m, m, |n, k| theta.at(n, k) * phases[n] * phases[k].conj());
    let k_t = Mat::from_fn(m, m, |n, k| psq.at(n, k) * phases[n].conj() * phases[k]);
    let p_mat = Mat::from_fn(m, m, |n, k| p.at(n, k));
    let theta_0 = Mat::from_fn(m, m, |n, k| theta.at(n, k));

    let g = &theta_t * &p_mat;
    let a = &theta_0 * &k_t;

    let per_beta = weights
        .iter()
        .map(|wgt| {
            let z: f64 = wgt.iter().sum();
            let mut f = Complex64::default();
            let mut d = Complex64::default();
            for n in 0..m {
                let mut f_row = Complex64::default();
                let mut d_row = Complex64::default();
                for k in 0..m {
                    f_row += g[(n, k)] * g[(k, n)];
                    d_row += a[(n, k)] * theta.at(k, n);
                }
                f += f_row * wgt[n];
                d += d_row * wgt[n];
            }
            (f / z, d / z)
        })
        .collect();
    TimeSlice { per_beta }
}

fn assemble_series(
    inputs: &OtocInputs,
    betas: &[f64],
    times: &[f64],
    slices: Vec<TimeSlice>,
    weights: Vec<Vec<f64>>,
) -> Vec<OtocSeries> {
    let m = inputs.theta.m;
    betas
        .iter()
        .enumerate()
        .map(|(bi, &beta)| {
            let mut f = Vec::with_capacity(times.len());
            let mut c = Vec::with_capacity(times.len());
            let mut max_im_d = 0.0f64;
            for slice in &slices {
                let (fv, dv) = slice.per_beta[bi];
                max_im_d = max_im_d.max(dv.im.abs());
                f.push(fv);
                c.push(2.0 * (dv.re - fv.re));
            }
            OtocSeries {
                times: times.to_vec(),
                f,
                c,
                beta,
                m,
                z: weights[bi].iter().sum(),
                hbar: inputs.hbar,
                max_im_d,
            }
        })
        .collect()
}

fn thermal_weights(evals: &[f64], m: usize, betas: &[f64]) -> Vec<Vec<f64>> {
    let e0 = evals[0];
    betas
        .iter()
        .map(|beta| {
            evals[..m]
                .iter()
                .map(|e| (-beta * (e - e0)).exp())
                .collect()
        })
        .collect()
}

/// Evaluates the F and C series for several temperatures at once; the
/// phase-dressed matrix products are shared between temperatures and the
/// per-time evaluations run in parallel under the `parallel` feature.
pub fn otoc_series_multi(
    inputs: &OtocInputs,
    betas: &[f64],
    times: &[f64],
) -> Result<Vec<OtocSeries>, OtocError> {
    let m = inputs.validate()?;
    for &beta in betas {
        if !(beta > 0.0) {
            return Err(OtocError::BadArguments(format!(
                "beta must be positive, got {beta}"
            )));
        }
    }
    let weights = thermal_weights(inputs.eigenvalues, m, betas);

    #[cfg(feature = "parallel")]
    let slices: Vec<TimeSlice> = {
        use rayon::prelude::*;
        times
            .par_iter()
            .map(|&t| {
                evaluate_time(
                    t,
                    m,
                    inputs.theta,
                    inputs.p,
                    inputs.psq,
                    inputs.eigenvalues,
                    &weights,
                )
            })
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let slices: Vec<TimeSlice> = times
        .iter()
        .map(|&t| {
            evaluate_time(
                t,
                m,
                inputs.theta,
                inputs.p,
                inputs.psq,
                inputs.eigenvalues,
                &weights,
            )
        })
        .collect();

    Ok(assemble_series(inputs, betas, times, slices, weights))
}

/// Sequential twin of [`otoc_series_multi`].
pub fn otoc_series_multi_seq(
    inputs: &OtocInputs,
    betas: &[f64],
    times: &[f64],
) -> Result<Vec<OtocSeries>, OtocError> {
    let m = inputs.validate()?;
    for &beta in betas {
        if !(beta > 0.0) {
            return Err(OtocError::BadArguments(format!(
                "beta must be positive, got {beta}"
            )));
        }
    }
    let weights = thermal_weights(inputs.eigenvalues, m, betas);
    let slices: Vec<TimeSlice> = times
        .iter()
        .map(|&t| {
            evaluate_time(
                t,
                m,
                inputs.theta,
                inputs.p,
                inputs.psq,
                inputs.eigenvalues,
                &weights,
            )
        })
        .collect();
    Ok(assemble_series(inputs, betas, times, slices, weights))
}

/// Single-temperature convenience wrapper.
pub fn otoc_series(inputs: &OtocInputs, beta: f64, times: &[f64]) -> Result<OtocSeries, OtocError> {
    Ok(otoc_series_multi(inputs, &[beta], times)?
        .pop()
        .expect("one series"))
}

/// Which series the short-time template is fitted to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitTarget {
    ReF,
    C,
}

/// Parameters of a + b exp(lambda t) over the early-time window, plus the
/// bound bookkeeping.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct OtocFit {
    pub a: f64,
    pub b: f64,
    pub lambda_q: f64,
    pub window: (f64, f64),
    pub beta: f64,
    pub m: usize,
    /// 2 pi / (beta hbar).
    pub mss_bound: f64,
    pub saturation_ratio: f64,
}

impl OtocFit {
    pub fn to_json(&self) -> String {
        serde_json::json!({
            "a": self.a,
            "b": self.b,
            "lambda_q": self.lambda_q,
            "window": [self.window.0, self.window.1],
            "beta": self.beta,
            "M": self.m,
            "saturation_ratio": self.saturation_ratio,
        })
        .to_string()
    }
}

pub const DEFAULT_FIT_WINDOW: usize = 10;

/// Fits a + b exp(lambda t) to the first `window` samples of Re F or C.
pub fn fit_otoc_short_time(
    series: &OtocSeries,
    window: usize,
    target: FitTarget,
) -> Result<OtocFit, OtocError> {
    if window < 4 {
        return Err(OtocError::BadArguments(format!(
            "fit window must hold at least 4 samples, got {window}"
        )));
    }
    let take = window.min(series.times.len());
    let ts = &series.times[..take];
    let ys: Vec<f64> = match target {
        FitTarget::ReF => series.f[..take].iter().map(|z| z.re).collect(),
        FitTarget::C => series.c[..take].to_vec(),
    };
    let fit = fit::fit_exponential(ts, &ys)?;
    let bound = TAU / (series.beta * series.hbar);
    Ok(OtocFit {
        a: fit.a,
        b: fit.b,
        lambda_q: fit.lambda,
        window: (ts[0], ts[take - 1]),
        beta: series.beta,
        m: series.m,
        mss_bound: bound,
        saturation_ratio: fit.lambda / bound,
    })
}

/// Growth-exponent bound report; a ratio above one is flagged, never clamped.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MssReport {
    pub lambda_q: f64,
    pub bound: f64,
    pub ratio: f64,
    pub saturated: bool,
}

pub fn mss_report(fit: &OtocFit) -> MssReport {
    MssReport {
        lambda_q: fit.lambda_q,
        bound: fit.mss_bound,
        ratio: fit.saturation_ratio,
        saturated: fit.saturation_ratio >= 1.0,
    }
}
