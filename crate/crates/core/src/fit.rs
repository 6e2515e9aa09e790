//! Small least-squares toolbox shared by the diagnostic modules: straight
//! lines with residual statistics, scaled polynomial fits, and the
//! three-parameter exponential template a + b exp(lambda t).

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("design matrix is rank deficient")]
    Degenerate,
    #[error("exponential fit did not converge: {reason}")]
    NoConvergence { reason: String },
}

/// Least-squares line y = intercept + slope x with residual diagnostics.
#[derive(Clone, Copy, Debug)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual.
    pub rms: f64,
    /// Coefficient of determination.
    pub r2: f64,
    /// Standard error of the slope estimate.
    pub slope_stderr: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit, FitError> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return Err(FitError::TooFewSamples {
            needed: 2,
            got: n.min(ys.len()),
        });
    }
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= 0.0 {
        return Err(FitError::Degenerate);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let r = y - (intercept + slope * x);
        ss_res += r * r;
    }
    let rms = (ss_res / nf).sqrt();
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let slope_stderr = if n > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        f64::INFINITY
    };
    Ok(LineFit {
        slope,
        intercept,
        rms,
        r2,
        slope_stderr,
    })
}

/// Polynomial fitted in a shifted/scaled variable for conditioning.
#[derive(Clone, Debug)]
pub struct Polynomial {
    /// Coefficients in the scaled variable u = (x - mid) / half_range,
    /// lowest degree first.
    pub coeffs: Vec<f64>,
    pub mid: f64,
    pub half_range: f64,
}

impl Polynomial {
    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.mid) / self.half_range;
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * u + c;
        }
        acc
    }
}

/// Degree-d least-squares polynomial through (xs, ys), solved by normal
/// equations with Cholesky on the scaled variable.
pub fn fit_polynomial(xs: &[f64], ys: &[f64], degree: usize) -> Result<Polynomial, FitError> {
    let n = xs.len();
    if n < degree + 1 || ys.len() != n {
        return Err(FitError::TooFewSamples {
            needed: degree + 1,
            got: n.min(ys.len()),
        });
    }
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    let half_range = (0.5 * (hi - lo)).max(f64::MIN_POSITIVE);
    if hi <= lo {
        return Err(FitError::Degenerate);
    }

    let m = degree + 1;
    // Normal equations A^T A c = A^T y with A the scaled Vandermonde matrix.
    let mut ata = vec![0.0; m * m];
    let mut aty = vec![0.0; m];
    let mut powers = vec![0.0; m];
    for (x, y) in xs.iter().zip(ys) {
        let u = (x - mid) / half_range;
        let mut p = 1.0;
        for slot in powers.iter_mut() {
            *slot = p;
            p *= u;
        }
        for i in 0..m {
            aty[i] += powers[i] * y;
            for j in 0..m {
                ata[i * m + j] += powers[i] * powers[j];
            }
        }
    }

    let coeffs = cholesky_solve(&mut ata, &mut aty, m)?;
    Ok(Polynomial {
        coeffs,
        mid,
        half_range,
    })
}

fn cholesky_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Result<Vec<f64>, FitError> {
    // In-place LL^T factorization of the symmetric positive definite system.
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if d <= 1e-12 * a[j * n + j].abs().max(1.0) {
            return Err(FitError::Degenerate);
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    Ok(b.to_vec())
}

/// Three-parameter exponential fit y = a + b exp(lambda t).
#[derive(Clone, Copy, Debug)]
pub struct ExponentialFit {
    pub a: f64,
    pub b: f64,
    pub lambda: f64,
    /// Sum of squared residuals at the optimum.
    pub sse: f64,
}

/// Fits a + b exp(lambda t) by variable projection: for each trial lambda the
/// optimal (a, b) follow from a 2x2 linear solve, so only lambda is searched
/// (coarse log-spaced scan plus golden-section refinement).
pub fn fit_exponential(ts: &[f64], ys: &[f64]) -> Result<ExponentialFit, FitError> {
    let n = ts.len();
    if n < 4 || ys.len() != n {
        return Err(FitError::TooFewSamples {
            needed: 4,
            got: n.min(ys.len()),
        });
    }
    let spread = {
        let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let scale = ys.iter().fold(0.0f64, |m, y| m.max(y.abs())).max(1e-300);
    if spread <= 1e-12 * scale {
        return Err(FitError::NoConvergence {
            reason: "window is flat".into(),
        });
    }
    let t_span = ts.last().unwrap() - ts[0];
    if !(t_span > 0.0) {
        return Err(FitError::Degenerate);
    }

    // Profiled SSE as a function of lambda.
    let sse_at = |lambda: f64| -> (f64, f64, f64) {
        let mut s_ee = 0.0;
        let mut s_e = 0.0;
        let mut s_ey = 0.0;
        let mut s_y = 0.0;
        for (t, y) in ts.iter().zip(ys) {
            let e = (lambda * (t - ts[0])).exp();
            s_ee += e * e;
            s_e += e;
            s_ey += e * y;
            s_y += y;
        }
        let nf = n as f64;
        let det = nf * s_ee - s_e * s_e;
        if det.abs() < 1e-300 {
            return (f64::INFINITY, 0.0, 0.0);
        }
        let b = (nf * s_ey - s_e * s_y) / det;
        let a = (s_y - b * s_e) / nf;
        let mut sse = 0.0;
        for (t, y) in ts.iter().zip(ys) {
            let r = y - (a + b * (lambda * (t - ts[0])).exp());
            sse += r * r;
        }
        (sse, a, b)
    };

    // Coarse scan over both signs of lambda; rates beyond ~700/t_span overflow.
    let max_rate = 600.0 / t_span;
    let mut best = (f64::INFINITY, 0.0);
    let steps = 240;
    for sign in [1.0, -1.0] {
        for i in 0..steps {
            let mag = 1e-4 * (max_rate / 1e-4).powf(i as f64 / (steps - 1) as f64);
            let lambda = sign * mag;
            let (sse, _, _) = sse_at(lambda);
            if sse < best.0 {
                best = (sse, lambda);
            }
        }
    }
    if !best.0.is_finite() {
        return Err(FitError::NoConvergence {
            reason: "no usable rate found".into(),
        });
    }

    // Golden-section refinement around the best coarse rate.
    let mut lo = best.1 / 4.0;
    let mut hi = best.1 * 4.0;
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let phi = 0.618_033_988_749_894_9;
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = sse_at(x1).0;
    let mut f2 = sse_at(x2).0;
    for _ in 0..200 {
        if (hi - lo).abs() <= 1e-14 * hi.abs().max(1.0) {
            break;
        }
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = sse_at(x1).0;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = sse_at(x2).0;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let (sse, a_shift, b_shift) = sse_at(lambda);
    if !sse.is_finite() {
        return Err(FitError::NoConvergence {
            reason: "refinement diverged".into(),
        });
    }
    // The profile used exp(lambda (t - t0)); undo the shift.
    let b = b_shift * (-lambda * ts[0]).exp();
    Ok(ExponentialFit {
        a: a_shift,
        b,
        lambda,
        sse,
    })
}
