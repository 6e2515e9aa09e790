//! Classical dynamics: Hamilton's equations for the double rod pendulum,
//! adaptive Runge-Kutta 5(4) integration with dense output, trajectory
//! divergence, Lyapunov-exponent fits, scrambling times, and sweeps over the
//! field strength g.

use serde::Serialize;
use thiserror::Error;

use crate::fit;
use crate::model::{
    coefficient_derivatives, hamiltonian_value, inertia_coefficients, ParamError, PendulumParams,
    PhaseState,
};

use std::f64::consts::TAU;

const LN_10: f64 = std::f64::consts::LN_10;

#[derive(Debug, Error)]
pub enum ClassicalError {
    #[error("step controller failed near t={t}: step {step:.3e} below minimum")]
    StepFailure { t: f64, step: f64 },
    #[error(
        "energy drift {drift:.3e} exceeds tolerance {tol:.3e} at the tightest controller setting"
    )]
    DriftExceeded { drift: f64, tol: f64 },
    #[error("need at least {needed} positive divergence samples in the fit window, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("invalid arguments: {0}")]
    BadArguments(String),
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// Hamilton's equations (theta1', theta2', p1', p2') evaluated with analytic
/// angle derivatives of the inertia coefficients.
pub fn equations_of_motion(params: &PendulumParams, state: &PhaseState) -> [f64; 4] {
    eom_raw(params, &[state.theta1, state.theta2, state.p1, state.p2])
}

fn eom_raw(params: &PendulumParams, y: &[f64; 4]) -> [f64; 4] {
    let [t1, t2, p1, p2] = *y;
    let c = inertia_coefficients(params, t1, t2);
    let d = coefficient_derivatives(params, t1, t2);
    let kin_d = p1 * p1 * d.d_inv_2i1 + p2 * p2 * d.d_inv_2i2 + p1 * p2 * d.d_inv_i12;
    [
        2.0 * c.inv_2i1 * p1 + c.inv_i12 * p2,
        2.0 * c.inv_2i2 * p2 + c.inv_i12 * p1,
        -kin_d - d.dv_dtheta1,
        kin_d - d.dv_dtheta2,
    ]
}

/// Time-sampled classical evolution. Angles are stored wrapped to [-pi, pi)
/// with the removed winding numbers kept alongside, so the continuous lift is
/// recoverable exactly.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    /// Multiples of 2 pi removed from (theta1, theta2) when wrapping.
    pub winding: Vec<[i64; 2]>,
    pub energy: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// State with unwrapped (continuously lifted) angles.
    pub fn unwrapped(&self, i: usize) -> [f64; 4] {
        let s = &self.states[i];
        let w = self.winding[i];
        [
            s.theta1 + TAU * w[0] as f64,
            s.theta2 + TAU * w[1] as f64,
            s.p1,
            s.p2,
        ]
    }

    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.energy[0];
        let scale = e0.abs().max(1.0);
        self.energy
            .iter()
            .map(|e| (e - e0).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// CSV with columns t,theta1,theta2,p1,p2,energy.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,theta1,theta2,p1,p2,energy\n");
        for i in 0..self.len() {
            let s = &self.states[i];
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                self.times[i], s.theta1, s.theta2, s.p1, s.p2, self.energy[i]
            ));
        }
        out
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// b - b*: weights of the embedded error estimate.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
// Dense-output weights for the quartic interpolant.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

struct DenseStep<const N: usize> {
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    fn eval(&self, theta: f64) -> [f64; N] {
        let mut out = [0.0; N];
        let om = 1.0 - theta;
        for i in 0..N {
            out[i] = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + om * (self.rcont[2][i]
                            + theta * (self.rcont[3][i] + om * self.rcont[4][i])));
        }
        out
    }
}

/// One adaptive integration pass; calls `on_sample` at every multiple of
/// `sample_dt` in [0, t_max] (dense interpolation inside accepted steps).
fn integrate_adaptive<const N: usize>(
    f: &dyn Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    t_max: f64,
    sample_dt: f64,
    rtol: f64,
    atol: f64,
    on_sample: &mut dyn FnMut(f64, &[f64; N]),
) -> Result<(), ClassicalError> {
    let n_samples = (t_max / sample_dt + 1e-9).floor() as usize;
    on_sample(0.0, &y0);
    let mut next_sample = 1usize;

    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = (sample_dt * 0.1).min(t_max).max(1e-6);
    let min_step = 1e-12;

    let mut stages = [[0.0; N]; 7];
    while t < t_max {
        if h < min_step {
            return Err(ClassicalError::StepFailure { t, step: h });
        }
        if t + h > t_max {
            h = t_max - t;
        }

        stages[0] = k1;
        for s in 0..6 {
            let mut ys = y;
            for (j, row) in A[s].iter().enumerate().take(s + 1) {
                for i in 0..N {
                    ys[i] += h * row * stages[j][i];
                }
            }
            stages[s + 1] = f(t + C[s] * h, &ys);
        }
        // Fifth-order solution: the 6th stage row of A is the b vector (FSAL).
        let mut y1 = y;
        for (j, w) in A[5].iter().enumerate() {
            for i in 0..N {
                y1[i] += h * w * stages[j][i];
            }
        }
        stages[6] = f(t + h, &y1);

        let mut err_sq = 0.0;
        for i in 0..N {
            let mut e = 0.0;
            for (j, w) in E.iter().enumerate() {
                e += w * stages[j][i];
            }
            e *= h;
            let sc = atol + rtol * y[i].abs().max(y1[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / N as f64).sqrt();

        if err <= 1.0 {
            // Accepted: emit dense-output samples inside (t, t+h].
            let mut rcont = [[0.0; N]; 5];
            for i in 0..N {
                let ydiff = y1[i] - y[i];
                let bspl = h * stages[0][i] - ydiff;
                rcont[0][i] = y[i];
                rcont[1][i] = ydiff;
                rcont[2][i] = bspl;
                rcont[3][i] = ydiff - h * stages[6][i] - bspl;
                let mut dsum = 0.0;
                for (j, w) in D.iter().enumerate() {
                    dsum += w * stages[j][i];
                }
                rcont[4][i] = h * dsum;
            }
            let dense = DenseStep { rcont };
            while next_sample <= n_samples {
                let ts = next_sample as f64 * sample_dt;
                if ts > t + h + 1e-12 * t_max.max(1.0) {
                    break;
                }
                let theta = ((ts - t) / h).clamp(0.0, 1.0);
                let ys = dense.eval(theta);
                on_sample(ts, &ys);
                next_sample += 1;
            }

            t += h;
            y = y1;
            k1 = stages[6];
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            h *= factor;
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Ok(())
}

/// Integrates the pendulum from `initial` and samples at multiples of `dt`.
/// The relative energy drift over the run is bounded by `tol`; the step
/// controller is tightened and the run repeated if a pass misses that bound.
pub fn integrate(
    params: &PendulumParams,
    initial: &PhaseState,
    t_max: f64,
    dt: f64,
    tol: f64,
) -> Result<Trajectory, ClassicalError> {
    params.validate()?;
    if !(t_max > 0.0) || !(dt > 0.0) || !(tol > 0.0) {
        return Err(ClassicalError::BadArguments(
            "t_max, dt and tol must all be positive".into(),
        ));
    }

    let mut ctrl = tol * 1e-2;
    loop {
        let mut times = Vec::new();
        let mut states = Vec::new();
        let mut winding = Vec::new();
        let mut energy = Vec::new();
        let y0 = [initial.theta1, initial.theta2, initial.p1, initial.p2];
        integrate_adaptive(
            &|_, y| eom_raw(params, y),
            y0,
            t_max,
            dt,
            ctrl,
            ctrl,
            &mut |t, y| {
                let wrapped = PhaseState::new(y[0], y[1], y[2], y[3]);
                let w1 = ((y[0] - wrapped.theta1) / TAU).round() as i64;
                let w2 = ((y[1] - wrapped.theta2) / TAU).round() as i64;
                times.push(t);
                states.push(wrapped);
                winding.push([w1, w2]);
                energy.push(hamiltonian_value(params, &wrapped));
            },
        )?;
        let traj = Trajectory {
            times,
            states,
            winding,
            energy,
        };
        let drift = traj.max_energy_drift();
        if drift <= tol {
            return Ok(traj);
        }
        ctrl *= 1e-2;
        if ctrl < 1e-15 {
            return Err(ClassicalError::DriftExceeded { drift, tol });
        }
    }
}

/// Phase-space distance series between two runs integrated with identical
/// step sequences (a single joint system drives the controller).
#[derive(Clone, Debug)]
pub struct DivergenceSeries {
    pub times: Vec<f64>,
    /// sqrt(|dq|^2 + k^4 |dp|^2) on unwrapped angles.
    pub delta_std: Vec<f64>,
    /// Signed sqrt of the published difference-of-norms variant
    /// (|q_b|^2 + k^4 |p_b|^2) - (|q_a|^2 + k^4 |p_a|^2).
    pub delta_paper: Vec<f64>,
    pub k: f64,
}

impl DivergenceSeries {
    /// CSV with columns t,delta_omega_std,delta_omega_paper.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,delta_omega_std,delta_omega_paper\n");
        for i in 0..self.times.len() {
            out.push_str(&format!(
                "{},{},{}\n",
                self.times[i], self.delta_std[i], self.delta_paper[i]
            ));
        }
        out
    }
}

/// Default dimensional balancing constant 2 pi sqrt((l1 + l2) / g).
pub fn default_balancing_constant(params: &PendulumParams) -> f64 {
    TAU * ((params.l1 + params.l2) / params.g).sqrt()
}

pub fn divergence(
    params: &PendulumParams,
    ic_a: &PhaseState,
    ic_b: &PhaseState,
    k: Option<f64>,
    t_max: f64,
    dt: f64,
    tol: f64,
) -> Result<DivergenceSeries, ClassicalError> {
    params.validate()?;
    if !(t_max > 0.0) || !(dt > 0.0) || !(tol > 0.0) {
        return Err(ClassicalError::BadArguments(
            "t_max, dt and tol must all be positive".into(),
        ));
    }
    let k = match k {
        Some(k) if k > 0.0 => k,
        Some(k) => {
            return Err(ClassicalError::BadArguments(format!(
                "k must be positive, got {k}"
            )))
        }
        None => {
            if params.g <= 0.0 {
                return Err(ClassicalError::BadArguments(
                    "default balancing constant requires g > 0".into(),
                ));
            }
            default_balancing_constant(params)
        }
    };
    let k4 = k * k * k * k;

    let y0 = [
        ic_a.theta1,
        ic_a.theta2,
        ic_a.p1,
        ic_a.p2,
        ic_b.theta1,
        ic_b.theta2,
        ic_b.p1,
        ic_b.p2,
    ];
    let field = |_: f64, y: &[f64; 8]| -> [f64; 8] {
        let a = eom_raw(params, &[y[0], y[1], y[2], y[3]]);
        let b = eom_raw(params, &[y[4], y[5], y[6], y[7]]);
        [a[0], a[1], a[2], a[3], b[0], b[1], b[2], b[3]]
    };

    let mut times = Vec::new();
    let mut delta_std = Vec::new();
    let mut delta_paper = Vec::new();
    integrate_adaptive(
        &field,
        y0,
        t_max,
        dt,
        tol * 1e-2,
        tol * 1e-2,
        &mut |t, y| {
            let dq1 = y[4] - y[0];
            let dq2 = y[5] - y[1];
            let dp1 = y[6] - y[2];
            let dp2 = y[7] - y[3];
            let std_sq = dq1 * dq1 + dq2 * dq2 + k4 * (dp1 * dp1 + dp2 * dp2);
            let norm_a = y[0] * y[0] + y[1] * y[1] + k4 * (y[2] * y[2] + y[3] * y[3]);
            let norm_b = y[4] * y[4] + y[5] * y[5] + k4 * (y[6] * y[6] + y[7] * y[7]);
            let diff = norm_b - norm_a;
            times.push(t);
            delta_std.push(std_sq.sqrt());
            delta_paper.push(diff.signum() * diff.abs().sqrt());
        },
    )?;
    Ok(DivergenceSeries {
        times,
        delta_std,
        delta_paper,
        k,
    })
}

/// Window selection for the Lyapunov fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitWindow {
    /// Use every positive sample.
    Full,
    /// Use samples before the divergence first reaches 1.
    UntilOrderOne,
}

/// Linear fit of lg(delta) = a1 + a2 t together with the derived Lyapunov
/// exponent lambda = a2 ln 10 and the scrambling time.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct LyapunovFit {
    pub a1: f64,
    pub a2: f64,
    pub lambda: f64,
    /// First time delta reaches 1 (linear interpolation); absent if never.
    pub t_star: Option<f64>,
    pub window: (f64, f64),
    pub rms: f64,
}

pub fn fit_lyapunov(
    series: &DivergenceSeries,
    mode: FitWindow,
) -> Result<LyapunovFit, ClassicalError> {
    let mut ts = Vec::new();
    let mut lgs = Vec::new();
    for (t, d) in series.times.iter().zip(&series.delta_std) {
        if mode == FitWindow::UntilOrderOne && *d >= 1.0 {
            break;
        }
        if *d > 0.0 {
            ts.push(*t);
            lgs.push(d.log10());
        }
    }
    if ts.len() < 10 {
        return Err(ClassicalError::InsufficientData {
            needed: 10,
            got: ts.len(),
        });
    }
    let line = fit::fit_line(&ts, &lgs)
        .map_err(|e| ClassicalError::BadArguments(format!("lyapunov fit failed: {e}")))?;

    let mut t_star = None;
    for i in 0..series.times.len() {
        if series.delta_std[i] >= 1.0 {
            t_star = Some(if i == 0 {
                series.times[0]
            } else {
                let (t0, t1) = (series.times[i - 1], series.times[i]);
                let (d0, d1) = (series.delta_std[i - 1], series.delta_std[i]);
                t0 + (1.0 - d0) * (t1 - t0) / (d1 - d0)
            });
            break;
        }
    }

    Ok(LyapunovFit {
        a1: line.intercept,
        a2: line.slope,
        lambda: line.slope * LN_10,
        t_star,
        window: (ts[0], *ts.last().unwrap()),
        rms: line.rms,
    })
}

/// One row of a g-sweep; failed rows keep their error text so the sweep can
/// continue past them.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub g: f64,
    pub fit: Option<LyapunovFit>,
    pub error: Option<String>,
}

/// CSV with columns g,lambda,t_star,rms (failed rows are skipped).
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("g,lambda,t_star,rms\n");
    for row in rows {
        if let Some(fit) = &row.fit {
            let t_star = fit.t_star.map(|t| t.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.g, fit.lambda, t_star, fit.rms
            ));
        }
    }
    out
}

#[derive(Clone, Copy, Debug)]
pub struct SweepSettings {
    /// Balancing constant; `None` recomputes the default per g.
    pub k: Option<f64>,
    pub t_max: f64,
    pub dt: f64,
    pub tol: f64,
    pub mode: FitWindow,
}

fn sweep_row(
    template: &PendulumParams,
    g: f64,
    ic_a: &PhaseState,
    ic_b: &PhaseState,
    s: &SweepSettings,
) -> SweepRow {
    let params = template.with_g(g);
    let result = divergence(&params, ic_a, ic_b, s.k, s.t_max, s.dt, s.tol)
        .and_then(|series| fit_lyapunov(&series, s.mode));
    match result {
        Ok(fit) => SweepRow {
            g,
            fit: Some(fit),
            error: None,
        },
        Err(e) => SweepRow {
            g,
            fit: None,
            error: Some(e.to_string()),
        },
    }
}

/// Lyapunov exponent and scrambling time for each g, rows in input order.
/// Rows are independent and run in parallel under the `parallel` feature.
pub fn sweep_g(
    template: &PendulumParams,
    g_list: &[f64],
    ic_a: &PhaseState,
    ic_b: &PhaseState,
    settings: &SweepSettings,
) -> Vec<SweepRow> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        g_list
            .par_iter()
            .map(|&g| sweep_row(template, g, ic_a, ic_b, settings))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        sweep_g_seq(template, g_list, ic_a, ic_b, settings)
    }
}

/// Sequential twin of [`sweep_g`].
pub fn sweep_g_seq(
    template: &PendulumParams,
    g_list: &[f64],
    ic_a: &PhaseState,
    ic_b: &PhaseState,
    settings: &SweepSettings,
) -> Vec<SweepRow> {
    g_list
        .iter()
        .map(|&g| sweep_row(template, g, ic_a, ic_b, settings))
        .collect()
}

/// Reference initial-condition pair used throughout: q1 = 0.99 pi/2,
/// q2 = 0.99 pi at rest, and the same state with q2 shifted by 1e-6 pi.
pub fn reference_initial_pair() -> (PhaseState, PhaseState) {
    let q1 = 0.99 * std::f64::consts::PI / 2.0;
    let q2 = 0.99 * std::f64::consts::PI;
    let eps = 1e-6 * std::f64::consts::PI;
    (
        PhaseState::at_rest(q1, q2),
        PhaseState::at_rest(q1, q2 + eps),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::potential_energy;
    use crate::testutil::TestRng;
    use std::f64::consts::PI;

    fn unit() -> PendulumParams {
        PendulumParams::unit()
    }

    #[test]
    fn equilibria_have_zero_derivative() {
        let p = unit();
        for state in [PhaseState::at_rest(0.0, 0.0), PhaseState::at_rest(PI, PI)] {
            let dy = equations_of_motion(&p, &state);
            for v in dy {
                assert!(v.abs() < 1e-12, "nonzero derivative {v} at equilibrium");
            }
        }
    }

    #[test]
    fn eom_matches_hamiltonian_gradient() {
        let p = PendulumParams {
            m1: 1.4,
            m2: 0.6,
            l1: 1.1,
            l2: 0.9,
            g: 7.0,
            hbar: 1.0,
        };
        let mut rng = TestRng::new(3);
        let h = 1e-6;
        for _ in 0..100 {
            let s = PhaseState::new(
                rng.range(-2.0, 2.0),
                rng.range(-2.0, 2.0),
                rng.range(-3.0, 3.0),
                rng.range(-3.0, 3.0),
            );
            let dy = equations_of_motion(&p, &s);
            let diff = |i: usize, sign: f64| {
                let mut v = [s.theta1, s.theta2, s.p1, s.p2];
                v[i] += sign * h;
                hamiltonian_value(
                    &p,
                    &PhaseState {
                        theta1: v[0],
                        theta2: v[1],
                        p1: v[2],
                        p2: v[3],
                    },
                )
            };
            let dh = |i: usize| (diff(i, 1.0) - diff(i, -1.0)) / (2.0 * h);
            assert!((dy[0] - dh(2)).abs() < 1e-6);
            assert!((dy[1] - dh(3)).abs() < 1e-6);
            assert!((dy[2] + dh(0)).abs() < 1e-6);
            assert!((dy[3] + dh(1)).abs() < 1e-6);
        }
    }

    #[test]
    fn rest_at_origin_stays_at_rest() {
        let traj = integrate(&unit(), &PhaseState::at_rest(0.0, 0.0), 10.0, 0.5, 1e-8).unwrap();
        for s in &traj.states {
            assert!(s.theta1.abs() < 1e-12 && s.p2.abs() < 1e-12);
        }
        assert_eq!(traj.len(), 21);
    }

    #[test]
    fn energy_drift_bounded_on_chaotic_run() {
        let ic = PhaseState::at_rest(PI / 2.0, PI / 2.0);
        let traj = integrate(&unit(), &ic, 25.0, 0.05, 1e-8).unwrap();
        assert!(
            traj.max_energy_drift() < 1e-8,
            "drift {}",
            traj.max_energy_drift()
        );
    }

    #[test]
    fn free_system_conserves_energy_with_zero_potential() {
        let p = unit().with_g(0.0);
        let ic = PhaseState::new(0.3, -1.2, 0.8, -0.4);
        let traj = integrate(&p, &ic, 10.0, 0.1, 1e-8).unwrap();
        assert!(traj.max_energy_drift() < 1e-8);
        for s in &traj.states {
            assert!(potential_energy(&p, s.theta1, s.theta2).abs() < 1e-30);
        }
        // Momenta do evolve: the kinetic coupling depends on the angles.
        assert!((traj.states.last().unwrap().p1 - ic.p1).abs() > 1e-3);
    }

    #[test]
    fn time_reversal_returns_to_start() {
        let p = unit();
        let tol = 1e-10;
        let ic = PhaseState::at_rest(1.2, 2.4);
        let fwd = integrate(&p, &ic, 8.0, 8.0, tol).unwrap();
        let end = fwd.states.last().unwrap();
        let reversed = PhaseState {
            p1: -end.p1,
            p2: -end.p2,
            ..*end
        };
        let back = integrate(&p, &reversed, 8.0, 8.0, tol).unwrap();
        let final_state = back.states.last().unwrap();
        assert!((final_state.theta1 - ic.theta1).abs() < 100.0 * tol);
        assert!((final_state.theta2 - ic.theta2).abs() < 100.0 * tol);
        assert!((final_state.p1 + ic.p1).abs() < 100.0 * tol);
        assert!((final_state.p2 + ic.p2).abs() < 100.0 * tol);
    }

    #[test]
    fn integration_is_deterministic() {
        let ic = PhaseState::at_rest(1.0, 2.0);
        let a = integrate(&unit(), &ic, 5.0, 0.1, 1e-8).unwrap();
        let b = integrate(&unit(), &ic, 5.0, 0.1, 1e-8).unwrap();
        assert_eq!(a.states, b.states);
        assert_eq!(a.energy, b.energy);
    }

    #[test]
    fn identical_initial_conditions_give_zero_divergence() {
        let ic = PhaseState::at_rest(1.0, 2.0);
        let series = divergence(&unit(), &ic, &ic, Some(1.0), 5.0, 0.1, 1e-8).unwrap();
        for d in &series.delta_std {
            assert_eq!(*d, 0.0);
        }
    }

    #[test]
    fn reference_pair_diverges_and_fits_positive_lyapunov() {
        let (a, b) = reference_initial_pair();
        let series = divergence(&unit(), &a, &b, None, 40.0, 0.05, 1e-8).unwrap();
        assert!((series.delta_std[0] - 1e-6 * PI).abs() < 1e-12);
        let fit = fit_lyapunov(&series, FitWindow::UntilOrderOne).unwrap();
        assert!(fit.lambda > 0.0, "lambda = {}", fit.lambda);
        assert!(fit.t_star.is_some(), "divergence never reached order one");
    }

    #[test]
    fn small_oscillations_stay_bounded() {
        // Linearized regime: no sustained exponential growth; the distance
        // stays within a few times its initial value.
        let a = PhaseState::at_rest(1e-3, 1e-3);
        let b = PhaseState::at_rest(1e-3, 1e-3 + 1e-9);
        let series = divergence(&unit(), &a, &b, Some(1.0), 60.0, 0.1, 1e-9).unwrap();
        let d0 = series.delta_std[0];
        let max = series.delta_std.iter().cloned().fold(0.0, f64::max);
        assert!(max < 20.0 * d0, "max {max} vs initial {d0}");
    }

    #[test]
    fn synthetic_exponential_recovers_rate() {
        let times: Vec<f64> = (0..200).map(|i| 0.02 * i as f64).collect();
        let delta: Vec<f64> = times.iter().map(|t| 1e-6 * (2.0 * t).exp()).collect();
        let series = DivergenceSeries {
            times,
            delta_paper: delta.clone(),
            delta_std: delta,
            k: 1.0,
        };
        let fit = fit_lyapunov(&series, FitWindow::Full).unwrap();
        assert!((fit.lambda - 2.0).abs() < 1e-3, "lambda = {}", fit.lambda);
        assert!((fit.a2 - 2.0 / LN_10).abs() < 1e-3);
    }

    #[test]
    fn constant_series_has_flat_fit_and_no_t_star() {
        let times: Vec<f64> = (0..50).map(|i| 0.1 * i as f64).collect();
        let delta = vec![0.3; 50];
        let series = DivergenceSeries {
            times,
            delta_std: delta.clone(),
            delta_paper: delta,
            k: 1.0,
        };
        let fit = fit_lyapunov(&series, FitWindow::Full).unwrap();
        assert!(fit.a2.abs() < 1e-12);
        assert!(fit.t_star.is_none());
    }

    #[test]
    fn too_few_positive_samples_is_an_error() {
        let series = DivergenceSeries {
            times: vec![0.0, 1.0, 2.0],
            delta_std: vec![0.5, 0.6, 0.7],
            delta_paper: vec![0.5, 0.6, 0.7],
            k: 1.0,
        };
        assert!(matches!(
            fit_lyapunov(&series, FitWindow::Full),
            Err(ClassicalError::InsufficientData { .. })
        ));
    }

    #[test]
    fn halving_the_perturbation_halves_early_divergence() {
        let p = unit();
        let (a, _) = reference_initial_pair();
        let eps = 1e-8;
        let b1 = PhaseState::at_rest(a.theta1, a.theta2 + eps);
        let b2 = PhaseState::at_rest(a.theta1, a.theta2 + eps / 2.0);
        let s1 = divergence(&p, &a, &b1, Some(1.0), 6.0, 0.05, 1e-9).unwrap();
        let s2 = divergence(&p, &a, &b2, Some(1.0), 6.0, 0.05, 1e-9).unwrap();
        assert!((s2.delta_std[0] / s1.delta_std[0] - 0.5).abs() < 1e-9);
        for i in 0..s1.times.len() {
            if s1.delta_std[i] < 1e-3 && s1.delta_std[i] > 0.0 {
                let ratio = s2.delta_std[i] / s1.delta_std[i];
                assert!(
                    (0.4..=0.6).contains(&ratio),
                    "t={} ratio={ratio}",
                    s1.times[i]
                );
            }
        }
    }

    #[test]
    fn degenerate_sweep_matches_single_fit() {
        let (a, b) = reference_initial_pair();
        let settings = SweepSettings {
            k: None,
            t_max: 30.0,
            dt: 0.05,
            tol: 1e-8,
            mode: FitWindow::UntilOrderOne,
        };
        let rows = sweep_g_seq(&unit(), &[1.0], &a, &b, &settings);
        assert_eq!(rows.len(), 1);
        let row_fit = rows[0].fit.as_ref().expect("row failed");
        let series = divergence(&unit(), &a, &b, None, 30.0, 0.05, 1e-8).unwrap();
        let direct = fit_lyapunov(&series, FitWindow::UntilOrderOne).unwrap();
        assert!((row_fit.lambda - direct.lambda).abs() < 1e-12);
    }

    #[test]
    fn sweep_parallel_matches_sequential() {
        let (a, b) = reference_initial_pair();
        let settings = SweepSettings {
            k: None,
            t_max: 12.0,
            dt: 0.1,
            tol: 1e-7,
            mode: FitWindow::UntilOrderOne,
        };
        let gs = [1.0, 4.0];
        let par = sweep_g(&unit(), &gs, &a, &b, &settings);
        let seq = sweep_g_seq(&unit(), &gs, &a, &b, &settings);
        for (r1, r2) in par.iter().zip(&seq) {
            assert_eq!(r1.g, r2.g);
            let (f1, f2) = (r1.fit.as_ref().unwrap(), r2.fit.as_ref().unwrap());
            assert_eq!(f1.lambda, f2.lambda);
        }
    }

    #[test]
    fn csv_headers_match_contract() {
        let traj = integrate(&unit(), &PhaseState::at_rest(0.5, 0.5), 1.0, 0.5, 1e-8).unwrap();
        assert!(traj.to_csv().starts_with("t,theta1,theta2,p1,p2,energy\n"));
        let (a, b) = reference_initial_pair();
        let series = divergence(&unit(), &a, &b, None, 1.0, 0.5, 1e-8).unwrap();
        assert!(series
            .to_csv()
            .starts_with("t,delta_omega_std,delta_omega_paper\n"));
    }
}
