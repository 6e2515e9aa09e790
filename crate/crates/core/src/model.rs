//! Physical parameter set and the closed-form coefficient functions of the
//! double rod pendulum Hamiltonian, shared by the classical and quantum
//! modules.
//!
//! Conventions: natural units (masses, rod lengths and the driving field `g`
//! are dimensionless), angles in radians wrapped to [-pi, pi), momenta
//! canonically conjugate to the rod angles. The Hamiltonian is
//!
//! ```text
//! H = p1^2/(2 I1) + p2^2/(2 I2) + p1 p2 / I12 + V(theta1, theta2)
//! ```
//!
//! with angle-dependent inertia coefficients I1, I2, I12. The cross
//! coefficient is stored as 1/I12 = -cos(d) / (l1 l2 (m1 + m2 sin^2 d)),
//! d = theta1 - theta2, which is smooth everywhere; the textbook sec(d) form
//! has a removable singularity at d = +-pi/2.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use std::f64::consts::{PI, TAU};

/// Full parameter set of the model. `hbar` only enters the quantum modules.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PendulumParams {
    pub m1: f64,
    pub m2: f64,
    pub l1: f64,
    pub l2: f64,
    /// Uniform driving field strength.
    pub g: f64,
    /// Planck constant in natural units.
    pub hbar: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("parameter {name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("field strength g must be non-negative, got {value}")]
    NegativeField { value: f64 },
    #[error("parameter {name} must be finite")]
    NotFinite { name: &'static str },
}

impl PendulumParams {
    /// All masses, lengths, g and hbar equal to one.
    pub fn unit() -> Self {
        Self {
            m1: 1.0,
            m2: 1.0,
            l1: 1.0,
            l2: 1.0,
            g: 1.0,
            hbar: 1.0,
        }
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let positive = [
            ("m1", self.m1),
            ("m2", self.m2),
            ("l1", self.l1),
            ("l2", self.l2),
            ("hbar", self.hbar),
        ];
        for (name, value) in positive {
            if !value.is_finite() {
                return Err(ParamError::NotFinite { name });
            }
            if value <= 0.0 {
                return Err(ParamError::NonPositive { name, value });
            }
        }
        if !self.g.is_finite() {
            return Err(ParamError::NotFinite { name: "g" });
        }
        if self.g < 0.0 {
            return Err(ParamError::NegativeField { value: self.g });
        }
        Ok(())
    }
}

/// Classical state (theta1, theta2, p1, p2) with angles wrapped to [-pi, pi).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState {
    pub theta1: f64,
    pub theta2: f64,
    pub p1: f64,
    pub p2: f64,
}

impl PhaseState {
    /// Builds a state with both angles wrapped.
    pub fn new(theta1: f64, theta2: f64, p1: f64, p2: f64) -> Self {
        Self {
            theta1: wrap_angle(theta1),
            theta2: wrap_angle(theta2),
            p1,
            p2,
        }
    }

    pub fn at_rest(theta1: f64, theta2: f64) -> Self {
        Self::new(theta1, theta2, 0.0, 0.0)
    }

    pub fn wrapped(self) -> Self {
        Self::new(self.theta1, self.theta2, self.p1, self.p2)
    }
}

/// Wraps an angle to [-pi, pi).
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = angle - TAU * ((angle + PI) / TAU).floor();
    // Rounding can land exactly on +pi; fold it back to the half-open side.
    if wrapped >= PI {
        wrapped - TAU
    } else if wrapped < -PI {
        wrapped + TAU
    } else {
        wrapped
    }
}

/// Inverse-inertia coefficients and potential at a fixed (theta1, theta2):
/// 1/(2 I1), 1/(2 I2), 1/I12, and V.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HamiltonianCoefficients {
    pub inv_2i1: f64,
    pub inv_2i2: f64,
    pub inv_i12: f64,
    pub potential: f64,
}

impl HamiltonianCoefficients {
    /// Kinetic energy of the given momenta under these coefficients.
    pub fn kinetic(&self, p1: f64, p2: f64) -> f64 {
        self.inv_2i1 * p1 * p1 + self.inv_2i2 * p2 * p2 + self.inv_i12 * p1 * p2
    }
}

/// Potential energy; zero at the stable equilibrium and 2 pi periodic in each
/// angle.
pub fn potential_energy(params: &PendulumParams, theta1: f64, theta2: f64) -> f64 {
    let s1 = (0.5 * theta1).sin();
    let s2 = (0.5 * theta2).sin();
    2.0 * params.m1 * params.g * params.l1 * s1 * s1
        + 2.0 * params.m2 * params.g * (params.l1 * s1 * s1 + params.l2 * s2 * s2)
}

/// Inverse-inertia coefficients 1/(2 I1), 1/(2 I2), 1/I12 plus the potential.
pub fn inertia_coefficients(
    params: &PendulumParams,
    theta1: f64,
    theta2: f64,
) -> HamiltonianCoefficients {
    let delta = theta1 - theta2;
    let sin_d = delta.sin();
    let cos_d = delta.cos();
    let w = params.m1 + params.m2 * sin_d * sin_d;
    let inv_2i1 = 1.0 / (2.0 * params.l1 * params.l1 * w);
    let inv_2i2 = (params.m1 + params.m2) / (2.0 * params.m2 * params.l2 * params.l2 * w);
    let inv_i12 = -cos_d / (params.l1 * params.l2 * w);
    HamiltonianCoefficients {
        inv_2i1,
        inv_2i2,
        inv_i12,
        potential: potential_energy(params, theta1, theta2),
    }
}

/// Total energy of a classical state.
pub fn hamiltonian_value(params: &PendulumParams, state: &PhaseState) -> f64 {
    let coeff = inertia_coefficients(params, state.theta1, state.theta2);
    coeff.kinetic(state.p1, state.p2) + coeff.potential
}

/// Angle derivatives of the coefficient functions, used by the classical
/// equations of motion. The inverse-inertia coefficients depend on the angles
/// only through d = theta1 - theta2, so a single d-derivative per coefficient
/// suffices; the potential gradient is given per angle.
#[derive(Clone, Copy, Debug)]
pub struct CoefficientDerivatives {
    /// d/dd of 1/(2 I1).
    pub d_inv_2i1: f64,
    /// d/dd of 1/(2 I2).
    pub d_inv_2i2: f64,
    /// d/dd of 1/I12.
    pub d_inv_i12: f64,
    pub dv_dtheta1: f64,
    pub dv_dtheta2: f64,
}

pub fn coefficient_derivatives(
    params: &PendulumParams,
    theta1: f64,
    theta2: f64,
) -> CoefficientDerivatives {
    let delta = theta1 - theta2;
    let sin_d = delta.sin();
    let cos_d = delta.cos();
    let sin_2d = 2.0 * sin_d * cos_d;
    let w = params.m1 + params.m2 * sin_d * sin_d;
    let dw = params.m2 * sin_2d;
    let l1 = params.l1;
    let l2 = params.l2;

    let d_inv_2i1 = -dw / (2.0 * l1 * l1 * w * w);
    let d_inv_2i2 = -(params.m1 + params.m2) * dw / (2.0 * params.m2 * l2 * l2 * w * w);
    let d_inv_i12 = (sin_d * w + cos_d * dw) / (l1 * l2 * w * w);

    let dv_dtheta1 = (params.m1 + params.m2) * params.g * l1 * theta1.sin();
    let dv_dtheta2 = params.m2 * params.g * l2 * theta2.sin();

    CoefficientDerivatives {
        d_inv_2i1,
        d_inv_2i2,
        d_inv_i12,
        dv_dtheta1,
        dv_dtheta2,
    }
}
