//! Shared helpers for the integration suites: a deterministic RNG and the
//! independent physics oracles the tests check against.
//!
//! Compiled once per test binary; not every binary touches every helper.
#![allow(dead_code)]

use chaology_core::PendulumParams;

/// splitmix64; deterministic across platforms.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn gaussian(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Lagrangian-side mass matrix of the double rod pendulum.
pub fn mass_matrix(p: &PendulumParams, delta: f64) -> [[f64; 2]; 2] {
    let a = (p.m1 + p.m2) * p.l1 * p.l1;
    let b = p.m2 * p.l2 * p.l2;
    let c = p.m2 * p.l1 * p.l2 * delta.cos();
    [[a, c], [c, b]]
}

/// Inverse-inertia coefficients by explicit 2x2 inversion of the mass matrix.
pub fn inertia_oracle(p: &PendulumParams, theta1: f64, theta2: f64) -> (f64, f64, f64) {
    let m = mass_matrix(p, theta1 - theta2);
    let det = m[0][0] * m[1][1] - m[0][1] * m[0][1];
    (m[1][1] / det / 2.0, m[0][0] / det / 2.0, -m[0][1] / det)
}

/// Total energy through the Legendre transform: solve p = M qdot, evaluate
/// K(qdot) + V on the Lagrangian side.
pub fn hamiltonian_oracle(p: &PendulumParams, theta1: f64, theta2: f64, p1: f64, p2: f64) -> f64 {
    let m = mass_matrix(p, theta1 - theta2);
    let det = m[0][0] * m[1][1] - m[0][1] * m[0][1];
    let qd1 = (m[1][1] * p1 - m[0][1] * p2) / det;
    let qd2 = (m[0][0] * p2 - m[0][1] * p1) / det;
    let kinetic = 0.5 * (m[0][0] * qd1 * qd1 + 2.0 * m[0][1] * qd1 * qd2 + m[1][1] * qd2 * qd2);
    let s1 = (0.5 * theta1).sin();
    let s2 = (0.5 * theta2).sin();
    let potential =
        2.0 * p.m1 * p.g * p.l1 * s1 * s1 + 2.0 * p.m2 * p.g * (p.l1 * s1 * s1 + p.l2 * s2 * s2);
    kinetic + potential
}

/// Eigenvalues of a synthetic GOE matrix of the given size.
pub fn goe_spectrum(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = Rng::new(seed);
    let mut entries = vec![0.0f64; n * n];
    for i in 0..n {
        for j in i..n {
            let v = if i == j {
                rng.gaussian() * std::f64::consts::SQRT_2
            } else {
                rng.gaussian()
            };
            entries[j * n + i] = v;
            entries[i * n + j] = v;
        }
    }
    let mat = faer::MatRef::from_column_major_slice(&entries, n, n);
    let evd = mat
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("GOE eigensolve");
    let mut vals: Vec<f64> = (0..n).map(|i| evd.S()[i]).collect();
    vals.sort_by(f64::total_cmp);
    vals
}
