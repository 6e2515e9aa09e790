//! Classical and quantum chaos diagnostics for the double rod pendulum.
//!
//! The crate quantizes the double rod pendulum on a uniform periodic grid with
//! trigonometric (Toeplitz) differentiation matrices, solves the resulting
//! dense symmetric eigenproblem with a two-resolution error estimate, and
//! evaluates three chaos diagnostics on top of the eigenpairs:
//!
//! - level-spacing statistics (NNSD / NNNSD) against GOE and Poisson templates,
//! - thermal out-of-time-order correlators F(t), C(t) with short-time
//!   exponential fits and the MSS bound check,
//! - covariance-matrix circuit complexity of the length-perturbed evolution.
//!
//! The classical side integrates Hamilton's equations with an adaptive
//! embedded Runge-Kutta 5(4) scheme, measures trajectory divergence, and fits
//! Lyapunov exponents and scrambling times.
//!
//! Data-parallel inner loops (sweeps, matrix assembly, per-time diagnostics)
//! run on rayon when the default `parallel` feature is enabled; every such
//! entry point also has a sequential twin (`*_seq`) used as the fallback and
//! by the comparison benches.

pub mod classical;
pub mod complexity;
pub mod eigen;
pub mod fit;
pub(crate) mod gridops;
pub mod levelstats;
pub mod model;
pub mod otoc;
pub mod spectral;

pub use model::{PendulumParams, PhaseState};

/// Lowest-level knob for the linear-algebra backend thread count.
///
/// `None` leaves the backend default (all cores when the `parallel` feature
/// is on, sequential otherwise).
pub fn configure_threads(threads: Option<usize>) {
    #[cfg(feature = "parallel")]
    {
        match threads {
            Some(1) => faer::set_global_parallelism(faer::Par::Seq),
            Some(n) => faer::set_global_parallelism(faer::Par::rayon(n)),
            None => {}
        }
        if let Some(n) = threads {
            // Ignore the error: the global pool can only be built once.
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global();
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = threads;
        faer::set_global_parallelism(faer::Par::Seq);
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    /// Deterministic 64-bit generator for test sampling (splitmix64).
    pub struct TestRng(u64);

    impl TestRng {
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

        /// Uniform in [0, 1).
        pub fn uniform(&mut self) -> f64 {
            (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
        }

        /// Uniform in [lo, hi).
        pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
            lo + (hi - lo) * self.uniform()
        }
    }
}
