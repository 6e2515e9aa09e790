//! Run configuration: a single JSON file with strict key checking, overridden
//! field by field from command-line flags. The resolved configuration is
//! embedded in every run manifest.

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use chaology_core::spectral::Stencil;
use chaology_core::PendulumParams;

use std::f64::consts::PI;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Desk-scale grids (48 and 64 points per axis).
    Desk,
    /// Larger grids (141 and 173 points per axis); slow and memory hungry.
    Paper,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub params: PendulumParams,
    /// Coarse and fine grid points per axis for the two-resolution estimate.
    pub grids: GridPair,
    pub stencil: Stencil,
    /// Memory budget for one dense Hamiltonian, in bytes.
    pub budget_bytes: u64,
    pub classical: ClassicalConfig,
    pub stats: StatsConfig,
    pub otoc: OtocConfig,
    pub cc: CcConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            params: PendulumParams::unit(),
            grids: GridPair::default(),
            stencil: Stencil::Standard,
            budget_bytes: chaology_core::spectral::DEFAULT_MATRIX_BUDGET,
            classical: ClassicalConfig::default(),
            stats: StatsConfig::default(),
            otoc: OtocConfig::default(),
            cc: CcConfig::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridPair {
    pub coarse: usize,
    pub fine: usize,
}

impl Default for GridPair {
    fn default() -> Self {
        Self {
            coarse: 48,
            fine: 64,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassicalConfig {
    pub t_max: f64,
    pub dt: f64,
    pub tol: f64,
    /// Balancing constant; null selects 2 pi sqrt((l1+l2)/g).
    pub k: Option<f64>,
    /// Reference initial conditions and perturbation.
    pub q1: f64,
    pub q2: f64,
    pub epsilon: f64,
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self {
            t_max: 40.0,
            dt: 0.05,
            tol: 1e-8,
            k: None,
            q1: 0.99 * PI / 2.0,
            q2: 0.99 * PI,
            epsilon: 1e-6 * PI,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingChoice {
    /// Raw spacings against the printed template pair (Poisson renormalized).
    PaperHandFit,
    /// Unit-mean spacings against the unit-mean template pair.
    UnitMean,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatsConfig {
    pub bins: usize,
    pub scaling: ScalingChoice,
    /// Largest level index used; null takes the two-resolution reliable count
    /// (falling back to the 1e-3 count when the strict one is too short).
    pub window: Option<usize>,
    /// Unfolding degree; null analyses raw eigenvalues.
    pub unfold_degree: Option<usize>,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            bins: chaology_core::levelstats::DEFAULT_BINS,
            scaling: ScalingChoice::PaperHandFit,
            window: None,
            unfold_degree: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OtocConfig {
    /// Truncation; null selects min(2000, reliable count).
    pub m: Option<usize>,
    /// Temperatures as exponents k meaning 2 pi / beta = 2^k pi.
    pub beta_exponents: Vec<u32>,
    pub long_t_max: f64,
    pub long_samples: usize,
    pub short_dt: f64,
    pub short_samples: usize,
    pub fit_window: usize,
    /// Which pendulum angle/momentum pair the correlators use.
    pub axis: u8,
}

impl Default for OtocConfig {
    fn default() -> Self {
        Self {
            m: None,
            beta_exponents: vec![4, 5, 6, 7, 8],
            long_t_max: 200.0,
            long_samples: 101,
            short_dt: 0.1,
            short_samples: 12,
            fit_window: chaology_core::otoc::DEFAULT_FIT_WINDOW,
            axis: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CcConfig {
    pub epsilon: f64,
    pub g_list: Vec<f64>,
    pub t_max: f64,
    pub samples: usize,
    pub ell_eff: Option<f64>,
    pub k: Option<f64>,
    /// Grid points per axis; null uses the coarse grid.
    pub grid: Option<usize>,
}

impl Default for CcConfig {
    fn default() -> Self {
        Self {
            epsilon: 1e-6,
            g_list: vec![10.0, 40.0, 90.0],
            t_max: 40.0,
            samples: 301,
            ell_eff: None,
            k: None,
            grid: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>, profile: Profile) -> Result<Self> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config {}", p.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config {}", p.display()))?
            }
            None => RunConfig::default(),
        };
        if profile == Profile::Paper {
            config.grids = GridPair {
                coarse: 141,
                fine: 173,
            };
            // A 173^2 Hamiltonian holds ~7.2e9 bytes of f64 entries.
            config.budget_bytes = config.budget_bytes.max(8 << 30);
        }
        config.params.validate()?;
        Ok(config)
    }

    /// Inverse temperatures from the configured exponents: beta = 2^(1-k).
    pub fn betas(&self) -> Vec<f64> {
        self.otoc
            .beta_exponents
            .iter()
            .map(|k| 2.0f64.powi(1 - *k as i32))
            .collect()
    }
}
