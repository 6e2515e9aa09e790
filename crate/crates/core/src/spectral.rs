//! Discrete quantum Hamiltonian on a uniform periodic 2-D angle grid:
//! trigonometric (Toeplitz) differentiation matrices, tensor-product
//! assembly, and the per-term symmetrization that keeps the matrix exactly
//! hermitian.
//!
//! The Hamiltonian is assembled as
//!
//! ```text
//! H = sym(F1, DD x I) + sym(F2, I x DD) + sym(F12, D x D) + diag(V)
//! sym(F, M) = (F M + M F) / 2
//! ```
//!
//! with diagonal coefficient matrices F1 = -hbar^2/(2 I1), F2 = -hbar^2/(2 I2),
//! F12 = -hbar^2/I12 sampled at the grid nodes. Every M above is symmetric
//! (the cross term is skew x skew), so H is symmetric entry by entry.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{inertia_coefficients, ParamError, PendulumParams};

use std::f64::consts::{PI, TAU};

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("grid needs at least 3 points per axis, got {0}")]
    GridTooSmall(usize),
    #[error("matrix of dimension {dim} needs {bytes} bytes, over the {budget} byte budget")]
    DimensionOverflow { dim: usize, bytes: u64, budget: u64 },
    #[error(transparent)]
    Param(#[from] ParamError),
}

/// Uniform periodic grid over [-pi, pi) x [-pi, pi), no duplicated endpoint.
/// Points are mirrored around zero so the parity map theta -> -theta is an
/// exact grid permutation.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Grid2D {
    pub n1: usize,
    pub n2: usize,
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
}

fn axis_points(n: usize) -> Vec<f64> {
    let h = TAU / n as f64;
    let mut pts = vec![0.0; n];
    pts[0] = -PI;
    for j in 1..=(n - 1) / 2 {
        let p = -PI + j as f64 * h;
        pts[j] = p;
        pts[n - j] = -p;
    }
    if n % 2 == 0 {
        pts[n / 2] = 0.0;
    }
    pts
}

impl Grid2D {
    pub fn new(n1: usize, n2: usize) -> Result<Self, SpectralError> {
        for n in [n1, n2] {
            if n < 3 {
                return Err(SpectralError::GridTooSmall(n));
            }
        }
        Ok(Self {
            n1,
            n2,
            theta1: axis_points(n1),
            theta2: axis_points(n2),
        })
    }

    pub fn square(n: usize) -> Result<Self, SpectralError> {
        Self::new(n, n)
    }

    pub fn dim(&self) -> usize {
        self.n1 * self.n2
    }

    /// Quadrature weight per grid node, (2 pi / n1)(2 pi / n2).
    pub fn weight(&self) -> f64 {
        (TAU / self.n1 as f64) * (TAU / self.n2 as f64)
    }

    /// Flat index of the node (i, j); theta2 varies fastest.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.n2 + j
    }

    pub fn point(&self, k: usize) -> (f64, f64) {
        (self.theta1[k / self.n2], self.theta2[k % self.n2])
    }

    /// Permutation sending each node to its image under
    /// (theta1, theta2) -> (-theta1, -theta2) mod 2 pi.
    pub fn parity_permutation(&self) -> Vec<usize> {
        let mirror = |idx: usize, n: usize| if idx == 0 { 0 } else { n - idx };
        let mut perm = vec![0usize; self.dim()];
        for i in 0..self.n1 {
            let mi = mirror(i, self.n1);
            for j in 0..self.n2 {
                perm[self.index(i, j)] = self.index(mi, mirror(j, self.n2));
            }
        }
        perm
    }
}

/// Choice of trigonometric stencil for the differentiation matrices.
///
/// `Standard` uses denominators n in the cotangent / squared-sine arguments,
/// which is exact for trigonometric polynomials sampled on this grid.
/// `Legacy` reproduces an off-by-one variant (denominators n + 1) that
/// circulates in print; it is kept selectable because its convergence
/// behaviour differs materially, and the two-resolution error estimate is
/// the arbiter between them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    #[default]
    Standard,
    Legacy,
}

/// First- and second-order differentiation matrices for one axis, dense n x n.
/// `d1` is exactly skew-symmetric and `dd1` exactly symmetric by construction.
#[derive(Clone, Debug)]
pub struct DiffOps {
    pub n: usize,
    pub stencil: Stencil,
    /// First derivative, row-major n x n.
    pub d1: Vec<f64>,
    /// Second derivative, row-major n x n.
    pub dd1: Vec<f64>,
}

impl DiffOps {
    pub fn d1_at(&self, i: usize, j: usize) -> f64 {
        self.d1[i * self.n + j]
    }

    pub fn dd1_at(&self, i: usize, j: usize) -> f64 {
        self.dd1[i * self.n + j]
    }

    /// Applies d1 to sampled values.
    pub fn apply_d1(&self, values: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.d1_at(i, j) * values[j]).sum())
            .collect()
    }

    pub fn apply_dd1(&self, values: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.dd1_at(i, j) * values[j]).sum())
            .collect()
    }
}

/// Builds the differentiation matrices with the default stencil.
pub fn build_diff_ops(n: usize) -> DiffOps {
    build_diff_ops_with(n, Stencil::Standard)
}

pub fn build_diff_ops_with(n: usize, stencil: Stencil) -> DiffOps {
    assert!(n >= 3, "differentiation matrices need n >= 3");
    let denom = match stencil {
        Stencil::Standard => n as f64,
        Stencil::Legacy => (n + 1) as f64,
    };
    // Toeplitz generators: entries depend on the offset m only. The
    // first-derivative generator is c_m = (-1)^m / 2 cot(m pi / denom),
    // placed with the orientation that maps sin samples to cos samples;
    // the second-derivative off-diagonals are -(-1)^m / (2 sin^2(m pi / denom)).
    let mut c = vec![0.0; n];
    let mut e = vec![0.0; n];
    for m in 1..n {
        let arg = m as f64 * PI / denom;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        c[m] = 0.5 * sign * (arg.cos() / arg.sin());
        e[m] = -sign / (2.0 * arg.sin() * arg.sin());
    }
    let diag2 = -(n as f64) * (n as f64) / 12.0 - 1.0 / 6.0;

    let mut d1 = vec![0.0; n * n];
    let mut dd1 = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                dd1[i * n + j] = diag2;
            } else if j > i {
                d1[i * n + j] = -c[j - i];
                dd1[i * n + j] = e[j - i];
            } else {
                d1[i * n + j] = c[i - j];
                dd1[i * n + j] = e[i - j];
            }
        }
    }
    DiffOps {
        n,
        stencil,
        d1,
        dd1,
    }
}

/// Dense symmetric discrete Hamiltonian with its grid metadata. Entries are
/// stored column-major; the matrix is symmetric, so the layout only changes
/// the memory walk, never the values.
#[derive(Clone, Debug)]
pub struct HamiltonianMatrix {
    pub dim: usize,
    /// Column-major dim x dim entries.
    pub entries: Vec<f64>,
    pub grid: Grid2D,
    pub params: PendulumParams,
    pub stencil: Stencil,
}

impl HamiltonianMatrix {
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.entries[col * self.dim + row]
    }

    /// Max |H - H^T| over all entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self.at(i, j) - self.at(j, i)).abs());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// y = H x.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        for col in 0..self.dim {
            let xv = x[col];
            if xv == 0.0 {
                continue;
            }
            let column = &self.entries[col * self.dim..(col + 1) * self.dim];
            for (yi, hij) in y.iter_mut().zip(column) {
                *yi += hij * xv;
            }
        }
        y
    }
}

/// Per-node coefficient samples entering the kinetic terms and the potential.
struct CoefficientTables {
    f1: Vec<f64>,
    f2: Vec<f64>,
    f12: Vec<f64>,
    v: Vec<f64>,
}

fn sample_coefficients(params: &PendulumParams, grid: &Grid2D) -> CoefficientTables {
    let dim = grid.dim();
    let h2 = params.hbar * params.hbar;
    let mut f1 = vec![0.0; dim];
    let mut f2 = vec![0.0; dim];
    let mut f12 = vec![0.0; dim];
    let mut v = vec![0.0; dim];
    for i in 0..grid.n1 {
        for j in 0..grid.n2 {
            let k = grid.index(i, j);
            let c = inertia_coefficients(params, grid.theta1[i], grid.theta2[j]);
            f1[k] = -h2 * c.inv_2i1;
            f2[k] = -h2 * c.inv_2i2;
            f12[k] = -h2 * c.inv_i12;
            v[k] = c.potential;
        }
    }
    CoefficientTables { f1, f2, f12, v }
}

/// Default memory budget for the dense Hamiltonian entries: 2 GiB.
pub const DEFAULT_MATRIX_BUDGET: u64 = 2 << 30;

fn fill_column(
    col: &mut [f64],
    l: usize,
    grid: &Grid2D,
    ops1: &DiffOps,
    ops2: &DiffOps,
    tab: &CoefficientTables,
) {
    let n2 = grid.n2;
    let (i2, j2) = (l / n2, l % n2);
    for (k, slot) in col.iter_mut().enumerate() {
        let (i1, j1) = (k / n2, k % n2);
        let mut value = 0.0;
        if j1 == j2 {
            value += 0.5 * (tab.f1[k] + tab.f1[l]) * ops1.dd1_at(i1, i2);
        }
        if i1 == i2 {
            value += 0.5 * (tab.f2[k] + tab.f2[l]) * ops2.dd1_at(j1, j2);
        }
        value += 0.5 * (tab.f12[k] + tab.f12[l]) * ops1.d1_at(i1, i2) * ops2.d1_at(j1, j2);
        if k == l {
            value += tab.v[k];
        }
        *slot = value;
    }
}

/// Assembles the symmetrized Hamiltonian with the default stencil and memory
/// budget. Columns fill in parallel under the `parallel` feature.
pub fn assemble_hamiltonian(
    params: &PendulumParams,
    grid: &Grid2D,
) -> Result<HamiltonianMatrix, SpectralError> {
    assemble_hamiltonian_with(params, grid, Stencil::Standard, DEFAULT_MATRIX_BUDGET)
}

pub fn assemble_hamiltonian_with(
    params: &PendulumParams,
    grid: &Grid2D,
    stencil: Stencil,
    budget_bytes: u64,
) -> Result<HamiltonianMatrix, SpectralError> {
    let tab = prepare(params, grid, budget_bytes)?;
    let ops1 = build_diff_ops_with(grid.n1, stencil);
    let ops2 = build_diff_ops_with(grid.n2, stencil);
    let dim = grid.dim();
    let mut entries = vec![0.0; dim * dim];

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        entries
            .par_chunks_mut(dim)
            .enumerate()
            .for_each(|(l, col)| fill_column(col, l, grid, &ops1, &ops2, &tab));
    }
    #[cfg(not(feature = "parallel"))]
    for (l, col) in entries.chunks_mut(dim).enumerate() {
        fill_column(col, l, grid, &ops1, &ops2, &tab);
    }

    Ok(HamiltonianMatrix {
        dim,
        entries,
        grid: grid.clone(),
        params: *params,
        stencil,
    })
}

/// Sequential twin of [`assemble_hamiltonian`].
pub fn assemble_hamiltonian_seq(
    params: &PendulumParams,
    grid: &Grid2D,
) -> Result<HamiltonianMatrix, SpectralError> {
    let tab = prepare(params, grid, DEFAULT_MATRIX_BUDGET)?;
    let ops1 = build_diff_ops(grid.n1);
    let ops2 = build_diff_ops(grid.n2);
    let dim = grid.dim();
    let mut entries = vec![0.0; dim * dim];
    for (l, col) in entries.chunks_mut(dim).enumerate() {
        fill_column(col, l, grid, &ops1, &ops2, &tab);
    }
    Ok(HamiltonianMatrix {
        dim,
        entries,
        grid: grid.clone(),
        params: *params,
        stencil: Stencil::Standard,
    })
}

fn prepare(
    params: &PendulumParams,
    grid: &Grid2D,
    budget_bytes: u64,
) -> Result<CoefficientTables, SpectralError> {
    params.validate()?;
    let dim = grid.dim();
    let bytes = (dim as u64) * (dim as u64) * 8;
    if bytes > budget_bytes {
        return Err(SpectralError::DimensionOverflow {
            dim,
            bytes,
            budget: budget_bytes,
        });
    }
    Ok(sample_coefficients(params, grid))
}
