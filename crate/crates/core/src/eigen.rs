//! Dense symmetric eigensolve for the discrete Hamiltonian, two-resolution
//! eigenvalue error estimation, the high-level linear spectrum fit, and a
//! checksummed on-disk cache for eigenpairs.
//!
//! Eigenvectors are normalized against the grid quadrature weight,
//! sum_k psi(k)^2 w = 1, and oriented deterministically: eigenvalue clusters
//! closer than 1e-10 are re-spanned by parity-projected vectors and every
//! vector's largest-magnitude component is made positive, so repeated solves
//! give bit-identical matrix elements downstream.

use faer::MatRef;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fit;
use crate::model::PendulumParams;
use crate::spectral::{Grid2D, HamiltonianMatrix, Stencil};

use std::io::{Read, Write};
use std::path::Path;
use std::sync::OnceLock;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("symmetric eigensolver failed to converge: {0}")]
    ConvergenceFailure(String),
    #[error("decompositions come from different physical parameters")]
    ParamMismatch,
    #[error("level {n_hi} out of range, only {available} levels available")]
    RangeError { n_hi: usize, available: usize },
    #[error("cache file has wrong magic bytes")]
    BadMagic,
    #[error("cache file version {found} unsupported (expected {expected})")]
    VersionMismatch { found: u32, expected: u32 },
    #[error("cache payload checksum mismatch")]
    ChecksumMismatch,
    #[error("cache file truncated")]
    TruncatedFile,
    #[error("cache header malformed: {0}")]
    MalformedHeader(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// How many eigenpairs to retain from a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Retain {
    All,
    Lowest(usize),
}

/// Sorted eigenvalues with grid-sampled eigenvectors and provenance.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    /// Ascending eigenvalues, one per retained level.
    pub eigenvalues: Vec<f64>,
    /// Column-major dim x count eigenvector table, weight-normalized.
    pub eigenvectors: Vec<f64>,
    pub dim: usize,
    pub grid: Grid2D,
    pub params: PendulumParams,
    pub stencil: Stencil,
}

impl EigenDecomposition {
    pub fn count(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Grid samples of the n-th eigenvector.
    pub fn vector(&self, n: usize) -> &[f64] {
        &self.eigenvectors[n * self.dim..(n + 1) * self.dim]
    }

    /// Weighted inner product of two grid vectors.
    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let w = self.grid.weight();
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() * w
    }
}

fn symmetric_eigen_raw(entries: &[f64], dim: usize) -> Result<(Vec<f64>, Vec<f64>), EigenError> {
    let mat = MatRef::from_column_major_slice(entries, dim, dim);
    let evd = mat
        .self_adjoint_eigen(faer::Side::Lower)
        .map_err(|e| EigenError::ConvergenceFailure(format!("{e:?}")))?;
    let s = evd.S();
    let u = evd.U();

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| s[i]).collect();
    let mut eigenvectors = vec![0.0; dim * dim];
    for (col, &src) in order.iter().enumerate() {
        let dst = &mut eigenvectors[col * dim..(col + 1) * dim];
        for (row, slot) in dst.iter_mut().enumerate() {
            *slot = u[(row, src)];
        }
    }
    Ok((eigenvalues, eigenvectors))
}

/// Absolute eigenvalue gap below which levels are treated as one degenerate
/// cluster, both for the deterministic re-orientation and for spacing
/// analyses. Tunneling doublets in the rotor regime split far below f64
/// resolution, so exact ties do occur in practice.
pub const DEGENERACY_GAP: f64 = 1e-10;

fn orient_deterministically(
    eigenvalues: &[f64],
    eigenvectors: &mut [f64],
    dim: usize,
    parity: &[usize],
) {
    let count = eigenvalues.len();
    let mut start = 0;
    while start < count {
        let mut end = start + 1;
        while end < count && eigenvalues[end] - eigenvalues[end - 1] < DEGENERACY_GAP {
            end += 1;
        }
        if end - start > 1 {
            respan_cluster(&mut eigenvectors[start * dim..end * dim], dim, parity);
        }
        start = end;
    }
    for n in 0..count {
        let v = &mut eigenvectors[n * dim..(n + 1) * dim];
        let mut best = 0;
        for (i, x) in v.iter().enumerate() {
            if x.abs() > v[best].abs() {
                best = i;
            }
        }
        if v[best] < 0.0 {
            for x in v.iter_mut() {
                *x = -*x;
            }
        }
    }
}

/// Rebuilds an orthonormal basis of a degenerate cluster from parity-projected
/// candidates (even projections first), so the spanning vectors do not depend
/// on solver round-off details.
fn respan_cluster(cluster: &mut [f64], dim: usize, parity: &[usize]) {
    let size = cluster.len() / dim;
    let mut candidates: Vec<Vec<f64>> = Vec::with_capacity(2 * size);
    for sign in [1.0, -1.0] {
        for c in 0..size {
            let v = &cluster[c * dim..(c + 1) * dim];
            let proj: Vec<f64> = (0..dim)
                .map(|i| 0.5 * (v[i] + sign * v[parity[i]]))
                .collect();
            candidates.push(proj);
        }
    }

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(size);
    for mut cand in candidates {
        if basis.len() == size {
            break;
        }
        for b in &basis {
            let dot: f64 = cand.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in cand.iter_mut().zip(b) {
                *x -= dot * y;
            }
        }
        let norm = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            for x in cand.iter_mut() {
                *x /= norm;
            }
            basis.push(cand);
        }
    }
    if basis.len() == size {
        for (c, b) in basis.into_iter().enumerate() {
            cluster[c * dim..(c + 1) * dim].copy_from_slice(&b);
        }
    }
    // If the parity projections fail to span (not seen in practice) the
    // solver's own orthonormal basis is kept.
}

/// Solves the symmetric eigenproblem; eigenvalues ascending, eigenvectors
/// weight-normalized and deterministically oriented.
pub fn solve(h: &HamiltonianMatrix, retain: Retain) -> Result<EigenDecomposition, EigenError> {
    let dim = h.dim;
    let (mut eigenvalues, mut eigenvectors) = symmetric_eigen_raw(&h.entries, dim)?;

    let parity = h.grid.parity_permutation();
    orient_deterministically(&eigenvalues, &mut eigenvectors, dim, &parity);

    let inv_sqrt_w = 1.0 / h.grid.weight().sqrt();
    for x in eigenvectors.iter_mut() {
        *x *= inv_sqrt_w;
    }

    if let Retain::Lowest(k) = retain {
        let k = k.min(dim);
        eigenvalues.truncate(k);
        eigenvectors.truncate(k * dim);
    }

    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        dim,
        grid: h.grid.clone(),
        params: h.params,
        stencil: h.stencil,
    })
}

/// Per-level two-resolution error ratio |E_a - E_b| / (E_a + E_b).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ErrorEstimate {
    pub level: usize,
    pub ratio: f64,
}

/// Default reliability threshold on the difference-over-sum ratio.
pub const RELIABLE_RATIO: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub estimates: Vec<ErrorEstimate>,
    /// Number of leading levels whose ratio stays at or below
    /// [`RELIABLE_RATIO`].
    pub reliable_count: usize,
}

impl ErrorReport {
    /// Leading levels with ratio at or below an arbitrary threshold.
    pub fn reliable_count_at(&self, threshold: f64) -> usize {
        self.estimates
            .iter()
            .position(|e| e.ratio > threshold)
            .unwrap_or(self.estimates.len())
    }
}

/// Compares two decompositions of the same physics at different resolutions.
pub fn estimate_errors(
    a: &EigenDecomposition,
    b: &EigenDecomposition,
) -> Result<ErrorReport, EigenError> {
    if a.params != b.params {
        return Err(EigenError::ParamMismatch);
    }
    let n = a.count().min(b.count());
    let estimates: Vec<ErrorEstimate> = (0..n)
        .map(|level| {
            let ea = a.eigenvalues[level];
            let eb = b.eigenvalues[level];
            let denom = (ea + eb).abs().max(f64::MIN_POSITIVE);
            ErrorEstimate {
                level,
                ratio: (ea - eb).abs() / denom,
            }
        })
        .collect();
    let report = ErrorReport {
        estimates,
        reliable_count: 0,
    };
    let reliable_count = report.reliable_count_at(RELIABLE_RATIO);
    Ok(ErrorReport {
        reliable_count,
        ..report
    })
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LinearSpectrumFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms: f64,
}

/// Least-squares line through the levels [n_lo, n_hi] of the spectrum.
pub fn fit_linear_spectrum(
    eig: &EigenDecomposition,
    n_lo: usize,
    n_hi: usize,
) -> Result<LinearSpectrumFit, EigenError> {
    if n_hi >= eig.count() || n_lo + 1 >= n_hi {
        return Err(EigenError::RangeError {
            n_hi,
            available: eig.count(),
        });
    }
    let ns: Vec<f64> = (n_lo..=n_hi).map(|n| n as f64).collect();
    let es = &eig.eigenvalues[n_lo..=n_hi];
    let line = fit::fit_line(&ns, es)
        .map_err(|e| EigenError::MalformedHeader(format!("degenerate fit input: {e}")))?;
    Ok(LinearSpectrumFit {
        slope: line.slope,
        intercept: line.intercept,
        rms: line.rms,
    })
}

/// CSV with columns n,E_n,error_ratio (ratio column empty without a report).
pub fn eigenvalue_csv(eig: &EigenDecomposition, report: Option<&ErrorReport>) -> String {
    let mut out = String::from("n,E_n,error_ratio\n");
    for (n, e) in eig.eigenvalues.iter().enumerate() {
        let ratio = report
            .and_then(|r| r.estimates.get(n))
            .map(|e| e.ratio.to_string())
            .unwrap_or_default();
        out.push_str(&format!("{n},{e},{ratio}\n"));
    }
    out
}

// ---------------------------------------------------------------------------
// On-disk cache
// ---------------------------------------------------------------------------

const CACHE_MAGIC: &[u8; 4] = b"DPND";
const CACHE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CacheHeader {
    params: PendulumParams,
    grid: CacheGrid,
    hbar: f64,
    count: u64,
    dim: u64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CacheGrid {
    n1: u64,
    n2: u64,
}

/// CRC-64 (reflected ECMA-182 polynomial) over the binary payload.
pub fn crc64(bytes: &[u8]) -> u64 {
    const POLY: u64 = 0xC96C_5795_D787_0F42;
    static TABLE: OnceLock<[u64; 256]> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = [0u64; 256];
        for (i, slot) in t.iter_mut().enumerate() {
            let mut crc = i as u64;
            for _ in 0..8 {
                crc = if crc & 1 == 1 {
                    (crc >> 1) ^ POLY
                } else {
                    crc >> 1
                };
            }
            *slot = crc;
        }
        t
    });
    let mut crc = !0u64;
    for &b in bytes {
        crc = table[((crc ^ b as u64) & 0xff) as usize] ^ (crc >> 8);
    }
    !crc
}

/// Serializes a decomposition: magic "DPND", u32 version, u64 header length,
/// JSON header, eigenvalues (f64 LE), eigenvectors (f64 LE, column-major),
/// then a CRC-64 of the two binary arrays. All integers little-endian.
pub fn cache_bytes(eig: &EigenDecomposition) -> Vec<u8> {
    let header = CacheHeader {
        params: eig.params,
        grid: CacheGrid {
            n1: eig.grid.n1 as u64,
            n2: eig.grid.n2 as u64,
        },
        hbar: eig.params.hbar,
        count: eig.count() as u64,
        dim: eig.dim as u64,
    };
    let header_json = serde_json::to_vec(&header).expect("header serializes");

    let mut payload = Vec::with_capacity(8 * (eig.count() + eig.eigenvectors.len()));
    for v in &eig.eigenvalues {
        payload.extend_from_slice(&v.to_le_bytes());
    }
    for v in &eig.eigenvectors {
        payload.extend_from_slice(&v.to_le_bytes());
    }

    let mut out = Vec::with_capacity(16 + header_json.len() + payload.len() + 8);
    out.extend_from_slice(CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&(header_json.len() as u64).to_le_bytes());
    out.extend_from_slice(&header_json);
    out.extend_from_slice(&payload);
    out.extend_from_slice(&crc64(&payload).to_le_bytes());
    out
}

/// Writes the cache atomically: temp file in the same directory, then rename.
pub fn save_cache(eig: &EigenDecomposition, path: &Path) -> Result<(), EigenError> {
    let bytes = cache_bytes(eig);
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    {
        let mut file = std::fs::File::create(&tmp)?;
        file.write_all(&bytes)?;
        file.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_cache(path: &Path) -> Result<EigenDecomposition, EigenError> {
    let mut file = std::fs::File::open(path)?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes)?;
    decode_cache(&bytes)
}

pub fn decode_cache(bytes: &[u8]) -> Result<EigenDecomposition, EigenError> {
    let take = |offset: usize, len: usize| -> Result<&[u8], EigenError> {
        bytes
            .get(offset..offset + len)
            .ok_or(EigenError::TruncatedFile)
    };

    if take(0, 4)? != CACHE_MAGIC {
        return Err(EigenError::BadMagic);
    }
    let version = u32::from_le_bytes(take(4, 4)?.try_into().unwrap());
    if version != CACHE_VERSION {
        return Err(EigenError::VersionMismatch {
            found: version,
            expected: CACHE_VERSION,
        });
    }
    let header_len = u64::from_le_bytes(take(8, 8)?.try_into().unwrap()) as usize;
    let header: CacheHeader = serde_json::from_slice(take(16, header_len)?)
        .map_err(|e| EigenError::MalformedHeader(e.to_string()))?;

    let count = header.count as usize;
    let dim = header.dim as usize;
    let n1 = header.grid.n1 as usize;
    let n2 = header.grid.n2 as usize;
    if n1.checked_mul(n2) != Some(dim) {
        return Err(EigenError::MalformedHeader(format!(
            "grid {n1}x{n2} inconsistent with dim {dim}"
        )));
    }
    let payload_len = count
        .checked_mul(1 + dim)
        .and_then(|n| n.checked_mul(8))
        .ok_or(EigenError::TruncatedFile)?;
    let payload = take(16 + header_len, payload_len)?;
    let stored_crc =
        u64::from_le_bytes(take(16 + header_len + payload_len, 8)?.try_into().unwrap());
    if crc64(payload) != stored_crc {
        return Err(EigenError::ChecksumMismatch);
    }

    let mut eigenvalues = Vec::with_capacity(count);
    for i in 0..count {
        eigenvalues.push(f64::from_le_bytes(
            payload[i * 8..i * 8 + 8].try_into().unwrap(),
        ));
    }
    let mut eigenvectors = Vec::with_capacity(count * dim);
    let base = count * 8;
    for i in 0..count * dim {
        eigenvectors.push(f64::from_le_bytes(
            payload[base + i * 8..base + i * 8 + 8].try_into().unwrap(),
        ));
    }

    let grid = Grid2D::new(n1, n2)
        .map_err(|e| EigenError::MalformedHeader(format!("bad grid in header: {e}")))?;
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
        dim,
        grid,
        params: header.params,
        stencil: Stencil::Standard,
    })
}
