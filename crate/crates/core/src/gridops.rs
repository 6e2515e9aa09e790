//! Applies per-axis differentiation matrices to flattened 2-D grid vectors
//! (index k = i * n2 + j, second angle fastest). Generic over the scalar so
//! the same kernels serve real eigenvectors and complex evolved states.

use crate::spectral::DiffOps;

pub(crate) trait GridScalar:
    Copy + Default + std::ops::AddAssign + std::ops::Mul<f64, Output = Self>
{
}

impl<T> GridScalar for T where
    T: Copy + Default + std::ops::AddAssign + std::ops::Mul<f64, Output = T>
{
}

/// out[i, j] = sum_{i'} d[i, i'] v[i', j].
pub(crate) fn apply_axis1<T: GridScalar>(matrix: &[f64], n1: usize, n2: usize, v: &[T]) -> Vec<T> {
    let mut out = vec![T::default(); n1 * n2];
    for i in 0..n1 {
        let row = &matrix[i * n1..(i + 1) * n1];
        let dst = &mut out[i * n2..(i + 1) * n2];
        for (ip, &coeff) in row.iter().enumerate() {
            if coeff == 0.0 {
                continue;
            }
            let src = &v[ip * n2..(ip + 1) * n2];
            for (d, s) in dst.iter_mut().zip(src) {
                *d += *s * coeff;
            }
        }
    }
    out
}

/// out[i, j] = sum_{j'} d[j, j'] v[i, j'].
pub(crate) fn apply_axis2<T: GridScalar>(matrix: &[f64], n1: usize, n2: usize, v: &[T]) -> Vec<T> {
    let mut out = vec![T::default(); n1 * n2];
    for i in 0..n1 {
        let src = &v[i * n2..(i + 1) * n2];
        let dst = &mut out[i * n2..(i + 1) * n2];
        for (j, slot) in dst.iter_mut().enumerate() {
            let row = &matrix[j * n2..(j + 1) * n2];
            let mut acc = T::default();
            for (jp, &coeff) in row.iter().enumerate() {
                acc += src[jp] * coeff;
            }
            *slot = acc;
        }
    }
    out
}

/// First derivative along axis 1 of a flattened grid vector.
pub(crate) fn d1_axis1<T: GridScalar>(ops: &DiffOps, n2: usize, v: &[T]) -> Vec<T> {
    apply_axis1(&ops.d1, ops.n, n2, v)
}

/// First derivative along axis 2.
pub(crate) fn d1_axis2<T: GridScalar>(ops: &DiffOps, n1: usize, v: &[T]) -> Vec<T> {
    apply_axis2(&ops.d1, n1, ops.n, v)
}

/// Second derivative along axis 1.
pub(crate) fn dd1_axis1<T: GridScalar>(ops: &DiffOps, n2: usize, v: &[T]) -> Vec<T> {
    apply_axis1(&ops.dd1, ops.n, n2, v)
}

/// Second derivative along axis 2.
pub(crate) fn dd1_axis2<T: GridScalar>(ops: &DiffOps, n1: usize, v: &[T]) -> Vec<T> {
    apply_axis2(&ops.dd1, n1, ops.n, v)
}
