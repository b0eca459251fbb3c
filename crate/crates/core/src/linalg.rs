//! Fixed-size dense matrices: 2×2 to 4×4 determinants, 3×3 inverse.

use crate::error::{Error, Result};
use crate::jet::Scalar;

pub type Mat3<T = f64> = [[T; 3]; 3];

pub fn det2(a: f64, b: f64, c: f64, d: f64) -> f64 {
    a * d - b * c
}

pub fn det3<T: Scalar>(m: &Mat3<T>) -> T {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Laplace expansion along the first row.
pub fn det4(m: &[[f64; 4]; 4]) -> f64 {
    let mut total = 0.0;
    for col in 0..4 {
        let mut minor = [[0.0; 3]; 3];
        for r in 1..4 {
            let mut cc = 0;
            for c in 0..4 {
                if c == col {
                    continue;
                }
                minor[r - 1][cc] = m[r][c];
                cc += 1;
            }
        }
        let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * m[0][col] * det3(&minor);
    }
    total
}

pub fn mat3_mul<T: Scalar>(a: &Mat3<T>, b: &Mat3<T>) -> Mat3<T> {
    let mut out = [[T::zero(); 3]; 3];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            let mut acc = T::zero();
            for k in 0..3 {
                acc += a[i][k] * b[k][j];
            }
            *v = acc;
        }
    }
    out
}

pub fn mat3_vec<T: Scalar>(a: &Mat3<T>, v: &[T; 3]) -> [T; 3] {
    let mut out = [T::zero(); 3];
    for (i, o) in out.iter_mut().enumerate() {
        *o = a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2];
    }
    out
}

/// Matrix with the given vectors as columns.
pub fn from_columns<T: Scalar>(c: [[T; 3]; 3]) -> Mat3<T> {
    let mut m = [[T::zero(); 3]; 3];
    for (j, col) in c.iter().enumerate() {
        for i in 0..3 {
            m[i][j] = col[i];
        }
    }
    m
}

/// Inverse by the adjugate; fails when `|det|` is below `1e-14`.
pub fn mat3_inverse<T: Scalar>(m: &Mat3<T>) -> Result<Mat3<T>> {
    let det = det3(m);
    if det.re().abs() < 1e-14 {
        return Err(Error::Numerical(format!("singular 3x3 matrix, det = {:e}", det.re())));
    }
    let c = |r0: usize, r1: usize, c0: usize, c1: usize| m[r0][c0] * m[r1][c1] - m[r0][c1] * m[r1][c0];
    let adj = [
        [c(1, 2, 1, 2), -c(0, 2, 1, 2), c(0, 1, 1, 2)],
        [-c(1, 2, 0, 2), c(0, 2, 0, 2), -c(0, 1, 0, 2)],
        [c(1, 2, 0, 1), -c(0, 2, 0, 1), c(0, 1, 0, 1)],
    ];
    let mut inv = [[T::zero(); 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inv[i][j] = adj[i][j] / det;
        }
    }
    Ok(inv)
}
