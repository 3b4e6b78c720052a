//! Cyclic Jacobi eigendecomposition of a real symmetric 3x3 matrix.

use thiserror::Error;

pub type Mat3 = [[f64; 3]; 3];

/// Convergence threshold on the off-diagonal Frobenius mass, relative to the
/// Frobenius norm of the input.
pub const OFF_DIAGONAL_TOLERANCE: f64 = 1e-14;

/// Default sweep budget.
pub const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EigenError {
    #[error("Jacobi iteration did not converge in {sweeps} sweeps (off-diagonal mass {off:e})")]
    NotConverged { sweeps: usize, off: f64 },
    #[error("matrix has non-finite entries")]
    NonFinite,
}

/// Eigenvalues in ascending order with the matching orthonormal eigenvectors
/// stored as columns of `vectors`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricEigen {
    pub values: [f64; 3],
    pub vectors: Mat3,
    pub sweeps: usize,
}

fn off_diagonal_mass(a: &Mat3) -> f64 {
    (2.0 * (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2])).sqrt()
}

pub fn frobenius(a: &Mat3) -> f64 {
    a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Only the upper triangle of `m` is read.
pub fn jacobi_eigen(m: &Mat3, max_sweeps: usize) -> Result<SymmetricEigen, EigenError> {
    if m.iter().flatten().any(|x| !x.is_finite()) {
        return Err(EigenError::NonFinite);
    }
    let mut a = *m;
    for i in 0..3 {
        for j in 0..i {
            a[i][j] = a[j][i];
        }
    }
    let mut v = identity();
    let scale = frobenius(&a);
    let threshold = OFF_DIAGONAL_TOLERANCE * scale;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_mass(&a);
        if off <= threshold {
            break;
        }
        if sweeps == max_sweeps {
            return Err(EigenError::NotConverged { sweeps, off });
        }
        sweeps += 1;
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            rotate(&mut a, &mut v, p, q);
        }
    }

    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let mut values = [0.0; 3];
    let mut vectors = [[0.0; 3]; 3];
    for (col, &src) in order.iter().enumerate() {
        values[col] = a[src][src];
        for row in 0..3 {
            vectors[row][col] = v[row][src];
        }
    }
    Ok(SymmetricEigen {
        values,
        vectors,
        sweeps,
    })
}

/// Annihilates `a[p][q]` with a plane rotation, accumulating it into `v`.
fn rotate(a: &mut Mat3, v: &mut Mat3, p: usize, q: usize) {
    let apq = a[p][q];
    if apq == 0.0 {
        return;
    }
    let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    // theta == 0 gives signum 1, t = 1: a 45 degree rotation.
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..3 {
        let akp = a[k][p];
        let akq = a[k][q];
        a[k][p] = c * akp - s * akq;
        a[k][q] = s * akp + c * akq;
    }
    for k in 0..3 {
        let apk = a[p][k];
        let aqk = a[q][k];
        a[p][k] = c * apk - s * aqk;
        a[q][k] = s * apk + c * aqk;
    }
    a[p][q] = 0.0;
    a[q][p] = 0.0;

    for row in v.iter_mut() {
        let vp = row[p];
        let vq = row[q];
        row[p] = c * vp - s * vq;
        row[q] = s * vp + c * vq;
    }
}

pub fn identity() -> Mat3 {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

pub fn transpose(a: &Mat3) -> Mat3 {
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            t[i][j] = a[j][i];
        }
    }
    t
}

pub fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn mat_vec(a: &Mat3, x: [f64; 3]) -> [f64; 3] {
    let mut y = [0.0; 3];
    for (yi, row) in y.iter_mut().zip(a) {
        *yi = row[0] * x[0] + row[1] * x[1] + row[2] * x[2];
    }
    y
}

/// `x^T a` (equivalently `a^T x`).
pub fn vec_mat(x: [f64; 3], a: &Mat3) -> [f64; 3] {
    let mut y = [0.0; 3];
    for (j, yj) in y.iter_mut().enumerate() {
        *yj = x[0] * a[0][j] + x[1] * a[1][j] + x[2] * a[2][j];
    }
    y
}

impl SymmetricEigen {
    /// `V diag(f(lambda)) V^T`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        let fl = self.values.map(f);
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = (0..3)
                    .map(|k| self.vectors[i][k] * fl[k] * self.vectors[j][k])
                    .sum();
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Mat3 {
        self.apply_function(|x| x)
    }
}
