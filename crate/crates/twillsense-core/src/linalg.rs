//! Small dense/sparse solvers used by the network and fitting modules.

use alloc::vec;
use alloc::vec::Vec;

use crate::math;

/// Solves `A x = b` for symmetric positive definite `A` (row-major, n×n)
/// by in-place Cholesky factorization. Returns `None` when a pivot drops
/// to zero or below, i.e. the matrix is not positive definite.
pub(crate) fn cholesky_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Option<()> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    // factor: A = L L^T, L stored in the lower triangle
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return None;
        }
        let ljj = math::sqrt(diag);
        a[j * n + j] = ljj;
        for i in (j + 1)..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / ljj;
        }
    }
    // forward: L y = b
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i * n + k] * b[k];
        }
        b[i] = v / a[i * n + i];
    }
    // backward: L^T x = y
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in (i + 1)..n {
            v -= a[k * n + i] * b[k];
        }
        b[i] = v / a[i * n + i];
    }
    Some(())
}

/// Symmetric sparse matrix in adjacency form: `rows[i]` lists `(j, value)`
/// for off-diagonal entries, `diag[i]` the diagonal.
pub(crate) struct SparseSym {
    pub diag: Vec<f64>,
    pub rows: Vec<Vec<(usize, f64)>>,
}

impl SparseSym {
    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            let mut v = self.diag[i] * x[i];
            for &(j, w) in &self.rows[i] {
                v += w * x[j];
            }
            out[i] = v;
        }
    }
}

/// Jacobi-preconditioned conjugate gradient for SPD systems. Iterates to
/// `tol` relative residual or `max_iter`, whichever comes first.
pub(crate) fn cg_solve(m: &SparseSym, b: &[f64], tol: f64, max_iter: usize) -> Option<Vec<f64>> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let b_norm = math::sqrt(dot(b, b));
    if b_norm == 0.0 {
        return Some(x);
    }
    let mut inv_d = Vec::with_capacity(n);
    for &d in &m.diag {
        if !(d > 0.0) {
            return None;
        }
        inv_d.push(1.0 / d);
    }
    let mut z: Vec<f64> = r.iter().zip(&inv_d).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for _ in 0..max_iter {
        m.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 || !pap.is_finite() {
            return None;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if math::sqrt(dot(&r, &r)) <= tol * b_norm {
            return Some(x);
        }
        for i in 0..n {
            z[i] = r[i] * inv_d[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    None
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cholesky_solves_spd_system() {
        // A = [[4,1,0],[1,3,1],[0,1,2]], x = [1,2,3]
        let mut a = vec![4.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 2.0];
        let mut b = vec![6.0, 10.0, 8.0];
        cholesky_solve(&mut a, &mut b, 3).unwrap();
        assert_relative_eq!(b[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(b[1], 2.0, max_relative = 1e-12);
        assert_relative_eq!(b[2], 3.0, max_relative = 1e-12);
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = vec![1.0, 2.0, 2.0, 1.0];
        let mut b = vec![1.0, 1.0];
        assert!(cholesky_solve(&mut a, &mut b, 2).is_none());
    }

    #[test]
    fn cg_matches_cholesky() {
        let m = SparseSym {
            diag: vec![4.0, 3.0, 2.0],
            rows: vec![vec![(1, 1.0)], vec![(0, 1.0), (2, 1.0)], vec![(1, 1.0)]],
        };
        let b = [6.0, 10.0, 8.0];
        let x = cg_solve(&m, &b, 1e-12, 100).unwrap();
        assert_relative_eq!(x[0], 1.0, max_relative = 1e-9);
        assert_relative_eq!(x[1], 2.0, max_relative = 1e-9);
        assert_relative_eq!(x[2], 3.0, max_relative = 1e-9);
    }
}
