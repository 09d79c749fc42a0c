//! Dense matrices plus the small symmetric kernels the crate needs.
//!
//! Everything here targets the sizes that actually occur: the bivector space
//! has dimension n(n−1)/2 ≤ 28 for n ≤ 8, so a naive Jacobi eigensolver and
//! modified Gram-Schmidt are both fast and fully deterministic.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::scalar;

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn mul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn add(&self, other: &Mat) -> Mat {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.zip(other, |a, b| a - b)
    }

    fn zip(&self, other: &Mat, f: impl Fn(f64, f64) -> f64) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a = f(*a, *b);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat {
        let mut out = self.clone();
        for a in &mut out.data {
            *a *= s;
        }
        out
    }

    /// self += s * other
    pub fn axpy(&mut self, s: f64, other: &Mat) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    /// Add `s` to every diagonal entry.
    pub fn shift_diag(&mut self, s: f64) {
        let n = self.rows.min(self.cols);
        for i in 0..n {
            self[(i, i)] += s;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frob_norm(&self) -> f64 {
        scalar::sqrt(self.data.iter().map(|x| x * x).sum())
    }

    /// Frobenius inner product tr(AᵀB).
    pub fn frob_dot(&self, other: &Mat) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(scalar::abs(*x)))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Largest |a_ij − a_ji|.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max(scalar::abs(self[(i, j)] - self[(j, i)]));
            }
        }
        worst
    }

    pub fn symmetrize(&mut self) {
        assert!(self.is_square());
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let avg = 0.5 * (self[(i, j)] + self[(j, i)]);
                self[(i, j)] = avg;
                self[(j, i)] = avg;
            }
        }
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[f64]) {
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            self[(i, j)] = v[i];
        }
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigen-decomposition of a symmetric matrix.
///
/// Cyclic Jacobi; eigenvalues come back ascending with matching orthonormal
/// eigenvector columns, and each column has its largest-magnitude component
/// nonnegative so the output is a deterministic function of the input.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Mat,
}

pub fn sym_eigen(a: &Mat) -> SymEigen {
    assert!(a.is_square(), "sym_eigen needs a square matrix");
    let n = a.rows();
    let mut m = a.clone();
    m.symmetrize();
    let mut v = Mat::identity(n);
    if n > 1 {
        let scale = m.frob_norm().max(f64::MIN_POSITIVE);
        for _sweep in 0..64 {
            let mut off = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    off += m[(i, j)] * m[(i, j)];
                }
            }
            if scalar::sqrt(2.0 * off) <= 1e-15 * scale {
                break;
            }
            for p in 0..n - 1 {
                for q in (p + 1)..n {
                    let apq = m[(p, q)];
                    if scalar::abs(apq) <= 1e-300 {
                        continue;
                    }
                    let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + scalar::sqrt(theta * theta + 1.0))
                    } else {
                        -1.0 / (-theta + scalar::sqrt(theta * theta + 1.0))
                    };
                    let c = 1.0 / scalar::sqrt(t * t + 1.0);
                    let s = t * c;
                    // A <- JᵀAJ on rows/cols p, q
                    for k in 0..n {
                        let akp = m[(k, p)];
                        let akq = m[(k, q)];
                        m[(k, p)] = c * akp - s * akq;
                        m[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let apk = m[(p, k)];
                        let aqk = m[(q, k)];
                        m[(p, k)] = c * apk - s * aqk;
                        m[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].partial_cmp(&m[(j, j)]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| m[(i, i)]).collect();
    let mut vectors = Mat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let mut col = v.column(src);
        let mut lead = 0;
        for (k, x) in col.iter().enumerate() {
            if scalar::abs(*x) > scalar::abs(col[lead]) {
                lead = k;
            }
        }
        if col[lead] < 0.0 {
            for x in &mut col {
                *x = -*x;
            }
        }
        vectors.set_column(dst, &col);
    }
    SymEigen { values, vectors }
}

/// Orthonormalize the columns of `v` in place (modified Gram-Schmidt).
///
/// Near-dependent columns are replaced from the generator so the result is
/// always a full frame; callers use this both as a Stiefel retraction and to
/// draw random frames.
pub fn orthonormalize_columns(v: &mut Mat, rng: &mut crate::rng::Rng) {
    let (m, k) = (v.rows(), v.cols());
    assert!(k <= m, "cannot orthonormalize {k} columns in dimension {m}");
    for j in 0..k {
        let mut col = v.column(j);
        // two passes of re-orthogonalization keep the frame orthonormal to
        // machine precision
        for _pass in 0..2 {
            for prev in 0..j {
                let p = v.column(prev);
                let dot: f64 = col.iter().zip(&p).map(|(a, b)| a * b).sum();
                for (c, b) in col.iter_mut().zip(&p) {
                    *c -= dot * b;
                }
            }
        }
        let mut norm = scalar::sqrt(col.iter().map(|x| x * x).sum());
        while norm < 1e-10 {
            for c in col.iter_mut() {
                *c = rng.normal();
            }
            for prev in 0..j {
                let p = v.column(prev);
                let dot: f64 = col.iter().zip(&p).map(|(a, b)| a * b).sum();
                for (c, b) in col.iter_mut().zip(&p) {
                    *c -= dot * b;
                }
            }
            norm = scalar::sqrt(col.iter().map(|x| x * x).sum());
        }
        for c in col.iter_mut() {
            *c /= norm;
        }
        v.set_column(j, &col);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use approx::assert_relative_eq;

    fn random_symmetric(n: usize, rng: &mut Rng) -> Mat {
        let mut m = Mat::from_fn(n, n, |_, _| rng.normal());
        m.symmetrize();
        m
    }

    #[test]
    fn eigen_diag() {
        let mut d = Mat::zeros(3, 3);
        d[(0, 0)] = 3.0;
        d[(1, 1)] = -1.0;
        d[(2, 2)] = 2.0;
        let e = sym_eigen(&d);
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn eigen_reconstructs() {
        let mut rng = Rng::new(1);
        for n in [1, 2, 5, 12, 28] {
            let a = random_symmetric(n, &mut rng);
            let e = sym_eigen(&a);
            // ascending
            for w in e.values.windows(2) {
                assert!(w[0] <= w[1]);
            }
            // V diag(w) Vᵀ == A
            let mut lam = Mat::zeros(n, n);
            for i in 0..n {
                lam[(i, i)] = e.values[i];
            }
            let rec = e.vectors.mul(&lam).mul(&e.vectors.transpose());
            let err = rec.sub(&a).frob_norm() / a.frob_norm().max(1.0);
            assert!(err < 1e-13, "n={n} err={err}");
            // orthonormal
            let gram = e.vectors.transpose().mul(&e.vectors);
            let err = gram.sub(&Mat::identity(n)).frob_norm();
            assert!(err < 1e-13, "n={n} gram err={err}");
        }
    }

    #[test]
    fn eigen_deterministic() {
        let mut rng = Rng::new(9);
        let a = random_symmetric(10, &mut rng);
        let e1 = sym_eigen(&a);
        let e2 = sym_eigen(&a);
        assert_eq!(e1.values, e2.values);
        assert_eq!(e1.vectors, e2.vectors);
    }

    #[test]
    fn eigen_known_2x2() {
        let mut a = Mat::zeros(2, 2);
        a[(0, 0)] = 2.0;
        a[(0, 1)] = 1.0;
        a[(1, 0)] = 1.0;
        a[(1, 1)] = 2.0;
        let e = sym_eigen(&a);
        assert_relative_eq!(e.values[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(e.values[1], 3.0, max_relative = 1e-14);
    }

    #[test]
    fn gram_schmidt_frames() {
        let mut rng = Rng::new(5);
        for (m, k) in [(5, 4), (6, 4), (3, 2), (4, 4)] {
            let mut v = Mat::from_fn(m, k, |_, _| rng.normal());
            orthonormalize_columns(&mut v, &mut rng);
            let gram = v.transpose().mul(&v);
            let err = gram.sub(&Mat::identity(k)).frob_norm();
            assert!(err < 1e-12, "m={m} k={k} err={err}");
        }
    }

    #[test]
    fn gram_schmidt_handles_dependent_columns() {
        let mut rng = Rng::new(6);
        let mut v = Mat::zeros(4, 3);
        for i in 0..4 {
            v[(i, 0)] = 1.0;
            v[(i, 1)] = 1.0; // identical to column 0
            v[(i, 2)] = i as f64;
        }
        orthonormalize_columns(&mut v, &mut rng);
        let gram = v.transpose().mul(&v);
        assert!(gram.sub(&Mat::identity(3)).frob_norm() < 1e-10);
    }
}
