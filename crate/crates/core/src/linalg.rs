//! Minimal dense complex-matrix support.
//!
//! Everything in the receiver pipeline works with N-element arrays (N = 8 in
//! the reference configurations), so the only linear algebra needed is
//! small dense complex matrices: covariance accumulation, Hermitian checks,
//! and column access for eigenvector work. A tiny column-major type keeps
//! the crate free of heavyweight linear-algebra dependencies and portable to
//! `wasm32` without feature juggling.

use num_complex::Complex64;

/// Dense complex matrix, column-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    /// `data[c * rows + r]` is entry (r, c).
    data: Vec<Complex64>,
}

impl CMat {
    /// All-zero matrix of the given shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    /// Identity matrix of order `n`.
    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Build a matrix entry by entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMat::zeros(rows, cols);
        for c in 0..cols {
            for r in 0..rows {
                *m.at_mut(r, c) = f(r, c);
            }
        }
        m
    }

    /// Row count.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Column count.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry (r, c).
    #[inline]
    pub fn at(&self, r: usize, c: usize) -> Complex64 {
        self.data[c * self.rows + r]
    }

    /// Mutable entry (r, c).
    #[inline]
    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut Complex64 {
        &mut self.data[c * self.rows + r]
    }

    /// Column `c` as a contiguous slice.
    pub fn col(&self, c: usize) -> &[Complex64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    /// Accumulate a weighted outer product: `self += w * y * yᴴ`.
    ///
    /// The result of repeated accumulation is exactly Hermitian by
    /// construction: the lower triangle is written as the conjugate of the
    /// upper triangle and the diagonal as a real magnitude.
    pub fn accumulate_outer(&mut self, y: &[Complex64], w: f64) {
        assert_eq!(self.rows, y.len());
        assert_eq!(self.cols, y.len());
        for c in 0..self.cols {
            for r in 0..c {
                let v = y[r] * y[c].conj() * w;
                *self.at_mut(r, c) += v;
                *self.at_mut(c, r) += v.conj();
            }
            *self.at_mut(c, c) += Complex64::new(w * y[c].norm_sqr(), 0.0);
        }
    }

    /// Frobenius norm.
    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry-wise deviation from Hermitian symmetry,
    /// `max |A[r][c] − conj(A[c][r])|` (square matrices only).
    pub fn hermitian_defect(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut worst = 0.0f64;
        for c in 0..self.cols {
            for r in 0..=c {
                let d = (self.at(r, c) - self.at(c, r).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |r, c| self.at(c, r).conj())
    }

    /// Plain matrix product (used by tests and small reconstructions; the
    /// hot paths never multiply full matrices).
    pub fn matmul(&self, rhs: &CMat) -> CMat {
        assert_eq!(self.cols, rhs.rows);
        CMat::from_fn(self.rows, rhs.cols, |r, c| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..self.cols {
                acc += self.at(r, k) * rhs.at(k, c);
            }
            acc
        })
    }

    /// Multiply a column on the right: `self * x`.
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, x.len());
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for c in 0..self.cols {
            let xc = x[c];
            let col = self.col(c);
            for r in 0..self.rows {
                out[r] += col[r] * xc;
            }
        }
        out
    }
}

/// Hermitian inner product `xᴴ y`.
pub fn cdot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    debug_assert_eq!(x.len(), y.len());
    let mut acc = Complex64::new(0.0, 0.0);
    for (a, b) in x.iter().zip(y.iter()) {
        acc += a.conj() * b;
    }
    acc
}

/// Euclidean norm of a complex vector.
pub fn cnorm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
