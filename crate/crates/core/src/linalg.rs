//! Dense complex matrix kernel.
//!
//! Matrices are `nalgebra` column-major `DMatrix<Complex64>`, so `vec(A)` is the
//! storage slice: columns stacked top to bottom. Every identity used by the
//! solvers (mixed-product rule, `vec(ABC) = (Cᵀ ⊗ A) vec(B)`, the commutation
//! matrix) is written against that convention.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative threshold below which negative eigenvalues are clamped to zero.
pub const PSD_CLAMP: f64 = 1e-10;
/// Relative threshold below which a negative eigenvalue is a hard error.
pub const PSD_REJECT: f64 = 1e-8;
/// Relative singular-value cutoff for the pseudo-inverse.
pub const PINV_CUTOFF: f64 = 1e-12;

#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn eye(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Kronecker product `A ⊗ B`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMatrix::zeros(ra * rb, ca * cb);
    for j in 0..ca {
        for i in 0..ra {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for q in 0..cb {
                for p in 0..rb {
                    out[(i * rb + p, j * cb + q)] = s * b[(p, q)];
                }
            }
        }
    }
    out
}

/// Column-stacking vectorization, returned as an `rows·cols × 1` matrix.
pub fn vec(a: &CMatrix) -> CMatrix {
    CMatrix::from_column_slice(a.len(), 1, a.as_slice())
}

/// Inverse of [`vec`]: reshape a column into `rows × cols`.
pub fn unvec(v: &CMatrix, rows: usize, cols: usize) -> CMatrix {
    assert_eq!(v.len(), rows * cols, "unvec: length mismatch");
    CMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// `(A + Aᴴ) / 2`.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * cr(0.5)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

pub fn is_hermitian(a: &CMatrix, rel_tol: f64) -> bool {
    if !a.is_square() {
        return false;
    }
    let scale = max_abs(a).max(f64::MIN_POSITIVE);
    max_abs(&(a - a.adjoint())) <= rel_tol * scale
}

/// Lower-triangular Cholesky factor of a Hermitian positive definite matrix.
///
/// Only the lower triangle of `a` is read.
pub fn cholesky(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(Error::InvalidInput(format!("cholesky of {}x{} matrix", n, a.ncols())));
    }
    let mut l = CMatrix::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot: d });
        }
        let djj = d.sqrt();
        l[(j, j)] = cr(djj);
        for i in (j + 1)..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / djj;
        }
    }
    Ok(l)
}

/// Solve `L Lᴴ X = B` given the lower Cholesky factor.
pub fn cholesky_solve(l: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = l.nrows();
    let mut x = b.clone();
    for col in 0..x.ncols() {
        for i in 0..n {
            let mut s = x[(i, col)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = x[(i, col)];
            for k in (i + 1)..n {
                s -= l[(k, i)].conj() * x[(k, col)];
            }
            x[(i, col)] = s / l[(i, i)];
        }
    }
    x
}

/// Solve `A X = B` for Hermitian positive definite `A`.
pub fn solve_hpd(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let l = cholesky(a)?;
    Ok(cholesky_solve(&l, b))
}

/// Inverse of a Hermitian positive definite matrix, symmetrized.
pub fn inverse_hpd(a: &CMatrix) -> Result<CMatrix> {
    let inv = solve_hpd(a, &eye(a.nrows()))?;
    Ok(hermitian_part(&inv))
}

/// Natural-log determinant of a Hermitian positive definite matrix.
pub fn logdet_hermitian(a: &CMatrix) -> Result<f64> {
    let l = cholesky(a)?;
    Ok((0..l.nrows()).map(|i| l[(i, i)].re.ln()).sum::<f64>() * 2.0)
}

/// Eigendecomposition of a Hermitian matrix: ascending real eigenvalues and
/// the matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(a: &CMatrix) -> (DVector<f64>, CMatrix) {
    let eig = hermitian_part(a).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Principal square root of a Hermitian PSD matrix.
///
/// Eigenvalues in `[-1e-10·‖A‖, 0)` are clamped to zero; anything below
/// `-1e-8·‖A‖` is rejected.
pub fn hermitian_sqrt(a: &CMatrix) -> Result<CMatrix> {
    let (vals, vecs) = hermitian_eigen(a);
    let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut roots = Vec::with_capacity(vals.len());
    for &v in vals.iter() {
        if v < -PSD_REJECT * scale {
            return Err(Error::NotPsd { eigenvalue: v });
        }
        roots.push(if v > 0.0 { v.sqrt() } else { 0.0 });
    }
    let mut scaled = vecs.clone();
    for (j, r) in roots.iter().enumerate() {
        scaled.column_mut(j).scale_mut(*r);
    }
    Ok(hermitian_part(&(&scaled * vecs.adjoint())))
}

/// Moore-Penrose pseudo-inverse with relative singular-value cutoff 1e-12.
pub fn pinv(a: &CMatrix) -> CMatrix {
    let (r, cols) = a.shape();
    if r == 0 || cols == 0 {
        return CMatrix::zeros(cols, r);
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("svd u");
    let v_t = svd.v_t.expect("svd v_t");
    let smax = svd.singular_values.iter().fold(0.0_f64, |m, s| m.max(*s));
    let cutoff = PINV_CUTOFF * smax;
    let k = svd.singular_values.len();
    let mut out = CMatrix::zeros(cols, r);
    for i in 0..k {
        let s = svd.singular_values[i];
        if s > cutoff && s > 0.0 {
            let vi = v_t.row(i).adjoint();
            let ui = u.column(i).adjoint();
            out += (vi * ui) * cr(1.0 / s);
        }
    }
    out
}

/// Numerical rank of a Hermitian matrix: eigenvalues above `tol·λ_max`.
pub fn hermitian_rank(a: &CMatrix, tol: f64) -> usize {
    let (vals, _) = hermitian_eigen(a);
    let top = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    vals.iter().filter(|v| **v > tol * top).count()
}

pub fn trace(a: &CMatrix) -> Complex64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// `xᴴ A x` for Hermitian `A` (real part only).
pub fn quad_form(a: &CMatrix, x: &CMatrix) -> f64 {
    (x.adjoint() * a * x)[(0, 0)].re
}

/// `xᴴ y` for two column matrices.
pub fn inner(x: &CMatrix, y: &CMatrix) -> Complex64 {
    x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_sqr(x: &CMatrix) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

/// Permutation `K_{mn}` with `K_{mn} vec(A) = vec(Aᵀ)` for every `m × n` matrix `A`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommutationMatrix {
    m: usize,
    n: usize,
    /// `out[q] = in[source[q]]`.
    source: Vec<usize>,
}

impl CommutationMatrix {
    pub fn new(m: usize, n: usize) -> Self {
        assert!(m >= 1 && n >= 1, "commutation matrix needs m, n >= 1");
        let mut source = vec![0; m * n];
        for i in 0..m {
            for j in 0..n {
                // A[i, j] sits at i + j·m in vec(A) and at j + i·n in vec(Aᵀ).
                source[j + i * n] = i + j * m;
            }
        }
        Self { m, n, source }
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn apply(&self, v: &CMatrix) -> CMatrix {
        assert_eq!(v.len(), self.source.len());
        CMatrix::from_iterator(v.len(), 1, self.source.iter().map(|&s| v[s]))
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.source.len();
        let mut k = CMatrix::zeros(n, n);
        for (q, &p) in self.source.iter().enumerate() {
            k[(q, p)] = ONE;
        }
        k
    }
}

pub fn build_commutation(m: usize, n: usize) -> CommutationMatrix {
    CommutationMatrix::new(m, n)
}
