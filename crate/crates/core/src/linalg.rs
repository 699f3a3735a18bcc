//! Dense complex and real matrix helpers on top of nalgebra.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

pub type C64 = Complex64;
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;
pub type RealMatrix = DMatrix<f64>;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(dim: usize) -> ComplexMatrix {
    ComplexMatrix::identity(dim, dim)
}

pub fn zeros(dim: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(dim, dim)
}

/// Largest entrywise deviation `|m_ij - conj(m_ji)|`.
pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    if m.ncols() != n {
        return f64::INFINITY;
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    hermitian_defect(m) <= tol
}

/// `(m + m^dagger) / 2`.
pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn symmetrize(m: &RealMatrix) -> RealMatrix {
    (m + m.transpose()).scale(0.5)
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().copied().sum()
}

/// `Re Tr(a b)`, the real trace inner product for Hermitian arguments.
pub fn inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            let x = a[(i, j)];
            let y = b[(j, i)];
            s += x.re * y.re - x.im * y.im;
        }
    }
    s
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `|v><v|`.
pub fn projector(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

/// Spectral decomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl Eigh {
    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn column(&self, i: usize) -> ComplexVector {
        self.vectors.column(i).into_owned()
    }
}

pub fn eigh(m: &ComplexMatrix) -> Eigh {
    let n = m.nrows();
    if n == 0 {
        return Eigh { values: Vec::new(), vectors: zeros(0) };
    }
    let se = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = zeros(n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &se.eigenvectors.column(i));
    }
    Eigh { values, vectors }
}

/// Real symmetric eigendecomposition, eigenvalues ascending.
pub fn eigh_real(m: &RealMatrix) -> (Vec<f64>, RealMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), RealMatrix::zeros(0, 0));
    }
    let se = SymmetricEigen::new(symmetrize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
    let values = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vectors = RealMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &se.eigenvectors.column(i));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    eigh(m).min()
}

pub fn max_eigenvalue(m: &ComplexMatrix) -> f64 {
    eigh(m).max()
}

pub fn min_eigenvalue_real(m: &RealMatrix) -> f64 {
    let n = m.nrows();
    if n == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(symmetrize(m)).eigenvalues.min()
}

/// Projector onto the span of eigenvectors with eigenvalue above `tol`.
pub fn positive_projector(h: &ComplexMatrix, tol: f64) -> ComplexMatrix {
    let e = eigh(h);
    let n = h.nrows();
    let mut p = zeros(n);
    for (i, &v) in e.values.iter().enumerate() {
        if v > tol {
            let col = e.column(i);
            p += projector(&col);
        }
    }
    p
}

/// `f(h)` through the spectral decomposition, for a real function `f`.
pub fn spectral_map(h: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let e = eigh(h);
    let n = h.nrows();
    let mut out = zeros(n);
    for (i, &v) in e.values.iter().enumerate() {
        let col = e.column(i);
        out += projector(&col).scale(f(v));
    }
    out
}

/// Real symmetric image `[[Re, -Im], [Im, Re]]` of a Hermitian matrix.
pub fn embed(h: &ComplexMatrix) -> RealMatrix {
    let n = h.nrows();
    let mut y = RealMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            y[(i, j)] = z.re;
            y[(i + n, j + n)] = z.re;
            y[(i, j + n)] = -z.im;
            y[(i + n, j)] = z.im;
        }
    }
    y
}

/// Hermitian matrix whose embedding is closest to `y`.
pub fn deembed(y: &RealMatrix) -> ComplexMatrix {
    let n = y.nrows() / 2;
    let mut h = zeros(n);
    for i in 0..n {
        for j in 0..n {
            let re = 0.5 * (y[(i, j)] + y[(i + n, j + n)]);
            let im = 0.5 * (y[(i + n, j)] - y[(i, j + n)]);
            h[(i, j)] = c(re, im);
        }
    }
    hermitize(&h)
}

pub fn to_complex(m: &RealMatrix) -> ComplexMatrix {
    m.map(|x| c(x, 0.0))
}

/// Pads a vector with zeros up to `dim` entries.
pub fn zero_pad(v: &ComplexVector, dim: usize) -> ComplexVector {
    let mut out = ComplexVector::zeros(dim);
    for (i, z) in v.iter().enumerate().take(dim) {
        out[i] = *z;
    }
    out
}

/// Orthonormalises the columns of `m` in place with modified Gram-Schmidt.
/// Returns false if a column collapses.
pub fn gram_schmidt(m: &mut ComplexMatrix) -> bool {
    let cols = m.ncols();
    for j in 0..cols {
        for _ in 0..2 {
            for i in 0..j {
                let qi = m.column(i).into_owned();
                let proj = qi.dotc(&m.column(j));
                let mut cj = m.column_mut(j);
                cj.axpy(-proj, &qi, C64::new(1.0, 0.0));
            }
        }
        let norm = m.column(j).norm();
        if norm < 1e-13 {
            return false;
        }
        let mut cj = m.column_mut(j);
        cj.unscale_mut(norm);
    }
    true
}
