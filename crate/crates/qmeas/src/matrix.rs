//! Dense complex matrices: the carrier type for every operator in the crate.
//!
//! This is a thin layer over [`nalgebra::DMatrix`] that fixes the scalar to
//! `Complex<f64>`, restricts to square shapes, and adds the handful of
//! operations the measurement code needs (adjoints, pinching-friendly
//! products, Kronecker products, partial traces, hermitian eigensolves).
//! The JSON form is `{dim, re, im}` with row-major coefficient arrays.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Square complex matrix with `f64` components.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<C64>,
}

impl ComplexMatrix {
    /// Wraps an `nalgebra` matrix; errors unless it is square.
    pub fn from_dmatrix(inner: DMatrix<C64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::DimensionMismatch {
                left: inner.nrows(),
                right: inner.ncols(),
            });
        }
        Ok(Self { inner })
    }

    pub(crate) fn from_inner(inner: DMatrix<C64>) -> Self {
        debug_assert_eq!(inner.nrows(), inner.ncols());
        Self { inner }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_inner(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_inner(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self::from_inner(DMatrix::from_fn(dim, dim, f))
    }

    /// Builds from a row-major slice of `dim * dim` entries.
    pub fn from_row_slice(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: entries.len(),
                right: dim * dim,
            });
        }
        Ok(Self::from_inner(DMatrix::from_row_slice(dim, dim, entries)))
    }

    /// Builds from row-major real entries (imaginary parts zero).
    pub fn from_real_rows(dim: usize, entries: &[f64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                left: entries.len(),
                right: dim * dim,
            });
        }
        let complex: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_row_slice(dim, &complex)
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.inner[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: C64) {
        self.inner[(row, col)] = value;
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.inner
    }

    pub fn adjoint(&self) -> Self {
        Self::from_inner(self.inner.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.inner.trace()
    }

    /// Largest entry modulus, the norm used for all invariant checks.
    pub fn max_norm(&self) -> f64 {
        self.inner.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim(), rhs.dim(), "matrix product dimension mismatch");
        Self::from_inner(&self.inner * &rhs.inner)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim(), rhs.dim(), "matrix sum dimension mismatch");
        Self::from_inner(&self.inner + &rhs.inner)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim(), rhs.dim(), "matrix difference dimension mismatch");
        Self::from_inner(&self.inner - &rhs.inner)
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.scale_c(C64::new(factor, 0.0))
    }

    pub fn scale_c(&self, factor: C64) -> Self {
        Self::from_inner(self.inner.map(|c| c * factor))
    }

    /// `n`-fold matrix power by repeated multiplication; `pow(0)` is the identity.
    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::identity(self.dim());
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    pub fn commutator(&self, rhs: &Self) -> Self {
        self.mul(rhs).sub(&rhs.mul(self))
    }

    pub fn anticommutator(&self, rhs: &Self) -> Self {
        self.mul(rhs).add(&rhs.mul(self))
    }

    pub fn kronecker(&self, rhs: &Self) -> Self {
        Self::from_inner(self.inner.kronecker(&rhs.inner))
    }

    /// Deviation from hermiticity, `max |M - M^H|`.
    pub fn hermitian_defect(&self) -> f64 {
        self.sub(&self.adjoint()).max_norm()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    /// Trace of `self * rhs`, without forming the full product.
    pub fn trace_product(&self, rhs: &Self) -> C64 {
        assert_eq!(self.dim(), rhs.dim(), "trace product dimension mismatch");
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += self.inner[(i, k)] * rhs.inner[(k, i)];
            }
        }
        acc
    }

    /// Partial trace over the right factor of a `d_left * d_right` square
    /// matrix, with the Kronecker index convention `(a, k) -> a*d_right + k`.
    pub fn partial_trace_right(&self, d_left: usize, d_right: usize) -> Result<Self> {
        if d_left * d_right != self.dim() {
            return Err(Error::DimensionMismatch {
                left: d_left * d_right,
                right: self.dim(),
            });
        }
        let mut out = DMatrix::zeros(d_left, d_left);
        for a in 0..d_left {
            for b in 0..d_left {
                let mut acc = C64::new(0.0, 0.0);
                for k in 0..d_right {
                    acc += self.inner[(a * d_right + k, b * d_right + k)];
                }
                out[(a, b)] = acc;
            }
        }
        Ok(Self::from_inner(out))
    }

    /// Eigendecomposition of a hermitian matrix: real eigenvalues sorted
    /// ascending, matching eigenvector columns.
    pub fn hermitian_eigen(&self) -> HermitianEigen {
        let se = self.inner.clone().symmetric_eigen();
        let n = self.dim();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]));
        let values: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
        let mut vectors = DMatrix::zeros(n, n);
        for (col, &i) in order.iter().enumerate() {
            vectors.set_column(col, &se.eigenvectors.column(i));
        }
        HermitianEigen {
            values,
            vectors: Self::from_inner(vectors),
        }
    }

    /// Smallest eigenvalue of a hermitian matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        self.inner
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v))
    }
}

/// Result of [`ComplexMatrix::hermitian_eigen`].
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Unitary matrix whose `i`-th column is the eigenvector of `values[i]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Rank-1 projector onto the `i`-th eigenvector.
    pub fn projector(&self, i: usize) -> ComplexMatrix {
        let v = self.vectors.as_dmatrix().column(i);
        ComplexMatrix::from_inner(v * v.adjoint())
    }
}

impl std::ops::Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::add(self, rhs)
    }
}

impl std::ops::Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::sub(self, rhs)
    }
}

impl std::ops::Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::mul(self, rhs)
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    dim: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let n = self.dim();
        let mut re = Vec::with_capacity(n * n);
        let mut im = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let c = self.inner[(i, j)];
                re.push(c.re);
                im.push(c.im);
            }
        }
        MatrixRepr { dim: n, re, im }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let repr = MatrixRepr::deserialize(deserializer)?;
        let n = repr.dim;
        if repr.re.len() != n * n || repr.im.len() != n * n {
            return Err(serde::de::Error::custom(format!(
                "matrix payload needs {} coefficients, got re: {}, im: {}",
                n * n,
                repr.re.len(),
                repr.im.len()
            )));
        }
        Ok(Self::from_fn(n, |i, j| {
            C64::new(repr.re[i * n + j], repr.im[i * n + j])
        }))
    }
}
