//! Dense complex linear algebra for the small dimensions used throughout the
//! toolkit (at most 64).
//!
//! [`CMat`] is a square complex matrix backed by `nalgebra`. Everything here is
//! a pure function of its inputs.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Largest tolerated spectral deviation `‖h − h†‖` for a Hermitian input.
pub const HERMITIAN_TOL: f64 = 1e-10;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Square complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat(DMatrix<C64>);

/// Which matrix norm to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormKind {
    /// Largest singular value.
    Spectral,
    /// Root of the sum of squared moduli.
    Frobenius,
    /// Sum of singular values.
    Trace,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        CMat(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        CMat(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        CMat(DMatrix::from_fn(dim, dim, f))
    }

    /// Builds a matrix from row-major entries. Panics unless `rows` is square.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n = rows.len();
        assert!(
            rows.iter().all(|r| r.len() == n),
            "rows must form a square matrix"
        );
        Self::from_fn(n, |i, j| rows[i][j])
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        assert!(
            rows.iter().all(|r| r.len() == n),
            "rows must form a square matrix"
        );
        Self::from_fn(n, |i, j| c64(rows[i][j], 0.0))
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        Self::from_fn(diag.len(), |i, j| {
            if i == j {
                diag[i]
            } else {
                C64::new(0.0, 0.0)
            }
        })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), |i, j| {
            if i == j {
                c64(diag[i], 0.0)
            } else {
                c64(0.0, 0.0)
            }
        })
    }

    /// `|ket⟩⟨bra|`.
    pub fn outer(ket: &[C64], bra: &[C64]) -> Self {
        assert_eq!(ket.len(), bra.len(), "outer product needs equal lengths");
        Self::from_fn(ket.len(), |i, j| ket[i] * bra[j].conj())
    }

    /// `|psi⟩⟨psi|`.
    pub fn projector(psi: &[C64]) -> Self {
        Self::outer(psi, psi)
    }

    /// `|i⟩⟨j|` in dimension `dim`.
    pub fn basis_op(dim: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(i, j)] = c64(1.0, 0.0);
        m
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<C64> {
        self.0
    }

    pub fn from_inner(m: DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "CMat must be square");
        CMat(m)
    }

    pub fn adjoint(&self) -> Self {
        CMat(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        CMat(self.0.transpose())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: C64) -> Self {
        CMat(&self.0 * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(c64(s, 0.0))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch");
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_distance(&self, other: &CMat) -> f64 {
        (&self.0 - &other.0).norm()
    }

    /// Spectral norm of `self − self†`.
    pub fn hermitian_deviation(&self) -> f64 {
        let diff = CMat(&self.0 - self.0.adjoint());
        // Frobenius bounds the spectral norm from above; skip the SVD when it is already tiny.
        let frob = diff.0.norm();
        if frob <= HERMITIAN_TOL {
            frob
        } else {
            norm(&diff, NormKind::Spectral)
        }
    }

    pub fn try_inverse(&self) -> Option<CMat> {
        self.0.clone().try_inverse().map(CMat)
    }

    pub fn mat_vec(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim();
        assert_eq!(v.len(), n, "vector length mismatch");
        (0..n)
            .map(|i| (0..n).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect()
    }

    /// `self · rho · self†`.
    pub fn conjugate(&self, rho: &CMat) -> CMat {
        CMat(&self.0 * &rho.0 * self.0.adjoint())
    }

    pub fn powi(&self, n: u32) -> CMat {
        let mut result = CMat::identity(self.dim());
        let mut base = self.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        result
    }

    /// Direct sum `self ⊕ other`.
    pub fn direct_sum(&self, other: &CMat) -> CMat {
        let (n, m) = (self.dim(), other.dim());
        CMat::from_fn(n + m, |i, j| match (i < n, j < n) {
            (true, true) => self[(i, j)],
            (false, false) => other[(i - n, j - n)],
            _ => c64(0.0, 0.0),
        })
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, idx: (usize, usize)) -> &mut C64 {
        &mut self.0[idx]
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        CMat(&self.0 * &rhs.0)
    }
}

impl Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        CMat(&self.0 + &rhs.0)
    }
}

impl Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        CMat(&self.0 - &rhs.0)
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat({}x{})", self.dim(), self.dim())?;
        for i in 0..self.dim() {
            let row: Vec<String> = (0..self.dim())
                .map(|j| {
                    let z = self.0[(i, j)];
                    format!("{:+.4}{:+.4}i", z.re, z.im)
                })
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Kronecker product; entry `(i₁i₂, j₁j₂)` equals `a[i₁,j₁]·b[i₂,j₂]`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    CMat(a.0.kronecker(&b.0))
}

/// Kronecker product of a list of factors, left to right.
pub fn kron_all(factors: &[&CMat]) -> CMat {
    let (first, rest) = factors
        .split_first()
        .expect("kron_all needs at least one factor");
    rest.iter().fold((*first).clone(), |acc, f| kron(&acc, f))
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect()
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unitary whose columns are the matching eigenvectors.
    pub vectors: CMat,
}

impl HermitianEigen {
    /// `V · diag(f(λ)) · V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> C64) -> CMat {
        let v = &self.vectors.0;
        let n = v.nrows();
        let mut scaled = v.clone();
        for (j, &lam) in self.values.iter().enumerate() {
            let s = f(lam);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        CMat(scaled * v.adjoint())
    }

    /// `e^{−iHt}` from the stored spectrum.
    pub fn propagator(&self, t: f64) -> CMat {
        self.map_spectrum(|lam| C64::from_polar(1.0, -lam * t))
    }
}

fn check_hermitian(h: &CMat) -> Result<()> {
    if !h.is_finite() {
        return Err(Error::NonFinite);
    }
    let deviation = h.hermitian_deviation();
    if deviation > HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Hermitian eigendecomposition with eigenvalues in ascending order.
pub fn hermitian_eig(h: &CMat) -> Result<HermitianEigen> {
    check_hermitian(h)?;
    Ok(hermitian_eig_unchecked(h))
}

/// Same as [`hermitian_eig`] for inputs that are Hermitian by construction.
pub(crate) fn hermitian_eig_unchecked(h: &CMat) -> HermitianEigen {
    let sym = (&h.0 + h.0.adjoint()) * c64(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let n = h.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, |i, j| eig.eigenvectors[(i, order[j])]);
    HermitianEigen { values, vectors }
}

/// Ascending eigenvalues of a matrix that is Hermitian by construction.
pub(crate) fn hermitian_eigenvalues(h: &CMat) -> Vec<f64> {
    let sym = (&h.0 + h.0.adjoint()) * c64(0.5, 0.0);
    let mut values: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

/// `e^{−iht}` via exact eigendecomposition.
pub fn expm_i(h: &CMat, t: f64) -> Result<CMat> {
    Ok(hermitian_eig(h)?.propagator(t))
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    a.0.singular_values().iter().copied().collect()
}

pub fn norm(a: &CMat, kind: NormKind) -> f64 {
    match kind {
        NormKind::Frobenius => a.0.norm(),
        NormKind::Spectral => singular_values(a).into_iter().fold(0.0, f64::max),
        NormKind::Trace => singular_values(a).into_iter().sum(),
    }
}

/// `(d₂−d₁)(d₃−d₁)(d₃−d₂)`.
pub fn vandermonde_det(d: &[f64; 3]) -> f64 {
    (d[1] - d[0]) * (d[2] - d[0]) * (d[2] - d[1])
}

/// Pauli σ_x.
pub fn sigma_x() -> CMat {
    CMat::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
}
