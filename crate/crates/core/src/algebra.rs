//! Closed-form complex 2x2 matrix algebra for density-operator work.
//!
//! Everything operates on stack values with exact closed forms: the
//! eigendecomposition is the quadratic formula, the PSD square root is the
//! spectral form. No iterative factorizations, no heap. This keeps the hot
//! integrator path cheap and makes every routine pin-downable in tests.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

/// Hermiticity tolerance: matrices whose residual ||A - A^H||_F exceeds this
/// are rejected where a Hermitian operator is required.
pub const TOL_HERM: f64 = 1e-9;
/// Unit-trace tolerance for density operators.
pub const TOL_TRACE: f64 = 1e-9;
/// Eigenvalues in [-TOL_PSD, 0) count as roundoff and are clamped to zero;
/// anything below rejects the matrix as not positive semidefinite.
pub const TOL_PSD: f64 = 1e-9;
/// Eigenvalue half-gap under which the eigenbasis is ill-determined; the
/// standard basis is returned instead.
pub const TOL_DEGENERATE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("matrix is not Hermitian: residual {residual:.3e}")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPsd { min_eig: f64 },
    #[error("matrix does not have unit trace: residual {residual:.3e}")]
    NotUnitTrace { residual: f64 },
    #[error("determinant {det:.3e} is negative beyond tolerance")]
    NegativeDeterminant { det: f64 },
}

/// Dense 2x2 complex matrix, row-major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Matrix2 {
    pub e: [[Complex64; 2]; 2],
}

/// Shorthand constructor used throughout the crate.
pub const fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl Matrix2 {
    pub const fn new(e: [[Complex64; 2]; 2]) -> Self {
        Self { e }
    }

    pub fn from_reals(m: [[f64; 2]; 2]) -> Self {
        Self::new([
            [c(m[0][0], 0.0), c(m[0][1], 0.0)],
            [c(m[1][0], 0.0), c(m[1][1], 0.0)],
        ])
    }

    pub fn zeros() -> Self {
        Self::from_reals([[0.0; 2]; 2])
    }

    pub fn identity() -> Self {
        Self::from_reals([[1.0, 0.0], [0.0, 1.0]])
    }

    /// Conjugate transpose A^H.
    pub fn adjoint(&self) -> Self {
        Self::new([
            [self.e[0][0].conj(), self.e[1][0].conj()],
            [self.e[0][1].conj(), self.e[1][1].conj()],
        ])
    }

    pub fn trace(&self) -> Complex64 {
        self.e[0][0] + self.e[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.e[0][0] * self.e[1][1] - self.e[0][1] * self.e[1][0]
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for row in &self.e {
            for x in row {
                s += x.norm_sqr();
            }
        }
        s.sqrt()
    }

    /// ||A - A^H||_F, zero iff exactly Hermitian.
    pub fn herm_residual(&self) -> f64 {
        (*self - self.adjoint()).frobenius_norm()
    }

    /// Hermitian projection (A + A^H) / 2.
    pub fn hermitize(&self) -> Self {
        (*self + self.adjoint()) * 0.5
    }
}

impl Add for Matrix2 {
    type Output = Matrix2;
    fn add(self, rhs: Matrix2) -> Matrix2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.e[i][j] += rhs.e[i][j];
            }
        }
        out
    }
}

impl Sub for Matrix2 {
    type Output = Matrix2;
    fn sub(self, rhs: Matrix2) -> Matrix2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.e[i][j] -= rhs.e[i][j];
            }
        }
        out
    }
}

impl Neg for Matrix2 {
    type Output = Matrix2;
    fn neg(self) -> Matrix2 {
        self * -1.0
    }
}

impl Mul for Matrix2 {
    type Output = Matrix2;
    fn mul(self, rhs: Matrix2) -> Matrix2 {
        let a = &self.e;
        let b = &rhs.e;
        Matrix2::new([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Mul<f64> for Matrix2 {
    type Output = Matrix2;
    fn mul(self, s: f64) -> Matrix2 {
        self * c(s, 0.0)
    }
}

impl Mul<Complex64> for Matrix2 {
    type Output = Matrix2;
    fn mul(self, s: Complex64) -> Matrix2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.e[i][j] *= s;
            }
        }
        out
    }
}

/// AB - BA.
pub fn commutator(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    *a * *b - *b * *a
}

/// AB + BA.
pub fn anticommutator(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    *a * *b + *b * *a
}

/// Spectral decomposition of a Hermitian 2x2 matrix.
#[derive(Clone, Copy, Debug)]
pub struct EigenPair {
    /// Eigenvalues in ascending order.
    pub values: [f64; 2],
    /// Unit-norm eigenvector columns; `vectors[k]` pairs with `values[k]`.
    pub vectors: [[Complex64; 2]; 2],
}

impl EigenPair {
    /// Rebuild sum_k f(lambda_k) v_k v_k^H for the given eigenvalue map.
    pub fn reconstruct(&self, f: impl Fn(f64) -> f64) -> Matrix2 {
        let mut out = Matrix2::zeros();
        for k in 0..2 {
            let w = c(f(self.values[k]), 0.0);
            let v = self.vectors[k];
            for i in 0..2 {
                for j in 0..2 {
                    out.e[i][j] += w * v[i] * v[j].conj();
                }
            }
        }
        out
    }
}

/// Closed-form eigendecomposition of a Hermitian 2x2 matrix.
///
/// The matrix is symmetrized internally (real diagonal, averaged
/// off-diagonal), so inputs within `TOL_HERM` of Hermitian are handled
/// consistently; anything farther is rejected. Half-gaps below
/// `TOL_DEGENERATE` return the standard basis.
pub fn hermitian_eig(m: &Matrix2) -> Result<EigenPair, AlgebraError> {
    let residual = m.herm_residual();
    if !(residual <= TOL_HERM) {
        return Err(AlgebraError::NotHermitian { residual });
    }
    let a = m.e[0][0].re;
    let d = m.e[1][1].re;
    let b = (m.e[0][1] + m.e[1][0].conj()) * 0.5;
    let mid = 0.5 * (a + d);
    let half_gap = ((0.5 * (a - d)).powi(2) + b.norm_sqr()).sqrt();
    let values = [mid - half_gap, mid + half_gap];
    if half_gap < TOL_DEGENERATE {
        return Ok(EigenPair {
            values,
            vectors: [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
        });
    }
    // Eigenvector for the larger eigenvalue: both candidate columns of
    // adj(A - lambda I) span it; pick the better-conditioned one.
    let lam1 = values[1];
    let cand1 = [b, c(lam1 - a, 0.0)];
    let cand2 = [c(lam1 - d, 0.0), b.conj()];
    let n1 = cand1[0].norm_sqr() + cand1[1].norm_sqr();
    let n2 = cand2[0].norm_sqr() + cand2[1].norm_sqr();
    let (v, n) = if n1 >= n2 { (cand1, n1) } else { (cand2, n2) };
    let inv = 1.0 / n.sqrt();
    let v1 = [v[0] * inv, v[1] * inv];
    // The orthogonal complement is the eigenvector of the smaller eigenvalue.
    let v0 = [-v1[1].conj(), v1[0].conj()];
    Ok(EigenPair {
        values,
        vectors: [v0, v1],
    })
}

/// Principal square root of a Hermitian PSD matrix.
///
/// Eigenvalues in [-TOL_PSD, 0) are clamped to zero; below that the input is
/// rejected.
pub fn sqrt_psd(m: &Matrix2) -> Result<Matrix2, AlgebraError> {
    let eig = hermitian_eig(m)?;
    if eig.values[0] < -TOL_PSD {
        return Err(AlgebraError::NotPsd {
            min_eig: eig.values[0],
        });
    }
    Ok(eig.reconstruct(|x| x.max(0.0).sqrt()))
}

/// Validated density operator: Hermitian, unit trace, PSD within tolerances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix(Matrix2);

impl DensityMatrix {
    pub fn new(m: Matrix2) -> Result<Self, AlgebraError> {
        let herm = m.herm_residual();
        if !(herm <= TOL_HERM) {
            return Err(AlgebraError::NotHermitian { residual: herm });
        }
        let tr = m.trace();
        let tres = ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt();
        if !(tres <= TOL_TRACE) {
            return Err(AlgebraError::NotUnitTrace { residual: tres });
        }
        let eig = hermitian_eig(&m)?;
        if eig.values[0] < -TOL_PSD {
            return Err(AlgebraError::NotPsd {
                min_eig: eig.values[0],
            });
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &Matrix2 {
        &self.0
    }

    pub fn min_eig(&self) -> f64 {
        hermitian_eig(&self.0)
            .expect("validated at construction")
            .values[0]
    }
}
