//! State metrics: Uhlmann fidelity (two routes), tracking error, von Neumann
//! entropy, Bloch coordinates, and the dirty-derivative error filter.

use crate::algebra::{
    hermitian_eig, sqrt_psd, AlgebraError, Matrix2, TOL_PSD, TOL_TRACE,
};

fn check_unit_trace(m: &Matrix2) -> Result<(), AlgebraError> {
    let tr = m.trace();
    let residual = ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt();
    if !(residual <= TOL_TRACE) {
        return Err(AlgebraError::NotUnitTrace { residual });
    }
    Ok(())
}

/// Uhlmann fidelity via the general matrix-square-root route:
/// F = (tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2.
///
/// Exists as an independent cross-check of [`fidelity_2x2`]; the integrator
/// never calls it.
pub fn fidelity_general(rho1: &Matrix2, rho2: &Matrix2) -> Result<f64, AlgebraError> {
    check_unit_trace(rho1)?;
    check_unit_trace(rho2)?;
    let s1 = sqrt_psd(rho1)?;
    let inner = s1 * *rho2 * s1;
    // Roundoff in the triple product leaves a tiny skew part; project it out
    // so the inner square root sees a Hermitian input.
    let si = sqrt_psd(&inner.hermitize())?;
    let f = si.trace().re.powi(2);
    Ok(f.clamp(0.0, 1.0))
}

/// Uhlmann fidelity via the two-level closed form:
/// F = tr(rho1 rho2) + 2 sqrt(det rho1 det rho2).
///
/// Determinants in [-TOL_PSD, 0) are clamped to zero before the square root;
/// anything below rejects the input.
pub fn fidelity_2x2(rho1: &Matrix2, rho2: &Matrix2) -> Result<f64, AlgebraError> {
    check_unit_trace(rho1)?;
    check_unit_trace(rho2)?;
    let d1 = clamp_det(rho1.det().re)?;
    let d2 = clamp_det(rho2.det().re)?;
    let tr = (*rho1 * *rho2).trace().re;
    Ok((tr + 2.0 * (d1 * d2).sqrt()).clamp(0.0, 1.0))
}

fn clamp_det(det: f64) -> Result<f64, AlgebraError> {
    if det < -TOL_PSD {
        return Err(AlgebraError::NegativeDeterminant { det });
    }
    Ok(det.max(0.0))
}

/// Stage-tolerant fidelity for the integrator hot path.
///
/// RK4 stage values can overshoot the PSD cone transiently, so the evolving
/// state's determinant is clamped at zero from below without rejection. The
/// target is validated once at setup. Agrees with [`fidelity_2x2`] on valid
/// states.
pub fn fidelity_2x2_clamped(rho: &Matrix2, target: &Matrix2) -> f64 {
    let d1 = rho.det().re.max(0.0);
    let d2 = target.det().re.max(0.0);
    let tr = (*rho * *target).trace().re;
    (tr + 2.0 * (d1 * d2).sqrt()).clamp(0.0, 1.0)
}

/// Tracking error e = 1 - F(rho, rho_d), in [0, 1].
pub fn density_error(rho: &Matrix2, rho_d: &Matrix2) -> Result<f64, AlgebraError> {
    Ok(1.0 - fidelity_2x2(rho, rho_d)?)
}

/// Von Neumann entropy -sum_k lambda_k ln lambda_k (natural log, 0 ln 0 = 0).
pub fn von_neumann_entropy(rho: &Matrix2) -> Result<f64, AlgebraError> {
    check_unit_trace(rho)?;
    let eig = hermitian_eig(rho)?;
    if eig.values[0] < -TOL_PSD {
        return Err(AlgebraError::NotPsd {
            min_eig: eig.values[0],
        });
    }
    Ok(entropy_from_eigenvalues(eig.values))
}

/// Entropy from eigenvalues already in hand; clamps each into [0, 1].
pub fn entropy_from_eigenvalues(values: [f64; 2]) -> f64 {
    values
        .iter()
        .map(|&v| {
            let x = v.clamp(0.0, 1.0);
            if x > 0.0 {
                -x * x.ln()
            } else {
                0.0
            }
        })
        .sum()
}

/// Bloch-sphere coordinates of a 2x2 state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochPoint {
    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(&self, other: &BlochPoint) -> f64 {
        ((self.x - other.x).powi(2) + (self.y - other.y).powi(2) + (self.z - other.z).powi(2))
            .sqrt()
    }
}

/// (x, y, z) = (2 Re rho12, 2 Im rho12, rho11 - rho22).
pub fn bloch(rho: &Matrix2) -> BlochPoint {
    BlochPoint {
        x: 2.0 * rho.e[0][1].re,
        y: 2.0 * rho.e[0][1].im,
        z: rho.e[0][0].re - rho.e[1][1].re,
    }
}

/// Dirty-derivative filter: edot = (e - x_d) / tau_d, x_d_dot = edot.
///
/// Returns `(edot, x_d_dot)`; the two coincide for this first-order
/// realization but both are named so the integrator wiring stays explicit.
/// Initialize x_d(0) = e(0) to start with edot(0) = 0.
pub fn error_derivative(e: f64, x_d: f64, tau_d: f64) -> (f64, f64) {
    let edot = (e - x_d) / tau_d;
    (edot, edot)
}
