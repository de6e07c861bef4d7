//! Dissipative two-level plant: drift plus control Hamiltonian and jump
//! dissipator, with hbar = 1.
//!
//! rho_dot = -i [H0 + u H1, rho] + sum_k (L_k rho L_k^H - {L_k^H L_k, rho} / 2)
//!
//! The right-hand side preserves trace, Hermiticity, and positivity of the
//! exact flow; the integrator relies on those properties only through its
//! per-step projections and recorded residuals.

use num_complex::Complex64;
use thiserror::Error;

use crate::algebra::{anticommutator, commutator, DensityMatrix, Matrix2, TOL_HERM};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlantError {
    #[error("{which} is not Hermitian: residual {residual:.3e}")]
    NotHermitian { which: &'static str, residual: f64 },
    #[error("control input must be finite")]
    NonFiniteControl,
}

/// Plant description: Hamiltonian pair, jump operators, initial state.
#[derive(Debug, Clone)]
pub struct PlantConfig {
    /// Drift Hamiltonian.
    pub h0: Matrix2,
    /// Control Hamiltonian, scaled by the scalar input u.
    pub h1: Matrix2,
    /// Jump operators of the dissipator; arbitrary matrices.
    pub jumps: Vec<Matrix2>,
    /// Initial density operator.
    pub rho0: DensityMatrix,
}

impl PlantConfig {
    pub fn new(
        h0: Matrix2,
        h1: Matrix2,
        jumps: Vec<Matrix2>,
        rho0: DensityMatrix,
    ) -> Result<Self, PlantError> {
        let p = Self { h0, h1, jumps, rho0 };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        for (which, m) in [("h0", &self.h0), ("h1", &self.h1)] {
            let residual = m.herm_residual();
            if !(residual <= TOL_HERM) {
                return Err(PlantError::NotHermitian { which, residual });
            }
        }
        Ok(())
    }
}

/// Total Hamiltonian H0 + u H1.
pub fn hamiltonian(plant: &PlantConfig, u: f64) -> Result<Matrix2, PlantError> {
    if !u.is_finite() {
        return Err(PlantError::NonFiniteControl);
    }
    Ok(hamiltonian_raw(plant, u))
}

fn hamiltonian_raw(plant: &PlantConfig, u: f64) -> Matrix2 {
    plant.h0 + plant.h1 * u
}

/// Master-equation right-hand side at state `rho` under control `u`.
///
/// Pure function on the raw matrix: integrator stage values (Hermitian only
/// to roundoff, trace only near one) are accepted as-is. Non-finite inputs
/// propagate into the output and are caught by the step-level scan.
pub fn lgks_rhs(plant: &PlantConfig, rho: &Matrix2, u: f64) -> Matrix2 {
    let h = hamiltonian_raw(plant, u);
    let mut rhs = commutator(&h, rho) * Complex64::new(0.0, -1.0);
    for l in &plant.jumps {
        let ld = l.adjoint();
        let gain = *l * *rho * ld;
        let ldl = ld * *l;
        rhs = rhs + gain - anticommutator(&ldl, rho) * 0.5;
    }
    rhs
}

/// Frobenius norm of the right-hand side at a validated state: zero exactly
/// at equilibria of the flow under constant control `u`.
pub fn equilibrium_residual(
    plant: &PlantConfig,
    rho: &DensityMatrix,
    u: f64,
) -> Result<f64, PlantError> {
    if !u.is_finite() {
        return Err(PlantError::NonFiniteControl);
    }
    Ok(lgks_rhs(plant, rho.matrix(), u).frobenius_norm())
}
