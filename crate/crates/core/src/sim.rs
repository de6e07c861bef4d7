//! Coupled plant/controller integration.
//!
//! The closed loop is flattened into a single real state vector and advanced
//! with fixed-step classical RK4. After every step the density matrix is
//! re-Hermitized and the covariance re-symmetrized; both projections are
//! O(eps) corrections of floating-point drift, and the pre-projection
//! Hermiticity residual is kept as a health signal on each record. The trace
//! is never renormalized, so trace drift measures integrator error honestly.

use thiserror::Error;

use crate::algebra::{DensityMatrix, Matrix2};
use crate::lindblad::{lgks_rhs, PlantConfig};
use crate::mat3::{self, Mat3, Vec3};
use crate::metrics::{bloch, entropy_from_eigenvalues, error_derivative, fidelity_2x2_clamped};
use crate::rcac::{
    control, oracle_derivatives, oracle_theta, rcac_derivatives, regressor, ControllerState,
    GainVector, OracleState, RcacConfig, RcacError, Regressor,
};

/// Flattened closed-loop state dimension.
///
/// Layout: rho re/im interleaved row-major `[0..8)`, error integral `8`,
/// dirty-derivative state `9`, filtered regressor `[10..13)`, filtered
/// control `13`, gains `[14..17)`, covariance row-major `[17..26)`.
pub const STATE_DIM: usize = 26;
/// [`STATE_DIM`] plus the information-form check state: normal matrix
/// row-major `[26..35)`, offset vector `[35..38)`.
pub const AUG_DIM: usize = 38;

/// Per-record trace residual bound |tr rho - 1|.
pub const TOL_RECORD_TRACE: f64 = 1e-9;
/// Per-record bound on the pre-projection Hermiticity residual.
pub const TOL_RECORD_HERM: f64 = 1e-9;
/// Per-record floor on the minimum eigenvalue of rho.
pub const MIN_EIG_FLOOR: f64 = -1e-7;
/// Explicit RK4 keeps the filter pole stable only for beta dt below ~2.785;
/// configs are rejected past this margin.
pub const MAX_BETA_DT: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DivergenceReason {
    NonFiniteState,
    NonFiniteControl,
    GainBlowup,
    CovarianceBlowup,
    PhysicalityLost,
    OracleSingular,
}

impl std::fmt::Display for DivergenceReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DivergenceReason::NonFiniteState => "non-finite state entry",
            DivergenceReason::NonFiniteControl => "non-finite control",
            DivergenceReason::GainBlowup => "gain norm past divergence limit",
            DivergenceReason::CovarianceBlowup => "covariance norm past divergence limit",
            DivergenceReason::PhysicalityLost => "density matrix left the physical set",
            DivergenceReason::OracleSingular => "information matrix not invertible",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("diverged at t = {t:.6}: {reason}")]
    Diverged {
        t: f64,
        reason: DivergenceReason,
        /// Last record that still passed validation, if any.
        last_valid: Option<Box<TrajectoryRecord>>,
    },
}

/// Integration horizon and tracking target.
#[derive(Clone, Debug)]
pub struct SimConfig {
    pub dt: f64,
    pub t_final: f64,
    /// Keep every k-th step (plus the initial state and the final step).
    pub record_every: usize,
    /// Dirty-derivative time constant.
    pub tau_d: f64,
    pub rho_d: DensityMatrix,
    /// Some(u): hold the control constant and freeze the adaptation.
    pub open_loop_u: Option<f64>,
}

impl SimConfig {
    /// Number of RK4 steps; valid only after [`SimConfig::validate`].
    pub fn n_steps(&self) -> usize {
        (self.t_final / self.dt).round() as usize
    }

    pub fn validate(&self, beta: f64) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::InvalidConfig(msg));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return bad(format!("t_final must be positive, got {}", self.t_final));
        }
        let ratio = self.t_final / self.dt;
        if (ratio - ratio.round()).abs() > 1e-6 {
            return bad(format!(
                "t_final = {} is not an integer multiple of dt = {}",
                self.t_final, self.dt
            ));
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if !(self.tau_d > 0.0 && self.tau_d.is_finite()) {
            return bad(format!("tau_d must be positive, got {}", self.tau_d));
        }
        if beta * self.dt > MAX_BETA_DT {
            return bad(format!(
                "beta dt = {:.3} exceeds the RK4 stability margin {MAX_BETA_DT}",
                beta * self.dt
            ));
        }
        if let Some(u) = self.open_loop_u {
            if !u.is_finite() {
                return bad(format!("open-loop control must be finite, got {u}"));
            }
        }
        Ok(())
    }
}

/// One recorded instant of the closed loop, flattened to plain reals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub t: f64,
    /// Tracking error 1 - F(rho, rho_d).
    pub e: f64,
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    pub u: f64,
    pub re_rho11: f64,
    pub re_rho12: f64,
    pub im_rho12: f64,
    pub re_rho22: f64,
    pub entropy: f64,
    pub bloch_x: f64,
    pub bloch_y: f64,
    pub bloch_z: f64,
    /// |tr rho - 1| at this instant.
    pub trace_residual: f64,
    /// Hermiticity drift of the step that landed here, before projection.
    pub herm_residual: f64,
    pub min_eig_rho: f64,
}

impl TrajectoryRecord {
    pub const FIELD_COUNT: usize = 17;

    pub fn values(&self) -> [f64; Self::FIELD_COUNT] {
        [
            self.t,
            self.e,
            self.kp,
            self.ki,
            self.kd,
            self.u,
            self.re_rho11,
            self.re_rho12,
            self.im_rho12,
            self.re_rho22,
            self.entropy,
            self.bloch_x,
            self.bloch_y,
            self.bloch_z,
            self.trace_residual,
            self.herm_residual,
            self.min_eig_rho,
        ]
    }

    pub fn from_values(v: [f64; Self::FIELD_COUNT]) -> Self {
        TrajectoryRecord {
            t: v[0],
            e: v[1],
            kp: v[2],
            ki: v[3],
            kd: v[4],
            u: v[5],
            re_rho11: v[6],
            re_rho12: v[7],
            im_rho12: v[8],
            re_rho22: v[9],
            entropy: v[10],
            bloch_x: v[11],
            bloch_y: v[12],
            bloch_z: v[13],
            trace_residual: v[14],
            herm_residual: v[15],
            min_eig_rho: v[16],
        }
    }

    pub fn rho(&self) -> Matrix2 {
        Matrix2::new([
            [
                crate::algebra::c(self.re_rho11, 0.0),
                crate::algebra::c(self.re_rho12, self.im_rho12),
            ],
            [
                crate::algebra::c(self.re_rho12, -self.im_rho12),
                crate::algebra::c(self.re_rho22, 0.0),
            ],
        ])
    }

    pub fn gains(&self) -> GainVector {
        GainVector {
            kp: self.kp,
            ki: self.ki,
            kd: self.kd,
        }
    }
}

/// Gains plus their information-form reconstruction at one record instant.
#[derive(Clone, Copy, Debug)]
pub struct OracleSample {
    pub t: f64,
    pub theta: GainVector,
    pub theta_oracle: GainVector,
    pub p: Mat3,
    pub a: Mat3,
    pub b: Vec3,
}

fn unpack_rho(y: &[f64]) -> Matrix2 {
    Matrix2::new([
        [
            crate::algebra::c(y[0], y[1]),
            crate::algebra::c(y[2], y[3]),
        ],
        [
            crate::algebra::c(y[4], y[5]),
            crate::algebra::c(y[6], y[7]),
        ],
    ])
}

fn pack_rho(m: &Matrix2, y: &mut [f64]) {
    y[0] = m.e[0][0].re;
    y[1] = m.e[0][0].im;
    y[2] = m.e[0][1].re;
    y[3] = m.e[0][1].im;
    y[4] = m.e[1][0].re;
    y[5] = m.e[1][0].im;
    y[6] = m.e[1][1].re;
    y[7] = m.e[1][1].im;
}

fn unpack_mat3(y: &[f64]) -> Mat3 {
    [
        [y[0], y[1], y[2]],
        [y[3], y[4], y[5]],
        [y[6], y[7], y[8]],
    ]
}

fn pack_mat3(m: &Mat3, y: &mut [f64]) {
    for i in 0..3 {
        for j in 0..3 {
            y[3 * i + j] = m[i][j];
        }
    }
}

fn unpack_controller(y: &[f64]) -> ControllerState {
    ControllerState {
        theta: GainVector {
            kp: y[14],
            ki: y[15],
            kd: y[16],
        },
        p: unpack_mat3(&y[17..26]),
        gamma: y[8],
        x_d: y[9],
        x_phi: [y[10], y[11], y[12]],
        x_u: y[13],
    }
}

struct LoopSignals {
    e: f64,
    x_d_dot: f64,
    phi: Regressor,
    u: f64,
}

/// Error, regressor, and control at a state, as the RHS sees them.
fn loop_signals(sim: &SimConfig, rho: &Matrix2, ctl: &ControllerState) -> LoopSignals {
    let e = 1.0 - fidelity_2x2_clamped(rho, sim.rho_d.matrix());
    let (edot, x_d_dot) = error_derivative(e, ctl.x_d, sim.tau_d);
    let phi = regressor(e, ctl.gamma, edot);
    let u = match sim.open_loop_u {
        Some(v) => v,
        None => control(&phi, &ctl.theta),
    };
    LoopSignals {
        e,
        x_d_dot,
        phi,
        u,
    }
}

fn map_rcac_err(err: RcacError) -> DivergenceReason {
    match err {
        RcacError::GainDivergence(_) => DivergenceReason::GainBlowup,
        RcacError::CovarianceDivergence(_) => DivergenceReason::CovarianceBlowup,
        RcacError::OracleIllConditioned(_) => DivergenceReason::OracleSingular,
        _ => DivergenceReason::NonFiniteState,
    }
}

/// Right-hand side of the flattened closed loop.
///
/// Open-loop mode holds u fixed and zeroes every controller derivative, so
/// only the plant evolves.
pub fn coupled_rhs(
    plant: &PlantConfig,
    rcac: &RcacConfig,
    sim: &SimConfig,
    y: &[f64; STATE_DIM],
) -> Result<[f64; STATE_DIM], DivergenceReason> {
    let rho = unpack_rho(&y[..8]).hermitize();
    let ctl = unpack_controller(y);
    let sig = loop_signals(sim, &rho, &ctl);
    if !sig.u.is_finite() {
        return Err(DivergenceReason::NonFiniteControl);
    }
    let rho_dot = lgks_rhs(plant, &rho, sig.u);

    let mut dy = [0.0_f64; STATE_DIM];
    pack_rho(&rho_dot, &mut dy[..8]);
    if sim.open_loop_u.is_none() {
        let d = rcac_derivatives(rcac, &ctl, sig.e, &sig.phi, sig.u).map_err(map_rcac_err)?;
        dy[8] = d.gamma_dot;
        dy[9] = sig.x_d_dot;
        dy[10] = d.x_phi_dot[0];
        dy[11] = d.x_phi_dot[1];
        dy[12] = d.x_phi_dot[2];
        dy[13] = d.x_u_dot;
        dy[14] = d.theta_dot.kp;
        dy[15] = d.theta_dot.ki;
        dy[16] = d.theta_dot.kd;
        pack_mat3(&d.p_dot, &mut dy[17..26]);
    }
    Ok(dy)
}

/// [`coupled_rhs`] extended with the information-form state (A, b).
pub fn augmented_rhs(
    plant: &PlantConfig,
    rcac: &RcacConfig,
    sim: &SimConfig,
    y: &[f64; AUG_DIM],
) -> Result<[f64; AUG_DIM], DivergenceReason> {
    let mut base = [0.0_f64; STATE_DIM];
    base.copy_from_slice(&y[..STATE_DIM]);
    let dbase = coupled_rhs(plant, rcac, sim, &base)?;

    let mut dy = [0.0_f64; AUG_DIM];
    dy[..STATE_DIM].copy_from_slice(&dbase);
    if sim.open_loop_u.is_none() {
        let rho = unpack_rho(&y[..8]).hermitize();
        let ctl = unpack_controller(&y[..STATE_DIM]);
        let sig = loop_signals(sim, &rho, &ctl);
        let orc = OracleState {
            a: unpack_mat3(&y[26..35]),
            b: [y[35], y[36], y[37]],
        };
        let d = oracle_derivatives(rcac, &orc, sig.e, &sig.phi, &ctl.x_phi, ctl.x_u);
        pack_mat3(&d.a_dot, &mut dy[26..35]);
        dy[35] = d.b_dot[0];
        dy[36] = d.b_dot[1];
        dy[37] = d.b_dot[2];
    }
    Ok(dy)
}

/// One classical RK4 step.
pub fn rk4_step<const N: usize, F>(
    rhs: &F,
    y: &[f64; N],
    dt: f64,
) -> Result<[f64; N], DivergenceReason>
where
    F: Fn(&[f64; N]) -> Result<[f64; N], DivergenceReason>,
{
    let k1 = rhs(y)?;
    let mut tmp = [0.0_f64; N];
    for i in 0..N {
        tmp[i] = y[i] + 0.5 * dt * k1[i];
    }
    let k2 = rhs(&tmp)?;
    for i in 0..N {
        tmp[i] = y[i] + 0.5 * dt * k2[i];
    }
    let k3 = rhs(&tmp)?;
    for i in 0..N {
        tmp[i] = y[i] + dt * k3[i];
    }
    let k4 = rhs(&tmp)?;
    let mut out = [0.0_f64; N];
    for i in 0..N {
        out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Re-Hermitize rho and re-symmetrize the covariance (and, in augmented
/// runs, the normal matrix) in place. Returns the pre-projection
/// Hermiticity residual of rho.
fn project_state<const N: usize>(y: &mut [f64; N]) -> f64 {
    let rho = unpack_rho(&y[..8]);
    let residual = rho.herm_residual();
    pack_rho(&rho.hermitize(), &mut y[..8]);
    let p = mat3::symmetrize(&unpack_mat3(&y[17..26]));
    pack_mat3(&p, &mut y[17..26]);
    if N == AUG_DIM {
        let a = mat3::symmetrize(&unpack_mat3(&y[26..35]));
        pack_mat3(&a, &mut y[26..35]);
    }
    residual
}

/// Build a record from a (projected) state. The error and control are
/// recomputed at the recorded state itself.
fn record_from_state(sim: &SimConfig, t: f64, y: &[f64], herm_residual: f64) -> TrajectoryRecord {
    let rho = unpack_rho(&y[..8]);
    let ctl = unpack_controller(&y[..STATE_DIM]);
    let sig = loop_signals(sim, &rho, &ctl);
    let b = bloch(&rho);
    let tr = rho.trace().re;
    let mean = 0.5 * tr;
    let disc = (0.5 * (rho.e[0][0].re - rho.e[1][1].re)).powi(2) + rho.e[0][1].norm_sqr();
    let half_gap = disc.max(0.0).sqrt();
    let eigs = [mean - half_gap, mean + half_gap];
    TrajectoryRecord {
        t,
        e: sig.e,
        kp: ctl.theta.kp,
        ki: ctl.theta.ki,
        kd: ctl.theta.kd,
        u: sig.u,
        re_rho11: rho.e[0][0].re,
        re_rho12: rho.e[0][1].re,
        im_rho12: rho.e[0][1].im,
        re_rho22: rho.e[1][1].re,
        entropy: entropy_from_eigenvalues(eigs),
        bloch_x: b.x,
        bloch_y: b.y,
        bloch_z: b.z,
        trace_residual: (tr - 1.0).abs(),
        herm_residual,
        min_eig_rho: eigs[0],
    }
}

fn check_record(rec: &TrajectoryRecord) -> Result<(), DivergenceReason> {
    if rec.trace_residual > TOL_RECORD_TRACE
        || rec.herm_residual > TOL_RECORD_HERM
        || rec.min_eig_rho < MIN_EIG_FLOOR
    {
        return Err(DivergenceReason::PhysicalityLost);
    }
    Ok(())
}

fn initial_state(plant: &PlantConfig, rcac: &RcacConfig, sim: &SimConfig) -> [f64; STATE_DIM] {
    let mut y = [0.0_f64; STATE_DIM];
    pack_rho(plant.rho0.matrix(), &mut y[..8]);
    let e0 = 1.0 - fidelity_2x2_clamped(plant.rho0.matrix(), sim.rho_d.matrix());
    let ctl = ControllerState::initial(rcac, e0);
    y[8] = ctl.gamma;
    y[9] = ctl.x_d;
    y[10] = ctl.x_phi[0];
    y[11] = ctl.x_phi[1];
    y[12] = ctl.x_phi[2];
    y[13] = ctl.x_u;
    y[14] = ctl.theta.kp;
    y[15] = ctl.theta.ki;
    y[16] = ctl.theta.kd;
    pack_mat3(&ctl.p, &mut y[17..26]);
    y
}

/// Fixed-step driver shared by the plain and augmented runs. Calls `emit`
/// on the initial state and on every record instant; the final step is
/// always recorded, with its time pinned to exactly `t_final`.
fn drive<const N: usize, F, R>(
    rhs: F,
    mut y: [f64; N],
    sim: &SimConfig,
    mut emit: R,
) -> Result<(), (f64, DivergenceReason)>
where
    F: Fn(&[f64; N]) -> Result<[f64; N], DivergenceReason>,
    R: FnMut(f64, &[f64; N], f64) -> Result<(), (f64, DivergenceReason)>,
{
    let n = sim.n_steps();
    project_state(&mut y);
    emit(0.0, &y, 0.0)?;
    for i in 1..=n {
        let t = if i == n { sim.t_final } else { i as f64 * sim.dt };
        y = rk4_step(&rhs, &y, sim.dt).map_err(|r| (t, r))?;
        let herm = project_state(&mut y);
        if !y.iter().all(|v| v.is_finite()) {
            return Err((t, DivergenceReason::NonFiniteState));
        }
        if i % sim.record_every == 0 || i == n {
            emit(t, &y, herm)?;
        }
    }
    Ok(())
}

/// Integrate the closed loop (or, with `open_loop_u` set, just the plant)
/// and return the recorded trajectory.
pub fn simulate(
    plant: &PlantConfig,
    rcac: &RcacConfig,
    sim: &SimConfig,
) -> Result<Vec<TrajectoryRecord>, SimError> {
    sim.validate(rcac.beta)?;
    rcac.validate()
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    plant
        .validate()
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;

    let mut records: Vec<TrajectoryRecord> =
        Vec::with_capacity(sim.n_steps() / sim.record_every + 2);
    let y0 = initial_state(plant, rcac, sim);
    let result = drive(
        |y| coupled_rhs(plant, rcac, sim, y),
        y0,
        sim,
        |t, y, herm| {
            let rec = record_from_state(sim, t, y, herm);
            check_record(&rec).map_err(|r| (t, r))?;
            records.push(rec);
            Ok(())
        },
    );
    match result {
        Ok(()) => Ok(records),
        Err((t, reason)) => Err(SimError::Diverged {
            t,
            reason,
            last_valid: records.last().copied().map(Box::new),
        }),
    }
}

/// [`simulate`], additionally integrating the information form (A, b) of
/// the same least-squares problem and sampling both gain trajectories at
/// each record instant. The oracle state is passive: it never feeds back,
/// so the trajectory matches [`simulate`] exactly.
pub fn simulate_with_oracle(
    plant: &PlantConfig,
    rcac: &RcacConfig,
    sim: &SimConfig,
) -> Result<(Vec<TrajectoryRecord>, Vec<OracleSample>), SimError> {
    sim.validate(rcac.beta)?;
    rcac.validate()
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    plant
        .validate()
        .map_err(|e| SimError::InvalidConfig(e.to_string()))?;

    let mut records: Vec<TrajectoryRecord> =
        Vec::with_capacity(sim.n_steps() / sim.record_every + 2);
    let mut samples: Vec<OracleSample> = Vec::with_capacity(records.capacity());

    let mut y0 = [0.0_f64; AUG_DIM];
    y0[..STATE_DIM].copy_from_slice(&initial_state(plant, rcac, sim));
    let orc0 = OracleState::initial(rcac).map_err(|e| SimError::InvalidConfig(e.to_string()))?;
    pack_mat3(&orc0.a, &mut y0[26..35]);

    let result = drive(
        |y| augmented_rhs(plant, rcac, sim, y),
        y0,
        sim,
        |t, y, herm| {
            let rec = record_from_state(sim, t, &y[..], herm);
            check_record(&rec).map_err(|r| (t, r))?;
            let orc = OracleState {
                a: unpack_mat3(&y[26..35]),
                b: [y[35], y[36], y[37]],
            };
            let theta_oracle =
                oracle_theta(&orc).map_err(|_| (t, DivergenceReason::OracleSingular))?;
            samples.push(OracleSample {
                t,
                theta: rec.gains(),
                theta_oracle,
                p: unpack_mat3(&y[17..26]),
                a: orc.a,
                b: orc.b,
            });
            records.push(rec);
            Ok(())
        },
    );
    match result {
        Ok(()) => Ok((records, samples)),
        Err((t, reason)) => Err(SimError::Diverged {
            t,
            reason,
            last_valid: records.last().copied().map(Box::new),
        }),
    }
}
