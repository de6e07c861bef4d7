//! Adaptive density tracking for a dissipative two-level quantum system.
//!
//! The plant is a Lindblad master equation with one control channel in the
//! Hamiltonian. A PID law acts on the fidelity error between the evolving
//! density operator and a fixed target, and the three gains are tuned online
//! by a continuous-time retrospective-cost adaptation with exponential
//! forgetting. Everything integrates as one coupled ODE with classical RK4.
//!
//! Layout:
//! - [`algebra`]: closed-form complex 2x2 matrix kernel (eig, PSD sqrt)
//! - [`mat3`]: small real 3-vector/matrix helpers for the adaptation law
//! - [`lindblad`]: plant right-hand side and equilibrium residual
//! - [`metrics`]: fidelity, error signal, entropy, Bloch coordinates
//! - [`rcac`]: gain adaptation ODEs plus an integral-form cross-check
//! - [`sim`]: the coupled RK4 loop and trajectory records
//! - [`scenario`], [`sweep`], [`config`], [`csvio`]: experiment harness
//! - [`verify`]: self-check suites behind `qdt verify`

pub mod algebra;
pub mod config;
pub mod csvio;
pub mod lindblad;
pub mod mat3;
pub mod metrics;
pub mod rcac;
pub mod scenario;
pub mod sim;
pub mod sweep;
pub mod verify;

pub use num_complex::Complex64;

pub use algebra::{AlgebraError, DensityMatrix, Matrix2};
pub use lindblad::PlantConfig;
pub use metrics::BlochPoint;
pub use rcac::{ControllerState, GainVector, RcacConfig};
pub use scenario::{preset, Scenario, ScenarioPreset};
pub use sim::{simulate, simulate_with_oracle, SimConfig, SimError, TrajectoryRecord};
pub use sweep::{jh_cost, run_sweep, select_best, SweepCell, SweepConfig};
