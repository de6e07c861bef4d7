//! Hyperparameter sweep over the adaptation's initial covariance and
//! filter pole, scored by the late-window tracking cost.
//!
//! Each grid cell reruns the full closed loop from scratch; cells are
//! independent, so they run in parallel. A diverged cell is kept in the
//! table with an infinite cost rather than aborting the sweep.

use rayon::prelude::*;
use thiserror::Error;

use crate::lindblad::PlantConfig;
use crate::mat3;
use crate::rcac::RcacConfig;
use crate::sim::{simulate, SimConfig, SimError, TrajectoryRecord, MAX_BETA_DT};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("sweep grid is invalid: {0}")]
    InvalidGrid(String),
    #[error("cost window [{lo}, {hi}] is not covered by the recorded trajectory")]
    WindowNotCovered { lo: f64, hi: f64 },
    #[error("cost window holds fewer than two records")]
    WindowTooSparse,
    #[error("every sweep cell diverged")]
    AllDiverged,
}

/// Grid of initial covariance scales and filter poles, plus the averaging
/// window for the cost.
#[derive(Clone, Debug)]
pub struct SweepConfig {
    /// P0 = scalar * identity, one cell per scalar; all positive.
    pub p0_scalars: Vec<f64>,
    /// Filter poles; all nonnegative and stable at the configured step.
    pub betas: Vec<f64>,
    /// Cost window (lo, hi) in seconds; both ends must land on record
    /// instants.
    pub jh_window: (f64, f64),
}

impl SweepConfig {
    pub fn validate(&self, sim: &SimConfig) -> Result<(), SweepError> {
        let bad = |msg: String| Err(SweepError::InvalidGrid(msg));
        if self.p0_scalars.is_empty() || self.betas.is_empty() {
            return bad("p0_scalars and betas must be non-empty".into());
        }
        for &p0 in &self.p0_scalars {
            if !(p0 > 0.0 && p0.is_finite()) {
                return bad(format!("p0 scalar must be positive, got {p0}"));
            }
        }
        for &beta in &self.betas {
            if !(beta >= 0.0 && beta.is_finite()) {
                return bad(format!("beta must be nonnegative, got {beta}"));
            }
            if beta * sim.dt > MAX_BETA_DT {
                return bad(format!(
                    "beta = {beta} is unstable at dt = {}: beta dt > {MAX_BETA_DT}",
                    sim.dt
                ));
            }
        }
        let (lo, hi) = self.jh_window;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
            return bad(format!("cost window [{lo}, {hi}] is not an interval"));
        }
        if hi > sim.t_final + 1e-9 {
            return bad(format!(
                "cost window end {hi} exceeds t_final = {}",
                sim.t_final
            ));
        }
        let stride = sim.dt * sim.record_every as f64;
        let aligned = |x: f64| {
            let r = x / stride;
            (r - r.round()).abs() < 1e-6
        };
        if !aligned(lo) || !(aligned(hi) || (hi - sim.t_final).abs() < 1e-9) {
            return bad(format!(
                "cost window [{lo}, {hi}] must land on record instants (stride {stride})"
            ));
        }
        Ok(())
    }
}

/// One grid cell's outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepCell {
    pub p0_scalar: f64,
    pub beta: f64,
    /// Integral of |e| over the cost window; infinite if the run diverged.
    pub jh: f64,
    pub converged: bool,
}

/// Trapezoid integral of |e| over records inside the window. The records
/// must reach both window ends (each within 1e-9 s).
pub fn jh_cost(records: &[TrajectoryRecord], window: (f64, f64)) -> Result<f64, SweepError> {
    let (lo, hi) = window;
    let inside: Vec<&TrajectoryRecord> = records
        .iter()
        .filter(|r| r.t >= lo - 1e-9 && r.t <= hi + 1e-9)
        .collect();
    if inside.len() < 2 {
        return Err(SweepError::WindowTooSparse);
    }
    let first = inside.first().unwrap().t;
    let last = inside.last().unwrap().t;
    if first > lo + 1e-9 || last < hi - 1e-9 {
        return Err(SweepError::WindowNotCovered { lo, hi });
    }
    let mut acc = 0.0;
    for pair in inside.windows(2) {
        let dt = pair[1].t - pair[0].t;
        acc += 0.5 * (pair[0].e.abs() + pair[1].e.abs()) * dt;
    }
    Ok(acc)
}

fn run_cell(
    plant: &PlantConfig,
    base: &RcacConfig,
    sim: &SimConfig,
    window: (f64, f64),
    p0_scalar: f64,
    beta: f64,
) -> Result<SweepCell, SweepError> {
    let rcac = RcacConfig {
        p0: mat3::scaled_identity(p0_scalar),
        beta,
        ..base.clone()
    };
    match simulate(plant, &rcac, sim) {
        Ok(records) => {
            let jh = jh_cost(&records, window)?;
            Ok(SweepCell {
                p0_scalar,
                beta,
                jh,
                converged: true,
            })
        }
        Err(SimError::Diverged { .. }) => Ok(SweepCell {
            p0_scalar,
            beta,
            jh: f64::INFINITY,
            converged: false,
        }),
        Err(SimError::InvalidConfig(msg)) => Err(SweepError::InvalidGrid(msg)),
    }
}

/// Run every (p0, beta) cell, in parallel, in row-major order (p0 outer,
/// beta inner). Divergence marks the cell; it does not abort the sweep.
pub fn run_sweep(
    plant: &PlantConfig,
    base: &RcacConfig,
    sim: &SimConfig,
    sweep: &SweepConfig,
) -> Result<Vec<SweepCell>, SweepError> {
    sweep.validate(sim)?;
    let pairs: Vec<(f64, f64)> = sweep
        .p0_scalars
        .iter()
        .flat_map(|&p0| sweep.betas.iter().map(move |&b| (p0, b)))
        .collect();
    pairs
        .par_iter()
        .map(|&(p0, beta)| run_cell(plant, base, sim, sweep.jh_window, p0, beta))
        .collect()
}

/// Converged cell with the smallest cost; ties prefer the smaller p0, then
/// the smaller beta.
pub fn select_best(cells: &[SweepCell]) -> Result<&SweepCell, SweepError> {
    let mut best: Option<&SweepCell> = None;
    for cell in cells.iter().filter(|c| c.converged && c.jh.is_finite()) {
        best = Some(match best {
            None => cell,
            Some(b) => {
                let better = cell.jh < b.jh
                    || (cell.jh == b.jh
                        && (cell.p0_scalar < b.p0_scalar
                            || (cell.p0_scalar == b.p0_scalar && cell.beta < b.beta)));
                if better {
                    cell
                } else {
                    b
                }
            }
        });
    }
    best.ok_or(SweepError::AllDiverged)
}
