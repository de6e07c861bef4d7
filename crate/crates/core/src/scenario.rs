//! Stock configurations for the driven, lossy two-level plant.
//!
//! Two named scenarios share the same plant (detuned qubit with a single
//! decay channel, drive on the x axis) and differ only in the setpoint: a
//! nearly pure low-entropy target and a nearly maximally mixed high-entropy
//! target. All numbers here are plain data; every algorithm takes them as
//! arguments, so callers can override any field after loading a preset.

use std::str::FromStr;

use thiserror::Error;

use crate::algebra::{c, DensityMatrix, Matrix2};
use crate::lindblad::PlantConfig;
use crate::rcac::RcacConfig;
use crate::sim::SimConfig;
use crate::sweep::SweepConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    LowEntropy,
    HighEntropy,
}

impl Scenario {
    pub const ALL: [Scenario; 2] = [Scenario::LowEntropy, Scenario::HighEntropy];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::LowEntropy => "low_entropy",
            Scenario::HighEntropy => "high_entropy",
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown scenario {0:?}; expected \"low_entropy\" or \"high_entropy\"")]
pub struct UnknownScenario(String);

impl FromStr for Scenario {
    type Err = UnknownScenario;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "low_entropy" => Ok(Scenario::LowEntropy),
            "high_entropy" => Ok(Scenario::HighEntropy),
            other => Err(UnknownScenario(other.to_string())),
        }
    }
}

/// Everything needed to run a simulation or a sweep.
#[derive(Clone, Debug)]
pub struct ScenarioPreset {
    pub name: &'static str,
    pub plant: PlantConfig,
    pub rcac: RcacConfig,
    pub sim: SimConfig,
    pub sweep: SweepConfig,
    /// Constant drive whose steady state the scenario's target is meant to
    /// approximate; used by equilibrium checks, not by the controller.
    pub equilibrium_u: f64,
}

fn dm(e: [[num_complex::Complex64; 2]; 2]) -> DensityMatrix {
    DensityMatrix::new(Matrix2::new(e)).expect("preset target must be a valid state")
}

/// Stock configuration for a scenario.
pub fn preset(which: Scenario) -> ScenarioPreset {
    // Free Hamiltonian 0.5 diag(1, -1), drive 0.5 sigma_x, one decay
    // channel pumping |2> -> |1> at unit rate.
    let h0 = Matrix2::from_reals([[0.5, 0.0], [0.0, -0.5]]);
    let h1 = Matrix2::from_reals([[0.0, 0.5], [0.5, 0.0]]);
    let l1 = Matrix2::from_reals([[0.0, 1.0], [0.0, 0.0]]);
    let rho0 = dm([[c(0.4, 0.0), c(0.1, 0.3)], [c(0.1, -0.3), c(0.6, 0.0)]]);
    let plant =
        PlantConfig::new(h0, h1, vec![l1], rho0).expect("preset plant must validate");

    let rho_d = match which {
        Scenario::LowEntropy => dm([
            [c(0.8571, 0.0), c(0.2857, 0.1429)],
            [c(0.2857, -0.1429), c(0.1429, 0.0)],
        ]),
        Scenario::HighEntropy => dm([
            [c(0.5168, 0.0), c(0.0971, 0.0460)],
            [c(0.0971, -0.0460), c(0.4832, 0.0)],
        ]),
    };
    let equilibrium_u = match which {
        Scenario::LowEntropy => 1.0,
        Scenario::HighEntropy => 10.0,
    };

    let rcac = RcacConfig::with_uniform_p0(1.0, 1.0, 1e-3, 0.01, 2000.0)
        .expect("preset adaptation weights must validate");

    let sim = SimConfig {
        dt: 1e-4,
        t_final: 200.0,
        record_every: 100,
        tau_d: 0.01,
        rho_d,
        open_loop_u: None,
    };

    let sweep = SweepConfig {
        p0_scalars: (-5..=10).map(|k| 10f64.powi(k)).collect(),
        betas: vec![0.0, 1.0, 2.0, 5.0, 100.0, 2000.0],
        jh_window: (190.0, 200.0),
    };

    ScenarioPreset {
        name: which.name(),
        plant,
        rcac,
        sim,
        sweep,
        equilibrium_u,
    }
}
