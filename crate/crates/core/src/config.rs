//! Plain-text config overlays.
//!
//! A config file is a flat list of `key = value` lines layered on top of a
//! scenario preset; any field not mentioned keeps its preset value. `#`
//! starts a comment, blank lines are ignored. Matrix values are eight
//! whitespace-separated reals, row-major, real part then imaginary part for
//! each entry. Lists are whitespace-separated reals.

use thiserror::Error;

use crate::algebra::{c, DensityMatrix, Matrix2};
use crate::mat3;
use crate::rcac::RcacError;
use crate::scenario::ScenarioPreset;
use crate::sim::SimError;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key {key:?}")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value for {key}: {msg}")]
    Value {
        line: usize,
        key: String,
        msg: String,
    },
    #[error(transparent)]
    Rcac(#[from] RcacError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("plant rejected: {0}")]
    Plant(String),
}

fn parse_reals(line: usize, key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value
        .split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|e| ConfigError::Value {
                line,
                key: key.to_string(),
                msg: format!("{tok:?}: {e}"),
            })
        })
        .collect()
}

fn parse_one(line: usize, key: &str, value: &str) -> Result<f64, ConfigError> {
    let vals = parse_reals(line, key, value)?;
    if vals.len() != 1 {
        return Err(ConfigError::Value {
            line,
            key: key.to_string(),
            msg: format!("expected one number, got {}", vals.len()),
        });
    }
    Ok(vals[0])
}

fn parse_usize(line: usize, key: &str, value: &str) -> Result<usize, ConfigError> {
    value.trim().parse::<usize>().map_err(|e| ConfigError::Value {
        line,
        key: key.to_string(),
        msg: format!("{value:?}: {e}"),
    })
}

fn parse_matrix(line: usize, key: &str, value: &str) -> Result<Matrix2, ConfigError> {
    let v = parse_reals(line, key, value)?;
    if v.len() != 8 {
        return Err(ConfigError::Value {
            line,
            key: key.to_string(),
            msg: format!("expected 8 reals (row-major re/im pairs), got {}", v.len()),
        });
    }
    Ok(Matrix2::new([
        [c(v[0], v[1]), c(v[2], v[3])],
        [c(v[4], v[5]), c(v[6], v[7])],
    ]))
}

fn parse_density(line: usize, key: &str, value: &str) -> Result<DensityMatrix, ConfigError> {
    DensityMatrix::new(parse_matrix(line, key, value)?).map_err(|e| ConfigError::Value {
        line,
        key: key.to_string(),
        msg: e.to_string(),
    })
}

/// Apply `key = value` overrides to a preset, then re-validate the plant,
/// controller, and simulation settings.
pub fn apply_config_text(preset: &mut ScenarioPreset, text: &str) -> Result<(), ConfigError> {
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        if stripped.trim().is_empty() {
            continue;
        }
        let Some((key, value)) = stripped.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: stripped.trim().to_string(),
            });
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "plant.h0" => preset.plant.h0 = parse_matrix(line, key, value)?,
            "plant.h1" => preset.plant.h1 = parse_matrix(line, key, value)?,
            "plant.l1" => preset.plant.jumps = vec![parse_matrix(line, key, value)?],
            "plant.rho0" => preset.plant.rho0 = parse_density(line, key, value)?,
            "target.rho_d" => preset.sim.rho_d = parse_density(line, key, value)?,
            "sim.dt" => preset.sim.dt = parse_one(line, key, value)?,
            "sim.t_final" => preset.sim.t_final = parse_one(line, key, value)?,
            "sim.record_every" => preset.sim.record_every = parse_usize(line, key, value)?,
            "sim.tau_d" => preset.sim.tau_d = parse_one(line, key, value)?,
            "rcac.rz" => preset.rcac.rz = parse_one(line, key, value)?,
            "rcac.ru" => preset.rcac.ru = parse_one(line, key, value)?,
            "rcac.lambda" => preset.rcac.lambda = parse_one(line, key, value)?,
            "rcac.p0_scalar" => {
                preset.rcac.p0 = mat3::scaled_identity(parse_one(line, key, value)?)
            }
            "rcac.beta" => preset.rcac.beta = parse_one(line, key, value)?,
            "sweep.p0_scalars" => preset.sweep.p0_scalars = parse_reals(line, key, value)?,
            "sweep.betas" => preset.sweep.betas = parse_reals(line, key, value)?,
            "sweep.jh_window" => {
                let v = parse_reals(line, key, value)?;
                if v.len() != 2 {
                    return Err(ConfigError::Value {
                        line,
                        key: key.to_string(),
                        msg: format!("expected 2 reals, got {}", v.len()),
                    });
                }
                preset.sweep.jh_window = (v[0], v[1]);
            }
            other => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: other.to_string(),
                })
            }
        }
    }
    preset
        .plant
        .validate()
        .map_err(|e| ConfigError::Plant(e.to_string()))?;
    preset.rcac.validate()?;
    preset.sim.validate(preset.rcac.beta)?;
    // The sweep grid is deliberately not validated here: a config that only
    // shortens a simulation run (say sim.t_final = 1) would otherwise be
    // rejected because the untouched default cost window no longer fits.
    // run_sweep validates the grid against the simulation before using it.
    Ok(())
}
