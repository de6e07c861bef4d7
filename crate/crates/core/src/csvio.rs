//! CSV export/import for trajectories and sweep tables.
//!
//! Reals are written with 17 significant digits (`{:.16e}`), which
//! round-trips every finite f64 bitwise; infinities print as `inf`/`-inf`
//! and parse back. No quoting is ever needed: fields are plain numbers or
//! the literals `true`/`false`.

use thiserror::Error;

use crate::sim::TrajectoryRecord;
use crate::sweep::SweepCell;

pub const TRAJECTORY_HEADER: &str = "t,e,kp,ki,kd,u,re_rho11,re_rho12,im_rho12,re_rho22,\
entropy,bloch_x,bloch_y,bloch_z,trace_residual,herm_residual,min_eig_rho";

pub const SWEEP_HEADER: &str = "p0_scalar,beta,jh,converged";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CsvError {
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(line: usize, tok: &str) -> Result<f64, CsvError> {
    tok.parse::<f64>().map_err(|e| CsvError::Malformed {
        line,
        msg: format!("bad number {tok:?}: {e}"),
    })
}

pub fn trajectory_to_csv(records: &[TrajectoryRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 24 * TrajectoryRecord::FIELD_COUNT + 256);
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for rec in records {
        let vals = rec.values();
        for (i, v) in vals.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&fmt_f64(*v));
        }
        out.push('\n');
    }
    out
}

pub fn trajectory_from_csv(text: &str) -> Result<Vec<TrajectoryRecord>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == TRAJECTORY_HEADER => {}
        got => {
            return Err(CsvError::Malformed {
                line: 1,
                msg: format!("expected trajectory header, got {:?}", got.map(|(_, s)| s)),
            })
        }
    }
    let mut records = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = raw.split(',').collect();
        if toks.len() != TrajectoryRecord::FIELD_COUNT {
            return Err(CsvError::Malformed {
                line,
                msg: format!(
                    "expected {} fields, got {}",
                    TrajectoryRecord::FIELD_COUNT,
                    toks.len()
                ),
            });
        }
        let mut vals = [0.0_f64; TrajectoryRecord::FIELD_COUNT];
        for (slot, tok) in vals.iter_mut().zip(&toks) {
            *slot = parse_f64(line, tok)?;
        }
        records.push(TrajectoryRecord::from_values(vals));
    }
    Ok(records)
}

pub fn sweep_to_csv(cells: &[SweepCell]) -> String {
    let mut out = String::with_capacity(cells.len() * 80 + 64);
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for cell in cells {
        out.push_str(&fmt_f64(cell.p0_scalar));
        out.push(',');
        out.push_str(&fmt_f64(cell.beta));
        out.push(',');
        out.push_str(&fmt_f64(cell.jh));
        out.push(',');
        out.push_str(if cell.converged { "true" } else { "false" });
        out.push('\n');
    }
    out
}

pub fn sweep_from_csv(text: &str) -> Result<Vec<SweepCell>, CsvError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == SWEEP_HEADER => {}
        got => {
            return Err(CsvError::Malformed {
                line: 1,
                msg: format!("expected sweep header, got {:?}", got.map(|(_, s)| s)),
            })
        }
    }
    let mut cells = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = raw.split(',').collect();
        if toks.len() != 4 {
            return Err(CsvError::Malformed {
                line,
                msg: format!("expected 4 fields, got {}", toks.len()),
            });
        }
        let converged = match toks[3].trim_end() {
            "true" => true,
            "false" => false,
            other => {
                return Err(CsvError::Malformed {
                    line,
                    msg: format!("bad converged flag {other:?}"),
                })
            }
        };
        cells.push(SweepCell {
            p0_scalar: parse_f64(line, toks[0])?,
            beta: parse_f64(line, toks[1])?,
            jh: parse_f64(line, toks[2])?,
            converged,
        });
    }
    Ok(cells)
}
