use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::casimir::{CasimirResult, CasimirSolver};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub d: f64,
    pub theta: f64,
    pub temperature: f64,
}

/// One varying axis with the other two held fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", content = "values", rename_all = "snake_case")]
pub enum SweepGrid {
    Separation(Vec<f64>),
    Angle(Vec<f64>),
    Temperature(Vec<f64>),
}

impl SweepGrid {
    pub fn values(&self) -> &[f64] {
        match self {
            SweepGrid::Separation(v) | SweepGrid::Angle(v) | SweepGrid::Temperature(v) => v,
        }
    }

    /// Expands the grid around the fixed `(d, theta, T)`.
    pub fn points(&self, d: f64, theta: f64, temperature: f64) -> Result<Vec<SweepPoint>> {
        let v = self.values();
        if v.is_empty() {
            return Err(Error::invalid("sweep grid is empty"));
        }
        let increasing = v.windows(2).all(|w| w[1] > w[0]);
        let decreasing = v.windows(2).all(|w| w[1] < w[0]);
        if !(increasing || decreasing) {
            return Err(Error::invalid("sweep grid must be strictly monotone"));
        }
        Ok(v.iter()
            .map(|&x| match self {
                SweepGrid::Separation(_) => SweepPoint { d: x, theta, temperature },
                SweepGrid::Angle(_) => SweepPoint { d, theta: x, temperature },
                SweepGrid::Temperature(_) => SweepPoint { d, theta, temperature: x },
            })
            .collect())
    }
}

/// Evaluates every point; the first failing point (lowest index) is reported.
pub fn sweep(solver: &CasimirSolver, points: &[SweepPoint]) -> Result<Vec<CasimirResult>> {
    points
        .par_iter()
        .enumerate()
        .map(|(index, p)| {
            solver
                .evaluate(p.d, p.theta, p.temperature)
                .map_err(|e| Error::GridPoint { index, source: Box::new(e) })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

pub fn write_csv<W: Write>(mut out: W, rows: &[CasimirResult]) -> std::io::Result<()> {
    writeln!(out, "{}", CasimirResult::CSV_HEADER)?;
    for r in rows {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}
