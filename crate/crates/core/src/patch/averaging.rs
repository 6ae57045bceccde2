use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PatchConfig, RadialFieldTable};
use crate::error::{Error, Result};
use crate::numerics::maximize_golden;
use crate::trap::Polarizability;

/// `(1/N) Σᵢ M(x + iL/N)`.
pub fn average_1d<F: Fn(f64) -> f64>(x: f64, n: usize, l: f64, profile: F) -> f64 {
    let step = l / n as f64;
    (0..n).map(|i| profile(x + step * i as f64)).sum::<f64>() / n as f64
}

/// `(1/K²) Σᵢⱼ M(x + iL/K, y + jL/K)`.
pub fn average_2d<F: Fn(f64, f64) -> f64>(x: f64, y: f64, k: usize, l: f64, field: F) -> f64 {
    let step = l / k as f64;
    let mut total = 0.0;
    for j in 0..k {
        for i in 0..k {
            total += field(x + step * i as f64, y + step * j as f64);
        }
    }
    total / (k * k) as f64
}

/// Start offset in `[0, L/N)` maximising `|average_1d|`, and that maximum.
pub fn max_average_1d<F>(n: usize, l: f64, scan: usize, profile: F) -> (f64, f64)
where
    F: Fn(f64) -> f64 + Sync,
{
    let cell = l / n as f64;
    let step = cell / scan as f64;
    let abs_avg = |x: f64| average_1d(x, n, l, &profile).abs();
    let (i_best, _) = (0..scan)
        .into_par_iter()
        .map(|i| (i, abs_avg(i as f64 * step)))
        .reduce(|| (0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a });
    let centre = i_best as f64 * step;
    let (lo, hi) = ((centre - step).max(0.0), (centre + step).min(cell));
    let (x, v) = maximize_golden(abs_avg, lo, hi, 1e-6 * step);
    if v >= abs_avg(centre) {
        (x, v)
    } else {
        (centre, abs_avg(centre))
    }
}

/// Start offset in `[0, L/K)²` maximising `|average_2d|`, and that maximum.
pub fn max_average_2d<F>(k: usize, l: f64, scan: usize, field: F) -> ((f64, f64), f64)
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    let cell = l / k as f64;
    let step = cell / scan as f64;
    let abs_avg = |x: f64, y: f64| average_2d(x, y, k, l, &field).abs();
    let (idx, _) = (0..scan * scan)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx % scan, idx / scan);
            (idx, abs_avg(i as f64 * step, j as f64 * step))
        })
        .reduce(|| (0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 || (b.1 == a.1 && b.0 < a.0) { b } else { a });
    let (mut x, mut y) = ((idx % scan) as f64 * step, (idx / scan) as f64 * step);
    let mut best = abs_avg(x, y);
    // coordinate refinement inside the winning scan cell
    for _ in 0..3 {
        let (nx, vx) = maximize_golden(|t| abs_avg(t, y), (x - step).max(0.0), (x + step).min(cell), 1e-6 * step);
        if vx > best {
            x = nx;
            best = vx;
        }
        let (ny, vy) = maximize_golden(|t| abs_avg(x, t), (y - step).max(0.0), (y + step).min(cell), 1e-6 * step);
        if vy > best {
            y = ny;
            best = vy;
        }
    }
    ((x, y), best)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AverageMode {
    #[serde(rename = "1d")]
    OneD,
    #[serde(rename = "2d")]
    TwoD,
}

impl AverageMode {
    pub fn label(self) -> &'static str {
        match self {
            AverageMode::OneD => "1D",
            AverageMode::TwoD => "2D",
        }
    }
}

/// Patch averaging set-up. Measurement positions run over `[0, L)` per
/// axis with the patch centre at `L/2`; 1-D scans run along x at a fixed
/// distance `line_y` from the patch centre.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PatchAveraging {
    pub patch: PatchConfig,
    /// Height above the plate, m.
    pub z: f64,
    /// Measurement range per axis, m.
    pub range: f64,
    pub line_y: f64,
    /// Offsets sampled per axis before local refinement.
    pub scan_1d: usize,
    pub scan_2d: usize,
}

impl Default for PatchAveraging {
    fn default() -> Self {
        PatchAveraging {
            patch: PatchConfig::default(),
            z: 266e-9,
            range: 10e-6,
            line_y: 1.77e-6,
            scan_1d: 2048,
            scan_2d: 96,
        }
    }
}

impl PatchAveraging {
    pub fn validate(&self) -> Result<()> {
        self.patch.validate()?;
        if !(self.z > 0.0) || !(self.range > 0.0) {
            return Err(Error::invalid("averaging needs positive height and range"));
        }
        if self.scan_1d < 2 || self.scan_2d < 2 {
            return Err(Error::invalid("offset scans need at least 2 samples"));
        }
        Ok(())
    }

    /// Field table covering every measurement position.
    pub fn table(&self) -> Result<RadialFieldTable> {
        self.validate()?;
        let half = 0.5 * self.range;
        let extent = half.hypot(half).max(half.hypot(self.line_y)).max(self.patch.r0) * 1.05;
        RadialFieldTable::build(&self.patch, self.z, extent, RadialFieldTable::DEFAULT_SPACING)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuppressionRow {
    pub n: usize,
    pub mode: AverageMode,
    pub max_avg_torque: f64,
}

impl SuppressionRow {
    pub const CSV_HEADER: &'static str = "N,mode,max_avg_torque_Nm";

    pub fn csv_row(&self) -> String {
        format!("{},{},{:e}", self.n, self.mode.label(), self.max_avg_torque)
    }

    pub fn write_csv<W: Write>(mut out: W, rows: &[SuppressionRow]) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        for r in rows {
            writeln!(out, "{}", r.csv_row())?;
        }
        Ok(())
    }
}

/// Largest averaged patch torque over all start offsets, per measurement
/// count. In 2-D mode each `N` must be a perfect square.
pub fn suppression_curve(
    ns: &[usize],
    mode: AverageMode,
    setup: &PatchAveraging,
    pol: &Polarizability,
) -> Result<Vec<SuppressionRow>> {
    let table = setup.table()?;
    suppression_curve_with(ns, mode, setup, pol, &table)
}

pub(crate) fn suppression_curve_with(
    ns: &[usize],
    mode: AverageMode,
    setup: &PatchAveraging,
    pol: &Polarizability,
    table: &RadialFieldTable,
) -> Result<Vec<SuppressionRow>> {
    let half = 0.5 * setup.range;
    ns.iter()
        .map(|&n| {
            if n == 0 {
                return Err(Error::invalid("measurement count must be >= 1"));
            }
            let value = match mode {
                AverageMode::OneD => {
                    let profile = |u: f64| table.torque(u - half, setup.line_y, pol);
                    max_average_1d(n, setup.range, setup.scan_1d, profile).1
                }
                AverageMode::TwoD => {
                    let k = (n as f64).sqrt().round() as usize;
                    if k * k != n {
                        return Err(Error::invalid(format!("2-D averaging needs a square N, got {n}")));
                    }
                    let field = |u: f64, v: f64| table.torque(u - half, v - half, pol);
                    max_average_2d(k, setup.range, setup.scan_2d, field).1
                }
            };
            Ok(SuppressionRow { n, mode, max_avg_torque: value })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_point_is_identity() {
        let f = |x: f64| x.sin() + 2.0;
        assert_eq!(average_1d(0.3, 1, 5.0, f), f(0.3));
        let g = |x: f64, y: f64| x * y + 1.0;
        assert_eq!(average_2d(0.3, 0.7, 1, 5.0, g), g(0.3, 0.7));
    }

    #[test]
    fn constant_profile_is_preserved() {
        for n in [1, 2, 7, 30] {
            assert_relative_eq!(average_1d(0.1, n, 10.0, |_| 3.5), 3.5, max_relative = 1e-14);
            assert_relative_eq!(average_2d(0.1, 0.2, n, 10.0, |_, _| 3.5), 3.5, max_relative = 1e-14);
        }
        assert_eq!(average_2d(0.0, 0.0, 4, 1.0, |_, _| 0.0), 0.0);
    }

    #[test]
    fn averaging_is_linear() {
        let f = |x: f64| (3.0 * x).cos();
        let g = |x: f64| x * x;
        let both = average_1d(0.2, 9, 4.0, |x| 2.0 * f(x) - g(x));
        assert_relative_eq!(both, 2.0 * average_1d(0.2, 9, 4.0, f) - average_1d(0.2, 9, 4.0, g), max_relative = 1e-12);
    }

    #[test]
    fn max_search_finds_peak() {
        // narrow bump at 0.3 inside the first cell
        let bump = |x: f64| (-((x - 0.3) / 0.01).powi(2)).exp();
        let (x, v) = max_average_1d(1, 1.0, 200, bump);
        assert!((x - 0.3).abs() < 1e-6);
        assert_relative_eq!(v, 1.0, max_relative = 1e-9);
    }
}
