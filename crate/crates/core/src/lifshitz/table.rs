use rayon::prelude::*;

use super::casimir::{AngularHarmonics, CasimirSolver};
use crate::error::{Error, Result};
use crate::numerics::{logspace, CubicSpline};

/// Casimir force and torque as functions of separation and angle, as seen by
/// the trajectory integrator.
pub trait CasimirField: Sync {
    /// N, negative toward the plate.
    fn force(&self, d: f64, theta: f64) -> f64;
    /// N·m.
    fn torque(&self, d: f64, theta: f64) -> f64;
}

/// No Casimir interaction.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoCasimir;

impl CasimirField for NoCasimir {
    fn force(&self, _d: f64, _theta: f64) -> f64 {
        0.0
    }
    fn torque(&self, _d: f64, _theta: f64) -> f64 {
        0.0
    }
}

/// Constant force and torque.
#[derive(Debug, Clone, Copy, Default)]
pub struct UniformTorque {
    pub force: f64,
    pub torque: f64,
}

impl CasimirField for UniformTorque {
    fn force(&self, _d: f64, _theta: f64) -> f64 {
        self.force
    }
    fn torque(&self, _d: f64, _theta: f64) -> f64 {
        self.torque
    }
}

/// Interpolation table of the Casimir interaction over separation.
///
/// At each separation the free energy is stored as its three θ-harmonics
/// `g₀ + g_c cos 2θ + g_s sin 2θ` (exact for this kernel), so only `d` needs
/// interpolating. Splines are taken in `ln d`.
#[derive(Debug, Clone)]
pub struct CasimirTable {
    d_min: f64,
    d_max: f64,
    length: f64,
    g_cos: CubicSpline,
    g_sin: CubicSpline,
    f0: CubicSpline,
    f_cos: CubicSpline,
    f_sin: CubicSpline,
    nodes: Vec<AngularHarmonics>,
}

impl CasimirTable {
    pub const DEFAULT_NODES: usize = 60;

    /// Builds the table on `n` log-spaced separations in `[d_min, d_max]`.
    pub fn build(
        solver: &CasimirSolver,
        d_min: f64,
        d_max: f64,
        n: usize,
        temperature: f64,
    ) -> Result<Self> {
        if !(d_min > 0.0 && d_max > d_min) || n < 4 {
            return Err(Error::invalid("table needs 0 < d_min < d_max and at least 4 nodes"));
        }
        let ds = logspace(d_min, d_max, n);
        let nodes = ds
            .par_iter()
            .enumerate()
            .map(|(index, &d)| {
                solver
                    .angular_harmonics(d, temperature)
                    .map_err(|e| Error::GridPoint { index, source: Box::new(e) })
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Self::from_nodes(nodes)
    }

    pub fn from_nodes(nodes: Vec<AngularHarmonics>) -> Result<Self> {
        if nodes.len() < 4 {
            return Err(Error::invalid("table needs at least 4 nodes"));
        }
        let x: Vec<f64> = nodes.iter().map(|h| h.d.ln()).collect();
        let spline = |f: fn(&AngularHarmonics) -> f64| {
            CubicSpline::new(x.clone(), nodes.iter().map(f).collect())
        };
        Ok(CasimirTable {
            d_min: nodes[0].d,
            d_max: nodes[nodes.len() - 1].d,
            length: nodes[0].length,
            g_cos: spline(|h| h.g_cos)?,
            g_sin: spline(|h| h.g_sin)?,
            f0: spline(|h| h.f0)?,
            f_cos: spline(|h| h.f_cos)?,
            f_sin: spline(|h| h.f_sin)?,
            nodes,
        })
    }

    pub fn nodes(&self) -> &[AngularHarmonics] {
        &self.nodes
    }

    pub fn d_range(&self) -> (f64, f64) {
        (self.d_min, self.d_max)
    }

    fn clamp(&self, d: f64) -> f64 {
        d.clamp(self.d_min, self.d_max).ln()
    }
}

impl CasimirField for CasimirTable {
    fn force(&self, d: f64, theta: f64) -> f64 {
        let x = self.clamp(d);
        let (s, c) = (2.0 * theta).sin_cos();
        self.f0.eval(x) + self.f_cos.eval(x) * c + self.f_sin.eval(x) * s
    }

    fn torque(&self, d: f64, theta: f64) -> f64 {
        let x = self.clamp(d);
        let (s, c) = (2.0 * theta).sin_cos();
        2.0 * self.length * (self.g_cos.eval(x) * s - self.g_sin.eval(x) * c)
    }
}
