//! Time-domain simulation of the pulsed measurement cycle: trap on, trap
//! off (free evolution under gravity and the Casimir interaction), trap on
//! again, then trap on with velocity feedback.
//!
//! The axial coordinate `d` and the in-plane angle `θ` are integrated with a
//! BAOAB splitting: half kick, half drift, exact Ornstein–Uhlenbeck damping
//! step, half drift, half kick. Without damping this is velocity Verlet.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{G_ACCEL, K_B};
use crate::error::{Error, Result};
use crate::lifshitz::{CasimirField, RodGeometry, MIN_SEPARATION};
use crate::numerics::RunningStats;
use crate::sensing::{drag_coefficients, rotational_diffusion, Environment};
use crate::trap::{
    angular_potential, effective_intensity, equilibrium_with, optical_force, polarizability,
    torsional_stiffness, trap_frequencies, trap_potential, Polarizability, TrapConfig,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PulseSchedule {
    /// Trap switched off, s.
    pub t1: f64,
    /// Trap switched back on, s.
    pub t2: f64,
    /// Feedback switched on, s.
    pub t3: f64,
    pub t_end: f64,
    /// Velocity-feedback damping rate, 1/s. `None` picks one inverse axial
    /// trap period.
    pub feedback_gain: Option<f64>,
    pub timestep: f64,
}

impl Default for PulseSchedule {
    fn default() -> Self {
        PulseSchedule {
            t1: 10e-6,
            t2: 20e-6,
            t3: 40e-6,
            t_end: 60e-6,
            feedback_gain: None,
            timestep: 1e-9,
        }
    }
}

impl PulseSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.t1 && self.t1 < self.t2 && self.t2 < self.t3 && self.t3 < self.t_end) {
            return Err(Error::invalid("schedule needs 0 < t1 < t2 < t3 < t_end"));
        }
        if !(self.timestep > 0.0) {
            return Err(Error::invalid("timestep must be positive"));
        }
        if let Some(g) = self.feedback_gain {
            if !(g >= 0.0) {
                return Err(Error::invalid("feedback gain must be >= 0"));
            }
        }
        Ok(())
    }

    pub fn phase_at(&self, t: f64) -> Phase {
        if t < self.t1 {
            Phase::On
        } else if t < self.t2 {
            Phase::Off
        } else if t < self.t3 {
            Phase::On
        } else {
            Phase::OnFeedback
        }
    }

    pub fn off_duration(&self) -> f64 {
        self.t2 - self.t1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    On,
    Off,
    OnFeedback,
}

impl Phase {
    pub fn label(self) -> &'static str {
        match self {
            Phase::On => "on",
            Phase::Off => "off",
            Phase::OnFeedback => "on_feedback",
        }
    }

    pub fn laser_on(self) -> bool {
        self != Phase::Off
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub d: f64,
    pub v: f64,
    pub theta: f64,
    pub omega: f64,
    pub phase: Phase,
}

impl TrajectoryPoint {
    pub const CSV_HEADER: &'static str = "t_s,d_m,v_mps,theta_rad,omega_radps,phase";

    pub fn csv_row(&self) -> String {
        format!(
            "{:e},{:e},{:e},{:e},{:e},{}",
            self.t,
            self.d,
            self.v,
            self.theta,
            self.omega,
            self.phase.label()
        )
    }
}

pub fn write_trajectory_csv<W: Write>(mut out: W, rows: &[TrajectoryPoint]) -> std::io::Result<()> {
    writeln!(out, "{}", TrajectoryPoint::CSV_HEADER)?;
    for r in rows {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Everything the integrator needs apart from the Casimir field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSetup {
    pub schedule: PulseSchedule,
    pub trap: TrapConfig,
    pub rod: RodGeometry,
    /// Rod permittivity at the trapping wavelength.
    pub eps_optical: f64,
    pub env: Environment,
    /// Store every n-th step in the trajectory.
    pub record_every: usize,
}

impl Default for PulseSetup {
    fn default() -> Self {
        PulseSetup {
            schedule: PulseSchedule::default(),
            trap: TrapConfig::default(),
            rod: RodGeometry::default_silica(),
            eps_optical: 2.1,
            env: Environment::air_torr(1e-7),
            record_every: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub d: f64,
    pub v: f64,
    pub theta: f64,
    pub omega: f64,
}

/// How a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    /// The rod crossed the minimum separation; the trajectory stops there.
    SurfaceCapture { t: f64, d: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseRun {
    pub trajectory: Vec<TrajectoryPoint>,
    pub outcome: Outcome,
    pub initial: State,
    /// State at the moment the trap switches off and back on.
    pub off_start: Option<State>,
    pub off_end: Option<State>,
    /// Time average of the Casimir torque over the off window (trapezoid
    /// rule on the integration steps), N·m.
    pub off_mean_torque: Option<f64>,
    /// Net axial acceleration just after switch-off, m/s² (negative toward
    /// the plate).
    pub off_initial_acceleration: Option<f64>,
    pub feedback_gain: f64,
}

impl PulseRun {
    pub fn captured(&self) -> bool {
        matches!(self.outcome, Outcome::SurfaceCapture { .. })
    }

    /// Drop in separation across the off window, m (positive = toward plate).
    pub fn off_fall(&self) -> Option<f64> {
        Some(self.off_start?.d - self.off_end?.d)
    }

    pub fn off_angle_gain(&self) -> Option<f64> {
        Some(self.off_end?.theta - self.off_start?.theta)
    }
}

/// Resolved model for one run.
pub struct Model<'a> {
    setup: &'a PulseSetup,
    field: &'a dyn CasimirField,
    pol: Polarizability,
    mass: f64,
    inertia: f64,
    gamma_rot: f64,
    gamma_trans: f64,
    feedback_gain: f64,
}

impl<'a> Model<'a> {
    pub fn new(setup: &'a PulseSetup, field: &'a dyn CasimirField) -> Result<Self> {
        setup.schedule.validate()?;
        setup.trap.validate()?;
        setup.rod.validate()?;
        setup.env.validate()?;
        if setup.record_every == 0 {
            return Err(Error::invalid("record_every must be >= 1"));
        }
        let pol = polarizability(&setup.rod, setup.eps_optical)?;
        let freqs = trap_frequencies(&setup.trap, &setup.rod, &pol)?;
        let period = 2.0 * std::f64::consts::PI / freqs.omega_z.max(freqs.omega_r);
        if setup.schedule.timestep > period / 50.0 {
            return Err(Error::invalid(format!(
                "timestep {:e} s exceeds 1/50 of the trap period ({:e} s)",
                setup.schedule.timestep, period
            )));
        }
        let mass = setup.rod.mass();
        let inertia = setup.rod.moment_of_inertia();
        let gamma_rot = K_B * setup.env.temperature / rotational_diffusion(&setup.rod, &setup.env) / inertia;
        let gamma_trans = drag_coefficients(&setup.rod, &setup.env).0 / mass;
        let feedback_gain = setup
            .schedule
            .feedback_gain
            .unwrap_or(freqs.omega_z / (2.0 * std::f64::consts::PI));
        Ok(Model { setup, field, pol, mass, inertia, gamma_rot, gamma_trans, feedback_gain })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn inertia(&self) -> f64 {
        self.inertia
    }

    pub fn rotational_damping(&self) -> f64 {
        self.gamma_rot
    }

    /// `(d̈, θ̈)` from conservative forces and torques in `phase`.
    pub fn accelerations(&self, s: &State, phase: Phase) -> (f64, f64) {
        let trap = &self.setup.trap;
        let mut force = self.field.force(s.d, s.theta) - self.mass * G_ACCEL;
        let mut torque = self.field.torque(s.d, s.theta);
        if phase.laser_on() {
            force += optical_force(s.d, trap, &self.pol);
            let intensity = effective_intensity(s.d, trap);
            torque += angular_potential(s.theta - trap.polarization_angle, intensity, &self.pol).1;
        }
        (force / self.mass, torque / self.inertia)
    }

    /// Rest state with the trap on: axial and angular force balance.
    pub fn equilibrium(&self) -> Result<State> {
        let trap = &self.setup.trap;
        let theta_pol = trap.polarization_angle;
        let mut theta = theta_pol;
        let mut d = trap.center_distance;
        for _ in 0..4 {
            d = equilibrium_with(trap, &self.pol, |x| {
                self.field.force(x, theta) - self.mass * G_ACCEL
            })?;
            // optical torque is −(k_φ/2) sin 2(θ − θ_pol); solve with Newton
            let k_phi = torsional_stiffness(effective_intensity(d, trap), &self.pol);
            for _ in 0..20 {
                let m = self.field.torque(d, theta);
                let r = m - 0.5 * k_phi * (2.0 * (theta - theta_pol)).sin();
                let slope = -k_phi * (2.0 * (theta - theta_pol)).cos();
                let step = r / slope;
                theta -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
        }
        Ok(State { d, v: 0.0, theta, omega: 0.0 })
    }

    /// Runs the schedule from the trap-on equilibrium. With `seed`, gas
    /// collisions are modelled as Langevin kicks with matching damping in
    /// every phase; without it, gas damping acts on the angle only while the
    /// trap is on. `stop_at` ends the run early.
    pub fn run(&self, seed: Option<u64>, stream: u64, stop_at: Option<f64>) -> Result<PulseRun> {
        let initial = self.equilibrium()?;
        self.run_from(initial, seed, stream, stop_at)
    }

    /// As [`Model::run`], from an arbitrary starting state.
    pub fn run_from(&self, initial: State, seed: Option<u64>, stream: u64, stop_at: Option<f64>) -> Result<PulseRun> {
        let sched = &self.setup.schedule;
        let dt = sched.timestep;
        let t_stop = stop_at.unwrap_or(sched.t_end).min(sched.t_end);
        let n_steps = (t_stop / dt).round() as u64;
        let mut rng = seed.map(|s| {
            let mut r = ChaCha8Rng::seed_from_u64(s);
            r.set_stream(stream);
            r
        });
        let temperature = self.setup.env.temperature;

        let mut s = initial;
        let mut trajectory = Vec::with_capacity((n_steps / self.setup.record_every as u64 + 2) as usize);
        let mut phase = sched.phase_at(0.0);
        let mut acc = self.accelerations(&s, phase);
        trajectory.push(point(0.0, &s, phase));

        let mut off_start = None;
        let mut off_end = None;
        let mut off_torque_sum = 0.0;
        let mut off_initial_acceleration = None;
        let mut outcome = Outcome::Completed;
        let k_t1 = (sched.t1 / dt).round() as u64;
        let k_t2 = (sched.t2 / dt).round() as u64;

        for k in 0..n_steps {
            let t = k as f64 * dt;
            let new_phase = sched.phase_at(t + 0.5 * dt);
            if new_phase != phase {
                phase = new_phase;
                acc = self.accelerations(&s, phase);
            }
            if k == k_t1 {
                off_start = Some(s);
                off_initial_acceleration = Some(acc.0);
            }

            // B
            s.v += 0.5 * dt * acc.0;
            s.omega += 0.5 * dt * acc.1;
            // A
            s.d += 0.5 * dt * s.v;
            s.theta += 0.5 * dt * s.omega;
            // O
            let noisy = rng.is_some();
            let (gas_t, gas_r) = if noisy {
                (self.gamma_trans, self.gamma_rot)
            } else if phase.laser_on() {
                (0.0, self.gamma_rot)
            } else {
                (0.0, 0.0)
            };
            let fb = if phase == Phase::OnFeedback { self.feedback_gain } else { 0.0 };
            s.v *= (-(gas_t + fb) * dt).exp();
            s.omega *= (-(gas_r + fb) * dt).exp();
            if let Some(r) = rng.as_mut() {
                let xi_t: f64 = StandardNormal.sample(r);
                let xi_r: f64 = StandardNormal.sample(r);
                let ct = (-2.0 * gas_t * dt).exp();
                let cr = (-2.0 * gas_r * dt).exp();
                s.v += ((1.0 - ct) * K_B * temperature / self.mass).sqrt() * xi_t;
                s.omega += ((1.0 - cr) * K_B * temperature / self.inertia).sqrt() * xi_r;
            }
            // A
            s.d += 0.5 * dt * s.v;
            s.theta += 0.5 * dt * s.omega;
            // B
            let prev_torque = if phase == Phase::Off { Some(acc.1 * self.inertia) } else { None };
            acc = self.accelerations(&s, phase);
            s.v += 0.5 * dt * acc.0;
            s.omega += 0.5 * dt * acc.1;
            if let Some(m0) = prev_torque {
                off_torque_sum += 0.5 * (m0 + acc.1 * self.inertia);
            }

            let t_next = (k + 1) as f64 * dt;
            if k + 1 == k_t2 {
                off_end = Some(s);
            }
            if s.d < MIN_SEPARATION || !s.d.is_finite() {
                trajectory.push(point(t_next, &s, phase));
                outcome = Outcome::SurfaceCapture { t: t_next, d: s.d };
                break;
            }
            if (k + 1) % self.setup.record_every as u64 == 0 || k + 1 == n_steps {
                trajectory.push(point(t_next, &s, phase));
            }
        }

        let off_steps = k_t2.saturating_sub(k_t1);
        let off_mean_torque = (off_end.is_some() && off_steps > 0).then(|| off_torque_sum / off_steps as f64);
        Ok(PulseRun {
            trajectory,
            outcome,
            initial,
            off_start,
            off_end,
            off_mean_torque,
            off_initial_acceleration,
            feedback_gain: self.feedback_gain,
        })
    }

    /// Translational energy `½mv² + U_opt + mgd` (trap on, no Casimir
    /// potential), J.
    pub fn translational_energy(&self, s: &State) -> f64 {
        0.5 * self.mass * s.v * s.v
            + trap_potential(s.d, &self.setup.trap, &self.pol)
            + self.mass * G_ACCEL * s.d
    }

    /// Orientation energy `½Iω² + U_φ` with the trap on, J.
    pub fn rotational_energy(&self, s: &State) -> f64 {
        let trap = &self.setup.trap;
        let intensity = effective_intensity(s.d, trap);
        0.5 * self.inertia * s.omega * s.omega
            + angular_potential(s.theta - trap.polarization_angle, intensity, &self.pol).0
    }
}

fn point(t: f64, s: &State, phase: Phase) -> TrajectoryPoint {
    TrajectoryPoint { t, d: s.d, v: s.v, theta: s.theta, omega: s.omega, phase }
}

/// One full pulse cycle from the trap-on equilibrium.
pub fn simulate_pulse(setup: &PulseSetup, field: &dyn CasimirField, seed: Option<u64>) -> Result<PulseRun> {
    Model::new(setup, field)?.run(seed, 0, None)
}

/// `½ (M/I) t²`, the angle gained under a constant torque.
pub fn off_window_angle_gain(torque: f64, inertia: f64, t_off: f64) -> f64 {
    0.5 * torque / inertia * t_off * t_off
}

/// Result of one measurement cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleSummary {
    pub cycle: usize,
    pub delta_theta: f64,
    /// `I (ω(t₂) − ω(t₁)) / (t₂ − t₁)`, N·m.
    pub torque_est: f64,
    /// Casimir torque averaged along the same off window, N·m.
    pub torque_oracle: f64,
}

impl CycleSummary {
    pub const CSV_HEADER: &'static str = "cycle,delta_theta_rad,torque_est_Nm";

    pub fn csv_row(&self) -> String {
        format!("{},{:e},{:e}", self.cycle, self.delta_theta, self.torque_est)
    }
}

pub fn write_cycles_csv<W: Write>(mut out: W, rows: &[CycleSummary]) -> std::io::Result<()> {
    writeln!(out, "{}", CycleSummary::CSV_HEADER)?;
    for r in rows {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Runs `n` independent cycles (each up to the end of the off window) with
/// per-cycle random streams derived from `master_seed`.
pub fn run_cycles(
    setup: &PulseSetup,
    field: &dyn CasimirField,
    n: usize,
    master_seed: Option<u64>,
) -> Result<Vec<CycleSummary>> {
    let model = Model::new(setup, field)?;
    let sched = &setup.schedule;
    let inertia = model.inertia();
    (0..n)
        .into_par_iter()
        .map(|cycle| {
            let run = model.run(master_seed, cycle as u64, Some(sched.t2))?;
            match (run.outcome, run.off_start, run.off_end, run.off_mean_torque) {
                (Outcome::Completed, Some(a), Some(b), Some(oracle)) => Ok(CycleSummary {
                    cycle,
                    delta_theta: b.theta - a.theta,
                    torque_est: inertia * (b.omega - a.omega) / sched.off_duration(),
                    torque_oracle: oracle,
                }),
                (Outcome::SurfaceCapture { t, d }, ..) => Err(Error::Instability(format!(
                    "cycle {cycle}: surface capture at t = {t:e} s (d = {d:e} m)"
                ))),
                _ => Err(Error::Instability(format!("cycle {cycle} ended before the off window closed"))),
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleAverage {
    pub n_cycles: usize,
    pub torque: f64,
    pub std_error: f64,
    pub oracle_torque: f64,
    /// Accumulated off-window time, s.
    pub effective_time: f64,
}

/// Mean estimated torque over the first `n_cycles` summaries.
pub fn cycle_average(cycles: &[CycleSummary], n_cycles: usize, t_off: f64) -> Result<CycleAverage> {
    if n_cycles == 0 || n_cycles > cycles.len() {
        return Err(Error::invalid(format!(
            "need 1..={} cycles, got {n_cycles}",
            cycles.len()
        )));
    }
    let used = &cycles[..n_cycles];
    let est: RunningStats = used.iter().map(|c| c.torque_est).collect();
    let oracle: RunningStats = used.iter().map(|c| c.torque_oracle).collect();
    Ok(CycleAverage {
        n_cycles,
        torque: est.mean(),
        std_error: est.std_error(),
        oracle_torque: oracle.mean(),
        effective_time: n_cycles as f64 * t_off,
    })
}
