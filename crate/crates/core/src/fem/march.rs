//! Load ramp followed by maturation time marching.

use super::solver::{newton_solve, Bvp, GaussPointField};
use crate::error::{Error, Result};
use crate::growth::GrowthState;
use crate::tensor::SymTensor3;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Schedule {
    /// Equal load increments of the ramp (growth frozen).
    pub ramp_steps: usize,
    /// First maturation step, days.
    pub dt_initial: f64,
    /// Step growth factor after each converged step.
    pub dt_factor: f64,
    pub dt_max: f64,
    /// Bisection floor, days.
    pub dt_min: f64,
    pub t_end: f64,
    /// Maturation times at which full snapshots are kept (0 = end of ramp).
    pub snapshot_times: Vec<f64>,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            ramp_steps: 10,
            dt_initial: 0.002,
            dt_factor: 1.2,
            dt_max: 0.25,
            dt_min: 1e-6,
            t_end: 28.0,
            snapshot_times: vec![0.0, 7.0, 14.0, 21.0, 28.0],
        }
    }
}

impl Schedule {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Program(format!("schedule: {what}")));
        if self.ramp_steps == 0 {
            return bad("ramp_steps must be >= 1");
        }
        if !(self.dt_initial > 0.0 && self.dt_max >= self.dt_initial && self.dt_min > 0.0 && self.dt_min <= self.dt_initial) {
            return bad("need 0 < dt_min <= dt_initial <= dt_max");
        }
        if !(self.dt_factor >= 1.0) {
            return bad("dt_factor must be >= 1");
        }
        if !(self.t_end >= 0.0) {
            return bad("t_end must be >= 0");
        }
        if self.snapshot_times.iter().any(|&s| !(0.0..=self.t_end).contains(&s)) {
            return bad("snapshot times must lie in [0, t_end]");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Ramp,
    Maturation,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub phase: Phase,
    pub t: f64,
    pub load_factor: f64,
    pub max_deflection: f64,
    pub rho_min: f64,
    pub rho_max: f64,
    pub rho_mean: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub displacement: Vec<[f64; 3]>,
    pub rho_mean: Vec<f64>,
    pub sigma_mean: Vec<SymTensor3>,
    pub fiber_strain_mean: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct MaturationHistory {
    pub steps: Vec<StepRecord>,
    pub snapshots: Vec<Snapshot>,
    pub u: Vec<f64>,
    pub field: GaussPointField,
}

impl MaturationHistory {
    pub fn final_deflection(&self) -> f64 {
        self.steps.last().map_or(0.0, |s| s.max_deflection)
    }

    /// Maturation-phase records only.
    pub fn maturation(&self) -> impl Iterator<Item = &StepRecord> {
        self.steps.iter().filter(|s| s.phase == Phase::Maturation)
    }
}

/// Largest `|u_z|` over all nodes.
pub fn max_deflection(u: &[f64]) -> f64 {
    u.chunks(3).fold(0.0f64, |m, d| m.max(d[2].abs()))
}

fn snapshot(t: f64, u: &[f64], field: &GaussPointField) -> Snapshot {
    let n_el = field.states.len();
    Snapshot {
        t,
        displacement: u.chunks(3).map(|d| [d[0], d[1], d[2]]).collect(),
        rho_mean: (0..n_el).map(|e| field.element_rho(e)).collect(),
        sigma_mean: (0..n_el).map(|e| field.element_sigma(e)).collect(),
        fiber_strain_mean: (0..n_el).map(|e| field.element_fiber_strain(e)).collect(),
    }
}

fn take_snapshots(pending: &mut Vec<f64>, t: f64, u: &[f64], field: &GaussPointField, snaps: &mut Vec<Snapshot>) {
    while pending.first().is_some_and(|&s| s <= t + 1e-12) {
        pending.remove(0);
        snaps.push(snapshot(t, u, field));
    }
}

fn record(phase: Phase, t: f64, load_factor: f64, u: &[f64], field: &GaussPointField, iterations: usize) -> StepRecord {
    let (rho_min, rho_max, rho_mean) = field.rho_stats();
    StepRecord {
        phase,
        t,
        load_factor,
        max_deflection: max_deflection(u),
        rho_min,
        rho_max,
        rho_mean,
        iterations,
    }
}

/// Ramps the loads to full value with growth frozen, then marches maturation
/// time to `schedule.t_end`. Failed steps are bisected.
pub fn march_maturation(bvp: &Bvp) -> Result<MaturationHistory> {
    march_maturation_with(bvp, |_| {})
}

/// As [`march_maturation`], calling `observer` after every converged step.
pub fn march_maturation_with(bvp: &Bvp, mut observer: impl FnMut(&StepRecord)) -> Result<MaturationHistory> {
    bvp.validate()?;
    let sched = &bvp.schedule;
    let mut field = GaussPointField::new(bvp.mesh.n_elements(), GrowthState::with_density(bvp.initial_density));
    let mut u = vec![0.0; bvp.n_dofs()];
    let mut steps = Vec::new();
    let mut snapshots = Vec::new();

    // phase 1: load ramp
    let nominal = 1.0 / sched.ramp_steps as f64;
    let mut lf = 0.0;
    let mut inc = nominal;
    let min_inc = nominal / 1024.0;
    while lf < 1.0 {
        let target = (lf + inc).min(1.0);
        match newton_solve(bvp, &u, &field, 0.0, 0.0, target) {
            Ok(r) => {
                lf = target;
                u = r.u;
                field = r.field;
                let rec = record(Phase::Ramp, 0.0, lf, &u, &field, r.iterations);
                observer(&rec);
                steps.push(rec);
                inc = (inc * 2.0).min(nominal);
            }
            Err(e) if e.is_solver_failure() && inc > min_inc => inc *= 0.5,
            Err(e) => return Err(e),
        }
    }

    // phase 2: maturation
    let mut pending: Vec<f64> = sched.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    pending.dedup();
    take_snapshots(&mut pending, 0.0, &u, &field, &mut snapshots);

    let mut t = 0.0;
    let mut dt = sched.dt_initial;
    let eps = 1e-12 * sched.t_end.max(1.0);
    while t < sched.t_end - eps {
        let mut step = dt.min(sched.t_end - t);
        if let Some(&s) = pending.first() {
            if s > t + eps {
                step = step.min(s - t);
            }
        }
        let t_new = if (sched.t_end - (t + step)).abs() < eps { sched.t_end } else { t + step };
        match newton_solve(bvp, &u, &field, t_new - t, t_new, 1.0) {
            Ok(r) => {
                t = t_new;
                u = r.u;
                field = r.field;
                let rec = record(Phase::Maturation, t, 1.0, &u, &field, r.iterations);
                observer(&rec);
                steps.push(rec);
                take_snapshots(&mut pending, t, &u, &field, &mut snapshots);
                dt = (dt * sched.dt_factor).min(sched.dt_max);
            }
            Err(e) if e.is_solver_failure() && step * 0.5 >= sched.dt_min => dt = step * 0.5,
            Err(e) => return Err(e),
        }
    }
    Ok(MaturationHistory {
        steps,
        snapshots,
        u,
        field,
    })
}
