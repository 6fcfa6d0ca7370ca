//! Homogeneous material-point driver.
//!
//! Drives a single material point through a diagonal stretch history. Each axis
//! is either stretch-controlled or held at zero normal stress; the free
//! stretches are found by Newton iteration on the consistent tangent. Growth is
//! advanced with the step's time increment, so the same driver produces both
//! stress–stretch curves and density–time trajectories.

use crate::constitutive::{cauchy_stress, total_response, MaterialParams, PointResponse};
use crate::error::{Error, Result};
use crate::growth::GrowthState;
use crate::tensor::{SymTensor3, Tensor3};
use serde::{Deserialize, Serialize};

/// Cauchy stress tolerance on zero-stress axes, MPa.
pub const FREE_AXIS_TOL: f64 = 1e-13;
const MAX_ITER: usize = 60;

/// How prescribed axis values are read.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ControlMeasure {
    #[default]
    Stretch,
    EngineeringStrain,
}

impl ControlMeasure {
    pub fn to_stretch(self, v: f64) -> f64 {
        match self {
            ControlMeasure::Stretch => v,
            ControlMeasure::EngineeringStrain => 1.0 + v,
        }
    }
}

/// One step: time and per-axis control. `None` means zero normal stress.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadStep {
    pub time: f64,
    pub axes: [Option<f64>; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadProgram {
    #[serde(default)]
    pub start_time: f64,
    #[serde(default)]
    pub measure: ControlMeasure,
    pub steps: Vec<LoadStep>,
    /// Emit a record every `output_every` steps (the last step is always emitted).
    #[serde(default = "one")]
    pub output_every: usize,
}

fn one() -> usize {
    1
}

impl LoadProgram {
    pub fn new(measure: ControlMeasure, steps: Vec<LoadStep>) -> Self {
        LoadProgram {
            start_time: 0.0,
            measure,
            steps,
            output_every: 1,
        }
    }

    /// Uniaxial tension along x through the given stretches at fixed time.
    pub fn uniaxial(stretches: &[f64]) -> Self {
        let steps = stretches
            .iter()
            .map(|&l| LoadStep {
                time: 0.0,
                axes: [Some(l), None, None],
            })
            .collect();
        let mut p = LoadProgram::new(ControlMeasure::Stretch, steps);
        p.start_time = 0.0;
        p
    }

    /// Biaxial in-plane stretching with `strain_x = ratio · strain_y`, thickness free.
    pub fn biaxial(strains_x: &[f64], ratio: f64) -> Self {
        let steps = strains_x
            .iter()
            .map(|&e| LoadStep {
                time: 0.0,
                axes: [Some(e), Some(e / ratio), None],
            })
            .collect();
        LoadProgram::new(ControlMeasure::EngineeringStrain, steps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps.is_empty() {
            return Err(Error::Program("no steps".into()));
        }
        if self.output_every == 0 {
            return Err(Error::Program("output_every must be >= 1".into()));
        }
        let mut prev = self.start_time;
        for (k, step) in self.steps.iter().enumerate() {
            if !step.time.is_finite() || step.time < prev || (k > 0 && step.time == prev && self.has_growth_time()) {
                return Err(Error::Program(format!(
                    "step {k}: time {} not increasing (previous {prev})",
                    step.time
                )));
            }
            prev = step.time;
            if step.axes.iter().all(Option::is_none) {
                return Err(Error::Program(format!("step {k}: no stretch-controlled axis")));
            }
            for v in step.axes.iter().flatten() {
                let l = self.measure.to_stretch(*v);
                if !(l > 0.0 && l.is_finite()) {
                    return Err(Error::Program(format!("step {k}: non-physical stretch {l}")));
                }
            }
        }
        Ok(())
    }

    /// Programs whose steps all share one time are pure equilibrium sweeps;
    /// otherwise time must strictly increase.
    fn has_growth_time(&self) -> bool {
        self.steps.iter().any(|s| s.time != self.start_time)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PointRecord {
    pub time: f64,
    pub f: Tensor3,
    pub s: SymTensor3,
    pub sigma: SymTensor3,
    pub rho: f64,
    pub psi_m: f64,
}

impl PointRecord {
    /// Engineering (nominal) stress `P_ii = F_ii S_ii` along an axis.
    pub fn engineering_stress(&self, axis: usize) -> f64 {
        self.f.0[axis][axis] * self.s.0[axis]
    }

    pub fn stretch(&self, axis: usize) -> f64 {
        self.f.0[axis][axis]
    }
}

fn record(time: f64, f: &Tensor3, r: &PointResponse) -> Result<PointRecord> {
    Ok(PointRecord {
        time,
        f: *f,
        s: r.st.s,
        sigma: cauchy_stress(f, &r.st.s)?,
        rho: r.state.rho,
        psi_m: r.psi_m,
    })
}

/// Solves one step: returns the converged stretches and response.
fn solve_step(
    stretch: [f64; 3],
    free: &[usize],
    params: &MaterialParams,
    state: &GrowthState,
    dt: f64,
    t: f64,
) -> Result<([f64; 3], PointResponse)> {
    let mut lam = stretch;
    let eval = |lam: &[f64; 3]| total_response(&Tensor3::diag(lam[0], lam[1], lam[2]), params, state, dt, t);
    let mut r = eval(&lam)?;
    let sigma_free = |lam: &[f64; 3], r: &PointResponse| -> Vec<f64> {
        let j = lam[0] * lam[1] * lam[2];
        free.iter().map(|&i| lam[i] * lam[i] * r.st.s.0[i] / j).collect()
    };
    let mut trace = Vec::new();
    for _ in 0..MAX_ITER {
        let sig = sigma_free(&lam, &r);
        let res = sig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        trace.push(res);
        if res < FREE_AXIS_TOL {
            return Ok((lam, r));
        }
        // dS_i/dλ_j = CC_ij λ_j  (dE_jj = λ_j dλ_j)
        let n = free.len();
        let mut jac = vec![vec![0.0; n]; n];
        let rhs: Vec<f64> = free.iter().map(|&i| -r.st.s.0[i]).collect();
        for (a, &i) in free.iter().enumerate() {
            for (b, &j) in free.iter().enumerate() {
                jac[a][b] = r.st.cc.0[i][j] * lam[j];
            }
        }
        let delta = solve_small(jac, rhs)?;
        let mut step = 1.0;
        loop {
            let mut trial = lam;
            for (a, &i) in free.iter().enumerate() {
                trial[i] = lam[i] + step * delta[a];
            }
            if trial.iter().all(|&l| l > 0.0) {
                if let Ok(rt) = eval(&trial) {
                    lam = trial;
                    r = rt;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-8 {
                return Err(Error::NonConvergence {
                    context: "material point zero-stress solve".into(),
                    iterations: trace.len(),
                    residual: res,
                    trace,
                });
            }
        }
    }
    Err(Error::NonConvergence {
        context: "material point zero-stress solve".into(),
        iterations: MAX_ITER,
        residual: *trace.last().unwrap_or(&f64::NAN),
        trace,
    })
}

/// Gaussian elimination with partial pivoting for systems of size ≤ 3.
fn solve_small(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .unwrap_or(k);
        if a[p][k].abs() < 1e-300 {
            return Err(Error::LinearSolve("singular material-point Jacobian".into()));
        }
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let m = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= m * a[k][j];
            }
            b[i] -= m * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Ok(x)
}

/// Runs a load program and returns the emitted records.
pub fn solve_mixed_point(program: &LoadProgram, params: &MaterialParams, init: &GrowthState) -> Result<Vec<PointRecord>> {
    program.validate()?;
    init.validate()?;
    let mut state = *init;
    let mut t_prev = program.start_time;
    let mut free_guess = [1.0; 3];
    let mut out = Vec::new();
    let n = program.steps.len();
    for (k, step) in program.steps.iter().enumerate() {
        let dt = step.time - t_prev;
        let mut stretch = free_guess;
        let mut free = Vec::new();
        for (i, ctl) in step.axes.iter().enumerate() {
            match ctl {
                Some(v) => stretch[i] = program.measure.to_stretch(*v),
                None => free.push(i),
            }
        }
        let (lam, r) = solve_step(stretch, &free, params, &state, dt, step.time)?;
        free_guess = lam;
        state = r.state;
        t_prev = step.time;
        if (k + 1) % program.output_every == 0 || k + 1 == n {
            out.push(record(step.time, &Tensor3::diag(lam[0], lam[1], lam[2]), &r)?);
        }
    }
    Ok(out)
}

/// Unloaded cultivation from `t = 0` to `t_end` with fixed steps `dt` (the last
/// step is shortened to land on `t_end`). The first record is the initial state.
pub fn unloaded_maturation(params: &MaterialParams, t_end: f64, dt: f64) -> Result<Vec<PointRecord>> {
    if !(dt > 0.0) || !(t_end > 0.0) {
        return Err(Error::Program(format!("need dt > 0 and t_end > 0 (dt = {dt}, t_end = {t_end})")));
    }
    let n = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let steps = (1..=n)
        .map(|k| LoadStep {
            time: if k == n { t_end } else { k as f64 * dt },
            axes: [Some(1.0); 3],
        })
        .collect();
    let program = LoadProgram::new(ControlMeasure::Stretch, steps);
    let init = GrowthState::default();
    let r0 = total_response(&Tensor3::identity(), params, &init, 0.0, 0.0)?;
    let mut out = vec![record(0.0, &Tensor3::identity(), &r0)?];
    out.extend(solve_mixed_point(&program, params, &init)?);
    Ok(out)
}
