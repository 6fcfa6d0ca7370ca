//! Derivative-free parameter identification.
//!
//! A bounded Nelder–Mead simplex drives least-squares fits of the Weibull
//! deposition curve and of constitutive parameters against stress–strain
//! series computed by the material-point driver (or, optionally, by a
//! finite-element reaction curve).

use crate::constitutive::MaterialParams;
use crate::error::{Error, Result};
use crate::fem::{newton_solve, Bvp, GaussPointField};
use crate::growth::{weibull_alpha, GrowthParams, GrowthState};
use crate::matpoint::{solve_mixed_point, LoadProgram};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NelderMeadConfig {
    pub max_evals: usize,
    /// Simplex diameter (max distance to the best vertex).
    pub tol_x: f64,
    /// Spread of objective values over the simplex.
    pub tol_f: f64,
    /// Relative size of the initial simplex; zero coordinates get `0.00025`.
    pub initial_step: f64,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        NelderMeadConfig {
            max_evals: 20_000,
            tol_x: 1e-8,
            tol_f: 1e-12,
            initial_step: 0.05,
            lower: None,
            upper: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub f: f64,
    /// Best objective value after every iteration.
    pub trace: Vec<f64>,
    pub evaluations: usize,
    pub iterations: usize,
    pub converged: bool,
}

fn clip(x: &mut [f64], cfg: &NelderMeadConfig) {
    for (k, v) in x.iter_mut().enumerate() {
        if let Some(lo) = &cfg.lower {
            *v = v.max(lo[k]);
        }
        if let Some(hi) = &cfg.upper {
            *v = v.min(hi[k]);
        }
    }
}

/// Minimizes `objective` from `x0`. Stops once both the simplex diameter and
/// the objective spread are below tolerance, or on the evaluation budget.
/// Non-finite objective values away from `x0` count as `+∞`.
pub fn nelder_mead(objective: impl Fn(&[f64]) -> f64, x0: &[f64], cfg: &NelderMeadConfig) -> Result<NelderMeadResult> {
    let n = x0.len();
    if n == 0 {
        return Err(Error::Data("nelder_mead: empty parameter vector".into()));
    }
    for b in [&cfg.lower, &cfg.upper].into_iter().flatten() {
        if b.len() != n {
            return Err(Error::SizeMismatch(format!("bounds have {} entries, expected {n}", b.len())));
        }
    }
    let evals = std::cell::Cell::new(0usize);
    let eval = |x: &[f64]| {
        evals.set(evals.get() + 1);
        let f = objective(x);
        if f.is_finite() {
            f
        } else {
            f64::INFINITY
        }
    };
    let mut start = x0.to_vec();
    clip(&mut start, cfg);
    let f0 = objective(&start);
    if !f0.is_finite() {
        return Err(Error::Data(format!("objective is not finite at the starting point ({f0})")));
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = vec![(start.clone(), eval(&start))];
    for k in 0..n {
        let mut x = start.clone();
        x[k] = if x[k] != 0.0 { x[k] * (1.0 + cfg.initial_step) } else { 0.00025 };
        clip(&mut x, cfg);
        if x[k] == start[k] {
            // pinned at a bound: step inward instead
            x[k] = start[k] * (1.0 - cfg.initial_step) - if start[k] == 0.0 { 0.00025 } else { 0.0 };
            clip(&mut x, cfg);
        }
        let f = eval(&x);
        simplex.push((x, f));
    }

    let mut trace = Vec::new();
    let mut iterations = 0;
    let converged = loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        trace.push(best);
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&simplex[0].0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
            .fold(0.0f64, f64::max);
        let spread = simplex[n].1 - best;
        if diameter < cfg.tol_x && spread < cfg.tol_f {
            break true;
        }
        if evals.get() >= cfg.max_evals {
            break false;
        }
        iterations += 1;

        let mut centroid = vec![0.0; n];
        for (x, _) in &simplex[..n] {
            for k in 0..n {
                centroid[k] += x[k] / n as f64;
            }
        }
        let worst = simplex[n].clone();
        let along = |t: f64| {
            let mut x: Vec<f64> = (0..n).map(|k| centroid[k] + t * (worst.0[k] - centroid[k])).collect();
            clip(&mut x, cfg);
            x
        };
        let xr = along(-1.0);
        let fr = eval(&xr);
        if fr < best {
            let xe = along(-2.0);
            let fe = eval(&xe);
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < worst.1 {
            let x = along(-0.5);
            let f = eval(&x);
            (x, f)
        } else {
            let x = along(0.5);
            let f = eval(&x);
            (x, f)
        };
        if fc < fr.min(worst.1) {
            simplex[n] = (xc, fc);
            continue;
        }
        // shrink toward the best vertex
        let xb = simplex[0].0.clone();
        for v in simplex.iter_mut().skip(1) {
            let mut x: Vec<f64> = (0..n).map(|k| xb[k] + 0.5 * (v.0[k] - xb[k])).collect();
            clip(&mut x, cfg);
            let f = eval(&x);
            *v = (x, f);
        }
    };
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    Ok(NelderMeadResult {
        x,
        f,
        trace,
        evaluations: evals.get(),
        iterations,
        converged,
    })
}

/// Abscissa/ordinate pairs with optional weights.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSeries {
    #[serde(default)]
    pub x_label: String,
    #[serde(default)]
    pub y_label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

impl DataSeries {
    pub fn new(x_label: &str, y_label: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        DataSeries {
            x_label: x_label.into(),
            y_label: y_label.into(),
            x,
            y,
            weights: None,
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[i])
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.y.len() {
            return Err(Error::Data(format!("series has {} abscissae but {} ordinates", self.x.len(), self.y.len())));
        }
        if let Some(w) = &self.weights {
            if w.len() != self.x.len() || w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                return Err(Error::Data("weights must match the data length and be >= 0".into()));
            }
        }
        if self.x.iter().chain(&self.y).any(|v| !v.is_finite()) {
            return Err(Error::Data("series contains non-finite values".into()));
        }
        if self.x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Data("abscissa must be strictly increasing".into()));
        }
        Ok(())
    }

    /// Copy sorted by abscissa.
    pub fn sorted(&self) -> DataSeries {
        let mut idx: Vec<usize> = (0..self.x.len()).collect();
        idx.sort_by(|&a, &b| self.x[a].total_cmp(&self.x[b]));
        DataSeries {
            x_label: self.x_label.clone(),
            y_label: self.y_label.clone(),
            x: idx.iter().map(|&i| self.x[i]).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
            weights: self.weights.as_ref().map(|w| idx.iter().map(|&i| w[i]).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeibullFit {
    pub tau: f64,
    pub h: f64,
    pub rms: f64,
    pub evaluations: usize,
}

fn weibull(t: f64, tau: f64, h: f64) -> f64 {
    let p = GrowthParams {
        tau,
        h,
        ..GrowthParams::shell_construct()
    };
    weibull_alpha(t, &p).unwrap_or(f64::NAN)
}

/// Least-squares Weibull CDF through relative-density points `(t, α)`.
pub fn fit_weibull(points: &DataSeries) -> Result<WeibullFit> {
    let pts = points.sorted();
    pts.validate()?;
    if pts.len() < 3 {
        return Err(Error::Data(format!("need at least 3 points to fit (tau, h), got {}", pts.len())));
    }
    // start where the data crosses 1 − 1/e
    let target = 1.0 - (-1.0f64).exp();
    let tau0 = pts
        .x
        .windows(2)
        .zip(pts.y.windows(2))
        .find(|(_, y)| y[0] <= target && y[1] >= target && y[1] > y[0])
        .map(|(x, y)| x[0] + (target - y[0]) / (y[1] - y[0]) * (x[1] - x[0]))
        .unwrap_or_else(|| pts.x.iter().sum::<f64>() / pts.len() as f64)
        .max(1e-3);
    let objective = |p: &[f64]| {
        (0..pts.len())
            .map(|i| pts.weight(i) * (weibull(pts.x[i], p[0], p[1]) - pts.y[i]).powi(2))
            .sum::<f64>()
    };
    let cfg = NelderMeadConfig {
        lower: Some(vec![1e-6, 1e-3]),
        upper: Some(vec![1e6, 100.0]),
        tol_f: 1e-20,
        ..NelderMeadConfig::default()
    };
    let r = nelder_mead(objective, &[tau0, 1.5], &cfg)?;
    let rms = ((0..pts.len()).map(|i| (weibull(pts.x[i], r.x[0], r.x[1]) - pts.y[i]).powi(2)).sum::<f64>() / pts.len() as f64).sqrt();
    Ok(WeibullFit {
        tau: r.x[0],
        h: r.x[1],
        rms,
        evaluations: r.evaluations,
    })
}

/// Forward model producing the ordinate of a series from its abscissa.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForwardModel {
    /// Stretch along x, lateral stresses free; ordinate is engineering stress P11.
    Uniaxial {
        #[serde(default = "unit")]
        relative_density: f64,
    },
    /// Engineering strain along x with `strain_x = ratio · strain_y`, thickness
    /// free; ordinate is engineering stress along `axis`.
    Biaxial {
        ratio: f64,
        #[serde(default)]
        axis: usize,
        #[serde(default)]
        relative_density: f64,
    },
    /// Abscissa scales the Dirichlet values of the problem; ordinate is the
    /// summed reaction on `component` of the nodes in `node_set`.
    Fem {
        bvp: Box<Bvp>,
        node_set: String,
        component: usize,
    },
}

fn unit() -> f64 {
    1.0
}

/// Names of fittable material parameters.
pub const FIT_PARAMETERS: [&str; 12] = [
    "lambda", "mu", "k1", "k2", "kappa", "K1_1", "K2_1", "K1_2", "K2_2", "Kcoup1", "Kcoup2", "KcoupAni",
];

pub fn set_parameter(p: &mut MaterialParams, name: &str, v: f64) -> Result<()> {
    let slot = match name {
        "lambda" => &mut p.matrix.lambda,
        "mu" => &mut p.matrix.mu,
        "k1" => &mut p.collagen.k1,
        "k2" => &mut p.collagen.k2,
        "kappa" => &mut p.collagen.kappa,
        "K1_1" => &mut p.textile.k1_1,
        "K2_1" => &mut p.textile.k2_1,
        "K1_2" => &mut p.textile.k1_2,
        "K2_2" => &mut p.textile.k2_2,
        "Kcoup1" => &mut p.textile.k_coup1,
        "Kcoup2" => &mut p.textile.k_coup2,
        "KcoupAni" => &mut p.textile.k_coup_ani,
        other => {
            return Err(Error::Data(format!(
                "'{other}' is not a fittable parameter (expected one of {})",
                FIT_PARAMETERS.join(", ")
            )))
        }
    };
    *slot = v;
    Ok(())
}

pub fn get_parameter(p: &MaterialParams, name: &str) -> Result<f64> {
    Ok(match name {
        "lambda" => p.matrix.lambda,
        "mu" => p.matrix.mu,
        "k1" => p.collagen.k1,
        "k2" => p.collagen.k2,
        "kappa" => p.collagen.kappa,
        "K1_1" => p.textile.k1_1,
        "K2_1" => p.textile.k2_1,
        "K1_2" => p.textile.k1_2,
        "K2_2" => p.textile.k2_2,
        "Kcoup1" => p.textile.k_coup1,
        "Kcoup2" => p.textile.k_coup2,
        "KcoupAni" => p.textile.k_coup_ani,
        other => return Err(Error::Data(format!("'{other}' is not a fittable parameter"))),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSeries {
    #[serde(default)]
    pub label: String,
    pub model: ForwardModel,
    pub data: DataSeries,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitProblem {
    pub parameters: Vec<String>,
    pub initial: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Values of every parameter that is not fitted.
    pub base: MaterialParams,
    pub series: Vec<FitSeries>,
    #[serde(default)]
    pub optimizer: NelderMeadConfig,
}

impl FitProblem {
    pub fn validate(&self) -> Result<()> {
        let n = self.parameters.len();
        if n == 0 || self.initial.len() != n || self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Data("parameters, initial, lower and upper must have equal non-zero length".into()));
        }
        let mut probe = self.base;
        for (k, name) in self.parameters.iter().enumerate() {
            set_parameter(&mut probe, name, self.initial[k])?;
            if !(self.lower[k] <= self.initial[k] && self.initial[k] <= self.upper[k]) {
                return Err(Error::Data(format!("initial value of '{name}' lies outside its bounds")));
            }
        }
        if self.series.is_empty() {
            return Err(Error::Data("fit problem has no data series".into()));
        }
        for s in &self.series {
            s.data.validate()?;
        }
        Ok(())
    }

    pub fn material_at(&self, x: &[f64]) -> Result<MaterialParams> {
        let mut p = self.base;
        for (name, v) in self.parameters.iter().zip(x) {
            set_parameter(&mut p, name, *v)?;
        }
        p.validate()?;
        Ok(p)
    }
}

/// Model ordinates at the series abscissae.
pub fn forward(model: &ForwardModel, params: &MaterialParams, x: &[f64]) -> Result<Vec<f64>> {
    match model {
        ForwardModel::Uniaxial { relative_density } => {
            let init = GrowthState::with_density(relative_density * params.collagen.rho_f);
            let recs = solve_mixed_point(&LoadProgram::uniaxial(x), params, &init)?;
            Ok(recs.iter().map(|r| r.engineering_stress(0)).collect())
        }
        ForwardModel::Biaxial {
            ratio,
            axis,
            relative_density,
        } => {
            if *axis > 1 || !(ratio.is_finite() && *ratio != 0.0) {
                return Err(Error::Data(format!("invalid biaxial protocol (ratio {ratio}, axis {axis})")));
            }
            let init = GrowthState::with_density(relative_density * params.collagen.rho_f);
            let recs = solve_mixed_point(&LoadProgram::biaxial(x, *ratio), params, &init)?;
            Ok(recs.iter().map(|r| r.engineering_stress(*axis)).collect())
        }
        ForwardModel::Fem { bvp, node_set, component } => {
            let mut bvp = (**bvp).clone();
            bvp.material = *params;
            let nodes = bvp.mesh.node_set(node_set)?.to_vec();
            let mut field = GaussPointField::new(bvp.mesh.n_elements(), GrowthState::with_density(bvp.initial_density));
            let mut u = vec![0.0; bvp.n_dofs()];
            let mut out = Vec::with_capacity(x.len());
            for &lf in x {
                let r = newton_solve(&bvp, &u, &field, 0.0, 0.0, lf)?;
                out.push(nodes.iter().map(|&n| r.reactions[3 * n + component]).sum());
                u = r.u;
                field = r.field;
            }
            Ok(out)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeriesRms {
    pub label: String,
    pub rms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub parameters: Vec<String>,
    pub values: Vec<f64>,
    pub objective: f64,
    pub rms: Vec<SeriesRms>,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

/// Weighted sum of squared residuals over all series; `+∞` if any forward
/// solve fails.
pub fn fit_objective(problem: &FitProblem, x: &[f64]) -> f64 {
    let Ok(params) = problem.material_at(x) else {
        return f64::INFINITY;
    };
    let mut total = 0.0;
    for s in &problem.series {
        match forward(&s.model, &params, &s.data.x) {
            Ok(y) => {
                for (i, yi) in y.iter().enumerate() {
                    total += s.data.weight(i) * (yi - s.data.y[i]).powi(2);
                }
            }
            Err(_) => return f64::INFINITY,
        }
    }
    total
}

/// Fits all series simultaneously.
pub fn fit_material(problem: &FitProblem) -> Result<FitReport> {
    problem.validate()?;
    let cfg = NelderMeadConfig {
        lower: Some(problem.lower.clone()),
        upper: Some(problem.upper.clone()),
        ..problem.optimizer.clone()
    };
    let r = nelder_mead(|x| fit_objective(problem, x), &problem.initial, &cfg)?;
    let params = problem.material_at(&r.x)?;
    let mut rms = Vec::new();
    for (k, s) in problem.series.iter().enumerate() {
        let y = forward(&s.model, &params, &s.data.x)?;
        let sq: f64 = y.iter().zip(&s.data.y).map(|(a, b)| (a - b).powi(2)).sum();
        rms.push(SeriesRms {
            label: if s.label.is_empty() { format!("series{k}") } else { s.label.clone() },
            rms: (sq / y.len().max(1) as f64).sqrt(),
        });
    }
    Ok(FitReport {
        parameters: problem.parameters.clone(),
        values: r.x,
        objective: r.f,
        rms,
        iterations: r.iterations,
        evaluations: r.evaluations,
        converged: r.converged,
    })
}
