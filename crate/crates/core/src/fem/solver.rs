//! Global assembly and Newton iteration.

use super::element::{element_residual_stiffness, ElementOutput};
use super::mesh::Mesh;
use super::pressure::pressure_load;
use super::Schedule;
use crate::constitutive::MaterialParams;
use crate::error::{Error, Result};
use crate::growth::GrowthState;
use crate::tensor::{SymTensor3, Tensor3};
use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Col;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Prescribed displacement, scaled by the load factor during a ramp.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Dirichlet {
    /// Same value on the listed components (0 = x, 1 = y, 2 = z) of every node in a set.
    Set { set: String, components: Vec<usize>, value: f64 },
    Node { node: usize, component: usize, value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PressureLoad {
    pub face_set: String,
    /// MPa; positive pushes against the outward face normal.
    #[serde(deserialize_with = "crate::units::stress")]
    pub magnitude: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Infinity norm of the free-dof residual, N.
    pub tol_force: f64,
    /// `|du · R|` relative to its first-iteration value.
    pub tol_energy: f64,
    pub max_iterations: usize,
    /// Include the follower-pressure load stiffness in the tangent.
    pub load_stiffness: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_force: 1e-8,
            tol_energy: 1e-10,
            max_iterations: 30,
            load_stiffness: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bvp {
    pub mesh: Mesh,
    #[serde(default)]
    pub dirichlet: Vec<Dirichlet>,
    #[serde(default)]
    pub pressure: Vec<PressureLoad>,
    pub material: MaterialParams,
    /// Collagen density at every Gauss point before maturation, µg/mm³.
    #[serde(default)]
    pub initial_density: f64,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl Bvp {
    /// Strip clamped on both end faces with follower pressure `p` on its bottom face.
    pub fn strip(mesh: Mesh, material: MaterialParams, p: f64) -> Bvp {
        Bvp {
            mesh,
            dirichlet: ["x_min", "x_max"]
                .iter()
                .map(|s| Dirichlet::Set {
                    set: s.to_string(),
                    components: vec![0, 1, 2],
                    value: 0.0,
                })
                .collect(),
            pressure: vec![PressureLoad {
                face_set: "z_min".into(),
                magnitude: p,
            }],
            material,
            initial_density: 0.0,
            schedule: Schedule::default(),
            solver: SolverConfig::default(),
        }
    }

    pub fn n_dofs(&self) -> usize {
        3 * self.mesh.n_nodes()
    }

    pub fn validate(&self) -> Result<()> {
        self.mesh.validate()?;
        self.material.validate()?;
        self.schedule.validate()?;
        GrowthState::with_density(self.initial_density).validate()?;
        for d in &self.dirichlet {
            match d {
                Dirichlet::Set { set, components, value } => {
                    self.mesh.node_set(set)?;
                    if components.iter().any(|&c| c > 2) || !value.is_finite() {
                        return Err(Error::Mesh(format!("invalid Dirichlet condition on set '{set}'")));
                    }
                }
                Dirichlet::Node { node, component, value } => {
                    if *node >= self.mesh.n_nodes() || *component > 2 || !value.is_finite() {
                        return Err(Error::Mesh(format!("invalid Dirichlet condition on node {node}")));
                    }
                }
            }
        }
        for p in &self.pressure {
            self.mesh.face_set(&p.face_set)?;
            if !p.magnitude.is_finite() {
                return Err(Error::Mesh(format!("non-finite pressure on '{}'", p.face_set)));
            }
        }
        Ok(())
    }

    /// Prescribed value per dof at the given load factor (`None` = free).
    pub fn prescribed(&self, load_factor: f64) -> Result<Vec<Option<f64>>> {
        let mut out = vec![None; self.n_dofs()];
        for d in &self.dirichlet {
            match d {
                Dirichlet::Set { set, components, value } => {
                    for &n in self.mesh.node_set(set)? {
                        for &c in components {
                            out[3 * n + c] = Some(value * load_factor);
                        }
                    }
                }
                Dirichlet::Node { node, component, value } => {
                    out[3 * node + component] = Some(value * load_factor);
                }
            }
        }
        Ok(out)
    }
}

/// Gauss-point data of the whole mesh (8 points per element).
#[derive(Clone, Debug, PartialEq)]
pub struct GaussPointField {
    pub states: Vec<[GrowthState; 8]>,
    pub f: Vec<[Tensor3; 8]>,
    pub sigma: Vec<[SymTensor3; 8]>,
    pub fiber_strain: Vec<[f64; 8]>,
}

impl GaussPointField {
    pub fn new(n_elements: usize, initial: GrowthState) -> Self {
        GaussPointField {
            states: vec![[initial; 8]; n_elements],
            f: vec![[Tensor3::identity(); 8]; n_elements],
            sigma: vec![[SymTensor3::zero(); 8]; n_elements],
            fiber_strain: vec![[0.0; 8]; n_elements],
        }
    }

    pub fn element_rho(&self, e: usize) -> f64 {
        self.states[e].iter().map(|s| s.rho).sum::<f64>() / 8.0
    }

    pub fn element_sigma(&self, e: usize) -> SymTensor3 {
        self.sigma[e].iter().fold(SymTensor3::zero(), |acc, s| acc + *s) * 0.125
    }

    pub fn element_fiber_strain(&self, e: usize) -> f64 {
        self.fiber_strain[e].iter().sum::<f64>() / 8.0
    }

    /// `(min, max, mean)` over all Gauss points.
    pub fn rho_stats(&self) -> (f64, f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        let mut sum = 0.0;
        for s in self.states.iter().flatten() {
            lo = lo.min(s.rho);
            hi = hi.max(s.rho);
            sum += s.rho;
        }
        (lo, hi, sum / (8 * self.states.len()) as f64)
    }
}

/// Global residual `R = f_int − f_ext`, tangent triplets and trial Gauss-point data.
#[derive(Clone, Debug)]
pub struct Assembly {
    pub residual: Vec<f64>,
    pub triplets: Vec<(usize, usize, f64)>,
    pub field: GaussPointField,
    /// Stored energy, N·mm.
    pub energy: f64,
}

impl Assembly {
    pub fn dense_stiffness(&self) -> Vec<Vec<f64>> {
        let n = self.residual.len();
        let mut k = vec![vec![0.0; n]; n];
        for &(i, j, v) in &self.triplets {
            k[i][j] += v;
        }
        k
    }
}

/// Assembles at displacement `u` (length `3·n_nodes`) starting from the
/// committed Gauss-point `field`.
pub fn assemble(
    bvp: &Bvp,
    u: &[f64],
    field: &GaussPointField,
    dt: f64,
    t: f64,
    load_factor: f64,
) -> Result<Assembly> {
    let mesh = &bvp.mesh;
    let n = bvp.n_dofs();
    if u.len() != n {
        return Err(Error::SizeMismatch(format!("displacement has {} entries, expected {n}", u.len())));
    }
    let outputs: Vec<Result<ElementOutput>> = (0..mesh.n_elements())
        .into_par_iter()
        .map(|e| {
            let conn = mesh.hex8[e];
            let ue = conn.map(|a| [u[3 * a], u[3 * a + 1], u[3 * a + 2]]);
            element_residual_stiffness(e, &mesh.element_coords(e), &ue, &field.states[e], &bvp.material, dt, t)
        })
        .collect();

    let mut residual = vec![0.0; n];
    let mut triplets = Vec::with_capacity(576 * mesh.n_elements());
    let mut new_field = field.clone();
    let mut energy = 0.0;
    for (e, out) in outputs.into_iter().enumerate() {
        let out = out?;
        let dofs: Vec<usize> = mesh.hex8[e].iter().flat_map(|&a| [3 * a, 3 * a + 1, 3 * a + 2]).collect();
        for (p, &gp) in dofs.iter().enumerate() {
            residual[gp] += out.r[p];
            for (q, &gq) in dofs.iter().enumerate() {
                triplets.push((gp, gq, out.k[p][q]));
            }
        }
        new_field.states[e] = out.states;
        new_field.f[e] = out.f;
        new_field.sigma[e] = out.sigma;
        new_field.fiber_strain[e] = out.fiber_strain;
        energy += out.energy;
    }

    for load in &bvp.pressure {
        let p = load.magnitude * load_factor;
        if p == 0.0 {
            continue;
        }
        for &(e, face) in mesh.face_set(&load.face_set)? {
            let nodes = mesh.face_nodes(e, face);
            let x = nodes.map(|a| {
                let x0 = mesh.nodes[a];
                [x0[0] + u[3 * a], x0[1] + u[3 * a + 1], x0[2] + u[3 * a + 2]]
            });
            let fl = pressure_load(&x, p).map_err(|_| Error::DegenerateFace { element: e, face })?;
            for (a, &na) in nodes.iter().enumerate() {
                for i in 0..3 {
                    residual[3 * na + i] -= fl.f[a][i];
                    if bvp.solver.load_stiffness {
                        for (b, &nb) in nodes.iter().enumerate() {
                            for j in 0..3 {
                                triplets.push((3 * na + i, 3 * nb + j, fl.k[3 * a + i][3 * b + j]));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(Assembly {
        residual,
        triplets,
        field: new_field,
        energy,
    })
}

/// Converged equilibrium state.
#[derive(Clone, Debug)]
pub struct NewtonResult {
    pub u: Vec<f64>,
    pub field: GaussPointField,
    /// Residual (reaction force) at every dof; zero to tolerance on free dofs.
    pub reactions: Vec<f64>,
    pub iterations: usize,
    /// Free-dof residual infinity norm per iteration.
    pub trace: Vec<f64>,
    pub energy: f64,
}

fn solve_free(asm: &Assembly, free_index: &[Option<usize>], n_free: usize) -> Result<Vec<f64>> {
    let triplets: Vec<Triplet<usize, usize, f64>> = asm
        .triplets
        .iter()
        .filter_map(|&(i, j, v)| match (free_index[i], free_index[j]) {
            (Some(a), Some(b)) => Some(Triplet::new(a, b, v)),
            _ => None,
        })
        .collect();
    let k = SparseColMat::<usize, f64>::try_new_from_triplets(n_free, n_free, &triplets)
        .map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
    let lu = k.sp_lu().map_err(|e| Error::LinearSolve(format!("{e:?}")))?;
    let mut rhs = Col::<f64>::zeros(n_free);
    for (g, idx) in free_index.iter().enumerate() {
        if let Some(a) = idx {
            rhs[*a] = -asm.residual[g];
        }
    }
    let du = lu.solve(&rhs);
    let out: Vec<f64> = (0..n_free).map(|a| du[a]).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearSolve("singular global tangent".into()));
    }
    Ok(out)
}

/// Newton iteration for equilibrium at `(t, dt, load_factor)`, starting from `u0`.
///
/// Prescribed dofs are set to their values before the first iteration. Growth
/// states in `field` are the committed ones; the returned field holds the
/// states consistent with the converged displacement.
pub fn newton_solve(
    bvp: &Bvp,
    u0: &[f64],
    field: &GaussPointField,
    dt: f64,
    t: f64,
    load_factor: f64,
) -> Result<NewtonResult> {
    let cfg = &bvp.solver;
    let prescribed = bvp.prescribed(load_factor)?;
    let mut free_index = vec![None; prescribed.len()];
    let mut n_free = 0;
    for (g, p) in prescribed.iter().enumerate() {
        if p.is_none() {
            free_index[g] = Some(n_free);
            n_free += 1;
        }
    }
    let mut u = u0.to_vec();
    for (g, p) in prescribed.iter().enumerate() {
        if let Some(v) = p {
            u[g] = *v;
        }
    }
    let free_norm = |asm: &Assembly| {
        asm.residual
            .iter()
            .zip(&free_index)
            .filter(|(_, f)| f.is_some())
            .fold(0.0f64, |m, (r, _)| m.max(r.abs()))
    };

    let mut asm = assemble(bvp, &u, field, dt, t, load_factor)?;
    let mut trace = Vec::new();
    let mut energy0 = None;
    let mut energy_converged = false;
    loop {
        let res = free_norm(&asm);
        trace.push(res);
        if !res.is_finite() {
            break;
        }
        if res < cfg.tol_force || energy_converged {
            return Ok(NewtonResult {
                u,
                field: asm.field,
                reactions: asm.residual,
                iterations: trace.len(),
                trace,
                energy: asm.energy,
            });
        }
        if trace.len() > cfg.max_iterations {
            break;
        }
        let du = solve_free(&asm, &free_index, n_free)?;
        let work: f64 = free_index
            .iter()
            .enumerate()
            .filter_map(|(g, f)| f.map(|a| du[a] * asm.residual[g]))
            .sum::<f64>()
            .abs();
        let e0 = *energy0.get_or_insert(work);
        energy_converged = trace.len() > 1 && work <= cfg.tol_energy * e0;

        // backtrack only when the full step leaves the admissible set
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..8 {
            let mut trial = u.clone();
            for (g, f) in free_index.iter().enumerate() {
                if let Some(a) = f {
                    trial[g] += step * du[*a];
                }
            }
            match assemble(bvp, &trial, field, dt, t, load_factor) {
                Ok(a) => {
                    accepted = Some((trial, a));
                    break;
                }
                Err(e) if e.is_solver_failure() => step *= 0.5,
                Err(e) => return Err(e),
            }
        }
        match accepted {
            Some((trial, a)) => {
                u = trial;
                asm = a;
            }
            None => break,
        }
    }
    Err(Error::NonConvergence {
        context: format!("global Newton at t = {t}, load factor {load_factor}"),
        iterations: trace.len(),
        residual: *trace.last().unwrap_or(&f64::NAN),
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_bvp() -> Bvp {
        let mesh = Mesh::strip(1.0, 1.0, 1.0, 1, 1, 1).unwrap();
        let mut bvp = Bvp::strip(mesh, MaterialParams::collagen_rod(), 0.0);
        bvp.dirichlet = vec![
            Dirichlet::Set { set: "x_min".into(), components: vec![0], value: 0.0 },
            Dirichlet::Set { set: "y_min".into(), components: vec![1], value: 0.0 },
            Dirichlet::Set { set: "z_min".into(), components: vec![2], value: 0.0 },
            Dirichlet::Set { set: "x_max".into(), components: vec![0], value: 0.1 },
        ];
        bvp.pressure.clear();
        bvp
    }

    #[test]
    fn zero_load_converges_immediately() {
        let mut bvp = cube_bvp();
        for d in bvp.dirichlet.iter_mut() {
            if let Dirichlet::Set { value, .. } = d {
                *value = 0.0;
            }
        }
        let field = GaussPointField::new(1, GrowthState::default());
        let r = newton_solve(&bvp, &vec![0.0; 24], &field, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.u.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn uniaxial_cube_converges_quadratically() {
        let bvp = cube_bvp();
        let field = GaussPointField::new(1, GrowthState::with_density(38.71));
        let r = newton_solve(&bvp, &vec![0.0; 24], &field, 0.0, 0.0, 1.0).unwrap();
        assert!(r.iterations < 10, "{:?}", r.trace);
        let sig = r.field.element_sigma(0);
        assert!(sig.0[1].abs() < 1e-8 && sig.0[2].abs() < 1e-8);
        assert!(sig.0[0] > 0.0);
    }

    #[test]
    fn unknown_sets_rejected() {
        let mut bvp = cube_bvp();
        bvp.pressure.push(PressureLoad { face_set: "nope".into(), magnitude: 1.0 });
        assert!(bvp.validate().is_err());
    }
}
