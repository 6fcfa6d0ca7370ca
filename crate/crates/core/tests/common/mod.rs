//! Oracles shared by the integration tests and the acceptance harness.
#![allow(dead_code)]

use matura::constitutive::collagen::{collagen_mass_energy, collagen_stress};
use matura::constitutive::matrix::matrix_psi_stress_tangent;
use matura::constitutive::textile::textile_psi_stress_tangent;
use matura::constitutive::{total_response, CollagenParams, MaterialParams};
use matura::fem::{assemble, newton_solve, Bvp, Dirichlet, GaussPointField, Mesh, SolverConfig};
use matura::growth::{update_density, DensityUpdate, GrowthState};
use matura::matpoint::{solve_mixed_point, ControlMeasure, LoadProgram, LoadStep};
use matura::tensor::{gen_structural_tensor, right_cauchy_green, Direction, SymTensor3, Tangent6, Tensor3};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// `I + amp·X` with uniform entries, rejecting strongly compressed samples.
pub fn random_deformation(rng: &mut StdRng, amp: f64) -> Tensor3 {
    loop {
        let mut f = Tensor3::identity();
        for row in f.0.iter_mut() {
            for v in row.iter_mut() {
                *v += amp * rng.gen_range(-1.0..1.0);
            }
        }
        if f.det() > 0.6 {
            return f;
        }
    }
}

pub fn random_rotation(rng: &mut StdRng) -> Tensor3 {
    let axis = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0) + 1e-3];
    Tensor3::rotation(axis, rng.gen_range(-3.1..3.1))
}

pub fn random_direction(rng: &mut StdRng) -> Direction {
    loop {
        let v = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if let Ok(d) = Direction::new(v) {
            if matura::tensor::norm(v) > 0.1 {
                return d;
            }
        }
    }
}

/// Upper-triangular `F` with `FᵀF = C` (Cholesky factor of `C`, transposed).
pub fn deformation_from_c(c: &SymTensor3) -> Tensor3 {
    let a = c.to_tensor().0;
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                l[i][i] = (a[i][i] - s).sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    Tensor3(l).transpose()
}

/// Central-difference tangent `∂S/∂E` (engineering-shear Voigt columns).
pub fn fd_tangent(s_of_c: impl Fn(&SymTensor3) -> SymTensor3, c: &SymTensor3, h: f64) -> Tangent6 {
    let mut out = Tangent6::zero();
    for j in 0..6 {
        let dc = SymTensor3::unit_strain_perturbation(j) * h;
        let sp = s_of_c(&(*c + dc));
        let sm = s_of_c(&(*c - dc));
        for i in 0..6 {
            out.0[i][j] = (sp.0[i] - sm.0[i]) / (2.0 * h);
        }
    }
    out
}

/// `max|a − b| / max|b|`; zero when both vanish.
pub fn rel_err(a: &Tangent6, b: &Tangent6) -> f64 {
    let d = (*a - *b).max_abs();
    let scale = b.max_abs().max(a.max_abs());
    if scale == 0.0 {
        0.0
    } else {
        d / scale
    }
}

const FD_STEP: f64 = 1e-6;

#[derive(Debug, Default, Clone, Copy)]
pub struct TangentReport {
    pub matrix: f64,
    pub collagen: f64,
    pub textile: f64,
    pub coupled: f64,
    pub density_sensitivity: f64,
    /// Coupled samples that actually had mechanical growth switched on.
    pub coupled_active: usize,
}

impl TangentReport {
    pub fn worst_tangent(&self) -> f64 {
        self.matrix.max(self.collagen).max(self.textile).max(self.coupled)
    }
}

/// Material with a low growth threshold so moderate strains drive mechanical deposition.
pub fn growing_material() -> MaterialParams {
    let mut p = MaterialParams::shell_construct();
    let g = p.growth.as_mut().unwrap();
    g.psi_crit = 1e-5;
    g.a2 = 0.05;
    p
}

pub fn tangent_suite(n: usize, seed: u64) -> TangentReport {
    let mut rng = rng(seed);
    let mut rep = TangentReport::default();
    for _ in 0..n {
        // matrix
        let mut mp = MaterialParams::shell_construct().matrix;
        mp.lambda = rng.gen_range(0.0..20.0);
        mp.mu = rng.gen_range(0.01..1.0);
        let c = right_cauchy_green(&random_deformation(&mut rng, 0.25)).unwrap();
        let an = matrix_psi_stress_tangent(&c, &mp).unwrap().st.cc;
        let fd = fd_tangent(|c| matrix_psi_stress_tangent(c, &mp).unwrap().st.s, &c, FD_STEP);
        rep.matrix = rep.matrix.max(rel_err(&an, &fd));

        // collagen at frozen density, fibers kept in tension
        let cp = CollagenParams {
            k1: rng.gen_range(0.1..2.0),
            k2: rng.gen_range(0.5..10.0),
            kappa: rng.gen_range(0.0..1.0 / 3.0),
            direction: random_direction(&mut rng),
            rho_f: 38.71,
        };
        let dens = DensityUpdate::frozen(rng.gen_range(0.0..40.0));
        let c = loop {
            let c = right_cauchy_green(&random_deformation(&mut rng, 0.25)).unwrap();
            if collagen_mass_energy(&c, &cp).unwrap().fiber_strain > 1e-3 {
                break c;
            }
        };
        let an = collagen_stress(&c, &cp, &dens).unwrap().cc;
        let fd = fd_tangent(|c| collagen_stress(c, &cp, &dens).unwrap().s, &c, FD_STEP);
        rep.collagen = rep.collagen.max(rel_err(&an, &fd));

        // textile
        let tp = matura::constitutive::TextileParams::electrospun_scaffold(random_direction(&mut rng), random_direction(&mut rng));
        let c = right_cauchy_green(&random_deformation(&mut rng, 0.2)).unwrap();
        let an = textile_psi_stress_tangent(&c, &tp).unwrap().st.cc;
        let fd = fd_tangent(|c| textile_psi_stress_tangent(c, &tp).unwrap().st.s, &c, FD_STEP);
        rep.textile = rep.textile.max(rel_err(&an, &fd));

        // coupled point with the density update inside the stress
        let params = growing_material();
        let g = params.growth.unwrap();
        let state = GrowthState::with_density(rng.gen_range(0.0..8.0));
        let (t, dt) = (rng.gen_range(0.5..28.0), rng.gen_range(0.01..0.5));
        let c = loop {
            let c = right_cauchy_green(&random_deformation(&mut rng, 0.2)).unwrap();
            let psi = collagen_mass_energy(&c, &params.collagen).unwrap().psi_m;
            // growth switched on, clear of the threshold kink
            if psi > 1.05 * g.psi_crit {
                break c;
            }
        };
        let resp = |c: &SymTensor3| total_response(&deformation_from_c(c), &params, &state, dt, t).unwrap();
        let r0 = resp(&c);
        if r0.density.drho_dpsim > 0.0 {
            rep.coupled_active += 1;
        }
        let fd = fd_tangent(|c| resp(c).st.s, &c, FD_STEP);
        rep.coupled = rep.coupled.max(rel_err(&r0.st.cc, &fd));

        // density sensitivity to the driving energy
        let psi = g.psi_crit * rng.gen_range(1.2..50.0);
        let upd = |psi: f64| update_density(&state, t, dt, psi, &g).unwrap();
        let h = 1e-6 * psi;
        let fd = (upd(psi + h).rho - upd(psi - h).rho) / (2.0 * h);
        let an = upd(psi).drho_dpsim;
        rep.density_sensitivity = rep.density_sensitivity.max((an - fd).abs() / an.abs().max(1e-300));
    }
    rep
}

/// Relative change of the total energy under a rigid rotation of the spatial frame.
pub fn frame_indifference_error(f: &Tensor3, q: &Tensor3, params: &MaterialParams, rho: f64) -> f64 {
    let s = GrowthState::with_density(rho);
    let a = total_response(f, params, &s, 0.0, 0.0).unwrap().psi;
    let b = total_response(&q.matmul(f), params, &s, 0.0, 0.0).unwrap().psi;
    (a - b).abs() / a.abs().max(1e-12)
}

/// Collagen stress vanishes for compressed fibers and pulls along H otherwise.
pub fn collagen_tension_only(f: &Tensor3, p: &CollagenParams, rho: f64) -> bool {
    let c = right_cauchy_green(f).unwrap();
    let e = collagen_mass_energy(&c, p).unwrap().fiber_strain;
    let s = collagen_stress(&c, p, &DensityUpdate::frozen(rho)).unwrap().s;
    if e < 0.0 {
        s == SymTensor3::zero()
    } else {
        s.ddot(&p.structural_tensor().unwrap()) >= 0.0
    }
}

pub fn structural_trace_error(d: &Direction, kappa: f64) -> f64 {
    (gen_structural_tensor(d, kappa).unwrap().trace() - 1.0).abs()
}

/// Smallest density increment over a random admissible history (dt > 0, any ψm ≥ 0).
pub fn min_density_increment(rng: &mut StdRng, steps: usize) -> f64 {
    let g = growing_material().growth.unwrap();
    let mut state = GrowthState::default();
    let mut t = 0.0;
    let mut worst = f64::INFINITY;
    for _ in 0..steps {
        let dt = 10f64.powf(rng.gen_range(-3.0..0.0));
        t += dt;
        let psi = if rng.gen_bool(0.5) { 0.0 } else { g.psi_crit * 10f64.powf(rng.gen_range(-1.0..3.0)) };
        let next = update_density(&state, t, dt, psi, &g).unwrap().state();
        worst = worst.min(next.rho - state.rho);
        state = next;
    }
    worst
}

/// `∫ S : dE` along `F(s) = I + s A + s(1 − s) B` by composite Simpson.
pub fn work_along_path(a: &Tensor3, b: &Tensor3, params: &MaterialParams, rho: f64, intervals: usize) -> f64 {
    let state = GrowthState::with_density(rho);
    let at = |s: f64| {
        let mut f = Tensor3::identity();
        let mut df = Tensor3::zero();
        for i in 0..3 {
            for j in 0..3 {
                f.0[i][j] += s * a.0[i][j] + s * (1.0 - s) * b.0[i][j];
                df.0[i][j] = a.0[i][j] + (1.0 - 2.0 * s) * b.0[i][j];
            }
        }
        // dE/ds = sym(Fᵀ F')
        let de = SymTensor3::from_tensor_sym(&f.transpose().matmul(&df));
        let s_pk2 = total_response(&f, params, &state, 0.0, 0.0).unwrap().st.s;
        s_pk2.ddot(&de)
    };
    let n = intervals + intervals % 2;
    let h = 1.0 / n as f64;
    let mut sum = at(0.0) + at(1.0);
    for k in 1..n {
        sum += if k % 2 == 1 { 4.0 } else { 2.0 } * at(k as f64 * h);
    }
    sum * h / 3.0
}

/// Strip-meshed box with all non-corner nodes randomly shifted.
pub fn distorted_box(rng: &mut StdRng, n: usize, amp: f64) -> Mesh {
    let mut m = Mesh::strip(2.0, 2.0, 2.0, n, n, n).unwrap();
    let h = 2.0 / n as f64;
    for x in m.nodes.iter_mut() {
        let corner = x.iter().all(|v| *v == 0.0 || *v == 2.0);
        if !corner {
            for v in x.iter_mut() {
                *v += amp * h * rng.gen_range(-1.0..1.0);
            }
        }
    }
    m.validate().unwrap();
    m
}

fn tight_solver() -> SolverConfig {
    SolverConfig {
        tol_force: 1e-13,
        tol_energy: 1e-40,
        max_iterations: 40,
        load_stiffness: true,
    }
}

/// Homogeneous deformation imposed on the boundary of a distorted 2×2×2
/// patch. Returns the worst relative error of the interior displacements and
/// of the element stresses against the exact homogeneous solution.
pub fn patch_test(seed: u64) -> (f64, f64) {
    let mut rng = rng(seed);
    let mesh = distorted_box(&mut rng, 2, 0.2);
    let grad = Tensor3([[0.08, 0.02, -0.01], [0.01, -0.03, 0.02], [0.0, 0.015, 0.05]]);
    let exact = |x: [f64; 3]| grad.apply(x);
    let interior: Vec<usize> = (0..mesh.n_nodes())
        .filter(|&a| {
            let (i, j, k) = (a % 3, (a / 3) % 3, a / 9);
            i == 1 && j == 1 && k == 1
        })
        .collect();
    let mut dirichlet = Vec::new();
    for (a, x) in mesh.nodes.iter().enumerate() {
        if interior.contains(&a) {
            continue;
        }
        let u = exact(*x);
        for (comp, value) in u.iter().enumerate() {
            dirichlet.push(Dirichlet::Node {
                node: a,
                component: comp,
                value: *value,
            });
        }
    }
    let mut material = MaterialParams::shell_construct();
    material.growth = None;
    let bvp = Bvp {
        mesh,
        dirichlet,
        pressure: vec![],
        material,
        initial_density: 5.0,
        schedule: Default::default(),
        solver: tight_solver(),
    };
    let field = GaussPointField::new(bvp.mesh.n_elements(), GrowthState::with_density(5.0));
    let r = newton_solve(&bvp, &vec![0.0; bvp.n_dofs()], &field, 0.0, 0.0, 1.0).unwrap();

    let mut u_err: f64 = 0.0;
    for &a in &interior {
        let ue = exact(bvp.mesh.nodes[a]);
        let scale = matura::tensor::norm(ue);
        let d = [0, 1, 2].map(|i| r.u[3 * a + i] - ue[i]);
        u_err = u_err.max(matura::tensor::norm(d) / scale);
    }
    let f = grad + Tensor3::identity();
    let point = total_response(&f, &bvp.material, &GrowthState::with_density(5.0), 0.0, 0.0).unwrap();
    let sigma = matura::constitutive::cauchy_stress(&f, &point.st.s).unwrap();
    let mut s_err: f64 = 0.0;
    for e in 0..bvp.mesh.n_elements() {
        for g in 0..8 {
            s_err = s_err.max((r.field.sigma[e][g] - sigma).max_abs() / sigma.max_abs());
        }
    }
    (u_err, s_err)
}

/// One unit cube under uniaxial stretch with lateral faces free, against the
/// mixed material-point solve. With `grow`, a single time step with active
/// mechanical growth is taken. Returns the worst relative error over the
/// stretches, the axial 2nd Piola-Kirchhoff stress and the density.
pub fn single_element_vs_matpoint(stretch: f64, grow: bool) -> f64 {
    let mesh = Mesh::strip(1.0, 1.0, 1.0, 1, 1, 1).unwrap();
    let set = |s: &str, c: usize, v: f64| Dirichlet::Set {
        set: s.into(),
        components: vec![c],
        value: v,
    };
    let material = if grow {
        growing_material()
    } else {
        let mut m = MaterialParams::shell_construct();
        m.growth = None;
        m
    };
    let rho0 = 3.0;
    let bvp = Bvp {
        mesh,
        dirichlet: vec![set("x_min", 0, 0.0), set("y_min", 1, 0.0), set("z_min", 2, 0.0), set("x_max", 0, stretch - 1.0)],
        pressure: vec![],
        material,
        initial_density: rho0,
        schedule: Default::default(),
        solver: tight_solver(),
    };
    let (t, dt) = if grow { (2.0, 0.5) } else { (0.0, 0.0) };
    let field = GaussPointField::new(1, GrowthState::with_density(rho0));
    let r = newton_solve(&bvp, &vec![0.0; bvp.n_dofs()], &field, dt, t, 1.0).unwrap();
    let far = 7; // node at (1, 1, 1)
    let fem = [1.0 + r.u[3 * far], 1.0 + r.u[3 * far + 1], 1.0 + r.u[3 * far + 2]];

    let program = LoadProgram {
        start_time: t - dt,
        measure: ControlMeasure::Stretch,
        steps: vec![LoadStep {
            time: t,
            axes: [Some(stretch), None, None],
        }],
        output_every: 1,
    };
    let rec = solve_mixed_point(&program, &bvp.material, &GrowthState::with_density(rho0)).unwrap();
    let rec = rec.last().unwrap();
    let mp = [rec.f.0[0][0], rec.f.0[1][1], rec.f.0[2][2]];

    let mut err: f64 = 0.0;
    for i in 0..3 {
        err = err.max((fem[i] - mp[i]).abs() / mp[i]);
    }
    let fe = r.field.f[0][0];
    let fem_point = total_response(&fe, &bvp.material, &GrowthState::with_density(rho0), dt, t).unwrap();
    err = err.max((fem_point.st.s.0[0] - rec.s.0[0]).abs() / rec.s.0[0].abs());
    err = err.max((r.field.element_rho(0) - rec.rho).abs() / rec.rho);
    err
}

/// Central-difference check of the assembled global tangent (including the
/// follower-pressure stiffness and active growth) on a 2×2×2 mesh.
pub fn global_tangent_fd(seed: u64) -> f64 {
    let mut rng = rng(seed);
    let mesh = distorted_box(&mut rng, 2, 0.15);
    let mut bvp = Bvp::strip(mesh, growing_material(), 0.05);
    bvp.initial_density = 2.0;
    let u: Vec<f64> = (0..bvp.n_dofs()).map(|_| 0.05 * rng.gen_range(-1.0..1.0)).collect();
    let field = GaussPointField::new(bvp.mesh.n_elements(), GrowthState::with_density(2.0));
    let (dt, t) = (0.2, 3.0);
    let asm = assemble(&bvp, &u, &field, dt, t, 1.0).unwrap();
    let k = asm.dense_stiffness();
    let n = u.len();
    let h = 1e-6;
    let mut max_diff: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for j in 0..n {
        let mut up = u.clone();
        let mut um = u.clone();
        up[j] += h;
        um[j] -= h;
        let rp = assemble(&bvp, &up, &field, dt, t, 1.0).unwrap().residual;
        let rm = assemble(&bvp, &um, &field, dt, t, 1.0).unwrap().residual;
        for i in 0..n {
            let fd = (rp[i] - rm[i]) / (2.0 * h);
            max_diff = max_diff.max((fd - k[i][j]).abs());
            scale = scale.max(k[i][j].abs());
        }
    }
    max_diff / scale
}
