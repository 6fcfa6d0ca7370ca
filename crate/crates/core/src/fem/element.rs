//! Total-Lagrangian hex8 with mean dilatation on the matrix bulk term.
//!
//! Every constituent except the λ-weighted bulk energy of the matrix is
//! integrated at the 2×2×2 Gauss points. The bulk energy is evaluated once per
//! element as `V U(J̄)` with `J̄ = v/V`, the ratio of current to reference
//! element volume.

use super::mesh::jacobian;
use super::shape::{gauss_points_3d, hex_shape};
use crate::constitutive::{bulk_energy, total_response_with, MaterialParams, MatrixPart};
use crate::error::{Error, Result};
use crate::growth::GrowthState;
use crate::tensor::{SymTensor3, Tensor3, VOIGT};

pub const NDOF: usize = 24;

/// Per-element result: internal forces, tangent and updated Gauss-point data.
#[derive(Clone, Debug)]
pub struct ElementOutput {
    pub r: [f64; NDOF],
    pub k: Box<[[f64; NDOF]; NDOF]>,
    pub states: [GrowthState; 8],
    pub f: [Tensor3; 8],
    pub sigma: [SymTensor3; 8],
    pub fiber_strain: [f64; 8],
    /// Stored energy of the element, N·mm.
    pub energy: f64,
}

/// Internal force vector and tangent of one element.
///
/// `x0` are reference coordinates, `u` nodal displacements. Growth states are
/// advanced with `dt` (zero freezes them).
#[allow(clippy::too_many_arguments)]
pub fn element_residual_stiffness(
    id: usize,
    x0: &[[f64; 3]; 8],
    u: &[[f64; 3]; 8],
    states: &[GrowthState; 8],
    params: &MaterialParams,
    dt: f64,
    t: f64,
) -> Result<ElementOutput> {
    let mut x = *x0;
    for a in 0..8 {
        for i in 0..3 {
            x[a][i] += u[a][i];
        }
    }
    let mut out = ElementOutput {
        r: [0.0; NDOF],
        k: Box::new([[0.0; NDOF]; NDOF]),
        states: *states,
        f: [Tensor3::identity(); 8],
        sigma: [SymTensor3::zero(); 8],
        fiber_strain: [0.0; 8],
        energy: 0.0,
    };
    let mut vol0 = 0.0;
    let mut vol = 0.0;
    let mut dv = [0.0; NDOF];
    let mut d2v = [[0.0; NDOF]; NDOF];

    for (gp, (xi, w)) in gauss_points_3d().iter().enumerate() {
        let (_, dn) = hex_shape(*xi);
        let j0 = jacobian(x0, &dn);
        let det0 = j0.det();
        if !(det0 > 0.0) {
            return Err(Error::ElementInversion {
                element: id,
                gauss_point: gp,
                det: det0,
            });
        }
        let j0_inv = j0.inverse()?;
        // ∇₀N_a = J₀⁻ᵀ ∂N_a/∂ξ
        let mut g = [[0.0; 3]; 8];
        for a in 0..8 {
            for k in 0..3 {
                g[a][k] = (0..3).map(|m| dn[a][m] * j0_inv.0[m][k]).sum();
            }
        }
        let mut f = [[0.0; 3]; 3];
        for a in 0..8 {
            for i in 0..3 {
                for k in 0..3 {
                    f[i][k] += x[a][i] * g[a][k];
                }
            }
        }
        let f = Tensor3(f);
        let det_f = f.det();
        if !(det_f > 0.0) {
            return Err(Error::ElementInversion {
                element: id,
                gauss_point: gp,
                det: det_f,
            });
        }
        let resp = total_response_with(&f, params, &states[gp], dt, t, MatrixPart::WithoutBulk).map_err(|e| match e {
            Error::InvalidDeformation { det } => Error::ElementInversion {
                element: id,
                gauss_point: gp,
                det,
            },
            other => other,
        })?;
        let wd = w * det0;

        // B[I][a*3+i]: δE (engineering shear) per nodal displacement
        let mut b = [[0.0; NDOF]; 6];
        for (v, &(k, l)) in VOIGT.iter().enumerate() {
            for a in 0..8 {
                for i in 0..3 {
                    b[v][3 * a + i] = if k == l {
                        f.0[i][k] * g[a][k]
                    } else {
                        f.0[i][k] * g[a][l] + f.0[i][l] * g[a][k]
                    };
                }
            }
        }
        let s = resp.st.s.0;
        let cc = &resp.st.cc.0;
        let mut cb = [[0.0; NDOF]; 6];
        for v in 0..6 {
            for q in 0..NDOF {
                cb[v][q] = (0..6).map(|m| cc[v][m] * b[m][q]).sum();
            }
        }
        for p in 0..NDOF {
            out.r[p] += wd * (0..6).map(|v| b[v][p] * s[v]).sum::<f64>();
            for q in 0..NDOF {
                out.k[p][q] += wd * (0..6).map(|v| b[v][p] * cb[v][q]).sum::<f64>();
            }
        }
        let s_t = resp.st.s;
        for a in 0..8 {
            for bb in 0..8 {
                let mut geo = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        geo += g[a][k] * s_t.get(k, l) * g[bb][l];
                    }
                }
                for i in 0..3 {
                    out.k[3 * a + i][3 * bb + i] += wd * geo;
                }
            }
        }

        // volume and its derivatives; J F⁻ᵀ ∇₀N_a = ∂J/∂x_a
        let f_inv = f.inverse()?;
        let mut gf = [[0.0; 3]; 8];
        for a in 0..8 {
            for i in 0..3 {
                gf[a][i] = (0..3).map(|k| f_inv.0[k][i] * g[a][k]).sum();
            }
        }
        let wj = wd * det_f;
        vol0 += wd;
        vol += wj;
        for a in 0..8 {
            for i in 0..3 {
                dv[3 * a + i] += wj * gf[a][i];
                for bb in 0..8 {
                    for j in 0..3 {
                        d2v[3 * a + i][3 * bb + j] += wj * (gf[a][i] * gf[bb][j] - gf[a][j] * gf[bb][i]);
                    }
                }
            }
        }

        out.states[gp] = resp.state;
        out.f[gp] = f;
        out.sigma[gp] = f.push_forward(&s_t) * (1.0 / det_f);
        out.fiber_strain[gp] = resp.fiber_strain;
        out.energy += wd * resp.psi;
    }

    let j_bar = vol / vol0;
    let (u_bulk, du, d2u) = bulk_energy(j_bar, params.matrix.lambda);
    out.energy += vol0 * u_bulk;
    for p in 0..NDOF {
        out.r[p] += du * dv[p];
        for q in 0..NDOF {
            out.k[p][q] += d2u / vol0 * dv[p] * dv[q] + du * d2v[p][q];
        }
    }
    // bulk Cauchy stress of U(J̄) is the pressure U'(J̄) I
    for sig in out.sigma.iter_mut() {
        *sig += SymTensor3::identity() * du;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::{cauchy_stress, total_response};

    fn unit_cube() -> [[f64; 3]; 8] {
        crate::fem::shape::HEX_NODES.map(|n| n.map(|c| 0.5 * (c + 1.0)))
    }

    fn affine(x0: &[[f64; 3]; 8], f: &Tensor3) -> [[f64; 3]; 8] {
        x0.map(|x| {
            let y = f.apply(x);
            [y[0] - x[0], y[1] - x[1], y[2] - x[2]]
        })
    }

    #[test]
    fn rigid_translation_has_no_forces() {
        let p = MaterialParams::shell_construct();
        let u = [[0.3, -1.2, 0.7]; 8];
        let out = element_residual_stiffness(0, &unit_cube(), &u, &[GrowthState::with_density(3.0); 8], &p, 0.0, 0.0).unwrap();
        assert!(out.r.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn homogeneous_stretch_gives_face_tractions() {
        let p = MaterialParams::shell_construct();
        let f = Tensor3::diag(1.2, 1.0, 1.0);
        let st = GrowthState::with_density(10.0);
        let x0 = unit_cube();
        let out = element_residual_stiffness(0, &x0, &affine(&x0, &f), &[st; 8], &p, 0.0, 0.0).unwrap();
        let r = total_response(&f, &p, &st, 0.0, 0.0).unwrap();
        let pk1 = f.mul_sym(&r.st.s);
        // each node carries a quarter of the unit face it sits on
        for (a, x) in x0.iter().enumerate() {
            for i in 0..3 {
                let mut expected = 0.0;
                for k in 0..3 {
                    let sign = if x[k] > 0.5 { 1.0 } else { -1.0 };
                    expected += 0.25 * sign * pk1.0[i][k];
                }
                assert!((out.r[3 * a + i] - expected).abs() < 1e-12 * pk1.0[0][0].abs().max(1.0));
            }
        }
        let sig = cauchy_stress(&f, &r.st.s).unwrap();
        for gp in 0..8 {
            assert!((out.sigma[gp] - sig).max_abs() < 1e-12);
        }
    }

    #[test]
    fn tangent_matches_finite_difference() {
        let p = MaterialParams::shell_construct();
        let x0 = unit_cube();
        let mut u = affine(&x0, &Tensor3([[1.15, 0.05, 0.02], [-0.03, 0.95, 0.04], [0.01, 0.02, 1.05]]));
        u[6][2] += 0.03;
        u[1][0] -= 0.02;
        let st = [GrowthState::with_density(5.0); 8];
        let out = element_residual_stiffness(0, &x0, &u, &st, &p, 0.0, 0.0).unwrap();
        let h = 1e-6;
        let mut err: f64 = 0.0;
        let scale = out.k.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        for q in 0..NDOF {
            let mut up = u;
            let mut um = u;
            up[q / 3][q % 3] += h;
            um[q / 3][q % 3] -= h;
            let rp = element_residual_stiffness(0, &x0, &up, &st, &p, 0.0, 0.0).unwrap().r;
            let rm = element_residual_stiffness(0, &x0, &um, &st, &p, 0.0, 0.0).unwrap().r;
            for pp in 0..NDOF {
                err = err.max(((rp[pp] - rm[pp]) / (2.0 * h) - out.k[pp][q]).abs());
            }
        }
        assert!(err < 1e-5 * scale, "err {err} scale {scale}");
    }

    #[test]
    fn inverted_element_reports_id() {
        let p = MaterialParams::collagen_rod();
        let x0 = unit_cube();
        let u = affine(&x0, &Tensor3::diag(-1.0, 1.0, 1.0));
        let e = element_residual_stiffness(7, &x0, &u, &[GrowthState::default(); 8], &p, 0.0, 0.0).unwrap_err();
        assert!(matches!(e, Error::ElementInversion { element: 7, .. }));
    }
}
