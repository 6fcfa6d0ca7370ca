//! Follower pressure on quadrilateral faces.

use super::shape::{gauss_points_2d, quad_shape};
use crate::error::{Error, Result};
use crate::tensor::{cross, norm};

/// Nodal forces and load stiffness of a pressurized face.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceLoad {
    /// Force on the body per face node, `−P ∫ N_a n da`.
    pub f: [[f64; 3]; 4],
    /// `−∂f/∂x`, the contribution to the residual tangent (row a·3+i, column b·3+j).
    pub k: [[f64; 12]; 12],
}

fn skew(v: [f64; 3]) -> [[f64; 3]; 3] {
    [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]]
}

/// Consistent follower-pressure load on a face with current nodal coordinates
/// `x`, ordered so that the parametric normal points out of the solid.
/// Positive `p` pushes against the outward normal.
pub fn pressure_load(x: &[[f64; 3]; 4], p: f64) -> Result<FaceLoad> {
    let mut out = FaceLoad {
        f: [[0.0; 3]; 4],
        k: [[0.0; 12]; 12],
    };
    let mut area = 0.0;
    let diag = norm([x[2][0] - x[0][0], x[2][1] - x[0][1], x[2][2] - x[0][2]])
        .max(norm([x[3][0] - x[1][0], x[3][1] - x[1][1], x[3][2] - x[1][2]]));
    for (st, w) in gauss_points_2d() {
        let (n, dn) = quad_shape(st);
        let mut xs = [0.0; 3];
        let mut xt = [0.0; 3];
        for a in 0..4 {
            for i in 0..3 {
                xs[i] += x[a][i] * dn[a][0];
                xt[i] += x[a][i] * dn[a][1];
            }
        }
        let nda = cross(xs, xt);
        area += w * norm(nda);
        let (sk_s, sk_t) = (skew(xs), skew(xt));
        for a in 0..4 {
            for i in 0..3 {
                out.f[a][i] -= p * w * n[a] * nda[i];
            }
            // d(x_s × x_t)/dx_b = N_b,t [x_s]× − N_b,s [x_t]×
            for b in 0..4 {
                for i in 0..3 {
                    for j in 0..3 {
                        out.k[3 * a + i][3 * b + j] += p * w * n[a] * (dn[b][1] * sk_s[i][j] - dn[b][0] * sk_t[i][j]);
                    }
                }
            }
        }
    }
    if !(area > 1e-12 * diag * diag) || !area.is_finite() {
        return Err(Error::DegenerateFace { element: 0, face: 0 });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor3;

    const UNIT: [[f64; 3]; 4] = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];

    #[test]
    fn flat_unit_face() {
        let l = pressure_load(&UNIT, 2e-3).unwrap();
        for a in 0..4 {
            assert_eq!(l.f[a][0], 0.0);
            assert!((l.f[a][2] + 0.5e-3).abs() < 1e-18);
        }
        let zero = pressure_load(&UNIT, 0.0).unwrap();
        assert!(zero.f.iter().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn force_rotates_with_face() {
        let q = Tensor3::rotation([0.3, -1.0, 0.5], 0.8);
        let l0 = pressure_load(&UNIT, 1.0).unwrap();
        let l1 = pressure_load(&UNIT.map(|x| q.apply(x)), 1.0).unwrap();
        for a in 0..4 {
            let r = q.apply(l0.f[a]);
            for i in 0..3 {
                assert!((r[i] - l1.f[a][i]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn load_stiffness_matches_finite_difference() {
        let x = [[0.0, 0.1, 0.05], [1.2, 0.0, -0.1], [1.0, 0.9, 0.2], [-0.1, 1.1, 0.0]];
        let l = pressure_load(&x, 0.7).unwrap();
        let h = 1e-7;
        for b in 0..4 {
            for j in 0..3 {
                let mut xp = x;
                let mut xm = x;
                xp[b][j] += h;
                xm[b][j] -= h;
                let fp = pressure_load(&xp, 0.7).unwrap().f;
                let fm = pressure_load(&xm, 0.7).unwrap().f;
                for a in 0..4 {
                    for i in 0..3 {
                        let fd = -(fp[a][i] - fm[a][i]) / (2.0 * h);
                        assert!((fd - l.k[3 * a + i][3 * b + j]).abs() < 1e-7);
                    }
                }
            }
        }
    }

    #[test]
    fn collapsed_face_rejected() {
        let x = [[0.0; 3], [1.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0; 3]];
        assert!(matches!(pressure_load(&x, 1.0), Err(Error::DegenerateFace { .. })));
    }
}
