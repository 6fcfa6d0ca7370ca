//! Hexahedral meshes with named node and face sets.

use super::shape::{gauss_points_3d, hex_shape};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Local node ids of the six hex8 faces, ordered counter-clockwise when viewed
/// from outside (so the parametric normal points outward).
pub const HEX_FACES: [[usize; 4]; 6] = [
    [0, 3, 2, 1], // ζ = −1
    [4, 5, 6, 7], // ζ = +1
    [0, 1, 5, 4], // η = −1
    [1, 2, 6, 5], // ξ = +1
    [2, 3, 7, 6], // η = +1
    [3, 0, 4, 7], // ξ = −1
];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mesh {
    /// Reference coordinates, mm.
    pub nodes: Vec<[f64; 3]>,
    pub hex8: Vec<[usize; 8]>,
    #[serde(default)]
    pub node_sets: BTreeMap<String, Vec<usize>>,
    /// `(element, local face)` pairs.
    #[serde(default)]
    pub face_sets: BTreeMap<String, Vec<(usize, u8)>>,
}

impl Mesh {
    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.hex8.len()
    }

    pub fn element_coords(&self, e: usize) -> [[f64; 3]; 8] {
        self.hex8[e].map(|n| self.nodes[n])
    }

    pub fn node_set(&self, name: &str) -> Result<&[usize]> {
        self.node_sets
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Mesh(format!("unknown node set '{name}'")))
    }

    pub fn face_set(&self, name: &str) -> Result<&[(usize, u8)]> {
        self.face_sets
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::Mesh(format!("unknown face set '{name}'")))
    }

    /// Global node ids of a face, outward-ordered.
    pub fn face_nodes(&self, e: usize, face: u8) -> [usize; 4] {
        HEX_FACES[face as usize].map(|k| self.hex8[e][k])
    }

    /// Checks indices and that every element has a positive Jacobian at all
    /// Gauss points.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() || self.hex8.is_empty() {
            return Err(Error::Mesh("mesh has no nodes or no elements".into()));
        }
        if let Some(k) = self.nodes.iter().position(|x| !x.iter().all(|v| v.is_finite())) {
            return Err(Error::Mesh(format!("node {k} has non-finite coordinates")));
        }
        let n = self.nodes.len();
        for (e, conn) in self.hex8.iter().enumerate() {
            if let Some(&bad) = conn.iter().find(|&&i| i >= n) {
                return Err(Error::Mesh(format!("element {e} references node {bad} (only {n} nodes)")));
            }
            let x = self.element_coords(e);
            for (g, (xi, _)) in gauss_points_3d().iter().enumerate() {
                let (_, dn) = hex_shape(*xi);
                let det = jacobian(&x, &dn).det();
                if !(det > 0.0) {
                    return Err(Error::ElementInversion {
                        element: e,
                        gauss_point: g,
                        det,
                    });
                }
            }
        }
        for (name, set) in &self.node_sets {
            if let Some(&bad) = set.iter().find(|&&i| i >= n) {
                return Err(Error::Mesh(format!("node set '{name}' references node {bad}")));
            }
        }
        for (name, set) in &self.face_sets {
            for &(e, f) in set {
                if e >= self.hex8.len() || f >= 6 {
                    return Err(Error::Mesh(format!("face set '{name}' has invalid entry ({e}, {f})")));
                }
            }
        }
        Ok(())
    }

    /// Box mesh `[0,l]×[0,w]×[0,t]` with `nx×ny×nz` elements. Node sets and
    /// face sets `x_min`, `x_max`, `y_min`, `y_max`, `z_min`, `z_max` are
    /// attached.
    pub fn strip(l: f64, w: f64, t: f64, nx: usize, ny: usize, nz: usize) -> Result<Mesh> {
        if !(l > 0.0 && w > 0.0 && t > 0.0) || nx == 0 || ny == 0 || nz == 0 {
            return Err(Error::Mesh(format!(
                "invalid strip: {l} x {w} x {t} mm, {nx} x {ny} x {nz} elements"
            )));
        }
        let id = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
        for k in 0..=nz {
            for j in 0..=ny {
                for i in 0..=nx {
                    nodes.push([
                        l * i as f64 / nx as f64,
                        w * j as f64 / ny as f64,
                        t * k as f64 / nz as f64,
                    ]);
                }
            }
        }
        let mut hex8 = Vec::with_capacity(nx * ny * nz);
        let mut face_sets: BTreeMap<String, Vec<(usize, u8)>> = BTreeMap::new();
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    let e = hex8.len();
                    hex8.push([
                        id(i, j, k),
                        id(i + 1, j, k),
                        id(i + 1, j + 1, k),
                        id(i, j + 1, k),
                        id(i, j, k + 1),
                        id(i + 1, j, k + 1),
                        id(i + 1, j + 1, k + 1),
                        id(i, j + 1, k + 1),
                    ]);
                    let mut add = |name: &str, f: u8| face_sets.entry(name.to_string()).or_default().push((e, f));
                    if k == 0 {
                        add("z_min", 0);
                    }
                    if k + 1 == nz {
                        add("z_max", 1);
                    }
                    if j == 0 {
                        add("y_min", 2);
                    }
                    if i + 1 == nx {
                        add("x_max", 3);
                    }
                    if j + 1 == ny {
                        add("y_max", 4);
                    }
                    if i == 0 {
                        add("x_min", 5);
                    }
                }
            }
        }
        let mut node_sets: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for k in 0..=nz {
            for j in 0..=ny {
                for i in 0..=nx {
                    let n = id(i, j, k);
                    for (name, on) in [
                        ("x_min", i == 0),
                        ("x_max", i == nx),
                        ("y_min", j == 0),
                        ("y_max", j == ny),
                        ("z_min", k == 0),
                        ("z_max", k == nz),
                    ] {
                        if on {
                            node_sets.entry(name.to_string()).or_default().push(n);
                        }
                    }
                }
            }
        }
        Ok(Mesh {
            nodes,
            hex8,
            node_sets,
            face_sets,
        })
    }
}

/// `∂x/∂ξ` of an element for the given shape-function derivatives.
pub(crate) fn jacobian(x: &[[f64; 3]; 8], dn: &[[f64; 3]; 8]) -> crate::tensor::Tensor3 {
    let mut j = [[0.0; 3]; 3];
    for a in 0..8 {
        for i in 0..3 {
            for k in 0..3 {
                j[i][k] += x[a][i] * dn[a][k];
            }
        }
    }
    crate::tensor::Tensor3(j)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strip_counts_and_sets() {
        let m = Mesh::strip(20.0, 6.0, 0.3, 20, 6, 2).unwrap();
        assert_eq!(m.n_elements(), 240);
        assert_eq!(m.n_nodes(), 21 * 7 * 3);
        assert_eq!(m.node_set("x_min").unwrap().len(), 7 * 3);
        assert_eq!(m.face_set("z_min").unwrap().len(), 120);
        m.validate().unwrap();
        assert_eq!(Mesh::strip(20.0, 6.0, 0.3, 40, 12, 2).unwrap().n_elements(), 960);
    }

    #[test]
    fn face_sets_lie_on_boundary() {
        let m = Mesh::strip(2.0, 1.0, 0.5, 2, 2, 2).unwrap();
        for &(e, f) in m.face_set("x_max").unwrap() {
            for n in m.face_nodes(e, f) {
                assert_eq!(m.nodes[n][0], 2.0);
            }
        }
        for &(e, f) in m.face_set("z_min").unwrap() {
            for n in m.face_nodes(e, f) {
                assert_eq!(m.nodes[n][2], 0.0);
            }
        }
    }

    #[test]
    fn inverted_and_dangling_elements_rejected() {
        let mut m = Mesh::strip(1.0, 1.0, 1.0, 1, 1, 1).unwrap();
        m.hex8[0].rotate_left(4);
        assert!(matches!(m.validate(), Err(Error::ElementInversion { element: 0, .. })));
        let mut m = Mesh::strip(1.0, 1.0, 1.0, 1, 1, 1).unwrap();
        m.hex8[0][3] = 99;
        assert!(matches!(m.validate(), Err(Error::Mesh(_))));
        assert!(m.node_set("nope").is_err());
    }
}
