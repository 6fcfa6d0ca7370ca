//! Trilinear hexahedron and bilinear quadrilateral shape functions.

const G: f64 = 0.577_350_269_189_625_8; // 1/√3

/// Natural coordinates of the hex8 corner nodes.
pub const HEX_NODES: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

const QUAD_NODES: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

/// 2×2×2 Gauss points `(ξ, weight)`.
pub fn gauss_points_3d() -> [([f64; 3], f64); 8] {
    HEX_NODES.map(|n| ([n[0] * G, n[1] * G, n[2] * G], 1.0))
}

/// 2×2 Gauss points `(s, t, weight)`.
pub fn gauss_points_2d() -> [([f64; 2], f64); 4] {
    QUAD_NODES.map(|n| ([n[0] * G, n[1] * G], 1.0))
}

/// Shape function values and natural derivatives at `xi`.
pub fn hex_shape(xi: [f64; 3]) -> ([f64; 8], [[f64; 3]; 8]) {
    let mut n = [0.0; 8];
    let mut dn = [[0.0; 3]; 8];
    for (a, c) in HEX_NODES.iter().enumerate() {
        let f = [1.0 + c[0] * xi[0], 1.0 + c[1] * xi[1], 1.0 + c[2] * xi[2]];
        n[a] = 0.125 * f[0] * f[1] * f[2];
        dn[a] = [
            0.125 * c[0] * f[1] * f[2],
            0.125 * c[1] * f[0] * f[2],
            0.125 * c[2] * f[0] * f[1],
        ];
    }
    (n, dn)
}

pub fn quad_shape(st: [f64; 2]) -> ([f64; 4], [[f64; 2]; 4]) {
    let mut n = [0.0; 4];
    let mut dn = [[0.0; 2]; 4];
    for (a, c) in QUAD_NODES.iter().enumerate() {
        let f = [1.0 + c[0] * st[0], 1.0 + c[1] * st[1]];
        n[a] = 0.25 * f[0] * f[1];
        dn[a] = [0.25 * c[0] * f[1], 0.25 * c[1] * f[0]];
    }
    (n, dn)
}
