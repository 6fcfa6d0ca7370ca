//! Small dense tensor algebra for 3-D continuum mechanics.
//!
//! Symmetric second-order tensors are stored as six components in the order
//! `(11, 22, 33, 12, 13, 23)`. Fourth-order tangents are 6×6 matrices in the
//! same Voigt order, acting on strain vectors with engineering shear
//! components, i.e. `dS = CC · (dE11, dE22, dE33, 2dE12, 2dE13, 2dE23)` with
//! `E = (C − I)/2`. Under that convention `CC[I][J] = CC_ijkl` with no
//! additional shear factors.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Voigt index → tensor index pair.
pub const VOIGT: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

/// Tensor index pair → Voigt index.
#[inline]
pub const fn voigt_index(i: usize, j: usize) -> usize {
    match (i, j) {
        (0, 0) => 0,
        (1, 1) => 1,
        (2, 2) => 2,
        (0, 1) | (1, 0) => 3,
        (0, 2) | (2, 0) => 4,
        _ => 5,
    }
}

/// Determinant threshold below which a tensor is treated as singular.
pub const SINGULAR_DET: f64 = 1e-14;

/// General (non-symmetric) second-order tensor, row-major.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tensor3(pub [[f64; 3]; 3]);

impl Default for Tensor3 {
    fn default() -> Self {
        Self::identity()
    }
}

impl Tensor3 {
    pub const fn zero() -> Self {
        Tensor3([[0.0; 3]; 3])
    }

    pub const fn identity() -> Self {
        Tensor3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        Tensor3([[a, 0.0, 0.0], [0.0, b, 0.0], [0.0, 0.0, c]])
    }

    /// Rotation by `angle` (radians) about `axis` (need not be normalized).
    pub fn rotation(axis: [f64; 3], angle: f64) -> Self {
        let n = norm(axis);
        let [x, y, z] = [axis[0] / n, axis[1] / n, axis[2] / n];
        let (s, c) = angle.sin_cos();
        let t = 1.0 - c;
        Tensor3([
            [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
            [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
            [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
        ])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn transpose(&self) -> Self {
        let a = &self.0;
        Tensor3([
            [a[0][0], a[1][0], a[2][0]],
            [a[0][1], a[1][1], a[2][1]],
            [a[0][2], a[1][2], a[2][2]],
        ])
    }

    pub fn det(&self) -> f64 {
        let a = &self.0;
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1])
            - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d.abs() <= SINGULAR_DET || !d.is_finite() {
            return Err(Error::Singular { det: d });
        }
        let a = &self.0;
        let inv_d = 1.0 / d;
        Ok(Tensor3([
            [
                (a[1][1] * a[2][2] - a[1][2] * a[2][1]) * inv_d,
                (a[0][2] * a[2][1] - a[0][1] * a[2][2]) * inv_d,
                (a[0][1] * a[1][2] - a[0][2] * a[1][1]) * inv_d,
            ],
            [
                (a[1][2] * a[2][0] - a[1][0] * a[2][2]) * inv_d,
                (a[0][0] * a[2][2] - a[0][2] * a[2][0]) * inv_d,
                (a[0][2] * a[1][0] - a[0][0] * a[1][2]) * inv_d,
            ],
            [
                (a[1][0] * a[2][1] - a[1][1] * a[2][0]) * inv_d,
                (a[0][1] * a[2][0] - a[0][0] * a[2][1]) * inv_d,
                (a[0][0] * a[1][1] - a[0][1] * a[1][0]) * inv_d,
            ],
        ]))
    }

    pub fn matmul(&self, other: &Tensor3) -> Tensor3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Tensor3(out)
    }

    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        let a = &self.0;
        [
            a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
            a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
            a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
        ]
    }

    /// `A · S` for symmetric `S`.
    pub fn mul_sym(&self, s: &SymTensor3) -> Tensor3 {
        self.matmul(&s.to_tensor())
    }

    /// `A S Aᵀ`, symmetric by construction.
    pub fn push_forward(&self, s: &SymTensor3) -> SymTensor3 {
        let m = self.mul_sym(s).matmul(&self.transpose());
        SymTensor3::from_tensor_sym(&m)
    }

    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        let mut m = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                m = m.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        m
    }
}

impl Add for Tensor3 {
    type Output = Tensor3;
    fn add(self, rhs: Tensor3) -> Tensor3 {
        let mut out = self.0;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v += rhs.0[i][j];
            }
        }
        Tensor3(out)
    }
}

impl Mul<f64> for Tensor3 {
    type Output = Tensor3;
    fn mul(self, rhs: f64) -> Tensor3 {
        Tensor3(self.0.map(|row| row.map(|v| v * rhs)))
    }
}

/// Symmetric second-order tensor with six stored components.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SymTensor3(pub [f64; 6]);

impl SymTensor3 {
    pub const fn zero() -> Self {
        SymTensor3([0.0; 6])
    }

    pub const fn identity() -> Self {
        SymTensor3([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
    }

    pub const fn diag(a: f64, b: f64, c: f64) -> Self {
        SymTensor3([a, b, c, 0.0, 0.0, 0.0])
    }

    /// `v ⊗ v`.
    pub fn dyad(v: [f64; 3]) -> Self {
        SymTensor3([
            v[0] * v[0],
            v[1] * v[1],
            v[2] * v[2],
            v[0] * v[1],
            v[0] * v[2],
            v[1] * v[2],
        ])
    }

    /// Symmetric part of a general tensor.
    pub fn from_tensor_sym(t: &Tensor3) -> Self {
        let a = &t.0;
        SymTensor3([
            a[0][0],
            a[1][1],
            a[2][2],
            0.5 * (a[0][1] + a[1][0]),
            0.5 * (a[0][2] + a[2][0]),
            0.5 * (a[1][2] + a[2][1]),
        ])
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[voigt_index(i, j)]
    }

    pub fn to_tensor(&self) -> Tensor3 {
        let s = &self.0;
        Tensor3([[s[0], s[3], s[4]], [s[3], s[1], s[5]], [s[4], s[5], s[2]]])
    }

    pub fn trace(&self) -> f64 {
        self.0[0] + self.0[1] + self.0[2]
    }

    pub fn det(&self) -> f64 {
        let s = &self.0;
        s[0] * (s[1] * s[2] - s[5] * s[5]) - s[3] * (s[3] * s[2] - s[5] * s[4])
            + s[4] * (s[3] * s[5] - s[1] * s[4])
    }

    pub fn inverse(&self) -> Result<Self> {
        let d = self.det();
        if d.abs() <= SINGULAR_DET || !d.is_finite() {
            return Err(Error::Singular { det: d });
        }
        let s = &self.0;
        let inv_d = 1.0 / d;
        Ok(SymTensor3([
            (s[1] * s[2] - s[5] * s[5]) * inv_d,
            (s[0] * s[2] - s[4] * s[4]) * inv_d,
            (s[0] * s[1] - s[3] * s[3]) * inv_d,
            (s[4] * s[5] - s[3] * s[2]) * inv_d,
            (s[3] * s[5] - s[4] * s[1]) * inv_d,
            (s[3] * s[4] - s[0] * s[5]) * inv_d,
        ]))
    }

    /// Full double contraction `A : B`.
    pub fn ddot(&self, other: &SymTensor3) -> f64 {
        let (a, b) = (&self.0, &other.0);
        a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + 2.0 * (a[3] * b[3] + a[4] * b[4] + a[5] * b[5])
    }

    /// `tr(A·B)`; equal to `A : B` for symmetric arguments.
    #[inline]
    pub fn trace_of_product(&self, other: &SymTensor3) -> f64 {
        self.ddot(other)
    }

    /// Matrix product `A·B` (generally non-symmetric).
    pub fn matmul(&self, other: &SymTensor3) -> Tensor3 {
        self.to_tensor().matmul(&other.to_tensor())
    }

    /// `A·B + B·A`, which is symmetric when both factors are.
    pub fn sym_product(&self, other: &SymTensor3) -> SymTensor3 {
        let ab = self.matmul(other);
        SymTensor3::from_tensor_sym(&ab) * 2.0
    }

    /// `A · X · A` for symmetric `X`.
    pub fn sandwich(&self, x: &SymTensor3) -> SymTensor3 {
        let a = self.to_tensor();
        SymTensor3::from_tensor_sym(&a.matmul(&x.to_tensor()).matmul(&a))
    }

    pub fn square(&self) -> SymTensor3 {
        SymTensor3::from_tensor_sym(&self.matmul(self))
    }

    /// Components laid out as a Voigt stress vector (no shear factors).
    pub fn as_voigt(&self) -> [f64; 6] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.ddot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// Symmetric tensor `dC` corresponding to a unit engineering-strain
    /// perturbation in Voigt slot `j` (`dC = 2 dE`).
    pub fn unit_strain_perturbation(j: usize) -> SymTensor3 {
        let mut c = [0.0; 6];
        c[j] = if j < 3 { 2.0 } else { 1.0 };
        SymTensor3(c)
    }
}

impl Add for SymTensor3 {
    type Output = SymTensor3;
    fn add(self, rhs: SymTensor3) -> SymTensor3 {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o += r;
        }
        SymTensor3(out)
    }
}

impl AddAssign for SymTensor3 {
    fn add_assign(&mut self, rhs: SymTensor3) {
        for (o, r) in self.0.iter_mut().zip(rhs.0) {
            *o += r;
        }
    }
}

impl Sub for SymTensor3 {
    type Output = SymTensor3;
    fn sub(self, rhs: SymTensor3) -> SymTensor3 {
        let mut out = self.0;
        for (o, r) in out.iter_mut().zip(rhs.0) {
            *o -= r;
        }
        SymTensor3(out)
    }
}

impl Neg for SymTensor3 {
    type Output = SymTensor3;
    fn neg(self) -> SymTensor3 {
        SymTensor3(self.0.map(|v| -v))
    }
}

impl Mul<f64> for SymTensor3 {
    type Output = SymTensor3;
    fn mul(self, rhs: f64) -> SymTensor3 {
        SymTensor3(self.0.map(|v| v * rhs))
    }
}

/// Fourth-order tangent in 6×6 Voigt storage (see module docs).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Tangent6(pub [[f64; 6]; 6]);

impl Tangent6 {
    pub const fn zero() -> Self {
        Tangent6([[0.0; 6]; 6])
    }

    /// `A ⊗ B` with `A` on the row (stress) side.
    pub fn dyad(a: &SymTensor3, b: &SymTensor3) -> Self {
        let mut m = [[0.0; 6]; 6];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a.0[i] * b.0[j];
            }
        }
        Tangent6(m)
    }

    /// Builds a tangent column by column from a linear map `dC ↦ dS`.
    ///
    /// Column `j` is `dS` evaluated at the `dC` of a unit engineering strain in
    /// slot `j`, which matches the `dS = CC · dE_voigt` convention.
    pub fn from_directional<F: Fn(&SymTensor3) -> SymTensor3>(ds: F) -> Self {
        let mut m = [[0.0; 6]; 6];
        for j in 0..6 {
            let col = ds(&SymTensor3::unit_strain_perturbation(j));
            for (i, row) in m.iter_mut().enumerate() {
                row[j] = col.0[i];
            }
        }
        Tangent6(m)
    }

    /// `CC · dE` with `dE` an engineering-shear Voigt strain.
    pub fn apply(&self, de: &[f64; 6]) -> SymTensor3 {
        let mut out = [0.0; 6];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..6).map(|j| self.0[i][j] * de[j]).sum();
        }
        SymTensor3(out)
    }

    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Largest `|CC_ij − CC_ji|` relative to the largest entry.
    pub fn major_asymmetry(&self) -> f64 {
        let mut d = 0.0f64;
        for i in 0..6 {
            for j in 0..i {
                d = d.max((self.0[i][j] - self.0[j][i]).abs());
            }
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            d / scale
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

impl Add for Tangent6 {
    type Output = Tangent6;
    fn add(self, rhs: Tangent6) -> Tangent6 {
        let mut m = self.0;
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v += rhs.0[i][j];
            }
        }
        Tangent6(m)
    }
}

impl AddAssign for Tangent6 {
    fn add_assign(&mut self, rhs: Tangent6) {
        *self = *self + rhs;
    }
}

impl Sub for Tangent6 {
    type Output = Tangent6;
    fn sub(self, rhs: Tangent6) -> Tangent6 {
        self + rhs * -1.0
    }
}

impl Mul<f64> for Tangent6 {
    type Output = Tangent6;
    fn mul(self, rhs: f64) -> Tangent6 {
        Tangent6(self.0.map(|row| row.map(|v| v * rhs)))
    }
}

/// Unit direction vector. Construction normalizes; a zero vector is rejected.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(into = "[f64; 3]")]
pub struct Direction([f64; 3]);

impl Direction {
    pub const E1: Direction = Direction([1.0, 0.0, 0.0]);
    pub const E2: Direction = Direction([0.0, 1.0, 0.0]);
    pub const E3: Direction = Direction([0.0, 0.0, 1.0]);

    pub fn new(v: [f64; 3]) -> Result<Self> {
        let n = norm(v);
        if !(n.is_finite() && n > 1e-300) {
            return Err(Error::ParameterDomain {
                name: "direction".into(),
                value: n,
                expected: "non-zero finite vector".into(),
            });
        }
        Ok(Direction([v[0] / n, v[1] / n, v[2] / n]))
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }

    /// Rank-one projector `v ⊗ v`.
    pub fn projector(&self) -> SymTensor3 {
        SymTensor3::dyad(self.0)
    }
}

impl From<Direction> for [f64; 3] {
    fn from(d: Direction) -> [f64; 3] {
        d.0
    }
}

impl<'de> Deserialize<'de> for Direction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = <[f64; 3]>::deserialize(d)?;
        Direction::new(v).map_err(serde::de::Error::custom)
    }
}

pub fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Right Cauchy-Green tensor `C = FᵀF`.
pub fn right_cauchy_green(f: &Tensor3) -> Result<SymTensor3> {
    let det = f.det();
    if !(det > 0.0) || !det.is_finite() {
        return Err(Error::InvalidDeformation { det });
    }
    let a = &f.0;
    let col = |i: usize, j: usize| (0..3).map(|k| a[k][i] * a[k][j]).sum::<f64>();
    Ok(SymTensor3([
        col(0, 0),
        col(1, 1),
        col(2, 2),
        col(0, 1),
        col(0, 2),
        col(1, 2),
    ]))
}

/// Generalized structural tensor `H = κI + (1 − 3κ) a⊗a` for dispersed fibers.
pub fn gen_structural_tensor(a: &Direction, kappa: f64) -> Result<SymTensor3> {
    if !(0.0..=1.0 / 3.0).contains(&kappa) {
        return Err(Error::ParameterDomain {
            name: "kappa".into(),
            value: kappa,
            expected: "0 <= kappa <= 1/3".into(),
        });
    }
    Ok(SymTensor3::identity() * kappa + a.projector() * (1.0 - 3.0 * kappa))
}

/// Squared fiber stretch `λ² = tr(C·H)` and fiber strain `E = λ² − 1`.
pub fn fiber_strain(c: &SymTensor3, h: &SymTensor3) -> (f64, f64) {
    let lambda_sq = c.trace_of_product(h);
    (lambda_sq, lambda_sq - 1.0)
}

/// The five invariants driving the orthotropic scaffold energy.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TextileInvariants {
    pub i1: f64,
    pub i2: f64,
    pub i3: f64,
    pub i4: f64,
    pub i5: f64,
}

impl TextileInvariants {
    pub fn as_array(&self) -> [f64; 5] {
        [self.i1, self.i2, self.i3, self.i4, self.i5]
    }
}

/// `I1 = tr C`, `I2 = tr(C M1)`, `I3 = tr(C² M1)`, `I4 = tr(C M2)`, `I5 = tr(C² M2)`.
pub fn textile_invariants(c: &SymTensor3, m1: &SymTensor3, m2: &SymTensor3) -> TextileInvariants {
    let c2 = c.square();
    TextileInvariants {
        i1: c.trace(),
        i2: c.trace_of_product(m1),
        i3: c2.trace_of_product(m1),
        i4: c.trace_of_product(m2),
        i5: c2.trace_of_product(m2),
    }
}
