//! Orthotropic textile scaffold energy in terms of five invariants.
//!
//! With `d1 = I1 − 3` and `dk = Ik − 1` for the directional invariants,
//!
//! ```text
//! ψ = K1_1 d2^β1 + K2_1 d3^β2 + K1_2 d4^γ1 + K2_2 d5^γ2
//!   + Kcoup1 (d1 d2)^δ1 + Kcoup2 (d1 d4)^δ2 + KcoupAni (d2 d4)^ξ
//! ```
//!
//! Exponents are integers ≥ 2, so the energy and its first derivatives vanish at
//! `C = I`. Odd exponents make the energy negative under compression along a
//! scaffold direction; the model is meant for the tension regime.

use super::{ConstituentResponse, StressTangent};
use crate::error::{Error, Result};
use crate::tensor::{textile_invariants, Direction, SymTensor3, Tangent6};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextileParams {
    /// Multiplies `(I2 − 1)^β1` (first direction, linear invariant), MPa.
    #[serde(rename = "K1_1", deserialize_with = "crate::units::stress")]
    pub k1_1: f64,
    /// Multiplies `(I3 − 1)^β2` (first direction, quadratic invariant), MPa.
    #[serde(rename = "K2_1", deserialize_with = "crate::units::stress")]
    pub k2_1: f64,
    /// Multiplies `(I4 − 1)^γ1`, MPa.
    #[serde(rename = "K1_2", deserialize_with = "crate::units::stress")]
    pub k1_2: f64,
    /// Multiplies `(I5 − 1)^γ2`, MPa.
    #[serde(rename = "K2_2", deserialize_with = "crate::units::stress")]
    pub k2_2: f64,
    #[serde(rename = "Kcoup1", deserialize_with = "crate::units::stress")]
    pub k_coup1: f64,
    #[serde(rename = "Kcoup2", deserialize_with = "crate::units::stress")]
    pub k_coup2: f64,
    #[serde(rename = "KcoupAni", deserialize_with = "crate::units::stress")]
    pub k_coup_ani: f64,
    pub beta1: u32,
    pub beta2: u32,
    pub gamma1: u32,
    pub gamma2: u32,
    pub delta1: u32,
    pub delta2: u32,
    pub xi: u32,
    pub n1: Direction,
    pub n2: Direction,
}

impl TextileParams {
    /// Identified electrospun scaffold (stiffnesses converted from kPa to MPa).
    pub fn electrospun_scaffold(n1: Direction, n2: Direction) -> Self {
        let kpa = crate::units::KPA;
        TextileParams {
            k1_1: 38.51 * kpa,
            k2_1: 1.48 * kpa,
            k1_2: 214.39 * kpa,
            k2_2: 0.0001 * kpa,
            k_coup1: 183.72 * kpa,
            k_coup2: 58.71 * kpa,
            k_coup_ani: 571.83 * kpa,
            beta1: 3,
            beta2: 2,
            gamma1: 4,
            gamma2: 2,
            delta1: 2,
            delta2: 3,
            xi: 12,
            n1,
            n2,
        }
    }

    /// A scaffold that contributes nothing.
    pub fn none() -> Self {
        let mut p = Self::electrospun_scaffold(Direction::E1, Direction::E2);
        p.set_stiffnesses([0.0; 7]);
        p
    }

    pub fn stiffnesses(&self) -> [f64; 7] {
        [
            self.k1_1,
            self.k2_1,
            self.k1_2,
            self.k2_2,
            self.k_coup1,
            self.k_coup2,
            self.k_coup_ani,
        ]
    }

    pub fn set_stiffnesses(&mut self, k: [f64; 7]) {
        [
            self.k1_1,
            self.k2_1,
            self.k1_2,
            self.k2_2,
            self.k_coup1,
            self.k_coup2,
            self.k_coup_ani,
        ] = k;
    }

    pub fn exponents(&self) -> [u32; 7] {
        [
            self.beta1,
            self.beta2,
            self.gamma1,
            self.gamma2,
            self.delta1,
            self.delta2,
            self.xi,
        ]
    }

    pub fn validate(&self) -> Result<()> {
        const K_NAMES: [&str; 7] = ["K1_1", "K2_1", "K1_2", "K2_2", "Kcoup1", "Kcoup2", "KcoupAni"];
        const E_NAMES: [&str; 7] = ["beta1", "beta2", "gamma1", "gamma2", "delta1", "delta2", "xi"];
        for (name, k) in K_NAMES.iter().zip(self.stiffnesses()) {
            if !(k.is_finite() && k >= 0.0) {
                return Err(Error::domain(*name, k, ">= 0"));
            }
        }
        for (name, e) in E_NAMES.iter().zip(self.exponents()) {
            if e < 2 {
                return Err(Error::domain(*name, e as f64, "integer >= 2"));
            }
        }
        Ok(())
    }
}

#[inline]
fn ipow(x: f64, n: u32) -> f64 {
    let mut out = 1.0;
    for _ in 0..n {
        out *= x;
    }
    out
}

/// `(x^n, n x^(n−1), n(n−1) x^(n−2))`, valid for `n ≥ 2`.
#[inline]
fn power_terms(x: f64, n: u32) -> (f64, f64, f64) {
    let nf = n as f64;
    let xm2 = ipow(x, n - 2);
    let xm1 = xm2 * x;
    (xm1 * x, nf * xm1, nf * (nf - 1.0) * xm2)
}

/// Energy, gradient and Hessian of the scaffold energy with respect to the
/// invariant differences `(d1, …, d5)`.
fn invariant_derivatives(d: [f64; 5], p: &TextileParams) -> (f64, [f64; 5], [[f64; 5]; 5]) {
    let mut psi = 0.0;
    let mut g = [0.0; 5];
    let mut hess = [[0.0; 5]; 5];

    let single = [
        (p.k1_1, 1usize, p.beta1),
        (p.k2_1, 2, p.beta2),
        (p.k1_2, 3, p.gamma1),
        (p.k2_2, 4, p.gamma2),
    ];
    for (k, idx, n) in single {
        if k == 0.0 {
            continue;
        }
        let (f, df, d2f) = power_terms(d[idx], n);
        psi += k * f;
        g[idx] += k * df;
        hess[idx][idx] += k * d2f;
    }

    // (da db)^n = da^n db^n
    let coupled = [
        (p.k_coup1, 0usize, 1usize, p.delta1),
        (p.k_coup2, 0, 3, p.delta2),
        (p.k_coup_ani, 1, 3, p.xi),
    ];
    for (k, a, b, n) in coupled {
        if k == 0.0 {
            continue;
        }
        let (fa, dfa, d2fa) = power_terms(d[a], n);
        let (fb, dfb, d2fb) = power_terms(d[b], n);
        psi += k * fa * fb;
        g[a] += k * dfa * fb;
        g[b] += k * fa * dfb;
        hess[a][a] += k * d2fa * fb;
        hess[b][b] += k * fa * d2fb;
        hess[a][b] += k * dfa * dfb;
        hess[b][a] += k * dfa * dfb;
    }
    (psi, g, hess)
}

pub fn textile_psi_stress_tangent(c: &SymTensor3, p: &TextileParams) -> Result<ConstituentResponse> {
    let m1 = p.n1.projector();
    let m2 = p.n2.projector();
    let inv = textile_invariants(c, &m1, &m2);
    let d = [inv.i1 - 3.0, inv.i2 - 1.0, inv.i3 - 1.0, inv.i4 - 1.0, inv.i5 - 1.0];
    let (psi, dpsi, d2psi) = invariant_derivatives(d, p);

    // ∂I/∂C for each invariant
    let grads = [
        SymTensor3::identity(),
        m1,
        c.sym_product(&m1),
        m2,
        c.sym_product(&m2),
    ];
    let mut s = SymTensor3::zero();
    for (gk, dk) in grads.iter().zip(dpsi) {
        s += *gk * (2.0 * dk);
    }
    let cc = Tangent6::from_directional(|dc| {
        let proj: Vec<f64> = grads.iter().map(|gm| gm.ddot(dc)).collect();
        let mut ds = SymTensor3::zero();
        for (k, gk) in grads.iter().enumerate() {
            let w: f64 = (0..5).map(|m| d2psi[k][m] * proj[m]).sum();
            ds += *gk * (2.0 * w);
        }
        ds += dc.sym_product(&m1) * (2.0 * dpsi[2]);
        ds += dc.sym_product(&m2) * (2.0 * dpsi[4]);
        ds
    });
    Ok(ConstituentResponse {
        psi,
        st: StressTangent { s, cc },
    })
}
