//! Compressible Neo-Hookean ground matrix.
//!
//! `ψ = µ/2 (tr C − 3) − µ ln J + λ/4 (J² − 1 − 2 ln J)`.
//! The λ term is the bulk part; finite elements with mean dilatation evaluate
//! it separately from an element-averaged `J` (see [`bulk_energy`]).

use super::{ConstituentResponse, StressTangent};
use crate::error::{Error, Result};
use crate::tensor::{SymTensor3, Tangent6};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixParams {
    /// First Lamé-type constant, MPa.
    #[serde(deserialize_with = "crate::units::stress")]
    pub lambda: f64,
    /// Shear modulus, MPa.
    #[serde(deserialize_with = "crate::units::stress")]
    pub mu: f64,
}

impl MatrixParams {
    /// Identified collagenous-tissue matrix (λ = 10 MPa, µ = 0.05 MPa).
    pub fn engineered_tissue() -> Self {
        MatrixParams {
            lambda: 10.0,
            mu: 0.05,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::domain("mu", self.mu, "> 0"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::domain("lambda", self.lambda, ">= 0"));
        }
        Ok(())
    }
}

/// Which part of the matrix energy to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MatrixPart {
    #[default]
    Full,
    /// Everything except the λ-weighted bulk term.
    WithoutBulk,
}

/// Bulk energy `U(J) = λ/4 (J² − 1 − 2 ln J)` and its first two derivatives in `J`.
pub fn bulk_energy(j: f64, lambda: f64) -> (f64, f64, f64) {
    let u = 0.25 * lambda * (j * j - 1.0 - 2.0 * j.ln());
    let du = 0.5 * lambda * (j - 1.0 / j);
    let d2u = 0.5 * lambda * (1.0 + 1.0 / (j * j));
    (u, du, d2u)
}

pub fn matrix_psi_stress_tangent(c: &SymTensor3, p: &MatrixParams) -> Result<ConstituentResponse> {
    matrix_response(c, p, MatrixPart::Full)
}

pub fn matrix_response(c: &SymTensor3, p: &MatrixParams, part: MatrixPart) -> Result<ConstituentResponse> {
    let det_c = c.det();
    if !(det_c > 0.0) || !det_c.is_finite() {
        return Err(Error::InvalidDeformation { det: det_c });
    }
    let j = det_c.sqrt();
    let ln_j = j.ln();
    let c_inv = c.inverse()?;
    let i = SymTensor3::identity();
    let mu = p.mu;
    let lambda = match part {
        MatrixPart::Full => p.lambda,
        MatrixPart::WithoutBulk => 0.0,
    };
    let j2 = j * j;

    let psi = 0.5 * mu * (c.trace() - 3.0) - mu * ln_j + 0.25 * lambda * (j2 - 1.0 - 2.0 * ln_j);
    let s = (i - c_inv) * mu + c_inv * (0.5 * lambda * (j2 - 1.0));
    // d(C⁻¹)[dC] = −C⁻¹ dC C⁻¹,  d(J²)[dC] = J² C⁻¹ : dC
    let cc = Tangent6::from_directional(|dc| {
        let cdc = c_inv.sandwich(dc);
        cdc * (mu - 0.5 * lambda * (j2 - 1.0)) + c_inv * (0.5 * lambda * j2 * c_inv.ddot(dc))
    });
    Ok(ConstituentResponse {
        psi,
        st: StressTangent { s, cc },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{right_cauchy_green, Tensor3};
    use approx::assert_relative_eq;

    #[test]
    fn reference_state_is_stress_free() {
        let r = matrix_psi_stress_tangent(&SymTensor3::identity(), &MatrixParams::engineered_tissue()).unwrap();
        assert_eq!(r.psi, 0.0);
        assert!(r.st.s.max_abs() < 1e-16);
    }

    #[test]
    fn uniaxial_stretch_closed_form() {
        let p = MatrixParams::engineered_tissue();
        let c = right_cauchy_green(&Tensor3::diag(1.2, 1.0, 1.0)).unwrap();
        let r = matrix_psi_stress_tangent(&c, &p).unwrap();
        // S11 = µ(1 − 1/1.44) + λ/2 (1.44 − 1)/1.44
        assert_relative_eq!(r.st.s.0[0], 1.543055555555, max_relative = 1e-10);
        assert_relative_eq!(r.st.s.0[0], 1.5431, max_relative = 1e-4);
        assert_relative_eq!(r.st.s.0[1], 0.5 * p.lambda * (1.44 - 1.0), max_relative = 1e-12);
    }

    #[test]
    fn bulk_split_adds_up() {
        let p = MatrixParams::engineered_tissue();
        let f = Tensor3([[1.1, 0.05, 0.0], [0.02, 0.95, 0.03], [0.0, -0.01, 1.02]]);
        let c = right_cauchy_green(&f).unwrap();
        let full = matrix_psi_stress_tangent(&c, &p).unwrap();
        let dev = matrix_response(&c, &p, MatrixPart::WithoutBulk).unwrap();
        let j = f.det();
        let (u, du, _) = bulk_energy(j, p.lambda);
        assert_relative_eq!(full.psi, dev.psi + u, epsilon = 1e-14);
        // S_bulk = U'(J) J C⁻¹
        let s_bulk = c.inverse().unwrap() * (du * j);
        for k in 0..6 {
            assert_relative_eq!(full.st.s.0[k], dev.st.s.0[k] + s_bulk.0[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_inverted_state() {
        let c = SymTensor3::diag(-1.0, 1.0, 1.0);
        assert!(matrix_psi_stress_tangent(&c, &MatrixParams::engineered_tissue()).is_err());
    }
}
