//! Dispersed collagen fibers with a density-weighted exponential energy.
//!
//! The energy per unit mass is `ψm = k1/(2 k2 ρ_f) (exp(k2 E²) − 1)` in fiber
//! tension (`λ_co ≥ 1`) and zero otherwise, with `E = tr(C H) − 1`. The energy
//! per reference volume is `ρ ψm`, where `ρ` is the referential collagen
//! density. When `ρ` itself depends on `C` through the growth update, the stress
//! picks up the `ψm ∂ρ/∂C` term.

use super::StressTangent;
use crate::error::{Error, Result};
use crate::growth::DensityUpdate;
use crate::tensor::{fiber_strain, gen_structural_tensor, Direction, SymTensor3, Tangent6};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CollagenParams {
    /// Stiffness-like parameter, MPa.
    #[serde(deserialize_with = "crate::units::stress")]
    pub k1: f64,
    /// Exponential stiffening, dimensionless.
    pub k2: f64,
    /// Fiber dispersion, `0 ≤ κ ≤ 1/3`.
    pub kappa: f64,
    /// Mean fiber direction in the reference configuration.
    pub direction: Direction,
    /// Final (fully matured) collagen density, µg/mm³.
    pub rho_f: f64,
}

impl CollagenParams {
    /// Identified collagenous-tissue fibers (k1 = 0.825 MPa, k2 = 4, ρ_f = 38.71 µg/mm³).
    pub fn engineered_tissue(direction: Direction, kappa: f64) -> Self {
        CollagenParams {
            k1: 0.825,
            k2: 4.0,
            kappa,
            direction,
            rho_f: 38.71,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k1.is_finite() && self.k1 > 0.0) {
            return Err(Error::domain("k1", self.k1, "> 0"));
        }
        if !(self.k2.is_finite() && self.k2 > 0.0) {
            return Err(Error::domain("k2", self.k2, "> 0"));
        }
        if !(0.0..=1.0 / 3.0).contains(&self.kappa) {
            return Err(Error::domain("kappa", self.kappa, "0 <= kappa <= 1/3"));
        }
        if !(self.rho_f.is_finite() && self.rho_f > 0.0) {
            return Err(Error::domain("rho_f", self.rho_f, "> 0"));
        }
        Ok(())
    }

    pub fn structural_tensor(&self) -> Result<SymTensor3> {
        gen_structural_tensor(&self.direction, self.kappa)
    }
}

/// Mass-specific collagen energy, its gradient `∂ψm/∂C`, and the fiber kinematics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassEnergy {
    pub psi_m: f64,
    pub dpsi_m_dc: SymTensor3,
    /// `∂²ψm/∂C² = curvature · H⊗H`.
    pub curvature: f64,
    pub h: SymTensor3,
    pub fiber_strain: f64,
}

pub fn collagen_mass_energy(c: &SymTensor3, p: &CollagenParams) -> Result<MassEnergy> {
    let h = p.structural_tensor()?;
    let (lambda_sq, e) = fiber_strain(c, &h);
    if lambda_sq < 1.0 {
        return Ok(MassEnergy {
            psi_m: 0.0,
            dpsi_m_dc: SymTensor3::zero(),
            curvature: 0.0,
            h,
            fiber_strain: e,
        });
    }
    let x = (p.k2 * e * e).exp();
    let scale = p.k1 / p.rho_f;
    Ok(MassEnergy {
        psi_m: scale / (2.0 * p.k2) * (x - 1.0),
        dpsi_m_dc: h * (scale * e * x),
        curvature: scale * x * (1.0 + 2.0 * p.k2 * e * e),
        h,
        fiber_strain: e,
    })
}

/// `(ψm, ∂ψm/∂C)`.
pub fn collagen_psi_mass(c: &SymTensor3, p: &CollagenParams) -> Result<(f64, SymTensor3)> {
    let m = collagen_mass_energy(c, p)?;
    Ok((m.psi_m, m.dpsi_m_dc))
}

/// Collagen stress and tangent for a density that may depend on `C` through ψm.
///
/// With `ρ' = dρ/dψm` and `ρ'' = d²ρ/dψm²` from the growth update,
/// `S = 2 (ψm ρ' + ρ) g` and `CC = 4 [(2ρ' + ψm ρ'') g⊗g + (ψm ρ' + ρ) ∂g/∂C]`
/// with `g = ∂ψm/∂C`. A frozen density has `ρ' = ρ'' = 0`.
pub fn collagen_stress(c: &SymTensor3, p: &CollagenParams, density: &DensityUpdate) -> Result<StressTangent> {
    let m = collagen_mass_energy(c, p)?;
    collagen_stress_from_energy(&m, density)
}

pub(crate) fn collagen_stress_from_energy(m: &MassEnergy, density: &DensityUpdate) -> Result<StressTangent> {
    if !(density.rho >= 0.0) || !density.rho.is_finite() {
        return Err(Error::StateCorruption(format!(
            "collagen density {} is negative or non-finite",
            density.rho
        )));
    }
    let (rho, d1, d2) = (density.rho, density.drho_dpsim, density.d2rho_dpsim2);
    let g = m.dpsi_m_dc;
    let weight = m.psi_m * d1 + rho;
    let s = g * (2.0 * weight);
    let cc = Tangent6::dyad(&g, &g) * (4.0 * (2.0 * d1 + m.psi_m * d2))
        + Tangent6::dyad(&m.h, &m.h) * (4.0 * weight * m.curvature);
    Ok(StressTangent { s, cc })
}
