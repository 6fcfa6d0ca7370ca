//! Stress response of the textile-reinforced tissue.
//!
//! The free energy is the sum of a Neo-Hookean matrix, density-weighted
//! collagen fibers, and an orthotropic textile scaffold; stresses and tangents
//! add up the same way. [`total_response`] also advances the collagen density
//! at the material point, so the returned tangent is consistent with the
//! discrete growth update.

pub mod collagen;
pub mod matrix;
pub mod textile;

pub use collagen::{collagen_psi_mass, collagen_stress, CollagenParams, MassEnergy};
pub use matrix::{bulk_energy, matrix_psi_stress_tangent, MatrixParams, MatrixPart};
pub use textile::{textile_psi_stress_tangent, TextileParams};

use crate::error::{Error, Result};
use crate::growth::{update_density, DensityUpdate, GrowthParams, GrowthState};
use crate::tensor::{right_cauchy_green, Direction, SymTensor3, Tangent6, Tensor3};
use serde::{Deserialize, Serialize};

/// Second Piola-Kirchhoff stress with its material tangent `CC = 2 ∂S/∂C`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StressTangent {
    pub s: SymTensor3,
    pub cc: Tangent6,
}

impl std::ops::Add for StressTangent {
    type Output = StressTangent;
    fn add(self, rhs: StressTangent) -> StressTangent {
        StressTangent {
            s: self.s + rhs.s,
            cc: self.cc + rhs.cc,
        }
    }
}

/// Energy per reference volume plus stress and tangent of one constituent.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstituentResponse {
    pub psi: f64,
    pub st: StressTangent,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    pub matrix: MatrixParams,
    pub collagen: CollagenParams,
    /// Omitted means no scaffold.
    #[serde(default = "TextileParams::none")]
    pub textile: TextileParams,
    /// `None` freezes the collagen density at its initial value.
    #[serde(default)]
    pub growth: Option<GrowthParams>,
}

impl MaterialParams {
    /// Material of the pressurized strip: scaffold along x/y, collagen mean
    /// direction along x with dispersion 0.15, growth active.
    pub fn shell_construct() -> Self {
        MaterialParams {
            matrix: MatrixParams::engineered_tissue(),
            collagen: CollagenParams::engineered_tissue(Direction::E1, 0.15),
            textile: TextileParams::electrospun_scaffold(Direction::E1, Direction::E2),
            growth: Some(GrowthParams::shell_construct()),
        }
    }

    /// Scaffold-free collagenous rod (uni-oriented fibers along x, no growth).
    pub fn collagen_rod() -> Self {
        MaterialParams {
            matrix: MatrixParams::engineered_tissue(),
            collagen: CollagenParams::engineered_tissue(Direction::E1, 0.0),
            textile: TextileParams::none(),
            growth: None,
        }
    }

    /// Scaffold alone; the matrix is kept with a negligible shear modulus so
    /// the response stays well posed.
    pub fn bare_scaffold() -> Self {
        MaterialParams {
            matrix: MatrixParams { lambda: 0.0, mu: 1e-9 },
            collagen: CollagenParams::engineered_tissue(Direction::E1, 0.0),
            textile: TextileParams::electrospun_scaffold(Direction::E1, Direction::E2),
            growth: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.matrix.validate()?;
        self.collagen.validate()?;
        self.textile.validate()?;
        if let Some(g) = &self.growth {
            g.validate()?;
        }
        Ok(())
    }
}

/// Full material-point result of [`total_response`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointResponse {
    pub st: StressTangent,
    pub state: GrowthState,
    /// Total free energy per reference volume.
    pub psi: f64,
    /// Mass-specific collagen energy driving growth.
    pub psi_m: f64,
    /// Collagen fiber strain `tr(CH) − 1`.
    pub fiber_strain: f64,
    pub density: DensityUpdate,
}

/// Stress, tangent and updated growth state at a material point.
///
/// `dt = 0` (or no growth parameters) evaluates at frozen density.
pub fn total_response(
    f: &Tensor3,
    params: &MaterialParams,
    state: &GrowthState,
    dt: f64,
    t: f64,
) -> Result<PointResponse> {
    total_response_with(f, params, state, dt, t, MatrixPart::Full)
}

/// As [`total_response`], optionally leaving out the matrix bulk term (for
/// elements that treat it with an averaged dilatation).
pub fn total_response_with(
    f: &Tensor3,
    params: &MaterialParams,
    state: &GrowthState,
    dt: f64,
    t: f64,
    part: MatrixPart,
) -> Result<PointResponse> {
    if !(dt >= 0.0) {
        return Err(Error::domain("dt", dt, ">= 0"));
    }
    state.validate()?;
    let c = right_cauchy_green(f)?;
    let matrix = matrix::matrix_response(&c, &params.matrix, part)?;
    let energy = collagen::collagen_mass_energy(&c, &params.collagen)?;
    let density = match &params.growth {
        Some(g) if dt > 0.0 => update_density(state, t, dt, energy.psi_m, g)?,
        _ => DensityUpdate::frozen(state.rho),
    };
    let co = collagen::collagen_stress_from_energy(&energy, &density)?;
    let tex = textile_psi_stress_tangent(&c, &params.textile)?;

    let st = matrix.st + co + tex.st;
    if !st.s.is_finite() || !st.cc.is_finite() {
        return Err(Error::InvalidDeformation { det: f.det() });
    }
    Ok(PointResponse {
        st,
        state: density.state(),
        psi: matrix.psi + density.rho * energy.psi_m + tex.psi,
        psi_m: energy.psi_m,
        fiber_strain: energy.fiber_strain,
        density,
    })
}

/// Cauchy stress `σ = J⁻¹ F S Fᵀ`.
pub fn cauchy_stress(f: &Tensor3, s: &SymTensor3) -> Result<SymTensor3> {
    let j = f.det();
    if !(j > 0.0) {
        return Err(Error::InvalidDeformation { det: j });
    }
    Ok(f.push_forward(s) * (1.0 / j))
}

/// First Piola-Kirchhoff stress `P = F S`.
pub fn first_piola(f: &Tensor3, s: &SymTensor3) -> Tensor3 {
    f.mul_sym(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_state_is_stress_free() {
        let p = MaterialParams::shell_construct();
        let r = total_response(&Tensor3::identity(), &p, &GrowthState::default(), 0.0, 0.0).unwrap();
        assert!(r.st.s.max_abs() < 1e-16);
        assert_eq!(r.psi, 0.0);
    }

    #[test]
    fn matrix_only_when_other_constituents_switched_off() {
        let mut p = MaterialParams::collagen_rod();
        p.textile = TextileParams::none();
        let f = Tensor3([[1.1, 0.02, 0.0], [0.0, 0.97, 0.01], [0.03, 0.0, 1.01]]);
        let r = total_response(&f, &p, &GrowthState::default(), 0.0, 0.0).unwrap();
        let c = right_cauchy_green(&f).unwrap();
        let m = matrix_psi_stress_tangent(&c, &p.matrix).unwrap();
        assert_eq!(r.st.s, m.st.s);
        assert_eq!(r.st.cc, m.st.cc);
        assert_eq!(r.psi, m.psi);
    }

    #[test]
    fn cauchy_examples() {
        let s = SymTensor3([0.3, -0.2, 0.5, 0.1, 0.05, -0.07]);
        assert_eq!(cauchy_stress(&Tensor3::identity(), &s).unwrap(), s);
        let sig = cauchy_stress(&Tensor3::diag(2.0, 1.0, 1.0), &SymTensor3::diag(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(sig, SymTensor3::diag(2.0, 0.0, 0.0));
        let q = Tensor3::rotation([1.0, 2.0, -0.5], 1.1);
        let sig = cauchy_stress(&q, &s).unwrap();
        assert_relative_eq!(sig.trace(), s.trace(), epsilon = 1e-14);
        assert!(cauchy_stress(&Tensor3::diag(-1.0, 1.0, 1.0), &s).is_err());
    }

    #[test]
    fn frozen_density_when_dt_zero() {
        let p = MaterialParams::shell_construct();
        let f = Tensor3::diag(1.3, 0.9, 0.9);
        let st = GrowthState::with_density(2.0);
        let r = total_response(&f, &p, &st, 0.0, 5.0).unwrap();
        assert_eq!(r.state.rho, 2.0);
        let r = total_response(&f, &p, &st, 0.1, 5.0).unwrap();
        assert!(r.state.rho > 2.0);
    }
}
