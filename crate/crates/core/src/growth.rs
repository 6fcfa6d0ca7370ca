//! Collagen density evolution.
//!
//! The referential collagen density grows through a biologically driven
//! Weibull-shaped deposition and a mechanically driven term that activates once
//! the mass-specific collagen energy exceeds a threshold. The rate equation is
//! integrated with backward Euler; the implicit residual is solved with a
//! bracketed scalar Newton iteration, and the first and second sensitivities of
//! the converged density with respect to the driving energy are returned for
//! the consistent stress and tangent.
//!
//! Units: µg, mm, day; energies per mass in MPa·mm³/µg.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Absolute residual tolerance of the local density update, µg/mm³.
pub const DENSITY_TOL: f64 = 1e-12;
/// Iteration cap of the local density update.
pub const DENSITY_MAX_ITER: usize = 50;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthParams {
    /// Collagen mass deposited per cell, µg/cell.
    pub a1: f64,
    /// Mechanically driven deposition rate, mm³/cell/day.
    pub a2: f64,
    /// Activation threshold of the mass-specific collagen energy, MPa·mm³/µg.
    #[serde(deserialize_with = "crate::units::specific_energy")]
    pub psi_crit: f64,
    /// Saturation density, µg/mm³.
    pub rho_th: f64,
    /// Cell density, cells/mm³.
    pub c_cell: f64,
    /// Weibull scale, days.
    pub tau: f64,
    /// Weibull shape.
    pub h: f64,
}

impl GrowthParams {
    /// Parameters of the pressurized shell construct (cultivation of a
    /// textile-reinforced strip), with ψ_crit already in internal units.
    pub fn shell_construct() -> Self {
        GrowthParams {
            a1: 5e-4,
            a2: 5e-7,
            psi_crit: 2e-5 * crate::units::JOULE_PER_UG,
            rho_th: 10.0,
            c_cell: 15e3,
            tau: 14.21,
            h: 1.65,
        }
    }

    /// Rejects values outside the admissible domain.
    ///
    /// `a1` and `a2` may be zero (that switches the corresponding source off);
    /// the Weibull shape must exceed one so the deposition rate is finite at
    /// `t = 0`.
    pub fn validate(&self) -> Result<()> {
        let nonneg = [("a1", self.a1), ("a2", self.a2)];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(name, v, ">= 0"));
            }
        }
        let positive = [
            ("psi_crit", self.psi_crit),
            ("rho_th", self.rho_th),
            ("c_cell", self.c_cell),
            ("tau", self.tau),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(name, v, "> 0"));
            }
        }
        if !(self.h.is_finite() && self.h > 1.0) {
            return Err(Error::domain("h", self.h, "> 1"));
        }
        Ok(())
    }

    /// Total biologically deposited density `a1·c_cell` as `t → ∞`.
    pub fn bio_capacity(&self) -> f64 {
        self.a1 * self.c_cell
    }
}

/// Per-Gauss-point growth history.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GrowthState {
    /// Referential collagen density, µg/mm³.
    pub rho: f64,
    /// Sensitivity `dρ/dψm` of the last update.
    pub drho_dpsim: f64,
}

impl GrowthState {
    pub fn with_density(rho: f64) -> Self {
        GrowthState {
            rho,
            drho_dpsim: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rho.is_finite() && self.rho >= 0.0) {
            return Err(Error::StateCorruption(format!(
                "collagen density {} is negative or non-finite",
                self.rho
            )));
        }
        if !(self.drho_dpsim.is_finite() && self.drho_dpsim >= 0.0) {
            return Err(Error::StateCorruption(format!(
                "density sensitivity {} is negative or non-finite",
                self.drho_dpsim
            )));
        }
        Ok(())
    }
}

/// Converged density and its sensitivities to the driving energy.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DensityUpdate {
    pub rho: f64,
    pub drho_dpsim: f64,
    pub d2rho_dpsim2: f64,
    pub iterations: usize,
}

impl DensityUpdate {
    /// Density held fixed: no sensitivity to the deformation.
    pub fn frozen(rho: f64) -> Self {
        DensityUpdate {
            rho,
            ..Default::default()
        }
    }

    pub fn state(&self) -> GrowthState {
        GrowthState {
            rho: self.rho,
            drho_dpsim: self.drho_dpsim,
        }
    }
}

/// Weibull cumulative deposition profile `α(t) = 1 − exp(−(t/τ)^h)`.
pub fn weibull_alpha(t: f64, p: &GrowthParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain("t", t, ">= 0"));
    }
    Ok(-(-(t / p.tau).powf(p.h)).exp_m1())
}

/// Time derivative of [`weibull_alpha`], 1/day. Zero at `t = 0` (requires `h > 1`).
pub fn weibull_rate(t: f64, p: &GrowthParams) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let x = t / p.tau;
    (p.h / p.tau) * (-x.powf(p.h)).exp() * x.powf(p.h - 1.0)
}

/// Biologically driven deposition rate `a1·c_cell·α̇(t)`, µg/mm³/day.
pub fn bio_rate(t: f64, p: &GrowthParams) -> f64 {
    p.a1 * p.c_cell * weibull_rate(t, p)
}

/// Saturation factor `exp(−ρ/ρ_th)` of the mechanically driven rate.
pub fn f_mech(rho: f64, p: &GrowthParams) -> f64 {
    (-rho / p.rho_th).exp()
}

/// Mechanically driven deposition rate, µg/mm³/day; zero below the threshold.
pub fn mech_rate(rho: f64, psi_m: f64, p: &GrowthParams) -> f64 {
    if psi_m < p.psi_crit {
        return 0.0;
    }
    p.a2 * p.c_cell * f_mech(rho, p) * rho * (psi_m - p.psi_crit) / p.psi_crit
}

/// One backward-Euler step of the density rate equation.
///
/// Solves `r(ρ) = ρ − ρ_n − Δt·[ρ̇_bio(t_{n+1}) + ρ̇_mech(ρ, ψm)] = 0` with ψm
/// held fixed. Below the threshold the update is the closed-form bio-only step
/// and both sensitivities vanish.
pub fn update_density(
    state_n: &GrowthState,
    t_np1: f64,
    dt: f64,
    psi_m: f64,
    p: &GrowthParams,
) -> Result<DensityUpdate> {
    state_n.validate()?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::domain("dt", dt, "> 0"));
    }
    if !psi_m.is_finite() {
        return Err(Error::domain("psi_m", psi_m, "finite"));
    }
    let rho_n = state_n.rho;
    let predictor = rho_n + dt * bio_rate(t_np1, p);
    if psi_m < p.psi_crit || p.a2 == 0.0 {
        return Ok(DensityUpdate::frozen(predictor));
    }

    // With g(ρ) = ρ·exp(−ρ/ρ_th):  r = ρ − predictor − k·g(ρ).
    let k = dt * p.a2 * p.c_cell * (psi_m - p.psi_crit) / p.psi_crit;
    let g = |rho: f64| rho * f_mech(rho, p);
    let dg = |rho: f64| f_mech(rho, p) * (1.0 - rho / p.rho_th);
    let d2g = |rho: f64| f_mech(rho, p) * (rho / p.rho_th - 2.0) / p.rho_th;
    let residual = |rho: f64| rho - predictor - k * g(rho);

    // r(predictor) <= 0 and g <= ρ_th/e bound the root from above.
    let mut lo = predictor;
    let mut hi = predictor + k * p.rho_th / std::f64::consts::E;
    let mut rho = predictor;
    let mut r = residual(rho);
    let mut trace = Vec::new();
    let mut iterations = 0;
    while r.abs() > DENSITY_TOL {
        if iterations == DENSITY_MAX_ITER {
            return Err(Error::NonConvergence {
                context: "collagen density update".into(),
                iterations,
                residual: r,
                trace,
            });
        }
        iterations += 1;
        if r < 0.0 {
            lo = lo.max(rho);
        } else {
            hi = hi.min(rho);
        }
        let dr = 1.0 - k * dg(rho);
        let mut next = rho - r / dr;
        if !(dr > 0.0) || !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        rho = next;
        r = residual(rho);
        trace.push(r.abs());
        if hi - lo <= f64::EPSILON * hi.abs() && r.abs() <= 1e3 * DENSITY_TOL {
            break;
        }
    }

    // Implicit differentiation of r(ρ(ψ), ψ) = 0.
    let a = dt * p.a2 * p.c_cell / p.psi_crit;
    let r_rho = 1.0 - k * dg(rho);
    let r_psi = -a * g(rho);
    let r_rho_rho = -k * d2g(rho);
    let r_rho_psi = -a * dg(rho);
    let drho = -r_psi / r_rho;
    let d2rho = -(r_rho_rho * drho * drho + 2.0 * r_rho_psi * drho) / r_rho;

    Ok(DensityUpdate {
        rho,
        drho_dpsim: drho,
        d2rho_dpsim2: d2rho,
        iterations,
    })
}
