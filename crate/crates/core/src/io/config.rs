//! Run configuration (JSON).
//!
//! Stresses accept a bare number in MPa or `{"value": .., "unit": "kPa"}`;
//! `psi_crit` accepts a bare number in MPa·mm³/µg or a unit such as `"J/ug"`.
//! The normalized dump always carries internal units, so it re-parses to the
//! same configuration.

use crate::calibration::{ForwardModel, NelderMeadConfig};
use crate::constitutive::MaterialParams;
use crate::error::{Error, Result};
use crate::fem::{Dirichlet, Mesh, PressureLoad, Schedule, SolverConfig};
use crate::growth::GrowthState;
use crate::matpoint::LoadProgram;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Matpoint,
    Grow,
    Fit,
    Fem,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub material: MaterialParams,
    /// Collagen density at the start of the run, µg/mm³.
    #[serde(default)]
    pub initial_density: f64,
    /// Seed for randomized checks; recorded for reproducibility.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub program: Option<LoadProgram>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maturation: Option<MaturationBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fem: Option<FemBlock>,
}

/// Unloaded maturation of a single material point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaturationBlock {
    pub t_end: f64,
    pub dt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FitBlock {
    /// Weibull law to a `t,value` series of normalized collagen content.
    Weibull { data: String },
    /// Material parameters to one or more stress series; the run's material
    /// supplies every parameter that is not fitted.
    Material {
        parameters: Vec<String>,
        initial: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
        series: Vec<SeriesSpec>,
        #[serde(default)]
        optimizer: NelderMeadConfig,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesSpec {
    #[serde(default)]
    pub label: String,
    pub model: ForwardModel,
    /// CSV path, relative to the config file.
    pub data: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FemBlock {
    pub mesh: MeshSource,
    pub dirichlet: Vec<Dirichlet>,
    #[serde(default)]
    pub pressure: Vec<PressureLoad>,
    #[serde(default)]
    pub schedule: Schedule,
    #[serde(default)]
    pub solver: SolverConfig,
    /// Write a VTK file for every snapshot.
    #[serde(default = "yes")]
    pub vtk: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSource {
    Strip(StripSpec),
    /// JSON mesh file, relative to the config file.
    File { path: String },
}

/// Structured hex8 block `[0, length] × [0, width] × [0, thickness]` in mm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StripSpec {
    pub length: f64,
    pub width: f64,
    pub thickness: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

impl StripSpec {
    pub fn build(&self) -> Result<Mesh> {
        Mesh::strip(self.length, self.width, self.thickness, self.nx, self.ny, self.nz)
    }
}

impl RunConfig {
    /// Pretty JSON in internal units.
    pub fn dump(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.material;
        at("material.matrix", m.matrix.validate())?;
        at("material.collagen", m.collagen.validate())?;
        at("material.textile", m.textile.validate())?;
        if let Some(g) = &m.growth {
            at("material.growth", g.validate())?;
        }
        at(
            "",
            GrowthState::with_density(self.initial_density)
                .validate()
                .map_err(|_| Error::domain("initial_density", self.initial_density, ">= 0")),
        )?;
        match self.mode {
            Mode::Matpoint => {
                let p = self.program.as_ref().ok_or_else(|| missing("program", self.mode))?;
                at("program", p.validate())?;
            }
            Mode::Grow => {
                let b = self.maturation.ok_or_else(|| missing("maturation", self.mode))?;
                if !(b.t_end > 0.0 && b.t_end.is_finite()) {
                    return Err(Error::config("maturation.t_end", format!("must be > 0, got {}", b.t_end)));
                }
                if !(b.dt > 0.0 && b.dt <= b.t_end) {
                    return Err(Error::config("maturation.dt", format!("must lie in (0, t_end], got {}", b.dt)));
                }
                if m.growth.is_none() {
                    return Err(Error::config("material.growth", "required for mode grow"));
                }
            }
            Mode::Fit => {
                let f = self.fit.as_ref().ok_or_else(|| missing("fit", self.mode))?;
                if let FitBlock::Material {
                    parameters,
                    initial,
                    lower,
                    upper,
                    series,
                    ..
                } = f
                {
                    let n = parameters.len();
                    if n == 0 || initial.len() != n || lower.len() != n || upper.len() != n {
                        return Err(Error::config(
                            "fit.parameters",
                            "parameters, initial, lower and upper must have equal non-zero length",
                        ));
                    }
                    let mut probe = *m;
                    for (k, name) in parameters.iter().enumerate() {
                        at(&format!("fit.parameters[{k}]"), crate::calibration::set_parameter(&mut probe, name, initial[k]))?;
                        if !(lower[k] <= initial[k] && initial[k] <= upper[k]) {
                            return Err(Error::config(format!("fit.initial[{k}]"), "outside [lower, upper]"));
                        }
                    }
                    if series.is_empty() {
                        return Err(Error::config("fit.series", "at least one series is required"));
                    }
                }
            }
            Mode::Fem => {
                let f = self.fem.as_ref().ok_or_else(|| missing("fem", self.mode))?;
                if let MeshSource::Strip(s) = &f.mesh {
                    at("fem.mesh", s.build().map(|_| ()))?;
                }
                if f.dirichlet.is_empty() {
                    return Err(Error::config("fem.dirichlet", "at least one constraint is required"));
                }
                at("fem.schedule", f.schedule.validate())?;
            }
        }
        Ok(())
    }
}

fn missing(block: &str, mode: Mode) -> Error {
    let name = serde_json::to_value(mode).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
    Error::config(block, format!("block required for mode {name}"))
}

/// Re-labels a validation error with the key path it belongs to.
fn at(prefix: &str, r: Result<()>) -> Result<()> {
    r.map_err(|e| match e {
        Error::ParameterDomain { name, value, expected } => Error::Config {
            path: if prefix.is_empty() { name.clone() } else { format!("{prefix}.{name}") },
            message: format!("{value} out of domain ({expected})"),
        },
        e @ Error::Config { .. } => e,
        other => Error::Config {
            path: prefix.to_string(),
            message: other.to_string(),
        },
    })
}

/// Parses, unit-normalizes and validates a run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GROW: &str = r#"{
        "mode": "grow",
        "material": {
            "matrix": {"lambda": 0.3, "mu": 0.0015},
            "collagen": {"k1": 0.13, "k2": 12.0, "kappa": 0.0, "direction": [1, 0, 0], "rho_f": 38.71},
            "growth": {"a1": 5e-4, "a2": 5e-7, "psi_crit": {"value": 2e-5, "unit": "J/ug"},
                       "rho_th": 10, "c_cell": 15000, "tau": 14.21, "h": 1.65}
        },
        "maturation": {"t_end": 28, "dt": 0.25}
    }"#;

    fn config_path(text: &str) -> String {
        match parse_config(text) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn psi_crit_normalized() {
        let c = parse_config(GROW).unwrap();
        assert!((c.material.growth.unwrap().psi_crit - 0.02).abs() < 1e-15);
        assert_eq!(c.material.textile, crate::constitutive::TextileParams::none());
    }

    #[test]
    fn dump_round_trips() {
        let c = parse_config(GROW).unwrap();
        let again = parse_config(&c.dump()).unwrap();
        assert_eq!(c, again);
        assert_eq!(c.dump(), again.dump());
    }

    #[test]
    fn kappa_out_of_domain() {
        let text = GROW.replace("\"kappa\": 0.0", "\"kappa\": 0.5");
        let e = parse_config(&text).unwrap_err();
        assert!(e.to_string().contains("material.collagen.kappa"), "{e}");
        assert!(e.to_string().contains("domain"), "{e}");
    }

    #[test]
    fn unknown_key_reported_with_path() {
        let text = GROW.replace("\"rho_th\"", "\"rho_thr\"");
        assert_eq!(config_path(&text), "material.growth.rho_thr");
        let text = GROW.replace("\"maturation\"", "\"maturaton\"");
        assert_eq!(config_path(&text), "maturaton");
    }

    #[test]
    fn missing_mode_block() {
        let text = GROW.replace("\"mode\": \"grow\"", "\"mode\": \"fem\"");
        assert_eq!(config_path(&text), "fem");
        let text = GROW.replace("\"mode\": \"grow\"", "\"mode\": \"matpoint\"");
        assert_eq!(config_path(&text), "program");
    }

    #[test]
    fn bad_unit_rejected() {
        let text = GROW.replace("\"J/ug\"", "\"kcal\"");
        assert!(config_path(&text).starts_with("material.growth.psi_crit"));
    }
}
