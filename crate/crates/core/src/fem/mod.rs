//! Quasi-static large-deformation finite elements with per-Gauss-point growth.

pub mod element;
pub mod march;
pub mod mesh;
pub mod pressure;
pub mod shape;
pub mod solver;

pub use element::{element_residual_stiffness, ElementOutput};
pub use march::{march_maturation, march_maturation_with, max_deflection, MaturationHistory, Phase, Schedule, Snapshot, StepRecord};
pub use mesh::{Mesh, HEX_FACES};
pub use pressure::{pressure_load, FaceLoad};
pub use solver::{assemble, newton_solve, Assembly, Bvp, Dirichlet, GaussPointField, NewtonResult, PressureLoad, SolverConfig};
