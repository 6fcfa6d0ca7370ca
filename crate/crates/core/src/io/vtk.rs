//! Legacy ASCII VTK unstructured grids for maturation snapshots.

use super::series::format_number;
use super::write_atomic;
use crate::error::{Error, Result};
use crate::fem::{Mesh, Snapshot};
use std::fmt::Write;
use std::path::Path;

const VTK_HEXAHEDRON: u8 = 12;
const STRESS_NAMES: [&str; 6] = ["sigma_11", "sigma_22", "sigma_33", "sigma_12", "sigma_13", "sigma_23"];

/// Renders the reference mesh with nodal displacements and per-element mean
/// density, fiber strain and Cauchy stress.
pub fn render_vtk(mesh: &Mesh, snap: &Snapshot) -> Result<String> {
    let (nn, ne) = (mesh.n_nodes(), mesh.n_elements());
    let check = |what: &str, got: usize, want: usize| {
        if got == want {
            Ok(())
        } else {
            Err(Error::SizeMismatch(format!("{what}: {got} entries for {want}")))
        }
    };
    check("displacement", snap.displacement.len(), nn)?;
    check("rho_mean", snap.rho_mean.len(), ne)?;
    check("sigma_mean", snap.sigma_mean.len(), ne)?;
    check("fiber_strain_mean", snap.fiber_strain_mean.len(), ne)?;

    let f = format_number;
    let mut out = String::new();
    let _ = writeln!(out, "# vtk DataFile Version 3.0");
    let _ = writeln!(out, "maturation t = {}", f(snap.t));
    let _ = writeln!(out, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(out, "POINTS {nn} double");
    for p in &mesh.nodes {
        let _ = writeln!(out, "{} {} {}", f(p[0]), f(p[1]), f(p[2]));
    }
    let _ = writeln!(out, "CELLS {ne} {}", ne * 9);
    for c in &mesh.hex8 {
        let ids: Vec<String> = c.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(out, "8 {}", ids.join(" "));
    }
    let _ = writeln!(out, "CELL_TYPES {ne}");
    for _ in 0..ne {
        let _ = writeln!(out, "{VTK_HEXAHEDRON}");
    }
    let _ = writeln!(out, "POINT_DATA {nn}\nVECTORS displacement double");
    for u in &snap.displacement {
        let _ = writeln!(out, "{} {} {}", f(u[0]), f(u[1]), f(u[2]));
    }
    let _ = writeln!(out, "CELL_DATA {ne}");
    scalars(&mut out, "rho_mean", snap.rho_mean.iter().copied());
    scalars(&mut out, "fiber_strain_mean", snap.fiber_strain_mean.iter().copied());
    for (k, name) in STRESS_NAMES.iter().enumerate() {
        scalars(&mut out, name, snap.sigma_mean.iter().map(|s| s.0[k]));
    }
    Ok(out)
}

fn scalars(out: &mut String, name: &str, values: impl Iterator<Item = f64>) {
    let _ = writeln!(out, "SCALARS {name} double 1\nLOOKUP_TABLE default");
    for v in values {
        let _ = writeln!(out, "{}", format_number(v));
    }
}

/// Renders first, so a size mismatch leaves nothing on disk.
pub fn write_vtk(path: &Path, mesh: &Mesh, snap: &Snapshot) -> Result<()> {
    let text = render_vtk(mesh, snap)?;
    write_atomic(path, text.as_bytes())
}
