//! Configuration, data and result files.

pub mod config;
pub mod series;
pub mod vtk;

pub use config::{parse_config, FemBlock, FitBlock, MaturationBlock, MeshSource, Mode, RunConfig, SeriesSpec, StripSpec};
pub use series::{
    format_number, parse_series, point_records_csv, step_records_csv, trajectory_csv, POINT_CSV_HEADER,
};
pub use vtk::{render_vtk, write_vtk};

use crate::error::{Error, Result};
use crate::fem::Mesh;
use std::io::Write;
use std::path::Path;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err(path))?;
    tmp.write_all(bytes).map_err(io_err(path))?;
    tmp.as_file().sync_all().map_err(io_err(path))?;
    tmp.persist(path).map_err(|e| io_err(path)(e.error))?;
    Ok(())
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

/// Parses and validates a JSON mesh (`nodes`, `hex8`, `node_sets`, `face_sets`).
pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let mesh: Mesh = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    mesh.validate()?;
    Ok(mesh)
}
