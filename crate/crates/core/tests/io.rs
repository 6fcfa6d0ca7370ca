use matura::fem::{Mesh, Snapshot};
use matura::io::{parse_config, parse_mesh, parse_series, render_vtk, trajectory_csv, write_vtk};
use matura::matpoint::unloaded_maturation;
use matura::tensor::SymTensor3;
use std::path::{Path, PathBuf};
use vtkio::model::{Attribute, DataSet, Piece};
use vtkio::Vtk;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn golden(name: &str, actual: &str) {
    let path = root().join("tests/golden").join(name);
    if std::env::var_os("MATURA_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert!(expected == actual, "{name} differs from golden file; rerun with MATURA_BLESS=1 after review");
}

fn one_hex_snapshot() -> (Mesh, Snapshot) {
    let mesh = Mesh::strip(1.0, 1.0, 1.0, 1, 1, 1).unwrap();
    let snap = Snapshot {
        t: 7.0,
        displacement: (0..8).map(|a| [0.01 * a as f64, -0.005 * a as f64, 0.0025 * a as f64]).collect(),
        rho_mean: vec![1.5],
        sigma_mean: vec![SymTensor3([1e-3, 2e-3, 3e-3, 1e-4, 2e-4, 3e-4])],
        fiber_strain_mean: vec![0.125],
    };
    (mesh, snap)
}

#[test]
fn one_hex_vtk_matches_golden() {
    let (mesh, snap) = one_hex_snapshot();
    golden("one_hex.vtk", &render_vtk(&mesh, &snap).unwrap());
}

fn parse_vtk(text: &str) -> vtkio::model::UnstructuredGridPiece {
    let vtk = Vtk::parse_legacy_be(text.as_bytes()).expect("legacy VTK parses");
    match vtk.data {
        DataSet::UnstructuredGrid { mut pieces, .. } => match pieces.remove(0) {
            Piece::Inline(p) => *p,
            _ => panic!("expected inline piece"),
        },
        _ => panic!("expected unstructured grid"),
    }
}

#[test]
fn zero_displacement_snapshot_reads_back() {
    let mesh = Mesh::strip(2.0, 1.0, 0.5, 2, 2, 1).unwrap();
    let snap = Snapshot {
        t: 0.0,
        displacement: vec![[0.0; 3]; mesh.n_nodes()],
        rho_mean: vec![0.0; 4],
        sigma_mean: vec![SymTensor3::zero(); 4],
        fiber_strain_mean: vec![0.0; 4],
    };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("zero.vtk");
    write_vtk(&path, &mesh, &snap).unwrap();
    let piece = parse_vtk(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(piece.num_points(), mesh.n_nodes());
    assert_eq!(piece.cells.types.len(), 4);
    assert_eq!(piece.data.point.len(), 1);
    let names: Vec<String> = piece
        .data
        .cell
        .iter()
        .map(|a| match a {
            Attribute::DataArray(d) => d.name.clone(),
            Attribute::Field { name, .. } => name.clone(),
        })
        .collect();
    assert_eq!(names[0], "rho_mean");
    assert!(names.iter().any(|n| n == "sigma_23"));
    if let Attribute::DataArray(d) = &piece.data.point[0] {
        let v: Vec<f64> = d.data.clone().cast_into().unwrap();
        assert_eq!(v.len(), 3 * mesh.n_nodes());
        assert!(v.iter().all(|&x| x == 0.0));
    } else {
        panic!("displacement should be a data array");
    }
}

#[test]
fn golden_vtk_parses_with_its_values() {
    let (mesh, snap) = one_hex_snapshot();
    let piece = parse_vtk(&render_vtk(&mesh, &snap).unwrap());
    let pts: Vec<f64> = piece.points.cast_into().unwrap();
    let flat: Vec<f64> = mesh.nodes.iter().flatten().copied().collect();
    assert_eq!(pts, flat);
}

#[test]
fn trajectory_csv_matches_golden() {
    let cfg = parse_config(&std::fs::read_to_string(root().join("../../configs/unloaded.json")).unwrap()).unwrap();
    let recs = unloaded_maturation(&cfg.material, 1.0, 0.25).unwrap();
    let csv = trajectory_csv(&recs);
    assert!(!csv.contains('\r'));
    golden("unloaded_1day.csv", &csv);
}

#[test]
fn example_configs_parse_and_round_trip() {
    for entry in std::fs::read_dir(root().join("../../configs")).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "json") {
            let cfg = parse_config(&std::fs::read_to_string(&p).unwrap()).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            assert_eq!(parse_config(&cfg.dump()).unwrap(), cfg, "{}", p.display());
        }
    }
}

/// Every checked-in fuzz seed must be handled without panicking.
#[test]
fn fuzz_corpus_replays_cleanly() {
    let corpus = root().join("../../fuzz/corpus");
    let mut seen = 0;
    for (target, parse) in [
        ("parse_config", (|s: &str| parse_config(s).is_ok()) as fn(&str) -> bool),
        ("parse_mesh", |s| parse_mesh(s).is_ok()),
        ("parse_series", |s| parse_series(s).is_ok()),
    ] {
        let dir = corpus.join(target);
        for entry in std::fs::read_dir(&dir).unwrap_or_else(|e| panic!("{}: {e}", dir.display())) {
            let bytes = std::fs::read(entry.unwrap().path()).unwrap();
            if let Ok(s) = std::str::from_utf8(&bytes) {
                let _ = parse(s);
            }
            seen += 1;
        }
    }
    assert!(seen >= 6);
}
