use std::fs;
use std::sync::Arc;

use biofilm::export::{export_fields, read_field_csv, slab_stem, write_field_csv};
use biofilm::config::Format;
use biofilm::run::{build, simulate, RunOptions};
use biofilm::config::parse_config;
use biofilm_core::coupled::solve_time_slab;
use biofilm_core::fem::{Degree, Field, Space};
use biofilm_core::geometry::build_strip_mesh;
use biofilm_core::profile::Constant;

fn awkward_field() -> Field {
    let mesh = Arc::new(build_strip_mesh(1.0, &Constant(0.7), 3, 2).unwrap());
    let space = Space::new(mesh, Degree::P2);
    // values with full-length mantissas and a subnormal
    Field::interpolate_vector(space, |x| [(x[0] * 1e3).sin() / 3.0, if x[1] == 0.0 { 5e-324 } else { x[1].exp() }])
}

#[test]
fn csv_round_trip_is_bitwise() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("v.csv");
    let f = awkward_field();
    write_field_csv(&path, "v", &f).unwrap();
    let table = read_field_csv(&path).unwrap();
    assert_eq!(table.columns, vec!["v_1", "v_2"]);
    assert_eq!(table.nodes.len(), f.space().n_nodes());
    for (a, b) in table.values.iter().zip(f.values()) {
        assert_eq!(a.to_bits(), b.to_bits());
    }
    for (a, b) in table.nodes.iter().zip(f.space().nodes()) {
        assert_eq!(a[0].to_bits(), b[0].to_bits());
        assert_eq!(a[1].to_bits(), b[1].to_bits());
    }
}

#[test]
fn null_state_exports() {
    let cfg = parse_config("[domain]\nnx = 3\nny = 2\n[material]\np_ext = 1\n").unwrap();
    let setup = build(&cfg, std::path::Path::new(".")).unwrap();
    let state = solve_time_slab(&setup.problem, 0.0, None, &setup.sweep).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = export_fields(&state, 3, dir.path(), [Format::Csv, Format::Vtk]).unwrap();
    assert_eq!(files.len(), 10);
    let stem = slab_stem(3, 0.0);
    assert_eq!(stem, "slab_0003_t0.000000");

    let vtk = fs::read_to_string(dir.path().join(format!("{stem}.vtk"))).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 3.0\n"));
    let nv = state.mesh.vertices().len();
    let nt = state.mesh.triangles().len();
    assert!(vtk.contains(&format!("POINTS {nv} double\n")));
    assert!(vtk.contains(&format!("CELLS {nt} {}\n", 4 * nt)));
    assert!(vtk.contains(&format!("CELL_TYPES {nt}\n")));
    assert_eq!(vtk.matches("SCALARS ").count() + vtk.matches("VECTORS ").count(), 9);

    let u = read_field_csv(&dir.path().join(format!("{stem}_u_s.csv"))).unwrap();
    assert_eq!(u.columns, vec!["u_s_1", "u_s_2"]);
    assert!(u.values.iter().all(|v| v.abs() < 1e-12));
    let c = read_field_csv(&dir.path().join(format!("{stem}_c.csv"))).unwrap();
    assert_eq!(c.columns, vec!["c"]);
    assert!(c.values.iter().all(|v| (v - 1.0).abs() < 1e-12));
}

#[test]
fn exports_are_deterministic() {
    let cfg = parse_config("[domain]\nnx = 6\nny = 6\n[material]\npi = 1e-3\np_ext = 1\n[solver]\nforce_fraction = true\n[time]\nt_end = 0.1\n").unwrap();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut sink = Vec::new();
    for d in [&a, &b] {
        let opts = RunOptions {
            out: Some(d.path().to_path_buf()),
            until: None,
        };
        simulate(&cfg, d.path(), &opts, &mut sink).unwrap();
    }
    let mut names: Vec<_> = fs::read_dir(a.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 21);
    for n in names {
        assert_eq!(fs::read(a.path().join(&n)).unwrap(), fs::read(b.path().join(&n)).unwrap(), "{n:?}");
    }
}

#[test]
fn unwritable_directory_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let path = blocker.join("v.csv");
    let err = write_field_csv(&path, "v", &awkward_field()).unwrap_err();
    assert!(err.to_string().contains(&path.display().to_string()), "{err}");
}
