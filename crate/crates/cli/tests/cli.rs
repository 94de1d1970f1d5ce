use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn biofilm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_biofilm")).args(args).output().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn verify_geometry_passes() {
    let out = biofilm(&["verify", "geometry"]);
    let stdout = text(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("1 passed, 0 failed"), "{stdout}");
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let out = biofilm(&["verify", "everything"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("unknown suite"));
}

#[test]
fn missing_config_exits_2_and_names_it() {
    let out = biofilm(&["simulate", "missing.cfg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out.stderr).contains("missing.cfg"), "{}", text(&out.stderr));
}

#[test]
fn invalid_config_exits_2_with_every_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "[material]\nmu = -1\nd = 0\n").unwrap();
    let out = biofilm(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = text(&out.stderr);
    assert!(err.contains("line 2: ") && err.contains("mu must be positive"), "{err}");
    assert!(err.contains("line 3: ") && err.contains("d must be positive"), "{err}");
}

#[test]
fn null_fixture_runs_five_trivial_slabs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("null.cfg");
    let out = biofilm(&["simulate", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));

    let mut report = csv::Reader::from_path(dir.path().join("report.csv")).unwrap();
    let header = report.headers().unwrap().clone();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let rows: Vec<_> = report.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 5);
    for (k, row) in rows.iter().enumerate() {
        let num = |name: &str| row[col(name)].parse::<f64>().unwrap();
        assert!((num("t") - 0.1 * k as f64).abs() < 1e-12);
        assert!(num("sweeps") <= 2.0);
        for name in ["e_rate", "p_rate", "u_s", "v_s", "v_f", "phi_s"] {
            assert!(num(&format!("{name}_min")).abs() < 1e-10, "{name}");
            assert!(num(&format!("{name}_max")).abs() < 1e-10, "{name}");
        }
        for (name, value) in [("p", 1.0), ("phi_f", 1.0), ("c", 1.0)] {
            assert!((num(&format!("{name}_min")) - value).abs() < 1e-10, "{name}");
            assert!((num(&format!("{name}_max")) - value).abs() < 1e-10, "{name}");
        }
        assert_eq!(&row[col("admissible")], "true");
    }
    let vtk = fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "vtk"))
        .count();
    assert_eq!(vtk, 5);
}

#[test]
fn until_shortens_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture("null.cfg");
    let out = biofilm(&[
        "simulate",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--until",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(text(&out.stdout).contains("2 slabs"));
}

#[test]
fn running_past_the_motion_span_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("shrink.cfg");
    fs::write(&cfg, "[motion]\nh = \"1 - t\"\nhorizon = 5\n[time]\nt_end = 2\ndt = 1\n").unwrap();
    let out = biofilm(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", text(&out.stderr));
    assert!(text(&out.stderr).contains("t_max"));
}

#[test]
fn inspect_prints_normal_form_and_derived_values() {
    let out = biofilm(&["inspect", fixture("null.cfg").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let stdout = text(&out.stdout);
    assert!(stdout.contains("[solver]\nmax_iters = 30\n"));
    assert!(stdout.contains("# t_max = 10\n"));
    assert!(stdout.contains("# slabs = 5\n"));
    assert!(stdout.contains("# coercivity margin at rest = 1\n"));
}

#[test]
fn linear_field_with_a_height_table() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("h0.csv"), "x1,h\n0,1\n0.5,1.2\n1,1\n").unwrap();
    let cfg = dir.path().join("lf.cfg");
    fs::write(
        &cfg,
        "[domain]\nnx = 4\nny = 3\nh0 = \"table:h0.csv\"\n\
         [motion]\nmode = \"linear_field\"\nnu2 = \"0.1 * x2\"\n\
         [material]\np_ext = 1\n[time]\nt_end = 0.1\n[output]\nformats = [\"csv\"]\n",
    )
    .unwrap();
    let out = biofilm(&["simulate", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", text(&out.stderr));
    let report = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    // no graph jet under velocity-field motion, so the flux column is empty
    assert!(report.lines().nth(1).unwrap().ends_with(','));
}
