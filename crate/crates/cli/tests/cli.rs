use std::process::{Command, Output};

use msbem::geometry::io::read_screen;
use msbem::geometry::make_junction_screen;

fn msbem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_msbem"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("running msbem")
}

fn ok(args: &[&str]) -> String {
    let out = msbem(args);
    assert!(out.status.success(), "msbem {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

fn config<'a>(csv: &'a str, key: &str) -> Option<&'a str> {
    csv.lines()
        .filter_map(|l| l.strip_prefix("# "))
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
}

#[test]
fn neumann_sweep_has_one_row_per_cell() {
    let csv = ok(&["sweep", "--problem", "neumann", "--kappa", "1", "--h", "0.4,0.2", "--precond", "both"]);
    assert_eq!(csv.lines().next(), Some("# msbem-csv v1"));
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.starts_with(
        "problem,kappa,geometry,reduction,h,ndof,nullity,precond,outer_iters,inner_iters_total,final_residual,cond_est,probe_re_1,probe_im_1"
    ));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 4);
    let cells: Vec<(&str, &str)> = rows
        .iter()
        .map(|r| {
            let f: Vec<&str> = r.split(',').collect();
            (f[4], f[7])
        })
        .collect();
    assert_eq!(cells, [("0.4", "off"), ("0.4", "on"), ("0.2", "off"), ("0.2", "on")]);
    // Defaults are spelled out.
    for key in ["tol", "inner_tol", "max_outer", "order", "regular_order", "precond_order", "direction", "threads", "probes"] {
        assert!(config(&csv, key).is_some(), "missing config entry {key}");
    }
    assert_eq!(config(&csv, "tol"), Some("0.00002"));
}

#[test]
fn deterministic_reruns_are_byte_identical() {
    let args = ["--deterministic", "sweep", "--problem", "dirichlet", "--kappa", "mf", "--h", "0.5", "--reductions", "full,partial"];
    let a = ok(&args);
    let b = ok(&args);
    assert_eq!(a, b);
    assert_eq!(config(&a, "deterministic"), Some("true"));
    assert_eq!(config(&a, "kappa"), Some("10"));
    assert_eq!(data_rows(&a).len(), 4);
}

#[test]
fn thread_cap_is_reported() {
    let out = Command::new(env!("CARGO_BIN_EXE_msbem"))
        .args(["sweep", "--problem", "neumann", "--h", "0.5", "--precond", "off"])
        .env("MSBEM_THREADS", "1")
        .env("RUST_LOG", "warn")
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    assert_eq!(config(&csv, "threads"), Some("1"));

    let bad = Command::new(env!("CARGO_BIN_EXE_msbem"))
        .args(["sweep", "--problem", "neumann", "--h", "0.5"])
        .env("MSBEM_THREADS", "many")
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("MSBEM_THREADS"));
}

#[test]
fn cond_column_and_matrix_export() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let export = dir.path().join("matrices");
    ok(&[
        "sweep",
        "--problem",
        "neumann",
        "--h",
        "0.5",
        "--cond",
        "--precond",
        "off",
        "--export-matrix",
        export.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(&out).unwrap();
    let row: Vec<String> = data_rows(&csv)[0].split(',').map(String::from).collect();
    // Full Neumann space at h=0.5 has 9 unknowns, 4 of them single-trace.
    assert_eq!(row[5], "9");
    assert_eq!(row[6], "4");
    assert!(row[11].parse::<f64>().unwrap() >= 1.0);

    let files: Vec<_> = std::fs::read_dir(&export).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 1);
    let text = std::fs::read_to_string(&files[0]).unwrap();
    let m = msbem::assembly::parse_matrix_csv(&text).unwrap();
    assert_eq!((m.nrows(), m.ncols()), (9, 9));
}

#[test]
fn mesh_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["mesh", "--geometry", "trijunction", "--h", "0.5", "--out", dir.path().to_str().unwrap()]);
    let offs = std::fs::read_dir(dir.path())
        .unwrap()
        .filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "off"))
        .count();
    assert_eq!(offs, 3);
    let back = read_screen(dir.path()).unwrap();
    let original = make_junction_screen(3, 1.0, 0.5).unwrap();
    assert_eq!(back.num_panels(), 3);
    assert_eq!(back.sheets(), original.sheets());
}

#[test]
fn typeb_manifest_is_overlapping() {
    let dir = tempfile::tempdir().unwrap();
    ok(&["mesh", "--geometry", "typeb", "--h", "0.5", "--out", dir.path().to_str().unwrap()]);
    let manifest = std::fs::read_to_string(dir.path().join("manifest.txt")).unwrap();
    assert!(manifest.lines().any(|l| l == "covering_kind overlapping"));
}

#[test]
fn mesh_to_unwritable_path_fails() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    std::fs::write(&file, "x").unwrap();
    let out = msbem(&["mesh", "--h", "0.5", "--out", file.join("sub").to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn cond_self_test_gives_one() {
    let csv = ok(&["cond", "--problem", "dirichlet", "--h", "0.5,0.25", "--self-test"]);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 2);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        assert_eq!((f[2], f[3], f[4], f[5]), ("1", "1", "0", "0"));
    }
}

#[test]
fn cond_study_small() {
    let csv = ok(&["cond", "--problem", "neumann", "--h", "0.5,0.25"]);
    let rows: Vec<Vec<f64>> = data_rows(&csv)
        .iter()
        .map(|r| r.split(',').map(|x| x.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    assert_eq!(rows.len(), 2);
    // Unpreconditioned condition numbers rise with refinement, faster than preconditioned ones.
    assert!(rows[1][2] > rows[0][2]);
    assert!(rows[1][6] > rows[1][7]);
}

#[test]
fn probe_lists_field_values() {
    let csv = ok(&["probe", "--problem", "dirichlet", "--h", "0.5", "--probe", "0,0,3", "--probe", "1,1,-2", "--precond", "both"]);
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 4);
    let field = |r: &str| -> (f64, f64) {
        let f: Vec<&str> = r.split(',').collect();
        (f[5].parse().unwrap(), f[6].parse().unwrap())
    };
    // Both solves give the same field to solver tolerance.
    for k in 0..2 {
        let (a, b) = (field(rows[k]), field(rows[k + 2]));
        assert!((a.0 - b.0).abs() + (a.1 - b.1).abs() < 1e-3 * (a.0.hypot(a.1)));
    }
}

#[test]
fn bad_inputs_name_the_field() {
    let cases: [(&[&str], &str); 5] = [
        (&["sweep", "--problem", "neumann", "--h", "0.4", "--kappa", "1+x"], "--kappa"),
        (&["sweep", "--problem", "neumann", "--h", "0.4", "--geometry", "cube"], "--geometry"),
        (&["sweep", "--problem", "neumann", "--h", "0.4", "--reductions", "half"], "--reductions"),
        (&["sweep", "--problem", "neumann", "--h", "0.2,0.4"], "strictly decreasing"),
        (&["probe", "--problem", "neumann", "--h", "0.5", "--probe", "0,0,0"], "probe"),
    ];
    for (args, needle) in cases {
        let out = msbem(args);
        assert!(!out.status.success(), "{args:?} should fail");
        let err = String::from_utf8_lossy(&out.stderr);
        assert!(err.contains(needle), "{args:?}: '{err}' does not mention {needle}");
    }
}

#[test]
fn typeb_rejects_reductions() {
    let out = msbem(&["sweep", "--problem", "neumann", "--geometry", "typeb", "--h", "0.5", "--reductions", "partial"]);
    assert!(!out.status.success());
}
