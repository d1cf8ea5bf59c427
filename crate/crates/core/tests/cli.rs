use std::path::Path;
use std::process::{Command, Output};

use bergman_dbar::geometry::separation_constant;
use bergman_dbar::io::read_point_set;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bergman-dbar")).args(args).current_dir(dir).output().expect("binary runs")
}

fn header(text: &str) -> Vec<&str> {
    text.lines().take_while(|l| l.starts_with('#')).chain(text.lines().find(|l| !l.starts_with('#'))).collect()
}

#[test]
fn gen_lattice_tiny_region_is_the_origin() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["gen-lattice", "--eta", "0.5", "--rmax", "0.01", "--out", "tiny.json"], dir.path());
    assert!(out.status.success());
    let set = read_point_set(&dir.path().join("tiny.json")).unwrap();
    assert_eq!(set.values(), vec![bergman_dbar::C64::new(0.0, 0.0)]);
}

#[test]
fn gen_lattice_round_trip_and_separation() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["gen-lattice", "--eta", "0.4", "--rmax", "0.8", "--out", "net.json"], dir.path());
    assert!(out.status.success());
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.starts_with("points "), "{summary}");
    let set = read_point_set(&dir.path().join("net.json")).unwrap();
    assert_eq!(set, bergman_dbar::geometry::build_net(0.4, 0.8).unwrap().centers);
    assert!(separation_constant(&set).unwrap() >= 0.2 - 1e-12);

    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[lattice]\nseparation = 0.9\nrmax = 0.9\n").unwrap();
    let out = run(&["--config", "run.toml", "gen-lattice", "--out", "sep.json"], dir.path());
    assert!(out.status.success());
    let sep = read_point_set(&dir.path().join("sep.json")).unwrap();
    assert!(separation_constant(&sep).unwrap() >= 0.9 - 1e-12);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        run(&["gen-lattice", "--eta", "1.5", "--rmax", "0.5", "--out", "x.json"], dir.path()).status.code(),
        Some(2)
    );
    assert_eq!(run(&["verify", "--suite", "nonsense"], dir.path()).status.code(), Some(2));
    assert_eq!(run(&["no-such-command"], dir.path()).status.code(), Some(2));
    std::fs::write(dir.path().join("bad.json"), "[[2.0, 0.0]]").unwrap();
    assert_eq!(run(&["density", "--points", "bad.json"], dir.path()).status.code(), Some(2));
}

#[test]
fn density_on_empty_set_has_unit_margins() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["density", "--radii", "0.9,0.99,0.999", "--out", "d.csv", "--series", "s.csv"], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("d.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 3);
    for r in rows {
        assert!(r.ends_with(",1.00000000000e0"), "{r}");
    }
    let series = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    assert!(series.contains("\nr,margin\n"));
}

#[test]
fn zero_source_gives_zero_solution() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["solve-dbar", "--amplitude", "0,0", "--depth", "0", "--out", "s.csv"], dir.path());
    assert!(out.status.success());
    let text = std::fs::read_to_string(dir.path().join("s.csv")).unwrap();
    let row = text.lines().last().unwrap();
    assert_eq!(row, "2.00000000000e0,0,2,0,0.00000000000e0,0.00000000000e0");
}

#[test]
fn interpolate_shipped_lattice_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let lattice = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/lattice_sep089.json");
    let out = run(
        &[
            "interpolate",
            "--points",
            lattice,
            "--seed",
            "5",
            "--eta",
            "0.3",
            "--n-radial",
            "16",
            "--out",
            "i.csv",
            "--nodes",
            "n.csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(dir.path().join("i.csv")).unwrap();
    let row: Vec<f64> = text.lines().last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert_eq!(row[1], 47.0);
    assert!(row[2] <= 1e-6, "node error {}", row[2]);
    assert!(row[3].is_finite() && row[3] > 0.0);
}

#[test]
fn verify_negative_control_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let good = run(&["verify", "--suite", "identities", "--seed", "7"], dir.path());
    assert_eq!(good.status.code(), Some(0));
    let bad = run(&["verify", "--suite", "identities", "--seed", "7", "--weight-scale", "1.1"], dir.path());
    assert_eq!(bad.status.code(), Some(1));
    let msg = String::from_utf8(bad.stderr).unwrap();
    assert!(msg.contains("identities / psi /"), "{msg}");
}

/// Golden headers: the `#` preamble and column row of each report type.
#[test]
fn csv_headers_are_stable() {
    let dir = tempfile::tempdir().unwrap();
    let conv = "# conventions: lap=d*dbar (standard Laplacian/4); dbar=d/dzbar=(d/dx+i*d/dy)/2 (a dbar without the 1/2 solves with u/2)";

    let out = run(&["verify", "--suite", "identities", "--seed", "7"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        header(&text),
        vec![
            "# verify suite identities: value with optional bounds; pass = 1 when the bounds hold",
            conv,
            "# seed = 7",
            "suite,group,check,value,lower,upper,pass",
        ]
    );

    let out = run(&["density", "--radii", "0.9"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(header(&text).last().copied(), Some("r,center_id,numerator,denominator,value,margin"));
    assert_eq!(header(&text)[1], conv);

    let out = run(&["solve-dbar", "--amplitude", "0,0", "--depth", "0"], dir.path());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(header(&text).last().copied(), Some("p,z_count,m,grid_depth,residual_ratio,bound_ratio"));
}
