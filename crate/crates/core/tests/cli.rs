use std::path::Path;
use std::process::{Command, Output};

use lociso::format;
use lociso::generators::{gen_grid, Coloring};
use serde_json::Value;

fn lociso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lociso")).args(args).output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generated_sturmian_window_loads_back() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("t.struct");
    let out = lociso(&[
        "gen",
        "sturmian",
        "--r",
        "(0+1*sqrt(2))/1",
        "--s",
        "0",
        "--width",
        "10000",
        "-o",
        path(&f),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let m = format::load(&f).unwrap();
    assert_eq!(m.len(), 20_001);
    let v = report(&lociso(&["validate", path(&f)]));
    assert_eq!(v["verdict"], "holds_up_to_bounds");
    assert_eq!(v["bounds"]["elements"], 20_001);
}

#[test]
fn rigidity_on_quarter_offset() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("t.struct");
    lociso(&[
        "gen",
        "sturmian",
        "--r",
        "sqrt(2)",
        "--s",
        "1/4",
        "--width",
        "2000",
        "-o",
        path(&f),
    ]);
    let out = lociso(&["rigidity", path(&f), "--radii", "1..6", "--s", "30"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["result"]["characterization"], "characterization_holds_up_to_bounds");
    assert_eq!(v["bounds"]["s"], 30);
    assert_eq!(v["report_version"], 1);
}

#[test]
fn lip_counterexample_on_a_single_black_cell() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("one.struct");
    let mut pattern = vec!["White".to_string(); 101];
    pattern[50] = "Black".into();
    format::save(
        &gen_grid(
            &[101],
            false,
            &Coloring {
                weights: vec![1],
                pattern,
            },
        )
        .unwrap(),
        &f,
    )
    .unwrap();
    let out = lociso(&["lip", path(&f), "--h", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["verdict"], "fails_with_witness");
    assert!(v["result"]["witness"].is_string());
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.struct");
    lociso(&[
        "gen",
        "grid",
        "--sizes",
        "9,9",
        "--coloring",
        "checkerboard",
        "-o",
        path(&f),
    ]);
    for args in [
        vec!["census", path(&f), "--h", "2"],
        vec!["symmetries", path(&f), "--displacement", "2", "--radius", "3"],
        vec!["periods", path(&f), "--rank-bound", "4"],
    ] {
        let a = lociso(&args);
        let b = lociso(&args);
        assert_eq!(a.status.code(), b.status.code());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn exhausted_window_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("p.struct");
    lociso(&["gen", "grid", "--sizes", "9", "-o", path(&f)]);
    let out = lociso(&["census", path(&f), "--h", "7"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["verdict"], "inconclusive");
}

#[test]
fn errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.struct");
    std::fs::write(&f, "structure 1\nsymbol Succ two\n").unwrap();
    let out = lociso(&["validate", path(&f)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("2:13"));
    std::fs::write(&f, "structure 1\nsymbol Succ 2\nelement a\nSucc(a)\n").unwrap();
    let out = lociso(&["validate", path(&f)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("arity mismatch"));
}

#[test]
fn quotient_and_rigid_limit_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cyc = dir.path().join("c.struct");
    lociso(&["gen", "grid", "--sizes", "12", "--torus", "-o", path(&cyc)]);
    let perm = dir.path().join("rot4");
    let text: String = (0..12).map(|i| format!("{i} {}\n", (i + 4) % 12)).collect();
    std::fs::write(&perm, text).unwrap();
    let q = dir.path().join("q.struct");
    let out = lociso(&[
        "quotient",
        path(&cyc),
        "--perm",
        path(&perm),
        "--structure-out",
        path(&q),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["result"]["quotient_elements"], 4);
    assert_eq!(format::load(&q).unwrap().len(), 4);

    let s = dir.path().join("s.struct");
    lociso(&[
        "gen",
        "sturmian",
        "--r",
        "sqrt(2)",
        "--s",
        "1/4",
        "--width",
        "3000",
        "-o",
        path(&s),
    ]);
    let steps = dir.path().join("steps");
    let out = lociso(&[
        "rigid-limit",
        path(&s),
        "--steps",
        "2",
        "--seed",
        "0",
        "--out-dir",
        path(&steps),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = report(&out);
    assert_eq!(v["verdict"], "holds_up_to_bounds");
    assert_eq!(v["result"]["steps"].as_array().unwrap().len(), 3);
    assert!(steps.join("step2.struct").exists());

    let p2 = dir.path().join("p2.struct");
    lociso(&[
        "gen",
        "grid",
        "--sizes",
        "200",
        "--coloring",
        "period:2",
        "-o",
        path(&p2),
    ]);
    let v = report(&lociso(&["rigid-limit", path(&p2), "--steps", "2", "--seed", "100"]));
    assert_eq!(v["verdict"], "fails_with_witness");
}

#[test]
fn periodic_isomorphism_from_the_command_line() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    lociso(&["gen", "grid", "--sizes", "30", "--coloring", "period:2", "-o", path(&a)]);
    lociso(&["gen", "grid", "--sizes", "37", "--coloring", "period:2", "-o", path(&b)]);
    lociso(&["gen", "grid", "--sizes", "37", "--coloring", "period:3", "-o", path(&c)]);
    let v = report(&lociso(&["compare", path(&a), path(&b), "--periodic-iso"]));
    assert_eq!(v["result"]["isomorphism"], "found");
    let v = report(&lociso(&["compare", path(&a), path(&c), "--periodic-iso"]));
    assert_eq!(v["verdict"], "fails_with_witness");
    assert_eq!(v["result"]["census_witness"]["h"], 1);
    let v = report(&lociso(&["compare", path(&a), path(&b), "--h", "3"]));
    assert_eq!(v["verdict"], "holds_up_to_bounds");
}
