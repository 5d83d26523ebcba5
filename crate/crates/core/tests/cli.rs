use framebank::cli::{run, EXIT_NUMERICAL, EXIT_OK, EXIT_PARSE};
use framebank::report::parse_dual_csv;
use framebank::systems;
use std::path::PathBuf;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn call(args: &[&str]) -> (i32, String, String) {
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let mut argv = vec!["framebank"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut o, &mut e);
    (
        code,
        String::from_utf8(o).unwrap(),
        String::from_utf8(e).unwrap(),
    )
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("missing {key}"))
        .parse()
        .unwrap()
}

#[test]
fn bounds_on_system_b() {
    let (code, out, _) = call(&["bounds", &data("system_b.json")]);
    assert_eq!(code, EXIT_OK);
    assert!((value(&out, "A") - 1.0).abs() < 1e-6);
    assert!((value(&out, "B") - 3.0).abs() < 1e-6);
    assert!((value(&out, "lambda") - 0.517638).abs() < 1e-6);
}

#[test]
fn dual_on_haar_returns_generators() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("haar.csv");
    let (code, _, _) = call(&[
        "dual",
        &data("haar.json"),
        "--N",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let duals = parse_dual_csv(&std::fs::read(&path).unwrap()).unwrap();
    for (d, g) in duals.iter().zip(systems::haar().generators()) {
        assert!(d.max_abs_diff(g) < 1e-15);
    }
}

#[test]
fn periodic_and_tight_outputs() {
    let (code, out, _) = call(&["periodic-dual", &data("system_b.json"), "--L", "16"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(out.lines().count(), 1 + 2 * 16);
    let (code, _, _) = call(&["tight", &data("system_b.json"), "--N", "12"]);
    assert_eq!(code, EXIT_OK);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let (code, out, _) = call(&[
        "tight",
        &data("system_b.json"),
        "--L",
        "32",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    assert!(value(&out, "tightness_defect") <= 1e-10);
    let (code, _, _) = call(&["tight", &data("system_b.json")]);
    assert_eq!(code, EXIT_PARSE);
}

#[test]
fn convergence_tables() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("conv.csv");
    let p = path.to_str().unwrap();
    let (code, _, _) = call(&[
        "convergence",
        &data("system_b.json"),
        "--N-list",
        "3:12:3",
        "--N-ref",
        "150",
        "--out",
        p,
    ]);
    assert_eq!(code, EXIT_OK);
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "N,channel,measured_err,bound,cond_N,lambda"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4 * 2);
    for w in rows.windows(2) {
        assert!((w[0][0], w[0][1]) < (w[1][0], w[1][1]));
    }
    for r in &rows {
        assert!(r[3] > 0.0 && r[2] <= r[3]);
    }

    let (code, _, err) = call(&[
        "periodic-convergence",
        &data("system_b.json"),
        "--N-list",
        "4:10",
        "--out",
        p,
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("N,L,channel,measured_err,bound,reference_bound,lambda\n"));
    assert_eq!(text.lines().count(), 1 + 7 * 2);
}

#[test]
fn hypothesis_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("c.csv");
    let (code, _, err) = call(&[
        "convergence",
        &data("system_b.json"),
        "--N-list",
        "1:4",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_NUMERICAL);
    assert!(err.contains("2s"));
    let (code, _, err) = call(&[
        "periodic-convergence",
        &data("haar.json"),
        "--N-list",
        "5:8",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_NUMERICAL);
    assert!(err.contains("divisible"));
    let (code, _, _) = call(&["periodic-dual", &data("haar.json"), "--L", "7"]);
    assert_eq!(code, EXIT_NUMERICAL);
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"a":1,"channels":[{"offset":0,"re":[1,0]},{"offset":1,"re":[1]}]}"#,
    )
    .unwrap();
    let (code, _, _) = call(&["dual", bad.to_str().unwrap(), "--N", "5"]);
    assert_eq!(code, EXIT_OK);
    std::fs::write(&bad, r#"{"a":2,"channels":[{"offset":0,"re":[1]}]}"#).unwrap();
    let (code, _, err) = call(&["bounds", bad.to_str().unwrap()]);
    assert_eq!(code, EXIT_NUMERICAL, "{err}");
}

#[test]
fn parse_failures_exit_two() {
    assert_eq!(call(&["bogus"]).0, EXIT_PARSE);
    assert_eq!(
        call(&["dual", &data("haar.json"), "--N", "x"]).0,
        EXIT_PARSE
    );
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(call(&["bounds", bad.to_str().unwrap()]).0, EXIT_PARSE);
    assert_eq!(
        call(&[
            "convergence",
            &data("system_b.json"),
            "--N-list",
            "9:3",
            "--out",
            "x.csv"
        ])
        .0,
        EXIT_PARSE
    );
}

#[test]
fn pick_n_and_counterexample() {
    let (code, out, _) = call(&["pick-N", &data("system_b.json"), "--delta", "1e-6"]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(value(&out, "N"), 31.0);
    let (code, out, _) = call(&["oracle", "counterexample"]);
    assert_eq!(code, EXIT_OK);
    assert!((value(&out, "det_T") - 5.0).abs() < 1e-12);
    assert!(value(&out, "sigma_min_PT") < 1e-12);
}

#[test]
fn verify_exit_codes() {
    for name in [
        "haar.json",
        "system_b.json",
        "gabor_box.json",
        "complex_pair.json",
    ] {
        let (code, out, _) = call(&["verify", &data(name), "--N", "12"]);
        assert_eq!(code, EXIT_OK, "{name}: {out}");
        assert!(out.contains("violations=0"));
    }
    let (code, out, _) = call(&["verify", &data("system_b.json"), "--N", "1"]);
    assert_eq!(code, EXIT_OK, "{out}");
}
