use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("gencert").chain(args.iter().copied());
    let code = gencert_cli::run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_losses(path: &Path, losses: impl IntoIterator<Item = f64>) {
    let mut s = String::from("id,loss\n");
    for (i, l) in losses.into_iter().enumerate() {
        s += &format!("{i},{l:?}\n");
    }
    fs::write(path, s).unwrap();
}

fn write_cells(path: &Path, n: usize, k: usize) {
    let mut s = String::from("id,cell\n");
    for i in 0..n {
        s += &format!("{i},{}\n", (i * 7) % k);
    }
    fs::write(path, s).unwrap();
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn error_json(stderr: &str) -> Value {
    serde_json::from_str(stderr.trim()).unwrap_or_else(|e| panic!("{e}: {stderr}"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn certify_at_k200_alpha100() {
    let d = tempfile::tempdir().unwrap();
    let n = 100_000;
    write_losses(&d.path().join("l.csv"), (0..n).map(|i| if i % 5 == 0 { 1.0 } else { 0.0 }));
    write_cells(&d.path().join("a.csv"), n, 200);
    let out = d.path().join("r.json");
    let (l, a) = (d.path().join("l.csv"), d.path().join("a.csv"));
    let args = [
        "certify", "--losses", s(&l), "--assignments", s(&a),
        "--k", "200", "--delta", "0.01", "--alpha", "100", "--gamma-failure", "0.04", "--c-sup", "1", "--out", s(&out),
    ];
    let (code, _, err) = run(&args);
    assert_eq!(code, 0, "{err}");
    let r = read_json(&out);
    assert_eq!(r["confidence"].as_f64(), Some(0.95));
    assert_eq!(r["K"], 200);
    assert_eq!(r["n"], 100_000);
    assert_eq!(r["train_loss"].as_f64(), Some(0.2));
    assert_eq!(r["main_part"], Value::Null);
    for key in [
        "T_size", "sum_sq", "u_hat", "g", "unc", "alpha", "gamma", "delta", "eps_gamma", "c_sup", "bound", "vacuous",
        "corrected", "seeds",
    ] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn zero_losses_bound_equals_unc() {
    let d = tempfile::tempdir().unwrap();
    write_losses(&d.path().join("l.csv"), std::iter::repeat_n(0.0, 500));
    write_cells(&d.path().join("a.csv"), 500, 10);
    let out = d.path().join("r.json");
    let (code, _, err) = run(&[
        "certify", "--losses", s(&d.path().join("l.csv")), "--assignments", s(&d.path().join("a.csv")),
        "--k", "10", "--alpha", "5", "--c-sup", "1", "--out", s(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    let r = read_json(&out);
    assert_eq!(r["bound"], r["unc"]);
    assert_eq!(r["train_loss"].as_f64(), Some(0.0));
}

#[test]
fn stored_terms_reassemble_the_stored_bound() {
    let d = tempfile::tempdir().unwrap();
    let n = 2000;
    write_losses(&d.path().join("l.csv"), (0..n).map(|i| ((i * 37) % 101) as f64 / 100.0));
    write_cells(&d.path().join("a.csv"), n, 25);
    write_losses(&d.path().join("al.csv"), (0..n).map(|i| ((i * 41) % 101) as f64 / 100.0));
    write_cells(&d.path().join("aa.csv"), n, 25);
    let out = d.path().join("r.json");
    let aug_out = d.path().join("ra.json");
    let (code, _, err) = run(&[
        "certify", "--losses", s(&d.path().join("l.csv")), "--assignments", s(&d.path().join("a.csv")),
        "--k", "25", "--alpha", "12.5", "--delta", "0.02", "--c-sup", "1.5", "--out", s(&out),
    ]);
    assert_eq!(code, 0, "{err}");
    let (code, _, err) = run(&[
        "certify-aug", "--losses", s(&d.path().join("l.csv")), "--assignments", s(&d.path().join("a.csv")),
        "--aug-losses", s(&d.path().join("al.csv")), "--aug-assignments", s(&d.path().join("aa.csv")),
        "--k", "25", "--alpha", "12.5", "--delta", "0.02", "--c-sup", "1.5", "--out", s(&aug_out),
    ]);
    assert_eq!(code, 0, "{err}");
    for path in [&out, &aug_out] {
        let r = read_json(path);
        let f = |k: &str| r[k].as_f64().unwrap_or_else(|| panic!("{k}"));
        let unc = f("c_sup") * (f("u_hat") * f("alpha") * f("ln_gamma")).sqrt() + f("g");
        assert_eq!(unc, f("unc"));
        let base = r["main_part"].as_f64().unwrap_or(f("train_loss"));
        assert_eq!(base + unc, f("bound"));
        // re-serializing reproduces the file byte for byte
        let text = fs::read_to_string(path).unwrap();
        assert_eq!(serde_json::to_string_pretty(&r).unwrap() + "\n", text);
    }
    let a = read_json(&aug_out);
    assert_eq!(a["corrected"], false);
    assert_eq!(
        a["main_part"].as_f64().unwrap(),
        a["eps_bar"].as_f64().unwrap() + a["aug_loss"].as_f64().unwrap()
    );
}

#[test]
fn malformed_csv_reports_its_line() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("l.csv"), "id,loss\n0,0.5\n1,0.25\n2,abc\n").unwrap();
    write_cells(&d.path().join("a.csv"), 3, 2);
    let (code, _, err) = run(&[
        "certify", "--losses", s(&d.path().join("l.csv")), "--assignments", s(&d.path().join("a.csv")),
        "--k", "2", "--alpha", "1", "--c-sup", "1", "--out", s(&d.path().join("r.json")),
    ]);
    assert_eq!(code, 2);
    let e = error_json(&err);
    assert_eq!(e["error"], "csv");
    assert!(e["message"].as_str().unwrap().contains("line 4"), "{e}");
    assert!(!d.path().join("r.json").exists());
}

#[test]
fn decimal_commas_are_rejected_with_a_hint() {
    let d = tempfile::tempdir().unwrap();
    fs::write(d.path().join("l.csv"), "id,loss\n0,\"0,5\"\n").unwrap();
    write_cells(&d.path().join("a.csv"), 1, 1);
    let (code, _, err) = run(&[
        "certify", "--losses", s(&d.path().join("l.csv")), "--assignments", s(&d.path().join("a.csv")),
        "--k", "1", "--alpha", "1", "--c-sup", "1", "--out", s(&d.path().join("r.json")),
    ]);
    assert_eq!(code, 2);
    let e = error_json(&err);
    assert_eq!(e["error"], "csv");
    assert!(e["message"].as_str().unwrap().contains("decimal point"), "{e}");
}

#[test]
fn validation_errors_exit_with_code_two() {
    let d = tempfile::tempdir().unwrap();
    write_losses(&d.path().join("l.csv"), [0.2, 1.5, 0.0]);
    write_losses(&d.path().join("ok.csv"), [0.2, 0.5, 0.0]);
    write_cells(&d.path().join("a.csv"), 3, 2);
    let l = d.path().join("l.csv");
    let ok = d.path().join("ok.csv");
    let a = d.path().join("a.csv");
    let r = d.path().join("r.json");
    let cases: [(Vec<&str>, &str); 4] = [
        (vec!["certify", "--losses", s(&l), "--assignments", s(&a), "--k", "2", "--alpha", "1", "--c-sup", "1", "--out", s(&r)], "loss_above_supremum"),
        (vec!["certify", "--losses", s(&ok), "--assignments", s(&a), "--k", "2", "--alpha", "500", "--c-sup", "1", "--out", s(&r)], "alpha_above_ceiling"),
        (vec!["certify", "--losses", s(&ok), "--assignments", s(&a), "--k", "2", "--alpha", "1", "--c-sup", "1", "--bogus", "--out", s(&r)], "usage"),
        (vec!["certify", "--losses", s(&ok), "--assignments", s(&a), "--k", "1", "--alpha", "1", "--c-sup", "1", "--out", s(&r)], "invalid_input"),
    ];
    for (args, kind) in cases {
        let (code, _, err) = run(&args);
        assert_eq!(code, 2, "{args:?}");
        assert_eq!(error_json(&err)["error"], kind, "{err}");
    }
}

#[test]
fn partition_apply_and_optimize_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let mut f = String::from("id,f1,f2\n");
    for i in 0..400 {
        let x = (i % 20) as f64 + 0.01 * (i / 20) as f64;
        f += &format!("s{i},{x},{}\n", (i % 7) as f64);
    }
    fs::write(d.path().join("f.csv"), f).unwrap();
    let mut l = String::from("id,loss\n");
    for i in 0..400 {
        l += &format!("s{i},{}\n", (i % 3) as f64 / 4.0);
    }
    fs::write(d.path().join("l.csv"), l).unwrap();
    let p = |x: &str| d.path().join(x);
    let (code, _, err) = run(&[
        "partition", "--features", s(&p("f.csv")), "--k", "6", "--seed", "4", "--out", s(&p("a.csv")),
        "--centroids", s(&p("c.csv")), "--report", s(&p("pr.json")),
    ]);
    assert_eq!(code, 0, "{err}");
    let (code, _, err) = run(&["partition", "--features", s(&p("f.csv")), "--apply", s(&p("c.csv")), "--out", s(&p("b.csv"))]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(fs::read(p("a.csv")).unwrap(), fs::read(p("b.csv")).unwrap());
    let pr = read_json(&p("pr.json"));
    assert_eq!(pr["seeds"]["kmeans"], 4);
    assert_eq!(pr["counts"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).sum::<u64>(), 400);

    let (code, _, err) = run(&[
        "optimize", "--losses", s(&p("l.csv")), "--features", s(&p("f.csv")), "--k-grid", "2,4",
        "--alpha-grid", "1,2,4", "--bonferroni", "--c-sup", "1", "--out", s(&p("o.json")), "--grid-out", s(&p("g.csv")),
    ]);
    assert_eq!(code, 0, "{err}");
    let o = read_json(&p("o.json"));
    assert_eq!(o["bonferroni"], true);
    assert_eq!(o["delta_used"].as_f64(), Some(0.01 / 6.0));
    assert_eq!(o["seeds"]["clustering"].as_array().unwrap().len(), 2);
    let grid = fs::read_to_string(p("g.csv")).unwrap();
    assert!(grid.starts_with("K,alpha,gamma,u_hat,g,unc,bound,valid\n"));
    assert_eq!(grid.lines().count(), 7);
}

#[test]
fn sigma_grid_writes_one_report_per_level() {
    let d = tempfile::tempdir().unwrap();
    let p = |x: &str| d.path().join(x);
    write_losses(&p("l.csv"), (0..300).map(|i| (i % 2) as f64));
    write_cells(&p("a.csv"), 300, 5);
    for sigma in ["0", "0.05", "0.1"] {
        write_losses(&p(&format!("l_{sigma}.csv")), (0..300).map(|i| ((i + 1) % 2) as f64));
        write_cells(&p(&format!("a_{sigma}.csv")), 300, 5);
    }
    let (code, _, err) = run(&[
        "certify-aug", "--losses", s(&p("l.csv")), "--assignments", s(&p("a.csv")),
        "--aug-losses", s(&p("l_{sigma}.csv")), "--aug-assignments", s(&p("a_{sigma}.csv")),
        "--sigma-grid", "0,0.05,0.1", "--k", "5", "--alpha", "2", "--c-sup", "1", "--out", s(&p("r.json")),
    ]);
    assert_eq!(code, 0, "{err}");
    let r = read_json(&p("r.json"));
    let sweep = r["sweep"].as_array().unwrap();
    assert_eq!(sweep.len(), 3);
    assert_eq!(sweep[1]["sigma"].as_f64(), Some(0.05));
}

#[test]
fn verify_concentration_writes_its_table() {
    let d = tempfile::tempdir().unwrap();
    let out = d.path().join("checks.csv");
    let (code, stdout, err) = run(&["verify-concentration", "--suite", "exact", "--seed", "7", "--out", s(&out)]);
    assert_eq!(code, 0, "{err}");
    assert!(stdout.contains("0 failed"), "{stdout}");
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("check,params,estimate,bound,margin,pass\n"));
    assert!(!text.contains(",false\n"));
}

#[test]
fn unknown_suite_is_a_validation_error() {
    let (code, _, err) = run(&["verify-concentration", "--suite", "nope"]);
    assert_eq!(code, 2);
    assert!(error_json(&err)["message"].as_str().unwrap().contains("nope"));
}

#[test]
fn binary_reports_errors_on_stderr() {
    let out = Command::new(env!("CARGO_BIN_EXE_gencert"))
        .args(["certify", "--losses", "/nonexistent/l.csv", "--assignments", "/nonexistent/a.csv", "--k", "2", "--alpha", "1", "--c-sup", "1", "--out", "/dev/null"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let e = error_json(&String::from_utf8(out.stderr).unwrap());
    assert_eq!(e["error"], "io");
    assert!(out.stdout.is_empty());
}
