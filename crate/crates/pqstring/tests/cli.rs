use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pqstring"));
    c.env_remove(pqstring::golden::GOLDEN_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch_dir(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("pqstring-cli-{name}-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn symbolic_commands_pass_their_checks() {
    let cases: [&[&str]; 6] = [
        &["gd", "--n", "4", "--check"],
        &["string-system", "--p", "2", "--t", "-t/2,0,0,0,1/30", "--reference", "pi2", "--check"],
        &["string-system", "--p", "4", "--t", "0,0,0,0,1", "--ising", "--reference", "ising4", "--check"],
        &["lax", "--t", "0,0,1", "--c", "c2", "--check"],
        &["hirota", "--case", "tricritical-ising", "--check"],
        &["derive-pde", "--case", "critical-ising", "--show-substitutions"],
    ];
    for args in cases {
        let o = run(args);
        let out = stdout(&o);
        assert_eq!(o.status.code(), Some(0), "{args:?}\n{out}");
        assert!(out.starts_with("# config: {"), "{args:?}");
        assert!(!out.contains("MISMATCH"), "{args:?}");
    }
}

#[test]
fn derive_pde_reports_match() {
    let o = run(&["derive-pde", "--case", "pi2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("golden: MATCH"));
}

#[test]
fn golden_mismatch_exits_3() {
    let src = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("golden");
    let dir = scratch_dir("golden");
    for f in std::fs::read_dir(&src).unwrap() {
        let f = f.unwrap().path();
        std::fs::copy(&f, dir.join(f.file_name().unwrap())).unwrap();
    }
    let pdes = std::fs::read_to_string(dir.join("pdes.txt")).unwrap();
    let broken = pdes.replace("pi2 = br(60*U[x s]", "pi2 = br(61*U[x s]");
    assert_ne!(pdes, broken);
    std::fs::write(dir.join("pdes.txt"), broken).unwrap();
    let o = bin().env(pqstring::golden::GOLDEN_ENV, &dir).args(["derive-pde", "--case", "pi2"]).output().unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("golden: MISMATCH"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["derive-pde", "--case", "pearcey"][..],
        &["frobnicate"],
        &["solve-pi2", "--n", "ten"],
        &["string-system", "--p", "2", "--t", "0,1"],
        &["gd", "--format", "csv"],
        &["kernel"],
    ] {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_failure_exits_4() {
    let o = run(&["solve-pi2", "--branch", "-1", "--n", "400"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn zero_coupling_determinant() {
    let o = run(&["fredholm", "--s", "-1", "--mu-im", "0", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["results"][0]["log_det"], serde_json::json!([0.0, 0.0]));
    assert_eq!(v["config"]["mu_im"], 0.0);
}

#[test]
fn airy_sweep_csv_is_monotone() {
    let o = run(&["fredholm", "--sweep", "-3:1:9", "--check", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert!(lines.next().unwrap().starts_with("# config: "));
    assert!(lines.next().unwrap().starts_with("s,log_det_re"));
    let vals: Vec<f64> = lines.map(|l| l.split(',').nth(3).unwrap().parse().unwrap()).collect();
    assert_eq!(vals.len(), 9);
    assert!(vals.windows(2).all(|w| w[1] > w[0]));
    assert!((vals[2] - 0.413_224_142_505).abs() < 1e-10);
}

#[test]
fn json_is_reproducible_and_file_output_matches() {
    let args = ["solve-pi2", "--t", "0.2", "--n", "600", "--format", "json"];
    let a = stdout(&run(&args));
    let b = stdout(&run(&args));
    assert_eq!(a, b);
    let dir = scratch_dir("out");
    let path = dir.join("sol.json");
    let o = bin().args(args).arg("--output").arg(&path).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&path).unwrap(), a);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["config"]["n"], 600);
    assert_eq!(v["metadata"]["branch"], 1);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn solve_csv_has_jet_columns() {
    let o = run(&["solve-pi2", "--n", "300", "--format", "csv"]);
    let out = stdout(&o);
    let header = out.lines().nth(1).unwrap();
    assert_eq!(header, "x,y,y',y'',y''',y''''");
    assert_eq!(out.lines().count(), 302);
}

#[test]
fn kernel_and_verify_commands() {
    let o = run(&["kernel", "--airy", "--lambdas", "-1,0.5", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 6);
    let k: f64 = out.lines().nth(3).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((k - pqstring::wavekernel::airy_kernel(-1.0, 0.5)).abs() < 1e-12);

    let o = run(&["verify-pde", "--s-grid", "0:0:1", "--x-grid", "0:0:1", "--t-grid", "0:0:1", "--check", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["config"]["resolved"]["n_nodes"], 48);
}
