use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], exact: bool) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_wickstar"));
    cmd.args(args);
    if exact {
        cmd.env("WICKSTAR_EXACT", "1");
    } else {
        cmd.env_remove("WICKSTAR_EXACT");
    }
    cmd.output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn z_star_zbar() {
    let o = run(&["star", "--f", "z", "--g", "zbar", "--format", "csv"], false);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "I,J,re,im\n0,0,1,0\n1,1,1,0\n");
}

#[test]
fn exact_mode_keeps_rationals() {
    let o = run(&["star", "--f", "z", "--g", "zbar", "--hbar", "1/3"], true);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["product"]["mode"], "exact");
    let c00 = v["product"]["coeffs"].as_array().unwrap().iter().find(|c| c["I"] == serde_json::json!([0])).unwrap();
    assert_eq!(c00["re"], "2/3");
}

#[test]
fn errors_are_json_with_nonzero_exit() {
    let o = run(&["seminorm", "--f", "no-such-jet"], false);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["error"], "parse");

    let o = run(&["seminorm", "--f", "z", "--m", "1", "--l", "2"], false);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["error"], "branch_out_of_range");

    let o = run(&["star", "--f", "zbar:2", "--g", "z"], false);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(v["error"], "invalid_parameter");
}

#[test]
fn divergence_example() {
    let o = run(&["diverge", "--example", "badguy", "--format", "json"], false);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let statuses: Vec<(f64, String)> = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["hbar"].as_f64().unwrap(), r["status"].as_str().unwrap().to_string()))
        .collect();
    assert_eq!(
        statuses,
        vec![
            (0.125, "diverging".into()),
            (0.5, "diverging".into()),
            (2.0, "diverging".into()),
            (0.0, "converged_exact".into())
        ]
    );
}

#[test]
fn jet_files_round_trip_through_the_cli() {
    let dir = std::env::temp_dir().join(format!("wickstar-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("f.json");
    std::fs::write(
        &path,
        r#"{"n":1,"p":[[0.0,0.0]],"hbar":0.5,"mode":"float","coeffs":[{"I":[1],"J":[0],"re":1.0,"im":0.0}]}"#,
    )
    .unwrap();
    let o = run(&["star", "--f", path.to_str().unwrap(), "--g", "zbar", "--format", "csv"], false);
    assert_eq!(stdout(&o), "I,J,re,im\n0,0,1,0\n1,1,1,0\n");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn seminorm_of_zbar() {
    // h_0(0,0) of zbar at hbar = 1/2 is 1, so every level-0 norm is 1.
    let o = run(&["seminorm", "--f", "zbar"], false);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["seminorm"], 1.0);
    assert_eq!(v["h"]["status"], "converged_exact");
}

#[test]
fn verify_output_is_deterministic() {
    let args = ["verify", "--only", "2;6", "--seed", "7", "--format", "json"];
    let a = run(&args, false);
    let b = run(&args, false);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(v["seed"], 7);
    assert_eq!(v["criteria"].as_array().unwrap().len(), 2);
}

#[test]
fn table_is_csv() {
    let o = run(&["table", "--f", "zbar", "--m", "0", "--degree", "1"], false);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,l,R,S,hbar,value,status,terms_used,last_term"));
    assert_eq!(lines.count(), 4);
}
