use std::path::Path;
use std::process::{Command, Output};

fn buffon(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_buffon"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn workspace() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("square.json"),
        r#"{"polygon": [[0,0],[1,0],[1,1],[0,1]]}"#,
    )
    .unwrap();
    std::fs::write(
        dir.path().join("disk.json"),
        r#"{"disk": {"center": [0, 0], "radius": 0.5}}"#,
    )
    .unwrap();
    dir
}

#[test]
fn oracle_check_agrees() {
    let dir = workspace();
    let o = buffon(
        dir.path(),
        &[
            "oracle-check",
            "--body",
            "square.json",
            "--n",
            "32",
            "--eps",
            "0.01",
            "--lines",
            "10000",
            "--seed",
            "7",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "10000/10000 agree");
}

#[test]
fn missing_body_is_a_validation_error() {
    let dir = workspace();
    let o = buffon(dir.path(), &["oracle-check", "--n", "32", "--eps", "0.01"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("body"), "{}", stderr(&o));
    let o = buffon(dir.path(), &["sweep", "--out", "x.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("body"));
}

#[test]
fn bad_inputs_name_the_field() {
    let dir = workspace();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"polygon": [[0,0],[1,1],[2,2]]}"#,
    )
    .unwrap();
    let o = buffon(dir.path(), &["length-study", "--body", "bad.json"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("body"));
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"seed": 3, "tehta_res": 64}"#,
    )
    .unwrap();
    let o = buffon(
        dir.path(),
        &[
            "--config",
            "cfg.json",
            "length-study",
            "--body",
            "square.json",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("config"));
    let o = buffon(
        dir.path(),
        &[
            "build",
            "--body",
            "square.json",
            "--length",
            "3",
            "--out",
            "s.json",
        ],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("length"));
}

#[test]
fn build_then_disc_reproduces_the_witness() {
    let dir = workspace();
    let o = buffon(
        dir.path(),
        &[
            "build",
            "--body",
            "square.json",
            "--length",
            "100000",
            "--seed",
            "1",
            "--out",
            "set.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let args = [
        "disc",
        "--set",
        "set.json",
        "--theta-res",
        "64",
        "--offset-res",
        "64",
        "--refine",
        "1",
        "--seed",
        "2",
        "--out",
    ];
    let o = buffon(dir.path(), &[&args[..], &["r1.json"]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = buffon(dir.path(), &[&args[..], &["r2.json"]].concat());
    assert_eq!(o.status.code(), Some(0));
    let r1 = std::fs::read(dir.path().join("r1.json")).unwrap();
    assert_eq!(r1, std::fs::read(dir.path().join("r2.json")).unwrap());

    let manifest = buffon::steinhaus::SetManifest::load(&dir.path().join("set.json")).unwrap();
    let set = manifest.to_set().unwrap();
    assert!((set.total_length() - 100000.0).abs() <= 1e-9 * 100000.0);
    let report = buffon::DiscrepancyReport::load(&dir.path().join("r1.json")).unwrap();
    let d = buffon::local_discrepancy(&set, &report.witness, report.l_actual).unwrap();
    assert!((d - report.sup_estimate).abs() <= 1e-9);

    let o = buffon(
        dir.path(),
        &["oracle-check", "--set", "set.json", "--lines", "500"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "500/500 agree");
}

#[test]
fn sweep_csv_is_reproducible_and_plottable() {
    let dir = workspace();
    let args = [
        "sweep",
        "--body",
        "square.json",
        "--mode",
        "zero",
        "--l-min",
        "1000",
        "--l-max",
        "20000",
        "--points",
        "4",
        "--seed",
        "5",
        "--theta-res",
        "32",
        "--offset-res",
        "32",
        "--refine",
        "0",
        "--out",
    ];
    for out in ["a.csv", "b.csv"] {
        let o = buffon(dir.path(), &[&args[..], &[out]].concat());
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    let a = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert_eq!(
        a,
        std::fs::read_to_string(dir.path().join("b.csv")).unwrap()
    );
    assert_eq!(a.lines().count(), 5);
    assert!(a.starts_with("L_target,M,n,eps,seed,L_actual,sup_estimate,max_abs_z,quadrature_max,padding_count,wall_time_seconds"));

    let o = buffon(
        dir.path(),
        &["plot", "--csv", "a.csv", "--out", "fig", "--deflate", "0.4"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("fig.dat").exists() && dir.path().join("fig.gp").exists());
}

#[test]
fn studies_write_json() {
    let dir = workspace();
    let o = buffon(
        dir.path(),
        &[
            "tails",
            "--body",
            "square.json",
            "--n",
            "32",
            "--trials",
            "2000",
            "--s",
            "4,8",
            "--out",
            "t.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let t: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("t.json")).unwrap()).unwrap();
    assert_eq!(t["rows"].as_array().unwrap().len(), 2);

    let o = buffon(
        dir.path(),
        &[
            "length-study",
            "--body",
            "disk.json",
            "--n",
            "8",
            "--eps",
            "0.05",
            "--trials",
            "500",
            "--out",
            "l.json",
        ],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let l: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("l.json")).unwrap()).unwrap();
    assert_eq!(l["violations"], 0);

    let o = buffon(
        dir.path(),
        &["tails", "--body", "square.json", "--x", "2,2"],
    );
    assert_eq!(o.status.code(), Some(1));
}
