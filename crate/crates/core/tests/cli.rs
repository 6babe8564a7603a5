use std::fs;
use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_systl");

fn systl(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(BIN).current_dir(dir).args(args).output().expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stdout).into_owned())
}

#[test]
fn gen_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["--family", "handle-disk", "--eps", "0.2", "--refine", "1", "--seed", "5", "--jitter", "0.1"];
    for name in ["a.smesh", "b.smesh"] {
        let mut a = vec!["gen"];
        a.extend(args);
        a.extend(["-o", name]);
        assert_eq!(systl(dir.path(), &a).0, 0);
    }
    let a = fs::read(dir.path().join("a.smesh")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.smesh")).unwrap());
    assert!(String::from_utf8(a).unwrap().contains("# familyspec: "));
}

#[test]
fn family_csv_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let grid = r#"[{"family":"handle_disk","eps":0.2,"refine":1},
                   {"family":"handle_disk","eps":0.1,"refine":1,"seed":3,"jitter":0.05},
                   {"family":"unit_disk"}]"#;
    fs::write(dir.path().join("grid.json"), grid).unwrap();
    let (c1, _) = systl(dir.path(), &["family", "--grid", "grid.json", "-o", "r1.csv"]);
    let (c2, _) = systl(dir.path(), &["family", "--grid", "grid.json", "-o", "r2.csv"]);
    assert_eq!((c1, c2), (3, 3), "the disk row is an instance error");
    let r1 = fs::read_to_string(dir.path().join("r1.csv")).unwrap();
    assert_eq!(r1, fs::read_to_string(dir.path().join("r2.csv")).unwrap());
    assert_eq!(r1.lines().count(), 4);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r1.summary.json")).unwrap()).unwrap();
    assert_eq!(summary["instances"], 3);
    assert_eq!(summary["errors"], 1);
}

#[test]
fn verify_trace_systole_sweep() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(systl(dir.path(), &["gen", "--family", "handle-disk", "--eps", "0.2", "--refine", "1", "-o", "h.smesh"]).0, 0);
    assert_eq!(systl(dir.path(), &["verify", "h.smesh", "-o", "report.json"]).0, 0);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["refine"], 1);
    assert_eq!(systl(dir.path(), &["verify", "h.smesh", "--constant", "1e-9"]).0, 2);

    assert_eq!(systl(dir.path(), &["trace", "h.smesh", "-o", "cert.json"]).0, 0);
    let cert: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("cert.json")).unwrap()).unwrap();
    assert_eq!(cert["case"], "A");

    let (code, out) = systl(dir.path(), &["systole", "h.smesh"]);
    assert_eq!(code, 0);
    let sys: serde_json::Value = serde_json::from_str(&out).unwrap();
    for key in ["length", "witness", "mode", "exact"] {
        assert!(sys.get(key).is_some(), "{key}");
    }
    let (code, out) = systl(dir.path(), &["sweep", "h.smesh", "--axis", "x", "--samples", "64"]);
    assert_eq!(code, 0);
    let sw: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(sw["intervals"].as_array().unwrap().len(), 1);
}

#[test]
fn systole_oracle_on_csaszar() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(systl(dir.path(), &["gen", "--family", "csaszar", "-o", "c.smesh"]).0, 0);
    let (code, out) = systl(dir.path(), &["systole", "c.smesh", "--oracle"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["agree"], true);
    assert_eq!(systl(dir.path(), &["verify", "c.smesh"]).0, 3, "closed torus is a hypothesis error");
}
