use std::fs;
use std::process::Command;

fn uq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_uq"))
}

#[test]
fn exit_codes_of_the_binary() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"study": "s", "model": {"builtin": "dam"}, "inputs": {"builtin": "flood"}}"#).unwrap();
    let o = uq().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("model.builtin"));

    let study = env!("CARGO_MANIFEST_DIR").to_owned() + "/studies/flood.json";
    let o = uq().args(["validate", &study]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));

    let ok = dir.path().join("ok.json");
    fs::write(
        &ok,
        r#"{"study": "small", "seed": 5, "model": {"builtin": "flood"}, "inputs": {"builtin": "flood"},
            "steps": [{"reliability": {"method": "form", "output": "Zc", "threshold": 58}}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = uq().arg("run").arg(&ok).arg("--out").arg(&out).args(["--threads", "2"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("report.json").is_file());
}
