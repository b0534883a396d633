use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn errcomm(args: &[&str], stdin: Option<&str>) -> Output {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_errcomm"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

const HAMMING: &str = r#"{"seed": 3, "trials": 50,
  "stack": {"layers": [{"kind": "physical", "code": {"type": "hamming74"}, "upper_width": 4}]},
  "model": {"type": "random_flip", "p": 0.0}}"#;

#[test]
fn encode_corrupt_decode_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(dir.path(), "h.json", HAMMING);
    let frame = errcomm(&["encode", "--config", &config, "--message", "3,9,15"], None);
    assert!(frame.status.success());
    assert_eq!(stdout(&frame), "0111100\n0011001\n1111111\n");

    // one flipped bit per word is corrected
    let damaged = "1111100\n0011000\n1110111\n";
    let decoded = errcomm(&["decode", "--config", &config], Some(damaged));
    assert!(decoded.status.success());
    assert_eq!(stdout(&decoded), "3\n9\n15\n");

    let noisy = write(dir.path(), "noisy.json", &HAMMING.replace("\"p\": 0.0", "\"p\": 0.5"));
    let a = errcomm(&["channel", "--config", &noisy, "--trial", "4"], Some(&stdout(&frame)));
    let b = errcomm(&["channel", "--config", &noisy, "--trial", "4"], Some(&stdout(&frame)));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(stdout(&a), stdout(&frame));
}

#[test]
fn sweep_is_reproducible_and_writes_reports() {
    let config = configs().join("repetition-sweep.json").display().to_string();
    let first = errcomm(&["sweep", "--config", &config, "--trials", "50"], None);
    let second = errcomm(&["sweep", "--config", &config, "--trials", "50"], None);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    let text = stdout(&first);
    assert!(text.starts_with("param,value,trials,"));
    assert_eq!(text.lines().count(), 9);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let written = errcomm(&["sweep", "--config", &config, "--trials", "20", "--out", out.to_str().unwrap()], None);
    assert!(written.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(summary["rows"].as_array().unwrap().len(), 8);
    assert!(out.join("report.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", &HAMMING.replace("\"p\": 0.0", "\"p\": 2.0"));
    let o = errcomm(&["sweep", "--config", &bad], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("model.p"));

    assert_eq!(errcomm(&["scenario", "no-such-scenario"], None).status.code(), Some(1));
    assert_eq!(errcomm(&["sweep"], None).status.code(), Some(1));
    assert_eq!(errcomm(&["frobnicate"], None).status.code(), Some(1));

    let strict = write(
        dir.path(),
        "strict.json",
        r#"{"seed": 1, "trials": 1, "message_len": 4,
            "stack": {"layers": [{"kind": "physical", "code": {"type": "hamming74"}, "upper_width": 4,
                                  "radius": 0, "policy": "fail_fast"}]},
            "model": {"type": "random_flip", "p": 0.3}}"#,
    );
    let o = errcomm(&["stack-run", "--config", &strict], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("aborted"));
}

#[test]
fn scenarios_and_feedback_runs() {
    let o = errcomm(&["scenario", "driver-driven"], None);
    assert!(o.status.success());
    let lags: Vec<String> = stdout(&o).lines().skip(1).map(|l| l.rsplit(',').next().unwrap().to_string()).collect();
    assert!(lags[..50].iter().all(|l| l == "1") && lags[50..].iter().all(|l| l == "0"));

    let dir = tempfile::tempdir().unwrap();
    let o = errcomm(&["scenario", "contextual", "--out", dir.path().to_str().unwrap()], None);
    assert!(o.status.success());
    assert!(dir.path().join("contextual.csv").exists() && dir.path().join("contextual.json").exists());

    let feedback = configs().join("feedback-affine.json").display().to_string();
    let o = errcomm(&["feedback-run", "--config", &feedback, "--format", "json"], None);
    assert!(o.status.success());
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((summary["final_plant"].as_f64().unwrap() - 5.0).abs() <= 1e-3);

    let o = errcomm(&["stack-run", "--config", configs().join("balanced-stack.json").to_str().unwrap(), "--message", "true,false"], None);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("layer,errors_in,corrected,introduced,errors_out\n"));
}
