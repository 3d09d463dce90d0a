use std::fs;
use std::process::{Command, Output};

fn fheaccel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fheaccel"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON object")
}

#[test]
fn gen_vectors_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let p1 = dir.path().join("a.txt");
    let p2 = dir.path().join("b.txt");
    for p in [&p1, &p2] {
        let out = fheaccel(&[
            "gen-vectors",
            "-n",
            "4",
            "--min-bits",
            "9",
            "--seed",
            "1",
            "-o",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let a = fs::read(&p1).unwrap();
    assert_eq!(a, fs::read(&p2).unwrap());
    assert!(String::from_utf8(a).unwrap().contains("\nq = 257\n"));
}

#[test]
fn gen_vectors_reports_impossible_prime() {
    let out = fheaccel(&["gen-vectors", "-n", "4", "--min-bits", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stdout_json(&out)["status"], "error");
}

#[test]
fn asm_diagnostics_and_hex() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("p.asm");
    fs::write(&src, "PMODADD x=bank0 y=bank1 out=bank3 n=4096\n").unwrap();
    let out = fheaccel(&["asm", "--program", src.to_str().unwrap(), "--hex"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("030130c0 "), "{text}");

    fs::write(&src, "NTT x=bank0\n").unwrap();
    let out = fheaccel(&["asm", "--program", src.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stdout_json(&out)["error"].as_str().unwrap().to_string();
    assert!(
        err.contains("line 1") && err.contains("missing operand"),
        "{err}"
    );
}

#[test]
fn run_from_vector_file_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let vec = dir.path().join("v.txt");
    let csv = dir.path().join("r.csv");
    let out = fheaccel(&[
        "gen-vectors",
        "-n",
        "64",
        "--min-bits",
        "60",
        "-o",
        vec.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = fheaccel(&[
        "run",
        "--vectors",
        vec.to_str().unwrap(),
        "--builtin",
        "tour",
        "--mode",
        "direct",
        "--report",
        csv.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let j = stdout_json(&out);
    assert_eq!(j["status"], "pass");
    assert_eq!(j["result"]["mismatches"], 0);
    let report = fs::read_to_string(&csv).unwrap();
    assert!(report.starts_with("run,seq,mnemonic,"));
    assert_eq!(
        report.lines().count(),
        1 + j["result"]["commands"].as_u64().unwrap() as usize
    );
}

#[test]
fn run_reports_mismatches_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("p.asm");
    // Checks the input against the spectrum, which cannot match.
    fs::write(
        &src,
        ".degree 16\n.load bank0 input.a1\n.check bank0 expect.ntt\n",
    )
    .unwrap();
    let out = fheaccel(&[
        "run",
        "-n",
        "16",
        "--min-bits",
        "40",
        "--ops",
        "ntt",
        "--program",
        src.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let j = stdout_json(&out);
    assert_eq!(j["status"], "fail");
    assert!(j["result"]["mismatches"].as_u64().unwrap() > 0);
    assert!(j["result"]["first_mismatches"][0]
        .as_str()
        .unwrap()
        .contains("index"));
}

#[test]
fn run_with_snapshot_resume() {
    let out = fheaccel(&[
        "run",
        "-n",
        "256",
        "--ops",
        "ct_mul",
        "--builtin",
        "ct_mul",
        "--mode",
        "fifo",
        "--snapshot-at",
        "9",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
}

#[test]
fn bench_reports_both_configurations() {
    let out = fheaccel(&["bench"]);
    assert!(out.status.success());
    let j = stdout_json(&out);
    let rows = j["result"]["bench"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    for r in rows {
        let cycles = r["total_cycles"].as_u64().unwrap();
        assert_eq!(r["millis"].as_f64().unwrap(), cycles as f64 / 250e6 * 1e3);
        assert!(r["delta_percent"].as_f64().unwrap().abs() <= 10.0);
        assert_eq!(r["verified"], true);
    }
}

#[test]
fn selftest_passes() {
    let out = fheaccel(&["selftest"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    assert_eq!(stdout_json(&out)["status"], "pass");
}
