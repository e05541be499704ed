use std::process::Command;

fn polarq() -> Command {
    Command::new(env!("CARGO_BIN_EXE_polarq"))
}

const SMALL: [&str; 10] = [
    "--n", "64", "--k", "32", "--ebn0-start", "1", "--ebn0-stop", "2", "--max-frames", "400",
];

#[test]
fn csv_to_stdout() {
    let out = polarq().args(SMALL).args(["--ebn0-step", "0.5"]).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "ebn0_db,frames,block_errors,bit_errors,bler,ber");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("1,"));
}

#[test]
fn quantized_run_writes_csv_and_tables() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    let tables = dir.path().join("t.lut");
    let run = || {
        polarq()
            .args(SMALL)
            .args(["--decoder", "q-scl", "--list-size", "4", "--bits", "4"])
            .arg("--tables")
            .arg(&tables)
            .arg("--out")
            .arg(&csv)
            .output()
            .unwrap()
    };
    let out = run();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let first = std::fs::read_to_string(&csv).unwrap();
    let header = std::fs::read_to_string(&tables).unwrap();
    assert!(header.starts_with("polarq-tables 1 N=64 K=16 "));
    assert_eq!(first.lines().count(), 1 + 5);

    let out = run();
    assert!(out.status.success());
    assert_eq!(std::fs::read_to_string(&csv).unwrap(), first);
}

#[test]
fn config_errors_exit_2() {
    let out = polarq().args(["--n", "100"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = polarq().args(["--decoder", "viterbi"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = polarq().args(SMALL).args(["--bits", "9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = polarq()
        .args(SMALL)
        .arg("--out")
        .arg(dir.path().join("missing").join("r.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn corrupt_tables_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let tables = dir.path().join("t.lut");
    std::fs::write(&tables, "polarq-tables 9\n").unwrap();
    let out = polarq()
        .args(SMALL)
        .args(["--decoder", "q-sc"])
        .arg("--tables")
        .arg(&tables)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 1"));
}
