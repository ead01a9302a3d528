use std::process::{Command, Output};

use serde_json::Value;

fn cu_lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cu-lab")).args(args).env_remove("CU_LAB_DATA").output().unwrap()
}

fn json(args: &[&str]) -> (i32, Value) {
    let out = cu_lab(args);
    (out.status.code().unwrap(), serde_json::from_slice(&out.stdout).unwrap())
}

#[test]
fn permutation_table_for_gf8() {
    let (code, v) = json(&["--json", "permutation", "--m", "3", "--all-u"]);
    assert_eq!(code, 0);
    let rows = v["results"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let expected = match row["u"].as_str().unwrap() {
            "0x0" => "invalid",
            "0x1" => "not-permutation",
            _ => "permutation",
        };
        assert_eq!(row["result"], expected, "{row}");
    }
    assert_eq!(rows[1]["witness"]["verified"], true);
}

#[test]
fn threshold_search() {
    let (code, v) = json(&["--json", "bound", "--find-threshold"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["threshold"], 25);
    assert_eq!(v["results"]["first_applicable_m"], 13);
}

#[test]
fn certificate_verification_passes() {
    let (code, v) = json(&["--json", "verify-certificates"]);
    assert_eq!(code, 0);
    for check in v["results"]["checks"].as_array().unwrap() {
        assert_eq!(check["status"], "pass", "{check}");
    }
}

#[test]
fn data_directory_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_cu-lab"))
        .args(["verify-certificates"])
        .env("CU_LAB_DATA", dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn json_is_byte_identical_across_runs() {
    for args in [
        &["--json", "--threads", "1", "collision", "--m", "5", "--all-u"][..],
        &["--json", "--threads", "1", "ddt", "--m", "3", "--u", "gen^2"],
        &["--json", "--threads", "1", "theta-scan", "--m", "3", "--u", "hex:0x3"],
        &["--json", "--threads", "1", "verify-certificates", "--mutants", "3"],
        &["--json", "bound", "--m", "23"],
    ] {
        let a = cu_lab(args);
        let b = cu_lab(args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["permutation", "--m", "3"][..],
        &["permutation", "--m", "3", "--u", "hex:0x9"],
        &["permutation", "--m", "3", "--u", "gen^2", "--all-u"],
        &["permutation", "--m", "40", "--u", "gen^1"],
        &["field-info", "--m", "3", "--modulus", "0xf"],
        &["bound", "--m", "0"],
        &["frobnicate"],
    ] {
        let out = cu_lab(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn failed_verification_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let src = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("certificates");
    for entry in std::fs::read_dir(src).unwrap() {
        let path = entry.unwrap().path();
        std::fs::copy(&path, dir.path().join(path.file_name().unwrap())).unwrap();
    }
    let g = dir.path().join("g.poly");
    let text = std::fs::read_to_string(&g).unwrap().replacen("be^12 u^9\n", "", 1);
    std::fs::write(&g, text).unwrap();
    cu_lab::certify::write_manifest(dir.path()).unwrap();
    let out = cu_lab(&["verify-certificates", "--data", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}
