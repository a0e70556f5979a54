use std::path::Path;
use std::process::{Command, Output};

use gammaspin::{GrComponent, GroupModel, ImageModule, TheorySpec};

fn run(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gammaspin"))
        .args(args)
        .env("GAMMASPIN_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn spin11_gr_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["gr", "--family", "spin", "--m", "11", "--n", "1"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for line in ["d=4: Z/2(c_2)", "d=6: Z(c_3)", "d=8: Z/2(c_4)", "d=10: Z(c_5)", "d=12: Z/2(c_2c_4)", "d=16: Z(e_8)"] {
        assert!(text.lines().any(|l| l == line), "missing {line:?} in\n{text}");
    }
}

#[test]
fn verify_single_fact_as_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["verify", "--fact", "T10.4", "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["id"], "T10.4");
    assert_eq!(v["pass"], true);
    assert_eq!(v["certified"], true);
}

#[test]
fn failed_fact_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    // The computed saturation threshold of Spin(13) is 3, below the registered value.
    let o = run(&["verify", "--fact", "L9.1"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn spin9_model() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["model", "--family", "spin", "--m", "9", "--format", "json"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["generators"], serde_json::json!(["y6"]));
    assert_eq!(v["t"], 2);
}

#[test]
fn gr_as_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["gr", "--m", "11", "--format", "csv"], dir.path());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("degree,factor_order,representative,certified"));
    assert!(text.lines().any(|l| l == "16,free,e_8,true"));
    assert!(text.lines().any(|l| l == "4,Z/2,c_2,true"));

    let empty = run(&["gr", "--m", "11", "--degrees", "5..5", "--format", "csv"], dir.path());
    assert_eq!(empty.status.code(), Some(0));
    assert_eq!(stdout(&empty), "degree,factor_order,representative,certified\n");
}

#[test]
fn unverified_decomposition_reports_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let csv = stdout(&run(&["gr", "--m", "15", "--degrees", "22", "--format", "csv"], dir.path()));
    assert_eq!(csv, "degree,factor_order,representative,certified\n22,free,,true\n22,Z/2,,true\n22,Z/4,,true\n");
    let text = stdout(&run(&["gr", "--m", "15", "--degrees", "22"], dir.path()));
    assert!(text.contains("d=22: Z + Z/2 + Z/4, generated by"), "{text}");
    assert!(text.contains("[representatives unverified]"));
}

#[test]
fn gr_json_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["gr", "--m", "13", "--format", "json"], dir.path());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let table: Vec<GrComponent> = serde_json::from_value(v["components"].clone()).unwrap();
    let direct = ImageModule::new(&GroupModel::spin(13).unwrap(), TheorySpec::new(1).unwrap()).gr_table();
    assert_eq!(table, direct);
    let again = serde_json::to_string_pretty(&serde_json::to_value(&v).unwrap()).unwrap() + "\n";
    assert_eq!(again, stdout(&o));
}

#[test]
fn warm_cache_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["gr", "--m", "15", "--n", "2", "--format", "json"][..],
        &["profile", "--m", "13"],
        &["class", "--m", "17", "--n", "2", "c2c3c6c7", "--format", "json"],
    ] {
        let uncached = run(&[args, &["--no-cache"]].concat(), dir.path());
        let cold = run(args, dir.path());
        let warm = run(args, dir.path());
        assert_eq!(cold.status.code(), Some(0));
        assert_eq!(cold.stdout, warm.stdout, "{args:?}");
        assert_eq!(cold.stdout, uncached.stdout, "{args:?}");
    }
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0);
}

#[test]
fn damaged_cache_entries_are_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["gr", "--m", "11", "--format", "csv"];
    let cold = run(&args, dir.path());
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        std::fs::write(entry.unwrap().path(), "{").unwrap();
    }
    let again = run(&args, dir.path());
    assert_eq!(cold.stdout, again.stdout);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["gr", "--m", "11", "--bogus"][..],
        &["gr"],
        &["gr", "--m", "12"],
        &["gr", "--m", "11", "--max-factors", "0"],
        &["gr", "--m", "11", "--degrees", "8..4"],
        &["class", "--m", "11", "c2", "--precision", "0"],
        &["verify", "--fact", "X9.9"],
        &["model", "--m", "11", "--format", "csv"],
    ] {
        let o = run(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn unwritable_output_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("missing").join("out.txt");
    let o = run(&["model", "--m", "11", "--output", target.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
