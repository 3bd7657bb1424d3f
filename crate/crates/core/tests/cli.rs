use std::path::Path;
use std::process::{Command, Output};

fn volmem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_volmem")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn iv_to_stdout_has_header_and_rows() {
    let out = volmem(&["iv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# volmem "));
    assert!(text.contains("# v_pull_in = 2.2\n"));
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "v,i,conducting");
    assert_eq!(data.len(), 1 + 1601);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad_value = write(dir.path(), "neg.toml", "[emulator]\nr_int = -5.0\n");
    let out = volmem(&["iv", "--config", &bad_value]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("emulator.r_int"));

    let missing = write(dir.path(), "missing.toml", "[emulator]\n");
    let out = volmem(&["transient", "--config", &missing]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("requires block [circuit]"));

    let unknown = write(dir.path(), "unknown.toml", "[emulator]\nr_coill = 600.0\n");
    let out = volmem(&["iv", "--config", &unknown]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let wrong_verb = write(dir.path(), "verb.toml", "verb = \"gate\"\n[emulator]\n[calc]\n");
    assert_eq!(volmem(&["map", "--config", &wrong_verb]).status.code(), Some(2));
}

#[test]
fn resolution_guard_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "coarse.toml",
        "[emulator]\n[circuit]\n[source]\nkind = \"constant\"\nlevel = 5.0\n[transient]\ndt = 0.001\nt_end = 0.05\n",
    );
    let out = volmem(&["transient", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn map_writes_csv_and_prints_heatmap() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "map.toml", "[emulator]\n[sweep]\nv3 = -1.2\n");
    let csv = dir.path().join("map.csv");
    let out = volmem(&["map", "--config", &cfg, "--out", csv.to_str().unwrap(), "--jobs", "2"]);
    assert!(out.status.success());
    let console = String::from_utf8(out.stdout).unwrap();
    assert!(console.contains("register M1, V3 = -1.2 V"));
    assert!(console.contains("i=NOT(IMP_1)"));
    let text = std::fs::read_to_string(csv).unwrap();
    assert!(text.contains("# grid = 71x71\n"));
    assert!(text.contains("v1,v2,code_m1,label_m1,code_m2,label_m2,oscillated\n"));
    assert!(text.contains(",4,NOT(IMP_1),"));
}

#[test]
fn seed_flag_changes_jittered_transient() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "jitter.toml",
        "[emulator]\nr_int = 220.0\n[device]\njitter_sigma = 0.1\n[circuit]\n[source]\nkind = \"constant\"\nlevel = 5.0\n",
    );
    let a = volmem(&["transient", "--config", &cfg, "--seed", "1"]);
    let b = volmem(&["transient", "--config", &cfg, "--seed", "2"]);
    assert!(a.status.success() && b.status.success());
    assert!(String::from_utf8_lossy(&a.stdout).contains("# seed = 1\n"));
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn gate_and_osc_check_defaults() {
    let gate = String::from_utf8(volmem(&["gate"]).stdout).unwrap();
    assert!(gate.contains("a,b,m1,m2\n0,0,1,1\n0,1,1,1\n1,0,1,0\n1,1,1,1\n"));
    assert!(gate.contains("code_m2 = 11, label_m2 = IMP_1"));
    let osc = String::from_utf8(volmem(&["osc-check"]).stdout).unwrap();
    assert!(osc.contains("r1,r_on,r_off,onset_voltage,post_switch_voltage,v_hold,unstable\n"));
    assert!(osc.contains("# transition_frequency_hz = 5.61723329e2"));
}
