use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn vlab(args: &[&str], config: Option<&Path>, env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_vlab"));
    cmd.args(args);
    if let Some(c) = config {
        cmd.arg(c);
    }
    match env {
        Some(v) => cmd.env("VLAB_SEED_OVERRIDE", v),
        None => cmd.env_remove("VLAB_SEED_OVERRIDE"),
    };
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run_into(config: &Path, out: &Path, extra: &[&str], env: Option<&str>) -> Output {
    let mut args = vec!["run", "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    vlab(&args, Some(config), env)
}

const FAILING_WELL: &str = r#"{"version": 1, "scenarios": [
  {"name": "wrong_reference", "kind": "virtual_level", "expect_fail": EXPECT,
   "parameters": {"shape": {"kind": "square_well", "depth": 1.0, "radius": 1.0}, "d": 3,
                  "grid": {"r_max": 40.0, "points": 2000}, "expected_lambda": 3.0}}
]}"#;

#[test]
fn empty_scenario_list_writes_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "empty.json", r#"{"version": 1, "scenarios": []}"#);
    let out = tmp.path().join("out");
    let o = run_into(&cfg, &out, &[], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(out.join("summary.csv")).unwrap(),
        "scenario,d,shape,lambda,epsilon,ground_energy,negative_count,fitted_s,classification\n"
    );
}

#[test]
fn malformed_json_exits_2_with_position() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.json", "{\"version\": 1,\n  \"scenarios\": [\n    {\"name\": }\n]}");
    let o = vlab(&["list"], Some(&cfg), None);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("bad.json:3:"), "{err}");
}

#[test]
fn unknown_key_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "k.json", r#"{"version": 1, "scenarios": [], "extra": true}"#);
    let o = run_into(&cfg, &tmp.path().join("out"), &[], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("extra"));
}

#[test]
fn duplicate_names_name_both_locations() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "{\"version\": 1, \"scenarios\": [\n\
        {\"name\": \"h\", \"kind\": \"fermion_hardy\", \"parameters\": {\"rho0\": 1, \"rho1\": 10, \"points\": 50, \"modes\": 2}},\n\
        {\"name\": \"h\", \"kind\": \"fermion_hardy\", \"parameters\": {\"rho0\": 1, \"rho1\": 10, \"points\": 50, \"modes\": 2}}\n]}";
    let cfg = write(tmp.path(), "dup.json", text);
    let o = vlab(&["list"], Some(&cfg), None);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("scenarios[0] (line 2"), "{err}");
    assert!(err.contains("scenarios[1] (line 3"), "{err}");
}

#[test]
fn list_shows_every_kind_in_file_order() {
    let o = vlab(&["list"], Some(&fixture("seven_kinds.json")), None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let kinds: Vec<&str> = text.lines().map(|l| l.split('\t').nth(1).unwrap()).collect();
    assert_eq!(
        kinds,
        [
            "geometry_identities",
            "cone_separation",
            "ims_verify",
            "fermion_hardy",
            "virtual_level",
            "decay_fit",
            "efimov_count"
        ]
    );
    assert_eq!(text, String::from_utf8(vlab(&["list"], Some(&fixture("seven_kinds.json")), None).stdout).unwrap());
}

#[test]
fn sample_run_is_byte_identical_across_runs_and_job_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run_into(&fixture("seven_kinds.json"), &a, &["--plots"], None).status.code(), Some(0));
    assert_eq!(run_into(&fixture("seven_kinds.json"), &b, &["--plots", "--jobs", "3"], None).status.code(), Some(0));
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.iter().any(|n| n == "decay.svg"));
    for n in &names {
        assert_eq!(fs::read(a.join(n)).unwrap(), fs::read(b.join(n)).unwrap(), "{n:?}");
    }
    let report: Value = serde_json::from_str(&fs::read_to_string(a.join("decay.json")).unwrap()).unwrap();
    assert_eq!(report["schema"], 1);
    assert_eq!(report["outcome"], "pass");
    let csv = fs::read_to_string(a.join("summary.csv")).unwrap();
    assert!(csv.lines().any(|l| l.starts_with("decay,3,square_well,") && l.ends_with(",RESONANCE")));
}

#[test]
fn failing_assertion_exits_1_unless_expected() {
    let tmp = tempfile::tempdir().unwrap();
    let plain = write(tmp.path(), "f.json", &FAILING_WELL.replace("EXPECT", "false"));
    let o = run_into(&plain, &tmp.path().join("o1"), &[], None);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stdout).unwrap().contains("critical coupling"));

    let control = write(tmp.path(), "c.json", &FAILING_WELL.replace("EXPECT", "true"));
    let out = tmp.path().join("o2");
    assert_eq!(run_into(&control, &out, &[], None).status.code(), Some(0));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("wrong_reference.json")).unwrap()).unwrap();
    assert_eq!(report["outcome"], "expected_fail");
}

#[test]
fn seed_override_replaces_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = fixture("seven_kinds.json");
    let o = run_into(&cfg, &tmp.path().join("bad"), &[], Some("not-a-number"));
    assert_eq!(o.status.code(), Some(2));

    let out = tmp.path().join("o");
    assert_eq!(run_into(&cfg, &out, &[], Some("77")).status.code(), Some(0));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("sep.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 77);
}

#[test]
fn ladder_prints_one_row_per_order() {
    let o = vlab(&["ladder", "--masses", "1,2,3,4", "--n", "3", "--lmax", "3"], None, None);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "l\tkappa\tkappa_prime\td");
    assert_eq!(rows.len(), 4);

    let j = vlab(&["ladder", "--masses", "1,2,3,4", "--json"], None, None);
    let v: Value = serde_json::from_slice(&j.stdout).unwrap();
    assert_eq!(v["schema"], 1);
    assert_eq!(v["rungs"].as_array().unwrap().len(), 3);
}

#[test]
fn ladder_rejects_bad_masses() {
    let o = vlab(&["ladder", "--masses", "1,-2,3"], None, None);
    assert_ne!(o.status.code(), Some(0));
}
