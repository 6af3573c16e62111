use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ffmoments_cli::config::ExperimentConfig;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ffmoments"));
    c.env("RUST_LOG", "warn");
    c
}

fn smoke() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/smoke.json")
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn")
}

/// Writes `cfg` next to a copy of the smoke fixtures and returns its path.
fn write_config(dir: &Path, cfg: &Value) -> PathBuf {
    let fx = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/smoke.json");
    fs::copy(fx, dir.join("fixtures.json")).unwrap();
    let p = dir.join("config.json");
    fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p
}

fn smoke_value() -> Value {
    let mut v: Value = serde_json::from_str(&fs::read_to_string(smoke()).unwrap()).unwrap();
    v["fixtures"] = "fixtures.json".into();
    v
}

fn metadata(out: &Path, cmd: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join(format!("{cmd}_metadata.json"))).unwrap())
        .unwrap()
}

#[test]
fn smoke_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["all"], &smoke(), dir.path());
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    for f in [
        "primes.csv",
        "moduli.csv",
        "lpolys.csv",
        "moments.csv",
        "fsum.csv",
        "all_checks.csv",
    ] {
        assert!(dir.path().join(f).exists(), "{f} missing");
    }
}

#[test]
fn degree_two_over_f3_lists_nine_moduli() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["enumerate"], &smoke(), dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(dir.path().join("moduli.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    // nine of degree 2 plus the explicit cubic
    assert_eq!(rows.len(), 10);
    let t2 = rows.iter().find(|r| r.starts_with("3,T^2,")).unwrap();
    assert!(t2.contains(",6,"), "{t2}");
}

#[test]
fn malformed_modulus_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = smoke_value();
    v["families"][0]["moduli"] = serde_json::json!(["T^3 + + 1"]);
    let cfg = write_config(dir.path(), &v);
    let o = run(&["enumerate"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("position"));
}

#[test]
fn unknown_field_and_missing_config_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = smoke_value();
    v["lfun"]["t_pionts"] = 4.into();
    let cfg = write_config(dir.path(), &v);
    assert_eq!(run(&["lfun"], &cfg, dir.path()).status.code(), Some(2));
    let o = bin().arg("lfun").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn budget_override_refuses_large_groups() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["lfun", "--budget", "3"], &smoke(), dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
}

#[test]
fn injected_fault_is_caught() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = smoke_value();
    v["inject_fault"] = true.into();
    let cfg = write_config(dir.path(), &v);
    let o = run(&["lfun"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn tampered_fixture_fails_and_record_repairs_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &smoke_value());
    let fx = dir.path().join("fixtures.json");
    let mut f: Value = serde_json::from_str(&fs::read_to_string(&fx).unwrap()).unwrap();
    let key = "primesums/q2/sup_tail";
    let old = f["values"][key].as_f64().unwrap();
    f["values"][key] = (old * 1.5).into();
    fs::write(&fx, serde_json::to_string(&f).unwrap()).unwrap();

    let out = dir.path().join("out");
    assert_eq!(run(&["primesums"], &cfg, &out).status.code(), Some(1));
    assert_eq!(
        run(&["primesums", "--record"], &cfg, &out).status.code(),
        Some(0)
    );
    let f: Value = serde_json::from_str(&fs::read_to_string(&fx).unwrap()).unwrap();
    assert_eq!(f["values"][key].as_f64(), Some(old));
    // keys owned by other commands survive a partial record
    assert!(f["values"]
        .as_object()
        .unwrap()
        .keys()
        .any(|k| k.starts_with("moments/")));
    assert_eq!(run(&["primesums"], &cfg, &out).status.code(), Some(0));
}

#[test]
fn missing_fixture_fails_without_record() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = smoke_value();
    v["fixtures"] = "empty.json".into();
    let cfg = write_config(dir.path(), &v);
    let o = run(&["moments"], &cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn second_run_hits_the_cache_with_identical_output() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let mut outs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("out{i}"));
        let o = bin()
            .args(["moments", "--cache"])
            .arg(&cache)
            .arg("--config")
            .arg(smoke())
            .arg("--out")
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0));
        outs.push(out);
    }
    let first = metadata(&outs[0], "moments");
    let second = metadata(&outs[1], "moments");
    assert_eq!(first["lpoly_cache_hits"], 0);
    assert_eq!(second["lpoly_cache_misses"], 0);
    assert!(second["lpoly_cache_hits"].as_u64().unwrap() > 0);
    assert!(second["unit_group_cache_hits"].as_u64().unwrap() > 0);
    for f in [
        "moments.csv",
        "charsums.csv",
        "integral.csv",
        "moments_checks.csv",
    ] {
        assert_eq!(
            fs::read(outs[0].join(f)).unwrap(),
            fs::read(outs[1].join(f)).unwrap(),
            "{f}"
        );
    }
    assert!(fs::read_dir(&cache).unwrap().count() > 0);
}

#[test]
fn corrupt_cache_entry_is_recomputed() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let go = |out: &str| {
        bin()
            .args(["lfun", "--cache"])
            .arg(&cache)
            .arg("--config")
            .arg(smoke())
            .arg("--out")
            .arg(dir.path().join(out))
            .output()
            .unwrap()
    };
    assert_eq!(go("a").status.code(), Some(0));
    for e in fs::read_dir(&cache).unwrap() {
        fs::write(e.unwrap().path(), "{ not json").unwrap();
    }
    assert_eq!(go("b").status.code(), Some(0));
    assert_eq!(
        metadata(&dir.path().join("b"), "lfun")["unit_group_cache_hits"],
        0
    );
    assert_eq!(
        fs::read(dir.path().join("a/lpolys.csv")).unwrap(),
        fs::read(dir.path().join("b/lpolys.csv")).unwrap()
    );
}

#[test]
fn committed_configs_round_trip() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        let cfg = ExperimentConfig::load(&p).unwrap();
        let again = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(cfg, again, "{}", p.display());
    }
}
