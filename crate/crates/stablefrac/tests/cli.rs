use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_stablefrac");

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

const CONFIG: &str = r#"{
 "model": {"alpha": 1.5, "dim": 2, "sigma": {"kind": "rotinv"}},
 "grid": {"L": 8.0, "N": 32}, "seed": 3,
 "perimeter": {"shape": {"kind": "lq_ball", "q": 2.0, "radius": 1.5}},
 "heat_content": {"shape": {"kind": "rect", "half_widths": [1.0, 1.5]}},
 "semigroup": {"initial": {"kind": "gaussian", "width": 0.5}, "times": [0.0, 0.5]},
 "optimize": {"p": 2.0}
}"#;

fn run(args: &[&str], out: &Path) -> (i32, String) {
    let o = Command::new(BIN)
        .args(args)
        .env_remove("STABLEFRAC_OUT")
        .arg("--out")
        .arg(out)
        .output()
        .unwrap();
    (o.status.code().unwrap(), String::from_utf8_lossy(&o.stdout).into_owned())
}

#[test]
fn subcommands_write_outputs_and_print_digest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let cfg = cfg.to_str().unwrap();
    for (cmd, file) in [
        ("density", "density.csv"),
        ("semigroup", "semigroup.csv"),
        ("perimeter", "perimeter_study.csv"),
        ("heat-content", "heat_content.csv"),
        ("optimize", "trace.csv"),
    ] {
        let out = dir.path().join(cmd);
        let (code, stdout) = run(&[cmd, "--config", cfg], &out);
        assert_eq!(code, 0, "{cmd}");
        assert!(stdout.starts_with("config digest: "), "{cmd}: {stdout}");
        assert!(out.join(file).exists(), "{cmd}");
        assert!(out.join("reports.json").exists(), "{cmd}");
    }
    assert!(dir.path().join("optimize/minimizer.sfld").exists());
}

#[test]
fn model_describe_prints_constants() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"alpha": 1.4, "dim": 2, "sigma": {"kind": "rotinv"}}"#);
    let (code, stdout) = run(&["model", "--describe", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code, 0);
    assert!(stdout.contains("nondeg_margin") && stdout.contains("vol_K_alpha"));
}

#[test]
fn invalid_alpha_is_a_validation_error_with_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": {"alpha": 2.0, "dim": 2, "sigma": {"kind": "rotinv"}}, "grid": {"L": 8.0, "N": 32}}"#,
    );
    let o = Command::new(BIN)
        .args(["model", "--describe", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/model/alpha"));
}

#[test]
fn unknown_field_and_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"model": {"alpha": 1.5, "dim": 2, "sigma": {"kind": "rotinv"}}, "grdi": {}}"#,
    );
    let (code, _) = run(&["density", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code, 3);
    let (code, _) = run(&["frobnicate"], dir.path());
    assert_eq!(code, 2);
    let (code, _) = run(&["verify", "--config", cfg.to_str().unwrap(), "--bogus"], dir.path());
    assert_eq!(code, 2);
}

#[test]
fn outputs_are_byte_stable_and_env_overrides_out() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let cfg = cfg.to_str().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run(&["verify", "--config", cfg, "--suite", "13,17,19", "--threads", "1"], &a).0, 0);
    let o = Command::new(BIN)
        .args(["verify", "--config", cfg, "--suite", "13,17,19", "--out"])
        .arg(dir.path().join("ignored"))
        .env("STABLEFRAC_OUT", &b)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(!dir.path().join("ignored").exists());
    for f in ["reports.json", "verify.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn seed_changes_digest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CONFIG);
    let cfg = cfg.to_str().unwrap();
    let (_, s1) = run(&["density", "--config", cfg], &dir.path().join("x"));
    let (_, s2) = run(&["density", "--config", cfg, "--seed", "4"], &dir.path().join("y"));
    assert_ne!(s1.lines().next(), s2.lines().next());
}
