use sgqei::cli::config::RunConfig;
use sgqei::cli::{run, EXIT_FAIL, EXIT_OK, EXIT_USAGE};
use std::path::Path;

fn call(cfg: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec!["sgqei".to_string(), "--config".into(), cfg.display().to_string(), "--out".into(), out.display().to_string()];
    args.extend(extra.iter().map(|s| s.to_string()));
    run(args)
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const K0: &str = "command = \"k0\"\n[worldline]\nkind = \"accelerated\"\na = 1.0\n[f]\nfamily = \"gaussian\"\nsigma = 1.0\n";

#[test]
fn k0_csv_header_and_total() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "k0.toml", K0);
    assert_eq!(call(&cfg, &d.path().join("o"), &[]), EXIT_OK);
    let text = std::fs::read_to_string(d.path().join("o/k0.csv")).unwrap();
    let mut lines = text.lines();
    let first = lines.next().unwrap();
    assert!(first.starts_with("# sgqei-csv v1; command=k0; config_sha256="), "{first}");
    assert_eq!(lines.next().unwrap(), "label,tau,K0_straight,K0_accel,K0_total,status");
    let total = text.lines().last().unwrap();
    let cols: Vec<&str> = total.split(',').collect();
    let want = std::f64::consts::PI.sqrt() * 4.0 / (24.0 * std::f64::consts::PI);
    assert_eq!(cols[0], "total");
    assert!((cols[4].parse::<f64>().unwrap() - want).abs() < 1e-9);
    assert_eq!(cols[5], "pass");
}

#[test]
fn usage_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    let o = d.path().join("o");
    let missing = write(d.path(), "a.toml", "command = \"k0\"\n[f]\nfamily = \"gaussian\"\nsigma = 1.0\n");
    assert_eq!(call(&missing, &o, &[]), EXIT_USAGE);
    let unknown = write(d.path(), "b.toml", &format!("{K0}bogus = 3\n"));
    assert_eq!(call(&unknown, &o, &[]), EXIT_USAGE);
    let syntax = write(d.path(), "c.toml", "command = \"k0\"\n[worldline\n");
    assert_eq!(call(&syntax, &o, &[]), EXIT_USAGE);
    assert_eq!(call(&d.path().join("absent.toml"), &o, &[]), EXIT_USAGE);
    assert_eq!(run(["sgqei"]), EXIT_USAGE);
    let bad_value = write(d.path(), "e.toml", "command = \"k0\"\n[worldline]\nkind = \"static\"\n[f]\nfamily = \"gaussian\"\nsigma = -1.0\n");
    assert_eq!(call(&bad_value, &o, &[]), EXIT_USAGE);
}

#[test]
fn missing_block_is_named() {
    let e = RunConfig::parse("command = \"qei\"\n[worldline]\nkind = \"static\"\n[f]\nfamily = \"bump\"\nradius = 1.0\n").unwrap_err();
    assert!(e.to_string().contains("[g]"), "{e}");
    let e = RunConfig::parse("command = \"k0\"\n\n[worldline]\nkind = \"boosted\"\n").unwrap_err();
    assert!(e.to_string().contains("line 3"), "{e}");
}

#[test]
fn identities_self_test_fails() {
    let d = tempfile::tempdir().unwrap();
    let ok = write(d.path(), "i.toml", "command = \"identities\"\n[identities]\nn_max = 10\nconfigurations = 3\n");
    assert_eq!(call(&ok, &d.path().join("o"), &[]), EXIT_OK);
    let tampered = write(d.path(), "t.toml", "command = \"identities\"\n[identities]\nn_max = 10\nconfigurations = 3\nself_test = true\n");
    assert_eq!(call(&tampered, &d.path().join("o2"), &[]), EXIT_FAIL);
}

#[test]
fn hash_tracks_overrides_but_not_threads() {
    let mut c = RunConfig::parse(K0).unwrap();
    let h = c.sha256().unwrap();
    assert_eq!(h, RunConfig::parse(K0).unwrap().sha256().unwrap());
    assert_eq!(h.len(), 64);
    c.set_seed(99);
    assert_ne!(h, c.sha256().unwrap());
    let round = RunConfig::parse(&toml::to_string(&c).unwrap()).unwrap();
    assert_eq!(round, c);

    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "k0.toml", K0);
    assert_eq!(call(&cfg, &d.path().join("a"), &["--threads", "1"]), EXIT_OK);
    assert_eq!(call(&cfg, &d.path().join("b"), &["--threads", "3"]), EXIT_OK);
    assert_eq!(std::fs::read(d.path().join("a/k0.csv")).unwrap(), std::fs::read(d.path().join("b/k0.csv")).unwrap());
}

#[test]
fn sweep_long_format() {
    let d = tempfile::tempdir().unwrap();
    let text = "command = \"sweep\"\n[worldline]\nkind = \"static\"\n[f]\nfamily = \"gaussian\"\nsigma = 1.0\n[g]\ng0 = 0.01\nsigma = [2.0, 2.0]\n[sweep]\nparameter = \"a\"\nvalues = [0.5, 1.0, 2.0]\ntarget = \"k0\"\n";
    let cfg = write(d.path(), "s.toml", text);
    assert_eq!(call(&cfg, &d.path().join("o"), &[]), EXIT_OK);
    let csv = std::fs::read_to_string(d.path().join("o/sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(2).collect();
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r.starts_with("a,")));
}
