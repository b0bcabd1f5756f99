use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use formal_groupoid::cli::{ChartConfig, Report};
use formal_groupoid::report::Status;

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs")
}

fn fgk(args: &[&str], seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fgk"));
    cmd.args(args).env_remove("FGK_SEED");
    if let Some(s) = seed {
        cmd.env("FGK_SEED", s);
    }
    cmd.output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn report(o: &Output) -> Report {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn write_config(dir: &Path, name: &str, config: &ChartConfig) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, config.to_json()).unwrap();
    p
}

#[test]
fn kp_check_commands() {
    let o = fgk(&["kp-check", "--config", path(&configs().join("curved1.json"))], None);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    assert_eq!(r.command, "kp-check");
    assert_eq!(r.checks.len(), 1);
    assert_eq!(r.checks[0].status, Status::Pass);

    let o = fgk(&["kp-check", "--config", path(&configs().join("kp_violator.json"))], None);
    assert_eq!(o.status.code(), Some(1));
    let r = report(&o);
    assert_eq!(r.checks[0].residual, "1");
    assert!(r.checks[0].witness.contains("l=1, n=2, m=1"));

    let o = fgk(&["kp-check", "--config", path(&configs().join("plane.json"))], None);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(report(&o).checks[0].name, "poisson.jacobi");
}

#[test]
fn solve_f_prints_components() {
    let o = fgk(&["solve-f", "--config", path(&configs().join("curved1.json"))], None);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    let h = r.hamiltonian.clone().expect("components");
    assert_eq!(h.iter().map(|c| c.degree).collect::<Vec<_>>(), [2, 3, 4]);
    assert_eq!(h[0].value, "(1 + z1*w1)*zeta1*zetab1");
    assert_eq!(h[1].value, "0");
    assert_eq!(h[2].value, "(-1/12 - 1/12*z1*w1)*zeta1^2*zetab1^2");
    for name in ["groupoid.hamiltonian_parity", "groupoid.q_conjugates_dual_source", "groupoid.permutation_invariance"] {
        assert_eq!(r.check(name).unwrap().status, Status::Pass, "{name}");
    }
}

#[test]
fn star_checks_skip_without_nu() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ChartConfig::flat(1);
    c.nu_truncation = 0;
    c.trials = 2;
    let p = write_config(dir.path(), "c.json", &c);
    let o = fgk(&["verify", "--config", path(&p)], None);
    assert_eq!(o.status.code(), Some(0));
    let r = report(&o);
    let star: Vec<_> = r.checks.iter().filter(|c| c.name.starts_with("star.")).collect();
    assert!(!star.is_empty());
    assert!(star.iter().all(|c| c.status == Status::Skipped));
    assert!(r.checks.iter().filter(|c| !c.name.starts_with("star.")).all(|c| c.status == Status::Pass));
    assert_eq!(r.summary.skipped, star.len());
}

#[test]
fn seed_override_and_timing() {
    let cfg = configs().join("flat1.json");
    let o = fgk(&["kp-check", "--config", path(&cfg)], Some("123"));
    assert_eq!(report(&o).config.rng_seed, 123);
    let o = fgk(&["kp-check", "--config", path(&cfg)], Some("not-a-number"));
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FGK_SEED"));

    let plain = fgk(&["kp-check", "--config", path(&cfg)], None);
    assert!(report(&plain).wall_time_ms.is_none());
    let timed = fgk(&["--timing", "kp-check", "--config", path(&cfg)], None);
    assert!(report(&timed).wall_time_ms.is_some());
}

#[test]
fn env_seed_matches_config_seed() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ChartConfig::flat(1);
    c.nu_truncation = 0;
    c.trials = 2;
    let p = write_config(dir.path(), "c.json", &c);
    let a = fgk(&["solve-f", "--config", path(&p)], Some("5"));
    let b = fgk(&["solve-f", "--config", path(&p)], Some("5"));
    assert_eq!(a.stdout, b.stdout);
    c.rng_seed = 5;
    let p5 = write_config(dir.path(), "c5.json", &c);
    let d = fgk(&["solve-f", "--config", path(&p5)], None);
    assert_eq!(a.stdout, d.stdout);
}

#[test]
fn extend_family_commands() {
    let plane = configs().join("plane.json");
    let o = fgk(&["extend-family", "--config", path(&plane), "--family", path(&configs().join("jacobi_family.json"))], None);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&o);
    let fam = r.family.clone().expect("extended table");
    assert_eq!(fam.operators.len(), 3);
    assert!(fam.operators[2].iter().all(|t| t.derivatives.len() == 2));
    for name in ["family.extended.property_a", "family.extended.property_b"] {
        let c = r.check(name).unwrap();
        assert_eq!(c.status, Status::Pass);
        assert!(c.witness.ends_with(" instances"), "{}", c.witness);
    }

    let o = fgk(&["extend-family", "--config", path(&plane), "--family", path(&configs().join("zero_family.json"))], None);
    assert_eq!(o.status.code(), Some(0));
    assert!(report(&o).family.unwrap().operators[2].is_empty());

    let o = fgk(
        &["extend-family", "--config", path(&plane), "--family", path(&configs().join("property_b_violation.json"))],
        None,
    );
    assert_eq!(o.status.code(), Some(1));
    let r = report(&o);
    let c = r.check("family.input_coherence").unwrap();
    assert_eq!(c.status, Status::Fail);
    assert!(c.witness.contains("witness (x2, x1)"), "{}", c.witness);
    assert!(r.family.is_none());

    let o = fgk(
        &["extend-family", "--config", path(&configs().join("flat1.json")), "--family", path(&configs().join("zero_family.json"))],
        None,
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(fgk(&["verify", "--config", path(&missing)], None).status.code(), Some(2));

    let mut c = ChartConfig::flat(2);
    c.tensor[1].pop();
    let p = write_config(dir.path(), "shape.json", &c);
    assert_eq!(fgk(&["kp-check", "--config", path(&p)], None).status.code(), Some(2));

    let mut c = ChartConfig::flat(1);
    c.fiber_truncation = 1;
    let p = write_config(dir.path(), "short.json", &c);
    assert_eq!(fgk(&["solve-f", "--config", path(&p)], None).status.code(), Some(2));

    let p = dir.path().join("junk.json");
    std::fs::write(&p, "not json").unwrap();
    assert_eq!(fgk(&["kp-check", "--config", path(&p)], None).status.code(), Some(2));

    assert_eq!(fgk(&["frobnicate"], None).status.code(), Some(2));
    assert_eq!(fgk(&["--help"], None).status.code(), Some(0));
}

#[test]
fn report_echoes_config() {
    let cfg = configs().join("flat2.json");
    let text = std::fs::read_to_string(&cfg).unwrap();
    let o = fgk(&["kp-check", "--config", path(&cfg)], None);
    assert_eq!(report(&o).config, ChartConfig::parse(&text).unwrap());
}
