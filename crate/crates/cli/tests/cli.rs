use std::path::{Path, PathBuf};
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_ballistic");

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("ballistic-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&d);
    std::fs::create_dir_all(&d).unwrap();
    d
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> (i32, String) {
    let o = Command::new(BIN)
        .arg(cmd)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap();
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn report(out: &Path, cmd: &str) -> String {
    std::fs::read_to_string(out.join(format!("{cmd}.txt"))).unwrap()
}

fn without_header(r: &str) -> String {
    r.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

fn two_atom(dir: &Path, section: &str) -> PathBuf {
    write(dir, "mu.txt", "x weight\n-1 0.5\n1 0.5\n");
    write(dir, "nu.txt", "0 0.5\n2 0.5\n");
    write(
        dir,
        "p.conf",
        &format!("[lagrangian]\nkind = quadratic\n\n[measures]\nsource = mu.txt\ntarget = nu.txt\n\n{section}\n"),
    )
}

#[test]
fn transport_two_atoms() {
    let d = scratch("transport");
    let c = two_atom(&d, "[transport]\ncost = bilinear");
    let (code, err) = run("transport", &c, &d.join("out"), &[]);
    assert_eq!(code, 0, "{err}");
    let r = report(&d.join("out"), "transport");
    assert!(r.lines().next().unwrap().starts_with("# ballistic transport report"));
    assert!(r.contains("\nvalue: -1.0\n"), "{r}");
    assert!(r.contains("result: pass"));
    let plan = std::fs::read_to_string(d.join("out/transport_plan.csv")).unwrap();
    assert_eq!(plan.lines().count(), 3);
}

#[test]
fn greatest_transport_value() {
    let d = scratch("max");
    let c = two_atom(&d, "[transport]\ndirection = max");
    let (code, _) = run("transport", &c, &d.join("out"), &[]);
    assert_eq!(code, 0);
    assert!(report(&d.join("out"), "transport").contains("\nvalue: 1.0\n"));
}

#[test]
fn dimension_mismatch_is_input_error() {
    let d = scratch("dims");
    write(&d, "mu.txt", "-1 0.5\n1 0.5\n");
    write(&d, "nu.txt", "0 0 0.5\n2 0 0.5\n");
    let c = write(&d, "p.conf", "[lagrangian]\nkind = quadratic\n[measures]\nsource = mu.txt\ntarget = nu.txt\n");
    let (code, err) = run("transport", &c, &d.join("out"), &[]);
    assert_eq!(code, 2);
    assert!(err.contains("dimension"), "{err}");
}

#[test]
fn bad_weights_are_rejected() {
    let d = scratch("weights");
    let c = two_atom(&d, "");
    write(&d, "nu.txt", "0 0.5\n2 0.4\n");
    assert_eq!(run("transport", &c, &d.join("out"), &[]).0, 2);
}

#[test]
fn unknown_key_and_missing_file() {
    let d = scratch("schema");
    let c = two_atom(&d, "[transport]\ncolour = blue");
    assert_eq!(run("transport", &c, &d.join("out"), &[]).0, 2);
    assert_eq!(run("transport", &d.join("absent.conf"), &d.join("out"), &[]).0, 2);
}

#[test]
fn interpolate_two_atoms() {
    let d = scratch("interpolate");
    let c = two_atom(&d, "[interpolate]\nwindow = -4, 4\nspacing = 0.05");
    let (code, err) = run("interpolate", &c, &d.join("out"), &[]);
    assert_eq!(code, 0, "{err}");
    let r = report(&d.join("out"), "interpolate");
    // Each certificate block lists its absolute difference.
    for line in r.lines().filter(|l| l.trim_start().starts_with("|lhs-rhs|:")) {
        let v: f64 = line.split(':').nth(1).unwrap().trim().parse().unwrap();
        assert!(v <= 1e-3, "{line}");
    }
}

#[test]
fn reverse_translation() {
    let d = scratch("reverse");
    let c = two_atom(&d, "[reverse]\nprobes = 50\nseed = 4");
    let (code, err) = run("reverse", &c, &d.join("out"), &[]);
    assert_eq!(code, 0, "{err}");
    let r = report(&d.join("out"), "reverse");
    assert!(r.contains("fixed-end value: 0.5\n"), "{r}");
}

#[test]
fn missing_seed_is_input_error() {
    let d = scratch("seed");
    let c = two_atom(&d, "[reverse]\nprobes = 10");
    let (code, err) = run("reverse", &c, &d.join("out"), &[]);
    assert_eq!(code, 2);
    assert!(err.contains("seed"), "{err}");
    assert_eq!(run("reverse", &c, &d.join("out"), &["--seed", "9"]).0, 0);
}

#[test]
fn validate_quadratic() {
    let d = scratch("validate");
    let c = two_atom(&d, "[validate]\nsamples = 300\nseed = 2");
    let (code, err) = run("validate", &c, &d.join("out"), &[]);
    assert_eq!(code, 0, "{err}");
    assert!(!report(&d.join("out"), "validate").contains("result: fail"));
}

#[test]
fn tight_tolerance_fails_certificate() {
    let d = scratch("tight");
    let c = two_atom(&d, "[interpolate]\nwindow = -4, 4\nspacing = 0.5\nvalue_tolerance = 0");
    write(&d, "nu.txt", "0.3 0.5\n2.1 0.5\n");
    let (code, _) = run("interpolate", &c, &d.join("out"), &[]);
    assert_eq!(code, 1);
    assert!(report(&d.join("out"), "interpolate").contains("result: fail"));
}

#[test]
fn reports_are_deterministic() {
    let d = scratch("determinism");
    let c = two_atom(&d, "[duality]\nspacing = 0.05\nperturbations = 5\nseed = 8");
    assert_eq!(run("duality", &c, &d.join("a"), &[]).0, 0);
    assert_eq!(run("duality", &c, &d.join("b"), &[]).0, 0);
    assert_eq!(without_header(&report(&d.join("a"), "duality")), without_header(&report(&d.join("b"), "duality")));
    let ta = std::fs::read_to_string(d.join("a/duality_perturbed.csv")).unwrap();
    let tb = std::fs::read_to_string(d.join("b/duality_perturbed.csv")).unwrap();
    assert_eq!(ta, tb);
    assert_eq!(run("duality", &c, &d.join("c"), &["--seed", "9"]).0, 0);
    let tc = std::fs::read_to_string(d.join("c/duality_perturbed.csv")).unwrap();
    assert_ne!(ta, tc);
}

#[test]
fn usage_errors_exit_two() {
    let o = Command::new(BIN).arg("transport").output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(BIN).args(["nonsense", "--config", "x"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sample_problems_pass() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("problems");
    let d = scratch("samples");
    for (cmd, file) in [
        ("transport", "transport.conf"),
        ("ballistic", "canonical.conf"),
        ("flowmap", "canonical.conf"),
        ("reverse", "reverse.conf"),
        ("transport", "planar.conf"),
    ] {
        let (code, err) = run(cmd, &dir.join(file), &d, &[]);
        assert_eq!(code, 0, "{cmd} {file}: {err}");
    }
}
