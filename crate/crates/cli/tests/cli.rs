//! Black-box tests of the `hecke` binary: exit codes, determinism, and
//! the wiring of each subcommand.

use std::path::Path;
use std::process::{Command, Output};

use hecke_core::exact::Scalar;
use hecke_core::fourier::{parse_qexp, write_qexp, HalfIntMat, Mode, QExpansion};

fn hecke(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hecke"))
        .args(args)
        .current_dir(dir)
        .env_remove("HECKE_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf8")
}

#[test]
fn cosets_classical_prints_three_representatives() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hecke(tmp.path(), &["cosets", "-n", "1", "-p", "2", "-d", "1", "-N", "1"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 4);
    assert!(text.ends_with("representatives: 3\n"));
}

#[test]
fn seed_changes_no_output_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let base = ["cosets", "-n", "2", "-p", "2", "-d", "1", "-N", "1"];
    let a = hecke(tmp.path(), &[&base[..], &["--seed", "0"]].concat());
    let b = hecke(tmp.path(), &[&base[..], &["--seed", "12345"]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).ends_with("representatives: 15\n"));
}

#[test]
fn certify_fixture_reports_the_charpoly() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hecke(tmp.path(), &["certify", "--fixture", "weight-twelve"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("INTEGRAL: yes"));
    assert!(text.contains("-49176"));
    assert!(text.contains("-2025"));
}

#[test]
fn corpus_apply_roundtrip_is_an_eigenvalue() {
    let tmp = tempfile::tempdir().unwrap();
    let f_path = tmp.path().join("e4.qexp");
    let g_path = tmp.path().join("e4_t2.qexp");
    let out = hecke(
        tmp.path(),
        &["corpus", "--form", "eisenstein", "--k", "4", "--theta", "12", "--output",
          f_path.to_str().unwrap()],
    );
    assert!(out.status.success());
    let out = hecke(
        tmp.path(),
        &["apply", "--input", f_path.to_str().unwrap(), "--op", "tp", "--p", "2",
          "--theta", "6", "--output", g_path.to_str().unwrap()],
    );
    assert!(out.status.success());
    let f = parse_qexp(&std::fs::read_to_string(&f_path).unwrap()).unwrap();
    let g = parse_qexp(&std::fs::read_to_string(&g_path).unwrap()).unwrap();
    for m in 0..=6 {
        let t = HalfIntMat::scalar(m);
        let fv = f.coeff(&t).unwrap()[0].as_rat().unwrap();
        let gv = g.coeff(&t).unwrap()[0].as_rat().unwrap();
        assert_eq!(gv.clone(), fv * hecke_core::exact::Rat::from_integer(9.into()));
    }
}

#[test]
fn apply_output_is_byte_deterministic_across_seeds() {
    let tmp = tempfile::tempdir().unwrap();
    let f_path = tmp.path().join("d.qexp");
    hecke(
        tmp.path(),
        &["corpus", "--form", "delta", "--theta", "12", "--output", f_path.to_str().unwrap()],
    );
    let base = ["apply", "--input", f_path.to_str().unwrap(), "--op", "tp", "--p", "3",
                "--theta", "4"];
    let a = hecke(tmp.path(), &[&base[..], &["--seed", "1"]].concat());
    let b = hecke(tmp.path(), &[&base[..], &["--seed", "99"]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn invalid_config_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    // non-square matrix
    let out = hecke(tmp.path(), &["gauss", "--g", "1,2,3", "--d", "1"]);
    assert_eq!(out.status.code(), Some(1));
    // unknown flag
    let out = hecke(tmp.path(), &["cosets", "-n", "1", "-p", "2", "--bogus"]);
    assert_eq!(out.status.code(), Some(1));
    // unknown corpus form
    let out = hecke(tmp.path(), &["corpus", "--form", "igusa", "--theta", "4"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn resource_cap_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hecke(tmp.path(), &["cosets", "-n", "5", "-p", "2"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verification_failure_exits_two() {
    // a one-element "basis" the operator does not stabilize
    let tmp = tempfile::tempdir().unwrap();
    let mut f = QExpansion::scalar_level_one(1, 4, Mode::Explicit).unwrap();
    for m in 0..=2i64 {
        f.set_scalar_coeff(HalfIntMat::scalar(m), if m < 2 { 1 } else { 0 }).unwrap();
    }
    let path = tmp.path().join("broken.qexp");
    std::fs::write(&path, write_qexp(&f)).unwrap();
    let out = hecke(tmp.path(), &["certify", path.to_str().unwrap(), "--p", "2", "--theta", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gauss_subcommand_prints_the_value() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hecke(tmp.path(), &["gauss", "--g", "2", "--d", "2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("value: "));
    assert!(text.contains("snf divisors: "));
}

#[test]
fn hilbert_primes_and_commute() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hecke(tmp.path(), &["hilbert", "primes", "--d", "5", "--p", "11"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 2);

    // coefficient file over Q: C(m) = m, targets up to norm 6
    let mut lines = vec!["HILB 1".into(), "d=1 k0=4 chi=1".into()];
    for m in 1..=36 {
        lines.push(format!("{m} 0 1 : {m}"));
    }
    let path = tmp.path().join("c.hilb");
    std::fs::write(&path, lines.join("\n") + "\n").unwrap();
    let out = hecke(
        tmp.path(),
        &["hilbert", "commute", "--input", path.to_str().unwrap(), "--p", "2,0,1",
          "--q", "3,0,1", "--max-norm", "6"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).starts_with("commute: yes"));

    let out = hecke(
        tmp.path(),
        &["hilbert", "apply", "--input", path.to_str().unwrap(), "--prime", "2,0,1",
          "--max-norm", "3"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    // C'(m) = C(2m) + 8 C(m/2): m=1 -> 2, m=2 -> 4 + 8 = 12, m=3 -> 6
    let text = stdout(&out);
    assert!(text.contains("1 0 1 : 2"));
    assert!(text.contains("2 0 1 : 12"));
    assert!(text.contains("3 0 1 : 6"));
}

#[test]
fn bounds_subcommand_is_clean() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hecke(
        tmp.path(),
        &["bounds", "--n-max", "4", "--k-max", "8", "--count-roots", "2,1"],
    );
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("violations: none"));
    assert!(text.contains("#E(2,1) = 5"));
}

#[test]
fn verify_all_fast_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cache = tmp.path().join("cache");
    let out = hecke(
        tmp.path(),
        &["verify-all", "--fast", "--cache-dir", cache.to_str().unwrap()],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.matches("PASS").count(), 10);
    assert!(text.contains("all 10 criteria pass"));
}

#[test]
fn qexp_output_roundtrips_bit_exact() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("t1.qexp");
    let out = hecke(
        tmp.path(),
        &["corpus", "--form", "theta", "--degree", "1", "--theta", "6", "--output",
          path.to_str().unwrap(), "--cache-dir", tmp.path().join("cache").to_str().unwrap()],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&path).unwrap();
    let f = parse_qexp(&text).unwrap();
    assert_eq!(write_qexp(&f), text);
    let one = f.coeff(&HalfIntMat::scalar(1)).unwrap();
    assert!(matches!(&one[0], Scalar::Rat(r) if *r == hecke_core::exact::Rat::from_integer(240.into())));
}
