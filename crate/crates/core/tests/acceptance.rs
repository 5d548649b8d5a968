//! Full acceptance run: one line per criterion, everything must pass.

use std::path::PathBuf;

use hecke_core::acceptance::run_all;

#[test]
fn acceptance_criteria() {
    let cache: PathBuf = std::env::var_os("HECKE_CACHE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("hecke-shell-cache"));
    let results = run_all(false, Some(&cache));
    let mut ok = true;
    for r in &results {
        println!(
            "criterion {:2}  {:<32} {}  {}",
            r.id,
            r.name,
            if r.passed { "PASS" } else { "FAIL" },
            r.detail
        );
        ok &= r.passed;
    }
    assert!(ok, "at least one acceptance criterion failed");
}
