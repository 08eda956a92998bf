use qhyp_core::acceptance::{angular_extremes, run_all, AcceptanceConfig};
use qhyp_core::invariants::angular_signed;
use std::io::Write;

use qhyp_core::{Quaternion, Result};

#[test]
fn acceptance() {
    let reports = run_all(&AcceptanceConfig::default());
    // straight to the handle so the lines survive test-harness capture
    let mut err = std::io::stderr().lock();
    for r in &reports {
        writeln!(err, "{}", r.line()).unwrap();
    }
    let failed: Vec<u8> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}

fn flipped(z1: &[Quaternion], z2: &[Quaternion], z3: &[Quaternion]) -> Result<f64> {
    angular_signed(z1, z2, z3, 1.0)
}

#[test]
fn sign_flip_in_angular_is_caught() {
    let cfg = AcceptanceConfig { angular: flipped, ..AcceptanceConfig::default() };
    let r = angular_extremes(&cfg);
    println!("{}", r.line());
    assert!(!r.passed);
}
