//! Torsion deficit and eigenvalue excess of single-mode perturbations of
//! the disk, and the resulting threshold estimate.
//!
//! cargo run --release --example stability_constants

use shapeopt::optimizer::{estimate_stability, sandwich_check, StabilityOptions};
use shapeopt::geometry::StarDomain;

fn main() -> shapeopt::Result<()> {
    let est = estimate_stability(&[0.005, 0.01, 0.02], &[2, 3, 4, 5, 6], 2, 1, StabilityOptions::default())?;
    for s in est.samples.iter().filter(|s| s.amplitude == 0.01 && s.phase == 0.0) {
        println!("k = {}: deficit ratio {:.5}, excess ratio {:.5}", s.mode, s.torsion_ratio, s.lambda_ratio);
    }
    for a in &est.per_amplitude {
        println!("amplitude {:.3}: C1 {:.5}  C2 {:.5}", a.amplitude, a.c1, a.c2);
    }
    println!("C1_hat {:.5}  C2_hat {:.5}  q1_hat {:.2}  valid {}", est.c1_hat, est.c2_hat, est.q1_hat, est.valid);

    let edge = StarDomain::mode(2, 0.46)?.normalize()?;
    let s = sandwich_check(&edge, 16)?;
    println!("sandwich at |phi| = {:.3}: {:.4} <= T = {:.4} <= {:.4}", s.linf, s.lower, s.torsion, s.upper);
    Ok(())
}
