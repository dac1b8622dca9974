//! P1 finite elements on the unit disk: second-order convergence and
//! Richardson extrapolation against the exact values.
//!
//! cargo run --release --example disk_convergence

use std::f64::consts::PI;
use std::time::Instant;

use shapeopt::analytic::{ball_eigenvalue, BallSpec};
use shapeopt::fem::{solve_domain, solve_domain_extrapolated};
use shapeopt::geometry::StarDomain;

fn main() -> shapeopt::Result<()> {
    let disk = StarDomain::disk();
    let lam = ball_eigenvalue(&BallSpec::unit(2)?);
    let t = PI / 8.0;
    println!("{:>5} {:>8} {:>12} {:>12}", "level", "nodes", "T rel.err", "lam rel.err");
    for level in [4, 8, 16, 32, 64] {
        let r = solve_domain(&disk, level)?;
        println!("{level:>5} {:>8} {:>12.3e} {:>12.3e}", r.nodes, r.torsion / t - 1.0, r.lambda / lam - 1.0);
    }
    let start = Instant::now();
    let x = solve_domain_extrapolated(&disk, 64)?;
    println!(
        "extrapolated (64, 128): T rel.err {:.2e}, lam rel.err {:.2e}  [{:.1?}]",
        x.torsion.value / t - 1.0,
        x.lambda.value / lam - 1.0,
        start.elapsed()
    );
    Ok(())
}
