//! Potential measures V dx on a box: torsion, eigenvalue, the derivative
//! formulas along (1 - eps) V, the L-infinity bounds and gamma-distances.
//!
//! cargo run --release --example capacitary_measures

use shapeopt::capacitary::{
    derivative_check_lambda, derivative_check_torsion, gamma_distance, linfty_bounds_check, reference_suite,
    solve_measure, PotentialMeasure,
};

fn main() -> shapeopt::Result<()> {
    for (name, m) in reference_suite(63)? {
        let r = solve_measure(&m)?;
        let dt = derivative_check_torsion(&m, 1e-3)?;
        let dl = derivative_check_lambda(&m, 1e-3)?;
        let b = linfty_bounds_check(&r);
        println!(
            "{name:>13}: T {:.4e}  lam {:8.3}  |A| {:.3}  F1 {:.4}  dT err {:.1e}  dlam err {:.1e}  sup u {:.3} <= {:.3}",
            r.torsion,
            r.lambda,
            r.a_mu_volume,
            r.f_q(1.0),
            dt.rel_err,
            dl.rel_err,
            b.sup_u,
            b.davies_bound
        );
    }

    let limit = PotentialMeasure::disk_penalty(2, 0.5, 63, 0.4, 1e6)?;
    for v0 in [1e2, 1e3, 1e4, 1e5] {
        let m = PotentialMeasure::disk_penalty(2, 0.5, 63, 0.4, v0)?;
        println!("d_gamma(V0 = {v0:.0e}, V0 = 1e6) = {:.3e}", gamma_distance(&m, &limit)?);
    }
    Ok(())
}
