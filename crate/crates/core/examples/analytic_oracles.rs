//! Closed-form and series values: balls, boxes, the thin slab.
//!
//! cargo run --release --example analytic_oracles

use shapeopt::analytic::{
    ball_eigenvalue, ball_f1_bound, ball_torsion, bessel_first_zero, box_eigenvalue, box_torsion, slab_f1, slab_f1_limit,
    BallSpec, BoxSpec,
};

fn main() -> shapeopt::Result<()> {
    println!("j_0,1 = {:.15}", bessel_first_zero(0.0));
    for d in 2..=5 {
        let b = BallSpec::unit(d)?;
        let bound = ball_f1_bound(d)?;
        println!(
            "d={d}: T(B1) = {:.6e}  lambda(B1) = {:.6}  F1 = {:.6} <= {:.6}",
            ball_torsion(&b),
            ball_eigenvalue(&b),
            bound.f1,
            bound.bound
        );
    }

    let square = BoxSpec::new(vec![1.0, 1.0])?;
    let t = box_torsion(&square, 199)?;
    println!("unit square: T = {:.10} (tail <= {:.1e}), lambda = {:.10}", t.value, t.tail_bound, box_eigenvalue(&square));

    println!("slab limit pi^2/12 = {:.6}", slab_f1_limit());
    for eps in [0.2, 0.1, 0.05, 0.02, 0.01] {
        let f = slab_f1(eps)?;
        println!("  eps = {eps:<5} F1 = {f:.6}  rel. gap {:.2e}", 1.0 - f / slab_f1_limit());
    }
    Ok(())
}
