//! Brute-force sampling of the dichotomy beta inequality and of the two
//! readings of the elementary power inequality.
//!
//! cargo run --release --example lemma_sampling

use shapeopt::functionals::{convexity_suite, lemma_beta_suite};

fn main() -> shapeopt::Result<()> {
    for (c1, c2, a1, a2) in [(1.0, 2.0, 2.0, 3.0), (0.1, 5.0, 1.2, 1.5), (0.5, 0.6, 1.01, 4.0)] {
        let s = lemma_beta_suite(c1, c2, a1, a2, 100_000, 42)?;
        println!(
            "c=({c1}, {c2}) alpha=({a1}, {a2}): beta {:.5}, {} violations, worst ratio {:.6}",
            s.beta, s.violations, s.worst_ratio
        );
    }
    let s = convexity_suite(100_000, 42);
    println!(
        "x^q - y^q >= q y^(q-1)(y - x): negative on {} of {} draws ({} with x >= y, {} draws with x < y still fine)",
        s.literal_negative, s.samples, s.literal_negative_with_x_ge_y, s.literal_nonnegative_with_x_lt_y
    );
    println!("tangent form x^q - y^q >= q y^(q-1)(x - y): {} negative draws", s.tangent_negative);
    Ok(())
}
