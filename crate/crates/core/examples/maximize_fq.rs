//! Nelder-Mead search for large F_q: near q = 1 elongated shapes beat the
//! disk, for large q the disk wins on the nearly spherical class.
//!
//! cargo run --release --example maximize_fq [trace.csv]

use shapeopt::optimizer::{maximize_fq, OptimizerConfig, Start};

fn main() -> shapeopt::Result<()> {
    let near_one = OptimizerConfig {
        q: 1.01,
        modes: 6,
        max_evals: 150,
        mesh_level: 12,
        start: Start::Elongation(0.3),
        ..Default::default()
    };
    let r = maximize_fq(&near_one)?;
    println!(
        "q = 1.01: best {:.6} vs disk {:.6} after {} evaluations; a2 = {:.3}",
        r.best_f_q, r.ball_f_q, r.evals, r.best_params[0]
    );
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, r.trace_csv())?;
    }

    let large = OptimizerConfig {
        q: 60.0,
        max_evals: 100,
        mesh_level: 12,
        start: Start::Random(0.05),
        linf_bound: Some(0.5),
        seed: 3,
        ..near_one
    };
    let r = maximize_fq(&large)?;
    println!("q = 60: best/disk - 1 = {:.2e}", r.excess());
    Ok(())
}
