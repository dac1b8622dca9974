//! Best-found F_q relative to the disk over a range of exponents, as CSV.
//!
//! cargo run --release --example q_sweep

use shapeopt::optimizer::{q_sweep, sweep_table, OptimizerConfig, Start};

fn main() -> shapeopt::Result<()> {
    let cfg = OptimizerConfig { modes: 4, max_evals: 60, mesh_level: 8, start: Start::Elongation(0.3), ..Default::default() };
    let rows = q_sweep(&[1.0, 1.05, 1.2, 1.5, 2.0, 4.0, 8.0], &cfg)?;
    print!("{}", sweep_table(&rows).render());
    Ok(())
}
