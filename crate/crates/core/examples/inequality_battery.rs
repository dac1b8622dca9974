//! F_q and the Polya, Saint-Venant, Faber-Krahn and Kohler-Jobin checks on
//! seeded random domains, compared against the disk on the same mesh.
//!
//! cargo run --release --example inequality_battery

use shapeopt::fem::solve_domain;
use shapeopt::functionals::{f_q_against, kohler_jobin_exponent, BallReference, CheckKind, Tolerances};
use shapeopt::geometry::StarDomain;

const LEVEL: usize = 12;

fn main() -> shapeopt::Result<()> {
    let d = solve_domain(&StarDomain::disk(), LEVEL)?;
    let ball = BallReference { dim: 2, torsion: d.torsion, lambda: d.lambda, volume: d.mesh_area };
    let q = kohler_jobin_exponent(2);
    println!("{:>4} {:>9} {:>10} {:>10} {:>10} {:>10}", "seed", "F_1", "polya", "s-venant", "f-krahn", "k-jobin");
    for seed in 0..10 {
        let dom = StarDomain::random(6, 0.1, seed)?;
        let r = solve_domain(&dom, LEVEL)?;
        let rep = f_q_against(r.torsion, r.lambda, r.mesh_area, q, &ball, Tolerances::default())?;
        let m = |k| rep.check(k).map_or(f64::NAN, |c| c.margin);
        println!(
            "{seed:>4} {:>9.5} {:>10.3e} {:>10.3e} {:>10.3e} {:>10.3e}",
            rep.polya_quotient(),
            m(CheckKind::Polya),
            m(CheckKind::SaintVenant),
            m(CheckKind::FaberKrahn),
            m(CheckKind::KohlerJobin)
        );
    }
    Ok(())
}
