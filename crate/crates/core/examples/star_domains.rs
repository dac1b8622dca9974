//! Fourier star domains: normalization, the nearly spherical class, the
//! H^{1/2} norm and the polar mesh.
//!
//! cargo run --release --example star_domains [out.off]

use shapeopt::geometry::StarDomain;

fn main() -> shapeopt::Result<()> {
    let raw = StarDomain::new(vec![0.1, 0.05, 0.2], vec![0.0, -0.1])?;
    let dom = raw.normalize()?;
    let [mx, my] = dom.barycenter()?;
    println!("area {:.15}  barycenter ({mx:.1e}, {my:.1e})", dom.area()?);
    println!("cos {:?}\nsin {:?}", dom.cos_coeffs(), dom.sin_coeffs());
    println!("|phi|^2_H1/2 = {:.6}", dom.h_half_norm_sq());

    for amp in [0.01, 0.1, 0.4, 0.6] {
        let d = StarDomain::mode(3, amp)?.normalize()?;
        let c = d.in_class(5.0, 0.5);
        println!("mode 3, amp {amp}: linf {:.3}  C2,g surrogate {:.3}  member {}", c.linf, c.surrogate, c.member);
    }

    let mesh = dom.triangulate(8, 8)?;
    let (interior, boundary) = mesh.edge_census()?;
    println!(
        "mesh: {} nodes, {} triangles, {} boundary nodes, edges {interior}+{boundary}, h = {:.3}",
        mesh.nodes.len(),
        mesh.triangles.len(),
        mesh.boundary_count(),
        mesh.h
    );
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, mesh.to_off())?;
        println!("wrote {path}");
    }
    Ok(())
}
