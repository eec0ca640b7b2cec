//! Closed-form streamlines around a singularity: each arc is a hyperbola
//! `x y = A` after the conformal map, so no step size is involved.

use num_complex::Complex64 as C;
use quadcarve::hyperbola::{ray_angles, SectorModel};

fn main() {
    let rays = ray_angles(8);
    for d in [-2, -1, 1] {
        let m = SectorModel::new(d);
        println!("d = {d:+}: {} ports, exponent {:.3}", m.sector_count(), m.exponent());
        for k in 0..m.sector_count() {
            let theta = (k as f64 + 0.3) * m.sector_width();
            let z = C::from_polar(0.5, theta);
            let f = m.entry_frame(z).unwrap();
            let arc = m.arc(z, f.sector, true, &rays, |p| p.norm() < 1.0);
            let exit = arc.points.last().unwrap().1;
            println!(
                "  enter {:>6.3} rad at r=0.5 -> leave at angle {:>6.3} r={:.3} (A = {:.4}, {} ray samples)",
                theta,
                exit.arg(),
                exit.norm(),
                arc.a,
                arc.points.len()
            );
        }
    }
}
