//! Smooth boundary-aligned cross field on a few fixtures.
//!
//!     cargo run --release --example cross_field [fixture]

use quadcarve::field::{compute_cross_field, dirichlet_energy, FieldConfig};
use quadcarve::{fixtures, Surface};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let names: Vec<String> = match std::env::args().nth(1) {
        Some(n) => vec![n],
        None => ["square", "pentagon", "hemisphere"].map(String::from).to_vec(),
    };
    for name in names {
        let mesh = fixtures::by_name(&name).ok_or("unknown fixture")?;
        let surface = Surface::new(mesh)?;
        let res = compute_cross_field(&surface, &FieldConfig::default())?;
        let drift = res.field.u.iter().map(|u| (u.norm() - 1.0).abs()).fold(0.0, f64::max);
        println!(
            "{name:<11} n={:<5} tau={:.4e}{} delta={:.3e} energy {:.4} -> {:.4}  max ||u|-1| = {drift:.1e}",
            surface.mesh.node_count(),
            res.system.tau,
            if res.system.tau_from_fallback { " (fallback)" } else { "" },
            res.system.delta,
            dirichlet_energy(&surface, &res.initial),
            dirichlet_energy(&surface, &res.field),
        );
    }
    Ok(())
}
