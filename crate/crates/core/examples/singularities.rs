//! Singularities and the index sum on every bundled fixture.

use quadcarve::field::{compute_cross_field, FieldConfig};
use quadcarve::singularity::detect_singularities;
use quadcarve::{fixtures, Surface};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:<11} {:>5} {:>10} {:>10} {:>4}  singularities", "fixture", "chi", "interior", "boundary", "sum");
    for name in fixtures::FIXTURE_NAMES {
        let surface = Surface::new(fixtures::by_name(name).unwrap())?;
        let field = compute_cross_field(&surface, &FieldConfig::default())?.field;
        let sings = detect_singularities(&surface, &field)?;
        let inner: i32 = sings.iter().map(|s| s.d).sum();
        let bnd = surface.boundary.quarter_sum();
        let list: Vec<String> = sings.iter().map(|s| format!("{:+}/4 @ ({:.2}, {:.2})", s.d, s.location[0], s.location[1])).collect();
        println!(
            "{name:<11} {:>5} {:>10} {:>10} {:>4}  {}",
            surface.mesh.euler_characteristic(),
            format!("{inner}/4"),
            format!("{bnd}/4"),
            (inner + bnd) / 4,
            list.join(", ")
        );
    }
    Ok(())
}
