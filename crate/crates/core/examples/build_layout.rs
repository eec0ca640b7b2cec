//! Turn traced separatrices into a T-layout and inspect its faces.

use quadcarve::build::build_layout;
use quadcarve::field::{compute_cross_field, FieldConfig};
use quadcarve::singularity::detect_singularities;
use quadcarve::trace::{trace_separatrices, TraceConfig};
use quadcarve::{fixtures, Surface};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "l_shape".into());
    let surface = Surface::new(fixtures::by_name(&name).ok_or("unknown fixture")?)?;
    let field = compute_cross_field(&surface, &FieldConfig::default())?.field;
    let sings = detect_singularities(&surface, &field)?;
    let trace = trace_separatrices(&surface, &field, &sings, &TraceConfig::default());
    let layout = build_layout(&surface, &sings, &trace);
    layout.validate()?;

    println!("{name}: {} nodes, {} edges, {} faces", layout.live_nodes().count(), layout.live_edges().count(), layout.component_count());
    for (kind, n) in layout.kind_counts() {
        println!("  {kind:?}: {n}");
    }
    for f in layout.interior_faces() {
        let sides = f.sides.as_ref().unwrap();
        let lens: Vec<String> = sides.iter().map(|s| format!("{:.3}", layout.side_length(s))).collect();
        println!("  face {}: side edges {:?}, lengths [{}]", f.id, sides.iter().map(Vec::len).collect::<Vec<_>>(), lens.join(", "));
    }
    Ok(())
}
