//! Trace separatrices from every port and concave corner, and list how each ended.
//! Pass a directory to also get a VTK file of the polylines.

use quadcarve::field::{compute_cross_field, FieldConfig};
use quadcarve::singularity::detect_singularities;
use quadcarve::trace::{trace_separatrices, TraceConfig};
use quadcarve::{export, fixtures, Surface};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let surface = Surface::new(fixtures::by_name("hexagon").unwrap())?;
    let field = compute_cross_field(&surface, &FieldConfig::default())?.field;
    let sings = detect_singularities(&surface, &field)?;
    let trace = trace_separatrices(&surface, &field, &sings, &TraceConfig::default());
    for s in &trace.separatrices {
        println!(
            "sep {:>2} {:?}: {} points, length {:.3}, {:?}{}",
            s.id,
            s.origin,
            s.points.len(),
            s.length(),
            s.termination,
            if s.dropped { " (dropped)" } else { "" }
        );
    }
    println!("{} crossings, {} warnings", trace.events.len(), trace.warnings.len());
    if let Some(dir) = std::env::args().nth(1) {
        std::fs::create_dir_all(&dir)?;
        let path = std::path::Path::new(&dir).join("separatrices.vtk");
        export::write_text(&path, &export::separatrices_vtk(&trace))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
