//! Full run on one mesh with every export enabled.
//!
//!     cargo run --release --example pipeline -- fixture:hexagon /tmp/out
//!     cargo run --release --example pipeline -- path/to/mesh.obj /tmp/out

use quadcarve::pipeline::{format_table, load_input, run_mesh, write_artifacts, Emit, PipelineConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let input = args.next().unwrap_or_else(|| "fixture:hexagon".into());
    let out_dir = args.next().map(std::path::PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("quadcarve-example"));

    let cfg = PipelineConfig::new(&input);
    let mesh = load_input(&cfg.input)?;
    let out = run_mesh(&cfg.model_name(), mesh, &cfg).map_err(|f| f.error)?;
    write_artifacts(&out_dir, &out, Emit { json: true, vtk: true, svg: true, csv: true })?;

    print!("{}", format_table(std::slice::from_ref(&out.report)));
    for r in &out.rejected {
        println!("rolled back chord {} at step {}: {}", r.chord, r.step, r.reason);
    }
    println!("artifacts in {}", out_dir.display());
    Ok(())
}
