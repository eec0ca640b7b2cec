//! Summary table over all bundled fixtures, plus the same rows as CSV.

use quadcarve::pipeline::{format_table, run_mesh, PipelineConfig};
use quadcarve::{export, fixtures};

fn main() {
    let mut rows = Vec::new();
    for name in fixtures::FIXTURE_NAMES.iter().copied().chain(["large"]) {
        let cfg = PipelineConfig::new(format!("fixture:{name}"));
        match run_mesh(name, fixtures::by_name(name).unwrap(), &cfg) {
            Ok(out) => rows.push(out.report),
            Err(f) => eprintln!("{name}: {}", f.error),
        }
    }
    print!("{}", format_table(&rows));
    println!();
    print!("{}", export::reports_csv(&rows));
}
