//! Layout, polyline and report writers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::PipelineError;
use crate::field::CrossField;
use crate::layout::{Layout, LayoutJson};
use crate::mesh::Surface;
use crate::simplify::CollapseRecord;
use crate::singularity::Singularity;
use crate::trace::TraceResult;

fn io(path: &Path, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Export(format!("{}: {e}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), PipelineError> {
    fs::write(path, text).map_err(|e| io(path, e))
}

/// Canonical JSON. Ids are compacted, so equal layouts give equal bytes.
pub fn layout_json(l: &Layout) -> String {
    let mut s = serde_json::to_string_pretty(&l.to_json()).expect("layout serializes");
    s.push('\n');
    s
}

pub fn read_layout_json(path: &Path) -> Result<Layout, PipelineError> {
    let src = fs::read_to_string(path).map_err(|e| io(path, e))?;
    let j: LayoutJson = serde_json::from_str(&src).map_err(|e| io(path, e))?;
    Ok(Layout::from_json(&j))
}

/// Legacy ASCII VTK polydata, one line cell per polyline.
pub fn vtk_polylines(title: &str, polys: &[Vec<[f64; 3]>]) -> String {
    let npts: usize = polys.iter().map(Vec::len).sum();
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET POLYDATA\nPOINTS {npts} double");
    for p in polys.iter().flatten() {
        let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
    }
    let _ = writeln!(s, "LINES {} {}", polys.len(), npts + polys.len());
    let mut k = 0;
    for p in polys {
        let ids: Vec<String> = (k..k + p.len()).map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{} {}", p.len(), ids.join(" "));
        k += p.len();
    }
    s
}

pub fn layout_vtk(l: &Layout) -> String {
    let polys: Vec<Vec<[f64; 3]>> = l.live_edges().map(|e| e.polyline.clone()).collect();
    vtk_polylines("quadcarve layout", &polys)
}

pub fn separatrices_vtk(trace: &TraceResult) -> String {
    let polys: Vec<Vec<[f64; 3]>> = trace.separatrices.iter().filter(|s| !s.dropped).map(|s| s.positions()).collect();
    vtk_polylines("quadcarve separatrices", &polys)
}

/// Top view of a planar layout. Positive singularities are blue, negative red.
pub fn layout_svg(l: &Layout) -> Result<String, PipelineError> {
    let pts: Vec<[f64; 3]> = l.live_edges().flat_map(|e| e.polyline.iter().copied()).collect();
    if pts.is_empty() {
        return Err(PipelineError::Export("empty layout".into()));
    }
    let zbar = pts.iter().map(|p| p[2]).sum::<f64>() / pts.len() as f64;
    let (mut lo, mut hi) = ([f64::INFINITY; 3], [f64::NEG_INFINITY; 3]);
    for p in &pts {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let diam = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2) + (hi[2] - lo[2]).powi(2)).sqrt();
    let dev = pts.iter().map(|p| (p[2] - zbar).abs()).fold(0.0, f64::max);
    if dev >= 1e-6 * diam {
        return Err(PipelineError::Export(format!(
            "layout is not planar (|z - mean| up to {dev:.3e}); use the VTK export instead"
        )));
    }
    let size = 800.0;
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let k = size / span;
    let margin = 20.0;
    let map = |p: [f64; 3]| (margin + (p[0] - lo[0]) * k, margin + (hi[1] - p[1]) * k);
    let (w, h) = ((hi[0] - lo[0]) * k + 2.0 * margin, (hi[1] - lo[1]) * k + 2.0 * margin);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for e in l.live_edges() {
        let d: Vec<String> = e
            .polyline
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let (x, y) = map(p);
                format!("{}{x:.3},{y:.3}", if i == 0 { "M" } else { "L" })
            })
            .collect();
        let (class, style) = if e.boundary { ("boundary", "#000000\" stroke-width=\"2") } else { ("separatrix", "#2a6f97\" stroke-width=\"1.2") };
        let _ = writeln!(s, r#"<path class="{class}" d="{}" fill="none" stroke="{style}"/>"#, d.join(" "));
    }
    for n in l.live_nodes() {
        let Some(id) = n.singularity else { continue };
        let (x, y) = map(n.xyz);
        let color = if n.quarters > 0 { "#1f4fd1" } else { "#d1261f" };
        let _ = writeln!(s, r#"<circle class="singularity" data-id="{id}" cx="{x:.3}" cy="{y:.3}" r="5" fill="{color}"/>"#);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn collapse_log_jsonl(log: &[CollapseRecord]) -> String {
    log.iter().map(|r| serde_json::to_string(r).expect("record serializes") + "\n").collect()
}

fn csv_string<T: serde::Serialize>(rows: &[T]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("row serializes");
    }
    String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf8 csv")
}

#[derive(serde::Serialize)]
struct ThetaRow {
    node: usize,
    x: f64,
    y: f64,
    z: f64,
    theta: f64,
}

pub fn theta_csv(surface: &Surface, field: &CrossField) -> String {
    let rows: Vec<ThetaRow> = field
        .theta()
        .into_iter()
        .enumerate()
        .map(|(i, theta)| {
            let p = surface.mesh.positions[i];
            ThetaRow { node: i, x: p.x, y: p.y, z: p.z, theta }
        })
        .collect();
    csv_string(&rows)
}

#[derive(serde::Serialize)]
struct SingularityRow {
    id: usize,
    triangle: usize,
    d: i32,
    index: f64,
    x: f64,
    y: f64,
    z: f64,
    ports: usize,
}

pub fn singularities_csv(sings: &[Singularity]) -> String {
    let rows: Vec<SingularityRow> = sings
        .iter()
        .map(|s| SingularityRow {
            id: s.id,
            triangle: s.triangle,
            d: s.d,
            index: s.index(),
            x: s.location[0],
            y: s.location[1],
            z: s.location[2],
            ports: s.port_count(),
        })
        .collect();
    csv_string(&rows)
}

pub fn reports_csv(reports: &[crate::pipeline::RunReport]) -> String {
    csv_string(reports)
}

pub fn read_reports_csv(path: &Path) -> Result<Vec<crate::pipeline::RunReport>, PipelineError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io(path, e))?;
    r.deserialize().collect::<Result<_, _>>().map_err(|e| io(path, e))
}
