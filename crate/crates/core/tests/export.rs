mod common;

use common::fixture_run;
use quadcarve::export::{self, layout_svg, layout_vtk, vtk_polylines};
use quadcarve::pipeline::{write_artifacts, Emit};

fn header_count(vtk: &str, key: &str) -> usize {
    let line = vtk.lines().find(|l| l.starts_with(key)).unwrap();
    line.split_whitespace().nth(1).unwrap().parse().unwrap()
}

#[test]
fn vtk_counts_match_polylines() {
    let polys = vec![vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]], vec![[0.0, 1.0, 0.0], [1.0, 1.0, 0.0], [2.0, 1.5, 0.25]]];
    let s = vtk_polylines("t", &polys);
    assert_eq!(header_count(&s, "POINTS"), 5);
    assert_eq!(header_count(&s, "LINES"), 2);
    assert!(s.contains("LINES 2 7\n2 0 1\n3 2 3 4\n"));
    assert!(s.contains("2 1.5 0.25\n"));

    let empty = vtk_polylines("t", &[]);
    assert!(empty.contains("POINTS 0 double\nLINES 0 0\n"));
}

#[test]
fn layout_vtk_has_one_line_per_edge() {
    let out = fixture_run("annulus");
    for l in [&out.initial, &out.layout] {
        let s = layout_vtk(l);
        assert_eq!(header_count(&s, "LINES"), l.live_edges().count());
        let pts: usize = l.live_edges().map(|e| e.polyline.len()).sum();
        assert_eq!(header_count(&s, "POINTS"), pts);
    }
    let s = export::separatrices_vtk(&out.trace);
    assert_eq!(header_count(&s, "LINES"), out.report.separatrices);
}

#[test]
fn svg_paths_and_markers() {
    let square = layout_svg(&fixture_run("square").initial).unwrap();
    assert_eq!(square.matches(r#"class="boundary""#).count(), 4);
    assert_eq!(square.matches(r#"class="separatrix""#).count(), 0);
    assert_eq!(square.matches("<circle").count(), 0);

    let pentagon = layout_svg(&fixture_run("pentagon").initial).unwrap();
    assert_eq!(pentagon.matches(r#"class="singularity""#).count(), 1);
    assert_eq!(pentagon.matches(r#"class="separatrix""#).count(), 5);
    assert!(pentagon.contains("#d1261f"));

    let triangle = layout_svg(&fixture_run("triangle").initial).unwrap();
    assert!(triangle.contains("#1f4fd1"));
}

#[test]
fn svg_refuses_curved_layouts() {
    let err = layout_svg(&fixture_run("hemisphere").initial).unwrap_err();
    assert!(err.to_string().contains("not planar"));
}

#[test]
fn json_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = fixture_run("hexagon");
    let path = dir.path().join("h.json");
    export::write_text(&path, &export::layout_json(&out.layout)).unwrap();
    let back = export::read_layout_json(&path).unwrap();
    back.validate().unwrap();
    assert_eq!(export::layout_json(&back), export::layout_json(&out.layout));
}

#[test]
fn report_csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let reports: Vec<_> = ["l_shape", "annulus", "hexagon"].into_iter().map(|n| fixture_run(n).report).collect();
    let path = dir.path().join("report.csv");
    let text = export::reports_csv(&reports);
    assert_eq!(text.lines().count(), 4);
    assert!(text.starts_with("model,n,field_s,tracing_s,simplification_s,components_before,components_after"));
    export::write_text(&path, &text).unwrap();
    let back = export::read_reports_csv(&path).unwrap();
    assert_eq!(back.len(), 3);
    for (a, b) in back.iter().zip(&reports) {
        assert_eq!(a.model, b.model);
        assert_eq!(a.components_before, b.components_before);
        assert!(a.components_after <= a.components_before);
        assert!(a.simplification_ok);
    }
}

#[test]
fn singularity_and_theta_csv() {
    let out = fixture_run("hexagon");
    let s = export::singularities_csv(&out.singularities);
    assert_eq!(s.lines().count(), 3);
    assert!(s.lines().skip(1).all(|l| l.split(',').nth(2) == Some("-1")));
    let t = export::theta_csv(&out.surface, &out.field.field);
    assert_eq!(t.lines().count(), out.surface.mesh.node_count() + 1);
}

#[test]
fn artifacts_follow_emit_flags() {
    let dir = tempfile::tempdir().unwrap();
    let out = fixture_run("l_shape");
    write_artifacts(dir.path(), &out, Emit::parse("json,svg").unwrap()).unwrap();
    let mut names: Vec<String> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    assert_eq!(names, ["l_shape.collapses.jsonl", "l_shape.initial.json", "l_shape.initial.svg", "l_shape.layout.json", "l_shape.layout.svg"]);
    let log = std::fs::read_to_string(dir.path().join("l_shape.collapses.jsonl")).unwrap();
    assert_eq!(log.lines().count(), out.log.len());
}
