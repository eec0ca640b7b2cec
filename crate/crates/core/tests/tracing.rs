mod common;

use quadcarve::field::{compute_cross_field, FieldConfig};
use quadcarve::singularity::detect_singularities;
use quadcarve::trace::{trace_separatrices, Termination, TraceConfig};
use quadcarve::{fixtures, Surface};

#[test]
fn hyperbola_arcs_match_rk4() {
    std::thread::scope(|s| {
        let hs: Vec<_> = [-2, -1, 1].into_iter().map(|d| s.spawn(move || (d, common::hyperbola_vs_rk4(d, 20, (7 + d) as u64, 1e-5)))).collect();
        for h in hs {
            let (d, c) = h.join().unwrap();
            assert_eq!(c.arcs, 20 * (4 - d) as usize);
            assert!(c.max_deviation < 1e-4, "d = {d}: {}", c.max_deviation);
            assert_eq!(c.ordering_violations, 0, "d = {d}");
        }
    });
}

#[test]
fn constant_field_traces_straight_lines() {
    let dev = common::straight_line_deviation();
    assert!(dev < 1e-12, "{dev}");
}

#[test]
fn circular_field_keeps_radius() {
    let drift = common::circle_drift(0.1);
    assert!(drift < 1e-3, "{drift}");
}

#[test]
fn separatrices_leave_polygons_through_the_boundary() {
    for name in ["triangle", "pentagon", "hexagon"] {
        let surface = Surface::new(fixtures::by_name(name).unwrap()).unwrap();
        let field = compute_cross_field(&surface, &FieldConfig::default()).unwrap().field;
        let sings = detect_singularities(&surface, &field).unwrap();
        let trace = trace_separatrices(&surface, &field, &sings, &TraceConfig::default());
        let ports: usize = sings.iter().map(|s| s.ports.len()).sum();
        assert_eq!(trace.separatrices.len(), ports, "{name}");
        for s in &trace.separatrices {
            assert_eq!(s.termination, Some(Termination::BoundaryExit), "{name} sep {}", s.id);
            assert!(s.boundary_hit.is_some());
        }
    }
}

#[test]
fn concave_corner_emits_separatrices() {
    let surface = Surface::new(fixtures::by_name("l_shape").unwrap()).unwrap();
    let field = compute_cross_field(&surface, &FieldConfig::default()).unwrap().field;
    let trace = trace_separatrices(&surface, &field, &[], &TraceConfig::default());
    assert_eq!(trace.separatrices.len(), 2);
    assert!(trace.separatrices.iter().all(|s| matches!(s.origin, quadcarve::trace::Origin::Corner { .. })));
}
