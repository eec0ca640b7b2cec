use quadcarve::field::{compute_cross_field, FieldConfig};
use quadcarve::singularity::{all_indices, detect_singularities};
use quadcarve::{fixtures, Surface};

fn index_sum(name: &str) -> (i64, i64, Vec<i32>) {
    let surface = Surface::new(fixtures::by_name(name).unwrap()).unwrap();
    let field = compute_cross_field(&surface, &FieldConfig::default()).unwrap().field;
    let idx = all_indices(&surface, &field).unwrap();
    let interior: i64 = idx.iter().map(|&d| d as i64).sum();
    let sings = detect_singularities(&surface, &field).unwrap();
    let ds: Vec<i32> = sings.iter().map(|s| s.d).collect();
    (interior + surface.boundary.quarter_sum() as i64, 4 * surface.mesh.euler_characteristic(), ds)
}

#[test]
fn quarter_indices_sum_to_euler_characteristic() {
    for name in fixtures::FIXTURE_NAMES.iter().copied().chain(["icosahedron"]) {
        let (sum, want, _) = index_sum(name);
        assert_eq!(sum, want, "{name}");
    }
}

#[test]
fn expected_singularities_on_polygons() {
    assert_eq!(index_sum("square").2, Vec::<i32>::new());
    assert_eq!(index_sum("triangle").2, vec![1]);
    assert_eq!(index_sum("pentagon").2, vec![-1]);
    assert_eq!(index_sum("hexagon").2, vec![-1, -1]);
    assert_eq!(index_sum("l_shape").2, Vec::<i32>::new());
    assert_eq!(index_sum("annulus").2, Vec::<i32>::new());
}

#[test]
fn singularity_ports_match_index() {
    let surface = Surface::new(fixtures::by_name("disk").unwrap()).unwrap();
    let field = compute_cross_field(&surface, &FieldConfig::default()).unwrap().field;
    for s in detect_singularities(&surface, &field).unwrap() {
        assert_eq!(s.ports.len() as i32, 4 - s.d);
        assert_eq!(s.port_angles.len(), s.ports.len());
        let w = s.sector_width();
        for k in 1..s.port_angles.len() {
            let gap = (s.port_angles[k] - s.port_angles[k - 1]).rem_euclid(std::f64::consts::TAU);
            assert!((gap - w).abs() < 1e-12);
        }
    }
}
