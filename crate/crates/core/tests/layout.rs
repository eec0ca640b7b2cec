mod common;

use common::{fixture_run, non_quad_faces, random_layouts};
use proptest::prelude::*;
use quadcarve::chord::enumerate_chords;
use quadcarve::fixtures;
use quadcarve::layout::{Layout, NodeKind};
use quadcarve::synth;

fn euler_with_exterior(l: &Layout) -> i64 {
    l.live_nodes().count() as i64 - l.live_edges().count() as i64 + l.faces.len() as i64
}

#[test]
fn fixture_layouts_are_quad_and_satisfy_euler() {
    for name in fixtures::FIXTURE_NAMES {
        let out = fixture_run(name);
        let l = &out.initial;
        l.validate().unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(non_quad_faces(l), 0, "{name}");
        assert!(l.component_count() > 0, "{name}");
        let loops = out.surface.mesh.boundary_loops.len() as i64;
        let chi = out.surface.mesh.euler_characteristic();
        assert_eq!(euler_with_exterior(l), chi + loops, "{name}");
        if name != "annulus" {
            assert_eq!(chi, 1, "{name}");
        }
    }
}

#[test]
fn square_layout_is_one_component() {
    let l = fixture_run("square").initial;
    assert_eq!(l.component_count(), 1);
    assert_eq!(l.kind_counts().get(&NodeKind::BoundaryCorner), Some(&4));
    assert_eq!(l.live_edges().count(), 4);
}

#[test]
fn three_rectangles_has_one_t_junction() {
    let l = synth::three_rectangles();
    assert_eq!(l.component_count(), 3);
    assert_eq!(l.t_junction_count(), 1);
    let json = serde_json::to_string(&l.to_json()).unwrap();
    assert_eq!(json.matches("\"t_junction\"").count(), 1);
}

#[test]
fn json_round_trip_on_fixtures() {
    for name in ["l_shape", "annulus", "hexagon"] {
        let out = fixture_run(name);
        for l in [&out.initial, &out.layout] {
            let j = l.to_json();
            let text = serde_json::to_string(&j).unwrap();
            let back = Layout::from_json(&serde_json::from_str(&text).unwrap());
            back.validate().unwrap();
            assert_eq!(back.to_json(), j, "{name}");
            assert_eq!(back.component_count(), l.component_count());
        }
    }
}

#[test]
fn each_component_lies_on_two_chords() {
    let layouts = [synth::grid(3, 2, 1.0), synth::three_strip(0.2), synth::t_ladder(), synth::misaligned_pair(0.1), synth::star(5)];
    for l in layouts.iter().chain(random_layouts(20, 7).iter()) {
        let chords = enumerate_chords(l);
        let mut hits = vec![0usize; l.faces.len()];
        for c in &chords {
            for &f in &c.faces {
                hits[f] += 1;
            }
        }
        for f in l.interior_faces() {
            assert_eq!(hits[f.id], 2, "face {}", f.id);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_layouts_are_valid_and_round_trip(seed in any::<u64>()) {
        let l = random_layouts(1, seed).remove(0);
        prop_assert!(l.validate().is_ok());
        prop_assert_eq!(non_quad_faces(&l), 0);
        let j = l.to_json();
        prop_assert_eq!(Layout::from_json(&j).to_json(), j);
    }
}
