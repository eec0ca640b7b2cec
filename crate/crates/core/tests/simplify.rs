mod common;

use std::f64::consts::FRAC_PI_8;

use common::{check_simplification, check_step, fixture_run, random_layouts};
use proptest::prelude::*;
use quadcarve::chord::{enumerate_chords, Blocker, Chord, ChordEnd, PatchKind};
use quadcarve::layout::Layout;
use quadcarve::simplify::{collapse_chord, simplify, FieldExtender, GeometricExtender, Order, SimplifyConfig};
use quadcarve::synth;
use quadcarve::trace::Tracer;

fn zip_chord(l: &Layout) -> Chord {
    let mut zips: Vec<Chord> =
        enumerate_chords(l).into_iter().filter(|c| c.len() == 1 && c.patches.iter().all(|p| p.kind == PatchKind::Zip)).collect();
    assert_eq!(zips.len(), 1);
    zips.remove(0)
}

fn run(l: &Layout) -> quadcarve::simplify::Simplified {
    simplify(l, &SimplifyConfig::default(), &GeometricExtender)
}

#[test]
fn zip_energy_matches_width_over_length() {
    // Rungs are 2 delta apart in width and the sides are 2 long.
    for delta in [0.05, 0.1, 0.3, 0.4, 0.43, 0.8, 1.0] {
        let c = zip_chord(&synth::misaligned_pair(delta));
        let want = FRAC_PI_8 - delta.atan();
        assert!((c.energy - want).abs() < 1e-12, "delta {delta}: {} vs {want}", c.energy);
        assert_eq!(c.collapsible(), want > 0.0, "delta {delta}");
        if want <= 0.0 {
            assert_eq!(c.blockers, vec![Blocker::NonPositiveEnergy]);
        }
    }
}

#[test]
fn square_zip_patch_is_never_collapsed() {
    let l = synth::misaligned_pair(1.0);
    for order in [Order::Thinnest, Order::Energy] {
        let out = simplify(&l, &SimplifyConfig { order, max_collapses: None }, &GeometricExtender);
        assert!(out.log.iter().all(|r| !r.patch_kinds.contains(&PatchKind::Zip)));
        assert_eq!(out.layout.component_count(), l.component_count());
    }
}

#[test]
fn thin_zip_patch_is_collapsed() {
    let l = synth::misaligned_pair(0.1);
    let c = zip_chord(&l);
    assert!(c.collapsible());
    let next = collapse_chord(&l, &c, &GeometricExtender).unwrap();
    check_step(&l, &next).unwrap();
    assert_eq!((l.component_count(), next.component_count()), (9, 8));
    assert_eq!((l.t_junction_count(), next.t_junction_count()), (2, 0));

    let out = run(&l);
    assert_eq!(out.log[0].patch_kinds, vec![PatchKind::Zip]);
}

#[test]
fn rung_between_singularities_blocks() {
    let chords = enumerate_chords(&synth::aligned_pair());
    assert!(chords.iter().any(|c| c.blockers == vec![Blocker::RungBetweenSingularities]));
    assert!(chords.iter().all(|c| !c.collapsible()));
    assert!(run(&synth::aligned_pair()).log.is_empty());
}

#[test]
fn singularity_to_boundary_blocks() {
    for sides in [3, 5] {
        let l = synth::star(sides);
        for c in enumerate_chords(&l) {
            assert!(c.blockers.contains(&Blocker::SingularityToBoundary), "star {sides} chord {}", c.id);
        }
        assert!(run(&l).log.is_empty());
    }
}

#[test]
fn t_junction_ends() {
    // Same-sided T-junctions at both ends do not block.
    let ladder = enumerate_chords(&synth::t_ladder());
    let open: Vec<&Chord> = ladder.iter().filter(|c| c.ends == [ChordEnd::TJunction; 2] && c.collapsible()).collect();
    assert_eq!(open.len(), 1);
    assert_eq!(ladder.iter().filter(|c| c.blockers == vec![Blocker::TJunctionEnd]).count(), 2);
    // A lone T-junction opposite a plain node does.
    let single = enumerate_chords(&synth::t_single());
    for c in single.iter().filter(|c| c.ends == [ChordEnd::TJunction; 2]) {
        assert_eq!(c.blockers, vec![Blocker::TJunctionEnd]);
    }
}

#[test]
fn thin_strip_collapses_first() {
    let l = synth::three_strip(0.2);
    let out = simplify(&l, &SimplifyConfig { max_collapses: Some(1), ..Default::default() }, &GeometricExtender);
    assert_eq!(out.log.len(), 1);
    assert!((out.log[0].width - 0.2).abs() < 1e-12);
    assert_eq!(out.layout.component_count(), l.component_count() - 3);
}

#[test]
fn synthetic_layouts_reduce_as_expected() {
    let cases: [(&str, Layout, usize); 6] = [
        ("grid", synth::grid(3, 3, 1.0), 1),
        ("single", synth::grid(1, 1, 1.0), 1),
        ("ladder", synth::t_ladder(), 1),
        ("t_single", synth::t_single(), 1),
        ("aligned", synth::aligned_pair(), 8),
        ("star5", synth::star(5), 5),
    ];
    for (name, l, after) in cases {
        check_simplification(&l, &SimplifyConfig::default(), &GeometricExtender).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(run(&l).layout.component_count(), after, "{name}");
    }
    assert!(run(&synth::grid(1, 1, 1.0)).log.is_empty());
}

#[test]
fn ladder_needs_consecutive_collapses() {
    let l = synth::t_ladder();
    let out = run(&l);
    assert!(out.log.len() >= 3);
    assert_eq!(out.layout.t_junction_count(), 0);
    for w in out.log.windows(2) {
        assert_eq!(w[0].components_after, w[1].components_before);
    }
}

#[test]
fn energy_order_is_also_sound() {
    for l in [synth::t_ladder(), synth::three_strip(0.2), synth::misaligned_pair(0.1)] {
        check_simplification(&l, &SimplifyConfig { order: Order::Energy, max_collapses: None }, &GeometricExtender).unwrap();
    }
}

#[test]
fn fixture_runs_keep_invariants() {
    for name in quadcarve::fixtures::FIXTURE_NAMES {
        let out = fixture_run(name);
        let tracer = Tracer::new(&out.surface, &out.field.field, &out.singularities, Default::default());
        let ext = FieldExtender { tracer, max_steps: 10 * out.surface.mesh.triangles.len() + 100 };
        let n = check_simplification(&out.initial, &SimplifyConfig::default(), &ext).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(n, out.log.len(), "{name}");
    }
}

#[test]
fn fixture_collapse_counts() {
    let want = [
        ("square", 1, 1, 0),
        ("triangle", 3, 3, 0),
        ("pentagon", 5, 5, 0),
        ("hexagon", 11, 8, 1),
        ("l_shape", 3, 2, 1),
        ("annulus", 8, 4, 4),
        ("hemisphere", 1, 1, 0),
        ("disk", 5, 5, 0),
    ];
    for (name, before, after, collapses) in want {
        let r = fixture_run(name).report;
        assert_eq!((r.components_before, r.components_after, r.chord_collapses), (before, after, collapses), "{name}");
    }
}

#[test]
fn two_hundred_random_layouts() {
    for (i, l) in random_layouts(200, 2024).iter().enumerate() {
        l.validate().unwrap();
        check_simplification(l, &SimplifyConfig::default(), &GeometricExtender).unwrap_or_else(|e| panic!("layout {i}: {e}"));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn random_layout_simplification(seed in any::<u64>(), energy in any::<bool>()) {
        let l = random_layouts(1, seed).remove(0);
        let order = if energy { Order::Energy } else { Order::Thinnest };
        let cfg = SimplifyConfig { order, max_collapses: None };
        prop_assert!(check_simplification(&l, &cfg, &GeometricExtender).is_ok());
    }

    #[test]
    fn budget_is_respected(seed in any::<u64>(), budget in 0usize..4) {
        let l = random_layouts(1, seed).remove(0);
        let out = simplify(&l, &SimplifyConfig { max_collapses: Some(budget), ..Default::default() }, &GeometricExtender);
        prop_assert!(out.log.len() <= budget);
    }
}
