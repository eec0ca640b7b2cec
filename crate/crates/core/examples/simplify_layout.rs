//! Chords, patches and greedy collapse on hand-built layouts.

use quadcarve::chord::enumerate_chords;
use quadcarve::layout::Layout;
use quadcarve::simplify::{simplify, GeometricExtender, Order, SimplifyConfig};
use quadcarve::synth;

fn show(name: &str, l: &Layout, order: Order) {
    println!("== {name}: {} components, {} T-junctions", l.component_count(), l.t_junction_count());
    for c in enumerate_chords(l) {
        let kinds: Vec<String> = c.patches.iter().map(|p| format!("{:?}", p.kind)).collect();
        println!(
            "  chord {:>2}: {} faces, width {:.3}, energy {:+.3}, patches [{}]{}",
            c.id,
            c.len(),
            c.min_width,
            c.energy,
            kinds.join(" "),
            if c.collapsible() { String::new() } else { format!(", blocked by {:?}", c.blockers) }
        );
    }
    let out = simplify(l, &SimplifyConfig { order, max_collapses: None }, &GeometricExtender);
    for r in &out.log {
        println!(
            "  collapse {}: chord {} ({:?}), components {} -> {}, T {} -> {}",
            r.step, r.chord, r.patch_kinds, r.components_before, r.components_after, r.t_junctions_before, r.t_junctions_after
        );
    }
    println!("  result: {} components, {} T-junctions", out.layout.component_count(), out.layout.t_junction_count());
}

fn main() {
    show("thin middle strip", &synth::three_strip(0.2), Order::Thinnest);
    show("near-aligned singularities", &synth::misaligned_pair(0.1), Order::Thinnest);
    // w = l closes the energy gate.
    show("far-apart singularities", &synth::misaligned_pair(1.0), Order::Thinnest);
    show("T-junction ladder", &synth::t_ladder(), Order::Energy);
}
