//! One line per acceptance criterion. Exits non-zero if any fails.

mod common;

use std::time::Instant;

use common::{check_simplification, fixture_run, non_quad_faces, random_layouts};
use quadcarve::chord::{enumerate_chords, Blocker, PatchKind};
use quadcarve::export::layout_json;
use quadcarve::field::{compute_cross_field, FieldConfig};
use quadcarve::pipeline::{run_mesh, PipelineConfig};
use quadcarve::simplify::{simplify, FieldExtender, GeometricExtender, SimplifyConfig};
use quadcarve::singularity::{all_indices, detect_singularities};
use quadcarve::trace::Tracer;
use quadcarve::{fixtures, synth, Surface};

const INDEX_FIXTURES: [&str; 6] = ["square", "triangle", "pentagon", "l_shape", "annulus", "hemisphere"];
const INDEX_SECONDS: f64 = 1.0;
const UNIT_TOL: f64 = 1e-12;
const HYPERBOLA_STEP: f64 = 1e-5;
const HYPERBOLA_TOL: f64 = 1e-4;
const HYPERBOLA_PER_SECTOR: usize = 20;
const LINE_TOL: f64 = 1e-12;
const CIRCLE_HEUN: f64 = 0.1;
const CIRCLE_TOL: f64 = 1e-3;
const RANDOM_LAYOUTS: usize = 200;
const LARGE_SECONDS: f64 = 5.0;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn index_sum() -> Outcome {
    let mut slowest: f64 = 0.0;
    for name in INDEX_FIXTURES {
        let t = Instant::now();
        let surface = Surface::new(fixtures::by_name(name).unwrap()).map_err(|e| e.to_string())?;
        let field = compute_cross_field(&surface, &FieldConfig::default()).map_err(|e| e.to_string())?.field;
        let idx = all_indices(&surface, &field).map_err(|e| e.to_string())?;
        let sum = idx.iter().map(|&d| d as i64).sum::<i64>() + surface.boundary.quarter_sum() as i64;
        let secs = t.elapsed().as_secs_f64();
        slowest = slowest.max(secs);
        let want = 4 * surface.mesh.euler_characteristic();
        if sum != want {
            return Err(format!("{name}: quarter sum {sum}, expected {want}"));
        }
        if secs >= INDEX_SECONDS {
            return Err(format!("{name}: {secs:.3}s"));
        }
    }
    Ok(format!("{} fixtures, slowest {slowest:.3}s", INDEX_FIXTURES.len()))
}

fn singularity_counts() -> Outcome {
    for (name, want) in [("square", vec![]), ("triangle", vec![1]), ("pentagon", vec![-1])] {
        let surface = Surface::new(fixtures::by_name(name).unwrap()).unwrap();
        let field = compute_cross_field(&surface, &FieldConfig::default()).unwrap().field;
        let ds: Vec<i32> = detect_singularities(&surface, &field).map_err(|e| e.to_string())?.iter().map(|s| s.d).collect();
        if ds != want {
            return Err(format!("{name}: {ds:?}, expected {want:?}"));
        }
    }
    Ok("square none, triangle +1/4, pentagon -1/4".into())
}

fn field_normalization() -> Outcome {
    let mut worst: f64 = 0.0;
    for name in INDEX_FIXTURES {
        let surface = Surface::new(fixtures::by_name(name).unwrap()).unwrap();
        let res = compute_cross_field(&surface, &FieldConfig::default()).map_err(|e| e.to_string())?;
        worst = res.field.u.iter().map(|u| (u.norm() - 1.0).abs()).fold(worst, f64::max);
        for &(v, g) in &res.system.constrained {
            let u = res.field.u[v];
            if u.re.to_bits() != g.re.to_bits() || u.im.to_bits() != g.im.to_bits() {
                return Err(format!("{name}: constrained node {v} changed"));
            }
        }
    }
    if worst >= UNIT_TOL {
        return Err(format!("max ||u| - 1| = {worst:.3e}"));
    }
    Ok(format!("max ||u| - 1| = {worst:.1e}, constraints bitwise equal"))
}

fn hyperbola_oracle() -> Outcome {
    let checks: Vec<_> = std::thread::scope(|s| {
        let hs: Vec<_> = [-2, -1, 1]
            .into_iter()
            .map(|d| s.spawn(move || (d, common::hyperbola_vs_rk4(d, HYPERBOLA_PER_SECTOR, (7 + d) as u64, HYPERBOLA_STEP))))
            .collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut worst: f64 = 0.0;
    for (d, c) in checks {
        if c.ordering_violations > 0 {
            return Err(format!("d = {d}: {} ordering violations", c.ordering_violations));
        }
        if c.max_deviation >= HYPERBOLA_TOL {
            return Err(format!("d = {d}: deviation {:.3e}", c.max_deviation));
        }
        worst = worst.max(c.max_deviation);
    }
    Ok(format!("max deviation {worst:.2e} r0, ordering preserved"))
}

fn triangle_tracing() -> Outcome {
    let line = common::straight_line_deviation();
    let drift = common::circle_drift(CIRCLE_HEUN);
    if line >= LINE_TOL || drift >= CIRCLE_TOL {
        return Err(format!("line {line:.2e}, circle drift {drift:.2e}"));
    }
    Ok(format!("line {line:.1e}, circle drift {drift:.2e} per revolution"))
}

fn simplification_invariants() -> Outcome {
    let mut collapses = 0;
    for name in fixtures::FIXTURE_NAMES {
        let out = fixture_run(name);
        let tracer = Tracer::new(&out.surface, &out.field.field, &out.singularities, Default::default());
        let ext = FieldExtender { tracer, max_steps: 10 * out.surface.mesh.triangles.len() + 100 };
        collapses += check_simplification(&out.initial, &SimplifyConfig::default(), &ext).map_err(|e| format!("{name}: {e}"))?;
    }
    let fixture_collapses = collapses;
    for (i, l) in random_layouts(RANDOM_LAYOUTS, 2024).iter().enumerate() {
        collapses += check_simplification(l, &SimplifyConfig::default(), &GeometricExtender).map_err(|e| format!("random {i}: {e}"))?;
    }
    Ok(format!(
        "{} fixtures ({fixture_collapses} collapses), {RANDOM_LAYOUTS} random layouts ({} collapses)",
        fixtures::FIXTURE_NAMES.len(),
        collapses - fixture_collapses
    ))
}

fn energy_gate() -> Outcome {
    let square = synth::misaligned_pair(1.0);
    let zip = |l: &quadcarve::layout::Layout| {
        enumerate_chords(l).into_iter().find(|c| c.len() == 1 && c.patches.iter().all(|p| p.kind == PatchKind::Zip))
    };
    let c = zip(&square).ok_or("no zip chord at w = l")?;
    if c.blockers != vec![Blocker::NonPositiveEnergy] {
        return Err(format!("w = l blockers {:?}", c.blockers));
    }
    let out = simplify(&square, &SimplifyConfig::default(), &GeometricExtender);
    if out.log.iter().any(|r| r.patch_kinds.contains(&PatchKind::Zip)) {
        return Err("zip patch with w = l was collapsed".into());
    }
    let thin = synth::misaligned_pair(0.1);
    let c = zip(&thin).ok_or("no zip chord at w/l = 0.1")?;
    if !c.collapsible() {
        return Err(format!("w/l = 0.1 blocked by {:?}", c.blockers));
    }
    let out = simplify(&thin, &SimplifyConfig::default(), &GeometricExtender);
    if !out.log.iter().any(|r| r.patch_kinds == [PatchKind::Zip]) {
        return Err("zip patch with w/l = 0.1 was not collapsed".into());
    }
    Ok(format!("w = l blocked (energy {:.4}), w/l = 0.1 collapsed", zip(&square).unwrap().energy))
}

fn performance() -> Outcome {
    let mesh = fixtures::by_name("large").unwrap();
    let n = mesh.node_count();
    let out = run_mesh("large", mesh, &PipelineConfig::new("fixture:large")).map_err(|f| f.error.to_string())?;
    let r = &out.report;
    let total = r.field_s + r.tracing_s + r.simplification_s;
    let detail = format!("{n} nodes: field {:.3}s, tracing {:.3}s, simplification {:.3}s", r.field_s, r.tracing_s, r.simplification_s);
    if total >= LARGE_SECONDS {
        return Err(detail);
    }
    Ok(detail)
}

fn determinism() -> Outcome {
    for name in ["hexagon", "annulus", "disk"] {
        let a = fixture_run(name);
        let b = fixture_run(name);
        if layout_json(&a.layout) != layout_json(&b.layout) || layout_json(&a.initial) != layout_json(&b.initial) {
            return Err(format!("{name}: layouts differ"));
        }
    }
    Ok("hexagon, annulus, disk byte-identical".into())
}

fn layout_validity() -> Outcome {
    for name in fixtures::FIXTURE_NAMES {
        let out = fixture_run(name);
        let l = &out.initial;
        l.validate().map_err(|e| format!("{name}: {e}"))?;
        if non_quad_faces(l) > 0 {
            return Err(format!("{name}: non-quad face"));
        }
        let mesh = &out.surface.mesh;
        if mesh.euler_characteristic() == 1 {
            let f = l.faces.len() as i64;
            let lhs = l.live_nodes().count() as i64 - l.live_edges().count() as i64 + f;
            let rhs = 1 + mesh.boundary_loops.len() as i64;
            if lhs != rhs {
                return Err(format!("{name}: V - E + F = {lhs}, expected {rhs}"));
            }
        }
    }
    Ok(format!("{} fixtures", fixtures::FIXTURE_NAMES.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("index sum", index_sum),
        ("singularity counts", singularity_counts),
        ("field normalization", field_normalization),
        ("hyperbola vs rk4", hyperbola_oracle),
        ("triangle tracing", triangle_tracing),
        ("simplification invariants", simplification_invariants),
        ("energy gate", energy_gate),
        ("performance", performance),
        ("determinism", determinism),
        ("layout validity", layout_validity),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(msg) => println!("criterion {:>2} PASS  {name}: {msg}", i + 1),
            Err(msg) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {msg}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
