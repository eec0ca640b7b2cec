//! Oracles shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use std::f64::consts::{FRAC_PI_2, TAU};

use num_complex::Complex64 as C;
use quadcarve::field::CrossField;
use quadcarve::hyperbola::{ray_angles, SectorModel};
use quadcarve::layout::{Layout, NodeKind};
use quadcarve::pipeline::{run_mesh, PipelineConfig, PipelineOutput};
use quadcarve::simplify::{simplify, Extender, SimplifyConfig};
use quadcarve::synth::random_layout;
use quadcarve::trace::{TraceConfig, Tracer};
use quadcarve::{fixtures, Surface, V3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Cross direction of the model field at `z` closest to `heading`.
fn cross_dir(d: i32, z: C, heading: C) -> C {
    let base = d as f64 * z.arg() / 4.0;
    let j = ((heading.arg() - base) / FRAC_PI_2).round();
    C::from_polar(1.0, base + j * FRAC_PI_2)
}

fn rk4_step(d: i32, z: C, heading: C, h: f64) -> (C, C) {
    let k1 = cross_dir(d, z, heading);
    let k2 = cross_dir(d, z + k1 * (h / 2.0), k1);
    let k3 = cross_dir(d, z + k2 * (h / 2.0), k2);
    let k4 = cross_dir(d, z + k3 * h, k3);
    let dz = (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    (z + dz, cross_dir(d, z + dz, k4))
}

pub struct HyperbolaCheck {
    pub max_deviation: f64,
    pub arcs: usize,
    pub ordering_violations: usize,
}

/// Closed-form arcs against RK4 integration of the model field, in the unit disk.
pub fn hyperbola_vs_rk4(d: i32, per_sector: usize, seed: u64, step: f64) -> HyperbolaCheck {
    let m = SectorModel::new(d);
    let rays = ray_angles(32);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut arcs = Vec::new();
    for k in 0..m.sector_count() {
        let w = m.sector_width();
        for _ in 0..per_sector {
            let theta = (k as f64 + rng.random_range(0.05..0.95)) * w;
            let z0 = C::from_polar(rng.random_range(0.3..0.9), theta);
            let f = m.entry_frame(z0).unwrap();
            let arc = m.arc(z0, f.sector, true, &rays, |p| p.norm() < 1.0);

            // Ray crossings of the integrated curve, keyed by conformal angle.
            let phi_of = |z: C| m.to_conformal(z, f.sector).1;
            let mut z = z0;
            let mut heading = m.tangent(z0, f.sector);
            let mut crossings: Vec<(f64, C)> = Vec::new();
            let mut exit = None;
            for _ in 0..5_000_000 {
                let (zn, hn) = rk4_step(d, z, heading, step);
                let (p0, p1) = (phi_of(z), phi_of(zn));
                for &r in &rays {
                    if p0 > r && p1 <= r {
                        let t = (p0 - r) / (p0 - p1);
                        crossings.push((r, z + (zn - z) * t));
                    }
                }
                if zn.norm() >= 1.0 {
                    let t = (1.0 - z.norm()) / (zn.norm() - z.norm());
                    exit = Some(z + (zn - z) * t);
                    break;
                }
                z = zn;
                heading = hn;
            }
            let exit = exit.expect("integration left the disk");
            for &(phi, p) in &arc.points {
                if let Some(&(_, q)) = crossings.iter().find(|c| c.0 == phi) {
                    worst = worst.max((p - q).norm());
                }
            }
            worst = worst.max((arc.points.last().unwrap().1 - exit).norm());
            arcs.push(arc);
        }
    }
    let mut violations = 0;
    for i in 0..arcs.len() {
        for j in i + 1..arcs.len() {
            let (a, b) = (&arcs[i], &arcs[j]);
            if a.anchor != b.anchor || a.a == b.a {
                continue;
            }
            let want = a.a < b.a;
            for &(phi, p) in &a.points {
                if !rays.contains(&phi) {
                    continue;
                }
                if let Some(&(_, q)) = b.points.iter().find(|x| x.0 == phi) {
                    if (p.norm() < q.norm()) != want {
                        violations += 1;
                    }
                }
            }
        }
    }
    HyperbolaCheck { max_deviation: worst, arcs: arcs.len(), ordering_violations: violations }
}

/// Cross field whose crosses point along `dir(position)` everywhere.
pub fn field_along(surface: &Surface, dir: impl Fn(&V3) -> V3) -> CrossField {
    let u = surface
        .mesh
        .positions
        .iter()
        .zip(&surface.frames)
        .map(|(p, f)| C::from_polar(1.0, 4.0 * f.angle_of(&dir(p))))
        .collect();
    CrossField { u, iterations: 0, converged: true }
}

/// Largest distance from the traced polyline to the exact straight line.
pub fn straight_line_deviation() -> f64 {
    let surface = Surface::new(fixtures::square(12, 0.15)).unwrap();
    let d = V3::new(0.3f64.cos(), 0.3f64.sin(), 0.0);
    let field = field_along(&surface, |_| d);
    let tracer = Tracer::new(&surface, &field, &[], TraceConfig::default());
    let mut worst: f64 = 0.0;
    for start in [V3::new(0.37, 0.41, 0.0), V3::new(0.05, 0.8, 0.0), V3::new(0.61, 0.12, 0.0)] {
        for dir in [d, V3::new(-d.y, d.x, 0.0), -d] {
            let cur = tracer.cursor_at(tracer.locate(&start), &start, &dir);
            let line = tracer.march(cur, 100_000, |_, _| None);
            assert!(line.boundary.is_some());
            for p in &line.points {
                let q = V3::from(p.pos) - start;
                worst = worst.max((q.x * dir.y - q.y * dir.x).abs());
            }
        }
    }
    worst
}

/// Radius drift over one revolution of a circular streamline at unit radius.
pub fn circle_drift(heun_factor: f64) -> f64 {
    let surface = Surface::new(fixtures::polar_annulus(0.5, 1.5, 8, 64)).unwrap();
    let field = field_along(&surface, |p| V3::new(-p.y, p.x, 0.0));
    let cfg = TraceConfig { heun_factor, ..TraceConfig::default() };
    let tracer = Tracer::new(&surface, &field, &[], cfg);
    let a0: f64 = 0.013;
    let start = V3::new(a0.cos(), a0.sin(), 0.0);
    let cur = tracer.cursor_at(tracer.locate(&start), &start, &V3::new(-start.y, start.x, 0.0));
    let mut turned = 0.0;
    let line = tracer.march(cur, 1_000_000, |a, b| {
        let da = (b.pos[1].atan2(b.pos[0]) - a.pos[1].atan2(a.pos[0]) + TAU / 2.0).rem_euclid(TAU) - TAU / 2.0;
        if turned + da >= TAU {
            return Some((TAU - turned) / da);
        }
        turned += da;
        None
    });
    assert!(line.stopped, "streamline did not complete a revolution");
    line.points.iter().map(|p| (V3::from(p.pos).norm() - 1.0).abs()).fold(0.0, f64::max)
}

/// Default pipeline run on a named fixture, nothing written.
pub fn fixture_run(name: &str) -> PipelineOutput {
    let cfg = PipelineConfig::new(format!("fixture:{name}"));
    let mesh = fixtures::by_name(name).unwrap();
    run_mesh(name, mesh, &cfg).unwrap_or_else(|f| panic!("{name}: {}", f.error))
}

/// Singular node indices in quarters, sorted, read straight off the nodes.
pub fn singular_quarters(l: &Layout) -> Vec<i32> {
    let mut q: Vec<i32> = l.nodes.iter().filter(|n| n.alive && n.kind == NodeKind::Singularity).map(|n| n.quarters).collect();
    q.sort_unstable();
    q
}

/// Faces whose corner count of value 1 is not four.
pub fn non_quad_faces(l: &Layout) -> usize {
    l.interior_faces().filter(|f| f.corners.iter().filter(|&&q| q == 1).count() != 4).count()
}

/// Conditions every accepted collapse must meet.
pub fn check_step(before: &Layout, after: &Layout) -> Result<(), String> {
    after.validate().map_err(|e| format!("invalid after collapse: {e}"))?;
    if non_quad_faces(after) > 0 {
        return Err("face without four corners".into());
    }
    let (c0, c1) = (before.component_count(), after.component_count());
    if c1 >= c0 {
        return Err(format!("components {c0} -> {c1}"));
    }
    let (t0, t1) = (before.t_junction_count(), after.t_junction_count());
    if t1 > t0 {
        return Err(format!("t-junctions {t0} -> {t1}"));
    }
    if singular_quarters(before) != singular_quarters(after) {
        return Err("singularities changed".into());
    }
    Ok(())
}

/// Replay a simplification one collapse at a time, checking each step and
/// the termination bound. Returns the number of collapses.
pub fn check_simplification(l: &Layout, cfg: &SimplifyConfig, ext: &dyn Extender) -> Result<usize, String> {
    let full = simplify(l, cfg, ext);
    let n0 = l.component_count();
    if full.log.len() > n0 {
        return Err(format!("{} collapses from {n0} components", full.log.len()));
    }
    let mut prev = l.clone();
    for k in 1..=full.log.len() {
        let step = simplify(l, &SimplifyConfig { max_collapses: Some(k), ..cfg.clone() }, ext).layout;
        check_step(&prev, &step).map_err(|e| format!("collapse {k}: {e}"))?;
        prev = step;
    }
    if prev.to_json() != full.layout.to_json() {
        return Err("replay differs from the full run".into());
    }
    Ok(full.log.len())
}

/// Randomized synthetic T-layouts, reproducible from `seed`.
pub fn random_layouts(count: usize, seed: u64) -> Vec<Layout> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let steps = rng.random_range(0..7);
            let mut u = || rng.random::<f64>();
            random_layout(&mut u, steps)
        })
        .collect()
}
