//! Greedy chord collapse.

use std::cell::Cell;
use std::collections::BTreeSet;

use log::{debug, info};
use serde::{Deserialize, Serialize};

use crate::chord::{enumerate_chords, Chord, PatchKind, Side};
use crate::error::LayoutError;
use crate::geom::{dist3, polyline_length, to_arr};
use crate::layout::{plane_basis, v3, Layout, NodeKind};
use crate::mesh::V3;
use crate::trace::{lerp, Tracer};

/// Continuation of a dangling edge up to the boundary of its face.
#[derive(Clone, Debug)]
pub struct Extension {
    pub polyline: Vec<[f64; 3]>,
    /// Edge hit, with the segment and parameter in the edge's own orientation.
    pub edge: usize,
    pub seg: usize,
    pub t: f64,
}

pub trait Extender {
    /// Continue the single edge at node `v` straight on through face `f`.
    fn extend(&self, l: &Layout, v: usize, f: usize) -> Option<Extension>;
}

/// Face boundary projected to the face's best-fit plane.
struct FacePlane {
    origin: V3,
    b1: V3,
    b2: V3,
    segs: Vec<(usize, usize, [f64; 2], [f64; 2])>,
}

impl FacePlane {
    fn new(l: &Layout, f: usize, skip: usize) -> Self {
        let poly = l.face_polygon(f);
        let mut n = V3::zeros();
        let mut c = V3::zeros();
        for i in 0..poly.len() {
            let (a, b) = (v3(poly[i]), v3(poly[(i + 1) % poly.len()]));
            n += a.cross(&b);
            c += a;
        }
        c /= poly.len() as f64;
        let n = if n.norm() > 0.0 { n.normalize() } else { V3::z() };
        let (b1, b2) = plane_basis(&n);
        let mut fp = FacePlane { origin: c, b1, b2, segs: Vec::new() };
        let edges: BTreeSet<usize> = l.faces[f].halfedges.iter().map(|&h| h >> 1).filter(|&e| e != skip).collect();
        for e in edges {
            let p = &l.edges[e].polyline;
            for k in 0..p.len() - 1 {
                let (a, b) = (fp.proj(p[k]), fp.proj(p[k + 1]));
                fp.segs.push((e, k, a, b));
            }
        }
        fp
    }

    fn proj(&self, p: [f64; 3]) -> [f64; 2] {
        let d = v3(p) - self.origin;
        [d.dot(&self.b1), d.dot(&self.b2)]
    }

    fn dir(&self, d: &V3) -> [f64; 2] {
        [d.dot(&self.b1), d.dot(&self.b2)]
    }

    /// First hit along `p -> q` with parameter above `min_s`: `(s, edge, seg, t)`.
    fn first_hit(&self, p: [f64; 2], q: [f64; 2], min_s: f64) -> Option<(f64, usize, usize, f64)> {
        let mut best: Option<(f64, usize, usize, f64)> = None;
        for &(e, k, a, b) in &self.segs {
            let Some((s, t)) = crate::geom::segment_intersection(p, q, a, b) else { continue };
            if s > min_s && s <= 1.0 && (-1e-12..=1.0 + 1e-12).contains(&t) && best.is_none_or(|x| s < x.0) {
                best = Some((s, e, k, t.clamp(0.0, 1.0)));
            }
        }
        best
    }
}

fn point_on_edge(l: &Layout, e: usize, seg: usize, t: f64) -> [f64; 3] {
    let p = &l.edges[e].polyline;
    lerp(p[seg], p[seg + 1], t)
}

/// Straight ray in the plane of the face.
pub struct GeometricExtender;

impl Extender for GeometricExtender {
    fn extend(&self, l: &Layout, v: usize, f: usize) -> Option<Extension> {
        let h = l.nodes[v].rotation[0];
        let fp = FacePlane::new(l, f, h >> 1);
        let d = fp.dir(&-l.out_direction(h));
        let n = d[0].hypot(d[1]);
        if n == 0.0 {
            return None;
        }
        let p = fp.proj(l.nodes[v].xyz);
        let r = 4.0 * l.scale.max(1.0);
        let q = [p[0] + r * d[0] / n, p[1] + r * d[1] / n];
        let (_, e, seg, t) = fp.first_hit(p, q, 1e-12)?;
        Some(Extension { polyline: vec![l.nodes[v].xyz, point_on_edge(l, e, seg, t)], edge: e, seg, t })
    }
}

/// Follows the cross field on the surface; falls back to a straight ray.
pub struct FieldExtender<'a> {
    pub tracer: Tracer<'a>,
    pub max_steps: usize,
}

impl Extender for FieldExtender<'_> {
    fn extend(&self, l: &Layout, v: usize, f: usize) -> Option<Extension> {
        let h = l.nodes[v].rotation[0];
        let fp = FacePlane::new(l, f, h >> 1);
        let pos = v3(l.nodes[v].xyz);
        let dir = -l.out_direction(h);
        let tri = self.tracer.locate(&pos);
        let start = self.tracer.cursor_at(tri, &pos, &dir);
        let hit = Cell::new(None);
        let line = self.tracer.march(start, self.max_steps, |a, b| {
            let (s, e, k, t) = fp.first_hit(fp.proj(a.pos), fp.proj(b.pos), 0.0)?;
            hit.set(Some((e, k, t)));
            Some(s)
        });
        match (line.stopped, hit.get()) {
            (true, Some((e, seg, t))) => {
                let mut poly: Vec<[f64; 3]> = line.points.iter().map(|p| p.pos).collect();
                *poly.last_mut().unwrap() = point_on_edge(l, e, seg, t);
                poly.dedup();
                Some(Extension { polyline: poly, edge: e, seg, t })
            }
            _ => GeometricExtender.extend(l, v, f),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    /// Smallest minimum width first.
    #[default]
    Thinnest,
    /// Highest chord energy first.
    Energy,
}

#[derive(Clone, Debug, Default)]
pub struct SimplifyConfig {
    pub order: Order,
    pub max_collapses: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CollapseRecord {
    pub step: usize,
    pub chord: usize,
    pub chord_len: usize,
    pub width: f64,
    pub energy: f64,
    pub patch_kinds: Vec<PatchKind>,
    pub components_before: usize,
    pub components_after: usize,
    pub t_junctions_before: usize,
    pub t_junctions_after: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rejection {
    pub step: usize,
    pub chord: usize,
    pub reason: String,
}

#[derive(Clone, Debug)]
pub struct Simplified {
    pub layout: Layout,
    pub log: Vec<CollapseRecord>,
    pub rejected: Vec<Rejection>,
}

/// Side polyline of a patch, oriented from its first rung to its last.
fn side_polyline(l: &Layout, c: &Chord, first: usize, last: usize, side: Side) -> (Vec<[f64; 3]>, Vec<f64>) {
    let mut out: Vec<[f64; 3]> = Vec::new();
    let mut marks = vec![0.0];
    for i in first..last {
        let hs = c.side_halfedges(l, i, side);
        let mut piece: Vec<[f64; 3]> = Vec::new();
        let ordered: Vec<usize> = match side {
            Side::Right => hs.to_vec(),
            Side::Left => hs.iter().rev().map(|&h| h ^ 1).collect(),
        };
        for h in ordered {
            let p = l.polyline_of(h);
            if piece.is_empty() {
                piece.extend(p);
            } else {
                piece.extend_from_slice(&p[1..]);
            }
        }
        if out.is_empty() {
            out.extend(piece);
        } else {
            out.extend_from_slice(&piece[1..]);
        }
        marks.push(polyline_length(&out));
    }
    (out, marks)
}

fn at_fraction(p: &[[f64; 3]], u: f64) -> [f64; 3] {
    let total = polyline_length(p);
    let mut want = u.clamp(0.0, 1.0) * total;
    for w in p.windows(2) {
        let d = dist3(w[0], w[1]);
        if want <= d && d > 0.0 {
            return lerp(w[0], w[1], want / d);
        }
        want -= d;
    }
    p[p.len() - 1]
}

fn closest_on_polyline(p: &[[f64; 3]], x: [f64; 3]) -> (usize, f64) {
    let mut best = (f64::INFINITY, 0, 0.0);
    let xv = v3(x);
    for k in 0..p.len() - 1 {
        let (a, b) = (v3(p[k]), v3(p[k + 1]));
        let d = b - a;
        let t = if d.norm_squared() > 0.0 { ((xv - a).dot(&d) / d.norm_squared()).clamp(0.0, 1.0) } else { 0.0 };
        let dist = (a + d * t - xv).norm();
        if dist < best.0 {
            best = (dist, k, t);
        }
    }
    (best.1, best.2)
}

struct ZipPlan {
    sa: usize,
    sb: usize,
    first_edge: usize,
    last_edge: usize,
    /// Interior rung edges with the split position of their zip point.
    interior: Vec<(usize, usize, f64)>,
    curves: Vec<Vec<[f64; 3]>>,
}

fn plan_zip(l: &Layout, c: &Chord, p: &crate::chord::Patch) -> Result<ZipPlan, LayoutError> {
    let (sa, sb) = p.zip_ends.unwrap();
    let start_side = p.zip_start_side.unwrap();
    let other = if start_side == Side::Left { Side::Right } else { Side::Left };
    let (ps, pm) = side_polyline(l, c, p.first, p.last, start_side);
    let (qs, qm) = side_polyline(l, c, p.first, p.last, other);
    let (pt, qt) = (pm[pm.len() - 1], qm[qm.len() - 1]);
    if pt <= 0.0 || qt <= 0.0 {
        return Err(LayoutError::Other("degenerate zip side".into()));
    }
    let blend = |t: f64| {
        let (a, b) = (at_fraction(&ps, t), at_fraction(&qs, t));
        lerp(a, b, t)
    };
    let k = p.last - p.first;
    let mut ts = vec![0.0];
    for j in 1..k {
        ts.push(0.5 * (pm[j] / pt + qm[j] / qt));
    }
    ts.push(1.0);
    let single = |j: usize| -> Result<usize, LayoutError> {
        let r = &c.rungs[j];
        if r.halfedges.len() != 1 {
            return Err(LayoutError::Other("zip rung spans several edges".into()));
        }
        Ok(r.halfedges[0] >> 1)
    };
    let mut interior = Vec::new();
    for j in 1..k {
        let e = single(p.first + j)?;
        let (seg, t) = closest_on_polyline(&l.edges[e].polyline, blend(ts[j]));
        interior.push((e, seg, t));
    }
    let curves = ts
        .windows(2)
        .map(|w| (0..=16).map(|i| blend(w[0] + (w[1] - w[0]) * i as f64 / 16.0)).collect())
        .collect();
    Ok(ZipPlan { sa, sb, first_edge: single(p.first)?, last_edge: single(p.last)?, interior, curves })
}

/// Collapse one chord. The input is left untouched; failures leave nothing behind.
pub fn collapse_chord(l: &Layout, c: &Chord, ext: &dyn Extender) -> Result<Layout, LayoutError> {
    if !c.collapsible() {
        return Err(LayoutError::Other(format!("chord {} is not collapsible: {:?}", c.id, c.blockers)));
    }
    let mut del = BTreeSet::new();
    for p in &c.patches {
        for i in p.first..p.last {
            for &s in &p.delete {
                del.extend(c.side_halfedges(l, i, s).iter().map(|&h| h >> 1));
            }
        }
    }
    if del.iter().any(|&e| l.edges[e].boundary) {
        return Err(LayoutError::Other("collapse would delete boundary edges".into()));
    }
    let plans: Vec<ZipPlan> =
        c.patches.iter().filter(|p| p.kind == PatchKind::Zip).map(|p| plan_zip(l, c, p)).collect::<Result<_, _>>()?;

    let mut m = l.clone();
    for &e in &del {
        m.delete_edge(e);
    }
    for z in &plans {
        if m.edges[z.first_edge].alive {
            m.contract_edge(z.first_edge, z.sa)?;
        }
        if m.edges[z.last_edge].alive {
            m.contract_edge(z.last_edge, z.sb)?;
        }
        let mut seq = vec![z.sa];
        for &(e, seg, t) in &z.interior {
            let w = m.split_edge(e, seg, t);
            let n = m.edges.len();
            m.contract_edge(n - 2, w)?;
            m.contract_edge(n - 1, w)?;
            seq.push(w);
        }
        seq.push(z.sb);
        for (k, curve) in z.curves.iter().enumerate() {
            m.add_edge(seq[k], seq[k + 1], curve.clone(), None, false);
        }
    }
    m.dissolve_all();
    extend_dangling(&mut m, ext)?;
    m.recompute_kinds();
    m.compact();
    m.validate()?;
    let (cb, ca) = (l.component_count(), m.component_count());
    if ca >= cb {
        return Err(LayoutError::Other(format!("component count did not drop ({cb} -> {ca})")));
    }
    if m.t_junction_count() > l.t_junction_count() {
        return Err(LayoutError::Other("T-junction count increased".into()));
    }
    if m.singularity_multiset() != l.singularity_multiset() {
        return Err(LayoutError::Other("singularity set changed".into()));
    }
    Ok(m)
}

fn extend_dangling(m: &mut Layout, ext: &dyn Extender) -> Result<(), LayoutError> {
    let limit = 4 * m.edges.len() + 16;
    for _ in 0..limit {
        let dangling = (0..m.nodes.len()).find(|&v| {
            let n = &m.nodes[v];
            n.alive && !n.boundary && n.kind != NodeKind::Singularity && n.rotation.len() == 1
        });
        let Some(v) = dangling else { return Ok(()) };
        m.compute_faces();
        let h = m.nodes[v].rotation[0];
        let f = m.face_of[h];
        let x = ext.extend(m, v, f).ok_or_else(|| LayoutError::Other(format!("cannot extend dangling node {v}")))?;
        let hit = *x.polyline.last().unwrap();
        let tol = 1e-6 * m.scale;
        let [na, nb] = m.edges[x.edge].nodes;
        let w = if dist3(hit, m.nodes[na].xyz) < tol {
            na
        } else if dist3(hit, m.nodes[nb].xyz) < tol {
            nb
        } else {
            m.split_edge(x.edge, x.seg, x.t)
        };
        if w == v {
            return Err(LayoutError::Other("extension returned to its start".into()));
        }
        let parent = m.edges[h >> 1].parent;
        debug!("extending node {v} to {:?}", to_arr(&v3(m.nodes[w].xyz)));
        m.add_edge(v, w, x.polyline, parent, false);
        if m.dissolvable(v) {
            m.dissolve(v);
        }
    }
    Err(LayoutError::Other("extension did not settle".into()))
}

/// Collapse chords greedily until none qualifies or the budget is spent.
pub fn simplify(l: &Layout, cfg: &SimplifyConfig, ext: &dyn Extender) -> Simplified {
    let mut cur = l.clone();
    let mut log = Vec::new();
    let mut rejected = Vec::new();
    let mut blacklist: BTreeSet<usize> = BTreeSet::new();
    loop {
        if cfg.max_collapses.is_some_and(|b| log.len() >= b) {
            break;
        }
        let chords = enumerate_chords(&cur);
        let mut cand: Vec<&Chord> = chords.iter().filter(|c| c.collapsible() && !blacklist.contains(&c.id)).collect();
        match cfg.order {
            Order::Thinnest => cand.sort_by(|a, b| a.min_width.total_cmp(&b.min_width).then(a.id.cmp(&b.id))),
            Order::Energy => cand.sort_by(|a, b| b.energy.total_cmp(&a.energy).then(a.id.cmp(&b.id))),
        }
        let Some(c) = cand.first() else { break };
        let step = log.len();
        match collapse_chord(&cur, c, ext) {
            Ok(next) => {
                let rec = CollapseRecord {
                    step,
                    chord: c.id,
                    chord_len: c.len(),
                    width: c.min_width,
                    energy: c.energy,
                    patch_kinds: c.patches.iter().map(|p| p.kind).collect(),
                    components_before: cur.component_count(),
                    components_after: next.component_count(),
                    t_junctions_before: cur.t_junction_count(),
                    t_junctions_after: next.t_junction_count(),
                };
                info!(
                    "collapse {step}: chord {} width {:.4} components {} -> {}",
                    c.id, c.min_width, rec.components_before, rec.components_after
                );
                log.push(rec);
                cur = next;
                blacklist.clear();
            }
            Err(e) => {
                debug!("chord {} rolled back: {e}", c.id);
                rejected.push(Rejection { step, chord: c.id, reason: e.to_string() });
                blacklist.insert(c.id);
            }
        }
    }
    Simplified { layout: cur, log, rejected }
}
