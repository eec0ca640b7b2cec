//! T-layouts: an embedded graph of layout nodes and polyline edges whose
//! interior faces are four-sided.
//!
//! Half-edge `h = 2 e + s` leaves `edges[e].nodes[s]`; its twin is `h ^ 1`.
//! Each node stores its outgoing half-edges counterclockwise together with a
//! corner value per sector (sector `i` lies between `rotation[i]` and
//! `rotation[i + 1]`): 1 for a corner, 2 for a straight angle, and
//! [`EXTERIOR`] outside the surface.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::LayoutError;
use crate::geom::{dist3, polyline_length};
use crate::mesh::V3;

pub const EXTERIOR: i8 = -1;

#[inline]
pub fn twin(h: usize) -> usize {
    h ^ 1
}

#[inline]
pub fn edge_of(h: usize) -> usize {
    h >> 1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Singularity,
    BoundaryCorner,
    TJunction,
    Crossing,
    BoundaryExit,
    /// Placeholder on a boundary loop that no separatrix reaches.
    BoundaryVertex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutNode {
    pub id: usize,
    pub kind: NodeKind,
    pub xyz: [f64; 3],
    pub normal: [f64; 3],
    pub rotation: Vec<usize>,
    pub sectors: Vec<i8>,
    pub singularity: Option<usize>,
    /// Singularity index or boundary index, in quarters.
    pub quarters: i32,
    pub boundary: bool,
    #[serde(skip, default = "alive")]
    pub alive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutEdge {
    pub id: usize,
    pub nodes: [usize; 2],
    pub polyline: Vec<[f64; 3]>,
    /// Separatrix this edge was cut from.
    pub parent: Option<usize>,
    pub boundary: bool,
    #[serde(skip, default = "alive")]
    pub alive: bool,
}

fn alive() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularityRecord {
    pub id: usize,
    pub d: i32,
    pub index: f64,
    pub location: [f64; 3],
    pub ports: Vec<[f64; 3]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub id: usize,
    pub halfedges: Vec<usize>,
    /// Corner value at the origin of each half-edge.
    pub corners: Vec<i8>,
    pub exterior: bool,
    /// Four sides as half-edge runs, counterclockwise, when the face is a valid quad.
    pub sides: Option<[Vec<usize>; 4]>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    pub nodes: Vec<LayoutNode>,
    pub edges: Vec<LayoutEdge>,
    pub singularities: Vec<SingularityRecord>,
    /// Euler characteristic of the underlying surface.
    pub chi: i64,
    pub faces: Vec<Face>,
    pub face_of: Vec<usize>,
    pub scale: f64,
}

/// Tangent-plane basis used to order edges around a node.
pub fn plane_basis(n: &V3) -> (V3, V3) {
    let a = if n.x.abs() < 0.9 { V3::x() } else { V3::y() };
    let b1 = (a - n * n.dot(&a)).normalize();
    (b1, n.cross(&b1))
}

pub fn v3(a: [f64; 3]) -> V3 {
    V3::new(a[0], a[1], a[2])
}

/// Split `total` corner units over sectors in proportion to their angles.
pub fn distribute(angles: &[f64], total: i32) -> Vec<i8> {
    let sum: f64 = angles.iter().sum();
    if angles.is_empty() {
        return Vec::new();
    }
    let raw: Vec<f64> = angles.iter().map(|a| a / sum * total as f64).collect();
    let mut q: Vec<i32> = raw.iter().map(|r| r.floor() as i32).collect();
    let mut rest = total - q.iter().sum::<i32>();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().cycle().take(raw.len() * 4) {
        if rest <= 0 {
            break;
        }
        q[i] += 1;
        rest -= 1;
    }
    // Every sector between two edges is at least a corner when units allow.
    loop {
        let Some(z) = q.iter().position(|&x| x == 0) else { break };
        let Some(m) = (0..q.len()).filter(|&i| q[i] > 1).max_by_key(|&i| (q[i], usize::MAX - i)) else { break };
        q[m] -= 1;
        q[z] += 1;
    }
    q.into_iter().map(|x| x as i8).collect()
}

impl Layout {
    pub fn empty(chi: i64) -> Self {
        Layout { nodes: Vec::new(), edges: Vec::new(), singularities: Vec::new(), chi, faces: Vec::new(), face_of: Vec::new(), scale: 1.0 }
    }

    pub fn origin(&self, h: usize) -> usize {
        self.edges[h >> 1].nodes[h & 1]
    }

    pub fn target(&self, h: usize) -> usize {
        self.edges[h >> 1].nodes[1 - (h & 1)]
    }

    /// Polyline of half-edge `h` from its origin.
    pub fn polyline_of(&self, h: usize) -> Vec<[f64; 3]> {
        let mut p = self.edges[h >> 1].polyline.clone();
        if h & 1 == 1 {
            p.reverse();
        }
        p
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        polyline_length(&self.edges[e].polyline)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.nodes[v].rotation.len()
    }

    pub fn rot_index(&self, v: usize, h: usize) -> usize {
        self.nodes[v].rotation.iter().position(|&x| x == h).expect("half-edge missing from rotation")
    }

    pub fn next_in_face(&self, h: usize) -> usize {
        let v = self.target(h);
        let r = &self.nodes[v].rotation;
        let i = self.rot_index(v, twin(h));
        r[(i + r.len() - 1) % r.len()]
    }

    pub fn corner_q(&self, h: usize) -> i8 {
        let v = self.origin(h);
        self.nodes[v].sectors[self.rot_index(v, h)]
    }

    pub fn live_nodes(&self) -> impl Iterator<Item = &LayoutNode> {
        self.nodes.iter().filter(|n| n.alive)
    }

    pub fn live_edges(&self) -> impl Iterator<Item = &LayoutEdge> {
        self.edges.iter().filter(|e| e.alive)
    }

    pub fn interior_faces(&self) -> impl Iterator<Item = &Face> {
        self.faces.iter().filter(|f| !f.exterior)
    }

    pub fn component_count(&self) -> usize {
        self.interior_faces().count()
    }

    pub fn t_junction_count(&self) -> usize {
        self.live_nodes().filter(|n| n.kind == NodeKind::TJunction).count()
    }

    /// Singularity ids and indices present in the layout, sorted.
    pub fn singularity_multiset(&self) -> Vec<(usize, i32)> {
        let mut v: Vec<(usize, i32)> =
            self.live_nodes().filter_map(|n| n.singularity.map(|s| (s, n.quarters))).collect();
        v.sort_unstable();
        v
    }

    pub fn is_singular(&self, v: usize) -> bool {
        self.nodes[v].kind == NodeKind::Singularity
    }

    pub fn is_boundary_node(&self, v: usize) -> bool {
        self.nodes[v].boundary
    }

    /// Outgoing direction of `h` at its origin, in 3-space.
    pub fn out_direction(&self, h: usize) -> V3 {
        let p = self.polyline_of(h);
        let o = v3(p[0]);
        let tol = 1e-12 * self.scale.max(1e-300);
        for q in &p[1..] {
            let d = v3(*q) - o;
            if d.norm() > tol {
                return d;
            }
        }
        v3(p[p.len() - 1]) - o
    }

    fn angle_at(&self, v: usize, d: &V3) -> f64 {
        let n = v3(self.nodes[v].normal);
        let (b1, b2) = plane_basis(&n);
        d.dot(&b2).atan2(d.dot(&b1))
    }

    pub fn halfedge_angle(&self, h: usize) -> f64 {
        self.angle_at(self.origin(h), &self.out_direction(h))
    }

    /// Sort every rotation counterclockwise by tangent-plane angle.
    pub fn sort_rotations(&mut self) {
        for v in 0..self.nodes.len() {
            if !self.nodes[v].alive {
                continue;
            }
            let mut r: Vec<(f64, usize)> =
                self.nodes[v].rotation.iter().map(|&h| (self.halfedge_angle(h), h)).collect();
            r.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            self.nodes[v].rotation = r.into_iter().map(|x| x.1).collect();
        }
    }

    /// Counterclockwise angles of the sectors at `v`.
    pub fn sector_angles(&self, v: usize) -> Vec<f64> {
        let r = &self.nodes[v].rotation;
        let a: Vec<f64> = r.iter().map(|&h| self.halfedge_angle(h)).collect();
        (0..r.len())
            .map(|i| {
                if r.len() == 1 {
                    2.0 * PI
                } else {
                    let d = (a[(i + 1) % r.len()] - a[i]).rem_euclid(2.0 * PI);
                    if d == 0.0 {
                        2.0 * PI * ((i + 1 == r.len()) as i32 as f64)
                    } else {
                        d
                    }
                }
            })
            .collect()
    }

    /// Corner total expected at node `v`.
    pub fn node_target(&self, v: usize) -> i32 {
        let n = &self.nodes[v];
        if n.kind == NodeKind::Singularity {
            4 - n.quarters
        } else if n.boundary {
            2 - n.quarters
        } else {
            4
        }
    }

    pub fn recompute_scale(&mut self) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for e in self.live_edges() {
            for p in &e.polyline {
                for k in 0..3 {
                    lo[k] = lo[k].min(p[k]);
                    hi[k] = hi[k].max(p[k]);
                }
            }
        }
        for n in self.live_nodes() {
            for k in 0..3 {
                lo[k] = lo[k].min(n.xyz[k]);
                hi[k] = hi[k].max(n.xyz[k]);
            }
        }
        let d = dist3(lo, hi);
        self.scale = if d.is_finite() && d > 0.0 { d } else { 1.0 };
    }

    /// Extract all faces by walking the rotation system.
    pub fn compute_faces(&mut self) {
        let nh = 2 * self.edges.len();
        self.face_of = vec![usize::MAX; nh];
        self.faces.clear();
        for h0 in 0..nh {
            if !self.edges[h0 >> 1].alive || self.face_of[h0] != usize::MAX {
                continue;
            }
            let id = self.faces.len();
            let mut hs = Vec::new();
            let mut h = h0;
            loop {
                self.face_of[h] = id;
                hs.push(h);
                h = self.next_in_face(h);
                if h == h0 || hs.len() > nh {
                    break;
                }
            }
            let corners: Vec<i8> = hs.iter().map(|&h| self.corner_q(h)).collect();
            let exterior = corners.contains(&EXTERIOR);
            let sides = if exterior { None } else { quad_sides(&hs, &corners) };
            self.faces.push(Face { id, halfedges: hs, corners, exterior, sides });
        }
    }

    /// Check corner totals, face shapes and the Euler characteristic.
    pub fn validate(&self) -> Result<(), LayoutError> {
        for (v, n) in self.nodes.iter().enumerate() {
            if !n.alive {
                continue;
            }
            if n.rotation.len() != n.sectors.len() {
                return Err(LayoutError::BadNode { node: v, msg: "rotation and sectors differ in length".into() });
            }
            if n.rotation.is_empty() {
                return Err(LayoutError::BadNode { node: v, msg: "isolated node".into() });
            }
            if !n.boundary && n.rotation.len() == 1 && n.kind != NodeKind::Singularity {
                return Err(LayoutError::BadNode { node: v, msg: "dangling node".into() });
            }
            let s: i32 = n.sectors.iter().filter(|&&q| q != EXTERIOR).map(|&q| q as i32).sum();
            if s != self.node_target(v) {
                return Err(LayoutError::BadNode { node: v, msg: format!("corner total {s}, expected {}", self.node_target(v)) });
            }
            if n.sectors.iter().any(|&q| q != EXTERIOR && q < 0) {
                return Err(LayoutError::BadNode { node: v, msg: "negative corner".into() });
            }
        }
        for f in &self.faces {
            if f.exterior {
                continue;
            }
            if f.sides.is_none() {
                let corners = f.corners.iter().filter(|&&q| q == 1).count();
                return Err(LayoutError::FaceNotQuad { face: f.id, corners });
            }
        }
        let v = self.live_nodes().count() as i64;
        let e = self.live_edges().count() as i64;
        let fi = self.component_count() as i64;
        if v - e + fi != self.chi {
            return Err(LayoutError::Euler { got: v - e + fi, expected: self.chi });
        }
        Ok(())
    }

    /// Drop dead entities and renumber.
    pub fn compact(&mut self) {
        let mut nmap = vec![usize::MAX; self.nodes.len()];
        let mut emap = vec![usize::MAX; self.edges.len()];
        let mut k = 0;
        for (i, n) in self.nodes.iter().enumerate() {
            if n.alive {
                nmap[i] = k;
                k += 1;
            }
        }
        k = 0;
        for (i, e) in self.edges.iter().enumerate() {
            if e.alive {
                emap[i] = k;
                k += 1;
            }
        }
        let hmap = |h: usize| 2 * emap[h >> 1] + (h & 1);
        self.nodes.retain(|n| n.alive);
        self.edges.retain(|e| e.alive);
        for (i, n) in self.nodes.iter_mut().enumerate() {
            n.id = i;
            n.rotation = n.rotation.iter().map(|&h| hmap(h)).collect();
        }
        for (i, e) in self.edges.iter_mut().enumerate() {
            e.id = i;
            e.nodes = e.nodes.map(|v| nmap[v]);
        }
        self.compute_faces();
    }

    /// Recompute node kinds from degree and role.
    pub fn recompute_kinds(&mut self) {
        for v in 0..self.nodes.len() {
            if !self.nodes[v].alive || self.nodes[v].kind == NodeKind::Singularity {
                continue;
            }
            let deg = self.nodes[v].rotation.len();
            let interior_edges = self.nodes[v].rotation.iter().filter(|&&h| !self.edges[h >> 1].boundary).count();
            let n = &mut self.nodes[v];
            n.kind = if n.boundary {
                if n.quarters != 0 {
                    NodeKind::BoundaryCorner
                } else if interior_edges > 0 {
                    NodeKind::BoundaryExit
                } else {
                    NodeKind::BoundaryVertex
                }
            } else if deg == 3 {
                NodeKind::TJunction
            } else {
                NodeKind::Crossing
            };
        }
    }

    pub fn add_node(&mut self, kind: NodeKind, xyz: [f64; 3], normal: [f64; 3], quarters: i32, boundary: bool) -> usize {
        let id = self.nodes.len();
        self.nodes.push(LayoutNode {
            id,
            kind,
            xyz,
            normal,
            rotation: Vec::new(),
            sectors: Vec::new(),
            singularity: None,
            quarters,
            boundary,
            alive: true,
        });
        id
    }

    /// Append an edge without touching rotations.
    pub fn push_edge(&mut self, a: usize, b: usize, mut polyline: Vec<[f64; 3]>, parent: Option<usize>, boundary: bool) -> usize {
        polyline[0] = self.nodes[a].xyz;
        let last = polyline.len() - 1;
        polyline[last] = self.nodes[b].xyz;
        let id = self.edges.len();
        self.edges.push(LayoutEdge { id, nodes: [a, b], polyline, parent, boundary, alive: true });
        id
    }

    fn remove_halfedge(&mut self, v: usize, h: usize) {
        let i = self.rot_index(v, h);
        let n = &mut self.nodes[v];
        let deg = n.rotation.len();
        if deg > 1 {
            let prev = (i + deg - 1) % deg;
            let (a, b) = (n.sectors[prev], n.sectors[i]);
            n.sectors[prev] = if a == EXTERIOR || b == EXTERIOR { EXTERIOR } else { a + b };
        }
        n.rotation.remove(i);
        n.sectors.remove(i);
    }

    /// Delete an edge, merging the sectors on both sides at each end.
    pub fn delete_edge(&mut self, e: usize) {
        let [a, b] = self.edges[e].nodes;
        self.remove_halfedge(a, 2 * e);
        self.remove_halfedge(b, 2 * e + 1);
        self.edges[e].alive = false;
    }

    /// Insert `h` at its origin, splitting the sector it falls into by angle.
    pub fn insert_halfedge(&mut self, h: usize) {
        let v = self.origin(h);
        let ang = self.halfedge_angle(h);
        let target = self.node_target(v);
        let deg = self.nodes[v].rotation.len();
        if deg == 0 {
            self.nodes[v].rotation.push(h);
            self.nodes[v].sectors.push(target as i8);
            return;
        }
        let angles: Vec<f64> = self.nodes[v].rotation.iter().map(|&x| self.halfedge_angle(x)).collect();
        let mut best = (0usize, 0.0f64, 2.0 * PI);
        for i in 0..deg {
            let off = (ang - angles[i]).rem_euclid(2.0 * PI);
            let width = if deg == 1 { 2.0 * PI } else { (angles[(i + 1) % deg] - angles[i]).rem_euclid(2.0 * PI) };
            let width = if width == 0.0 { 2.0 * PI } else { width };
            if off <= width && (off / width) <= 1.0 {
                best = (i, off, width);
                break;
            }
        }
        let (i, off, width) = best;
        let q = self.nodes[v].sectors[i];
        let (qa, qb) = if q == EXTERIOR {
            (EXTERIOR, EXTERIOR)
        } else {
            let mut qa = (q as f64 * off / width).round() as i8;
            if q >= 2 {
                qa = qa.clamp(1, q - 1);
            }
            (qa, q - qa)
        };
        let n = &mut self.nodes[v];
        n.sectors[i] = qa;
        n.rotation.insert(i + 1, h);
        n.sectors.insert(i + 1, qb);
    }

    /// Add an edge and hook both half-edges into the rotations.
    pub fn add_edge(&mut self, a: usize, b: usize, polyline: Vec<[f64; 3]>, parent: Option<usize>, boundary: bool) -> usize {
        let e = self.push_edge(a, b, polyline, parent, boundary);
        self.insert_halfedge(2 * e);
        self.insert_halfedge(2 * e + 1);
        e
    }

    fn replace_halfedge(&mut self, v: usize, old: usize, new: usize) {
        let i = self.rot_index(v, old);
        self.nodes[v].rotation[i] = new;
    }

    /// Split edge `e` at polyline position `seg + t`; returns the new node.
    pub fn split_edge(&mut self, e: usize, seg: usize, t: f64) -> usize {
        let ed = self.edges[e].clone();
        let p = &ed.polyline;
        let (a, b) = (p[seg], p[seg + 1]);
        let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])];
        let [na, nb] = ed.nodes;
        let normal = self.nodes[na].normal;
        let quarters = 0;
        let w = self.add_node(
            if ed.boundary { NodeKind::BoundaryExit } else { NodeKind::Crossing },
            x,
            normal,
            quarters,
            ed.boundary,
        );
        let mut p1: Vec<[f64; 3]> = p[..=seg].to_vec();
        p1.push(x);
        let mut p2 = vec![x];
        p2.extend_from_slice(&p[seg + 1..]);
        let e1 = self.push_edge(na, w, p1, ed.parent, ed.boundary);
        let e2 = self.push_edge(w, nb, p2, ed.parent, ed.boundary);
        // Left of the original direction is the counterclockwise sector of 2e at `na`.
        let left_q = self.nodes[na].sectors[self.rot_index(na, 2 * e)];
        let (l, r) = if ed.boundary {
            if left_q == EXTERIOR {
                (EXTERIOR, 2)
            } else {
                (2, EXTERIOR)
            }
        } else {
            (2, 2)
        };
        self.replace_halfedge(na, 2 * e, 2 * e1);
        self.replace_halfedge(nb, 2 * e + 1, 2 * e2 + 1);
        self.nodes[w].rotation = vec![2 * e2, 2 * e1 + 1];
        self.nodes[w].sectors = vec![l, r];
        self.edges[e].alive = false;
        w
    }

    /// Contract edge `e` into node `keep`; the other end disappears.
    pub fn contract_edge(&mut self, e: usize, keep: usize) -> Result<(), LayoutError> {
        let [n0, n1] = self.edges[e].nodes;
        if n0 == n1 {
            return Err(LayoutError::Other("cannot contract a loop".into()));
        }
        let (u, v, hu) = if n0 == keep { (n0, n1, 2 * e) } else { (n1, n0, 2 * e + 1) };
        let hv = twin(hu);
        let iu = self.rot_index(u, hu);
        let iv = self.rot_index(v, hv);
        let ru = self.nodes[u].rotation.clone();
        let su = self.nodes[u].sectors.clone();
        let rv = self.nodes[v].rotation.clone();
        let sv = self.nodes[v].sectors.clone();
        if su.contains(&EXTERIOR) || sv.contains(&EXTERIOR) {
            return Err(LayoutError::Other("cannot contract at the boundary".into()));
        }
        let (du, dv) = (ru.len(), rv.len());
        let q1 = su[(iu + du - 1) % du];
        let q2 = su[iu];
        let p1 = sv[(iv + dv - 1) % dv];
        let p2 = sv[iv];
        // v's other half-edges in counterclockwise order after hv, with their sectors.
        let vseq: Vec<usize> = (1..dv).map(|k| rv[(iv + k) % dv]).collect();
        let vsec: Vec<i8> = (1..dv).map(|k| sv[(iv + k) % dv]).collect();
        let useq: Vec<usize> = (1..du).map(|k| ru[(iu + k) % du]).collect();
        let usec: Vec<i8> = (1..du).map(|k| su[(iu + k) % du]).collect();
        let mut rot = Vec::new();
        let mut sec = Vec::new();
        match (du, dv) {
            (1, 1) => return Err(LayoutError::Other("contracting an isolated edge".into())),
            (1, _) => {
                rot.extend(&vseq);
                sec.extend(&vsec[..vsec.len() - 1]);
                sec.push(p1 + p2 + q1 - 4);
            }
            (_, 1) => {
                rot.extend(&useq);
                sec.extend(&usec[..usec.len() - 1]);
                sec.push(q1 + q2 + p1 - 4);
            }
            _ => {
                // Cyclic order: useq (a_next .. a_prev), then vseq (b_next .. b_prev).
                rot.extend(&useq);
                sec.extend(&usec[..usec.len() - 1]);
                sec.push(q1 + p2 - 2);
                rot.extend(&vseq);
                sec.extend(&vsec[..vsec.len() - 1]);
                sec.push(q2 + p1 - 2);
            }
        }
        let epoly = self.polyline_of(hu);
        for &h in &vseq {
            let g = h >> 1;
            let ed = &mut self.edges[g];
            if ed.nodes[0] == v && h & 1 == 0 {
                let mut p = epoly.clone();
                p.extend_from_slice(&ed.polyline[1..]);
                ed.polyline = p;
                ed.nodes[0] = u;
            } else {
                let mut rev = epoly.clone();
                rev.reverse();
                ed.polyline.extend_from_slice(&rev[1..]);
                let last = ed.polyline.len() - 1;
                ed.polyline[last] = self.nodes[u].xyz;
                ed.nodes[1] = u;
            }
        }
        self.nodes[u].rotation = rot;
        self.nodes[u].sectors = sec;
        self.nodes[v].alive = false;
        self.nodes[v].rotation.clear();
        self.nodes[v].sectors.clear();
        self.edges[e].alive = false;
        Ok(())
    }

    pub fn dissolvable(&self, v: usize) -> bool {
        let n = &self.nodes[v];
        if !n.alive || n.rotation.len() != 2 || n.kind == NodeKind::Singularity || n.quarters != 0 {
            return false;
        }
        if n.rotation[0] >> 1 == n.rotation[1] >> 1 {
            return false;
        }
        let s = [n.sectors[0], n.sectors[1]];
        let b0 = self.edges[n.rotation[0] >> 1].boundary;
        let b1 = self.edges[n.rotation[1] >> 1].boundary;
        if b0 != b1 {
            return false;
        }
        s == [2, 2] || s == [2, EXTERIOR] || s == [EXTERIOR, 2]
    }

    /// Join the two edges through a straight degree-2 node.
    pub fn dissolve(&mut self, v: usize) -> usize {
        let (h1, h2) = (self.nodes[v].rotation[0], self.nodes[v].rotation[1]);
        let (e1, e2) = (h1 >> 1, h2 >> 1);
        let a = self.target(h1);
        let b = self.target(h2);
        let mut poly = self.polyline_of(twin(h1));
        poly.extend_from_slice(&self.polyline_of(h2)[1..]);
        let parent = self.edges[e1].parent.or(self.edges[e2].parent);
        let boundary = self.edges[e1].boundary && self.edges[e2].boundary;
        let ne = self.push_edge(a, b, poly, parent, boundary);
        self.replace_halfedge(a, twin(h1), 2 * ne);
        self.replace_halfedge(b, twin(h2), 2 * ne + 1);
        self.edges[e1].alive = false;
        self.edges[e2].alive = false;
        self.nodes[v].alive = false;
        self.nodes[v].rotation.clear();
        self.nodes[v].sectors.clear();
        ne
    }

    pub fn dissolve_all(&mut self) {
        let mut v = 0;
        while v < self.nodes.len() {
            if self.dissolvable(v) {
                self.dissolve(v);
            }
            v += 1;
        }
    }

    /// Assign corner values from sector angles, keeping exterior sectors.
    pub fn assign_sectors_by_angle(&mut self, v: usize) {
        let angles = self.sector_angles(v);
        let target = self.node_target(v);
        let ext: Vec<bool> = self.nodes[v].sectors.iter().map(|&q| q == EXTERIOR).collect();
        let idx: Vec<usize> = (0..angles.len()).filter(|&i| !ext.get(i).copied().unwrap_or(false)).collect();
        let a: Vec<f64> = idx.iter().map(|&i| angles[i]).collect();
        let q = distribute(&a, target);
        let mut out = vec![EXTERIOR; angles.len()];
        for (k, &i) in idx.iter().enumerate() {
            out[i] = q[k];
        }
        self.nodes[v].sectors = out;
    }

    /// Mark the exterior sector at each boundary node: the one running from
    /// the backward boundary half-edge to the forward one.
    pub fn mark_exterior(&mut self, v: usize) {
        let deg = self.nodes[v].rotation.len();
        let mut s = vec![0i8; deg];
        for i in 0..deg {
            let h = self.nodes[v].rotation[i];
            let hn = self.nodes[v].rotation[(i + 1) % deg];
            let e = &self.edges[h >> 1];
            let en = &self.edges[hn >> 1];
            // Boundary edges run with the surface on the left: h is backward when it leaves through nodes[1].
            if e.boundary && h & 1 == 1 && en.boundary && hn & 1 == 0 {
                s[i] = EXTERIOR;
            }
        }
        self.nodes[v].sectors = s;
    }

    /// Sides of a face, each as the edge ids of its half-edges.
    pub fn face_side_edges(&self, f: usize) -> Option<Vec<Vec<usize>>> {
        self.faces[f].sides.as_ref().map(|s| s.iter().map(|side| side.iter().map(|&h| h >> 1).collect()).collect())
    }

    pub fn side_length(&self, side: &[usize]) -> f64 {
        side.iter().map(|&h| self.edge_length(h >> 1)).sum()
    }

    /// Vertices of a face polygon in order (node positions and polyline samples).
    pub fn face_polygon(&self, f: usize) -> Vec<[f64; 3]> {
        let mut out = Vec::new();
        for &h in &self.faces[f].halfedges {
            let p = self.polyline_of(h);
            out.extend_from_slice(&p[..p.len() - 1]);
        }
        out
    }

    pub fn to_json(&self) -> LayoutJson {
        let mut l = self.clone();
        l.compact();
        let components = l
            .interior_faces()
            .enumerate()
            .map(|(i, f)| ComponentJson {
                id: i,
                sides: f.sides.as_ref().map(|s| s.iter().map(|side| side.iter().map(|&h| h >> 1).collect()).collect()).unwrap_or_default(),
                halfedges: f.halfedges.clone(),
            })
            .collect();
        LayoutJson { chi: l.chi, nodes: l.nodes, edges: l.edges, components, singularities: l.singularities }
    }

    pub fn from_json(j: &LayoutJson) -> Layout {
        let mut l = Layout {
            nodes: j.nodes.clone(),
            edges: j.edges.clone(),
            singularities: j.singularities.clone(),
            chi: j.chi,
            faces: Vec::new(),
            face_of: Vec::new(),
            scale: 1.0,
        };
        l.recompute_scale();
        l.compute_faces();
        l
    }

    /// Nodes counted by kind, in kind order.
    pub fn kind_counts(&self) -> BTreeMap<NodeKind, usize> {
        let mut m = BTreeMap::new();
        for n in self.live_nodes() {
            *m.entry(n.kind).or_insert(0) += 1;
        }
        m
    }
}

fn quad_sides(hs: &[usize], corners: &[i8]) -> Option<[Vec<usize>; 4]> {
    if corners.iter().any(|&q| q != 1 && q != 2) {
        return None;
    }
    let cs: Vec<usize> = (0..hs.len()).filter(|&i| corners[i] == 1).collect();
    if cs.len() != 4 {
        return None;
    }
    let n = hs.len();
    let mut sides: [Vec<usize>; 4] = Default::default();
    for k in 0..4 {
        let (s, e) = (cs[k], if k == 3 { cs[0] + n } else { cs[k + 1] });
        sides[k] = (s..e).map(|i| hs[i % n]).collect();
    }
    Some(sides)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentJson {
    pub id: usize,
    pub sides: Vec<Vec<usize>>,
    pub halfedges: Vec<usize>,
}

/// Canonical serialization of a layout.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutJson {
    pub chi: i64,
    pub nodes: Vec<LayoutNode>,
    pub edges: Vec<LayoutEdge>,
    pub components: Vec<ComponentJson>,
    pub singularities: Vec<SingularityRecord>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn distribute_by_angle() {
        assert_eq!(distribute(&[PI / 2.0, PI / 2.0, PI], 4), vec![1, 1, 2]);
        assert_eq!(distribute(&[PI / 2.0; 4], 4), vec![1, 1, 1, 1]);
        assert_eq!(distribute(&[0.1, 2.0 * PI - 0.1], 4), vec![1, 3]);
        assert_eq!(distribute(&[PI / 2.0], 1), vec![1]);
    }
}
