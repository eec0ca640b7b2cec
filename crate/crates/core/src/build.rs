//! Assemble a T-layout from traced separatrices and the mesh boundary.

use std::collections::BTreeMap;

use crate::geom::{polyline_length, to_arr};
use crate::layout::{Layout, NodeKind, SingularityRecord};
use crate::mesh::Surface;
use crate::singularity::Singularity;
use crate::trace::{Origin, TraceResult};

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let n = self.0[y];
            self.0[y] = r;
            y = n;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            // Keep the lower id so singularities and corners win over later nodes.
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

struct RawEdge {
    a: usize,
    b: usize,
    poly: Vec<[f64; 3]>,
    parent: Option<usize>,
    boundary: bool,
}

/// Build the layout graph. The result is not validated.
pub fn build_layout(surface: &Surface, singularities: &[Singularity], trace: &TraceResult) -> Layout {
    let mesh = &surface.mesh;
    let scale = mesh.diameter();
    let snap = 1e-9 * scale;
    let mut l = Layout::empty(mesh.euler_characteristic());
    l.scale = scale;

    let mut sing_node = BTreeMap::new();
    for s in singularities {
        let v = l.add_node(NodeKind::Singularity, s.location, to_arr(&mesh.face_normal(s.triangle)), s.d, false);
        l.nodes[v].singularity = Some(s.id);
        sing_node.insert(s.id, v);
        l.singularities.push(SingularityRecord {
            id: s.id,
            d: s.d,
            index: s.index(),
            location: s.location,
            ports: s.ports.clone(),
        });
    }
    let mut corner_node = BTreeMap::new();
    for b in &surface.boundary.nodes {
        if b.quarters != 0 {
            let v = l.add_node(
                NodeKind::BoundaryCorner,
                to_arr(&mesh.positions[b.node]),
                to_arr(&surface.normals[b.node]),
                b.quarters,
                true,
            );
            corner_node.insert(b.node, v);
        }
    }

    let seps = &trace.separatrices;
    let tri_normal = |s: usize, seg: usize| {
        let pts = &seps[s].points;
        to_arr(&mesh.face_normal(pts[(seg + 1).min(pts.len() - 1)].tri))
    };
    let mut event_node = Vec::with_capacity(trace.events.len());
    for ev in &trace.events {
        let merge = ev.terminal && seps[ev.a].merged_with == Some(ev.b) && ev.b != ev.a;
        let kind = if ev.terminal && !merge { NodeKind::TJunction } else { NodeKind::Crossing };
        event_node.push(l.add_node(kind, ev.pos, tri_normal(ev.a, ev.seg_a), 0, false));
    }

    // Boundary stops per loop: (position along the loop, node).
    let loop_of: BTreeMap<usize, (usize, usize)> = mesh
        .boundary_loops
        .iter()
        .enumerate()
        .flat_map(|(li, lp)| lp.iter().enumerate().map(move |(i, &v)| (v, (li, i))))
        .collect();
    let mut stops: Vec<Vec<(f64, usize)>> = vec![Vec::new(); mesh.boundary_loops.len()];
    for (&mv, &v) in &corner_node {
        let (li, i) = loop_of[&mv];
        stops[li].push((i as f64, v));
    }
    let mut exit_node = BTreeMap::new();
    for s in seps.iter().filter(|s| !s.dropped) {
        let Some(hit) = s.boundary_hit else { continue };
        let end = s.points.last().unwrap().pos;
        if let Some(mv) = hit.vertex {
            if let Some(&c) = corner_node.get(&mv) {
                exit_node.insert(s.id, c);
                continue;
            }
            let (li, i) = loop_of[&mv];
            let v = l.add_node(NodeKind::BoundaryExit, to_arr(&mesh.positions[mv]), to_arr(&surface.normals[mv]), 0, true);
            stops[li].push((i as f64, v));
            exit_node.insert(s.id, v);
        } else {
            let [ea, eb] = mesh.edges[hit.edge];
            let (li, ia) = loop_of[&ea];
            let lp = &mesh.boundary_loops[li];
            let pos = if lp[(ia + 1) % lp.len()] == eb {
                ia as f64 + hit.lambda
            } else {
                let (_, ib) = loop_of[&eb];
                ib as f64 + (1.0 - hit.lambda)
            };
            let t = mesh.edge_tris[hit.edge].iter().copied().find(|&t| t != crate::mesh::NONE).unwrap();
            let v = l.add_node(NodeKind::BoundaryExit, end, to_arr(&mesh.face_normal(t)), 0, true);
            stops[li].push((pos, v));
            exit_node.insert(s.id, v);
        }
    }

    let mut raw: Vec<RawEdge> = Vec::new();
    let mut stem_of: BTreeMap<usize, usize> = BTreeMap::new();
    for s in seps.iter().filter(|s| !s.dropped && s.points.len() >= 2) {
        let start = match s.origin {
            Origin::Port { singularity, .. } => sing_node[&singularity],
            Origin::Corner { node, .. } => corner_node[&node],
        };
        let mut st: Vec<(f64, usize)> = vec![(0.0, start)];
        for (k, ev) in trace.events.iter().enumerate() {
            for p in ev.params_on(s.id) {
                st.push((p, event_node[k]));
            }
        }
        let endp = s.end_param();
        if let Some(&v) = exit_node.get(&s.id) {
            st.push((endp, v));
        } else if let Some(sg) = s.end_singularity {
            st.push((endp, sing_node[&sg]));
        }
        st.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for w in st.windows(2) {
            let ((p0, a), (p1, b)) = (w[0], w[1]);
            let poly = s.slice(p0, p1);
            raw.push(RawEdge { a, b, poly, parent: Some(s.id), boundary: false });
            if l.nodes[b].kind == NodeKind::TJunction {
                let terminal_here = trace.events.iter().enumerate().any(|(k, ev)| event_node[k] == b && ev.a == s.id && ev.terminal);
                if terminal_here && (p1 - endp).abs() < 1e-12 {
                    stem_of.insert(b, raw.len() - 1);
                }
            }
        }
    }

    for (li, lp) in mesh.boundary_loops.iter().enumerate() {
        let n = lp.len();
        let at = |x: f64| {
            let i = (x.floor() as usize) % n;
            let t = x - x.floor();
            let (a, b) = (mesh.positions[lp[i]], mesh.positions[lp[(i + 1) % n]]);
            to_arr(&(a + (b - a) * t))
        };
        let st = &mut stops[li];
        if st.is_empty() {
            let v = l.add_node(NodeKind::BoundaryVertex, to_arr(&mesh.positions[lp[0]]), to_arr(&surface.normals[lp[0]]), 0, true);
            st.push((0.0, v));
        }
        st.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        st.dedup_by(|b, a| (b.0 - a.0).abs() < 1e-12 && b.1 == a.1);
        for k in 0..st.len() {
            let (p0, a) = st[k];
            let (mut p1, b) = st[(k + 1) % st.len()];
            if k + 1 == st.len() {
                p1 += n as f64;
            }
            let mut poly = vec![at(p0)];
            let mut j = p0.floor() as usize + 1;
            while (j as f64) < p1 {
                poly.push(to_arr(&mesh.positions[lp[j % n]]));
                j += 1;
            }
            poly.push(at(p1));
            raw.push(RawEdge { a, b, poly, parent: None, boundary: true });
        }
    }

    // Snap coincident stops.
    let mut uf = UnionFind((0..l.nodes.len()).collect());
    for r in &raw {
        if r.a != r.b && polyline_length(&r.poly) <= snap {
            uf.union(r.a, r.b);
        }
    }
    for v in 0..l.nodes.len() {
        let r = uf.find(v);
        if r != v {
            l.nodes[v].alive = false;
            if l.nodes[v].boundary {
                l.nodes[r].boundary = true;
            }
        }
    }
    let mut stems = BTreeMap::new();
    for (k, r) in raw.into_iter().enumerate() {
        let (a, b) = (uf.find(r.a), uf.find(r.b));
        if a == b && polyline_length(&r.poly) <= snap {
            continue;
        }
        if r.poly.len() < 2 {
            continue;
        }
        let e = l.push_edge(a, b, r.poly, r.parent, r.boundary);
        l.nodes[a].rotation.push(2 * e);
        l.nodes[b].rotation.push(2 * e + 1);
        if let Some((&node, _)) = stem_of.iter().find(|(_, &ri)| ri == k) {
            stems.insert(uf.find(node), 2 * e + 1);
        }
    }
    for v in 0..l.nodes.len() {
        if l.nodes[v].alive && l.nodes[v].rotation.is_empty() {
            l.nodes[v].alive = false;
        }
    }
    l.sort_rotations();
    for v in 0..l.nodes.len() {
        if !l.nodes[v].alive {
            continue;
        }
        let deg = l.nodes[v].rotation.len();
        if l.nodes[v].boundary {
            l.mark_exterior(v);
            l.assign_sectors_by_angle(v);
        } else if let (Some(&h), 3) = (stems.get(&v), deg) {
            let i = l.rot_index(v, h);
            let mut s = vec![2i8; 3];
            s[i] = 1;
            s[(i + 2) % 3] = 1;
            l.nodes[v].sectors = s;
        } else if l.nodes[v].kind == NodeKind::Crossing && deg == 4 {
            l.nodes[v].sectors = vec![1; 4];
        } else {
            l.nodes[v].sectors = vec![0; deg];
            l.assign_sectors_by_angle(v);
        }
    }
    l.dissolve_all();
    l.recompute_kinds();
    l.compact();
    l
}
