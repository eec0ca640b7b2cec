//! Indexed triangle surfaces, tangent frames, discrete transport and
//! boundary classification.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_4, PI};
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::Vector3;
use num_complex::Complex64;

use crate::error::MeshError;

pub type V3 = Vector3<f64>;

/// Sentinel for "no triangle" / "no neighbour".
pub const NONE: usize = usize::MAX;

#[derive(Clone, Debug)]
pub struct TriMesh {
    pub positions: Vec<V3>,
    pub triangles: Vec<[usize; 3]>,
    /// Undirected edges `[a, b]` with `a < b`, sorted lexicographically.
    pub edges: Vec<[usize; 2]>,
    /// `[triangle holding a->b, triangle holding b->a]` per edge.
    pub edge_tris: Vec<[usize; 2]>,
    /// Edge id of side `k` (from corner `k` to corner `k+1`).
    pub tri_edges: Vec<[usize; 3]>,
    /// Neighbour across side `k`, or [`NONE`].
    pub tri_adj: Vec<[usize; 3]>,
    /// `(neighbour, edge id)` sorted by neighbour.
    pub nbrs: Vec<Vec<(usize, usize)>>,
    pub node_tris: Vec<Vec<usize>>,
    pub boundary_node: Vec<bool>,
    /// Closed node loops with the surface on the left.
    pub boundary_loops: Vec<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentFrame {
    pub normal: V3,
    pub b1: V3,
    pub b2: V3,
}

impl TangentFrame {
    /// Angle of the tangential part of `v` measured from `b1`.
    pub fn angle_of(&self, v: &V3) -> f64 {
        v.dot(&self.b2).atan2(v.dot(&self.b1))
    }

    pub fn direction(&self, angle: f64) -> V3 {
        self.b1 * angle.cos() + self.b2 * angle.sin()
    }
}

/// Transport angle per undirected edge, stored for the direction `a -> b`
/// with `a < b`; the reverse direction is the negation.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeTransport {
    pub phi: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryNode {
    pub node: usize,
    pub interior_angle: f64,
    /// Boundary index times four.
    pub quarters: i32,
    /// Alignment direction after the corner pre-rotation.
    pub direction: V3,
    pub u: Complex64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundaryInfo {
    pub nodes: Vec<BoundaryNode>,
    slot: HashMap<usize, usize>,
}

impl BoundaryInfo {
    pub fn get(&self, node: usize) -> Option<&BoundaryNode> {
        self.slot.get(&node).map(|&s| &self.nodes[s])
    }

    /// Sum of boundary indices in quarters.
    pub fn quarter_sum(&self) -> i32 {
        self.nodes.iter().map(|b| b.quarters).sum()
    }
}

fn wrap_pi(a: f64) -> f64 {
    let r = (a + PI).rem_euclid(2.0 * PI) - PI;
    if r <= -PI {
        r + 2.0 * PI
    } else {
        r
    }
}

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    wrap_pi(a)
}

impl TriMesh {
    /// Build a mesh, re-winding triangles so orientations agree with the first one.
    pub fn new(positions: Vec<V3>, mut triangles: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let n = positions.len();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(MeshError::BadIndex { tri: t, node: v, count: n });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::Degenerate(t));
            }
            let [a, b, c] = tri.map(|i| positions[i]);
            let scale = (b - a).norm_squared().max((c - a).norm_squared()).max((c - b).norm_squared());
            if (b - a).cross(&(c - a)).norm() <= 1e-14 * scale || scale == 0.0 {
                return Err(MeshError::Degenerate(t));
            }
        }

        let mut by_edge: HashMap<(usize, usize), Vec<(usize, usize)>> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let list = by_edge.entry((a.min(b), a.max(b))).or_default();
                list.push((t, k));
                if list.len() > 2 {
                    return Err(MeshError::NonManifoldEdge(a.min(b), a.max(b)));
                }
            }
        }

        // Propagate orientation from triangle 0.
        let nt = triangles.len();
        let mut flip = vec![None::<bool>; nt];
        flip[0] = Some(false);
        let mut stack = vec![0usize];
        let directed = |tri: &[usize; 3], k: usize, f: bool| {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            if f {
                (b, a)
            } else {
                (a, b)
            }
        };
        while let Some(t) = stack.pop() {
            let ft = flip[t].unwrap();
            for k in 0..3 {
                let (a, b) = directed(&triangles[t], k, ft);
                for &(s, ks) in &by_edge[&(a.min(b), a.max(b))] {
                    if s == t {
                        continue;
                    }
                    let (c, _) = directed(&triangles[s], ks, false);
                    // Neighbour must traverse the edge as b -> a.
                    let need = c != b;
                    match flip[s] {
                        None => {
                            flip[s] = Some(need);
                            stack.push(s);
                        }
                        Some(f) if f != need => return Err(MeshError::NonOrientable(s)),
                        _ => {}
                    }
                }
            }
        }
        if let Some(t) = flip.iter().position(|f| f.is_none()) {
            return Err(MeshError::Disconnected(t));
        }
        for (t, f) in flip.iter().enumerate() {
            if f == &Some(true) {
                triangles[t].swap(1, 2);
            }
        }

        let mut keys: Vec<(usize, usize)> = by_edge.keys().copied().collect();
        keys.sort_unstable();
        let edges: Vec<[usize; 2]> = keys.iter().map(|&(a, b)| [a, b]).collect();
        let mut nbrs: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (e, &[a, b]) in edges.iter().enumerate() {
            nbrs[a].push((b, e));
            nbrs[b].push((a, e));
        }
        for l in &mut nbrs {
            l.sort_unstable();
        }
        let find = |nbrs: &Vec<Vec<(usize, usize)>>, a: usize, b: usize| -> usize {
            let l = &nbrs[a];
            l[l.binary_search_by_key(&b, |p| p.0).unwrap()].1
        };

        let mut edge_tris = vec![[NONE; 2]; edges.len()];
        let mut tri_edges = vec![[0usize; 3]; nt];
        let mut node_tris = vec![Vec::new(); n];
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let e = find(&nbrs, a, b);
                tri_edges[t][k] = e;
                edge_tris[e][usize::from(a > b)] = t;
                node_tris[a].push(t);
            }
        }
        let mut tri_adj = vec![[NONE; 3]; nt];
        for t in 0..nt {
            for k in 0..3 {
                let [l, r] = edge_tris[tri_edges[t][k]];
                tri_adj[t][k] = if l == t { r } else { l };
            }
        }
        for (v, ts) in node_tris.iter().enumerate() {
            if ts.is_empty() {
                return Err(MeshError::IsolatedNode(v));
            }
        }

        let mut boundary_node = vec![false; n];
        let mut next_on_boundary = HashMap::new();
        for (e, &[a, b]) in edges.iter().enumerate() {
            let [l, r] = edge_tris[e];
            if l == NONE || r == NONE {
                boundary_node[a] = true;
                boundary_node[b] = true;
                // Direction as it appears in its triangle keeps the surface on the left.
                let (from, to) = if l != NONE { (a, b) } else { (b, a) };
                if next_on_boundary.insert(from, to).is_some() {
                    return Err(MeshError::NonManifoldNode(from));
                }
            }
        }

        let mut mesh = TriMesh {
            positions,
            triangles,
            edges,
            edge_tris,
            tri_edges,
            tri_adj,
            nbrs,
            node_tris,
            boundary_node,
            boundary_loops: Vec::new(),
        };
        for v in 0..n {
            if mesh.fan_count(v) != 1 {
                return Err(MeshError::NonManifoldNode(v));
            }
        }

        let mut starts: Vec<usize> = next_on_boundary.keys().copied().collect();
        starts.sort_unstable();
        let mut seen = vec![false; n];
        for s in starts {
            if seen[s] {
                continue;
            }
            let mut lp = vec![s];
            seen[s] = true;
            let mut cur = next_on_boundary[&s];
            while cur != s {
                seen[cur] = true;
                lp.push(cur);
                cur = next_on_boundary[&cur];
            }
            mesh.boundary_loops.push(lp);
        }
        Ok(mesh)
    }

    fn fan_count(&self, v: usize) -> usize {
        let ts = &self.node_tris[v];
        let mut comp: Vec<usize> = (0..ts.len()).collect();
        fn root(c: &mut [usize], mut i: usize) -> usize {
            while c[i] != i {
                c[i] = c[c[i]];
                i = c[i];
            }
            i
        }
        for (i, &t) in ts.iter().enumerate() {
            for k in 0..3 {
                let s = self.tri_adj[t][k];
                let tri = self.triangles[t];
                if s == NONE || (tri[k] != v && tri[(k + 1) % 3] != v) {
                    continue;
                }
                if let Ok(j) = ts.binary_search(&s) {
                    let (a, b) = (root(&mut comp, i), root(&mut comp, j));
                    comp[a] = b;
                }
            }
        }
        (0..ts.len()).filter(|&i| root(&mut comp, i) == i).count()
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        let l = &self.nbrs[a];
        l.binary_search_by_key(&b, |p| p.0).ok().map(|i| l[i].1)
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        self.edge_tris[e].contains(&NONE)
    }

    pub fn boundary_edge_count(&self) -> usize {
        (0..self.edges.len()).filter(|&e| self.is_boundary_edge(e)).count()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.positions.len() as i64 - self.edges.len() as i64 + self.triangles.len() as i64
    }

    pub fn face_normal(&self, t: usize) -> V3 {
        let [a, b, c] = self.triangles[t].map(|i| self.positions[i]);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.positions[i]);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    pub fn barycenter(&self, t: usize) -> V3 {
        let [a, b, c] = self.triangles[t].map(|i| self.positions[i]);
        (a + b + c) / 3.0
    }

    /// Interior angle of triangle `t` at corner `k`.
    pub fn tip_angle(&self, t: usize, k: usize) -> f64 {
        let tri = self.triangles[t];
        let p = self.positions[tri[k]];
        let u = self.positions[tri[(k + 1) % 3]] - p;
        let v = self.positions[tri[(k + 2) % 3]] - p;
        u.cross(&v).norm().atan2(u.dot(&v))
    }

    pub fn corner_of(&self, t: usize, v: usize) -> usize {
        self.triangles[t].iter().position(|&x| x == v).expect("node not in triangle")
    }

    pub fn one_ring_area(&self, v: usize) -> f64 {
        self.node_tris[v].iter().map(|&t| self.area(t)).sum()
    }

    pub fn mean_edge_length(&self) -> f64 {
        let s: f64 = self.edges.iter().map(|&[a, b]| (self.positions[a] - self.positions[b]).norm()).sum();
        s / self.edges.len() as f64
    }

    pub fn diameter(&self) -> f64 {
        let mut lo = V3::repeat(f64::INFINITY);
        let mut hi = V3::repeat(f64::NEG_INFINITY);
        for p in &self.positions {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (hi - lo).norm()
    }

    /// Boundary half-edges `(from, to)` in loop order, surface on the left.
    pub fn boundary_halfedges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for lp in &self.boundary_loops {
            for i in 0..lp.len() {
                out.push((lp[i], lp[(i + 1) % lp.len()]));
            }
        }
        out
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MeshError> {
        load_mesh(path.as_ref())
    }

    pub fn to_obj(&self) -> String {
        let mut s = String::new();
        for p in &self.positions {
            let _ = writeln!(s, "v {} {} {}", p.x, p.y, p.z);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
        }
        s
    }

    pub fn to_off(&self) -> String {
        let mut s = format!("OFF\n{} {} 0\n", self.positions.len(), self.triangles.len());
        for p in &self.positions {
            let _ = writeln!(s, "{} {} {}", p.x, p.y, p.z);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        s
    }
}

fn perr(line: usize, msg: impl Into<String>) -> MeshError {
    MeshError::Parse { line, msg: msg.into() }
}

fn fan(poly: &[usize], out: &mut Vec<[usize; 3]>) {
    for i in 1..poly.len() - 1 {
        out.push([poly[0], poly[i], poly[i + 1]]);
    }
}

pub fn parse_obj(src: &str) -> Result<TriMesh, MeshError> {
    let mut pos = Vec::new();
    let mut tris = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let c: Vec<f64> = it
                    .take(3)
                    .map(|s| s.parse::<f64>().map_err(|e| perr(ln + 1, e.to_string())))
                    .collect::<Result<_, _>>()?;
                if c.len() != 3 {
                    return Err(perr(ln + 1, "vertex needs three coordinates"));
                }
                pos.push(V3::new(c[0], c[1], c[2]));
            }
            Some("f") => {
                let mut poly = Vec::new();
                for tok in it {
                    let head = tok.split('/').next().unwrap_or("");
                    let i: i64 = head.parse().map_err(|_| perr(ln + 1, format!("bad index `{tok}`")))?;
                    let idx = match i {
                        i if i > 0 => i - 1,
                        i if i < 0 => pos.len() as i64 + i,
                        _ => return Err(perr(ln + 1, "index 0 is invalid in OBJ")),
                    };
                    if idx < 0 {
                        return Err(perr(ln + 1, format!("bad index `{tok}`")));
                    }
                    poly.push(idx as usize);
                }
                if poly.len() < 3 {
                    return Err(perr(ln + 1, "face needs at least three nodes"));
                }
                fan(&poly, &mut tris);
            }
            _ => {}
        }
    }
    TriMesh::new(pos, tris)
}

pub fn parse_off(src: &str) -> Result<TriMesh, MeshError> {
    let mut toks = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        for t in line.split('#').next().unwrap_or("").split_whitespace() {
            toks.push((ln + 1, t));
        }
    }
    let mut it = toks.into_iter();
    match it.next() {
        Some((_, "OFF")) => {}
        Some((l, t)) => return Err(perr(l, format!("expected OFF header, found `{t}`"))),
        None => return Err(perr(1, "empty file")),
    }
    let mut num = |what: &str| -> Result<(usize, f64), MeshError> {
        let (l, t) = it.next().ok_or_else(|| perr(0, format!("unexpected end of file reading {what}")))?;
        t.parse::<f64>().map(|v| (l, v)).map_err(|_| perr(l, format!("bad {what} `{t}`")))
    };
    let nv = num("vertex count")?.1 as usize;
    let nf = num("face count")?.1 as usize;
    let _ = num("edge count")?;
    let mut pos = Vec::with_capacity(nv);
    for _ in 0..nv {
        pos.push(V3::new(num("coordinate")?.1, num("coordinate")?.1, num("coordinate")?.1));
    }
    let mut tris = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (l, k) = num("face size")?;
        let k = k as usize;
        if k < 3 {
            return Err(perr(l, "face needs at least three nodes"));
        }
        let mut poly = Vec::with_capacity(k);
        for _ in 0..k {
            let (l, v) = num("face index")?;
            if v < 0.0 || v.fract() != 0.0 {
                return Err(perr(l, format!("bad face index {v}")));
            }
            poly.push(v as usize);
        }
        fan(&poly, &mut tris);
    }
    TriMesh::new(pos, tris)
}

pub fn load_mesh(path: &Path) -> Result<TriMesh, MeshError> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    let src = std::fs::read_to_string(path).map_err(|source| MeshError::Io { path: path.to_path_buf(), source })?;
    match ext.as_str() {
        "obj" => parse_obj(&src),
        "off" => parse_off(&src),
        other => Err(MeshError::Format(other.to_string())),
    }
}

/// Tip-angle weighted vertex normals.
pub fn vertex_normals(mesh: &TriMesh) -> Result<Vec<V3>, MeshError> {
    let mut acc = vec![V3::zeros(); mesh.node_count()];
    for t in 0..mesh.triangles.len() {
        let n = mesh.face_normal(t);
        for k in 0..3 {
            acc[mesh.triangles[t][k]] += n * mesh.tip_angle(t, k);
        }
    }
    acc.into_iter()
        .enumerate()
        .map(|(i, v)| {
            let l = v.norm();
            if l < 1e-12 {
                Err(MeshError::ZeroNormal(i))
            } else {
                Ok(v / l)
            }
        })
        .collect()
}

fn tangential(v: &V3, n: &V3) -> V3 {
    v - n * v.dot(n)
}

/// Frames seeded by the lowest-indexed incident edge.
pub fn build_tangent_frames(mesh: &TriMesh, normals: &[V3]) -> Vec<TangentFrame> {
    (0..mesh.node_count())
        .map(|i| {
            let n = normals[i];
            let p = mesh.positions[i];
            // Incident edge ids grow with the neighbour index.
            let mut b1 = None;
            for &(j, _) in &mesh.nbrs[i] {
                let e = mesh.positions[j] - p;
                let t = tangential(&e, &n);
                if t.norm() > 1e-12 * e.norm() {
                    b1 = Some(t.normalize());
                    break;
                }
            }
            let b1 = b1.unwrap_or_else(|| {
                let a = if n.x.abs() < 0.9 { V3::x() } else { V3::y() };
                tangential(&a, &n).normalize()
            });
            let b2 = n.cross(&b1);
            TangentFrame { normal: n, b1, b2 }
        })
        .collect()
}

pub fn edge_transport_angles(mesh: &TriMesh, frames: &[TangentFrame]) -> Result<EdgeTransport, MeshError> {
    let mut phi = Vec::with_capacity(mesh.edges.len());
    for &[a, b] in &mesh.edges {
        let e = mesh.positions[b] - mesh.positions[a];
        for &v in &[a, b] {
            if tangential(&e, &frames[v].normal).norm() <= 1e-12 * e.norm() {
                return Err(MeshError::EdgeAlongNormal(v, if v == a { b } else { a }));
            }
        }
        phi.push(wrap_pi(frames[b].angle_of(&e) - frames[a].angle_of(&e)));
    }
    Ok(EdgeTransport { phi })
}

impl EdgeTransport {
    /// `phi_ij` for the directed edge `i -> j`.
    pub fn get(&self, mesh: &TriMesh, i: usize, j: usize) -> f64 {
        let e = mesh.edge_between(i, j).expect("not an edge");
        if i < j {
            self.phi[e]
        } else {
            -self.phi[e]
        }
    }
}

/// Boundary index, in quarters, from the interior angle.
pub fn boundary_quarters(angle: f64) -> i32 {
    if angle < 3.0 * FRAC_PI_4 {
        1
    } else if angle <= 5.0 * FRAC_PI_4 {
        0
    } else if angle <= 7.0 * FRAC_PI_4 {
        -1
    } else {
        -2
    }
}

fn outward_normal(mesh: &TriMesh, a: usize, b: usize) -> V3 {
    let e = mesh.edge_between(a, b).unwrap();
    let t = mesh.edge_tris[e].iter().copied().find(|&t| t != NONE).unwrap();
    (mesh.positions[b] - mesh.positions[a]).cross(&mesh.face_normal(t)).normalize()
}

pub fn classify_boundary(mesh: &TriMesh, frames: &[TangentFrame]) -> BoundaryInfo {
    let mut info = BoundaryInfo::default();
    let mut recs = Vec::new();
    for lp in &mesh.boundary_loops {
        let m = lp.len();
        for k in 0..m {
            let (prev, i, next) = (lp[(k + m - 1) % m], lp[k], lp[(k + 1) % m]);
            let angle: f64 = mesh.node_tris[i].iter().map(|&t| mesh.tip_angle(t, mesh.corner_of(t, i))).sum();
            let quarters = boundary_quarters(angle);
            let f = &frames[i];
            let n1 = tangential(&outward_normal(mesh, prev, i), &f.normal);
            let n2 = tangential(&outward_normal(mesh, i, next), &f.normal);
            let s = n1.normalize() + n2.normalize();
            let mut d = if s.norm() > 1e-9 {
                s.normalize()
            } else {
                tangential(&(mesh.positions[i] - mesh.positions[prev]), &f.normal).normalize()
            };
            if quarters.abs() == 1 {
                d = d * FRAC_PI_4.cos() + f.normal.cross(&d) * FRAC_PI_4.sin();
            }
            let u = Complex64::from_polar(1.0, 4.0 * f.angle_of(&d));
            recs.push(BoundaryNode { node: i, interior_angle: angle, quarters, direction: d, u });
        }
    }
    recs.sort_by_key(|b| b.node);
    for (s, b) in recs.iter().enumerate() {
        info.slot.insert(b.node, s);
    }
    info.nodes = recs;
    info
}

/// A mesh with all per-node and per-edge geometric data attached.
#[derive(Clone, Debug)]
pub struct Surface {
    pub mesh: TriMesh,
    pub normals: Vec<V3>,
    pub frames: Vec<TangentFrame>,
    pub transport: EdgeTransport,
    pub boundary: BoundaryInfo,
}

impl Surface {
    pub fn new(mesh: TriMesh) -> Result<Self, MeshError> {
        let normals = vertex_normals(&mesh)?;
        let frames = build_tangent_frames(&mesh, &normals);
        let transport = edge_transport_angles(&mesh, &frames)?;
        let boundary = classify_boundary(&mesh, &frames);
        Ok(Surface { mesh, normals, frames, transport, boundary })
    }

    pub fn phi(&self, i: usize, j: usize) -> f64 {
        self.transport.get(&self.mesh, i, j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> TriMesh {
        let p = vec![
            V3::new(0.0, 0.0, 0.0),
            V3::new(1.0, 0.0, 0.0),
            V3::new(1.0, 1.0, 0.0),
            V3::new(0.0, 1.0, 0.0),
        ];
        TriMesh::new(p, vec![[0, 1, 2], [0, 2, 3]]).unwrap()
    }

    #[test]
    fn unit_square_counts() {
        let m = two_triangles();
        assert_eq!((m.node_count(), m.edges.len(), m.boundary_edge_count()), (4, 5, 4));
        assert_eq!(m.boundary_loops, vec![vec![0, 1, 2, 3]]);
    }

    #[test]
    fn rewinds_inconsistent_triangle() {
        let m = TriMesh::new(two_triangles().positions, vec![[0, 1, 2], [0, 3, 2]]).unwrap();
        assert_eq!(m.triangles[1], [0, 2, 3]);
    }

    #[test]
    fn three_triangles_on_an_edge() {
        let mut p = two_triangles().positions;
        p.push(V3::new(0.5, 0.5, 1.0));
        let err = TriMesh::new(p, vec![[0, 1, 2], [0, 2, 3], [0, 2, 4]]).unwrap_err();
        assert!(matches!(err, MeshError::NonManifoldEdge(0, 2)));
    }

    #[test]
    fn degenerate_rejected() {
        let p = vec![V3::zeros(), V3::new(1.0, 0.0, 0.0), V3::new(2.0, 0.0, 0.0)];
        assert!(matches!(TriMesh::new(p, vec![[0, 1, 2]]), Err(MeshError::Degenerate(0))));
    }

    #[test]
    fn boundary_index_bands() {
        assert_eq!(boundary_quarters(PI / 2.0), 1);
        assert_eq!(boundary_quarters(PI), 0);
        assert_eq!(boundary_quarters(3.0 * FRAC_PI_4), 0);
        assert_eq!(boundary_quarters(5.0 * FRAC_PI_4), 0);
        assert_eq!(boundary_quarters(1.5 * PI), -1);
        assert_eq!(boundary_quarters(7.0 * FRAC_PI_4), -1);
        assert_eq!(boundary_quarters(1.9 * PI), -2);
    }

    #[test]
    fn obj_and_off_parse() {
        let obj = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        let m = parse_obj(obj).unwrap();
        assert_eq!(m.triangles.len(), 2);
        let off = m.to_off();
        let m2 = parse_off(&off).unwrap();
        assert_eq!(m2.triangles, m.triangles);
        assert!(matches!(parse_off("OFF\n3 1 0\n0 0 0\n1 0 0\n"), Err(MeshError::Parse { .. })));
    }

    #[test]
    fn rotated_frame_gives_negative_beta() {
        // Frame at node 1 rotated by beta relative to node 0, both in the plane.
        let m = two_triangles();
        let beta: f64 = 0.3;
        let n = V3::z();
        let f0 = TangentFrame { normal: n, b1: V3::x(), b2: V3::y() };
        let b1 = V3::new(beta.cos(), beta.sin(), 0.0);
        let f1 = TangentFrame { normal: n, b1, b2: n.cross(&b1) };
        let frames = vec![f0, f1, f0, f0];
        let tr = edge_transport_angles(&m, &frames).unwrap();
        assert!((tr.get(&m, 0, 1) + beta).abs() < 1e-15);
        assert!((tr.get(&m, 1, 0) - beta).abs() < 1e-15);
    }
}
