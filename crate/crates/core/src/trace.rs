//! Separatrix tracing: Heun integration in regular triangles, exact hyperbolic
//! arcs in singular triangles, stopping rules and tangential merges.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_8, PI};

use log::{debug, warn};
use num_complex::Complex64 as C;
use serde::{Deserialize, Serialize};

use crate::field::CrossField;
use crate::geom::{centered_quarter, dist3, rotate_between, segment_intersection, to_arr, to_v3, TriFrame};
use crate::hyperbola::{ray_angles, SectorModel};
use crate::mesh::{Surface, NONE, V3};
use crate::singularity::{cross_in_triangle, Singularity};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePoint {
    pub tri: usize,
    pub bary: [f64; 3],
    pub pos: [f64; 3],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    /// Separatrix `k` of a concave boundary corner at mesh node `node`.
    Corner { node: usize, k: usize },
    Port { singularity: usize, port: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    BoundaryExit,
    RepeatCross,
    SingularTriangleTJunction,
    MergedHeteroclinic,
    StepCap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingKind {
    Orthogonal,
    TangentialSame,
    TangentialOpposite,
}

/// Intersection of separatrix `a` (the one being traced) with `b`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossEvent {
    pub a: usize,
    pub seg_a: usize,
    pub t_a: f64,
    pub b: usize,
    pub seg_b: usize,
    pub t_b: f64,
    pub pos: [f64; 3],
    pub kind: CrossingKind,
    /// Acute angle between the two curves.
    pub angle: f64,
    /// `a` ends here.
    pub terminal: bool,
}

impl CrossEvent {
    pub fn involves(&self, s: usize) -> bool {
        self.a == s || self.b == s
    }

    pub fn pair(&self, s: usize, o: usize) -> bool {
        (self.a == s && self.b == o) || (self.a == o && self.b == s)
    }

    /// Arclength-free parameters (`segment + t`) of this event along `s`.
    pub fn params_on(&self, s: usize) -> Vec<f64> {
        let mut v = Vec::new();
        if self.a == s {
            v.push(self.seg_a as f64 + self.t_a);
        }
        if self.b == s {
            v.push(self.seg_b as f64 + self.t_b);
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryHit {
    pub edge: usize,
    /// Position along `edges[edge]` from its first to its second node.
    pub lambda: f64,
    pub vertex: Option<usize>,
    pub tangential: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cursor {
    pub tri: usize,
    /// Position in the triangle frame.
    pub p: [f64; 2],
    /// Heading angle in the triangle frame.
    pub heading: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Separatrix {
    pub id: usize,
    pub origin: Origin,
    pub points: Vec<SurfacePoint>,
    pub termination: Option<Termination>,
    pub boundary_hit: Option<BoundaryHit>,
    pub merged_with: Option<usize>,
    pub end_singularity: Option<usize>,
    /// Same-direction tangential crossings passed through.
    pub tangential_same: usize,
    pub dropped: bool,
    pub steps: usize,
    #[serde(skip)]
    end_cursor: Option<Cursor>,
}

impl Separatrix {
    pub fn positions(&self) -> Vec<[f64; 3]> {
        self.points.iter().map(|p| p.pos).collect()
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| dist3(w[0].pos, w[1].pos)).sum()
    }

    /// Point at parameter `segment + t`.
    pub fn at(&self, param: f64) -> [f64; 3] {
        let n = self.points.len();
        if n == 1 {
            return self.points[0].pos;
        }
        let s = (param.floor() as usize).min(n - 2);
        let t = param - s as f64;
        let (a, b) = (self.points[s].pos, self.points[s + 1].pos);
        [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])]
    }

    /// Sub-polyline between two parameters.
    pub fn slice(&self, from: f64, to: f64) -> Vec<[f64; 3]> {
        let mut out = vec![self.at(from)];
        let first = from.floor() as usize + 1;
        let mut k = first;
        while (k as f64) < to && k < self.points.len() {
            out.push(self.points[k].pos);
            k += 1;
        }
        let end = self.at(to);
        if dist3(*out.last().unwrap(), end) > 0.0 || out.len() == 1 {
            out.push(end);
        }
        out
    }

    /// Parameter of the last point.
    pub fn end_param(&self) -> f64 {
        (self.points.len() - 1) as f64
    }
}

#[derive(Clone, Debug)]
pub struct TraceConfig {
    /// Step length as a fraction of the local mean edge length.
    pub heun_factor: f64,
    pub rays: usize,
    pub tangential_threshold: f64,
    /// Step cap per separatrix, in multiples of the mesh edge count.
    pub step_cap_factor: usize,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig { heun_factor: 0.25, rays: 32, tangential_threshold: FRAC_PI_8, step_cap_factor: 50 }
    }
}

pub enum Next {
    Continue(Cursor),
    Boundary(BoundaryHit),
    Singularity(usize),
}

pub struct Advance {
    pub pts: Vec<SurfacePoint>,
    pub next: Next,
}

/// Polyline produced by [`Tracer::march`].
#[derive(Clone, Debug)]
pub struct Streamline {
    pub points: Vec<SurfacePoint>,
    pub boundary: Option<BoundaryHit>,
    /// Set when the stop callback fired.
    pub stopped: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct TraceResult {
    pub separatrices: Vec<Separatrix>,
    pub events: Vec<CrossEvent>,
    pub warnings: Vec<String>,
}

impl TraceResult {
    /// Crossing records of one separatrix, ordered along it.
    pub fn crossings_of(&self, s: usize) -> Vec<(f64, CrossEvent)> {
        let mut v: Vec<(f64, CrossEvent)> =
            self.events.iter().flat_map(|e| e.params_on(s).into_iter().map(move |p| (p, *e))).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v
    }
}

const VERTEX_EPS: f64 = 1e-10;

pub struct Tracer<'a> {
    pub surface: &'a Surface,
    pub singularities: &'a [Singularity],
    pub cfg: TraceConfig,
    pub frames: Vec<TriFrame>,
    psi: Vec<[f64; 3]>,
    sing_of_tri: Vec<Option<usize>>,
    rays: Vec<f64>,
    tri_scale: Vec<f64>,
}

struct State {
    seps: Vec<Separatrix>,
    events: Vec<CrossEvent>,
    reg: Vec<Vec<(usize, usize)>>,
    warnings: Vec<String>,
    queue: VecDeque<(usize, Cursor)>,
}

enum Stop {
    Done,
}

impl<'a> Tracer<'a> {
    pub fn new(surface: &'a Surface, field: &CrossField, singularities: &'a [Singularity], cfg: TraceConfig) -> Self {
        let mesh = &surface.mesh;
        let nt = mesh.triangles.len();
        let frames: Vec<TriFrame> = (0..nt).map(|t| TriFrame::new(mesh, t)).collect();
        let mut sing_of_tri = vec![None; nt];
        for s in singularities {
            sing_of_tri[s.triangle] = Some(s.id);
        }
        let psi = (0..nt)
            .map(|t| {
                let raw = mesh.triangles[t].map(|v| frames[t].angle_of(&cross_in_triangle(surface, field, v, &frames[t])));
                [raw[0], raw[0] + centered_quarter(raw[1] - raw[0]), raw[0] + centered_quarter(raw[2] - raw[0])]
            })
            .collect();
        let tri_scale = (0..nt)
            .map(|t| {
                let [a, b, c] = mesh.triangles[t].map(|v| mesh.positions[v]);
                ((a - b).norm() + (b - c).norm() + (c - a).norm()) / 3.0
            })
            .collect();
        let rays = ray_angles(cfg.rays.max(8));
        Tracer { surface, singularities, cfg, frames, psi, sing_of_tri, rays, tri_scale }
    }

    pub fn is_singular(&self, t: usize) -> bool {
        self.sing_of_tri[t].is_some()
    }

    /// Cross direction nearest to `heading` at local point `p` of a regular triangle.
    pub fn direction(&self, t: usize, p: [f64; 2], heading: f64) -> f64 {
        let b = self.frames[t].bary(p);
        let ps = self.psi[t];
        let psi = b[0] * ps[0] + b[1] * ps[1] + b[2] * ps[2];
        heading + centered_quarter(psi - heading)
    }

    fn point(&self, t: usize, bary: [f64; 3]) -> SurfacePoint {
        let tri = self.surface.mesh.triangles[t];
        let p = &self.surface.mesh.positions;
        let pos = p[tri[0]] * bary[0] + p[tri[1]] * bary[1] + p[tri[2]] * bary[2];
        SurfacePoint { tri: t, bary, pos: to_arr(&pos) }
    }

    pub fn cursor_at(&self, t: usize, pos: &V3, dir: &V3) -> Cursor {
        let f = &self.frames[t];
        Cursor { tri: t, p: f.to_local(pos), heading: f.angle_of(dir) }
    }

    pub fn surface_point(&self, c: &Cursor) -> SurfacePoint {
        self.point(c.tri, clean_bary(self.frames[c.tri].bary(c.p)))
    }

    /// Triangle containing (or nearest to) `pos`.
    pub fn locate(&self, pos: &V3) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (t, f) in self.frames.iter().enumerate() {
            let d = (pos - f.origin).dot(&f.n).abs();
            let b = f.bary(f.to_local(pos));
            let out = -b.iter().fold(0.0f64, |m, &x| m.min(x));
            let score = d + out * self.tri_scale[t];
            if score < best.0 {
                best = (score, t);
            }
        }
        best.1
    }

    /// Leave triangle `t` at barycentric point `be` on side opposite corner `k`.
    fn leave(&self, t: usize, be: [f64; 3], k: usize, dir: V3) -> Next {
        let mesh = &self.surface.mesh;
        let tri = mesh.triangles[t];
        let (i, j) = ((k + 1) % 3, (k + 2) % 3);
        if be[i] < VERTEX_EPS || be[j] < VERTEX_EPS {
            let v = if be[i] < be[j] { tri[j] } else { tri[i] };
            return self.through_vertex(t, v, dir);
        }
        let side = i;
        let e = mesh.tri_edges[t][side];
        let nb = mesh.tri_adj[t][side];
        if nb == NONE {
            let lambda = if mesh.edges[e][0] == tri[i] { be[j] } else { be[i] };
            let edge_dir = (mesh.positions[tri[j]] - mesh.positions[tri[i]]).normalize();
            let ang = dir.normalize().dot(&edge_dir).abs().min(1.0).acos();
            let tangential = (PI / 2.0 - ang) > PI / 2.0 - self.cfg.tangential_threshold;
            return Next::Boundary(BoundaryHit { edge: e, lambda, vertex: None, tangential });
        }
        let ntri = mesh.triangles[nb];
        let mut bn = [0.0; 3];
        for c in 0..3 {
            if ntri[c] == tri[i] {
                bn[c] = be[i];
            } else if ntri[c] == tri[j] {
                bn[c] = be[j];
            }
        }
        let f = &self.frames[nb];
        let d = rotate_between(&dir, &self.frames[t].n, &f.n);
        Next::Continue(Cursor { tri: nb, p: f.from_bary(bn), heading: f.angle_of(&d) })
    }

    fn through_vertex(&self, from: usize, v: usize, dir: V3) -> Next {
        let mesh = &self.surface.mesh;
        let n0 = self.frames[from].n;
        let mut best: Option<(f64, usize, V3)> = None;
        for &u in &mesh.node_tris[v] {
            let f = &self.frames[u];
            let d = rotate_between(&dir, &n0, &f.n).normalize();
            let tri = mesh.triangles[u];
            let c = mesh.corner_of(u, v);
            let e1 = (mesh.positions[tri[(c + 1) % 3]] - mesh.positions[v]).normalize();
            let e2 = (mesh.positions[tri[(c + 2) % 3]] - mesh.positions[v]).normalize();
            let m = e1.cross(&d).dot(&f.n).min(d.cross(&e2).dot(&f.n));
            if best.is_none_or(|b| m > b.0) {
                best = Some((m, u, d));
            }
        }
        let (m, u, d) = best.expect("vertex has incident triangles");
        if m < -1e-9 && mesh.boundary_node[v] {
            let e = mesh.nbrs[v].iter().map(|&(_, e)| e).find(|&e| mesh.is_boundary_edge(e)).expect("boundary edge");
            let lambda = if mesh.edges[e][0] == v { 0.0 } else { 1.0 };
            return Next::Boundary(BoundaryHit { edge: e, lambda, vertex: Some(v), tangential: false });
        }
        let f = &self.frames[u];
        let c = mesh.corner_of(u, v);
        Next::Continue(Cursor { tri: u, p: f.corners[c], heading: f.angle_of(&d) })
    }

    /// Straight move from `p` toward `q` inside triangle `t`, stopping at its border.
    fn move_to(&self, t: usize, p: [f64; 2], q: [f64; 2], heading: f64) -> Advance {
        let f = &self.frames[t];
        let bp = clean_bary(f.bary(p));
        let mut bq = f.bary(q);
        let mut exit = exit_param(&bp, &bq);
        if let Some((s, k)) = exit {
            if s <= 1e-12 && bp[k] <= 1e-12 {
                // Sliding along the side we sit on: keep the step on that side.
                let (i, j) = ((k + 1) % 3, (k + 2) % 3);
                let e = [f.corners[j][0] - f.corners[i][0], f.corners[j][1] - f.corners[i][1]];
                let l2 = e[0] * e[0] + e[1] * e[1];
                let st = [q[0] - p[0], q[1] - p[1]];
                let a = (st[0] * e[0] + st[1] * e[1]) / l2;
                let q2 = [p[0] + a * e[0], p[1] + a * e[1]];
                if (a * a * l2).sqrt() > 1e-9 * self.tri_scale[t] {
                    bq = f.bary(q2);
                    bq[k] = 0.0;
                    exit = exit_param(&bp, &bq).filter(|&(_, kk)| kk != k);
                }
            }
        }
        let dir = f.direction(heading);
        match exit {
            None => {
                let b = clean_bary(bq);
                Advance { pts: vec![self.point(t, b)], next: Next::Continue(Cursor { tri: t, p: f.from_bary(b), heading }) }
            }
            Some((s, k)) => {
                let mut be = [0.0; 3];
                for c in 0..3 {
                    be[c] = bp[c] + s * (bq[c] - bp[c]);
                }
                be[k] = 0.0;
                let be = clean_bary(be);
                Advance { pts: vec![self.point(t, be)], next: self.leave(t, be, k, dir) }
            }
        }
    }

    fn heun(&self, c: &Cursor, a1: f64, h: f64) -> ([f64; 2], [f64; 2]) {
        let u1 = [a1.cos(), a1.sin()];
        let ps = [c.p[0] + h * u1[0], c.p[1] + h * u1[1]];
        let a2 = self.direction(c.tri, ps, a1);
        let u2 = [a2.cos(), a2.sin()];
        let v = [(u1[0] + u2[0]) / 2.0, (u1[1] + u2[1]) / 2.0];
        ([c.p[0] + h * v[0], c.p[1] + h * v[1]], v)
    }

    fn advance_regular(&self, c: &Cursor) -> Advance {
        let h = self.cfg.heun_factor * self.tri_scale[c.tri];
        let a1 = self.direction(c.tri, c.p, c.heading);
        let (mut q, mut v) = self.heun(c, a1, h);
        // A step that leaves the triangle takes the corrector from the length that
        // reaches the side; move_to then clips along that direction.
        let f = &self.frames[c.tri];
        if let Some((s, _)) = exit_param(&clean_bary(f.bary(c.p)), &f.bary(q)) {
            if s > 1e-9 && s < 1.0 {
                (_, v) = self.heun(c, a1, h * s);
                q = [c.p[0] + h * v[0], c.p[1] + h * v[1]];
            }
        }
        self.move_to(c.tri, c.p, q, v[1].atan2(v[0]))
    }

    fn radial(&self, c: &Cursor) -> Advance {
        let l = 10.0 * self.tri_scale[c.tri];
        let q = [c.p[0] + l * c.heading.cos(), c.p[1] + l * c.heading.sin()];
        self.move_to(c.tri, c.p, q, c.heading)
    }

    fn advance_singular(&self, c: &Cursor, sid: usize) -> Advance {
        let s = &self.singularities[sid];
        let t = c.tri;
        let f = &self.frames[t];
        let center = f.to_local(&to_v3(s.location));
        let p0 = s.port_angles[0];
        let rot = C::from_polar(1.0, -p0);
        let z = C::new(c.p[0] - center[0], c.p[1] - center[1]) * rot;
        let model = SectorModel::new(s.d);
        if z.norm() < 1e-12 * self.tri_scale[t] {
            return Advance { pts: vec![], next: Next::Singularity(sid) };
        }
        let k = model.sector_of(z.arg());
        let n = model.sector_count();
        let hd = C::from_polar(1.0, c.heading - p0);
        let (anchor, dot) = [k, (k + n - 1) % n]
            .into_iter()
            .map(|a| (a, (hd.conj() * model.tangent(z, a)).re))
            .fold((k, f64::NEG_INFINITY), |b, x| if x.1.abs() > b.1.abs() { x } else { b });
        let decreasing = dot > 0.0;
        let (rho, phi) = model.to_conformal(z, anchor);
        let a = rho * rho * phi.sin() * phi.cos();
        if a < 1e-12 * rho * rho {
            if (hd * z.conj()).re < 0.0 {
                let bc = f.bary(center);
                return Advance { pts: vec![self.point(t, clean_bary(bc))], next: Next::Singularity(sid) };
            }
            return self.radial(c);
        }
        let to_local = |w: C| {
            let g = w * rot.conj();
            [center[0] + g.re, center[1] + g.im]
        };
        let inside = |w: C| f.bary(to_local(w)).iter().all(|&x| x >= -1e-13);
        let arc = model.arc(z, anchor, decreasing, &self.rays, inside);
        let mut pts: Vec<SurfacePoint> =
            arc.points.iter().map(|&(_, w)| self.point(t, clean_bary(f.bary(to_local(w))))).collect();
        let &(_, zexit) = arc.points.last().expect("arc has an exit");
        let mut be = f.bary(to_local(zexit));
        let k = (0..3).min_by(|&x, &y| be[x].total_cmp(&be[y])).unwrap();
        be[k] = 0.0;
        let be = clean_bary(be);
        *pts.last_mut().unwrap() = self.point(t, be);
        let mut tan = model.tangent(zexit, anchor);
        if !decreasing {
            tan = -tan;
        }
        let dir = f.direction((tan * rot.conj()).arg());
        Advance { pts, next: self.leave(t, be, k, dir) }
    }

    /// One integration step from `c`.
    pub fn advance(&self, c: &Cursor) -> Advance {
        match self.sing_of_tri[c.tri] {
            Some(sid) => self.advance_singular(c, sid),
            None => self.advance_regular(c),
        }
    }

    /// Follow the field from `start` without stopping rules. `stop` sees each
    /// new segment and may return a parameter in `(0, 1]` at which to end.
    pub fn march(
        &self,
        start: Cursor,
        max_steps: usize,
        mut stop: impl FnMut(&SurfacePoint, &SurfacePoint) -> Option<f64>,
    ) -> Streamline {
        let mut pts = vec![self.surface_point(&start)];
        let mut cur = start;
        for _ in 0..max_steps {
            let adv = self.advance(&cur);
            for np in adv.pts {
                let last = *pts.last().unwrap();
                if let Some(t) = stop(&last, &np) {
                    let pos = lerp(last.pos, np.pos, t);
                    let f = &self.frames[np.tri];
                    pts.push(self.point(np.tri, clean_bary(f.bary(f.to_local(&to_v3(pos))))));
                    return Streamline { points: pts, boundary: None, stopped: true };
                }
                pts.push(np);
            }
            match adv.next {
                Next::Continue(c) => cur = c,
                Next::Boundary(h) => return Streamline { points: pts, boundary: Some(h), stopped: false },
                Next::Singularity(_) => break,
            }
        }
        Streamline { points: pts, boundary: None, stopped: false }
    }

    /// Starting cursors of concave-corner separatrices, by node then `k`.
    pub fn corner_starts(&self) -> Vec<(Origin, Cursor)> {
        let mesh = &self.surface.mesh;
        let mut next_of = vec![NONE; mesh.node_count()];
        for lp in &mesh.boundary_loops {
            for i in 0..lp.len() {
                next_of[lp[i]] = lp[(i + 1) % lp.len()];
            }
        }
        let mut out = Vec::new();
        for b in &self.surface.boundary.nodes {
            if b.quarters >= 0 {
                continue;
            }
            let v = b.node;
            let q = (2 - b.quarters) as usize;
            let e = mesh.edge_between(v, next_of[v]).unwrap();
            let mut t = mesh.edge_tris[e].iter().copied().find(|&t| t != NONE).unwrap();
            let mut acc = 0.0;
            let mut k = 1;
            let mut guard = 0;
            while k < q && guard < mesh.node_tris[v].len() + 1 {
                let c = mesh.corner_of(t, v);
                let tip = mesh.tip_angle(t, c);
                while k < q && acc + tip >= b.interior_angle * k as f64 / q as f64 {
                    let rem = b.interior_angle * k as f64 / q as f64 - acc;
                    let tri = mesh.triangles[t];
                    let e1 = (mesh.positions[tri[(c + 1) % 3]] - mesh.positions[v]).normalize();
                    let n = self.frames[t].n;
                    let d = e1 * rem.cos() + n.cross(&e1) * rem.sin();
                    let f = &self.frames[t];
                    out.push((Origin::Corner { node: v, k: k - 1 }, Cursor { tri: t, p: f.corners[c], heading: f.angle_of(&d) }));
                    k += 1;
                }
                acc += tip;
                let nb = mesh.tri_adj[t][(c + 2) % 3];
                if nb == NONE {
                    break;
                }
                t = nb;
                guard += 1;
            }
        }
        out
    }

    pub fn port_starts(&self) -> Vec<(Origin, Cursor)> {
        let mut sings: Vec<&Singularity> = self.singularities.iter().collect();
        sings.sort_by_key(|s| (s.triangle, s.id));
        let mut out = Vec::new();
        for s in sings {
            let f = &self.frames[s.triangle];
            let p = f.to_local(&to_v3(s.location));
            for (k, &a) in s.port_angles.iter().enumerate() {
                out.push((Origin::Port { singularity: s.id, port: k }, Cursor { tri: s.triangle, p, heading: a }));
            }
        }
        out
    }

    /// Trace every separatrix in the fixed global order.
    pub fn trace_all(&self) -> TraceResult {
        let starts: Vec<(Origin, Cursor)> = self.corner_starts().into_iter().chain(self.port_starts()).collect();
        let mut st = State {
            seps: Vec::new(),
            events: Vec::new(),
            reg: vec![Vec::new(); self.frames.len()],
            warnings: Vec::new(),
            queue: VecDeque::new(),
        };
        for (id, &(origin, cur)) in starts.iter().enumerate() {
            st.seps.push(Separatrix {
                id,
                origin,
                points: vec![self.surface_point(&cur)],
                termination: None,
                boundary_hit: None,
                merged_with: None,
                end_singularity: None,
                tangential_same: 0,
                dropped: false,
                steps: 0,
                end_cursor: None,
            });
            st.queue.push_back((id, cur));
        }
        while let Some((id, cur)) = st.queue.pop_front() {
            self.run(&mut st, id, cur);
        }
        TraceResult { separatrices: st.seps, events: st.events, warnings: st.warnings }
    }

    fn run(&self, st: &mut State, id: usize, start: Cursor) {
        let cap = self.cfg.step_cap_factor * self.surface.mesh.edges.len();
        let mut cur = start;
        loop {
            if st.seps[id].steps >= cap {
                self.step_cap(st, id);
                return;
            }
            let radial_start = st.seps[id].steps == 0 && matches!(st.seps[id].origin, Origin::Port { .. });
            st.seps[id].steps += 1;
            let adv = if radial_start { self.radial(&cur) } else { self.advance(&cur) };
            for np in adv.pts {
                if let Err(Stop::Done) = self.add_point(st, id, np) {
                    return;
                }
            }
            match adv.next {
                Next::Continue(c) => cur = c,
                Next::Boundary(h) => {
                    let s = &mut st.seps[id];
                    s.termination = Some(Termination::BoundaryExit);
                    s.boundary_hit = Some(h);
                    if h.tangential {
                        debug!("separatrix {id} meets the boundary at a shallow angle");
                    }
                    return;
                }
                Next::Singularity(sid) => {
                    let sg = &self.singularities[sid];
                    let f = &self.frames[sg.triangle];
                    let np = self.point(sg.triangle, clean_bary(f.bary(f.to_local(&to_v3(sg.location)))));
                    if let Err(Stop::Done) = self.add_point(st, id, np) {
                        return;
                    }
                    let s = &mut st.seps[id];
                    s.termination = Some(Termination::MergedHeteroclinic);
                    s.end_singularity = Some(sid);
                    return;
                }
            }
        }
    }

    fn add_point(&self, st: &mut State, id: usize, np: SurfacePoint) -> Result<(), Stop> {
        let last = *st.seps[id].points.last().unwrap();
        let t = np.tri;
        if dist3(last.pos, np.pos) <= 1e-14 * self.tri_scale[t] {
            return Ok(());
        }
        let seg = st.seps[id].points.len() - 1;
        let f = &self.frames[t];
        let (a2, b2) = (f.to_local(&to_v3(last.pos)), f.to_local(&to_v3(np.pos)));
        let mut hits: Vec<(f64, usize, usize, f64)> = Vec::new();
        for &(o, os) in &st.reg[t] {
            if o == id && os + 1 >= seg {
                continue;
            }
            let op = &st.seps[o].points;
            let (oa, ob) = (f.to_local(&to_v3(op[os].pos)), f.to_local(&to_v3(op[os + 1].pos)));
            if let Some((tt, ss)) = segment_intersection(a2, b2, oa, ob) {
                if tt > 1e-9 && tt <= 1.0 + 1e-12 && (-1e-12..=1.0 + 1e-12).contains(&ss) {
                    hits.push((tt.min(1.0), o, os, ss.clamp(0.0, 1.0)));
                }
            }
        }
        hits.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
        let tol = 1e-9 * self.tri_scale[t];
        let mut taken: Vec<(usize, [f64; 3])> = Vec::new();
        for (tt, o, os, ss) in hits {
            let pos = lerp(last.pos, np.pos, tt);
            if taken.iter().any(|&(q, p)| q == o && dist3(p, pos) < tol) {
                continue;
            }
            taken.push((o, pos));
            let op = &st.seps[o].points;
            let (oa, ob) = (f.to_local(&to_v3(op[os].pos)), f.to_local(&to_v3(op[os + 1].pos)));
            let du = unit2([b2[0] - a2[0], b2[1] - a2[1]]);
            let dv = unit2([ob[0] - oa[0], ob[1] - oa[1]]);
            let dot = du[0] * dv[0] + du[1] * dv[1];
            let angle = dot.abs().min(1.0).acos();
            let kind = if angle < self.cfg.tangential_threshold {
                if dot < 0.0 {
                    CrossingKind::TangentialOpposite
                } else {
                    CrossingKind::TangentialSame
                }
            } else {
                CrossingKind::Orthogonal
            };
            let ev = CrossEvent { a: id, seg_a: seg, t_a: tt, b: o, seg_b: os, t_b: ss, pos, kind, angle, terminal: false };
            if kind == CrossingKind::TangentialOpposite && o != id {
                self.finish_at(st, id, t, pos, du, ev, Termination::MergedHeteroclinic);
                st.seps[id].merged_with = Some(o);
                self.merge_into(st, id, o, os, ss, pos);
                return Err(Stop::Done);
            }
            if let Some(sid) = self.sing_of_tri[t] {
                let from_here = matches!(st.seps[o].origin, Origin::Port { singularity, .. } if singularity == sid);
                if from_here && os == 0 && kind == CrossingKind::Orthogonal {
                    self.finish_at(st, id, t, pos, du, ev, Termination::SingularTriangleTJunction);
                    return Err(Stop::Done);
                }
            }
            if st.events.iter().any(|e| e.pair(id, o)) {
                self.finish_at(st, id, t, pos, du, ev, Termination::RepeatCross);
                return Err(Stop::Done);
            }
            if kind == CrossingKind::TangentialSame {
                st.seps[id].tangential_same += 1;
            }
            st.events.push(ev);
        }
        st.seps[id].points.push(np);
        st.reg[t].push((id, seg));
        Ok(())
    }

    fn finish_at(&self, st: &mut State, id: usize, t: usize, pos: [f64; 3], du: [f64; 2], mut ev: CrossEvent, term: Termination) {
        let f = &self.frames[t];
        let local = f.to_local(&to_v3(pos));
        let seg = st.seps[id].points.len() - 1;
        st.seps[id].points.push(self.point(t, clean_bary(f.bary(local))));
        st.reg[t].push((id, seg));
        ev.terminal = true;
        st.events.push(ev);
        let s = &mut st.seps[id];
        s.termination = Some(term);
        s.end_cursor = Some(Cursor { tri: t, p: local, heading: du[1].atan2(du[0]) });
    }

    fn merge_into(&self, st: &mut State, id: usize, o: usize, os: usize, ss: f64, pos: [f64; 3]) {
        let resumes = self.cut(st, o, os, ss, pos);
        let s = &mut st.seps[o];
        s.termination = Some(Termination::MergedHeteroclinic);
        s.merged_with = Some(id);
        s.boundary_hit = None;
        s.end_singularity = None;
        debug!("separatrices {id} and {o} merged");
        self.requeue(st, resumes);
    }

    /// Truncate `o` at `(os, ss)` and drop everything recorded on the removed tail.
    /// Returns separatrices whose termination no longer holds.
    fn cut(&self, st: &mut State, o: usize, os: usize, ss: f64, pos: [f64; 3]) -> Vec<usize> {
        let cutp = os as f64 + ss;
        let tri = st.seps[o].points[os + 1].tri;
        st.seps[o].points.truncate(os + 1);
        let f = &self.frames[tri];
        let np = self.point(tri, clean_bary(f.bary(f.to_local(&to_v3(pos)))));
        if dist3(st.seps[o].points[os].pos, np.pos) > 0.0 {
            st.seps[o].points.push(np);
        }
        st.queue.retain(|&(q, _)| q != o);
        let mut resumes = Vec::new();
        let mut reopened = Vec::new();
        let mut kept = Vec::with_capacity(st.events.len());
        for e in std::mem::take(&mut st.events) {
            let beyond = e.params_on(o).iter().any(|&p| p > cutp + 1e-12);
            if beyond {
                if e.terminal && e.a != o {
                    resumes.push(e.a);
                } else if e.terminal && e.kind == CrossingKind::TangentialOpposite && e.b != o {
                    // `o` had merged into `e.b`, which was truncated there and now ends in the open.
                    reopened.push(e.b);
                }
            } else {
                kept.push(e);
            }
        }
        st.events = kept;
        // A repeat-cross stop against `o` needs an earlier crossing that may be gone now.
        for r in 0..st.seps.len() {
            if r == o || st.seps[r].termination != Some(Termination::RepeatCross) {
                continue;
            }
            let term = st.events.iter().position(|e| e.terminal && e.a == r && e.b == o);
            if let Some(ti) = term {
                let earlier = st.events.iter().enumerate().any(|(i, e)| i != ti && e.pair(r, o));
                if !earlier {
                    st.events.remove(ti);
                    resumes.push(r);
                }
            }
        }
        for &r in &resumes {
            st.events.retain(|e| !(e.terminal && e.a == r));
            st.seps[r].termination = None;
            st.seps[r].merged_with = None;
        }
        for r in reopened {
            let pts = &st.seps[r].points;
            if pts.len() < 2 || st.seps[r].merged_with != Some(o) {
                continue;
            }
            let (a, b) = (pts[pts.len() - 2], pts[pts.len() - 1]);
            let f = &self.frames[b.tri];
            let c = Cursor { tri: b.tri, p: f.to_local(&to_v3(b.pos)), heading: f.angle_of(&(to_v3(b.pos) - to_v3(a.pos))) };
            let s = &mut st.seps[r];
            s.termination = None;
            s.merged_with = None;
            s.end_cursor = Some(c);
            resumes.push(r);
        }
        self.rebuild_registry(st);
        resumes.sort_unstable();
        resumes.dedup();
        resumes
    }

    fn requeue(&self, st: &mut State, resumes: Vec<usize>) {
        for r in resumes.into_iter().rev() {
            if let Some(c) = st.seps[r].end_cursor.take() {
                debug!("resuming separatrix {r}");
                st.queue.push_front((r, c));
            }
        }
    }

    fn rebuild_registry(&self, st: &mut State) {
        for r in st.reg.iter_mut() {
            r.clear();
        }
        for s in &st.seps {
            for i in 1..s.points.len() {
                st.reg[s.points[i].tri].push((s.id, i - 1));
            }
        }
    }

    fn step_cap(&self, st: &mut State, id: usize) {
        let last = st
            .events
            .iter()
            .enumerate()
            .flat_map(|(i, e)| e.params_on(id).into_iter().map(move |p| (p, i)))
            .max_by(|a, b| a.0.total_cmp(&b.0));
        match last {
            Some((p, i)) => {
                let pos = st.events[i].pos;
                let (os, ss) = (p.floor() as usize, p - p.floor());
                let (os, ss) = if os + 1 >= st.seps[id].points.len() { (os - 1, 1.0) } else { (os, ss) };
                let resumes = self.cut(st, id, os, ss, pos);
                for e in st.events.iter_mut() {
                    if e.a == id && e.pos == pos {
                        e.terminal = true;
                    }
                }
                st.seps[id].termination = Some(Termination::StepCap);
                let msg = format!("separatrix {id} hit the step cap; truncated at its last crossing");
                warn!("{msg}");
                st.warnings.push(msg);
                self.requeue(st, resumes);
            }
            None => {
                st.seps[id].points.truncate(1);
                st.seps[id].dropped = true;
                st.seps[id].termination = Some(Termination::StepCap);
                self.rebuild_registry(st);
                let msg = format!("separatrix {id} hit the step cap without crossings; dropped");
                warn!("{msg}");
                st.warnings.push(msg);
            }
        }
    }
}

fn exit_param(bp: &[f64; 3], bq: &[f64; 3]) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for k in 0..3 {
        if bq[k] < 0.0 {
            let a = bp[k].max(0.0);
            let s = a / (a - bq[k]);
            if best.is_none_or(|b| s < b.0) {
                best = Some((s, k));
            }
        }
    }
    best
}

fn clean_bary(mut b: [f64; 3]) -> [f64; 3] {
    for x in b.iter_mut() {
        if *x < 0.0 {
            *x = 0.0;
        }
    }
    let s = b[0] + b[1] + b[2];
    [b[0] / s, b[1] / s, b[2] / s]
}

fn unit2(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

pub fn lerp(a: [f64; 3], b: [f64; 3], t: f64) -> [f64; 3] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2])]
}

/// Convenience wrapper: build a tracer and trace all separatrices.
pub fn trace_separatrices(
    surface: &Surface,
    field: &CrossField,
    singularities: &[Singularity],
    cfg: &TraceConfig,
) -> TraceResult {
    Tracer::new(surface, field, singularities, cfg.clone()).trace_all()
}
