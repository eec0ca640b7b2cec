//! Hand-built planar T-layouts and a random refinement generator.
//!
//! Layouts are described as an arrangement: a counterclockwise boundary
//! polygon, singular points and straight separatrix segments. Segments are
//! clipped to the polygon and split wherever they meet; interior meeting
//! points become crossings or T-junctions depending on their degree.

use std::f64::consts::PI;

use crate::geom::{cross2, polyline_length, segment_intersection, sub2};
use crate::layout::{Layout, NodeKind, SingularityRecord};

const EPS: f64 = 1e-9;

#[derive(Clone, Debug, Default)]
pub struct Arrangement {
    /// Polygon corners, counterclockwise, with their boundary index in quarters.
    pub boundary: Vec<([f64; 2], i32)>,
    pub singularities: Vec<([f64; 2], i32)>,
    pub segments: Vec<([f64; 2], [f64; 2])>,
}

fn lerp2(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

fn close(a: [f64; 2], b: [f64; 2]) -> bool {
    (a[0] - b[0]).hypot(a[1] - b[1]) < EPS
}

/// Parameter of `p` on segment `ab` when it lies on it.
fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Option<f64> {
    let d = sub2(b, a);
    let l2 = d[0] * d[0] + d[1] * d[1];
    let t = ((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / l2;
    if (-EPS..=1.0 + EPS).contains(&t) && cross2(d, sub2(p, a)).abs() / l2.sqrt() < EPS {
        Some(t.clamp(0.0, 1.0))
    } else {
        None
    }
}

/// Proper or touching intersection of two segments, as parameters on both.
fn seg_hit(p: [f64; 2], q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Option<(f64, f64)> {
    let (s, t) = segment_intersection(p, q, a, b)?;
    let r = (-EPS..=1.0 + EPS).contains(&s) && (-EPS..=1.0 + EPS).contains(&t);
    r.then(|| (s.clamp(0.0, 1.0), t.clamp(0.0, 1.0)))
}

fn inside(poly: &[[f64; 2]], p: [f64; 2]) -> bool {
    let mut c = false;
    for i in 0..poly.len() {
        let (a, b) = (poly[i], poly[(i + 1) % poly.len()]);
        if on_segment(p, a, b).is_some() {
            return false;
        }
        if (a[1] > p[1]) != (b[1] > p[1]) && p[0] < a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]) {
            c = !c;
        }
    }
    c
}

impl Arrangement {
    pub fn polygon(corners: &[[f64; 2]]) -> Self {
        let n = corners.len();
        let boundary = (0..n)
            .map(|i| {
                let (p, a, b) = (corners[(i + n - 1) % n], corners[i], corners[(i + 1) % n]);
                let turn = cross2(sub2(a, p), sub2(b, a)).atan2(
                    (a[0] - p[0]) * (b[0] - a[0]) + (a[1] - p[1]) * (b[1] - a[1]),
                );
                let interior = PI - turn;
                (corners[i], crate::mesh::boundary_quarters(interior))
            })
            .collect();
        Arrangement { boundary, ..Default::default() }
    }

    pub fn singularity(&mut self, p: [f64; 2], d: i32) -> &mut Self {
        self.singularities.push((p, d));
        self
    }

    pub fn segment(&mut self, a: [f64; 2], b: [f64; 2]) -> &mut Self {
        self.segments.push((a, b));
        self
    }

    /// Ray from `a` toward `dir`, stopped by the boundary.
    pub fn ray(&mut self, a: [f64; 2], dir: [f64; 2]) -> &mut Self {
        let far = [a[0] + 1e3 * dir[0], a[1] + 1e3 * dir[1]];
        self.segment(a, far)
    }

    fn clipped(&self) -> Vec<([f64; 2], [f64; 2])> {
        let poly: Vec<[f64; 2]> = self.boundary.iter().map(|b| b.0).collect();
        let n = poly.len();
        self.segments
            .iter()
            .filter_map(|&(a, b)| {
                let mut hits: Vec<f64> = Vec::new();
                for i in 0..n {
                    let (p, q) = (poly[i], poly[(i + 1) % n]);
                    if let Some((s, _)) = seg_hit(a, b, p, q) {
                        hits.push(s);
                    }
                    if let Some(s) = on_segment(p, a, b) {
                        hits.push(s);
                    }
                }
                hits.sort_by(f64::total_cmp);
                hits.dedup_by(|x, y| (*x - *y).abs() < EPS);
                let (s0, s1) = if inside(&poly, a) {
                    (0.0, hits.first().copied().unwrap_or(1.0))
                } else {
                    let s0 = *hits.first()?;
                    let s1 = hits.iter().copied().find(|&s| s > s0 + EPS).unwrap_or(1.0);
                    (s0, s1)
                };
                (s1 > s0 + EPS).then(|| (lerp2(a, b, s0), lerp2(a, b, s1)))
            })
            .collect()
    }

    /// Resolve the arrangement into a layout (not validated).
    pub fn build(&self) -> Layout {
        let segs = self.clipped();
        let poly: Vec<[f64; 2]> = self.boundary.iter().map(|b| b.0).collect();
        let nb = poly.len();
        // Lines: boundary edges first, then segments; each collects split parameters.
        let mut lines: Vec<([f64; 2], [f64; 2], bool)> = (0..nb).map(|i| (poly[i], poly[(i + 1) % nb], true)).collect();
        lines.extend(segs.iter().map(|&(a, b)| (a, b, false)));
        let mut params: Vec<Vec<f64>> = vec![vec![0.0, 1.0]; lines.len()];
        for i in 0..lines.len() {
            for j in 0..lines.len() {
                if i == j {
                    continue;
                }
                let (a, b, _) = lines[i];
                let (p, q, _) = lines[j];
                if let Some((s, _)) = seg_hit(a, b, p, q) {
                    params[i].push(s);
                }
                for x in [p, q] {
                    if let Some(s) = on_segment(x, a, b) {
                        params[i].push(s);
                    }
                }
            }
            for &(x, _) in &self.singularities {
                let (a, b, _) = lines[i];
                if let Some(s) = on_segment(x, a, b) {
                    params[i].push(s);
                }
            }
        }
        let mut l = Layout::empty(1);
        let find_or_add = |l: &mut Layout, p: [f64; 2], boundary: bool| -> usize {
            if let Some(v) = l.nodes.iter().position(|n| close([n.xyz[0], n.xyz[1]], p)) {
                if boundary {
                    l.nodes[v].boundary = true;
                }
                return v;
            }
            l.add_node(NodeKind::Crossing, [p[0], p[1], 0.0], [0.0, 0.0, 1.0], 0, boundary)
        };
        for (k, &(p, d)) in self.singularities.iter().enumerate() {
            let v = find_or_add(&mut l, p, false);
            l.nodes[v].kind = NodeKind::Singularity;
            l.nodes[v].quarters = d;
            l.nodes[v].singularity = Some(k);
            l.singularities.push(SingularityRecord {
                id: k,
                d,
                index: d as f64 / 4.0,
                location: [p[0], p[1], 0.0],
                ports: Vec::new(),
            });
        }
        for &(p, q) in &self.boundary {
            let v = find_or_add(&mut l, p, true);
            l.nodes[v].quarters = q;
        }
        for (i, &(a, b, bnd)) in lines.iter().enumerate() {
            let mut ps = params[i].clone();
            ps.sort_by(f64::total_cmp);
            ps.dedup_by(|x, y| (*x - *y).abs() * (b[0] - a[0]).hypot(b[1] - a[1]) < EPS);
            for w in ps.windows(2) {
                let (pa, pb) = (lerp2(a, b, w[0]), lerp2(a, b, w[1]));
                let on_b = |p: [f64; 2]| bnd || !inside(&poly, p);
                let va = find_or_add(&mut l, pa, on_b(pa));
                let vb = find_or_add(&mut l, pb, on_b(pb));
                if va == vb {
                    continue;
                }
                let poly3 = (0..=4)
                    .map(|k| {
                        let p = lerp2(pa, pb, k as f64 / 4.0);
                        [p[0], p[1], 0.0]
                    })
                    .collect();
                let e = l.push_edge(va, vb, poly3, if bnd { None } else { Some(i - nb) }, bnd);
                l.nodes[va].rotation.push(2 * e);
                l.nodes[vb].rotation.push(2 * e + 1);
            }
        }
        finish(&mut l);
        l
    }
}

/// Order rotations, assign corner values by angle and set kinds.
pub fn finish(l: &mut Layout) {
    l.recompute_scale();
    l.sort_rotations();
    for v in 0..l.nodes.len() {
        if !l.nodes[v].alive {
            continue;
        }
        if l.nodes[v].boundary {
            l.mark_exterior(v);
        } else {
            let d = l.nodes[v].rotation.len();
            l.nodes[v].sectors = vec![0; d];
        }
        l.assign_sectors_by_angle(v);
    }
    l.dissolve_all();
    l.recompute_kinds();
    l.compact();
}

/// Rectangle split by full grid lines at the given coordinates.
pub fn grid_lines(xs: &[f64], ys: &[f64]) -> Layout {
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    let (y0, y1) = (ys[0], ys[ys.len() - 1]);
    let mut a = Arrangement::polygon(&[[x0, y0], [x1, y0], [x1, y1], [x0, y1]]);
    for &x in &xs[1..xs.len() - 1] {
        a.segment([x, y0 - 1.0], [x, y1 + 1.0]);
    }
    for &y in &ys[1..ys.len() - 1] {
        a.segment([x0 - 1.0, y], [x1 + 1.0, y]);
    }
    a.build()
}

/// `nx` by `ny` grid of square components.
pub fn grid(nx: usize, ny: usize, cell: f64) -> Layout {
    let xs: Vec<f64> = (0..=nx).map(|i| i as f64 * cell).collect();
    let ys: Vec<f64> = (0..=ny).map(|j| j as f64 * cell).collect();
    grid_lines(&xs, &ys)
}

/// Three rows of three components with a thin middle row.
pub fn three_strip(thin: f64) -> Layout {
    grid_lines(&[0.0, 1.0, 2.0, 3.0], &[0.0, 1.0, 1.0 + thin, 2.0 + thin])
}

/// Three rectangles meeting at one T-junction.
pub fn three_rectangles() -> Layout {
    let mut a = Arrangement::polygon(&[[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0]]);
    a.segment([1.0, -1.0], [1.0, 2.0]).segment([1.0, 0.5], [3.0, 0.5]);
    a.build()
}

fn hexagon() -> Arrangement {
    Arrangement::polygon(&[[4.0, 0.0], [2.0, 3.0], [-2.0, 3.0], [-4.0, 0.0], [-2.0, -3.0], [2.0, -3.0]])
}

/// Two valence-5 singularities offset by `2 delta` across a thin zip component.
pub fn misaligned_pair(delta: f64) -> Layout {
    let (ax, ay, bx, by) = (-1.0, -delta, 1.0, delta);
    let mut a = hexagon();
    a.singularity([ax, ay], -1).singularity([bx, by], -1);
    a.segment([ax, ay], [ax, 5.0])
        .segment([ax, ay], [ax, -5.0])
        .ray([ax, ay], [-1.0, 0.5])
        .ray([ax, ay], [-1.0, -1.0])
        .segment([ax, ay], [bx, ay]);
    a.segment([bx, by], [bx, 5.0])
        .segment([bx, by], [bx, -5.0])
        .ray([bx, by], [1.0, -0.5])
        .ray([bx, by], [1.0, 1.0])
        .segment([bx, by], [ax, by]);
    a.build()
}

/// Two singularities joined directly by one separatrix.
pub fn aligned_pair() -> Layout {
    let mut a = hexagon();
    a.singularity([-1.0, 0.0], -1).singularity([1.0, 0.0], -1);
    a.segment([-1.0, 0.0], [1.0, 0.0]);
    for (p, dirs) in [([-1.0, 0.0], [[0.0, 1.0], [0.0, -1.0], [-1.0, 0.5], [-1.0, -1.0]]), ([1.0, 0.0], [[0.0, 1.0], [0.0, -1.0], [1.0, -0.5], [1.0, 1.0]])] {
        for d in dirs {
            a.ray(p, d);
        }
    }
    a.build()
}

/// Regular polygon with one central singularity joined to every edge midpoint.
pub fn star(sides: usize) -> Layout {
    let corners: Vec<[f64; 2]> = (0..sides)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / sides as f64;
            [t.cos(), t.sin()]
        })
        .collect();
    let mut a = Arrangement::polygon(&corners);
    a.singularity([0.0, 0.0], 4 - sides as i32);
    for i in 0..sides {
        let (p, q) = (corners[i], corners[(i + 1) % sides]);
        a.segment([0.0, 0.0], [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0]);
    }
    a.build()
}

/// Chord ending at two same-orientation T-junctions on each side.
pub fn t_ladder() -> Layout {
    let mut a = Arrangement::polygon(&[[0.0, 0.0], [3.0, 0.0], [3.0, 3.0], [0.0, 3.0]]);
    a.segment([1.0, -1.0], [1.0, 4.0]).segment([2.0, -1.0], [2.0, 4.0]);
    a.segment([1.0, 1.0], [2.0, 1.0]).segment([1.0, 2.0], [2.0, 2.0]);
    a.build()
}

/// Chord ending at a single T-junction opposite a plain boundary node.
pub fn t_single() -> Layout {
    let mut a = Arrangement::polygon(&[[0.0, 0.0], [3.0, 0.0], [3.0, 2.0], [0.0, 2.0]]);
    a.segment([1.0, -1.0], [1.0, 3.0]).segment([2.0, -1.0], [2.0, 3.0]);
    a.segment([1.0, 1.0], [2.0, 1.0]);
    a.build()
}

/// Point of the Coons patch of face `f` at `(s, t)`, where side 0 is `t = 0`
/// running with `s`, and side 2 is `t = 1`.
fn coons(sides: &[Vec<[f64; 3]>; 4], s: f64, t: f64) -> [f64; 3] {
    let at = |p: &[[f64; 3]], u: f64| {
        let total = polyline_length(p);
        let mut want = u.clamp(0.0, 1.0) * total;
        for w in p.windows(2) {
            let l = crate::geom::dist3(w[0], w[1]);
            if want <= l || l == 0.0 && want <= 0.0 {
                let r = if l > 0.0 { want / l } else { 0.0 };
                return [w[0][0] + r * (w[1][0] - w[0][0]), w[0][1] + r * (w[1][1] - w[0][1]), w[0][2] + r * (w[1][2] - w[0][2])];
            }
            want -= l;
        }
        p[p.len() - 1]
    };
    // Bottom runs along s, top is side 2 reversed, left is side 3 reversed, right is side 1.
    let bottom = at(&sides[0], s);
    let top = at(&sides[2], 1.0 - s);
    let right = at(&sides[1], t);
    let left = at(&sides[3], 1.0 - t);
    let (c00, c10, c11, c01) = (sides[0][0], sides[1][0], sides[2][0], sides[3][0]);
    let mut out = [0.0; 3];
    for k in 0..3 {
        out[k] = (1.0 - t) * bottom[k] + t * top[k] + (1.0 - s) * left[k] + s * right[k]
            - ((1.0 - s) * (1.0 - t) * c00[k] + s * (1.0 - t) * c10[k] + s * t * c11[k] + (1.0 - s) * t * c01[k]);
    }
    out
}

/// Locate arclength fraction `u` on a face side: `(half-edge, segment, t)`.
fn locate_on_side(l: &Layout, side: &[usize], u: f64) -> (usize, usize, f64) {
    let total = l.side_length(side);
    let mut want = u * total;
    for &h in side {
        let p = l.polyline_of(h);
        for (k, w) in p.windows(2).enumerate() {
            let d = crate::geom::dist3(w[0], w[1]);
            if want <= d {
                return (h, k, if d > 0.0 { want / d } else { 0.0 });
            }
            want -= d;
        }
    }
    let h = side[side.len() - 1];
    (h, l.polyline_of(h).len() - 2, 1.0)
}

/// Split a random component along a Coons iso-curve between opposite sides.
/// `uniform` yields samples in `[0, 1)`. Returns false when the split would
/// land too close to a polyline vertex.
pub fn refine_once(l: &mut Layout, uniform: &mut impl FnMut() -> f64) -> bool {
    let faces: Vec<usize> = l.interior_faces().map(|f| f.id).collect();
    if faces.is_empty() {
        return false;
    }
    let pick = |n: usize, u: f64| ((u * n as f64) as usize).min(n - 1);
    let f = faces[pick(faces.len(), uniform())];
    let axis = pick(2, uniform());
    let s = 0.2 + 0.6 * uniform();
    let sides = l.faces[f].sides.clone().unwrap();
    let rot = |k: usize| sides[(axis + k) % 4].clone();
    let sides_r = [rot(0), rot(1), rot(2), rot(3)];
    let polys: [Vec<[f64; 3]>; 4] = std::array::from_fn(|k| {
        let mut out: Vec<[f64; 3]> = Vec::new();
        for &h in &sides_r[k] {
            let p = l.polyline_of(h);
            if out.is_empty() {
                out.extend(p);
            } else {
                out.extend_from_slice(&p[1..]);
            }
        }
        out
    });
    let (h0, k0, t0) = locate_on_side(l, &sides_r[0], s);
    let (h2, k2, t2) = locate_on_side(l, &sides_r[2], 1.0 - s);
    let min_gap = 0.02;
    if !(min_gap..=1.0 - min_gap).contains(&t0) || !(min_gap..=1.0 - min_gap).contains(&t2) {
        return false;
    }
    let split = |l: &mut Layout, h: usize, k: usize, t: f64| {
        let e = h >> 1;
        let n = l.edges[e].polyline.len();
        // Convert to the edge's own orientation.
        let (seg, tt) = if h & 1 == 0 { (k, t) } else { (n - 2 - k, 1.0 - t) };
        l.split_edge(e, seg, tt)
    };
    let a = split(l, h0, k0, t0);
    let b = split(l, h2, k2, t2);
    let poly: Vec<[f64; 3]> = (0..=8).map(|j| coons(&polys, s, j as f64 / 8.0)).collect();
    l.add_edge(a, b, poly, None, false);
    l.recompute_kinds();
    l.compact();
    true
}

/// Random base layout followed by `steps` refinements.
pub fn random_layout(uniform: &mut impl FnMut() -> f64, steps: usize) -> Layout {
    let pick = |n: usize, u: f64| ((u * n as f64) as usize).min(n - 1);
    let mut l = match pick(5, uniform()) {
        0 => grid(1 + pick(3, uniform()), 1 + pick(3, uniform()), 1.0),
        1 => misaligned_pair(0.05 + 1.15 * uniform()),
        2 => star(5),
        3 => star(3),
        _ => aligned_pair(),
    };
    let mut done = 0;
    let mut tries = 0;
    while done < steps && tries < steps * 10 {
        tries += 1;
        if refine_once(&mut l, uniform) {
            done += 1;
        }
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_built_layouts_are_valid() {
        for l in [grid(3, 3, 1.0), three_strip(0.2), three_rectangles(), misaligned_pair(0.1), misaligned_pair(1.0), aligned_pair(), star(5), star(3), t_ladder(), t_single()] {
            l.validate().unwrap();
        }
    }

    #[test]
    fn three_rectangles_counts() {
        let l = three_rectangles();
        assert_eq!(l.component_count(), 3);
        assert_eq!(l.t_junction_count(), 1);
    }
}
