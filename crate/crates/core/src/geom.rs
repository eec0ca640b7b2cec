//! Small geometric helpers shared by the field, tracer and layout code.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::mesh::{TriMesh, V3};

/// Reduce an angle modulo `pi/2` into `[-pi/4, pi/4)`.
pub fn centered_quarter(x: f64) -> f64 {
    let r = x.rem_euclid(FRAC_PI_2);
    if r >= FRAC_PI_4 {
        r - FRAC_PI_2
    } else {
        r
    }
}

/// Rotate `v` by the minimal rotation taking unit `from` onto unit `to`.
pub fn rotate_between(v: &V3, from: &V3, to: &V3) -> V3 {
    let k = from.cross(to);
    let c = from.dot(to);
    if c <= -1.0 + 1e-12 {
        // Antipodal normals: fall back to projection.
        return v - to * v.dot(to);
    }
    v * c + k.cross(v) + k * (k.dot(v) / (1.0 + c))
}

/// Orthonormal frame in the plane of a triangle, origin at corner 0.
#[derive(Clone, Copy, Debug)]
pub struct TriFrame {
    pub origin: V3,
    pub x: V3,
    pub y: V3,
    pub n: V3,
    /// Corner coordinates in the frame.
    pub corners: [[f64; 2]; 3],
}

impl TriFrame {
    pub fn new(mesh: &TriMesh, t: usize) -> Self {
        let [a, b, c] = mesh.triangles[t].map(|i| mesh.positions[i]);
        let n = (b - a).cross(&(c - a)).normalize();
        let x = (b - a).normalize();
        let y = n.cross(&x);
        let to2 = |p: V3| [(p - a).dot(&x), (p - a).dot(&y)];
        TriFrame { origin: a, x, y, n, corners: [[0.0, 0.0], to2(b), to2(c)] }
    }

    pub fn to_local(&self, p: &V3) -> [f64; 2] {
        let d = p - self.origin;
        [d.dot(&self.x), d.dot(&self.y)]
    }

    pub fn to_world(&self, q: [f64; 2]) -> V3 {
        self.origin + self.x * q[0] + self.y * q[1]
    }

    pub fn dir_local(&self, v: &V3) -> [f64; 2] {
        [v.dot(&self.x), v.dot(&self.y)]
    }

    pub fn dir_world(&self, d: [f64; 2]) -> V3 {
        self.x * d[0] + self.y * d[1]
    }

    pub fn angle_of(&self, v: &V3) -> f64 {
        v.dot(&self.y).atan2(v.dot(&self.x))
    }

    pub fn direction(&self, angle: f64) -> V3 {
        self.x * angle.cos() + self.y * angle.sin()
    }

    /// Barycentric coordinates of a local point (may be negative outside).
    pub fn bary(&self, q: [f64; 2]) -> [f64; 3] {
        let [p0, p1, p2] = self.corners;
        let det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1]);
        let l1 = ((q[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (q[1] - p0[1])) / det;
        let l2 = ((p1[0] - p0[0]) * (q[1] - p0[1]) - (q[0] - p0[0]) * (p1[1] - p0[1])) / det;
        [1.0 - l1 - l2, l1, l2]
    }

    pub fn from_bary(&self, b: [f64; 3]) -> [f64; 2] {
        let c = self.corners;
        [
            b[0] * c[0][0] + b[1] * c[1][0] + b[2] * c[2][0],
            b[0] * c[0][1] + b[1] * c[1][1] + b[2] * c[2][1],
        ]
    }
}

pub fn cross2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn sub2(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn norm2(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// Intersection parameters `(s, t)` of segments `p + s (q - p)` and `a + t (b - a)`.
pub fn segment_intersection(p: [f64; 2], q: [f64; 2], a: [f64; 2], b: [f64; 2]) -> Option<(f64, f64)> {
    let r = sub2(q, p);
    let s = sub2(b, a);
    let den = cross2(r, s);
    if den == 0.0 {
        return None;
    }
    let ap = sub2(a, p);
    let u = cross2(ap, s) / den;
    let v = cross2(ap, r) / den;
    Some((u, v))
}

pub fn polyline_length(p: &[[f64; 3]]) -> f64 {
    p.windows(2).map(|w| dist3(w[0], w[1])).sum()
}

pub fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

pub fn to_arr(v: &V3) -> [f64; 3] {
    [v.x, v.y, v.z]
}

pub fn to_v3(a: [f64; 3]) -> V3 {
    V3::new(a[0], a[1], a[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centered_range() {
        assert_eq!(centered_quarter(0.0), 0.0);
        assert!((centered_quarter(std::f64::consts::PI / 8.0) - std::f64::consts::PI / 8.0).abs() < 1e-15);
        assert_eq!(centered_quarter(FRAC_PI_4), -FRAC_PI_4);
        assert!(centered_quarter(FRAC_PI_2 + 0.1) - 0.1 < 1e-15);
    }

    #[test]
    fn rotation_maps_normals() {
        let from = V3::z();
        let to = V3::new(0.0, 1.0, 1.0).normalize();
        let r = rotate_between(&from, &from, &to);
        assert!((r - to).norm() < 1e-15);
        let t = rotate_between(&V3::x(), &from, &to);
        assert!(t.dot(&to).abs() < 1e-15 && (t.norm() - 1.0).abs() < 1e-15);
    }
}
