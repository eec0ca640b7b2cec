//! Procedural test meshes.
//!
//! Interior nodes of most domains are displaced by a small deterministic
//! jitter so that straight separatrices do not run along mesh edges.

use std::f64::consts::PI;

use crate::mesh::{TriMesh, V3};

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Deterministic value in `[-1, 1)`.
fn noise(i: usize, salt: u64) -> f64 {
    (splitmix(i as u64 ^ salt.wrapping_mul(0x2545_f491_4f6c_dd1d)) >> 11) as f64 / (1u64 << 52) as f64 - 1.0
}

fn jitter_interior(mesh: TriMesh, amount: f64) -> TriMesh {
    if amount == 0.0 {
        return mesh;
    }
    let h = mesh.mean_edge_length();
    let mut p = mesh.positions.clone();
    for (i, q) in p.iter_mut().enumerate() {
        if !mesh.boundary_node[i] {
            q.x += amount * h * noise(i, 1);
            q.y += amount * h * noise(i, 2);
        }
    }
    TriMesh::new(p, mesh.triangles).expect("jittered mesh stays valid")
}

/// Grid on `[x0, x0 + nx*h] x [y0, y0 + ny*h]`, cells kept when `keep(i, j)`.
fn grid(nx: usize, ny: usize, h: f64, keep: impl Fn(usize, usize) -> bool) -> TriMesh {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut used = vec![false; (nx + 1) * (ny + 1)];
    let mut tris = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            if !keep(i, j) {
                continue;
            }
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if (i + j) % 2 == 0 {
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            } else {
                tris.push([a, b, d]);
                tris.push([b, c, d]);
            }
            for v in [a, b, c, d] {
                used[v] = true;
            }
        }
    }
    let mut remap = vec![usize::MAX; used.len()];
    let mut pos = Vec::new();
    for j in 0..=ny {
        for i in 0..=nx {
            if used[id(i, j)] {
                remap[id(i, j)] = pos.len();
                pos.push(V3::new(i as f64 * h, j as f64 * h, 0.0));
            }
        }
    }
    let tris = tris.into_iter().map(|t| t.map(|v| remap[v])).collect();
    TriMesh::new(pos, tris).expect("grid mesh is valid")
}

/// Unit square with `n x n` cells.
pub fn square(n: usize, jitter: f64) -> TriMesh {
    jitter_interior(grid(n, n, 1.0 / n as f64, |_, _| true), jitter)
}

/// Rectangle `[0, w] x [0, h]` with cells of size `cell`.
pub fn rectangle(w: f64, h: f64, cell: f64) -> TriMesh {
    let (nx, ny) = ((w / cell).round() as usize, (h / cell).round() as usize);
    grid(nx, ny, cell, |_, _| true)
}

/// L-shaped domain `[0,2]^2 \ [1,2]x[1,2]`, `n` cells per unit.
pub fn l_shape(n: usize, jitter: f64) -> TriMesh {
    jitter_interior(grid(2 * n, 2 * n, 1.0 / n as f64, |i, j| !(i >= n && j >= n)), jitter)
}

/// Square frame `[0,3]^2 \ (1,2)^2`, `n` cells per unit: a flat annulus whose
/// inner corners are re-entrant.
pub fn square_frame(n: usize, jitter: f64) -> TriMesh {
    jitter_interior(
        grid(3 * n, 3 * n, 1.0 / n as f64, |i, j| !((n..2 * n).contains(&i) && (n..2 * n).contains(&j))),
        jitter,
    )
}

/// Square grid on `[-0.5, 0.5]^2` lifted onto the unit sphere.
pub fn hemisphere_patch(n: usize, jitter: f64) -> TriMesh {
    let flat = jitter_interior(grid(n, n, 1.0 / n as f64, |_, _| true), jitter);
    let pos = flat
        .positions
        .iter()
        .map(|p| {
            let (x, y) = (p.x - 0.5, p.y - 0.5);
            V3::new(x, y, (1.0 - x * x - y * y).sqrt())
        })
        .collect();
    TriMesh::new(pos, flat.triangles).expect("lifted mesh is valid")
}

/// Regular polygon of unit circumradius, each fan triangle subdivided `n` times.
pub fn regular_polygon(sides: usize, n: usize, jitter: f64) -> TriMesh {
    let corner = |i: usize| {
        let a = 2.0 * PI * (i % sides) as f64 / sides as f64;
        V3::new(a.cos(), a.sin(), 0.0)
    };
    // Ring r holds sides*r nodes; node (sector i, a, b) with a + b = r sits at ring offset i*r + b.
    let ring_start = |r: usize| 1 + sides * r * (r.saturating_sub(1)) / 2;
    let id = |i: usize, a: usize, b: usize| {
        let r = a + b;
        if r == 0 {
            0
        } else {
            ring_start(r) + (i * r + b) % (sides * r)
        }
    };
    let total = ring_start(n + 1);
    let mut pos = vec![V3::zeros(); total];
    for i in 0..sides {
        let (p, q) = (corner(i), corner(i + 1));
        for a in 0..=n {
            for b in 0..=(n - a) {
                pos[id(i, a, b)] = p * (a as f64 / n as f64) + q * (b as f64 / n as f64);
            }
        }
    }
    let mut tris = Vec::new();
    for i in 0..sides {
        for a in 0..n {
            for b in 0..(n - a) {
                tris.push([id(i, a, b), id(i, a + 1, b), id(i, a, b + 1)]);
                if a + b + 2 <= n {
                    tris.push([id(i, a + 1, b), id(i, a + 1, b + 1), id(i, a, b + 1)]);
                }
            }
        }
    }
    jitter_interior(TriMesh::new(pos, tris).expect("polygon mesh is valid"), jitter)
}

pub fn equilateral_triangle(n: usize, jitter: f64) -> TriMesh {
    regular_polygon(3, n, jitter)
}

pub fn pentagon(n: usize, jitter: f64) -> TriMesh {
    regular_polygon(5, n, jitter)
}

pub fn hexagon(n: usize, jitter: f64) -> TriMesh {
    regular_polygon(6, n, jitter)
}

/// Hexagonal lattice pushed onto concentric circles; symmetric under D6.
pub fn symmetric_disk(n: usize) -> TriMesh {
    let hex = regular_polygon(6, n, 0.0);
    let pos = hex
        .positions
        .iter()
        .map(|p| {
            // Ring index is the hexagonal norm of the lattice point.
            let mut best = 0.0f64;
            for k in 0..6 {
                let a = PI / 6.0 + PI * k as f64 / 3.0;
                best = best.max(p.x * a.cos() + p.y * a.sin());
            }
            let ring = best / (PI / 6.0).cos();
            let l = p.norm();
            if l < 1e-12 {
                *p
            } else {
                p * (ring / l)
            }
        })
        .collect();
    TriMesh::new(pos, hex.triangles).expect("disk mesh is valid")
}

/// Polar annulus between radii `r0` and `r1`.
pub fn polar_annulus(r0: f64, r1: f64, rings: usize, sectors: usize) -> TriMesh {
    let mut pos = Vec::new();
    for r in 0..=rings {
        let rad = r0 + (r1 - r0) * r as f64 / rings as f64;
        for s in 0..sectors {
            let a = 2.0 * PI * s as f64 / sectors as f64;
            pos.push(V3::new(rad * a.cos(), rad * a.sin(), 0.0));
        }
    }
    let id = |r: usize, s: usize| r * sectors + s % sectors;
    let mut tris = Vec::new();
    for r in 0..rings {
        for s in 0..sectors {
            let (a, b, c, d) = (id(r, s), id(r, s + 1), id(r + 1, s + 1), id(r + 1, s));
            if (r + s) % 2 == 0 {
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            } else {
                tris.push([a, b, d]);
                tris.push([b, c, d]);
            }
        }
    }
    TriMesh::new(pos, tris).expect("annulus mesh is valid")
}

pub fn icosahedron() -> TriMesh {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, g, 0.0],
        [1.0, g, 0.0],
        [-1.0, -g, 0.0],
        [1.0, -g, 0.0],
        [0.0, -1.0, g],
        [0.0, 1.0, g],
        [0.0, -1.0, -g],
        [0.0, 1.0, -g],
        [g, 0.0, -1.0],
        [g, 0.0, 1.0],
        [-g, 0.0, -1.0],
        [-g, 0.0, 1.0],
    ];
    let pos = raw.iter().map(|p| V3::new(p[0], p[1], p[2]).normalize()).collect();
    let tris = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    TriMesh::new(pos, tris).expect("icosahedron is valid")
}

/// Named fixtures used by tests, examples and the CLI.
pub fn by_name(name: &str) -> Option<TriMesh> {
    Some(match name {
        "square" => square(12, 0.15),
        "triangle" => equilateral_triangle(12, 0.15),
        "pentagon" => pentagon(10, 0.15),
        "hexagon" => hexagon(10, 0.15),
        "l_shape" => l_shape(8, 0.15),
        "annulus" => square_frame(6, 0.15),
        "hemisphere" => hemisphere_patch(12, 0.15),
        "disk" => symmetric_disk(8),
        "icosahedron" => icosahedron(),
        "large" => pentagon(53, 0.15),
        _ => return None,
    })
}

pub const FIXTURE_NAMES: [&str; 8] = ["square", "triangle", "pentagon", "hexagon", "l_shape", "annulus", "hemisphere", "disk"];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygon_counts() {
        let m = regular_polygon(5, 3, 0.0);
        assert_eq!(m.node_count(), 1 + 5 * (1 + 2 + 3));
        assert_eq!(m.triangles.len(), 5 * 9);
        assert_eq!(m.euler_characteristic(), 1);
        assert_eq!(m.boundary_loops.len(), 1);
    }

    #[test]
    fn frame_is_annulus() {
        let m = square_frame(2, 0.0);
        assert_eq!(m.euler_characteristic(), 0);
        assert_eq!(m.boundary_loops.len(), 2);
    }

    #[test]
    fn large_fixture_size() {
        let n = regular_polygon(5, 53, 0.0).node_count();
        assert!((6500..7500).contains(&n), "{n}");
    }
}
