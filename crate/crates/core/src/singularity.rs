//! Principal matchings, holonomy-corrected triangle indices and ports.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::SingularityError;
use crate::field::CrossField;
use crate::geom::{centered_quarter, rotate_between, TriFrame};
use crate::mesh::{wrap_angle, Surface, V3};

/// Smallest rotation relating the cross at `j` to the transported cross from `i`.
pub fn matching(theta_i: f64, theta_j: f64, phi_ij: f64) -> f64 {
    centered_quarter(theta_j - theta_i - phi_ij)
}

/// Index of triangle `t` in quarters.
pub fn triangle_index(surface: &Surface, theta: &[f64], t: usize) -> Result<i32, SingularityError> {
    let tri = surface.mesh.triangles[t];
    let mut circulation = 0.0;
    let mut holonomy = 0.0;
    for k in 0..3 {
        let (i, j) = (tri[k], tri[(k + 1) % 3]);
        let phi = surface.phi(i, j);
        circulation += matching(theta[i], theta[j], phi);
        holonomy += phi;
    }
    let x = 4.0 * (circulation + wrap_angle(holonomy)) / (2.0 * PI);
    let d = x.round();
    let residual = (x - d).abs() / 4.0;
    if residual >= 1e-6 {
        return Err(SingularityError::Residual { tri: t, residual });
    }
    Ok(d as i32)
}

pub fn all_indices(surface: &Surface, field: &CrossField) -> Result<Vec<i32>, SingularityError> {
    let theta = field.theta();
    (0..surface.mesh.triangles.len()).map(|t| triangle_index(surface, &theta, t)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Singularity {
    pub id: usize,
    pub triangle: usize,
    /// Index in quarters.
    pub d: i32,
    pub location: [f64; 3],
    /// Angle of port 0 measured from the reference ray.
    pub alpha: f64,
    /// Reference ray (barycenter to lowest-index corner) angle in the triangle frame.
    pub ray_angle: f64,
    /// Port angles in the triangle frame, counterclockwise.
    pub port_angles: Vec<f64>,
    pub ports: Vec<[f64; 3]>,
}

impl Singularity {
    pub fn index(&self) -> f64 {
        self.d as f64 / 4.0
    }

    pub fn port_count(&self) -> usize {
        (4 - self.d) as usize
    }

    pub fn sector_width(&self) -> f64 {
        2.0 * PI / (4 - self.d) as f64
    }
}

/// Cross direction at node `v` rotated into the plane of triangle `t`.
pub fn cross_in_triangle(surface: &Surface, field: &CrossField, v: usize, frame: &TriFrame) -> V3 {
    let f = &surface.frames[v];
    let c = f.direction(field.u[v].arg() / 4.0);
    rotate_between(&c, &f.normal, &frame.n)
}

pub fn detect_singularities(surface: &Surface, field: &CrossField) -> Result<Vec<Singularity>, SingularityError> {
    let idx = all_indices(surface, field)?;
    let mesh = &surface.mesh;
    let mut out = Vec::new();
    for (t, &d) in idx.iter().enumerate() {
        if d == 0 {
            continue;
        }
        if !(-4..4).contains(&d) {
            return Err(SingularityError::Pathological { tri: t, d });
        }
        let frame = TriFrame::new(mesh, t);
        let bc = mesh.barycenter(t);
        let v = *mesh.triangles[t].iter().min().unwrap();
        let c = cross_in_triangle(surface, field, v, &frame);
        let ray = mesh.positions[v] - bc;
        let ray_angle = frame.angle_of(&ray);
        let gamma = frame.angle_of(&c) - ray_angle;
        // Radial directions of the local model sit at 4/(4-d) times the cross offset.
        let alpha = 4.0 * centered_quarter(gamma) / (4 - d) as f64;
        let m = (4 - d) as usize;
        let port_angles: Vec<f64> =
            (0..m).map(|k| ray_angle + alpha + 2.0 * PI * k as f64 / m as f64).collect();
        let ports = port_angles.iter().map(|&a| crate::geom::to_arr(&frame.direction(a))).collect();
        out.push(Singularity {
            id: out.len(),
            triangle: t,
            d,
            location: crate::geom::to_arr(&bc),
            alpha,
            ray_angle,
            port_angles,
            ports,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn aligned_crosses_match_to_zero() {
        assert_eq!(matching(0.3, 0.3, 0.0), 0.0);
        assert!((matching(0.1, 0.1 + FRAC_PI_2, 0.0)).abs() < 1e-15);
        assert!((matching(0.0, PI / 8.0, 0.0) - PI / 8.0).abs() < 1e-15);
        let m = matching(0.0, 0.7, 0.2);
        assert!((-FRAC_PI_4..FRAC_PI_4).contains(&m));
    }
}
