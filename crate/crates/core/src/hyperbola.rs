//! Exact streamlines of the canonical singular cross field.
//!
//! Around a singularity of index `d/4` the model field is `c(z) = e^{i d theta / 4}`,
//! with radial separatrices (ports) at `theta = 2 pi k / (4 - d)`. The map
//! `w = z^m`, `m = (4 - d)/8`, taken relative to an anchor port, sends every
//! streamline crossing the next port onto a hyperbola `x y = A` in the first
//! quadrant of the `w` plane. One anchored quadrant covers two port intervals.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64 as C;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SectorModel {
    pub d: i32,
}

/// Polar coordinates of an entry point in the conformal plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EntryFrame {
    /// Port interval containing the point; also the anchor port.
    pub sector: usize,
    pub rho: f64,
    pub phi: f64,
}

#[derive(Clone, Debug)]
pub struct HyperbolaArc {
    pub anchor: usize,
    pub exponent: f64,
    pub a: f64,
    /// `(phi, z)` samples in travel order; the last one is the exit point.
    pub points: Vec<(f64, C)>,
}

/// Predefined ray angles, shared by all arcs of a sector.
pub fn ray_angles(n: usize) -> Vec<f64> {
    (0..n).map(|j| (j as f64 + 0.5) * FRAC_PI_2 / n as f64).collect()
}

pub fn hyperbola_constant(rho: f64, phi: f64) -> f64 {
    rho * rho * phi.sin() * phi.cos()
}

impl SectorModel {
    pub fn new(d: i32) -> Self {
        assert!(d < 4, "index must be below one");
        SectorModel { d }
    }

    pub fn exponent(&self) -> f64 {
        (4 - self.d) as f64 / 8.0
    }

    pub fn sector_count(&self) -> usize {
        (4 - self.d) as usize
    }

    pub fn sector_width(&self) -> f64 {
        2.0 * PI / self.sector_count() as f64
    }

    /// Cross angle of the model field at `z`.
    pub fn field_angle(&self, z: C) -> f64 {
        self.d as f64 * z.arg() / 4.0
    }

    pub fn sector_of(&self, theta: f64) -> usize {
        let k = (theta.rem_euclid(2.0 * PI) / self.sector_width()).floor() as usize;
        k.min(self.sector_count() - 1)
    }

    /// `(rho, phi)` of `z` relative to anchor port `anchor`.
    pub fn to_conformal(&self, z: C, anchor: usize) -> (f64, f64) {
        let rel = (z.arg() - anchor as f64 * self.sector_width()).rem_euclid(2.0 * PI);
        (z.norm().powf(self.exponent()), self.exponent() * rel)
    }

    pub fn from_conformal(&self, rho: f64, phi: f64, anchor: usize) -> C {
        let m = self.exponent();
        C::from_polar(rho.powf(1.0 / m), anchor as f64 * self.sector_width() + phi / m)
    }

    /// Frame anchored at the nearest port clockwise of `z`.
    pub fn entry_frame(&self, z: C) -> Option<EntryFrame> {
        if z.norm() == 0.0 {
            return None;
        }
        let sector = self.sector_of(z.arg());
        let (rho, phi) = self.to_conformal(z, sector);
        Some(EntryFrame { sector, rho, phi })
    }

    /// Point of the hyperbola `x y = a` on ray `phi`.
    pub fn point(&self, a: f64, phi: f64, anchor: usize) -> C {
        let rho = (a / (phi.sin() * phi.cos())).sqrt();
        self.from_conformal(rho, phi, anchor)
    }

    /// Unit tangent of the anchored hyperbola through `z`, pointing toward decreasing `phi`.
    pub fn tangent(&self, z: C, anchor: usize) -> C {
        let (_, phi) = self.to_conformal(z, anchor);
        let base = anchor as f64 * self.sector_width();
        C::from_polar(1.0, base + (1.0 / self.exponent() - 2.0) * phi)
    }

    /// Follow the anchored hyperbola through `z` until `inside` fails, sampling
    /// the shared rays strictly between the entry and the exit.
    pub fn arc(&self, z: C, anchor: usize, decreasing: bool, rays: &[f64], inside: impl Fn(C) -> bool) -> HyperbolaArc {
        let (rho, phi0) = self.to_conformal(z, anchor);
        let a = hyperbola_constant(rho, phi0);
        let mut out = HyperbolaArc { anchor, exponent: self.exponent(), a, points: Vec::new() };
        let eps = 1e-12;
        let mut cand: Vec<f64> = if decreasing {
            rays.iter().rev().copied().filter(|&p| p < phi0 - eps).collect()
        } else {
            rays.iter().copied().filter(|&p| p > phi0 + eps).collect()
        };
        // Beyond the outermost ray approach the asymptote geometrically.
        let mut last = *cand.last().unwrap_or(&phi0);
        for _ in 0..200 {
            last = if decreasing { last / 2.0 } else { FRAC_PI_2 - (FRAC_PI_2 - last) / 2.0 };
            cand.push(last);
        }
        let mut prev = phi0;
        for phi in cand {
            let p = self.point(a, phi, anchor);
            if inside(p) {
                out.points.push((phi, p));
                prev = phi;
                continue;
            }
            let (mut lo, mut hi) = (prev, phi);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if inside(self.point(a, mid, anchor)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.points.push((lo, self.point(a, lo, anchor)));
            return out;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisector_of_anchored_span() {
        let m = SectorModel::new(-1);
        // Port 1 bisects the span anchored at port 0.
        let z = C::from_polar(0.7, m.sector_width());
        let (_, phi) = m.to_conformal(z, 0);
        assert!((phi - PI / 4.0).abs() < 1e-15);
        let f = m.entry_frame(C::from_polar(0.5, 0.3)).unwrap();
        assert_eq!(f.sector, 0);
        assert!((f.rho - 0.5f64.powf(5.0 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn regular_model_gives_straight_lines() {
        let m = SectorModel::new(0);
        let z = C::new(0.3, 0.2);
        let arc = m.arc(z, 0, true, &ray_angles(16), |p| p.norm() < 1.0);
        for (_, p) in &arc.points {
            assert!((p.im - 0.2).abs() < 1e-12);
        }
        assert!((m.tangent(z, 0) - C::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn conformal_round_trip() {
        let m = SectorModel::new(1);
        let z = C::from_polar(0.4, 2.5);
        let (r, p) = m.to_conformal(z, 1);
        assert!((m.from_conformal(r, p, 1) - z).norm() < 1e-14);
    }
}
