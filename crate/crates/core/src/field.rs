//! Connection Laplacian on representation vectors and the diffusion-generated
//! iteration that produces a unit cross field.

use faer::prelude::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use log::{debug, warn};
use num_complex::Complex64;

use crate::error::FieldError;
use crate::mesh::{Surface, NONE};

type C = Complex64;

/// Sparse Hermitian positive definite factorization.
pub struct HermitianSolver {
    n: usize,
    llt: Option<faer::sparse::linalg::solvers::Llt<usize, C>>,
}

impl HermitianSolver {
    /// `entries` lists the full matrix (both triangles).
    pub fn new(n: usize, entries: &[(usize, usize, C)]) -> Result<Self, FieldError> {
        if n == 0 {
            return Ok(HermitianSolver { n, llt: None });
        }
        faer::set_global_parallelism(faer::Par::Seq);
        let trip: Vec<Triplet<usize, usize, C>> =
            entries.iter().filter(|e| e.0 >= e.1).map(|&(i, j, v)| Triplet::new(i, j, v)).collect();
        let mat = SparseColMat::<usize, C>::try_new_from_triplets(n, n, &trip)
            .map_err(|e| FieldError::Singular(format!("{e:?}")))?;
        let llt = mat.sp_cholesky(Side::Lower).map_err(|e| FieldError::Singular(format!("{e:?}")))?;
        Ok(HermitianSolver { n, llt: Some(llt) })
    }

    pub fn solve(&self, rhs: &[C]) -> Vec<C> {
        let Some(llt) = &self.llt else { return Vec::new() };
        let mut m = Mat::<C>::from_fn(self.n, 1, |i, _| rhs[i]);
        llt.solve_in_place(m.as_mut());
        (0..self.n).map(|i| m[(i, 0)]).collect()
    }
}

impl std::fmt::Debug for HermitianSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "HermitianSolver(n = {})", self.n)
    }
}

/// `A = D^-1 L` over the free nodes, with `L` Hermitian negative definite.
#[derive(Debug)]
pub struct DiffusionSystem {
    pub free: Vec<usize>,
    /// Node to free index, or [`NONE`] for constrained nodes.
    pub slot: Vec<usize>,
    pub constrained: Vec<(usize, C)>,
    /// One-ring area per free node.
    pub area: Vec<f64>,
    pub degree: Vec<f64>,
    /// Off-diagonal entries `L_ij = e^{-4i phi_ij}` between free nodes.
    pub offdiag: Vec<Vec<(usize, C)>>,
    /// Dirichlet contribution so that the Laplacian reads `A u + b`.
    pub b: Vec<C>,
    pub tau: f64,
    pub delta: f64,
    pub tau_from_fallback: bool,
    stiffness: HermitianSolver,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossField {
    /// Representation vector per node, in the node's frame.
    pub u: Vec<C>,
    pub iterations: usize,
    pub converged: bool,
}

impl CrossField {
    /// Cross angle `arg(u) / 4` per node.
    pub fn theta(&self) -> Vec<f64> {
        self.u.iter().map(|u| u.arg() / 4.0).collect()
    }
}

#[derive(Clone, Debug)]
pub struct FieldConfig {
    pub tau: Option<f64>,
    pub delta_scale: f64,
    pub max_iterations: usize,
    /// Pin the lowest-index node on closed surfaces.
    pub pin_closed: bool,
}

impl Default for FieldConfig {
    fn default() -> Self {
        FieldConfig { tau: None, delta_scale: 1e-6, max_iterations: 10_000, pin_closed: true }
    }
}

pub fn assemble_system(surface: &Surface, pin_closed: bool) -> Result<DiffusionSystem, FieldError> {
    let mesh = &surface.mesh;
    let n = mesh.node_count();
    let mut constrained: Vec<(usize, C)> = surface.boundary.nodes.iter().map(|b| (b.node, b.u)).collect();
    if constrained.is_empty() {
        if !pin_closed {
            return Err(FieldError::NoConstraint);
        }
        constrained.push((0, C::new(1.0, 0.0)));
    }
    let mut slot = vec![NONE; n];
    let mut is_fixed = vec![None; n];
    for &(v, u) in &constrained {
        is_fixed[v] = Some(u);
    }
    let free: Vec<usize> = (0..n).filter(|&v| is_fixed[v].is_none()).collect();
    for (k, &v) in free.iter().enumerate() {
        slot[v] = k;
    }
    let mut area = Vec::with_capacity(free.len());
    let mut degree = Vec::with_capacity(free.len());
    let mut offdiag = Vec::with_capacity(free.len());
    let mut b = Vec::with_capacity(free.len());
    for &i in &free {
        let a = mesh.one_ring_area(i);
        let mut row = Vec::new();
        let mut bi = C::new(0.0, 0.0);
        for &(j, _) in &mesh.nbrs[i] {
            let q = C::from_polar(1.0, -4.0 * surface.phi(i, j));
            match is_fixed[j] {
                Some(g) => bi += q * g,
                None => row.push((slot[j], q)),
            }
        }
        area.push(a);
        degree.push(mesh.nbrs[i].len() as f64);
        offdiag.push(row);
        b.push(bi / a);
    }
    let mut entries = Vec::new();
    for (r, row) in offdiag.iter().enumerate() {
        entries.push((r, r, C::new(degree[r], 0.0)));
        for &(c, q) in row {
            entries.push((r, c, -q));
        }
    }
    let stiffness = HermitianSolver::new(free.len(), &entries)?;
    Ok(DiffusionSystem {
        free,
        slot,
        constrained,
        area,
        degree,
        offdiag,
        b,
        tau: 0.0,
        delta: 0.0,
        tau_from_fallback: false,
        stiffness,
    })
}

impl DiffusionSystem {
    pub fn free_count(&self) -> usize {
        self.free.len()
    }

    /// `L x` over the free nodes.
    pub fn apply_l(&self, x: &[C]) -> Vec<C> {
        self.offdiag
            .iter()
            .enumerate()
            .map(|(r, row)| row.iter().fold(-x[r] * self.degree[r], |s, &(c, q)| s + q * x[c]))
            .collect()
    }

    /// `A x` (without the Dirichlet term).
    pub fn apply_a(&self, x: &[C]) -> Vec<C> {
        self.apply_l(x).into_iter().zip(&self.area).map(|(v, a)| v / *a).collect()
    }

    /// Full entries of `L` as `(row, col, value)`.
    pub fn laplacian_entries(&self) -> Vec<(usize, usize, C)> {
        let mut out = Vec::new();
        for (r, row) in self.offdiag.iter().enumerate() {
            out.push((r, r, C::new(-self.degree[r], 0.0)));
            for &(c, q) in row {
                out.push((r, c, q));
            }
        }
        out
    }

    fn diffusion_entries(&self, tau: f64) -> Vec<(usize, usize, C)> {
        self.laplacian_entries()
            .into_iter()
            .map(|(r, c, v)| {
                let d = if r == c { self.area[r] } else { 0.0 };
                (r, c, C::new(d, 0.0) - v * tau)
            })
            .collect()
    }
}

fn d_norm(x: &[C], area: &[f64]) -> f64 {
    x.iter().zip(area).map(|(v, a)| v.norm_sqr() * a).sum::<f64>().sqrt()
}

/// Smallest-magnitude eigenvalue of `A` by inverse iteration; `None` on failure.
pub fn smallest_eigenvalue(sys: &DiffusionSystem) -> Option<f64> {
    let n = sys.free_count();
    if n == 0 {
        return None;
    }
    let mut v = vec![C::new(1.0, 0.0); n];
    let s = d_norm(&v, &sys.area);
    v.iter_mut().for_each(|x| *x /= s);
    let mut mu_prev = f64::NAN;
    for _ in 0..500 {
        let rhs: Vec<C> = v.iter().zip(&sys.area).map(|(x, a)| x * *a).collect();
        let mut w = sys.stiffness.solve(&rhs);
        let s = d_norm(&w, &sys.area);
        if !(s.is_finite() && s > 0.0) {
            return None;
        }
        w.iter_mut().for_each(|x| *x /= s);
        let lw = sys.apply_l(&w);
        let mu = -w.iter().zip(&lw).map(|(a, b)| (a.conj() * b).re).sum::<f64>();
        v = w;
        if (mu - mu_prev).abs() <= 1e-6 * mu.abs() {
            return Some(-mu);
        }
        mu_prev = mu;
    }
    None
}

/// `tau = 1 / |lambda_1|`, with the documented fallback.
pub fn estimate_time_step(sys: &DiffusionSystem) -> (f64, bool) {
    match smallest_eigenvalue(sys) {
        Some(l) if l.abs() > 0.0 && l.is_finite() => (1.0 / l.abs(), false),
        _ => {
            let mean = sys.area.iter().sum::<f64>() / sys.area.len().max(1) as f64;
            warn!("eigenvalue estimate failed; falling back to tau = mean area / 4");
            (mean / 4.0, true)
        }
    }
}

fn transported_average(surface: &Surface, u: &[C], i: usize) -> C {
    surface.mesh.nbrs[i]
        .iter()
        .fold(C::new(0.0, 0.0), |s, &(j, _)| s + C::from_polar(1.0, -4.0 * surface.phi(i, j)) * u[j])
}

fn normalize_into(surface: &Surface, sys: &DiffusionSystem, x: &[C], u: &mut [C], initial: bool) {
    let mut zeros = Vec::new();
    for (k, &i) in sys.free.iter().enumerate() {
        let m = x[k].norm();
        if m >= 1e-14 {
            u[i] = x[k] / m;
        } else if initial {
            zeros.push(i);
        }
        // Otherwise the previous direction is kept.
    }
    for i in zeros {
        let avg = transported_average(surface, u, i);
        u[i] = if avg.norm() >= 1e-14 { avg / avg.norm() } else { C::new(1.0, 0.0) };
    }
}

fn fresh_field(surface: &Surface, sys: &DiffusionSystem) -> Vec<C> {
    let mut u = vec![C::new(0.0, 0.0); surface.mesh.node_count()];
    for &(v, g) in &sys.constrained {
        u[v] = g;
    }
    u
}

/// Harmonic extension of the constraints, normalized pointwise.
pub fn solve_initial(surface: &Surface, sys: &DiffusionSystem) -> CrossField {
    let mut u = fresh_field(surface, sys);
    let rhs: Vec<C> = sys.b.iter().zip(&sys.area).map(|(b, a)| b * *a).collect();
    let x = sys.stiffness.solve(&rhs);
    normalize_into(surface, sys, &x, &mut u, true);
    CrossField { u, iterations: 0, converged: true }
}

/// Backward Euler steps with pointwise renormalization until the update is below `delta`.
pub fn diffuse(
    surface: &Surface,
    sys: &DiffusionSystem,
    start: &CrossField,
    max_iterations: usize,
) -> Result<CrossField, FieldError> {
    let n = sys.free_count();
    let mut u = start.u.clone();
    if n == 0 {
        return Ok(CrossField { u, iterations: 0, converged: true });
    }
    let solver = HermitianSolver::new(n, &sys.diffusion_entries(sys.tau))?;
    for it in 1..=max_iterations {
        let rhs: Vec<C> =
            sys.free.iter().enumerate().map(|(k, &i)| (u[i] + sys.b[k] * sys.tau) * sys.area[k]).collect();
        let x = solver.solve(&rhs);
        let before: Vec<C> = sys.free.iter().map(|&i| u[i]).collect();
        normalize_into(surface, sys, &x, &mut u, false);
        let change = sys.free.iter().zip(&before).map(|(&i, b)| (u[i] - b).norm_sqr()).sum::<f64>().sqrt();
        debug!("diffusion iteration {it}: change {change:e}");
        if change <= sys.delta {
            return Ok(CrossField { u, iterations: it, converged: true });
        }
    }
    warn!("diffusion did not converge in {max_iterations} iterations");
    Ok(CrossField { u, iterations: max_iterations, converged: false })
}

/// Discrete Dirichlet energy of the representation vectors.
pub fn dirichlet_energy(surface: &Surface, field: &CrossField) -> f64 {
    let u = &field.u;
    0.5 * surface
        .mesh
        .edges
        .iter()
        .map(|&[i, j]| (u[i] - C::from_polar(1.0, -4.0 * surface.phi(i, j)) * u[j]).norm_sqr())
        .sum::<f64>()
}

#[derive(Debug)]
pub struct FieldResult {
    pub system: DiffusionSystem,
    pub initial: CrossField,
    pub field: CrossField,
}

/// Assemble, pick `tau` and `delta`, solve and diffuse.
pub fn compute_cross_field(surface: &Surface, cfg: &FieldConfig) -> Result<FieldResult, FieldError> {
    let mut system = assemble_system(surface, cfg.pin_closed)?;
    let (tau, fallback) = match cfg.tau {
        Some(t) => (t, false),
        None => estimate_time_step(&system),
    };
    system.tau = tau;
    system.tau_from_fallback = fallback;
    system.delta = (2.0 * system.free_count() as f64).sqrt() * cfg.delta_scale;
    let initial = solve_initial(surface, &system);
    let field = diffuse(surface, &system, &initial, cfg.max_iterations)?;
    Ok(FieldResult { system, initial, field })
}
