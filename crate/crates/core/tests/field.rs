use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use quadcarve::field::{assemble_system, compute_cross_field, smallest_eigenvalue, solve_initial, FieldConfig};
use quadcarve::{fixtures, Surface};

fn dense_l(sys: &quadcarve::field::DiffusionSystem) -> DMatrix<C> {
    let n = sys.free_count();
    let mut m = DMatrix::<C>::zeros(n, n);
    for (r, c, v) in sys.laplacian_entries() {
        m[(r, c)] += v;
    }
    m
}

/// Generalized problem L v = lambda D v through the symmetric form D^-1/2 L D^-1/2.
fn dense_smallest(sys: &quadcarve::field::DiffusionSystem) -> f64 {
    let l = dense_l(sys);
    let n = l.nrows();
    let s = DMatrix::<C>::from_fn(n, n, |i, j| l[(i, j)] / (sys.area[i] * sys.area[j]).sqrt());
    let eig = s.symmetric_eigen();
    eig.eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn laplacian_is_hermitian_and_negative_definite() {
    let surface = Surface::new(fixtures::pentagon(4, 0.1)).unwrap();
    let sys = assemble_system(&surface, true).unwrap();
    let l = dense_l(&sys);
    assert!((&l - l.adjoint()).norm() < 1e-13);
    let eig = l.symmetric_eigen();
    assert!(eig.eigenvalues.iter().all(|&e| e < 0.0));
}

#[test]
fn inverse_iteration_matches_dense_eigensolver() {
    for mesh in [fixtures::square(6, 0.1), fixtures::pentagon(4, 0.1), fixtures::hemisphere_patch(6, 0.1)] {
        let surface = Surface::new(mesh).unwrap();
        let sys = assemble_system(&surface, true).unwrap();
        let want = dense_smallest(&sys);
        let got = smallest_eigenvalue(&sys).unwrap();
        assert!((got - want).abs() <= 1e-5 * want.abs(), "{got} vs {want}");
    }
}

#[test]
fn initial_solve_matches_global_frame_solve_on_flat_mesh() {
    // On a flat mesh a single global frame removes the connection: the
    // harmonic extension is the plain graph Laplacian solve of the rotated data.
    let surface = Surface::new(fixtures::square(6, 0.1)).unwrap();
    let mesh = &surface.mesh;
    let alpha: Vec<f64> = surface
        .frames
        .iter()
        .map(|f| {
            assert!(f.normal.z > 0.999);
            f.b1.y.atan2(f.b1.x)
        })
        .collect();
    let sys = assemble_system(&surface, true).unwrap();
    let fixed: std::collections::BTreeMap<usize, C> =
        sys.constrained.iter().map(|&(v, g)| (v, g * C::from_polar(1.0, 4.0 * alpha[v]))).collect();
    let n = sys.free_count();
    let mut a = DMatrix::<C>::zeros(n, n);
    let mut rhs = nalgebra::DVector::<C>::zeros(n);
    for (k, &i) in sys.free.iter().enumerate() {
        a[(k, k)] = C::new(mesh.nbrs[i].len() as f64, 0.0);
        for &(j, _) in &mesh.nbrs[i] {
            match fixed.get(&j) {
                Some(&g) => rhs[k] += g,
                None => a[(k, sys.slot[j])] -= C::new(1.0, 0.0),
            }
        }
    }
    let x = a.lu().solve(&rhs).unwrap();
    let field = solve_initial(&surface, &sys);
    for (k, &i) in sys.free.iter().enumerate() {
        let local = x[k] * C::from_polar(1.0, -4.0 * alpha[i]);
        let want = local / local.norm();
        assert!((field.u[i] - want).norm() < 1e-10, "node {i}");
    }
}

#[test]
fn converged_field_is_unit_and_keeps_constraints() {
    for name in ["square", "triangle", "pentagon", "l_shape", "annulus", "hemisphere"] {
        let surface = Surface::new(fixtures::by_name(name).unwrap()).unwrap();
        let res = compute_cross_field(&surface, &FieldConfig::default()).unwrap();
        assert!(res.field.converged, "{name}");
        let worst = res.field.u.iter().map(|u| (u.norm() - 1.0).abs()).fold(0.0, f64::max);
        assert!(worst < 1e-12, "{name}: {worst}");
        for &(v, g) in &res.system.constrained {
            assert_eq!(res.field.u[v].re.to_bits(), g.re.to_bits());
            assert_eq!(res.field.u[v].im.to_bits(), g.im.to_bits());
        }
    }
}

#[test]
fn delta_scales_with_free_count() {
    let surface = Surface::new(fixtures::by_name("pentagon").unwrap()).unwrap();
    let res = compute_cross_field(&surface, &FieldConfig::default()).unwrap();
    let n = res.system.free_count() as f64;
    assert_eq!(res.system.delta, (2.0 * n).sqrt() * 1e-6);
    assert!(!res.system.tau_from_fallback);
    let lambda = smallest_eigenvalue(&res.system).unwrap();
    assert!((res.system.tau - 1.0 / lambda.abs()).abs() < 1e-12 * res.system.tau);
}

#[test]
fn explicit_tau_is_used() {
    let surface = Surface::new(fixtures::by_name("square").unwrap()).unwrap();
    let cfg = FieldConfig { tau: Some(0.01), ..FieldConfig::default() };
    assert_eq!(compute_cross_field(&surface, &cfg).unwrap().system.tau, 0.01);
}

#[test]
fn diffusion_does_not_raise_energy_on_pentagon() {
    let surface = Surface::new(fixtures::by_name("pentagon").unwrap()).unwrap();
    let res = compute_cross_field(&surface, &FieldConfig::default()).unwrap();
    let e0 = quadcarve::field::dirichlet_energy(&surface, &res.initial);
    let e1 = quadcarve::field::dirichlet_energy(&surface, &res.field);
    assert!(e1 <= e0 + 1e-9, "{e0} -> {e1}");
}
