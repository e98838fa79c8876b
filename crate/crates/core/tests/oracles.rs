//! Independent checks of the κ_h eigenproblem and of mesh invariants.

use std::sync::OnceLock;

use approx::assert_relative_eq;
use hypercircle::kappa::HypercircleSolver;
use hypercircle::{
    compute_kappa, generate, BoundaryData, DomainId, KappaResult64, Mesh64, SolverOptions, YParams,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn square_l2() -> &'static (Mesh64, KappaResult64) {
    static CELL: OnceLock<(Mesh64, KappaResult64)> = OnceLock::new();
    CELL.get_or_init(|| {
        let mesh = generate::<f64>(DomainId::UnitSquare, 2).unwrap();
        let k = compute_kappa(&mesh, &YParams::for_mesh(&mesh, 100.0).unwrap()).unwrap();
        (mesh, k)
    })
}

fn rayleigh(k: &KappaResult64, x: &[f64]) -> f64 {
    let num = k.matrix_a.quadratic_form(x);
    let den: f64 = x.iter().zip(&k.matrix_b).map(|(v, b)| b * v * v).sum();
    num / den
}

#[test]
fn rayleigh_quotient_never_exceeds_lambda_max() {
    let (_, k) = square_l2();
    let lambda = k.kappa * k.kappa;
    let n = k.num_boundary_edges;
    let mut rng = rand::rngs::StdRng::seed_from_u64(11);
    let mut x = vec![0.0; n];
    let mut worst = 0.0f64;
    for _ in 0..1_000_000 {
        for v in x.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        worst = worst.max(rayleigh(k, &x));
    }
    assert!(worst <= lambda * (1.0 + 1e-6), "{worst} > {lambda}");
    assert!(worst > 0.5 * lambda);
}

/// Power iteration gives a lower bound that approaches λmax slowly; the top of
/// the spectrum is nearly degenerate on the symmetric square.
#[test]
fn power_iteration_agrees_with_jacobi() {
    let (_, k) = square_l2();
    let n = k.num_boundary_edges;
    let mut x = vec![1.0; n];
    x[0] = 2.0;
    let mut lambda = 0.0;
    for _ in 0..20_000 {
        let y: Vec<f64> = k
            .matrix_a
            .mul_vec(&x)
            .iter()
            .zip(&k.matrix_b)
            .map(|(v, b)| v / b)
            .collect();
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        x = y.iter().map(|v| v / norm).collect();
        lambda = rayleigh(k, &x);
    }
    assert!(lambda.sqrt() <= k.kappa * (1.0 + 1e-12));
    assert_relative_eq!(lambda.sqrt(), k.kappa, max_relative = 1e-5);
}

#[test]
fn maximizer_attains_kappa() {
    let (mesh, k) = square_l2();
    let params = YParams::for_mesh(mesh, 100.0).unwrap();
    let solver = HypercircleSolver::new(mesh, SolverOptions::default()).unwrap();
    let y = solver.y_components(&k.maximizer, &params).unwrap().y;
    assert_relative_eq!(y / k.maximizer.norm_b(mesh), k.kappa, max_relative = 1e-10);
}

fn domain() -> impl Strategy<Value = DomainId> {
    prop::sample::select(DomainId::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn mesh_covers_domain(d in domain(), level in 1u32..=4) {
        let mesh = generate::<f64>(d, level).unwrap();
        prop_assert_eq!(mesh.euler_characteristic(), 1);
        let area: f64 = (0..mesh.num_triangles()).map(|t| mesh.area(t)).sum();
        prop_assert!((area - d.area()).abs() <= 1e-12);
        let perimeter: f64 = mesh.boundary_edges().iter().map(|&e| mesh.edge_length(e)).sum();
        prop_assert!((perimeter - d.perimeter()).abs() <= 1e-12);
        prop_assert_eq!(Some(mesh.num_triangles()), d.triangle_count(level));
    }

    #[test]
    fn form_reproduces_y_and_respects_kappa(
        values in prop::collection::vec(-1.0f64..1.0, 32),
        scale in 0.1f64..10.0,
    ) {
        let (mesh, k) = square_l2();
        prop_assume!(values.iter().any(|v| v.abs() > 1e-3));
        let params = YParams::for_mesh(mesh, 100.0).unwrap();
        let solver = HypercircleSolver::new(mesh, SolverOptions::default()).unwrap();
        let f = BoundaryData::new(values.clone());
        let y = solver.y_components(&f, &params).unwrap().y;
        let form = k.matrix_a.quadratic_form(&values);
        prop_assert!((form - y * y).abs() <= 1e-10 * form.max(1e-300));
        prop_assert!(y <= k.kappa * f.norm_b(mesh) * (1.0 + 1e-10));

        let scaled = BoundaryData::new(values.iter().map(|v| v * scale).collect());
        let ys = solver.y_components(&scaled, &params).unwrap().y;
        prop_assert!((ys - scale * y).abs() <= 1e-10 * scale * y);
    }
}
