//! Property checks for the explicit constants, and convergence rates.

use crate::constants::{c0_times_h, trace_constant, TraceCoefficient};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::p1::project_pi_h_fn;
use crate::quadrature;
use crate::scalar::{ordered_sum, Scalar};

/// A quadratic `c₀ + c₁x + c₂y + c₃x² + c₄xy + c₅y²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadratic<T>(pub [T; 6]);

impl<T: Scalar> Quadratic<T> {
    pub fn value(&self, p: Point<T>) -> T {
        let c = self.0;
        let (x, y) = (p[0], p[1]);
        c[0] + c[1] * x + c[2] * y + c[3] * x * x + c[4] * x * y + c[5] * y * y
    }

    pub fn gradient(&self, p: Point<T>) -> Point<T> {
        let c = self.0;
        let (x, y) = (p[0], p[1]);
        let two = T::lit(2.0);
        [
            c[1] + two * c[3] * x + c[4] * y,
            c[2] + c[4] * x + two * c[5] * y,
        ]
    }
}

/// Both sides of the trace inequality `‖q‖_{L²(e)} ≤ C(e, K)|q|_{H¹(K)}` for
/// `q` shifted to have zero mean on `e`. Both integrals are exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceCheck<T> {
    pub trace_norm: T,
    pub bound: T,
}

impl<T: Scalar> TraceCheck<T> {
    pub fn holds(&self) -> bool {
        self.trace_norm <= self.bound * (T::one() + T::lit(1e-12))
    }
}

pub fn check_trace_inequality<T: Scalar>(
    mesh: &Mesh<T>,
    e: usize,
    t: usize,
    q: &Quadratic<T>,
    coeff: TraceCoefficient,
) -> Result<TraceCheck<T>> {
    let c = trace_constant(mesh, e, t, coeff)?;
    let pts = quadrature::edge_points(mesh, e);
    let mean = ordered_sum(pts.iter().map(|&(p, w)| w * q.value(p))) / mesh.edge_length(e);
    let trace_sq = ordered_sum(pts.iter().map(|&(p, w)| {
        let d = q.value(p) - mean;
        w * d * d
    }));
    let semi_sq = ordered_sum(
        quadrature::triangle_points(mesh, t)
            .iter()
            .map(|&(p, _, w)| {
                let g = q.gradient(p);
                w * (g[0] * g[0] + g[1] * g[1])
            }),
    );
    Ok(TraceCheck {
        trace_norm: trace_sq.sqrt(),
        bound: c * semi_sq.sqrt(),
    })
}

/// Both sides of `‖g − π_h g‖₀ ≤ C₀h |g|_{H¹}`, by the 7-point rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionCheck<T> {
    pub error: T,
    pub bound: T,
}

pub fn check_projection_bound<T: Scalar>(
    mesh: &Mesh<T>,
    g: impl Fn(Point<T>) -> T,
    grad_g: impl Fn(Point<T>) -> Point<T>,
) -> ProjectionCheck<T> {
    let pi = project_pi_h_fn(mesh, &g);
    let mut err = Vec::with_capacity(mesh.num_triangles());
    let mut semi = Vec::with_capacity(mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        for (p, _, w) in quadrature::triangle_points(mesh, t) {
            let d = g(p) - pi.values[t];
            let gg = grad_g(p);
            err.push(w * d * d);
            semi.push(w * (gg[0] * gg[0] + gg[1] * gg[1]));
        }
    }
    ProjectionCheck {
        error: ordered_sum(err).sqrt(),
        bound: c0_times_h(mesh) * ordered_sum(semi).sqrt(),
    }
}

/// `log₂(q_k / q_{k+1})` for consecutive rows `(h, q)` with halving `h`.
pub fn rate_table<T: Scalar>(values: &[(T, T)]) -> Result<Vec<T>> {
    let tol = T::lit(1e-9);
    values
        .windows(2)
        .enumerate()
        .map(|(k, w)| {
            let ((h0, q0), (h1, q1)) = (w[0], w[1]);
            if ((h0 / (h1 + h1)) - T::one()).abs() > tol {
                return Err(Error::NonHalvingSequence {
                    row: k,
                    next: k + 1,
                });
            }
            Ok((q0 / q1).log2())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate, DomainId};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn rates_of_simple_sequences() {
        let r = rate_table(&[(1.0, 1.0), (0.5, 0.5), (0.25, 0.25)]).unwrap();
        assert_relative_eq!(r[0], 1.0);
        assert_relative_eq!(r[1], 1.0);
        let c = rate_table(&[(1.0, 3.0), (0.5, 3.0)]).unwrap();
        assert_eq!(c, vec![0.0]);
        assert!(matches!(
            rate_table(&[(1.0, 1.0), (0.4, 1.0)]),
            Err(Error::NonHalvingSequence { row: 0, next: 1 })
        ));
        assert!(rate_table::<f64>(&[]).unwrap().is_empty());
    }

    #[test]
    fn tabulated_kappa_rates() {
        let h = 2f64.sqrt() / 4.0;
        let rows = [
            (h, 0.4143),
            (h / 2.0, 0.2973),
            (h / 4.0, 0.2110),
            (h / 8.0, 0.1493),
        ];
        let r = rate_table(&rows).unwrap();
        for (got, want) in r.iter().zip([0.4788, 0.4947, 0.4990]) {
            assert!((got - want).abs() < 1e-3, "{got} vs {want}");
        }
    }

    #[test]
    fn trace_inequality_for_random_quadratics() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for d in DomainId::ALL {
            let m: Mesh<f64> = generate(d, 1).unwrap();
            for _ in 0..50 {
                let q = Quadratic(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
                let k = rng.gen_range(0..m.num_boundary_edges());
                let e = m.boundary_edges()[k];
                let c = check_trace_inequality(
                    &m,
                    e,
                    m.edges()[e].first,
                    &q,
                    TraceCoefficient::Rounded,
                )
                .unwrap();
                assert!(c.holds(), "{d}: {c:?}");
            }
        }
    }

    #[test]
    fn projection_bound_for_sine_product() {
        use std::f64::consts::PI;
        for l in 1..=3 {
            let m: Mesh<f64> = generate(DomainId::UnitSquare, l).unwrap();
            let c = check_projection_bound(
                &m,
                |p| (PI * p[0]).sin() * (PI * p[1]).sin(),
                |p| {
                    [
                        PI * (PI * p[0]).cos() * (PI * p[1]).sin(),
                        PI * (PI * p[0]).sin() * (PI * p[1]).cos(),
                    ]
                },
            );
            assert!(c.error <= c.bound, "{c:?}");
        }
    }
}
