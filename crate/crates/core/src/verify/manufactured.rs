//! Closed-form solutions of `−Δu + u = 0` and true errors against them.

use crate::error::{Error, Result};
use crate::estimator::BoundaryFunction;
use crate::mesh::{Mesh, Point};
use crate::p1::P1Solution;
use crate::quadrature;
use crate::scalar::{ordered_sum, Scalar};

/// `u = Σ cₖ e^{aₖx + bₖy}` with `aₖ² + bₖ² = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct ManufacturedSolution<T> {
    name: String,
    terms: Vec<[T; 3]>,
}

/// Names accepted by [`ManufacturedSolution::by_name`].
pub const CATALOG: [&str; 3] = ["exp_x", "exp_diag", "zero"];

impl<T: Scalar> ManufacturedSolution<T> {
    /// `terms[k] = [cₖ, aₖ, bₖ]`.
    pub fn new(name: impl Into<String>, terms: Vec<[T; 3]>) -> Result<Self> {
        for &[c, a, b] in &terms {
            let r = a * a + b * b - T::one();
            if !c.is_finite() || r.abs() > T::lit(1e-12).max(T::epsilon() * T::lit(8.0)) {
                return Err(Error::InvalidParameter(format!(
                    "exponential term ({c}, {a}, {b}) does not satisfy a² + b² = 1"
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            terms,
        })
    }

    /// `u = eˣ`.
    pub fn exp_x() -> Self {
        Self::new("exp_x", vec![[T::one(), T::one(), T::zero()]]).expect("valid term")
    }

    /// `u = e^{(x+y)/√2}`.
    pub fn exp_diag() -> Self {
        let s = T::FRAC_1_SQRT_2();
        Self::new("exp_diag", vec![[T::one(), s, s]]).expect("valid term")
    }

    pub fn zero() -> Self {
        Self::new("zero", Vec::new()).expect("no terms")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "exp_x" => Ok(Self::exp_x()),
            "exp_diag" => Ok(Self::exp_diag()),
            "zero" => Ok(Self::zero()),
            _ => Err(Error::InvalidParameter(format!(
                "unknown function `{name}` (expected one of {})",
                CATALOG.join(", ")
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self, p: Point<T>) -> T {
        ordered_sum(
            self.terms
                .iter()
                .map(|&[c, a, b]| c * (a * p[0] + b * p[1]).exp()),
        )
    }

    pub fn gradient(&self, p: Point<T>) -> Point<T> {
        let mut g = [T::zero(); 2];
        for &[c, a, b] in &self.terms {
            let e = c * (a * p[0] + b * p[1]).exp();
            g[0] += a * e;
            g[1] += b * e;
        }
        g
    }

    pub fn laplacian(&self, p: Point<T>) -> T {
        ordered_sum(
            self.terms
                .iter()
                .map(|&[c, a, b]| (a * a + b * b) * c * (a * p[0] + b * p[1]).exp()),
        )
    }

    /// `−Δu + u` at `p`.
    pub fn pde_residual(&self, p: Point<T>) -> T {
        self.value(p) - self.laplacian(p)
    }

    /// `f = ∇u·n`.
    pub fn neumann_data(&self) -> BoundaryFunction<T> {
        let me = self.clone();
        BoundaryFunction::new(self.name.clone(), move |p, n| {
            let g = me.gradient(p);
            g[0] * n[0] + g[1] * n[1]
        })
    }
}

/// Errors of a P1 function against a known solution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrueError<T> {
    pub l2: T,
    pub grad: T,
    /// `√(‖e‖₀² + ‖∇e‖₀²)`.
    pub h1: T,
    /// `‖e‖_{L²(Γ)}`.
    pub boundary: T,
}

/// `u − u_h` in `H¹(Ω)` (7-point triangle rule) and on `Γ` (5-point edge rule).
pub fn true_error<T: Scalar>(
    u_h: &P1Solution<'_, T>,
    exact: &ManufacturedSolution<T>,
) -> TrueError<T> {
    let mesh: &Mesh<T> = u_h.mesh();
    let mut l2 = Vec::with_capacity(mesh.num_triangles());
    let mut grad = Vec::with_capacity(mesh.num_triangles());
    for t in 0..mesh.num_triangles() {
        let gh = u_h.gradient(t);
        let (mut a, mut b) = (T::zero(), T::zero());
        for (p, bary, w) in quadrature::triangle_points(mesh, t) {
            let d = exact.value(p) - u_h.eval_bary(t, bary);
            let g = exact.gradient(p);
            let (dx, dy) = (g[0] - gh[0], g[1] - gh[1]);
            a += w * d * d;
            b += w * (dx * dx + dy * dy);
        }
        l2.push(a);
        grad.push(b);
    }
    let boundary = ordered_sum(mesh.boundary_edges().iter().map(|&e| {
        let t = mesh.edges()[e].first;
        ordered_sum(quadrature::edge_points(mesh, e).iter().map(|&(p, w)| {
            let d = exact.value(p) - u_h.eval_in(t, p);
            w * d * d
        }))
    }));
    let (l2, grad) = (ordered_sum(l2), ordered_sum(grad));
    TrueError {
        l2: l2.sqrt(),
        grad: grad.sqrt(),
        h1: (l2 + grad).sqrt(),
        boundary: boundary.sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::project_pi_gamma;
    use crate::mesh::{generate, DomainId};
    use crate::p1::solve_neumann;
    use rand::{Rng, SeedableRng};

    #[test]
    fn registered_solutions_solve_the_pde() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for name in CATALOG {
            let u = ManufacturedSolution::<f64>::by_name(name).unwrap();
            for _ in 0..1000 {
                let p = [rng.gen_range(-1.0..2.0), rng.gen_range(-1.0..2.0)];
                assert!(u.pde_residual(p).abs() <= 1e-12 * u.value(p).abs().max(1.0));
            }
        }
        assert!(ManufacturedSolution::<f64>::by_name("sin").is_err());
        assert!(ManufacturedSolution::<f64>::new("bad", vec![[1.0, 1.0, 1.0]]).is_err());
    }

    #[test]
    fn interpolant_error_decays_first_order() {
        let u = ManufacturedSolution::<f64>::exp_x();
        let errs: Vec<f64> = (1..=4)
            .map(|l| {
                let m = generate(DomainId::UnitSquare, l).unwrap();
                let ih = P1Solution::interpolate(&m, |p| u.value(p));
                true_error(&ih, &u).h1
            })
            .collect();
        for w in errs.windows(2) {
            let rate = (w[0] / w[1]).log2();
            assert!((rate - 1.0).abs() < 0.05, "rate {rate}");
        }
    }

    #[test]
    fn fem_error_decreases_on_every_domain() {
        let u = ManufacturedSolution::<f64>::exp_x();
        for d in DomainId::ALL {
            let mut last = f64::INFINITY;
            for l in 1..=3 {
                let m = generate(d, l).unwrap();
                let fh = project_pi_gamma(&m, &u.neumann_data()).unwrap();
                let uh = solve_neumann(&m, &fh).unwrap();
                let e = true_error(&uh, &u).h1;
                assert!(e < last, "{d} level {l}");
                last = e;
            }
        }
    }

    #[test]
    fn linear_interpolant_of_zero_has_zero_error() {
        let m: Mesh<f64> = generate(DomainId::LShape, 1).unwrap();
        let z = ManufacturedSolution::zero();
        let e = true_error(&P1Solution::interpolate(&m, |_| 0.0), &z);
        assert_eq!(e.h1, 0.0);
        assert_eq!(e.boundary, 0.0);
    }
}
