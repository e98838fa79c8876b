//! The computable constant `κ_h = max_{f_h} Y(f_h, β) / ‖f_h‖_b`.
//!
//! For boundary data `f_h`, `ũ_h` solves the P1 Neumann problem and `p_h` is
//! the minimal-norm flux with `p_h·n = f_h` on `Γ` and `div p_h = π_h ũ_h`.
//! Then
//!
//! ```text
//! Y² = (2 + β + 1/β)(C₀h)⁴‖∇ũ_h‖₀² + (1 + 1/β)‖∇ũ_h − p_h‖₀²
//! ```
//!
//! is a quadratic form in the coefficients of `f_h`, and `κ_h²` is the largest
//! eigenvalue of `A x = λ B x` with `B = diag(|e|)`.

use rayon::prelude::*;

use crate::constants::c0_times_h;
use crate::error::{Error, Result};
use crate::fields::BoundaryData;
use crate::linalg::{max_generalized_eig, DenseSymMatrix, SolverOptions};
use crate::mesh::{DomainId, Mesh, Point};
use crate::p1::{project_pi_h, P1Solution, P1System};
use crate::rt0::{diff_norm_grad_minus_flux, MixedSolution, MixedSystem};
use crate::scalar::{ordered_sum, Scalar};

pub const DEFAULT_BETA: f64 = 100.0;

/// Parameters of `Y(f_h, β)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YParams<T> {
    beta: T,
    c0h: T,
}

impl<T: Scalar> YParams<T> {
    pub fn new(beta: T, c0h: T) -> Result<Self> {
        if !(beta > T::zero()) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must be positive, got {beta}"
            )));
        }
        if !(c0h >= T::zero()) || !c0h.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "C0h must be nonnegative, got {c0h}"
            )));
        }
        Ok(Self { beta, c0h })
    }

    /// Uses `C₀h = h / j₁,₁` of `mesh`.
    pub fn for_mesh(mesh: &Mesh<T>, beta: T) -> Result<Self> {
        Self::new(beta, c0_times_h(mesh))
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn c0h(&self) -> T {
        self.c0h
    }

    /// `(2 + β + 1/β)(C₀h)⁴`, the weight of `‖∇ũ_h‖₀²`.
    pub fn grad_coeff(&self) -> T {
        let b = self.beta;
        (T::lit(2.0) + b + b.recip()) * self.c0h.powi(4)
    }

    /// `1 + 1/β`, the weight of `‖∇ũ_h − p_h‖₀²`.
    pub fn gap_coeff(&self) -> T {
        T::one() + self.beta.recip()
    }
}

/// Both P1 and mixed systems of one mesh, factored once.
pub struct HypercircleSolver<'m, T> {
    mesh: &'m Mesh<T>,
    p1: P1System<'m, T>,
    mixed: MixedSystem<'m, T>,
}

/// The two squared norms entering `Y` and `Y` itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YComponents<T> {
    pub grad_sq: T,
    pub gap_sq: T,
    pub y: T,
}

impl<'m, T: Scalar> HypercircleSolver<'m, T> {
    pub fn new(mesh: &'m Mesh<T>, opts: SolverOptions) -> Result<Self> {
        Ok(Self {
            mesh,
            p1: P1System::new(mesh, opts)?,
            mixed: MixedSystem::new(mesh, opts)?,
        })
    }

    pub fn mesh(&self) -> &'m Mesh<T> {
        self.mesh
    }

    pub fn p1(&self) -> &P1System<'m, T> {
        &self.p1
    }

    pub fn mixed(&self) -> &MixedSystem<'m, T> {
        &self.mixed
    }

    /// Solves the P1 problem, then the mixed problem with target `π_h ũ_h`.
    pub fn solve(
        &self,
        f_h: &BoundaryData<T>,
    ) -> Result<(P1Solution<'m, T>, MixedSolution<'m, T>)> {
        let u = self.p1.solve(f_h)?;
        let p = self.mixed.solve(f_h, &project_pi_h(&u))?;
        Ok((u, p))
    }

    pub fn y_components(
        &self,
        f_h: &BoundaryData<T>,
        params: &YParams<T>,
    ) -> Result<YComponents<T>> {
        let (u, p) = self.solve(f_h)?;
        let grad_sq = ordered_sum(
            u.gradients()
                .iter()
                .enumerate()
                .map(|(t, g)| self.mesh.area(t) * (g[0] * g[0] + g[1] * g[1])),
        );
        let gap_sq = diff_norm_grad_minus_flux(&u, &p.flux)?;
        let y = (params.grad_coeff() * grad_sq + params.gap_coeff() * gap_sq).sqrt();
        Ok(YComponents { grad_sq, gap_sq, y })
    }

    /// Per-triangle `∇ũ_h` and `∇ũ_h − p_h` at the three edge midpoints.
    fn sample(&self, f_h: &BoundaryData<T>) -> Result<BasisSample<T>> {
        let (u, p) = self.solve(f_h)?;
        let mesh = self.mesh;
        let mut gap = Vec::with_capacity(3 * mesh.num_triangles());
        for t in 0..mesh.num_triangles() {
            let g = u.gradient(t);
            for e in mesh.triangle_edges(t) {
                let v = p.flux.value(t, mesh.edge_midpoint(e));
                gap.push([g[0] - v[0], g[1] - v[1]]);
            }
        }
        Ok(BasisSample {
            grad: u.gradients().to_vec(),
            gap,
        })
    }
}

struct BasisSample<T> {
    grad: Vec<Point<T>>,
    gap: Vec<Point<T>>,
}

/// `Y(f_h, β)` with fresh factorizations.
pub fn y_value<T: Scalar>(mesh: &Mesh<T>, f_h: &BoundaryData<T>, params: &YParams<T>) -> Result<T> {
    Ok(HypercircleSolver::new(mesh, SolverOptions::default())?
        .y_components(f_h, params)?
        .y)
}

/// Execution options for the per-boundary-edge solves.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaOptions {
    pub solver: SolverOptions,
    /// Worker threads; `0` uses rayon's default.
    pub jobs: usize,
}

impl Default for KappaOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            jobs: 1,
        }
    }
}

fn run_pool<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Matrices with `Y²(f_h) = xᵀAx` and `‖f_h‖_b² = xᵀBx`, `B = diag(|e|)`.
pub fn build_forms<T: Scalar>(
    mesh: &Mesh<T>,
    params: &YParams<T>,
    opts: KappaOptions,
) -> Result<(DenseSymMatrix<T>, Vec<T>)> {
    let solver = HypercircleSolver::new(mesh, opts.solver)?;
    build_forms_with(&solver, params, opts.jobs)
}

fn build_forms_with<T: Scalar>(
    solver: &HypercircleSolver<'_, T>,
    params: &YParams<T>,
    jobs: usize,
) -> Result<(DenseSymMatrix<T>, Vec<T>)> {
    Ok(GramParts::new(solver, jobs)?.combine(params))
}

/// `(∇ũᵢ, ∇ũⱼ)` and `(∇ũᵢ − pᵢ, ∇ũⱼ − pⱼ)` over the boundary-edge indicators.
/// `A` is their combination with the two weights of `Y²`, so one set of
/// solves serves every `β`.
struct GramParts<T> {
    grad: Vec<Vec<T>>,
    gap: Vec<Vec<T>>,
    b: Vec<T>,
}

impl<T: Scalar> GramParts<T> {
    fn new(solver: &HypercircleSolver<'_, T>, jobs: usize) -> Result<Self> {
        let mesh = solver.mesh;
        let n = mesh.num_boundary_edges();
        let samples: Vec<BasisSample<T>> = run_pool(jobs, || {
            (0..n)
                .into_par_iter()
                .map(|k| solver.sample(&BoundaryData::indicator(mesh, k)))
                .collect::<Result<Vec<_>>>()
        })?;

        let third = T::one() / T::lit(3.0);
        let entry = |i: usize, j: usize| -> (T, T) {
            let (si, sj) = (&samples[i], &samples[j]);
            let grad = ordered_sum((0..mesh.num_triangles()).map(|t| {
                let (a, b) = (si.grad[t], sj.grad[t]);
                mesh.area(t) * (a[0] * b[0] + a[1] * b[1])
            }));
            // Edge-midpoint rule, exact for the quadratic integrand.
            let gap = ordered_sum((0..mesh.num_triangles()).map(|t| {
                let s = ordered_sum((3 * t..3 * t + 3).map(|m| {
                    let (a, b) = (si.gap[m], sj.gap[m]);
                    a[0] * b[0] + a[1] * b[1]
                }));
                mesh.area(t) * third * s
            }));
            (grad, gap)
        };
        let rows: Vec<(Vec<T>, Vec<T>)> = run_pool(jobs, || {
            (0..n)
                .into_par_iter()
                .map(|i| (i..n).map(|j| entry(i, j)).unzip())
                .collect()
        });
        let (grad, gap) = rows.into_iter().unzip();
        let b = mesh
            .boundary_edges()
            .iter()
            .map(|&e| mesh.edge_length(e))
            .collect();
        Ok(Self { grad, gap, b })
    }

    fn combine(&self, params: &YParams<T>) -> (DenseSymMatrix<T>, Vec<T>) {
        let (wg, wr) = (params.grad_coeff(), params.gap_coeff());
        let n = self.b.len();
        let mut a = DenseSymMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n - i {
                a.set(i, i + k, wg * self.grad[i][k] + wr * self.gap[i][k]);
            }
        }
        (a, self.b.clone())
    }
}

#[derive(Clone, Debug)]
pub struct KappaResult<T> {
    pub kappa: T,
    /// Maximizing boundary data with `‖f_h‖_b = 1`.
    pub maximizer: BoundaryData<T>,
    pub matrix_a: DenseSymMatrix<T>,
    pub matrix_b: Vec<T>,
    pub beta: T,
    pub c0h: T,
    pub h: T,
    pub origin: Option<(DomainId, u32)>,
    pub num_boundary_edges: usize,
    /// `‖Ax − λBx‖₂` of the returned eigenpair.
    pub eig_residual: T,
}

/// `κ_h` with default options.
pub fn compute_kappa<T: Scalar>(mesh: &Mesh<T>, params: &YParams<T>) -> Result<KappaResult<T>> {
    compute_kappa_with(mesh, params, KappaOptions::default())
}

pub fn compute_kappa_with<T: Scalar>(
    mesh: &Mesh<T>,
    params: &YParams<T>,
    opts: KappaOptions,
) -> Result<KappaResult<T>> {
    let solver = HypercircleSolver::new(mesh, opts.solver)?;
    kappa_from_solver(&solver, params, opts.jobs)
}

/// `κ_h` for several `β` on one mesh, reusing the solves.
pub fn compute_kappa_sweep<T: Scalar>(
    mesh: &Mesh<T>,
    betas: &[T],
    opts: KappaOptions,
) -> Result<Vec<KappaResult<T>>> {
    let solver = HypercircleSolver::new(mesh, opts.solver)?;
    let parts = GramParts::new(&solver, opts.jobs)?;
    betas
        .iter()
        .map(|&b| {
            let params = YParams::for_mesh(mesh, b)?;
            kappa_from_forms(mesh, &params, parts.combine(&params))
        })
        .collect()
}

fn kappa_from_solver<T: Scalar>(
    solver: &HypercircleSolver<'_, T>,
    params: &YParams<T>,
    jobs: usize,
) -> Result<KappaResult<T>> {
    kappa_from_forms(solver.mesh, params, build_forms_with(solver, params, jobs)?)
}

fn kappa_from_forms<T: Scalar>(
    mesh: &Mesh<T>,
    params: &YParams<T>,
    (a, b): (DenseSymMatrix<T>, Vec<T>),
) -> Result<KappaResult<T>> {
    let eig = max_generalized_eig(&a, &b)?;
    Ok(KappaResult {
        kappa: eig.value.max(T::zero()).sqrt(),
        maximizer: BoundaryData::new(eig.vector),
        matrix_a: a,
        matrix_b: b,
        beta: params.beta,
        c0h: params.c0h,
        h: mesh.h(),
        origin: mesh.origin(),
        num_boundary_edges: mesh.num_boundary_edges(),
        eig_residual: eig.residual,
    })
}
