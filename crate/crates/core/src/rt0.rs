//! Lowest-order Raviart-Thomas fluxes and the constrained mixed problem.
//!
//! A flux is stored as one coefficient per edge: its normal component along
//! the edge's reference normal (see [`crate::mesh`]). On triangle `K` the basis
//! function of the edge opposite vertex `P` is
//! `ψ = σ·|e|/(2|K|)·(x − P)`, with `σ = ±1` the orientation sign, so that
//! `div ψ = σ|e|/|K|` and `ψ·n = 1` on `e`.
//!
//! The mixed system has unknowns `(interior fluxes, ρ_h per triangle, c)`:
//!
//! ```text
//! (p, p̃) + (ρ, div p̃)            = 0                 p̃ with zero boundary flux
//! (div p, q̃) + (c, q̃)            = (target, q̃)       q̃ piecewise constant
//! (ρ, d)                          = 0                 d constant
//! ```
//!
//! Boundary fluxes are imposed strongly from `f_h`.

use crate::error::{Error, Result};
use crate::fields::{BoundaryData, PiecewiseConstantField};
use crate::linalg::{Factorization, SolverOptions, SparseSymMatrix, SymTripletBuilder};
use crate::mesh::{Mesh, Point};
use crate::p1::{check_boundary_len, P1Solution};
use crate::scalar::{ordered_sum, Scalar};

/// Relative bound on the compatibility multiplier `|c| ≤ 1e-8·‖target‖₀`.
pub const COMPATIBILITY_TOL: f64 = 1e-8;

/// Signed scale `σ|e|/(2|K|)` of the local basis function opposite vertex `i`.
fn basis_scale<T: Scalar>(mesh: &Mesh<T>, t: usize, i: usize) -> T {
    let e = mesh.triangle_edges(t)[i];
    mesh.edge_sign(t, i) * mesh.edge_length(e) / (mesh.area(t) * T::lit(2.0))
}

/// Exact local mass matrix `∫_K ψᵢ·ψⱼ` (local edges ordered by opposite vertex).
pub fn element_flux_mass<T: Scalar>(mesh: &Mesh<T>, t: usize) -> [[T; 3]; 3] {
    let p = mesh.triangle_points(t);
    let c = mesh.centroid(t);
    let area = mesh.area(t);
    let d: [Point<T>; 3] = p.map(|q| [c[0] - q[0], c[1] - q[1]]);
    // ∫_K |x − c|² = |K|/12·Σ_k |P_k − c|²
    let second = ordered_sum(d.iter().map(|v| v[0] * v[0] + v[1] * v[1])) / T::lit(12.0);
    let s: [T; 3] = std::array::from_fn(|i| basis_scale(mesh, t, i));
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            s[i] * s[j] * area * (second + d[i][0] * d[j][0] + d[i][1] * d[j][1])
        })
    })
}

/// `∫_K div ψ_e = σ|e|` for the local edges of `t`.
pub fn element_divergence<T: Scalar>(mesh: &Mesh<T>, t: usize) -> [T; 3] {
    std::array::from_fn(|i| mesh.edge_sign(t, i) * mesh.edge_length(mesh.triangle_edges(t)[i]))
}

/// Mass matrix over all edge fluxes.
pub fn assemble_flux_mass<T: Scalar>(mesh: &Mesh<T>) -> SparseSymMatrix<T> {
    let mut b = SymTripletBuilder::new(mesh.num_edges());
    for t in 0..mesh.num_triangles() {
        let m = element_flux_mass(mesh, t);
        let e = mesh.triangle_edges(t);
        for i in 0..3 {
            for j in i..3 {
                b.add(e[i], e[j], m[i][j]);
            }
        }
    }
    b.build()
}

/// A flux in the lowest-order Raviart-Thomas space.
#[derive(Clone, Debug)]
pub struct Rt0Field<'m, T> {
    mesh: &'m Mesh<T>,
    coeffs: Vec<T>,
}

impl<'m, T: Scalar> Rt0Field<'m, T> {
    pub fn new(mesh: &'m Mesh<T>, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() != mesh.num_edges() {
            return Err(Error::DimensionMismatch {
                what: "flux coefficients",
                expected: mesh.num_edges(),
                found: coeffs.len(),
            });
        }
        Ok(Self { mesh, coeffs })
    }

    pub fn zeros(mesh: &'m Mesh<T>) -> Self {
        Self {
            mesh,
            coeffs: vec![T::zero(); mesh.num_edges()],
        }
    }

    /// Interpolant of a constant vector field (exact, constants lie in the space).
    pub fn from_constant(mesh: &'m Mesh<T>, v: Point<T>) -> Self {
        let coeffs = (0..mesh.num_edges())
            .map(|e| {
                let n = mesh.edge_normal(e);
                v[0] * n[0] + v[1] * n[1]
            })
            .collect();
        Self { mesh, coeffs }
    }

    pub fn mesh(&self) -> &'m Mesh<T> {
        self.mesh
    }

    /// Normal components along the reference normals.
    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Total flux `∫_e p·n ds` through edge `e` along its reference normal.
    pub fn edge_flux(&self, e: usize) -> T {
        self.coeffs[e] * self.mesh.edge_length(e)
    }

    pub fn value(&self, t: usize, x: Point<T>) -> Point<T> {
        let p = self.mesh.triangle_points(t);
        let e = self.mesh.triangle_edges(t);
        let mut out = [T::zero(); 2];
        for i in 0..3 {
            let s = basis_scale(self.mesh, t, i) * self.coeffs[e[i]];
            out[0] += s * (x[0] - p[i][0]);
            out[1] += s * (x[1] - p[i][1]);
        }
        out
    }

    /// Constant divergence on triangle `t`.
    pub fn divergence(&self, t: usize) -> T {
        let e = self.mesh.triangle_edges(t);
        let d = element_divergence(self.mesh, t);
        ordered_sum((0..3).map(|i| d[i] * self.coeffs[e[i]])) / self.mesh.area(t)
    }

    pub fn divergence_field(&self) -> PiecewiseConstantField<T> {
        PiecewiseConstantField::new(
            (0..self.mesh.num_triangles())
                .map(|t| self.divergence(t))
                .collect(),
        )
    }
}

/// Solution of the constrained mixed problem.
#[derive(Clone, Debug)]
pub struct MixedSolution<'m, T> {
    pub flux: Rt0Field<'m, T>,
    /// Multiplier `ρ_h`, normalized to zero mean.
    pub rho: PiecewiseConstantField<T>,
    /// Compatibility multiplier; zero whenever `∫ target = ∫_Γ f_h`.
    pub c: T,
}

/// Row layout of the mixed system.
#[derive(Clone, Debug)]
struct Layout {
    /// Edge -> row for interior edges.
    interior_row: Vec<Option<usize>>,
    n_interior: usize,
    n_tri: usize,
}

impl Layout {
    fn new<T: Scalar>(mesh: &Mesh<T>) -> Self {
        let mut interior_row = vec![None; mesh.num_edges()];
        let mut n = 0;
        for (e, edge) in mesh.edges().iter().enumerate() {
            if !edge.is_boundary() {
                interior_row[e] = Some(n);
                n += 1;
            }
        }
        Self {
            interior_row,
            n_interior: n,
            n_tri: mesh.num_triangles(),
        }
    }

    fn rho(&self, t: usize) -> usize {
        self.n_interior + t
    }

    fn c(&self) -> usize {
        self.n_interior + self.n_tri
    }

    fn dim(&self) -> usize {
        self.n_interior + self.n_tri + 1
    }
}

/// Assembles the symmetric indefinite mixed matrix over
/// `(interior fluxes, ρ_h, c)`; the last row is the `d` constraint `∫ρ_h = 0`.
pub fn assemble_mixed<T: Scalar>(mesh: &Mesh<T>) -> SparseSymMatrix<T> {
    assemble_with_layout(mesh, &Layout::new(mesh)).0
}

/// Matrix plus the couplings `(row, boundary slot, coefficient)` to the imposed boundary fluxes.
fn assemble_with_layout<T: Scalar>(
    mesh: &Mesh<T>,
    layout: &Layout,
) -> (SparseSymMatrix<T>, Vec<(usize, usize, T)>) {
    let mut b = SymTripletBuilder::new(layout.dim());
    let mut coupling = Vec::new();
    for t in 0..mesh.num_triangles() {
        let m = element_flux_mass(mesh, t);
        let d = element_divergence(mesh, t);
        let e = mesh.triangle_edges(t);
        let rho = layout.rho(t);
        for i in 0..3 {
            match layout.interior_row[e[i]] {
                Some(ri) => {
                    for j in 0..3 {
                        match layout.interior_row[e[j]] {
                            Some(rj) if rj >= ri => b.add(ri, rj, m[i][j]),
                            Some(_) => {}
                            None => {
                                let slot = mesh.boundary_slot(e[j]).expect("boundary edge");
                                coupling.push((ri, slot, m[i][j] * mesh.boundary_sign(e[j])));
                            }
                        }
                    }
                    b.add(ri, rho, d[i]);
                }
                None => {
                    let slot = mesh.boundary_slot(e[i]).expect("boundary edge");
                    coupling.push((rho, slot, d[i] * mesh.boundary_sign(e[i])));
                }
            }
        }
        b.add(rho, layout.c(), mesh.area(t));
    }
    (b.build(), coupling)
}

/// Mixed system factored once per mesh.
#[derive(Clone, Debug)]
pub struct MixedSystem<'m, T> {
    mesh: &'m Mesh<T>,
    layout: Layout,
    coupling: Vec<(usize, usize, T)>,
    factor: Factorization<T>,
}

impl<'m, T: Scalar> MixedSystem<'m, T> {
    pub fn new(mesh: &'m Mesh<T>, opts: SolverOptions) -> Result<Self> {
        let layout = Layout::new(mesh);
        let (matrix, coupling) = assemble_with_layout(mesh, &layout);
        let factor = Factorization::indefinite(&matrix, opts)?;
        Ok(Self {
            mesh,
            layout,
            coupling,
            factor,
        })
    }

    pub fn matrix(&self) -> &SparseSymMatrix<T> {
        self.factor.matrix()
    }

    pub fn factorization(&self) -> &Factorization<T> {
        &self.factor
    }

    /// Solves without judging the compatibility multiplier.
    pub fn solve_unchecked(
        &self,
        f_h: &BoundaryData<T>,
        target_div: &PiecewiseConstantField<T>,
    ) -> Result<MixedSolution<'m, T>> {
        let mesh = self.mesh;
        check_boundary_len(mesh, f_h)?;
        if target_div.len() != mesh.num_triangles() {
            return Err(Error::DimensionMismatch {
                what: "divergence target",
                expected: mesh.num_triangles(),
                found: target_div.len(),
            });
        }
        let l = &self.layout;
        let mut rhs = vec![T::zero(); l.dim()];
        for t in 0..mesh.num_triangles() {
            rhs[l.rho(t)] = target_div.values[t] * mesh.area(t);
        }
        for &(row, slot, coef) in &self.coupling {
            rhs[row] -= coef * f_h.values[slot];
        }
        let x = self.factor.solve(&rhs)?;

        let mut coeffs = vec![T::zero(); mesh.num_edges()];
        for (e, row) in l.interior_row.iter().enumerate() {
            if let Some(r) = row {
                coeffs[e] = x[*r];
            }
        }
        for (&e, &f) in mesh.boundary_edges().iter().zip(&f_h.values) {
            coeffs[e] = f * mesh.boundary_sign(e);
        }
        let rho = PiecewiseConstantField::new((0..l.n_tri).map(|t| x[l.rho(t)]).collect());
        Ok(MixedSolution {
            flux: Rt0Field { mesh, coeffs },
            rho,
            c: x[l.c()],
        })
    }

    /// Solves and checks `|c| ≤ 1e-8·‖target‖₀`.
    pub fn solve(
        &self,
        f_h: &BoundaryData<T>,
        target_div: &PiecewiseConstantField<T>,
    ) -> Result<MixedSolution<'m, T>> {
        let sol = self.solve_unchecked(f_h, target_div)?;
        let scale = target_div.l2_norm(self.mesh);
        if !(sol.c.abs() <= T::lit(COMPATIBILITY_TOL) * scale) {
            let mismatch = f_h.integral(self.mesh) - target_div.integral(self.mesh);
            return Err(Error::Incompatible {
                c: sol.c.to_f64_lossy(),
                mismatch: mismatch.to_f64_lossy(),
            });
        }
        Ok(sol)
    }
}

/// One-shot mixed solve.
pub fn solve_mixed<'m, T: Scalar>(
    mesh: &'m Mesh<T>,
    f_h: &BoundaryData<T>,
    target_div: &PiecewiseConstantField<T>,
) -> Result<MixedSolution<'m, T>> {
    MixedSystem::new(mesh, SolverOptions::default())?.solve(f_h, target_div)
}

/// `‖∇u − p‖₀²`, exact: the integrand is quadratic and the edge-midpoint rule
/// integrates quadratics exactly.
pub fn diff_norm_grad_minus_flux<T: Scalar>(
    u: &P1Solution<'_, T>,
    p: &Rt0Field<'_, T>,
) -> Result<T> {
    if !std::ptr::eq(u.mesh(), p.mesh) {
        return Err(Error::MeshMismatch);
    }
    let mesh = p.mesh;
    let third = T::one() / T::lit(3.0);
    Ok(ordered_sum((0..mesh.num_triangles()).map(|t| {
        let g = u.gradient(t);
        let s = ordered_sum(mesh.triangle_edges(t).iter().map(|&e| {
            let v = p.value(t, mesh.edge_midpoint(e));
            let (dx, dy) = (g[0] - v[0], g[1] - v[1]);
            dx * dx + dy * dy
        }));
        s * mesh.area(t) * third
    })))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::LinalgError;
    use crate::mesh::{generate, DomainId};
    use crate::p1::{project_pi_h, solve_neumann};
    use approx::assert_relative_eq;

    fn reference() -> Mesh<f64> {
        Mesh::from_parts(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]]).unwrap()
    }

    #[test]
    fn basis_divergence_and_normal_flux() {
        let m = reference();
        for i in 0..3 {
            let e = m.triangle_edges(0)[i];
            let mut c = vec![0.0; 3];
            c[e] = 1.0;
            let f = Rt0Field::new(&m, c).unwrap();
            let sign = m.edge_sign(0, i);
            assert_relative_eq!(
                f.divergence(0),
                sign * m.edge_length(e) / m.area(0),
                epsilon = 1e-14
            );
            // divergence theorem on the single triangle
            assert_relative_eq!(
                f.divergence(0) * m.area(0),
                sign * m.edge_length(e),
                epsilon = 1e-14
            );
            // unit normal component along the reference normal at the edge midpoint,
            // zero normal component on the other edges
            for j in 0..3 {
                let ej = m.triangle_edges(0)[j];
                let v = f.value(0, m.edge_midpoint(ej));
                let n = m.edge_normal(ej);
                let expect = if j == i { 1.0 } else { 0.0 };
                assert_relative_eq!(v[0] * n[0] + v[1] * n[1], expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn closed_form_mass_matches_midpoint_rule() {
        let m: Mesh<f64> = generate(DomainId::EquilateralTriangle, 1).unwrap();
        for t in [0, 5, 11] {
            let mass = element_flux_mass(&m, t);
            let e = m.triangle_edges(t);
            for i in 0..3 {
                for j in 0..3 {
                    let mut ci = vec![0.0; m.num_edges()];
                    ci[e[i]] = 1.0;
                    let mut cj = vec![0.0; m.num_edges()];
                    cj[e[j]] = 1.0;
                    let (fi, fj) = (
                        Rt0Field::new(&m, ci).unwrap(),
                        Rt0Field::new(&m, cj).unwrap(),
                    );
                    let q: f64 = e
                        .iter()
                        .map(|&k| {
                            let x = m.edge_midpoint(k);
                            let (a, b) = (fi.value(t, x), fj.value(t, x));
                            a[0] * b[0] + a[1] * b[1]
                        })
                        .sum::<f64>()
                        * m.area(t)
                        / 3.0;
                    assert_relative_eq!(mass[i][j], q, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn zero_data_gives_zero_fields() {
        let m: Mesh<f64> = generate(DomainId::UnitSquare, 1).unwrap();
        let s = solve_mixed(
            &m,
            &BoundaryData::zeros(&m),
            &PiecewiseConstantField::constant(&m, 0.0),
        )
        .unwrap();
        assert!(s.flux.coeffs().iter().all(|&v| v == 0.0));
        assert!(s.rho.values.iter().all(|&v| v == 0.0));
        assert_eq!(s.c, 0.0);
    }

    #[test]
    fn unit_outflow_with_matching_divergence() {
        let m: Mesh<f64> = generate(DomainId::UnitSquare, 1).unwrap();
        let s = solve_mixed(
            &m,
            &BoundaryData::constant(&m, 1.0),
            &PiecewiseConstantField::constant(&m, 4.0),
        )
        .unwrap();
        assert!(s.c.abs() <= 1e-12);
        for t in 0..m.num_triangles() {
            assert_relative_eq!(s.flux.divergence(t), 4.0, epsilon = 1e-9);
        }
        assert!(s.rho.integral(&m).abs() <= 1e-12);
        // strong boundary condition: outward flux equals f_h exactly
        for &e in m.boundary_edges() {
            assert_eq!(s.flux.coeffs()[e] * m.boundary_sign(e), 1.0);
        }
    }

    #[test]
    fn incompatible_pair_reports_multiplier() {
        let m: Mesh<f64> = generate(DomainId::UnitSquare, 1).unwrap();
        let sys = MixedSystem::new(&m, SolverOptions::default()).unwrap();
        let f = BoundaryData::constant(&m, 1.0);
        let zero = PiecewiseConstantField::constant(&m, 0.0);
        let raw = sys.solve_unchecked(&f, &zero).unwrap();
        assert_relative_eq!(raw.c, -4.0, epsilon = 1e-10);
        match sys.solve(&f, &zero) {
            Err(Error::Incompatible { c, mismatch }) => {
                assert_relative_eq!(c, -4.0, epsilon = 1e-10);
                assert_relative_eq!(mismatch, 4.0, epsilon = 1e-12);
            }
            other => panic!("expected incompatibility, got {other:?}"),
        }
    }

    #[test]
    fn dropping_the_multiplier_makes_the_system_singular() {
        let m: Mesh<f64> = generate(DomainId::UnitSquare, 1).unwrap();
        let a = assemble_mixed(&m);
        let reduced = a.without(&[a.dim() - 1]);
        let rhs = vec![0.0; reduced.dim()];
        assert!(matches!(
            crate::linalg::solve_sym_indefinite(&reduced, &rhs),
            Err(LinalgError::Singular { .. })
        ));
    }

    #[test]
    fn discrete_divergence_telescopes() {
        for d in DomainId::ALL {
            let m: Mesh<f64> = generate(d, 2).unwrap();
            let f = BoundaryData::new(
                (0..m.num_boundary_edges())
                    .map(|k| (k as f64 * 0.7).sin())
                    .collect(),
            );
            let u = solve_neumann(&m, &f).unwrap();
            let s = solve_mixed(&m, &f, &project_pi_h(&u)).unwrap();
            let total = s.flux.divergence_field().integral(&m);
            assert_relative_eq!(total, f.integral(&m), epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_gradient_has_zero_gap() {
        let m = reference();
        let u = P1Solution::interpolate(&m, |p| 3.0 * p[0] - p[1]);
        let p = Rt0Field::from_constant(&m, [3.0, -1.0]);
        assert!(diff_norm_grad_minus_flux(&u, &p).unwrap() < 1e-28);
    }

    #[test]
    fn gap_of_single_basis_is_mass_diagonal() {
        let m: Mesh<f64> = generate(DomainId::UnitSquare, 1).unwrap();
        let mass = assemble_flux_mass(&m);
        let u = P1Solution::interpolate(&m, |_| 0.0);
        for e in [0, 7, 20] {
            let mut c = vec![0.0; m.num_edges()];
            c[e] = 1.0;
            let p = Rt0Field::new(&m, c).unwrap();
            assert_relative_eq!(
                diff_norm_grad_minus_flux(&u, &p).unwrap(),
                mass.get(e, e),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn mesh_mismatch_is_rejected() {
        let a: Mesh<f64> = generate(DomainId::UnitSquare, 1).unwrap();
        let b = a.clone();
        let u = P1Solution::interpolate(&a, |_| 0.0);
        let p = Rt0Field::zeros(&b);
        assert!(matches!(
            diff_norm_grad_minus_flux(&u, &p),
            Err(Error::MeshMismatch)
        ));
    }
}
