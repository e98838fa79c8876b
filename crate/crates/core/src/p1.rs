//! Conforming piecewise-linear elements for `a(u,v) = ∫(∇u·∇v + uv) dx`
//! with boundary load `b(f,v) = ∫_Γ f v ds`.

use crate::error::{Error, Result};
use crate::fields::{BoundaryData, PiecewiseConstantField};
use crate::linalg::{Factorization, SolverOptions, SparseSymMatrix, SymTripletBuilder};
use crate::mesh::{Mesh, Point};
use crate::quadrature::triangle_points;
use crate::scalar::{ordered_sum, Scalar};

/// Gradients of the three barycentric coordinates on triangle `t`.
pub fn barycentric_gradients<T: Scalar>(mesh: &Mesh<T>, t: usize) -> [Point<T>; 3] {
    let p = mesh.triangle_points(t);
    let two_area = mesh.area(t) * T::lit(2.0);
    std::array::from_fn(|i| {
        let (a, b) = (p[(i + 1) % 3], p[(i + 2) % 3]);
        [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area]
    })
}

/// Exact P1 stiffness block `|K| ∇λᵢ·∇λⱼ`.
pub fn element_stiffness<T: Scalar>(mesh: &Mesh<T>, t: usize) -> [[T; 3]; 3] {
    let g = barycentric_gradients(mesh, t);
    let area = mesh.area(t);
    std::array::from_fn(|i| std::array::from_fn(|j| area * (g[i][0] * g[j][0] + g[i][1] * g[j][1])))
}

/// Exact P1 mass block `|K|/12·[[2,1,1],[1,2,1],[1,1,2]]`.
pub fn element_mass<T: Scalar>(mesh: &Mesh<T>, t: usize) -> [[T; 3]; 3] {
    let a12 = mesh.area(t) / T::lit(12.0);
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { a12 + a12 } else { a12 }))
}

/// Global matrix of `a(·,·)` over the nodal basis.
pub fn assemble_bilinear<T: Scalar>(mesh: &Mesh<T>) -> SparseSymMatrix<T> {
    let mut b = SymTripletBuilder::new(mesh.num_vertices());
    for t in 0..mesh.num_triangles() {
        let k = element_stiffness(mesh, t);
        let m = element_mass(mesh, t);
        let v = mesh.triangles()[t];
        for i in 0..3 {
            for j in i..3 {
                b.add(v[i], v[j], k[i][j] + m[i][j]);
            }
        }
    }
    b.build()
}

/// Load vector `Lᵢ = Σ_{e∋i, e⊂Γ} f_h(e)·|e|/2`.
pub fn assemble_boundary_load<T: Scalar>(mesh: &Mesh<T>, f_h: &BoundaryData<T>) -> Result<Vec<T>> {
    check_boundary_len(mesh, f_h)?;
    let mut load = vec![T::zero(); mesh.num_vertices()];
    let half = T::lit(0.5);
    for (&e, &f) in mesh.boundary_edges().iter().zip(&f_h.values) {
        let w = f * mesh.edge_length(e) * half;
        for v in mesh.edges()[e].vertices {
            load[v] += w;
        }
    }
    Ok(load)
}

pub(crate) fn check_boundary_len<T: Scalar>(mesh: &Mesh<T>, f_h: &BoundaryData<T>) -> Result<()> {
    if f_h.len() != mesh.num_boundary_edges() {
        return Err(Error::DimensionMismatch {
            what: "boundary data",
            expected: mesh.num_boundary_edges(),
            found: f_h.len(),
        });
    }
    Ok(())
}

/// A function in the P1 space together with its per-triangle gradient.
#[derive(Clone, Debug)]
pub struct P1Solution<'m, T> {
    mesh: &'m Mesh<T>,
    values: Vec<T>,
    gradients: Vec<Point<T>>,
}

impl<'m, T: Scalar> P1Solution<'m, T> {
    pub fn from_nodal(mesh: &'m Mesh<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != mesh.num_vertices() {
            return Err(Error::DimensionMismatch {
                what: "nodal values",
                expected: mesh.num_vertices(),
                found: values.len(),
            });
        }
        let gradients = (0..mesh.num_triangles())
            .map(|t| {
                let g = barycentric_gradients(mesh, t);
                let v = mesh.triangles()[t].map(|i| values[i]);
                [
                    ordered_sum((0..3).map(|i| v[i] * g[i][0])),
                    ordered_sum((0..3).map(|i| v[i] * g[i][1])),
                ]
            })
            .collect();
        Ok(Self {
            mesh,
            values,
            gradients,
        })
    }

    /// Nodal interpolant of `f`.
    pub fn interpolate(mesh: &'m Mesh<T>, f: impl Fn(Point<T>) -> T) -> Self {
        let values = mesh.vertices().iter().map(|&p| f(p)).collect();
        Self::from_nodal(mesh, values).expect("one value per vertex")
    }

    pub fn mesh(&self) -> &'m Mesh<T> {
        self.mesh
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn gradient(&self, t: usize) -> Point<T> {
        self.gradients[t]
    }

    pub fn gradients(&self) -> &[Point<T>] {
        &self.gradients
    }

    /// Value inside triangle `t` at barycentric coordinates `bary`.
    pub fn eval_bary(&self, t: usize, bary: [T; 3]) -> T {
        let v = self.mesh.triangles()[t];
        ordered_sum((0..3).map(|i| bary[i] * self.values[v[i]]))
    }

    /// Value inside triangle `t` at physical point `p`.
    pub fn eval_in(&self, t: usize, p: Point<T>) -> T {
        let v0 = self.mesh.vertices()[self.mesh.triangles()[t][0]];
        let g = self.gradients[t];
        self.values[self.mesh.triangles()[t][0]] + g[0] * (p[0] - v0[0]) + g[1] * (p[1] - v0[1])
    }

    /// `∫_Ω u dx`.
    pub fn integral(&self) -> T {
        ordered_sum((0..self.mesh.num_triangles()).map(|t| {
            let v = self.mesh.triangles()[t];
            self.mesh.area(t) * (self.values[v[0]] + self.values[v[1]] + self.values[v[2]])
                / T::lit(3.0)
        }))
    }

    /// `αu + βw` on the same mesh.
    pub fn combine(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        if !std::ptr::eq(self.mesh, other.mesh) {
            return Err(Error::MeshMismatch);
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| alpha * a + beta * b)
            .collect();
        Self::from_nodal(self.mesh, values)
    }
}

/// The P1 system factored once per mesh.
#[derive(Clone, Debug)]
pub struct P1System<'m, T> {
    mesh: &'m Mesh<T>,
    factor: Factorization<T>,
}

impl<'m, T: Scalar> P1System<'m, T> {
    pub fn new(mesh: &'m Mesh<T>, opts: SolverOptions) -> Result<Self> {
        let factor = Factorization::spd(&assemble_bilinear(mesh), opts)?;
        Ok(Self { mesh, factor })
    }

    pub fn matrix(&self) -> &SparseSymMatrix<T> {
        self.factor.matrix()
    }

    pub fn factorization(&self) -> &Factorization<T> {
        &self.factor
    }

    /// Solves `a(ũ_h, v) = b(f_h, v)` for all `v` in the P1 space.
    pub fn solve(&self, f_h: &BoundaryData<T>) -> Result<P1Solution<'m, T>> {
        let load = assemble_boundary_load(self.mesh, f_h)?;
        let u = self.factor.solve(&load)?;
        P1Solution::from_nodal(self.mesh, u)
    }
}

/// One-shot Neumann solve.
pub fn solve_neumann<'m, T: Scalar>(
    mesh: &'m Mesh<T>,
    f_h: &BoundaryData<T>,
) -> Result<P1Solution<'m, T>> {
    P1System::new(mesh, SolverOptions::default())?.solve(f_h)
}

/// `π_h u`: the triangle mean of the three nodal values.
pub fn project_pi_h<T: Scalar>(u: &P1Solution<'_, T>) -> PiecewiseConstantField<T> {
    let third = T::one() / T::lit(3.0);
    PiecewiseConstantField::new(
        u.mesh
            .triangles()
            .iter()
            .map(|v| (u.values[v[0]] + u.values[v[1]] + u.values[v[2]]) * third)
            .collect(),
    )
}

/// `π_h g` for a general function, by the degree-5 rule (verification only).
pub fn project_pi_h_fn<T: Scalar>(
    mesh: &Mesh<T>,
    g: impl Fn(Point<T>) -> T,
) -> PiecewiseConstantField<T> {
    PiecewiseConstantField::new(
        (0..mesh.num_triangles())
            .map(|t| {
                let s = ordered_sum(triangle_points(mesh, t).iter().map(|&(p, _, w)| w * g(p)));
                s / mesh.area(t)
            })
            .collect(),
    )
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct P1Norms<T> {
    pub l2: T,
    pub grad: T,
    pub h1: T,
}

/// `(‖u‖₀, ‖∇u‖₀, ‖u‖_{H¹})`, computed exactly.
pub fn norms<T: Scalar>(u: &P1Solution<'_, T>) -> P1Norms<T> {
    let mesh = u.mesh;
    let mut l2 = T::zero();
    let mut grad = T::zero();
    for t in 0..mesh.num_triangles() {
        let m = element_mass(mesh, t);
        let v = mesh.triangles()[t].map(|i| u.values[i]);
        for i in 0..3 {
            for j in 0..3 {
                l2 += m[i][j] * v[i] * v[j];
            }
        }
        let g = u.gradients[t];
        grad += mesh.area(t) * (g[0] * g[0] + g[1] * g[1]);
    }
    P1Norms {
        l2: l2.sqrt(),
        grad: grad.sqrt(),
        h1: (l2 + grad).sqrt(),
    }
}
