//! Piecewise-constant data on triangles and on boundary edges.

use crate::mesh::Mesh;
use crate::scalar::{ordered_sum, Scalar};

/// One value per triangle (the space of piecewise constants).
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstantField<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> PiecewiseConstantField<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn constant(mesh: &Mesh<T>, c: T) -> Self {
        Self::new(vec![c; mesh.num_triangles()])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `∫_Ω v dx`.
    pub fn integral(&self, mesh: &Mesh<T>) -> T {
        ordered_sum(
            self.values
                .iter()
                .enumerate()
                .map(|(t, &v)| v * mesh.area(t)),
        )
    }

    /// `‖v‖₀`.
    pub fn l2_norm(&self, mesh: &Mesh<T>) -> T {
        ordered_sum(
            self.values
                .iter()
                .enumerate()
                .map(|(t, &v)| v * v * mesh.area(t)),
        )
        .sqrt()
    }
}

/// Boundary data constant on each boundary edge, indexed in boundary-loop order
/// (slot `k` belongs to edge `mesh.boundary_edges()[k]`).
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryData<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> BoundaryData<T> {
    pub fn new(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn zeros(mesh: &Mesh<T>) -> Self {
        Self::new(vec![T::zero(); mesh.num_boundary_edges()])
    }

    pub fn constant(mesh: &Mesh<T>, c: T) -> Self {
        Self::new(vec![c; mesh.num_boundary_edges()])
    }

    /// Indicator of the boundary edge in slot `k`.
    pub fn indicator(mesh: &Mesh<T>, k: usize) -> Self {
        let mut d = Self::zeros(mesh);
        d.values[k] = T::one();
        d
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::new(self.values.iter().map(|&v| v * s).collect())
    }

    /// `‖f_h‖_b² = Σ_e |e| f_h(e)²`.
    pub fn norm_b_squared(&self, mesh: &Mesh<T>) -> T {
        ordered_sum(
            self.values
                .iter()
                .zip(mesh.boundary_edges())
                .map(|(&v, &e)| mesh.edge_length(e) * v * v),
        )
    }

    pub fn norm_b(&self, mesh: &Mesh<T>) -> T {
        self.norm_b_squared(mesh).sqrt()
    }

    /// `∫_Γ f_h ds`.
    pub fn integral(&self, mesh: &Mesh<T>) -> T {
        ordered_sum(
            self.values
                .iter()
                .zip(mesh.boundary_edges())
                .map(|(&v, &e)| mesh.edge_length(e) * v),
        )
    }
}
