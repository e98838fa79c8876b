//! Explicit constants: the projection constant `h_K/j₁,₁`, the edge trace
//! constant and the data-oscillation constant `C₁(h)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, MeshError};
use crate::scalar::Scalar;

/// First positive root of the Bessel function `J₁`.
pub const J11: f64 = 3.831_705_970_207_512_3;

/// Bracket around [`J11`] across which `J₁` changes sign.
pub const J11_BRACKET: (f64, f64) = (3.831_705_970_207, 3.831_705_970_208);

/// Trace coefficient used for all table reproduction.
pub const TRACE_COEFF_ROUNDED: f64 = 0.574;

/// `J₁(x)` from its power series (accurate to a few ulps for `|x| ≤ 10`).
pub fn bessel_j1(x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = 0.5 * x;
    let mut sum = term;
    for m in 1..60 {
        term *= q / (m as f64 * (m + 1) as f64);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// Returns `j₁,₁`, after checking that `J₁` changes sign across [`J11_BRACKET`].
pub fn bessel_j1_root() -> f64 {
    assert!(
        j11_bracket_verified(),
        "J1 does not change sign across the stored bracket"
    );
    J11
}

pub fn j11_bracket_verified() -> bool {
    let (lo, hi) = J11_BRACKET;
    lo <= J11 && J11 <= hi && bessel_j1(lo) > 0.0 && bessel_j1(hi) < 0.0
}

/// Lower end of the verified bracket; dividing by it rounds `C₀` upwards.
pub fn j11_lower<T: Scalar>() -> T {
    assert!(
        j11_bracket_verified(),
        "J1 does not change sign across the stored bracket"
    );
    T::lit(J11_BRACKET.0)
}

/// Which constant multiplies `√(|e|/|K|)·h_K` in the trace bound.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub enum TraceCoefficient {
    /// The rounded value 0.574.
    #[default]
    Rounded,
    /// `√(1/j₁,₁² + 1/j₁,₁) ≈ 0.57366`.
    Sharp,
}

impl TraceCoefficient {
    pub fn value<T: Scalar>(self) -> T {
        match self {
            TraceCoefficient::Rounded => T::lit(TRACE_COEFF_ROUNDED),
            TraceCoefficient::Sharp => {
                let j: T = j11_lower();
                (T::one() / (j * j) + T::one() / j).sqrt()
            }
        }
    }
}

/// `C₀(K) = h_K / j₁,₁` for triangle `t`.
pub fn projection_constant<T: Scalar>(mesh: &Mesh<T>, t: usize) -> T {
    mesh.diameter(t) / j11_lower()
}

/// `C₀h = max_K h_K / j₁,₁`.
pub fn c0_times_h<T: Scalar>(mesh: &Mesh<T>) -> T {
    mesh.h() / j11_lower()
}

/// `coeff·√(|e|/|K|)·h_K` for edge `e` of triangle `t`.
pub fn trace_constant<T: Scalar>(
    mesh: &Mesh<T>,
    e: usize,
    t: usize,
    coeff: TraceCoefficient,
) -> Result<T> {
    let g = mesh.element_geometry(t)?;
    if e >= mesh.num_edges() {
        return Err(MeshError::InvalidEdge {
            index: e,
            count: mesh.num_edges(),
        }
        .into());
    }
    if mesh.local_index(t, e).is_none() {
        return Err(MeshError::EdgeNotInTriangle {
            edge: e,
            triangle: t,
        }
        .into());
    }
    Ok(coeff.value::<T>() * (mesh.edge_length(e) / g.area).sqrt() * g.diameter)
}

/// `C₁(h)`: the largest trace constant over boundary edges and their unique triangle.
pub fn c1_of_mesh<T: Scalar>(mesh: &Mesh<T>, coeff: TraceCoefficient) -> Result<T> {
    if mesh.num_boundary_edges() == 0 {
        return Err(Error::InvalidParameter("mesh has no boundary edges".into()));
    }
    let mut c1 = T::zero();
    for &e in mesh.boundary_edges() {
        c1 = c1.max(trace_constant(mesh, e, mesh.edges()[e].first, coeff)?);
    }
    Ok(c1)
}

/// The explicit constants of one mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct ExplicitConstants<T> {
    pub j11: T,
    pub c0_times_h: T,
    pub trace_coeff: T,
    pub c1: T,
    /// Trace constant of each boundary edge, in boundary-loop order.
    pub boundary_trace: Vec<T>,
}

impl<T: Scalar> ExplicitConstants<T> {
    pub fn for_mesh(mesh: &Mesh<T>, coeff: TraceCoefficient) -> Result<Self> {
        let boundary_trace = mesh
            .boundary_edges()
            .iter()
            .map(|&e| trace_constant(mesh, e, mesh.edges()[e].first, coeff))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            j11: j11_lower(),
            c0_times_h: c0_times_h(mesh),
            trace_coeff: coeff.value(),
            c1: c1_of_mesh(mesh, coeff)?,
            boundary_trace,
        })
    }
}
