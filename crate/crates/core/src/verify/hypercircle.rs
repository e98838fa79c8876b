//! Numerical checks of the hypercircle identities.

use crate::error::{Error, Result};
use crate::fields::BoundaryData;
use crate::kappa::HypercircleSolver;
use crate::linalg::SolverOptions;
use crate::mesh::{DomainId, Mesh, Point};
use crate::p1::{project_pi_h, P1Solution, P1System};
use crate::quadrature;
use crate::rt0::diff_norm_grad_minus_flux;
use crate::scalar::{ordered_sum, Scalar};

use super::manufactured::ManufacturedSolution;

/// Both sides of the discrete identity
///
/// ```text
/// ‖∇ũ_h − p_h‖² = ‖ũ − ũ_h‖₁² + ‖∇ũ − p_h‖² + ‖ũ − ũ_h‖² + 2((π_h − I)(ũ_h − ũ), (π_h − I)ũ_h)
/// ```
///
/// with `ũ` replaced by the P1 solution on a uniformly refined reference mesh.
/// The cross term carries `ũ_h − ũ`: expanding `(∇(ũ_h − ũ), ∇ũ − p_h)` gives
/// `‖ũ_h − ũ‖² + (ũ_h − ũ, π_h ũ_h − ũ_h)`. Only `ũ_h ∈ V_ref` is used, so the
/// identity is exact for any nested reference and the gap is rounding error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiscreteHypercircle<T> {
    pub extra_levels: u32,
    pub lhs: T,
    pub rhs: T,
    /// `‖ũ − ũ_h‖₁²` on the reference mesh.
    pub h1_err_sq: T,
    pub flux_gap_sq: T,
    pub l2_err_sq: T,
    /// `((π_h − I)(ũ_h − ũ), (π_h − I)ũ_h)`.
    pub cross: T,
    /// `|lhs − rhs| / lhs`, or `|lhs − rhs|` when `lhs = 0`.
    pub relative_gap: T,
}

/// Evaluates the discrete identity for boundary data `f_h` on `coarse`,
/// with a reference solution `extra_levels` uniform refinements finer.
pub fn check_hypercircle_discrete<T: Scalar>(
    coarse: &Mesh<T>,
    f_h: &BoundaryData<T>,
    extra_levels: u32,
    opts: SolverOptions,
) -> Result<DiscreteHypercircle<T>> {
    if extra_levels == 0 {
        return Err(Error::InvalidParameter(
            "reference must be at least one level finer".into(),
        ));
    }
    let solver = HypercircleSolver::new(coarse, opts)?;
    let (u_h, p_h) = solver.solve(f_h)?;
    let pi_u = project_pi_h(&u_h);
    let lhs = diff_norm_grad_minus_flux(&u_h, &p_h.flux)?;

    let mut fine = coarse.refine_uniform()?;
    let mut ancestor = fine.parent.clone();
    for _ in 1..extra_levels {
        let next = fine.mesh.refine_uniform()?;
        ancestor = next.parent.iter().map(|&p| ancestor[p]).collect();
        fine = next;
    }
    let fine_mesh = &fine.mesh;

    let f_fine = transfer_boundary_data(coarse, fine_mesh, &ancestor, f_h)?;
    let u_ref = P1System::new(fine_mesh, opts)?.solve(&f_fine)?;

    let mut lifted = vec![T::zero(); fine_mesh.num_vertices()];
    for (t, tri) in fine_mesh.triangles().iter().enumerate() {
        for &v in tri {
            lifted[v] = u_h.eval_in(ancestor[t], fine_mesh.vertices()[v]);
        }
    }
    let w = P1Solution::from_nodal(
        fine_mesh,
        u_ref
            .values()
            .iter()
            .zip(&lifted)
            .map(|(&a, &b)| a - b)
            .collect(),
    )?;

    let third = T::one() / T::lit(3.0);
    let mut grad_sq = Vec::with_capacity(fine_mesh.num_triangles());
    let mut flux_sq = Vec::with_capacity(fine_mesh.num_triangles());
    let mut l2_sq = Vec::with_capacity(fine_mesh.num_triangles());
    let mut cross = Vec::with_capacity(fine_mesh.num_triangles());
    for (t, &big) in ancestor.iter().enumerate() {
        let area = fine_mesh.area(t);
        let gw = w.gradient(t);
        let gu = u_ref.gradient(t);
        grad_sq.push(area * (gw[0] * gw[0] + gw[1] * gw[1]));
        // Edge-midpoint rule: exact for the quadratic integrands below.
        let (mut f, mut l, mut c) = (T::zero(), T::zero(), T::zero());
        for e in fine_mesh.triangle_edges(t) {
            let m = fine_mesh.edge_midpoint(e);
            let p = p_h.flux.value(big, m);
            let (dx, dy) = (gu[0] - p[0], gu[1] - p[1]);
            f += dx * dx + dy * dy;
            let wm = w.eval_in(t, m);
            l += wm * wm;
            c -= wm * (pi_u.values[big] - u_h.eval_in(big, m));
        }
        flux_sq.push(area * third * f);
        l2_sq.push(area * third * l);
        cross.push(area * third * c);
    }
    let (grad_sq, flux_gap_sq, l2_err_sq, cross) = (
        ordered_sum(grad_sq),
        ordered_sum(flux_sq),
        ordered_sum(l2_sq),
        ordered_sum(cross),
    );
    let h1_err_sq = grad_sq + l2_err_sq;
    let two = T::lit(2.0);
    let rhs = h1_err_sq + flux_gap_sq + l2_err_sq + two * cross;
    let gap = (lhs - rhs).abs();
    Ok(DiscreteHypercircle {
        extra_levels,
        lhs,
        rhs,
        h1_err_sq,
        flux_gap_sq,
        l2_err_sq,
        cross,
        relative_gap: if lhs > T::zero() { gap / lhs } else { gap },
    })
}

/// Copies edge data of `coarse` onto the boundary edges of a nested refinement.
fn transfer_boundary_data<T: Scalar>(
    coarse: &Mesh<T>,
    fine: &Mesh<T>,
    ancestor: &[usize],
    f_h: &BoundaryData<T>,
) -> Result<BoundaryData<T>> {
    if f_h.len() != coarse.num_boundary_edges() {
        return Err(Error::DimensionMismatch {
            what: "boundary data",
            expected: coarse.num_boundary_edges(),
            found: f_h.len(),
        });
    }
    let tol = T::lit(1e-9) * coarse.h();
    let values = fine
        .boundary_edges()
        .iter()
        .map(|&e| {
            let m = fine.edge_midpoint(e);
            let big = ancestor[fine.edges()[e].first];
            coarse
                .triangle_edges(big)
                .into_iter()
                .filter_map(|ce| coarse.boundary_slot(ce).map(|s| (ce, s)))
                .map(|(ce, s)| (distance_to_segment(m, coarse.edge_points(ce)), s))
                .filter(|&(d, _)| d <= tol)
                .min_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances"))
                .map(|(_, s)| f_h.values[s])
                .ok_or(Error::MeshMismatch)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundaryData::new(values))
}

fn distance_to_segment<T: Scalar>(p: Point<T>, [a, b]: [Point<T>; 2]) -> T {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let s = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy);
    let s = s.max(T::zero()).min(T::one());
    let (qx, qy) = (a[0] + s * dx - p[0], a[1] + s * dy - p[1]);
    (qx * qx + qy * qy).sqrt()
}

/// Terms of the continuous identity
///
/// ```text
/// ‖∇(u − v)‖² + ‖∇u − σ‖² + 2α‖u − v‖² = ‖∇v − σ‖²
/// ```
///
/// for `−Δu + αu = g` on the unit square with `u` manufactured,
/// `σ = ∇u + τ`, `τ = (x(1 − x), 0)` and `v = u + div τ / α`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuousHypercircle<T> {
    pub alpha: T,
    /// `(∇u − σ, ∇(v − u)) − α‖v − u‖²`, zero by construction.
    pub kernel: T,
    pub lhs: T,
    pub rhs: T,
    /// `max ∣σ·n − f∣` at the edge quadrature points.
    pub flux_mismatch: T,
}

/// Evaluates the continuous identity by the 7-point rule on `mesh`, which must
/// cover the unit square.
pub fn check_hypercircle_continuous<T: Scalar>(
    mesh: &Mesh<T>,
    alpha: T,
    exact: &ManufacturedSolution<T>,
) -> Result<ContinuousHypercircle<T>> {
    if !(alpha > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    if !matches!(mesh.origin(), Some((DomainId::UnitSquare, _))) {
        return Err(Error::InvalidParameter(
            "the continuous check is set up on the unit square".into(),
        ));
    }
    let one = T::one();
    let tau = |p: Point<T>| [p[0] * (one - p[0]), T::zero()];
    let div_tau = |p: Point<T>| one - p[0] - p[0];
    // w = v − u = div τ / α, ∇w = (−2/α, 0)
    let w = |p: Point<T>| div_tau(p) / alpha;
    let grad_w = [-(one + one) / alpha, T::zero()];

    let f = exact.neumann_data();
    let mut flux_mismatch = T::zero();
    for &e in mesh.boundary_edges() {
        let n = mesh.outward_normal(e);
        for (p, _) in quadrature::edge_points(mesh, e) {
            let g = exact.gradient(p);
            let t = tau(p);
            let sn = (g[0] + t[0]) * n[0] + (g[1] + t[1]) * n[1];
            flux_mismatch = flux_mismatch.max((sn - f.eval(p, n)).abs());
        }
    }

    let mut kernel = Vec::new();
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for t in 0..mesh.num_triangles() {
        for (p, _, wt) in quadrature::triangle_points(mesh, t) {
            let g = exact.gradient(p);
            let s = [g[0] + tau(p)[0], g[1] + tau(p)[1]];
            let (gu_s0, gu_s1) = (g[0] - s[0], g[1] - s[1]);
            let gv = [g[0] + grad_w[0], g[1] + grad_w[1]];
            let (gv_s0, gv_s1) = (gv[0] - s[0], gv[1] - s[1]);
            let wv = w(p);
            let gw2 = grad_w[0] * grad_w[0] + grad_w[1] * grad_w[1];
            kernel.push(wt * (gu_s0 * grad_w[0] + gu_s1 * grad_w[1] - alpha * wv * wv));
            lhs.push(wt * (gw2 + gu_s0 * gu_s0 + gu_s1 * gu_s1 + (alpha + alpha) * wv * wv));
            rhs.push(wt * (gv_s0 * gv_s0 + gv_s1 * gv_s1));
        }
    }
    Ok(ContinuousHypercircle {
        alpha,
        kernel: ordered_sum(kernel),
        lhs: ordered_sum(lhs),
        rhs: ordered_sum(rhs),
        flux_mismatch,
    })
}
