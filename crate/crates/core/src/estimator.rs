//! Certified bounds: `M_h`, the a priori estimates and the a posteriori bound.
//!
//! ```text
//! ‖u − u_h‖₁ ≤ M_h ‖f‖_b
//! ‖u − u_h‖_b ≤ M_h² ‖f‖_b
//! ‖u − u_h‖₁ ≤ C₁(h) ‖(I − π_{h,Γ}) f‖_b + Y(π_{h,Γ} f, p_h, β)
//! ```
//!
//! Here `u_h` is the P1 solution with the projected data `f_h = π_{h,Γ} f`.
//! Norms of the continuous data use the 5-point Gauss rule on each edge.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::constants::{c1_of_mesh, TraceCoefficient};
use crate::error::{Error, Result};
use crate::fields::BoundaryData;
use crate::kappa::{compute_kappa_with, HypercircleSolver, KappaOptions, KappaResult, YParams};
use crate::mesh::{Mesh, Point};
use crate::p1::P1Solution;
use crate::quadrature;
use crate::scalar::{ordered_sum, Scalar};

type Evaluator<T> = dyn Fn(Point<T>, Point<T>) -> T + Send + Sync;

/// Neumann data `f` on `Γ`, evaluated at a boundary point with its outward normal.
#[derive(Clone)]
pub struct BoundaryFunction<T> {
    name: String,
    eval: Arc<Evaluator<T>>,
}

impl<T: Scalar> BoundaryFunction<T> {
    pub fn new(
        name: impl Into<String>,
        f: impl Fn(Point<T>, Point<T>) -> T + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(f),
        }
    }

    pub fn zero() -> Self {
        Self::new("zero", |_, _| T::zero())
    }

    pub fn constant(c: T) -> Self {
        Self::new(format!("const({c})"), move |_, _| c)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn eval(&self, x: Point<T>, normal: Point<T>) -> T {
        (self.eval)(x, normal)
    }

    /// `s·f`.
    pub fn scaled(&self, s: T) -> Self {
        let inner = Arc::clone(&self.eval);
        Self {
            name: format!("{s}*{}", self.name),
            eval: Arc::new(move |x, n| s * inner(x, n)),
        }
    }

    /// Values and weights at the Gauss points of boundary edge `e`.
    fn samples(&self, mesh: &Mesh<T>, e: usize) -> Result<[(T, T); 5]> {
        let n = mesh.outward_normal(e);
        let pts = quadrature::edge_points(mesh, e);
        let mut out = [(T::zero(), T::zero()); 5];
        for (o, (p, w)) in out.iter_mut().zip(pts) {
            let v = self.eval(p, n);
            if !v.is_finite() {
                return Err(Error::NonFiniteData {
                    x: p[0].to_f64_lossy(),
                    y: p[1].to_f64_lossy(),
                });
            }
            *o = (v, w);
        }
        Ok(out)
    }
}

impl<T> fmt::Debug for BoundaryFunction<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryFunction")
            .field("name", &self.name)
            .finish_non_exhaustive()
    }
}

/// `π_{h,Γ} f`: the mean of `f` over each boundary edge.
pub fn project_pi_gamma<T: Scalar>(
    mesh: &Mesh<T>,
    f: &BoundaryFunction<T>,
) -> Result<BoundaryData<T>> {
    let values = mesh
        .boundary_edges()
        .iter()
        .map(|&e| {
            let s = f.samples(mesh, e)?;
            Ok(ordered_sum(s.iter().map(|&(v, w)| v * w)) / mesh.edge_length(e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BoundaryData::new(values))
}

/// `‖f‖_b`.
pub fn boundary_norm<T: Scalar>(mesh: &Mesh<T>, f: &BoundaryFunction<T>) -> Result<T> {
    let mut parts = Vec::with_capacity(mesh.num_boundary_edges());
    for &e in mesh.boundary_edges() {
        let s = f.samples(mesh, e)?;
        parts.push(ordered_sum(s.iter().map(|&(v, w)| w * v * v)));
    }
    Ok(ordered_sum(parts).sqrt())
}

/// `‖(I − π_{h,Γ}) f‖_b`.
pub fn oscillation_norm<T: Scalar>(mesh: &Mesh<T>, f: &BoundaryFunction<T>) -> Result<T> {
    let mut parts = Vec::with_capacity(mesh.num_boundary_edges());
    let mut total = Vec::with_capacity(mesh.num_boundary_edges());
    for &e in mesh.boundary_edges() {
        let s = f.samples(mesh, e)?;
        let sq = ordered_sum(s.iter().map(|&(v, w)| w * v * v));
        let mean = ordered_sum(s.iter().map(|&(v, w)| w * v)) / mesh.edge_length(e);
        parts.push(sq - mesh.edge_length(e) * mean * mean);
        total.push(sq);
    }
    let radicand = ordered_sum(parts);
    let floor = T::lit(-1e-14) * ordered_sum(total).max(T::one());
    if radicand < floor {
        return Err(Error::NegativeRadicand(radicand.to_f64_lossy()));
    }
    Ok(radicand.max(T::zero()).sqrt())
}

/// Every intermediate quantity of one bound computation.
///
/// `bound_h1` and `bound_b` are the a priori bounds `M_h‖f‖_b` and `M_h²‖f‖_b`;
/// `bound_h1_apost` is `C₁·osc + Y`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub domain: String,
    pub level: Option<u32>,
    pub h: f64,
    pub beta: f64,
    pub kappa: Option<f64>,
    pub c1: f64,
    pub mh: Option<f64>,
    pub f: String,
    pub fnorm_b: f64,
    pub osc: Option<f64>,
    pub y: Option<f64>,
    pub bound_h1: Option<f64>,
    pub bound_b: Option<f64>,
    pub bound_h1_apost: Option<f64>,
    pub true_err_h1: Option<f64>,
    pub true_err_b: Option<f64>,
}

pub const REPORT_CSV_HEADER: &str =
    "domain,level,h,beta,kappa,c1,mh,f,fnorm_b,osc,y,bound_h1,bound_b,bound_h1_apost,true_err_h1,true_err_b";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl BoundReport {
    fn empty<T: Scalar>(mesh: &Mesh<T>, beta: T, c1: T, f: &BoundaryFunction<T>) -> Self {
        let (domain, level) = match mesh.origin() {
            Some((d, l)) => (d.name().to_string(), Some(l)),
            None => ("custom".to_string(), None),
        };
        Self {
            domain,
            level,
            h: mesh.h().to_f64_lossy(),
            beta: beta.to_f64_lossy(),
            kappa: None,
            c1: c1.to_f64_lossy(),
            mh: None,
            f: f.name().to_string(),
            fnorm_b: 0.0,
            osc: None,
            y: None,
            bound_h1: None,
            bound_b: None,
            bound_h1_apost: None,
            true_err_h1: None,
            true_err_b: None,
        }
    }

    /// Attaches true errors against a known solution.
    pub fn with_true_error(mut self, h1: f64, b: f64) -> Self {
        self.true_err_h1 = Some(h1);
        self.true_err_b = Some(b);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One CSV row in [`REPORT_CSV_HEADER`] order; absent values are empty.
    pub fn to_csv_row(&self) -> String {
        [
            self.domain.clone(),
            self.level.map(|l| l.to_string()).unwrap_or_default(),
            self.h.to_string(),
            self.beta.to_string(),
            opt(self.kappa),
            self.c1.to_string(),
            opt(self.mh),
            self.f.clone(),
            self.fnorm_b.to_string(),
            opt(self.osc),
            opt(self.y),
            opt(self.bound_h1),
            opt(self.bound_b),
            opt(self.bound_h1_apost),
            opt(self.true_err_h1),
            opt(self.true_err_b),
        ]
        .join(",")
    }
}

/// `M_h = √(C₁² + κ_h²)`.
pub fn m_h<T: Scalar>(kappa: T, c1: T) -> T {
    (c1 * c1 + kappa * kappa).sqrt()
}

fn check_same_mesh<T: Scalar>(mesh: &Mesh<T>, kappa: &KappaResult<T>) -> Result<()> {
    if kappa.num_boundary_edges != mesh.num_boundary_edges()
        || kappa.h != mesh.h()
        || kappa.origin != mesh.origin()
    {
        return Err(Error::MeshMismatch);
    }
    Ok(())
}

/// A priori bounds from a computed `κ_h` and `C₁(h)`.
pub fn apriori_bounds<T: Scalar>(
    mesh: &Mesh<T>,
    kappa: &KappaResult<T>,
    c1: T,
    f: &BoundaryFunction<T>,
) -> Result<BoundReport> {
    check_same_mesh(mesh, kappa)?;
    let mh = m_h(kappa.kappa, c1);
    let fnorm = boundary_norm(mesh, f)?;
    let mut r = BoundReport::empty(mesh, kappa.beta, c1, f);
    r.kappa = Some(kappa.kappa.to_f64_lossy());
    r.mh = Some(mh.to_f64_lossy());
    r.fnorm_b = fnorm.to_f64_lossy();
    r.bound_h1 = Some((mh * fnorm).to_f64_lossy());
    r.bound_b = Some((mh * mh * fnorm).to_f64_lossy());
    Ok(r)
}

/// A posteriori quantities of one data set.
pub struct Aposteriori<'m, T> {
    pub report: BoundReport,
    pub f_h: BoundaryData<T>,
    /// The P1 solution with data `f_h`.
    pub u_h: P1Solution<'m, T>,
}

/// `C₁(h)‖(I − π_{h,Γ})f‖_b + Y(π_{h,Γ}f, p_h, β)`.
pub fn aposteriori_bound<'m, T: Scalar>(
    mesh: &'m Mesh<T>,
    f: &BoundaryFunction<T>,
    beta: T,
    opts: KappaOptions,
) -> Result<Aposteriori<'m, T>> {
    let solver = HypercircleSolver::new(mesh, opts.solver)?;
    aposteriori_with(&solver, f, beta)
}

fn aposteriori_with<'m, T: Scalar>(
    solver: &HypercircleSolver<'m, T>,
    f: &BoundaryFunction<T>,
    beta: T,
) -> Result<Aposteriori<'m, T>> {
    let mesh = solver.mesh();
    let params = YParams::for_mesh(mesh, beta)?;
    let c1 = c1_of_mesh(mesh, TraceCoefficient::Rounded)?;
    let f_h = project_pi_gamma(mesh, f)?;
    let osc = oscillation_norm(mesh, f)?;
    let y = solver.y_components(&f_h, &params)?.y;
    let u_h = solver.p1().solve(&f_h)?;
    let mut r = BoundReport::empty(mesh, beta, c1, f);
    r.fnorm_b = boundary_norm(mesh, f)?.to_f64_lossy();
    r.osc = Some(osc.to_f64_lossy());
    r.y = Some(y.to_f64_lossy());
    r.bound_h1_apost = Some((c1 * osc + y).to_f64_lossy());
    Ok(Aposteriori {
        report: r,
        f_h,
        u_h,
    })
}

/// Both the a priori and a posteriori bounds, sharing one pair of factorizations.
pub fn estimate<'m, T: Scalar>(
    mesh: &'m Mesh<T>,
    f: &BoundaryFunction<T>,
    beta: T,
    opts: KappaOptions,
) -> Result<Aposteriori<'m, T>> {
    let solver = HypercircleSolver::new(mesh, opts.solver)?;
    let mut post = aposteriori_with(&solver, f, beta)?;
    let kappa = compute_kappa_with(mesh, &YParams::for_mesh(mesh, beta)?, opts)?;
    let prior = apriori_bounds(mesh, &kappa, T::lit(post.report.c1), f)?;
    post.report.kappa = prior.kappa;
    post.report.mh = prior.mh;
    post.report.bound_h1 = prior.bound_h1;
    post.report.bound_b = prior.bound_b;
    Ok(post)
}
