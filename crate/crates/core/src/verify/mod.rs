//! Verification suites with line-per-check TAP output.

mod hypercircle;
mod manufactured;
mod properties;

use std::fmt;

use rand::{Rng, SeedableRng};

pub use hypercircle::{
    check_hypercircle_continuous, check_hypercircle_discrete, ContinuousHypercircle,
    DiscreteHypercircle,
};
pub use manufactured::{true_error, ManufacturedSolution, TrueError, CATALOG};
pub use properties::{
    check_projection_bound, check_trace_inequality, rate_table, ProjectionCheck, Quadratic,
    TraceCheck,
};

use crate::constants::{c1_of_mesh, TraceCoefficient};
use crate::error::Result;
use crate::estimator::estimate;
use crate::fields::BoundaryData;
use crate::kappa::KappaOptions;
use crate::mesh::{generate, DomainId};

/// One verification outcome. `ok` is `measured ≤ threshold` unless stated otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub ok: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, measured: f64, threshold: f64) -> Self {
        Self {
            name: name.into(),
            measured,
            threshold,
            ok: measured <= threshold,
        }
    }
}

/// Renders checks as TAP: a plan line, then `ok N - name # measured=.. threshold=..`.
pub fn tap_report(checks: &[Check]) -> String {
    let mut out = format!("1..{}\n", checks.len());
    for (k, c) in checks.iter().enumerate() {
        out.push_str(&format!(
            "{} {} - {}\n",
            if c.ok { "ok" } else { "not ok" },
            k + 1,
            c
        ));
    }
    out
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} # measured={:e} threshold={:e}",
            self.name, self.measured, self.threshold
        )
    }
}

/// Suite configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub domain: DomainId,
    pub levels: std::ops::RangeInclusive<u32>,
    pub beta: f64,
    pub kappa: KappaOptions,
    /// Random quadratics per domain for the trace inequality.
    pub trace_samples: usize,
    pub seed: u64,
}

impl SuiteConfig {
    pub fn new(domain: DomainId, levels: std::ops::RangeInclusive<u32>) -> Self {
        Self {
            domain,
            levels,
            beta: crate::kappa::DEFAULT_BETA,
            kappa: KappaOptions::default(),
            trace_samples: 1000,
            seed: 2024,
        }
    }
}

/// Runs every check for one domain over a range of levels.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<Check>> {
    let d = cfg.domain;
    let mut checks = Vec::new();
    let mut rng = rand::rngs::StdRng::seed_from_u64(cfg.seed);

    for name in CATALOG {
        let u = ManufacturedSolution::<f64>::by_name(name)?;
        let worst = (0..10_000)
            .map(|_| {
                let p = [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)];
                u.pde_residual(p).abs() / u.value(p).abs().max(1.0)
            })
            .fold(0.0, f64::max);
        checks.push(Check::at_most(format!("pde-residual {name}"), worst, 1e-12));
    }

    let coarse = generate::<f64>(d, 1)?;
    let mut worst = 0.0f64;
    for _ in 0..cfg.trace_samples {
        let q = Quadratic(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        let e = coarse.boundary_edges()[rng.gen_range(0..coarse.num_boundary_edges())];
        let c = check_trace_inequality(
            &coarse,
            e,
            coarse.edges()[e].first,
            &q,
            TraceCoefficient::Rounded,
        )?;
        if c.bound > 0.0 {
            worst = worst.max(c.trace_norm / c.bound);
        }
    }
    checks.push(Check::at_most(
        format!("{d} trace-inequality ratio"),
        worst,
        1.0,
    ));

    let mut prev_c1: Option<f64> = None;
    for level in cfg.levels.clone() {
        let mesh = generate::<f64>(d, level)?;
        checks.push(Check::at_most(
            format!("{d} L{level} euler-characteristic-deviation"),
            (mesh.euler_characteristic() - 1).unsigned_abs() as f64,
            0.0,
        ));
        let c1 = c1_of_mesh(&mesh, TraceCoefficient::Rounded)?;
        if let Some(p) = prev_c1 {
            checks.push(Check::at_most(
                format!("{d} L{level} c1-refinement-factor-deviation"),
                (c1 / p - std::f64::consts::FRAC_1_SQRT_2).abs(),
                1e-12,
            ));
        }
        prev_c1 = Some(c1);

        use std::f64::consts::PI;
        let proj = check_projection_bound(
            &mesh,
            |p| (PI * p[0]).sin() * (PI * p[1]).sin(),
            |p| {
                [
                    PI * (PI * p[0]).cos() * (PI * p[1]).sin(),
                    PI * (PI * p[0]).sin() * (PI * p[1]).cos(),
                ]
            },
        );
        checks.push(Check::at_most(
            format!("{d} L{level} projection-bound"),
            proj.error,
            proj.bound,
        ));

        for name in ["exp_x", "exp_diag"] {
            let u = ManufacturedSolution::by_name(name)?;
            let est = estimate(&mesh, &u.neumann_data(), cfg.beta, cfg.kappa)?;
            let err = true_error(&est.u_h, &u);
            let r = &est.report;
            let pre = format!("{d} L{level} {name}");
            checks.push(Check::at_most(
                format!("{pre} h1-error<=mh*f"),
                err.h1,
                r.bound_h1.unwrap_or(f64::NAN),
            ));
            checks.push(Check::at_most(
                format!("{pre} boundary-error<=mh^2*f"),
                err.boundary,
                r.bound_b.unwrap_or(f64::NAN),
            ));
            checks.push(Check::at_most(
                format!("{pre} h1-error<=a-posteriori"),
                err.h1,
                r.bound_h1_apost.unwrap_or(f64::NAN),
            ));
        }
    }

    for extra in 1..=2 {
        let r = check_hypercircle_discrete(
            &coarse,
            &BoundaryData::indicator(&coarse, 0),
            extra,
            cfg.kappa.solver,
        )?;
        checks.push(Check::at_most(
            format!("{d} hypercircle-discrete +{extra} relative-gap"),
            r.relative_gap,
            1e-12,
        ));
    }
    if d == DomainId::UnitSquare {
        let r = check_hypercircle_continuous(&coarse, 2.0, &ManufacturedSolution::exp_x())?;
        checks.push(Check::at_most(
            "square hypercircle-continuous kernel",
            r.kernel.abs(),
            1e-10,
        ));
        checks.push(Check::at_most(
            "square hypercircle-continuous identity",
            (r.lhs - r.rhs).abs(),
            1e-10 * r.rhs,
        ));
    }
    Ok(checks)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tap_lines() {
        let checks = vec![Check::at_most("a", 1.0, 2.0), Check::at_most("b", 3.0, 2.0)];
        let s = tap_report(&checks);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "1..2");
        assert!(lines[1].starts_with("ok 1 - a # measured="));
        assert!(lines[2].starts_with("not ok 2 - b"));
    }

    #[test]
    fn suite_passes_on_coarse_square() {
        let mut cfg = SuiteConfig::new(DomainId::UnitSquare, 1..=2);
        cfg.trace_samples = 100;
        let checks = run_suite(&cfg).unwrap();
        let failed: Vec<_> = checks.iter().filter(|c| !c.ok).collect();
        assert!(failed.is_empty(), "{failed:?}");
    }
}
