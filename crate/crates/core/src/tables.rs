//! Convergence tables `(h, κ_h, C₁(h), M_h, rate)` and β sweeps.

use std::ops::RangeInclusive;

use serde::Serialize;

use crate::constants::{c1_of_mesh, TraceCoefficient};
use crate::error::Result;
use crate::estimator::m_h;
use crate::kappa::{compute_kappa_sweep, compute_kappa_with, KappaOptions, YParams};
use crate::mesh::{generate, DomainId};
use crate::verify::rate_table;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TableRow {
    pub level: u32,
    pub h: f64,
    pub kappa: f64,
    pub c1: f64,
    pub mh: f64,
    /// `log₂(κ_{2h}/κ_h)`; absent on the first row.
    pub rate: Option<f64>,
}

pub fn compute_table(
    domain: DomainId,
    levels: RangeInclusive<u32>,
    beta: f64,
    opts: KappaOptions,
) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for level in levels {
        let mesh = generate::<f64>(domain, level)?;
        let k = compute_kappa_with(&mesh, &YParams::for_mesh(&mesh, beta)?, opts)?;
        let c1 = c1_of_mesh(&mesh, TraceCoefficient::Rounded)?;
        rows.push(TableRow {
            level,
            h: mesh.h(),
            kappa: k.kappa,
            c1,
            mh: m_h(k.kappa, c1),
            rate: None,
        });
    }
    let pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.kappa)).collect();
    for (row, rate) in rows.iter_mut().skip(1).zip(rate_table(&pairs)?) {
        row.rate = Some(rate);
    }
    Ok(rows)
}

pub const TABLE_CSV_HEADER: &str = "level,h,kappa,c1,mh,rate,kappa_4dp,c1_4dp,mh_4dp,rate_4dp";

/// Shortest round-trip values, then the same columns rounded to 4 decimals.
/// The rate of the first row is `-`.
pub fn table_csv(rows: &[TableRow]) -> String {
    let mut out = String::from(TABLE_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let (rate, rate4) = match r.rate {
            Some(x) => (x.to_string(), format!("{x:.4}")),
            None => ("-".to_string(), "-".to_string()),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{:.4},{:.4},{:.4},{}\n",
            r.level, r.h, r.kappa, r.c1, r.mh, rate, r.kappa, r.c1, r.mh, rate4
        ));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub level: u32,
    pub h: f64,
    pub beta: f64,
    pub kappa: f64,
}

/// Removes repeated βs, keeping the first occurrence; returns the duplicates.
pub fn dedup_betas(betas: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut kept: Vec<f64> = Vec::new();
    let mut dropped = Vec::new();
    for &b in betas {
        if kept.contains(&b) {
            dropped.push(b);
        } else {
            kept.push(b);
        }
    }
    (kept, dropped)
}

/// `κ_h` for each level and β. βs must already be deduplicated.
pub fn beta_sweep(
    domain: DomainId,
    levels: RangeInclusive<u32>,
    betas: &[f64],
    opts: KappaOptions,
) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for level in levels {
        let mesh = generate::<f64>(domain, level)?;
        for (k, &beta) in compute_kappa_sweep(&mesh, betas, opts)?.iter().zip(betas) {
            rows.push(SweepRow {
                level,
                h: mesh.h(),
                beta,
                kappa: k.kappa,
            });
        }
    }
    Ok(rows)
}

pub const SWEEP_CSV_HEADER: &str = "level,h,beta,kappa";

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{},{},{},{}\n", r.level, r.h, r.beta, r.kappa));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_row_has_dash_rate() {
        let rows =
            compute_table(DomainId::UnitSquare, 1..=1, 100.0, KappaOptions::default()).unwrap();
        assert_eq!(rows.len(), 1);
        let csv = table_csv(&rows);
        let line = csv.lines().nth(1).unwrap();
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[5], "-");
        assert_eq!(cols[9], "-");
        assert_eq!(cols[6], "0.4144");
        assert_eq!(cols[1].parse::<f64>().unwrap(), rows[0].h);
    }

    #[test]
    fn dedup_keeps_first_occurrence() {
        let (kept, dropped) = dedup_betas(&[1.0, 10.0, 1.0, 100.0, 10.0]);
        assert_eq!(kept, vec![1.0, 10.0, 100.0]);
        assert_eq!(dropped, vec![1.0, 10.0]);
    }

    #[test]
    fn single_beta_sweep_matches_table() {
        let opts = KappaOptions::default();
        let rows = compute_table(DomainId::RightTriangle, 1..=2, 100.0, opts).unwrap();
        let sweep = beta_sweep(DomainId::RightTriangle, 1..=2, &[100.0], opts).unwrap();
        for (r, s) in rows.iter().zip(&sweep) {
            assert_eq!(r.kappa.to_bits(), s.kappa.to_bits());
        }
    }
}
