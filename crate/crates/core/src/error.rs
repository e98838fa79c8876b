use thiserror::Error;

use crate::linalg::LinalgError;
use crate::mesh::MeshError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("{what}: expected length {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("fields live on different meshes")]
    MeshMismatch,
    #[error(
        "flux data incompatible with divergence target: multiplier c = {c:e}, \
         ∫f_h ds − ∫target dx = {mismatch:e}"
    )]
    Incompatible { c: f64, mismatch: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("boundary function is not finite at ({x}, {y})")]
    NonFiniteData { x: f64, y: f64 },
    #[error("negative oscillation radicand {0:e} (quadrature inconsistency)")]
    NegativeRadicand(f64),
    #[error("mesh sizes do not halve between rows {row} and {next}")]
    NonHalvingSequence { row: usize, next: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
