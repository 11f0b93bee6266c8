//! Lattices attached to a system matrix, diagonal scalings and successive minima.

pub mod basis;
pub mod minima;
mod reduce;

pub use basis::{
    build_unipotent_lattice, determinant, int_det, scale_diagonal, scale_lattice, theta, transpose, BoxSpec,
    LatticeBasis, Provenance, SystemMatrix,
};
pub use minima::{minkowski_check, norm_sq, successive_minima, unit_ball_volume, MinimaReport, RankTracker, MAX_DIM};
