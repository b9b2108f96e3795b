//! Isometric plane-curve embeddings of tabular data ("3D Andrews plots") and
//! the unit-length space curves ("filaments") they drive through the Bishop
//! frame equations.
//!
//! The pipeline is
//!
//! 1. [`ingest`]: load a CSV table and standardize each feature,
//! 2. [`spectral`]: SVD of the `d × N` data matrix,
//! 3. [`andrews`]: the smoothest isotropic isometry `Φ` for that data, with
//!    quadratic phase shifts that keep time slices non-degenerate,
//! 4. [`bishop`]: integrate the Bishop frame driven by `Φ[x]` and sum the
//!    tangents into a filament,
//! 5. [`export`]: PLY / JSON / CSV writers and the run report.
//!
//! [`gauss`] holds the quadratic Gauss sum machinery behind the time-slice
//! bounds, and [`validate`] runs every property suite programmatically.

pub mod andrews;
pub mod bishop;
pub mod curve;
pub mod error;
pub mod export;
pub mod gauss;
pub mod ingest;
pub mod pipeline;
pub mod spectral;
pub mod validate;

pub use error::{Error, Result};
