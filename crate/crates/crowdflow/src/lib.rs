//! Macroscopic crowd-flow simulation on elongated 2-D walkways.
//!
//! The crowd is a nonnegative density carried by a velocity field with two
//! parts: a desired velocity derived from a normalized potential gradient,
//! and a nonlocal interaction velocity that makes walkers slow down and
//! swerve in response to the crowding they perceive in a frontal sensory
//! sector. The density is advanced by a push-forward finite-volume scheme
//! on a triangular mesh: each element is translated rigidly by its velocity
//! and its mass redistributed onto the elements it overlaps. A reservoir and
//! buffer model feeds pedestrians in through the inlet, and bulk observables
//! (in-domain mass, cumulative egress, event time, chord uniformity) are
//! recorded for calibration against field measurements.
//!
//! All internal quantities are dimensionless: lengths are scaled by the
//! walkway span `L`, speeds by the free walking speed `V`, times by
//! `T = L / V`, and the density carries pedestrian units (its integral over
//! the domain is a pedestrian count). SI conversions happen only at the
//! configuration and output boundaries.

// Validation deliberately writes `!(x > 0.0)` so that NaN inputs fail the
// check instead of slipping through a `x <= 0.0` comparison.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod entrance;
pub mod field;
pub mod geometry;
pub mod interaction;
pub mod mesh;
pub mod observables;
pub mod output;
pub mod scenario;
pub mod sim;
pub mod transport;

pub use geometry::{Point2, Polygon2, Sector, Vec2};
pub use mesh::{BoundaryLabel, ChordProfile, DomainSpec, SpatialGrid, TriMesh};
pub use scenario::{Scenario, ScenarioConfig};
pub use sim::Simulation;
pub use transport::{DensityField, WallMode};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("mesh file {path}:{line}: {msg}")]
    MeshFormat {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("potential solve failed: {0}")]
    Solve(String),

    #[error("invalid configuration:\n{}", issues.join("\n"))]
    InvalidConfig { issues: Vec<String> },

    #[error("time step {dt} exceeds stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("non-finite density at t = {t} (step {step}); diagnostic dump advised")]
    NonFiniteDensity { t: f64, step: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
