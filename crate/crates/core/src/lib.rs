//! Outer symplectic billiards about smooth convex hypersurfaces in ℝ^{2d}.
//!
//! [`dynamics`] iterates the billiard map `T` and integrates the shadow field
//! `V`; [`duality`] holds the constructions they rest on; [`experiments`]
//! measures the shadowing, escape and periodic-orbit bounds.

pub mod body;
pub mod duality;
pub mod dynamics;
pub mod error;
pub mod experiments;
pub mod geometry;
mod newton;

pub use body::{BodySpec, ConvexBody, ConvexityReport};
pub use duality::{HamiltonianAtInfinity, SymmetrizedBody};
pub use dynamics::{OrbitRecord, ReflectionSolution, SolverSettings};
pub use error::{Error, Result};
pub use experiments::{ConstantsReport, ExperimentOptions, ExperimentReport, Table, Verdict};
pub use geometry::{Point, SymplecticSpace};
