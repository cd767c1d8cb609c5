//! Benchmark engine for parametric 3D-modeling program synthesis.
//!
//! The crate is organized around a small pipeline:
//!
//! 1. [`shapescript`] parses and sandbox-executes modeling programs written
//!    in the ShapeScript DSL, producing primitive instances.
//! 2. [`meshgen`] tessellates instances into triangle meshes and extracts
//!    vertex point clouds.
//! 3. [`geomtest`] decides whether two point clouds describe the same shape
//!    independent of position and orientation (PCA normalization,
//!    bidirectional delta-matching, Chamfer distance).
//! 4. [`metrics`] scores many generation attempts with pass@k and buckets
//!    failures into error categories.
//! 5. [`corpus`] loads prompt/solution sample sets and handles OBJ interop.
//! 6. [`render`] produces deterministic orthographic view images for the
//!    visual-feedback refinement loop driven by [`genclient`].

pub mod corpus;
pub mod genclient;
pub mod geom;
pub mod geomtest;
pub mod meshgen;
pub mod metrics;
pub mod render;
pub mod shapescript;

pub use geom::{Mat3, Vec3};
pub use geomtest::{EvalOutcome, MatchConfig, NormalizedCloud, Verdict};
pub use meshgen::{PointCloud, TessellationDefaults, TriMesh};
pub use metrics::{ErrorCategory, RunReport, SampleRuns};
pub use shapescript::{ExecLimits, PrimitiveInstance, PrimitiveKind, Program};
