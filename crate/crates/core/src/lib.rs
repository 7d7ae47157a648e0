//! Numerical laboratory for warped-product metrics on the 3-torus
//! T³ = [-π, π]³.
//!
//! Two metric families are studied: doubly warped metrics
//! g = a²(z)dx² + b²(z)dy² + dz² with warps depending on one coordinate,
//! and singly warped metrics g = dx² + dy² + f²(x, y)dz². The crate
//! provides the discrete calculus ([`grid`]), curvature and residual
//! computations ([`metric`]), global geometric functionals driven by a
//! lattice geodesic solver ([`functional`]), seeded metric-sequence
//! generators ([`generate`]), and the two verification pipelines
//! ([`doubly`], [`singly`]) that decide whether a sequence with scalar
//! curvature ≥ -1/j converges to a flat torus.

pub mod doubly;
pub mod functional;
pub mod generate;
pub mod grid;
pub mod metric;
pub mod report;
pub mod singly;

pub use doubly::{DoublyPipelineConfig, HypothesisBounds, HypothesisSet, LimitCandidate1D};
pub use functional::{
    DiameterEstimate, DistanceMatrix, FlatTorus3, FunctionalError, GeometricReport,
    LatticeReport, UniformDistance,
};
pub use generate::{
    AmplitudeLaw, FamilyKind, GenerateError, GeneratedDoubly, GeneratedSingly, Mode,
    SequenceSpec,
};
pub use grid::{AnalysisConstants, Field1D, Field2D, GridError, PeriodicGrid1D, PeriodicGrid2D};
pub use metric::{
    DoublyWarpedMetric, MetricError, ResidualCheck1D, ResidualCheck2D, SinglyWarpedMetric,
};
pub use report::{
    fit_power_law, CheckEntry, ConvergenceReport, LimitSummary, PipelineError, RateFit,
    ReportRow, Verdict,
};
pub use singly::{
    BarrierParams, LevelSetProfile, LimitCandidate2D, SinglyPipelineConfig, SliceStats,
    StampacchiaParams,
};
