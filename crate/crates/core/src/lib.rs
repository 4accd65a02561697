//! Gauge-based obstacles for convex gradient constraints, a penalized solver
//! for fully nonlinear double obstacle problems, and numerical checks of the
//! equivalence between the two formulations.

pub mod cli_io;
pub mod convex_gauge;
pub mod domain;
pub mod equivalence;
pub mod error;
pub mod grid;
pub mod linalg;
pub mod obstacle;
pub mod operators;
pub mod penalty_solver;

pub use convex_gauge::{smooth_approximation, ConvexBody, GaugeEval, NormalCone};
pub use domain::{BoundaryDatum, Domain2D, DomainKind};
pub use error::{Error, Result};
pub use grid::{DomainGrid, Grid, GridField};
pub use operators::{EllipticOperator, LinearOperator};
pub use penalty_solver::{solve_double_obstacle, DoubleObstacleProblem, PenaltyConfig};
