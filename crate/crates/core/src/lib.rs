//! Exact discrete optimal transport with extremality certificates and
//! numbered limb systems.

pub mod acceptance;
pub mod error;
pub mod extremality;
pub mod io;
pub mod kantorovich;
pub mod limbs;
pub mod linalg;
pub mod manifold;
pub mod measures;
pub mod scalar;
pub mod support;

pub use error::{Error, Result};
pub use extremality::{check_extremal, ExtremalityVerdict, Method, Verdict, Witness};
pub use kantorovich::{solve, solve_with, verify_certificate, DualPotentials, Solution, SolverOptions};
pub use limbs::{decompose, reconstruct, LimbReconstruction, NumberedLimbSystem};
pub use manifold::{CostFunction, GridKind, GridManifold, TwistReport};
pub use measures::{add, marginals, pushforward_coupling, Coupling, CostMatrix, Direction, DiscreteMeasure, PartialMap};
pub use scalar::{Arithmetic, Rational, Scalar};
pub use support::{acyclicity_test, build_support_graph, Cycle, ForestReport, Node, SupportGraph};
