//! Exact multi-marginal optimal transport for the time-discretized
//! generalized Euler equations.
//!
//! The crate assembles the Kantorovich linear program over discrete path
//! spaces and solves it with an exact rational simplex method, builds the
//! closed-form mass-splitting optimizers on `{-1, 0, 1}` and on `[-1, 1]`,
//! and checks optimality, marginal, and mass-splitting properties exactly.

pub mod costs;
pub mod error;
pub mod euler;
pub mod grid;
pub mod lp;
pub mod measures;
pub mod rational;
pub mod render;

pub use costs::{CostFunction, CostValue};
pub use error::{Error, Result};
pub use grid::{DiscretePath, EndpointMap, SpatialGrid, TimeGrid};
pub use measures::{Arith, MassValue, TransportPlan};
pub use rational::Q;
