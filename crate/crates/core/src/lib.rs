//! Numerical laboratory for area-preserving maps of surfaces: topological
//! entropy from separated orbit counts, Lyapunov exponents of periodic orbits,
//! a snake-perturbed horseshoe model and a pendulum flow on the sphere.

pub mod entropy;
pub mod error;
pub mod flow;
pub mod horseshoe;
pub mod linalg;
pub mod maps;
pub mod measures;
pub mod periodic;
pub mod report;
pub mod sampling;

pub use error::{Error, Result};
pub use maps::{PhasePoint, PhaseTopology, PlanarMap};
