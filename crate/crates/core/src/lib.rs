//! Numerical inverse scattering for the Kadomtsev–Petviashvili equation.
//!
//! The field `u(x, y, t)` is reconstructed from scattering data either by
//! solving the Gelfand–Levitan–Marchenko equation on a quadrature grid
//! ([`glm`]) or through the tau function as a Fredholm determinant
//! ([`fredholm`]). A pseudo-spectral split-step integrator ([`spectral`])
//! provides an independent forward solution.

pub mod analysis;
pub mod error;
pub mod field;
pub mod fredholm;
pub mod glm;
pub mod io;
pub mod linalg;
pub mod quadrature;
pub mod scattering;
pub mod spectral;

pub use error::{Error, Result};
pub use field::{Grid2D, Method, Quantity, SolutionField, Spacing};
pub use quadrature::{QuadratureKind, QuadratureRule};
pub use scattering::{make_soliton, parse_solitons, ScatteringData, SolitonComponent};
