//! Reconstruction of decaying vector fields in R^3 from their curl and
//! divergence, Helmholtz-Hodge decomposition `A = grad u + B`, and the
//! bounded-box Dirichlet variant.

pub mod analytic;
pub mod bounded;
pub mod decompose;
pub mod error;
pub mod grid;
pub mod io;
pub mod ops;
pub mod poisson;
pub mod quad;
pub mod reconstruct;

pub use bounded::{boundary_trace, dirichlet_reconstruct, BoundaryTrace};
pub use decompose::{decompose, DecompositionResult, Diagnostics};
pub use error::{Error, Result};
pub use grid::{DecayCheck, DecayClass, DecayRequirement, Grid3, ScalarField, VectorField};
pub use io::FieldData;
pub use poisson::{newtonian_potential, newtonian_potential_vec, Backend};
pub use reconstruct::{reconstruct_alternative, reconstruct_from_curl_div, uniqueness_residual, UniquenessReport};
