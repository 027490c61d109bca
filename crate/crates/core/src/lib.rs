//! Semidefinite-programming lower bounds and heuristic upper bounds on the
//! squashed entanglement of a bipartite quantum state.
//!
//! The lower bound replaces `−log` by a Gauss-Radau rational approximation
//! (`quadrature`), writes the resulting f-divergence variationally (`fdiv`),
//! turns the variational problem into a noncommutative polynomial program
//! (`ncpoly`) and relaxes that to a moment SDP (`moment`, `solver`). The upper
//! bound searches over explicit purifications of fixed dimension
//! (`upperbound`).
//!
//! All entropic outputs are in bits.

pub mod error;
pub mod extreal;
pub mod fdiv;
pub mod moment;
pub mod ncpoly;
pub mod qstate;
pub mod quadrature;
pub mod solver;
pub mod upperbound;

pub use error::{Error, Result};
pub use extreal::ExtReal;
pub use qstate::DensityMatrix;
pub use quadrature::QuadratureRule;
