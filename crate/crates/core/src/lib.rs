//! Exact lattice computations for fixed loci of finite symplectic actions on
//! moduli spaces of sheaves on K3 and abelian surfaces.

pub mod enumerate;
pub mod error;
pub mod eta;
pub mod group_action;
pub mod lattice;
pub mod linalg;
pub mod moduli;
pub mod problem;
pub mod stability;

pub use error::{Error, Result};
pub use eta::QSeries;
pub use group_action::{Frameshape, GroupAction, Isometry};
pub use lattice::{mukai_lattice, Lattice, LatticeVector, Sublattice};
pub use linalg::{Matrix, Rational};
