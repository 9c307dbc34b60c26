//! Exact masses of even unimodular lattices by root system, and the
//! odd-lattice and no-root quantities derived from them.

#![allow(clippy::needless_range_loop)]

pub mod embed;
pub mod mass;
pub mod padic;
pub mod reduce;
pub mod roots;
pub mod scalar;
pub mod siegel;
pub mod table;

pub use embed::{emb_irreducible, rep_count, RepCounter};
pub use mass::{genus_mass, solve_masses, verify_total, MassEntry, MassError, MassTable, SolveOptions};
pub use padic::{jordan_decompose, HalfIntegralMatrix, JordanDecomposition, LocalInvariants};
pub use reduce::{class_lower_bound, reduce_masses, BoundReport, OddMassTable};
pub use roots::{enumerate_root_systems, Component, Filters, RootSystem};
pub use scalar::{AnalyticScalar, DirichletCharacter, Rational};
pub use siegel::{a_average, a_average_gram, eisenstein_coefficient, f_p_eval, SiegelError};
pub use table::Format;
