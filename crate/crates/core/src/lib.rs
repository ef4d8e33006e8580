//! Sparse octagon abstract domain.
//!
//! Octagons (conjunctions of `±x ± y <= c`) are represented as difference
//! bound matrices over signed variables. Instead of the usual strongly closed
//! dense matrices, [`SparseDbm`] keeps matrices *weakly closed*: interval
//! bounds are never spread into relational cells, so variables that are
//! bounded but unrelated cost nothing. Comparison, join, forget, assume and
//! integer tightening work directly on that form and are exactly as precise as
//! the classic operators on strong closures, which [`dense`] implements as a
//! reference.
//!
//! On top of that sit a user-facing value type with bottom, assignment and
//! widening ([`domain`]), a small abstract interpreter ([`analyzer`]) and a
//! benchmark harness ([`bench`]).

pub mod analyzer;
pub mod bench;
pub mod bound;
pub mod constraint;
pub mod dense;
pub mod domain;
pub mod error;
pub mod rational;
pub mod sparse;
pub mod var;

pub use bound::Bound;
pub use constraint::{parse_constraints, Constraint, ConstraintSet};
pub use dense::{DenseDbm, PointSet};
pub use domain::{widen, OctValue, Rhs, WidenConfig, Widened};
pub use error::{Error, Result};
pub use rational::Rational;
pub use sparse::{Interval, Mode, SparseDbm};
pub use var::{Env, SVar, VarId, VarTable};
