//! A workbench for first-order logic without identity over finite structures.
//!
//! The crate computes Leibniz reductions and weak isomorphisms, plays the
//! identity-free Ehrenfeucht–Fraïssé game, evaluates the generalized
//! quantifiers `exists>=n`, `Qquot>=k` and the Henkin quantifier `QH`, and
//! ships a property harness that mechanically checks the finite combinatorial
//! claims behind these notions at desk scale.

pub mod error;
pub mod eval;
pub mod formula;
pub mod games;
pub mod harness;
pub mod leibniz;
pub mod monadic;
pub mod structure;

pub use error::Error;
pub use structure::{ElementMap, Partition, Structure, Vocabulary};

pub type Result<T> = std::result::Result<T, Error>;
