//! Game-theoretic evaluation of agents.
//!
//! * [`hodge`]: gradient, divergence, curl and rotation of antisymmetric
//!   matrices, and the transitive/cyclic split of evaluation data.
//! * [`schur`]: thin real Schur factorisation of antisymmetric matrices.
//! * [`avt`]: agent-vs-task score matrices and their antisymmetric embeddings.
//! * [`ratings`]: Elo and multidimensional Elo.
//! * [`nash`]: maximum-entropy Nash equilibria and Nash averaging.
//! * [`io`]: CSV ingestion and JSON reports.

pub mod avt;
pub mod error;
pub mod hodge;
pub mod io;
mod linalg;
pub mod nash;
pub mod ratings;
pub mod schur;

pub use error::{Error, Result};
