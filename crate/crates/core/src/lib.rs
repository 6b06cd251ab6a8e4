//! Extraction of deterministic finite automata from recurrent neural acceptors.
//!
//! The learner is Angluin's L* ([`lstar`]). Membership queries go straight to the
//! network; equivalence queries are answered by exploring an abstraction of the
//! network's continuous state space in parallel with the hypothesis
//! ([`teacher`]), refining the abstraction ([`abstraction`]) only when a conflict
//! is backed by concrete network behaviour.
//!
//! The numeric modules are generic over the scalar type ([`Scalar`]); the
//! aliases at the crate root fix it to `f64`, which is what the extraction
//! pipeline expects.

pub mod abstraction;
pub mod automata;
pub mod baselines;
pub mod corpus;
mod error;
pub mod lstar;
pub mod rnn;
mod scalar;
pub mod svm;
pub mod teacher;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use automata::{Alphabet, Dfa, Label, Word};

/// Network with `f64` weights and states.
pub type Rnn = rnn::RnnAcceptor<f64>;
/// Network with `f32` weights and states.
pub type Rnn32 = rnn::RnnAcceptor<f32>;
pub type StatePartitioning = abstraction::Partitioning<f64>;
pub type Svm = svm::RbfSvm<f64>;
pub type Kmeans = baselines::KmeansPartitioning<f64>;
pub type NetworkTeacher<'a> = teacher::RnnTeacher<'a, f64>;
