//! Exact game solving and learning dynamics for two-team zero-sum
//! normal-form games.
//!
//! Every quantity here (expected utilities, team best responses,
//! exploitability, Q-functions) is computed by exhaustive enumeration over
//! joint actions, so the training loops in [`trainers`] are fully
//! deterministic and free of evaluation noise.
//!
//! The crate is `no_std` and only needs an allocator. File formats, the
//! experiment runner and the command line live in the companion `fxp-cli`
//! crate.
#![no_std]
#![warn(missing_docs)]

extern crate alloc;

mod error;
pub mod game;
pub mod games;
pub mod learners;
mod lp;
mod math;
pub mod meta;
pub mod theorems;
pub mod trainers;

pub use error::Error;
pub use game::{JointAction, MixturePolicy, ProductPolicy, TeamGame};

/// Convenience alias used across the crate.
pub type Result<T, E = Error> = core::result::Result<T, E>;
