//! Oracle-efficient online learning against smoothed and K-hint
//! transductive adversaries.
//!
//! The crate is organised as:
//!
//! - [`domain`]: finite instance spaces, hypothesis classes, losses and
//!   smooth distributions.
//! - [`oracle`]: offline optimization oracles with call accounting. Learners
//!   touch the hypothesis class only through these.
//! - [`adversary`]: smoothed and transductive adversaries, including the
//!   lower-bound instances.
//! - [`learner`]: random-playout learners (self-generated and given hints),
//!   Poissonized follow-the-perturbed-leader, FTL, Hedge and the
//!   unknown-σ doubling meta learner.
//! - [`verify`]: numeric checks of the coupling, TV/χ², monotonicity,
//!   relaxation and admissibility statements.
//! - [`harness`]: the game loop, experiment configs, CSV output and scaling
//!   fits.

pub mod adversary;
pub mod domain;
pub mod error;
pub mod harness;
pub mod learner;
pub mod oracle;
pub mod rng;
pub mod verify;

pub use error::{LabError, Result};
