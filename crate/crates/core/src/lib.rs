//! Commitment menus for a learner facing an optimizer of unknown type in a
//! repeated bimatrix game.
//!
//! Outcomes are summarized by correlated strategy profiles ([`Csp`]): a
//! distribution over the `m * n` pure action pairs, stored row-major with
//! learner actions as rows. A menu is a set of CSPs the learner lets the
//! optimizer choose from.

// `!(x > 0.0)` style checks deliberately reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approachability;
pub mod cli;
pub mod commit_general;
pub mod commit_nr;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod lp;
pub mod maximin;
pub mod menus;
pub mod oracle;
pub mod playback;
pub mod stackelberg;

pub use error::{Error, Result};
pub use game::{
    assignment_value, bilinear_value, csp_of_transcript, BimatrixGame, Csp, CspAssignment, Matrix, OptimizerType,
    Transcript,
};
