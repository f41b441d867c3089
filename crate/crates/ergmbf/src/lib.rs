//! Bayesian hypothesis evaluation for exponential random graph models.

pub mod bf;
pub mod data;
pub mod error;
pub mod hypothesis;
pub mod inference;
pub mod net;
pub mod prior;
pub mod report;
pub mod sampler;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};

// The guide's chapters run as documentation tests, so the code in the book
// cannot drift from the library. One module per chapter keeps a failing
// snippet traceable to its file.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/networks.md")]
    mod networks {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/prior.md")]
    mod prior {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/hypotheses.md")]
    mod hypotheses {}
    #[doc = include_str!("../../../book/src/bayes-factors.md")]
    mod bayes_factors {}
    #[doc = include_str!("../../../book/src/studies.md")]
    mod studies {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
