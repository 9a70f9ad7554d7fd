//! Compiles the book's code blocks as documentation tests, so `cargo test
//! --doc` keeps the guide in `book/` honest. Built only under
//! `cfg(doctest)`; it contributes nothing to the library itself.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/rank-statistics.md")]
pub mod rank_statistics {}

#[doc = include_str!("../../../book/src/score-functions.md")]
pub mod score_functions {}

#[doc = include_str!("../../../book/src/roc-analysis.md")]
pub mod roc_analysis {}

#[doc = include_str!("../../../book/src/smoothing.md")]
pub mod smoothing {}

#[doc = include_str!("../../../book/src/learning.md")]
pub mod learning {}

#[doc = include_str!("../../../book/src/synthetic-models.md")]
pub mod synthetic_models {}

#[doc = include_str!("../../../book/src/hajek.md")]
pub mod hajek {}

#[doc = include_str!("../../../book/src/harness.md")]
pub mod harness {}
