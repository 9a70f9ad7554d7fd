//! Bipartite ranking by maximization of kernel-smoothed two-sample rank
//! statistics.
//!
//! The crate learns real-valued scoring functions from labeled positive and
//! negative feature samples so that positives concentrate at the top of the
//! induced order. Ranking quality is measured by two-sample linear rank
//! statistics - a score-generating function applied to the normalized pooled
//! ranks of the positives - which cover the AUC (Wilcoxon weight), its
//! top-of-the-list variants and the classical nonparametric test statistics.
//! Training maximizes a kernel-smoothed version of the empirical criterion
//! by plain gradient ascent.
//!
//! Module map:
//!
//! * [`ranks`] - pooled samples, mid-ranks, exact rank statistics;
//! * [`scoregen`] - the catalogue of score-generating functions;
//! * [`roceval`] - empirical ROC curves, AUC, curve distances, the scalar
//!   `W_phi` summary, complexity penalties and model selection;
//! * [`smoothing`] - smoothed empirical c.d.f., smoothed criterion and its
//!   analytic gradient;
//! * [`models`] - linear and quadratic scoring classes;
//! * [`optimizer`] - gradient ascent with early stopping;
//! * [`synthdata`] - seeded Gaussian location/scale models and their
//!   closed-form optima;
//! * [`linearization`] - the Hajek decomposition diagnostic;
//! * [`experiment`] / [`config`] / [`checks`] - the Monte-Carlo harness
//!   behind the `biprank` binary.
//!
//! The `book/` directory of the repository walks through the concepts with
//! runnable examples; its code blocks compile as doc-tests via the hidden
//! `guide` module.

pub mod checks;
pub mod config;
pub mod error;
pub mod experiment;
mod gauss;
pub mod linearization;
pub mod models;
pub mod optimizer;
mod quadrature;
pub mod ranks;
pub mod roceval;
pub mod scoregen;
pub mod smoothing;
mod svg;
pub mod synthdata;

#[cfg(doctest)]
pub mod guide;

pub use error::{Error, Result};
