//! The kappa-generalized model of the size distribution of income.
//!
//! * [`kexp`], [`special`]: deformed exponential/logarithm, gamma ratios and
//!   the incomplete beta integral.
//! * [`distribution`]: density, distribution and quantile functions, mode,
//!   moments and seeded sampling.
//! * [`inequality`]: Lorenz curve, Gini coefficient and coefficient of
//!   variation, theoretical and empirical.
//! * [`estimation`]: maximum likelihood under the unit-mean constraint.
//! * [`gof`]: one-sided Kolmogorov-Smirnov test, Q-Q pairs and bootstrap
//!   intervals for the empirical Gini.
//! * [`ingest`]: CSV loading and survey preprocessing.
//! * [`cli`]: the `kappa` command-line front end.

pub mod cli;
pub mod distribution;
pub mod error;
pub mod estimation;
pub mod gof;
pub mod inequality;
pub mod ingest;
pub mod kexp;
pub mod simplex;
pub mod special;

pub use distribution::{KappaParams, MomentSummary, Mode};
pub use error::{Error, Result};
pub use estimation::{beta_from, fit, log_likelihood, FitConfig, FitResult};
pub use gof::GofReport;
pub use inequality::{LorenzPoints, LorenzSource};
pub use ingest::{preprocess, PreprocessOptions, RawRecord, Schema, WeightedSample};
pub use kexp::{kappa_exp, kappa_log, Kappa};
pub use special::{incomplete_beta, log_gamma_ratio};
