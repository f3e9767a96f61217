//! Learning general (non-homogeneous) Gaussian halfspaces under random
//! classification noise.
//!
//! The crate is organised bottom-up:
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`rng`], [`normal`], [`hermite`], [`geometry`], [`quadrature`] | deterministic math primitives |
//! | [`synthetic`], [`source`] | problem construction, RCN data generation, sample oracles, dataset files |
//! | [`initializer`] | Chow-vector warm start, adaptive bias estimation, noise-rate estimation |
//! | [`optimizer`] | band-restricted Riemannian subgradient descent on the unit sphere |
//! | [`learner`] | the end-to-end pipeline: threshold grid, per-threshold optimisation, selection |
//! | [`sq_lab`] | Hermite coefficients of shifted sign functions, correlation series, Mehler sums, packings, χ-correlations, the `‖Z_N‖²` distinguisher |
//!
//! Every random quantity is driven by a [`Seed`] through SplitMix64 and
//! Box–Muller, so a seed fully determines datasets, models and reports.
//!
//! ```
//! use hrcn_core::source::{SampleSource, StreamSource};
//! use hrcn_core::{learner, synthetic, Seed};
//!
//! let problem = synthetic::random_problem(3, 0.5, 0.1, Seed(7)).unwrap();
//! let mut oracle = StreamSource::new(problem.clone());
//! let mut config = learner::LearnConfig::new(0.2, 0.1, Some(0.1));
//! config.scales.init_final = 1e-3;
//! config.scales.optimize = 5.0;
//! config.opt.iteration_cap = 30;
//! let report = learner::learn(&mut oracle, &config).unwrap();
//! assert_eq!(report.samples_used, oracle.drawn());
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod hermite;
pub mod initializer;
pub mod learner;
pub mod normal;
pub mod optimizer;
pub mod quadrature;
pub mod rng;
pub mod source;
pub mod sq_lab;
pub mod synthetic;

mod reduce;

pub use error::{Error, Result};
pub use geometry::UnitVector;
pub use hermite::HermiteDegree;
pub use rng::Seed;
pub use synthetic::{Dataset, Halfspace, ProblemSpec};

/// Version string embedded in run manifests and reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
