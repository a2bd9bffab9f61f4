//! Analytic and Monte Carlo engines for a cache-aware fog radio access
//! downlink with three delivery modes: device-to-device links, nearest
//! cached fog access point, and local coordinated transmission.
//!
//! Module map:
//! - [`quad`]: adaptive Simpson quadrature, finite and semi-infinite.
//! - [`specfun`]: exponential integral, interference constant, threshold
//!   integral rho.
//! - [`cache`]: Zipf popularity, cache hit probabilities, rank sampling.
//! - [`geometry`]: Poisson fields on a disc, thinning, nearest-point and
//!   void-probability laws.
//! - [`params`]: network parameter set shared by both engines.
//! - [`analytic`]: closed-form and quadrature evaluators for mode
//!   probabilities, coverage, and ergodic rates.
//! - [`sim`]: Monte Carlo realization machinery, SIR evaluation, mode
//!   selection, and estimators with deterministic seeding.

pub mod analytic;
pub mod cache;
pub mod geometry;
pub mod params;
pub mod quad;
pub mod sim;
pub mod specfun;
