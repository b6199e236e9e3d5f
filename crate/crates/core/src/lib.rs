//! Proactive monitoring with a fluid-antenna legitimate monitor.
//!
//! The monitor listens to a suspicious source through a fluid antenna that
//! switches to the strongest of `N` correlated ports, and jams the suspicious
//! destination so the suspicious link lowers its rate. This crate evaluates
//! the resulting average monitoring rate, optimizes the jamming power under
//! the destination outage constraint, and checks every closed form against
//! Monte Carlo simulation.
//!
//! Module map:
//! - [`specfun`]: Bessel functions, Marcum Q, Lambert W, quadrature.
//! - [`channel`]: system parameters, port correlation and channel draws.
//! - [`outage`]: outage probabilities, monitoring rates, rate/power inversion.
//! - [`optimize`]: the bisection, closed-form, exhaustive and baseline schemes.
//! - [`mcsim`]: Monte Carlo estimators with reproducible substreams.
//! - [`expcli`]: experiment configuration, sweeps, CSV/SVG output, validation.

pub mod channel;
pub mod error;
pub mod expcli;
pub mod mcsim;
pub mod optimize;
pub mod outage;
pub mod specfun;

pub use error::{Error, Result};
