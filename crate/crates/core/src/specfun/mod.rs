//! Special functions and quadrature used by the outage and rate formulas.
//!
//! Every routine is pure and evaluates in finite arithmetic; intermediate
//! exponentials are rescaled rather than allowed to overflow.

mod bessel;
mod hyp;
mod lambert;
mod marcum;
mod quadrature;

pub use bessel::{bessel_i0, bessel_i0_scaled, bessel_j};
pub use hyp::hyp1f2_half;
pub use lambert::{lambert_w0, lambert_w0_of_exp};
pub use marcum::marcum_q1;
pub use quadrature::{
    gauss_laguerre, integrate_expweighted, integrate_finite, GaussLaguerre, QuadEstimate,
    QuadratureSpec,
};

pub(crate) use bessel::j1;
pub(crate) use marcum::q1_pair;
