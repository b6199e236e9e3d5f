//! The generalized hypergeometric value `1F2(1/2; 1, 3/2; -pi^2 W^2)`.

use std::f64::consts::PI;

use super::bessel::j0;
use super::quadrature::integrate_finite;
use crate::error::{Error, Result};

/// `1F2(1/2; 1, 3/2; -pi^2 W^2)` through `(1/a) integral_0^a J0(u) du`,
/// `a = 2 pi W`.
///
/// The defining series alternates with terms growing like `e^{2 pi W}`, so it
/// is useless beyond `W ~ 1`; the integral form is uniformly accurate.
pub fn hyp1f2_half(w: f64) -> Result<f64> {
    if !w.is_finite() || w <= 0.0 {
        return Err(Error::domain("hyp1f2_half", format!("W = {w} must be finite and > 0")));
    }
    let a = 2.0 * PI * w;
    // one panel per ~2 units keeps each panel within a half oscillation of J0
    let panels = (a / 2.0).ceil().max(1.0) as usize;
    let width = a / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let lo = i as f64 * width;
        let hi = if i + 1 == panels { a } else { lo + width };
        total += integrate_finite(j0, lo, hi, 1e-15 * width)?;
    }
    Ok(total / a)
}
