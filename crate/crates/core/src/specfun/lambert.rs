//! Principal branch of the Lambert W function, `w e^w = x` with `w >= -1`.

use std::f64::consts::E;

use crate::error::{Error, Result};

const BRANCH_POINT: f64 = -1.0 / E;
const BRANCH_SLACK: f64 = 1e-15;
const MAX_ITER: usize = 64;

/// Real `W0(x)` for `x >= -1/e`, solved by Halley's iteration.
///
/// Arguments up to `1e-15` below `-1/e` are treated as the branch point.
/// The result is checked by its residual `|w e^w - x| <= 1e-12 max(1, |x|)`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("lambert_w0", format!("non-finite argument {x}")));
    }
    if x < BRANCH_POINT - BRANCH_SLACK {
        return Err(Error::domain(
            "lambert_w0",
            format!("argument {x} below the branch point -1/e"),
        ));
    }
    if x <= BRANCH_POINT {
        return Ok(-1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x > 1e100 {
        return Ok(w_from_log(x.ln()));
    }

    let mut w = initial_guess(x);
    for _ in 0..MAX_ITER {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let dw = f / (ew * wp1 - 0.5 * (w + 2.0) * f / wp1);
        w -= dw;
        if dw.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            break;
        }
    }
    let w = w.max(-1.0);
    let residual = (w * w.exp() - x).abs();
    if residual > 1e-12 * x.abs().max(1.0) {
        return Err(Error::Accuracy {
            context: "lambert_w0 residual",
            last: residual,
            previous: x,
        });
    }
    Ok(w)
}

/// `W0(e^{ln_y})` for arguments whose exponential would overflow.
pub fn lambert_w0_of_exp(ln_y: f64) -> Result<f64> {
    if ln_y.is_nan() || ln_y == f64::INFINITY {
        return Err(Error::domain("lambert_w0_of_exp", format!("argument {ln_y}")));
    }
    if ln_y < 230.0 {
        lambert_w0(ln_y.exp())
    } else {
        Ok(w_from_log(ln_y))
    }
}

/// Newton on `w + ln w = L`, valid for large `L` where `w >> 1`.
fn w_from_log(l: f64) -> f64 {
    let mut w = l - l.ln() + l.ln() / l;
    for _ in 0..MAX_ITER {
        let f = w + w.ln() - l;
        let dw = f / (1.0 + 1.0 / w);
        w -= dw;
        if dw.abs() <= 4.0 * f64::EPSILON * w {
            break;
        }
    }
    w
}

fn initial_guess(x: f64) -> f64 {
    if x < -0.32 {
        // expansion about the branch point in p = sqrt(2(ex + 1))
        let p = (2.0 * (E * x + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
    } else if x < 3.0 {
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}
