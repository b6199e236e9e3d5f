//! Bessel functions of the first kind (orders 0 and 1) and the modified
//! Bessel function `I0`, plus the ratio sequence `I_k / I_{k-1}` used by the
//! Marcum Q series.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};

/// Below this argument `I0` is summed from its power series; above it the
/// large-argument expansion is used (truncation error ~ e^{-2z}).
const I0_SERIES_LIMIT: f64 = 25.0;

/// `J0`/`J1` use the power series below this, Miller's backward recurrence up
/// to [`J_ASYMPTOTIC_FROM`], and Hankel's expansion beyond.
const J_SERIES_LIMIT: f64 = 2.0;
const J_ASYMPTOTIC_FROM: f64 = 25.0;

/// Modified Bessel function of the first kind, order zero.
///
/// Exact for the whole range where `I0(z)` is representable (`z` up to ~713);
/// larger arguments report [`Error::Overflow`] instead of returning infinity.
/// Use [`bessel_i0_scaled`] when only `e^{-z} I0(z)` is needed.
pub fn bessel_i0(z: f64) -> Result<f64> {
    check_nonneg("bessel_i0", z)?;
    if z <= I0_SERIES_LIMIT {
        return Ok(i0_series(z));
    }
    let v = z.exp() * i0_scaled(z);
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Overflow {
            function: "bessel_i0",
            arg: z,
        })
    }
}

/// `e^{-z} I0(z)`, finite for every finite `z >= 0`.
pub fn bessel_i0_scaled(z: f64) -> Result<f64> {
    check_nonneg("bessel_i0_scaled", z)?;
    Ok(i0_scaled(z))
}

/// Bessel function of the first kind of order 0 or 1.
pub fn bessel_j(order: u32, z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::domain("bessel_j", format!("non-finite argument {z}")));
    }
    match order {
        0 => Ok(j0(z)),
        1 => Ok(j1(z)),
        _ => Err(Error::domain(
            "bessel_j",
            format!("order {order} unsupported (only 0 and 1)"),
        )),
    }
}

fn check_nonneg(function: &'static str, z: f64) -> Result<()> {
    if !z.is_finite() || z < 0.0 {
        return Err(Error::domain(function, format!("argument {z} must be finite and >= 0")));
    }
    Ok(())
}

fn i0_series(z: f64) -> f64 {
    let q = 0.25 * z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1.0;
    while term > 1e-17 * sum {
        term *= q / (k * k);
        sum += term;
        k += 1.0;
    }
    sum
}

pub(crate) fn i0_scaled(z: f64) -> f64 {
    if z <= I0_SERIES_LIMIT {
        return i0_series(z) * (-z).exp();
    }
    // e^{-z} I0(z) ~ (2 pi z)^{-1/2} sum_k ((2k-1)!!)^2 / (k! 8^k z^k)
    let mut term: f64 = 1.0;
    let mut sum = 1.0;
    let mut k: f64 = 1.0;
    loop {
        let next = term * (2.0 * k - 1.0).powi(2) / (8.0 * k * z);
        if next >= term || next < 1e-17 * sum {
            break;
        }
        term = next;
        sum += term;
        k += 1.0;
    }
    sum / (2.0 * PI * z).sqrt()
}

pub(crate) fn j0(z: f64) -> f64 {
    let x = z.abs();
    if x <= J_SERIES_LIMIT {
        j_series(0, x)
    } else if x <= J_ASYMPTOTIC_FROM {
        j_miller(x).0
    } else {
        j_hankel(0, x)
    }
}

pub(crate) fn j1(z: f64) -> f64 {
    let x = z.abs();
    let v = if x <= J_SERIES_LIMIT {
        j_series(1, x)
    } else if x <= J_ASYMPTOTIC_FROM {
        j_miller(x).1
    } else {
        j_hankel(1, x)
    };
    if z < 0.0 {
        -v
    } else {
        v
    }
}

fn j_series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let nu = order as f64;
    let mut term = if order == 0 { 1.0 } else { half };
    let mut sum = term;
    let mut k = 1.0;
    while term.abs() > 1e-18 * sum.abs().max(1e-300) {
        term *= q / (k * (k + nu));
        sum += term;
        k += 1.0;
    }
    sum
}

/// Miller's backward recurrence normalized by `J0 + 2 sum J_{2k} = 1`.
fn j_miller(x: f64) -> (f64, f64) {
    let start = x.ceil() as usize + 30 + (2.0 * x.sqrt()).ceil() as usize;
    let m = start + start % 2;
    let mut next = 0.0; // J_{k+1}
    let mut cur = 1e-30; // J_k, k = m
    let mut even_sum = cur;
    let mut j1v = 0.0;
    for k in (1..=m).rev() {
        let prev = (2.0 * k as f64 / x) * cur - next;
        next = cur;
        cur = prev;
        let idx = k - 1;
        if idx == 1 {
            j1v = cur;
        } else if idx > 0 && idx % 2 == 0 {
            even_sum += cur;
        }
        if cur.abs() > 1e250 {
            cur *= 1e-250;
            next *= 1e-250;
            even_sum *= 1e-250;
            j1v *= 1e-250;
        }
    }
    let norm = cur + 2.0 * even_sum;
    (cur / norm, j1v / norm)
}

/// Hankel's large-argument expansion for orders 0 and 1.
fn j_hankel(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut k = 1;
    loop {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (8.0 * k as f64 * x);
        if next.abs() >= term.abs() || next.abs() < 1e-17 {
            break;
        }
        term = next;
        // k = 1,2,3,4,... contributes -Q, -P, +Q, +P, ...
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        k += 1;
    }
    let (s, c) = x.sin_cos();
    // cos/sin of x - pi/4 (order 0) or x - 3 pi/4 (order 1)
    let (cos_chi, sin_chi) = if order == 0 {
        ((c + s) * FRAC_1_SQRT_2, (s - c) * FRAC_1_SQRT_2)
    } else {
        ((s - c) * FRAC_1_SQRT_2, -(s + c) * FRAC_1_SQRT_2)
    };
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Fills `out[k-1] = I_k(x) / I_{k-1}(x)` for `k = 1..=out.len()` by backward
/// recurrence started well beyond the requested range.
pub(crate) fn i_ratios(x: f64, out: &mut [f64]) {
    let n = out.len();
    if x == 0.0 {
        out.iter_mut().for_each(|r| *r = 0.0);
        return;
    }
    let start = 2 * n + 20;
    let kf = start as f64 + 1.0;
    let mut r = x / (kf + 0.5 + ((kf + 0.5).powi(2) + x * x).sqrt());
    for k in (1..=start).rev() {
        r = 1.0 / (2.0 * k as f64 / x + r);
        if k <= n {
            out[k - 1] = r;
        }
    }
}
