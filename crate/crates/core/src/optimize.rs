//! Rate optimizers and baseline schemes.
//!
//! Every scheme picks a suspicious rate `R` in the feasible interval
//! `[R_min, R_max]`; the jamming power then follows from the destination
//! outage constraint via [`crate::outage::pm_for_rate`].

use std::f64::consts::LN_2;

use rayon::prelude::*;

use crate::channel::{DerivedLink, SystemParams};
use crate::error::{Error, Result};
use crate::outage::{
    pm_for_rate_unchecked, rate_approx, rate_bound, rate_bounds, rate_true, RatePoint,
};
use crate::specfun::{lambert_w0, QuadratureSpec};

pub const DEFAULT_BISECT_TOL: f64 = 1e-9;
pub const DEFAULT_GRID_POINTS: usize = 4096;

/// Points at which `h - g` is sampled to bracket stationary points.
const SIGN_SCAN_POINTS: usize = 256;
/// Doublings of `x` tried when `h - g` stays positive up to `R_max`.
const EXTENSION_CAP: usize = 64;
const GOLDEN_ITERS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Bisection on the upper-bound objective.
    ProposedBisect,
    /// Lambert-W maximizer of the approximate objective.
    ProposedClosedForm,
    /// Exhaustive search on the exact objective.
    TrueGrid,
    /// Full jamming power at all times.
    ConstantJamming,
    /// No jamming.
    Passive,
    /// Jamming monitor with a single fixed antenna.
    ConventionalSingle,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::ProposedBisect,
        Scheme::ProposedClosedForm,
        Scheme::TrueGrid,
        Scheme::ConstantJamming,
        Scheme::Passive,
        Scheme::ConventionalSingle,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::ProposedBisect => "ProposedBisect",
            Scheme::ProposedClosedForm => "ProposedClosedForm",
            Scheme::TrueGrid => "TrueGrid",
            Scheme::ConstantJamming => "ConstantJamming",
            Scheme::Passive => "Passive",
            Scheme::ConventionalSingle => "ConventionalSingle",
        }
    }

    pub fn from_name(name: &str) -> Option<Scheme> {
        Scheme::ALL.into_iter().find(|s| s.name().eq_ignore_ascii_case(name))
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptResult {
    pub scheme: Scheme,
    pub r_star: f64,
    pub pm_star: f64,
    /// The scheme's own objective at `r_star`.
    pub objective_value: f64,
    /// Exact average monitoring rate at `r_star`.
    pub rate_true_at_rstar: f64,
    /// True when `r_star` sits on an end of the feasible interval.
    pub clamped: bool,
    /// Stationary point of the objective before clamping, when one was found.
    pub r_unclamped: Option<f64>,
    pub iterations: usize,
}

/// `F(x) = log2(1 + x)(1 - eta B^N)`, its positive part
/// `h(x) = (1 - eta B^N) / (ln 2 (1 + x))` and negative part
/// `g(x) = N log2(1 + x) eta B^{N-1} e^{-x/c} / c`, with
/// `c = Gamma (1 - mu^2)` and `B = 1 - e^{-x/c}`; `F' = h - g`.
pub fn objective_terms(link: &DerivedLink, n_ports: usize, x: f64) -> (f64, f64, f64) {
    let c = link.conditional_scale();
    let e = (-x / c).exp();
    let b = -(-x / c).exp_m1();
    let n = n_ports as i32;
    let eta = link.eta_for(n_ports);
    let keep = 1.0 - eta * b.powi(n);
    let log_term = x.ln_1p() / LN_2;
    let f = log_term * keep;
    let h = keep / (LN_2 * (1.0 + x));
    let g = n_ports as f64 * log_term / c * eta * b.powi(n - 1) * e;
    (f, h, g)
}

fn x_of(r: f64) -> f64 {
    (r * LN_2).exp_m1()
}

fn slope(link: &DerivedLink, n: usize, r: f64) -> f64 {
    let (_, h, g) = objective_terms(link, n, x_of(r));
    h - g
}

fn bound_objective(link: &DerivedLink, n: usize, r: f64) -> f64 {
    objective_terms(link, n, x_of(r)).0
}

/// Maximizes the upper-bound objective over `[R_min, R_max]`.
///
/// `h - g` is scanned on a uniform grid; every `+ -> -` change is refined by
/// bisection to `tol`, and the resulting stationary points compete with the
/// two interval ends. The scan makes the result correct also when `h - g`
/// changes sign more than once, which happens for large `N` and small
/// `Gamma`.
pub fn solve_bound_bisect(
    params: &SystemParams,
    link: &DerivedLink,
    tol: f64,
    spec: &QuadratureSpec,
) -> Result<OptResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParam {
            name: "tol",
            value: tol,
            reason: "bisection tolerance must be > 0",
        });
    }
    params.require_fas()?;
    let n = params.n_ports;
    let (r_min, r_max) = rate_bounds(params)?;

    let step = (r_max - r_min) / (SIGN_SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SIGN_SCAN_POINTS)
        .map(|i| if i + 1 == SIGN_SCAN_POINTS { r_max } else { r_min + step * i as f64 })
        .collect();
    let signs: Vec<f64> = grid.iter().map(|&r| slope(link, n, r)).collect();

    let mut iterations = 0;
    let mut stationary = Vec::new();
    for i in 1..grid.len() {
        if signs[i - 1] > 0.0 && signs[i] <= 0.0 {
            let (mut lo, mut hi) = (grid[i - 1], grid[i]);
            while hi - lo > tol {
                let mid = 0.5 * (lo + hi);
                if slope(link, n, mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                iterations += 1;
            }
            stationary.push(0.5 * (lo + hi));
        }
    }

    let mut r_unclamped = stationary.first().copied();
    if r_unclamped.is_none() && signs[signs.len() - 1] > 0.0 {
        r_unclamped = extend_upward(link, n, r_max, tol, &mut iterations);
    }

    // candidates in increasing R so that ties go to the larger rate
    let mut candidates = vec![r_min];
    candidates.extend(stationary.iter().copied());
    candidates.push(r_max);
    let mut best = (r_min, f64::NEG_INFINITY);
    for &r in &candidates {
        let v = bound_objective(link, n, r);
        if v >= best.1 {
            best = (r, v);
        }
    }
    let r_star = best.0;
    finish(
        Scheme::ProposedBisect,
        params,
        link,
        spec,
        r_star,
        rate_bound(link, &RatePoint::new(r_star)?, n),
        r_star == r_min || r_star == r_max,
        r_unclamped,
        iterations,
    )
}

/// Locates the stationary point above `R_max` when the bound objective is
/// still increasing there. Only reported, never returned as `r_star`.
fn extend_upward(link: &DerivedLink, n: usize, r_max: f64, tol: f64, iterations: &mut usize) -> Option<f64> {
    let mut lo = r_max;
    let mut hi = r_max.max(1.0);
    for _ in 0..EXTENSION_CAP {
        hi *= 2.0;
        *iterations += 1;
        if slope(link, n, hi) <= 0.0 {
            while hi - lo > tol * hi.max(1.0) {
                let mid = 0.5 * (lo + hi);
                if slope(link, n, mid) > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                *iterations += 1;
            }
            return Some(0.5 * (lo + hi));
        }
        lo = hi;
    }
    None
}

/// Maximizer `W(Gamma) / ln 2` of `N R e^{-(2^R - 1)/Gamma}`, clamped to the
/// feasible interval.
pub fn solve_closed_form(params: &SystemParams, link: &DerivedLink, spec: &QuadratureSpec) -> Result<OptResult> {
    let (r, unclamped, clamped) = closed_form_rate(params, link)?;
    let obj = rate_approx(link, &RatePoint::new(r)?, params.n_ports);
    finish(Scheme::ProposedClosedForm, params, link, spec, r, obj, clamped, Some(unclamped), 0)
}

fn closed_form_rate(params: &SystemParams, link: &DerivedLink) -> Result<(f64, f64, bool)> {
    let (r_min, r_max) = rate_bounds(params)?;
    let unclamped = lambert_w0(link.gamma_cap)? / LN_2;
    let r = unclamped.clamp(r_min, r_max);
    Ok((r, unclamped, r != unclamped))
}

/// Exhaustive search of the exact average monitoring rate on `grid_points`
/// uniformly spaced rates, followed by one golden-section pass inside the
/// bracket around the best grid point.
pub fn solve_true_grid(
    params: &SystemParams,
    link: &DerivedLink,
    spec: &QuadratureSpec,
    grid_points: usize,
) -> Result<OptResult> {
    if grid_points < 1000 {
        return Err(Error::InvalidParam {
            name: "grid_points",
            value: grid_points as f64,
            reason: "need at least 1000 grid points",
        });
    }
    let n = params.n_ports;
    let (r_min, r_max) = rate_bounds(params)?;
    let step = (r_max - r_min) / (grid_points - 1) as f64;
    let rate_at = |i: usize| if i + 1 == grid_points { r_max } else { r_min + step * i as f64 };
    let eval = |r: f64| -> Result<f64> { rate_true(link, &RatePoint::new(r)?, n, spec) };

    let values: Vec<f64> = (0..grid_points)
        .into_par_iter()
        .map(|i| eval(rate_at(i)))
        .collect::<Result<_>>()?;
    let mut best_i = 0;
    for (i, &v) in values.iter().enumerate() {
        if v >= values[best_i] {
            best_i = i;
        }
    }
    let mut r_star = rate_at(best_i);
    let mut best = values[best_i];
    let mut iterations = grid_points;

    let lo = rate_at(best_i.saturating_sub(1));
    let hi = rate_at((best_i + 1).min(grid_points - 1));
    if hi > lo {
        let (r, v, it) = golden_max(&eval, lo, hi)?;
        iterations += it;
        if v > best {
            r_star = r;
            best = v;
        }
    }
    let clamped = r_star == r_min || r_star == r_max;
    finish(Scheme::TrueGrid, params, link, spec, r_star, best, clamped, None, iterations)
}

fn golden_max(f: &impl Fn(f64) -> Result<f64>, mut a: f64, mut b: f64) -> Result<(f64, f64, usize)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    let mut it = 0;
    while it < GOLDEN_ITERS && b - a > 1e-12 * b.abs().max(1.0) {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
        it += 1;
    }
    Ok(if fc > fd { (c, fc, it) } else { (d, fd, it) })
}

/// Evaluates one scheme at `params`.
pub fn evaluate_scheme(
    params: &SystemParams,
    link: &DerivedLink,
    scheme: Scheme,
    spec: &QuadratureSpec,
) -> Result<OptResult> {
    match scheme {
        Scheme::ProposedBisect => solve_bound_bisect(params, link, DEFAULT_BISECT_TOL, spec),
        Scheme::ProposedClosedForm => solve_closed_form(params, link, spec),
        Scheme::TrueGrid => solve_true_grid(params, link, spec, DEFAULT_GRID_POINTS),
        Scheme::ConstantJamming => {
            let (r_min, _) = rate_bounds(params)?;
            let rate = rate_true(link, &RatePoint::new(r_min)?, params.n_ports, spec)?;
            Ok(OptResult {
                scheme,
                r_star: r_min,
                pm_star: params.p_m_max,
                objective_value: rate,
                rate_true_at_rstar: rate,
                clamped: true,
                r_unclamped: None,
                iterations: 0,
            })
        }
        Scheme::Passive => {
            let (_, r_max) = rate_bounds(params)?;
            let rate = rate_true(link, &RatePoint::new(r_max)?, params.n_ports, spec)?;
            Ok(OptResult {
                scheme,
                r_star: r_max,
                pm_star: 0.0,
                objective_value: rate,
                rate_true_at_rstar: rate,
                clamped: true,
                r_unclamped: None,
                iterations: 0,
            })
        }
        Scheme::ConventionalSingle => {
            let (r, unclamped, clamped) = closed_form_rate(params, link)?;
            let rp = RatePoint::new(r)?;
            // one antenna: the approximate objective with N = 1 is exact
            let rate = rate_approx(link, &rp, 1);
            Ok(OptResult {
                scheme,
                r_star: r,
                pm_star: pm_for_rate_unchecked(params, rp.gamma_th),
                objective_value: rate,
                rate_true_at_rstar: rate,
                clamped,
                r_unclamped: Some(unclamped),
                iterations: 0,
            })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    scheme: Scheme,
    params: &SystemParams,
    link: &DerivedLink,
    spec: &QuadratureSpec,
    r_star: f64,
    objective_value: f64,
    clamped: bool,
    r_unclamped: Option<f64>,
    iterations: usize,
) -> Result<OptResult> {
    let rp = RatePoint::new(r_star)?;
    Ok(OptResult {
        scheme,
        r_star,
        pm_star: pm_for_rate_unchecked(params, rp.gamma_th),
        objective_value,
        rate_true_at_rstar: rate_true(link, &rp, params.n_ports, spec)?,
        clamped,
        r_unclamped,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{derive_link, linear_to_db};
    use crate::outage::sd_outage;

    fn reference() -> (SystemParams, DerivedLink) {
        let p = SystemParams::reference();
        (p, derive_link(&p).unwrap())
    }

    #[test]
    fn terms_at_zero() {
        let (_, l) = reference();
        let (f, h, g) = objective_terms(&l, 8, 0.0);
        assert_eq!(f, 0.0);
        assert!((h - 1.0 / LN_2).abs() < 1e-15);
        assert_eq!(g, 0.0);
    }

    #[test]
    fn slope_turns_negative_then_positive_again() {
        // g carries e^{-x/c}, so it loses to h ~ 1/x far out and F grows
        // like (1 - eta) log2(1 + x) without bound
        let (_, l) = reference();
        for &n in &[2, 8, 32] {
            let falls = (1..2000).any(|i| {
                let (_, h, g) = objective_terms(&l, n, 0.01 * i as f64 * l.gamma_cap);
                g > h
            });
            assert!(falls, "N = {n}");
            let (f, h, g) = objective_terms(&l, n, 1e3 * l.gamma_cap);
            assert!(h > g, "N = {n}");
            let floor = (1.0 - l.eta_for(n)) * (1e3 * l.gamma_cap).ln_1p() / LN_2;
            assert!(f >= floor * (1.0 - 1e-12));
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let (_, l) = reference();
        for &n in &[2, 5, 8, 16] {
            for i in 0..60 {
                let x = 0.05 + 0.25 * i as f64;
                let eps = 1e-6 * (1.0 + x);
                let (fp, _, _) = objective_terms(&l, n, x + eps);
                let (fm, _, _) = objective_terms(&l, n, x - eps);
                let (_, h, g) = objective_terms(&l, n, x);
                assert!(((fp - fm) / (2.0 * eps) - (h - g)).abs() < 1e-6, "N = {n}, x = {x}");
            }
        }
    }

    #[test]
    fn h_decreasing_on_grid() {
        let (_, l) = reference();
        for &n in &[2, 8, 16] {
            let mut last = f64::INFINITY;
            for i in 1..400 {
                let (_, h, _) = objective_terms(&l, n, 0.05 * i as f64);
                assert!(h < last);
                last = h;
            }
        }
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(Scheme::from_name(s.name()), Some(s));
        }
        assert_eq!(Scheme::from_name("nope"), None);
    }

    fn assert_constraint(p: &SystemParams, r: &OptResult) {
        let (r_min, r_max) = rate_bounds(p).unwrap();
        assert!(r.r_star >= r_min && r.r_star <= r_max);
        assert!(r.pm_star >= 0.0 && r.pm_star <= p.p_m_max);
        let (out, _) = sd_outage(p, &RatePoint::new(r.r_star).unwrap(), r.pm_star).unwrap();
        assert!((out - p.delta).abs() < 1e-8, "{:?}: outage {out}", r.scheme);
    }

    #[test]
    fn every_scheme_meets_the_constraint() {
        let (p, l) = reference();
        let spec = QuadratureSpec::default();
        for s in Scheme::ALL {
            let r = evaluate_scheme(&p, &l, s, &spec).unwrap();
            assert_eq!(r.scheme, s);
            assert_constraint(&p, &r);
        }
    }

    #[test]
    fn bisect_matches_bound_grid_argmax() {
        let (p, l) = reference();
        let spec = QuadratureSpec::default();
        let r = solve_bound_bisect(&p, &l, DEFAULT_BISECT_TOL, &spec).unwrap();
        let (r_min, r_max) = rate_bounds(&p).unwrap();
        let m = 10_000;
        let spacing = (r_max - r_min) / (m - 1) as f64;
        let (mut arg, mut best) = (r_min, f64::NEG_INFINITY);
        for i in 0..m {
            let rr = r_min + spacing * i as f64;
            let v = bound_objective(&l, 8, rr);
            if v >= best {
                best = v;
                arg = rr;
            }
        }
        assert!((r.r_star - arg).abs() <= DEFAULT_BISECT_TOL + spacing);
        assert!(r.objective_value >= best - 1e-12);
    }

    #[test]
    fn bisect_reduced_case_independent_ports() {
        let p = SystemParams::reference().with_n_ports(2);
        let l = DerivedLink::from_parts(0.0, 2, p.p_s * p.sigma_g2 / p.sigma_m2).unwrap();
        let r = solve_bound_bisect(&p, &l, DEFAULT_BISECT_TOL, &QuadratureSpec::default()).unwrap();
        let (r_min, r_max) = rate_bounds(&p).unwrap();
        let obj = |rr: f64| {
            let x = x_of(rr);
            x.ln_1p() / LN_2 * (1.0 - (-(-x / l.gamma_cap).exp_m1()).powi(2))
        };
        let m = 20_000;
        let spacing = (r_max - r_min) / (m - 1) as f64;
        let arg = (0..m)
            .map(|i| r_min + spacing * i as f64)
            .fold((r_min, f64::NEG_INFINITY), |acc, rr| if obj(rr) >= acc.1 { (rr, obj(rr)) } else { acc })
            .0;
        assert!((r.r_star - arg).abs() <= DEFAULT_BISECT_TOL + spacing);
    }

    #[test]
    fn bisect_clamps_when_objective_rises_past_r_max() {
        // huge monitor SNR: the stationary point lies far above R_max
        let p = SystemParams::reference().with_sigma_ratio_db(10.0);
        let l = derive_link(&p).unwrap();
        let r = solve_bound_bisect(&p, &l, DEFAULT_BISECT_TOL, &QuadratureSpec::default()).unwrap();
        let (_, r_max) = rate_bounds(&p).unwrap();
        assert_eq!(r.r_star, r_max);
        assert!(r.clamped);
        assert!(r.r_unclamped.unwrap() > r_max);
        assert_eq!(r.pm_star, 0.0);
    }

    #[test]
    fn bisect_rejects_bad_input() {
        let (p, l) = reference();
        let spec = QuadratureSpec::default();
        assert!(solve_bound_bisect(&p, &l, 0.0, &spec).is_err());
        assert!(solve_bound_bisect(&p.with_n_ports(1), &l, 1e-9, &spec).is_err());
    }

    #[test]
    fn closed_form_lambert_identity() {
        let gamma = 2.0 * LN_2;
        let mut p = SystemParams::reference();
        p.sigma_g2 = gamma / p.p_s;
        let l = derive_link(&p).unwrap();
        let r = solve_closed_form(&p, &l, &QuadratureSpec::default()).unwrap();
        assert!((r.r_unclamped.unwrap() - 1.0).abs() < 1e-14);
        assert!(!r.clamped);
        assert!((r.r_star - 1.0).abs() < 1e-14);
    }

    #[test]
    fn closed_form_is_stationary_and_matches_grid() {
        let (p, l) = reference();
        let r = solve_closed_form(&p, &l, &QuadratureSpec::default()).unwrap();
        let rr = r.r_unclamped.unwrap();
        let phi = |r: f64| r * (-x_of(r) / l.gamma_cap).exp();
        let d = 1e-6;
        assert!(((phi(rr + d) - phi(rr - d)) / (2.0 * d)).abs() < 1e-8);
        // R 2^R ln 2 = Gamma at the stationary point
        assert!((rr * 2f64.powf(rr) * LN_2 - l.gamma_cap).abs() < 1e-12);
        let m = 100_000;
        let arg = (0..m)
            .map(|i| 4.0 * i as f64 / m as f64)
            .fold((0.0, f64::NEG_INFINITY), |acc, x| if phi(x) >= acc.1 { (x, phi(x)) } else { acc })
            .0;
        assert!((arg - rr).abs() <= 4.0 / m as f64);
    }

    #[test]
    fn true_grid_dominates_its_grid() {
        let (p, l) = reference();
        let spec = QuadratureSpec::default();
        let r = solve_true_grid(&p, &l, &spec, 1000).unwrap();
        let (r_min, r_max) = rate_bounds(&p).unwrap();
        for i in 0..1000 {
            let rr = r_min + (r_max - r_min) * i as f64 / 999.0;
            let v = rate_true(&l, &RatePoint::new(rr).unwrap(), 8, &spec).unwrap();
            assert!(r.objective_value >= v);
        }
        assert!(solve_true_grid(&p, &l, &spec, 999).is_err());
    }

    #[test]
    fn reference_optima_in_db() {
        let (p, l) = reference();
        let spec = QuadratureSpec::default();
        let db = |s| linear_to_db(evaluate_scheme(&p, &l, s, &spec).unwrap().pm_star);
        assert!((db(Scheme::ProposedBisect) - 17.0).abs() <= 1.0);
        assert!((db(Scheme::ProposedClosedForm) - 24.0).abs() <= 1.0);
        assert!((db(Scheme::TrueGrid) - 19.0).abs() <= 1.0);
    }

    #[test]
    fn baselines() {
        let (p, l) = reference();
        let spec = QuadratureSpec::default();
        let (r_min, r_max) = rate_bounds(&p).unwrap();
        let c = evaluate_scheme(&p, &l, Scheme::ConstantJamming, &spec).unwrap();
        assert_eq!(c.pm_star, p.p_m_max);
        assert_eq!(c.r_star, r_min);
        let pa = evaluate_scheme(&p, &l, Scheme::Passive, &spec).unwrap();
        assert_eq!(pa.r_star, r_max);
        assert_eq!(pa.pm_star, 0.0);
        assert!((pa.r_star - 2.6157).abs() < 1e-4);
    }
}
