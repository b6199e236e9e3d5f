//! Outage probabilities at the suspicious destination and at the monitor,
//! the three average-monitoring-rate objectives, and the mapping between
//! the suspicious rate `R` and the jamming power that holds the destination
//! at its target outage `delta`.

use std::f64::consts::LN_2;

use crate::channel::{DerivedLink, SystemParams};
use crate::error::{Error, Result};
use crate::specfun::{integrate_expweighted, integrate_finite, lambert_w0_of_exp, q1_pair, QuadratureSpec};

/// Relative slack when checking that a rate lies in `[R_min, R_max]`.
const RATE_SLACK: f64 = 1e-12;

/// Largest `2 mu^2 / (1 - mu^2)` (that is `mu^2 <= 1/2`) for which the
/// monitor outage integrand is smooth enough for Gauss-Laguerre.
const GL_MAX_SHIFT: f64 = 2.0;

/// `e^{-t}` is below `2e-22` past this point.
const EXP_TAIL_CUTOFF: f64 = 50.0;

/// A suspicious-link rate and its SNR threshold `2^R - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub rate_r: f64,
    pub gamma_th: f64,
}

impl RatePoint {
    pub fn new(rate_r: f64) -> Result<Self> {
        if !(rate_r.is_finite() && rate_r >= 0.0) {
            return Err(Error::InvalidParam {
                name: "rate_r",
                value: rate_r,
                reason: "rate must be finite and >= 0",
            });
        }
        Ok(RatePoint {
            rate_r,
            gamma_th: (rate_r * LN_2).exp_m1(),
        })
    }

    pub fn from_threshold(gamma_th: f64) -> Result<Self> {
        if !(gamma_th.is_finite() && gamma_th >= 0.0) {
            return Err(Error::InvalidParam {
                name: "gamma_th",
                value: gamma_th,
                reason: "threshold must be finite and >= 0",
            });
        }
        Ok(RatePoint {
            rate_r: gamma_th.ln_1p() / LN_2,
            gamma_th,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SdOutageBreakdown {
    /// `1 / (sigma_h^2 p_s)`.
    pub lambda1: f64,
    /// `1 / (sigma_f^2 gamma_th p_m)`; `None` when jamming or threshold is zero.
    pub lambda2: Option<f64>,
    pub success_prob: f64,
}

/// Outage at the suspicious destination under jamming power `p_m`:
/// `1 - e^{-gamma_th sigma_d^2 / (p_s sigma_h^2)} / (1 + gamma_th p_m sigma_f^2 / (p_s sigma_h^2))`.
pub fn sd_outage(params: &SystemParams, rp: &RatePoint, p_m: f64) -> Result<(f64, SdOutageBreakdown)> {
    params.validate()?;
    if !(p_m.is_finite() && p_m >= 0.0) {
        return Err(Error::InvalidParam {
            name: "p_m",
            value: p_m,
            reason: "jamming power must be finite and >= 0",
        });
    }
    let g = rp.gamma_th;
    let noise = g * params.sigma_d2 / (params.p_s * params.sigma_h2);
    let jam = g * p_m * params.sigma_f2 / (params.p_s * params.sigma_h2);
    let outage = ((jam - (-noise).exp_m1()) / (1.0 + jam)).clamp(0.0, 1.0);
    let lambda2 = if g > 0.0 && p_m > 0.0 {
        Some(1.0 / (params.sigma_f2 * g * p_m))
    } else {
        None
    };
    Ok((
        outage,
        SdOutageBreakdown {
            lambda1: 1.0 / (params.sigma_h2 * params.p_s),
            lambda2,
            success_prob: 1.0 - outage,
        },
    ))
}

/// Feasible rate interval `(R_min, R_max)` of the constraint `P_d^out = delta`
/// as the jamming power ranges over `[0, p_m_max]`.
///
/// `R_max` is the unjammed rate. `R_min` comes from the Lambert-W solution
/// `s = W(z e^z / (1 - delta))`, `z = sigma_d^2 / (p_m_max sigma_f^2)`, with
/// `gamma_min = (p_s sigma_h^2 / sigma_d^2)(s - z)`. The difference `s - z`
/// is polished by Newton on `d + ln(1 + d/z) = -ln(1 - delta)`, which avoids
/// the cancellation when `z` is large.
pub fn rate_bounds(params: &SystemParams) -> Result<(f64, f64)> {
    params.validate()?;
    let snr0 = params.p_s * params.sigma_h2 / params.sigma_d2;
    let neg_log_keep = -(-params.delta).ln_1p(); // -ln(1 - delta)
    let r_max = (snr0 * neg_log_keep).ln_1p() / LN_2;

    let z = params.sigma_d2 / (params.p_m_max * params.sigma_f2);
    let s = lambert_w0_of_exp(z.ln() + z + neg_log_keep)?;
    let mut d = (s - z).clamp(0.0, neg_log_keep);
    for _ in 0..4 {
        let phi = d + (d / z).ln_1p() - neg_log_keep;
        d -= phi / (1.0 + 1.0 / (z + d));
    }
    let r_min = (snr0 * d).ln_1p() / LN_2;
    if r_min.is_nan() || r_min <= 0.0 || r_min > r_max * (1.0 + RATE_SLACK) {
        return Err(Error::Computation {
            context: "rate_bounds",
            detail: format!("R_min = {r_min} not in (0, R_max = {r_max}]"),
        });
    }
    Ok((r_min.min(r_max), r_max))
}

/// Jamming power that puts the destination exactly at outage `delta` when
/// the source uses rate `rp`.
pub fn pm_for_rate(params: &SystemParams, rp: &RatePoint) -> Result<f64> {
    if rp.rate_r == 0.0 {
        return Err(Error::DegenerateRate);
    }
    let (r_min, r_max) = rate_bounds(params)?;
    if rp.rate_r < r_min * (1.0 - RATE_SLACK) || rp.rate_r > r_max * (1.0 + RATE_SLACK) {
        return Err(Error::Infeasible {
            rate: rp.rate_r,
            r_min,
            r_max,
        });
    }
    Ok(pm_for_rate_unchecked(params, rp.gamma_th))
}

/// Closed-form inversion without the feasibility check, clamped to
/// `[0, p_m_max]`.
pub(crate) fn pm_for_rate_unchecked(params: &SystemParams, gamma_th: f64) -> f64 {
    let noise = gamma_th * params.sigma_d2 / (params.p_s * params.sigma_h2);
    let ratio_m1 = (-noise - (-params.delta).ln_1p()).exp_m1(); // e^{-noise}/(1-delta) - 1
    let pm = params.p_s * params.sigma_h2 / (gamma_th * params.sigma_f2) * ratio_m1;
    pm.clamp(0.0, params.p_m_max)
}

/// Suspicious rate that meets `P_d^out = delta` under a fixed jamming power,
/// by bisection on the (increasing) outage in `R`.
pub fn rate_for_pm(params: &SystemParams, p_m: f64) -> Result<f64> {
    let (r_min, r_max) = rate_bounds(params)?;
    if p_m <= 0.0 {
        return Ok(r_max);
    }
    if p_m >= params.p_m_max {
        return Ok(r_min);
    }
    let (mut lo, mut hi) = (0.0, r_max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (p, _) = sd_outage(params, &RatePoint::new(mid)?, p_m)?;
        if p < params.delta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Monitor outage with best-port selection:
/// `integral_0^inf e^{-t} [1 - Q1(sqrt(2 mu^2/(1-mu^2)) sqrt(t), sqrt(2/(1-mu^2)) sqrt(gamma_th/Gamma))]^N dt`.
pub fn monitor_outage_true(
    link: &DerivedLink,
    rp: &RatePoint,
    n_ports: usize,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if rp.gamma_th == 0.0 {
        return Ok(0.0);
    }
    let one_minus_mu2 = 1.0 - link.mu * link.mu;
    let a_coeff = (2.0 * link.mu * link.mu / one_minus_mu2).sqrt();
    let b = (2.0 / one_minus_mu2).sqrt() * (rp.gamma_th / link.gamma_cap).sqrt();
    let n = n_ports as i32;
    let integrand = |t: f64| q1_pair(a_coeff * t.sqrt(), b).1.powi(n);
    let value = if a_coeff * a_coeff <= GL_MAX_SHIFT {
        integrate_expweighted(integrand, spec)?.value
    } else {
        integrate_split(integrand, (b / a_coeff).powi(2), spec)?
    };
    Ok(value.clamp(0.0, 1.0))
}

/// `integral_0^inf e^{-t} f(t) dt` by adaptive Kronrod on panels that double
/// in width, starting well below `t_step`, where `f` is expected to drop.
fn integrate_split(f: impl Fn(f64) -> f64, t_step: f64, spec: &QuadratureSpec) -> Result<f64> {
    let tol = spec.abs_tol.min(spec.rel_tol) * 0.1;
    let mut lo = 0.0;
    let mut hi = (t_step.min(1.0) / 64.0).max(1e-12);
    let mut total = 0.0;
    while lo < EXP_TAIL_CUTOFF {
        let top = hi.min(EXP_TAIL_CUTOFF);
        total += integrate_finite(|t| (-t).exp() * f(t), lo, top, tol)?;
        lo = top;
        hi = 2.0 * top;
    }
    Ok(total)
}

/// Lower bound `eta [1 - e^{-gamma_th / (Gamma (1 - mu^2))}]^N` on the monitor
/// outage, from dropping the Bessel factor of the conditional port density.
pub fn monitor_outage_bound(link: &DerivedLink, rp: &RatePoint, n_ports: usize) -> f64 {
    let per_port = -(-rp.gamma_th / link.conditional_scale()).exp_m1();
    link.eta_for(n_ports) * per_port.powi(n_ports as i32)
}

/// `1 - N e^{-gamma_th / Gamma}`. Not clamped: it is negative whenever
/// `N e^{-gamma_th/Gamma} > 1`; reporting code clamps.
pub fn monitor_outage_approx(link: &DerivedLink, rp: &RatePoint, n_ports: usize) -> f64 {
    1.0 - n_ports as f64 * (-rp.gamma_th / link.gamma_cap).exp()
}

/// Average monitoring rate `R (1 - P_m^out)`.
pub fn rate_true(link: &DerivedLink, rp: &RatePoint, n_ports: usize, spec: &QuadratureSpec) -> Result<f64> {
    Ok(rp.rate_r * (1.0 - monitor_outage_true(link, rp, n_ports, spec)?))
}

/// Upper bound on the average monitoring rate, from [`monitor_outage_bound`].
pub fn rate_bound(link: &DerivedLink, rp: &RatePoint, n_ports: usize) -> f64 {
    rp.rate_r * (1.0 - monitor_outage_bound(link, rp, n_ports))
}

/// `N R e^{-gamma_th / Gamma}`.
pub fn rate_approx(link: &DerivedLink, rp: &RatePoint, n_ports: usize) -> f64 {
    n_ports as f64 * rp.rate_r * (-rp.gamma_th / link.gamma_cap).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::derive_link;

    fn reference() -> (SystemParams, DerivedLink) {
        let p = SystemParams::reference();
        let l = derive_link(&p).unwrap();
        (p, l)
    }

    #[test]
    fn rate_point_threshold() {
        let rp = RatePoint::new(3.0).unwrap();
        assert!((rp.gamma_th - 7.0).abs() < 7e-12);
        let back = RatePoint::from_threshold(7.0).unwrap();
        assert!((back.rate_r - 3.0).abs() < 1e-14);
        assert!(RatePoint::new(-1.0).is_err());
    }

    #[test]
    fn sd_outage_trivial_cases() {
        let (p, _) = reference();
        let zero = RatePoint::new(0.0).unwrap();
        assert_eq!(sd_outage(&p, &zero, 0.0).unwrap().0, 0.0);
        assert_eq!(sd_outage(&p, &zero, 50.0).unwrap().0, 0.0);
        let rp = RatePoint::new(1.5).unwrap();
        let (out, parts) = sd_outage(&p, &rp, 0.0).unwrap();
        let want = 1.0 - (-rp.gamma_th * p.sigma_d2 / (p.p_s * p.sigma_h2)).exp();
        assert!((out - want).abs() < 1e-15);
        assert_eq!(parts.lambda2, None);
        assert!((parts.success_prob + out - 1.0).abs() < 1e-15);
        let (_, parts) = sd_outage(&p, &rp, 10.0).unwrap();
        assert!(parts.lambda1 > 0.0 && parts.lambda2.unwrap() > 0.0);
    }

    #[test]
    fn sd_outage_matches_lambda_form_under_unit_normalization() {
        // 1 - lambda2/(lambda1+lambda2) e^{-lambda1 sigma_h^2 gamma}, sigma_h^2 = sigma_d^2 = 1
        let (p, _) = reference();
        let rp = RatePoint::new(1.2).unwrap();
        let pm = 37.0;
        let (out, parts) = sd_outage(&p, &rp, pm).unwrap();
        let (l1, l2) = (parts.lambda1, parts.lambda2.unwrap());
        let want = 1.0 - l2 / (l1 + l2) * (-l1 * rp.gamma_th).exp();
        assert!((out - want).abs() < 1e-14);
    }

    #[test]
    fn r_max_reference_value() {
        let (p, _) = reference();
        let (_, r_max) = rate_bounds(&p).unwrap();
        let direct = (1.0 - 100.0 * 0.95f64.ln()).log2();
        assert!((r_max - direct).abs() < 1e-12);
        assert!((r_max - 2.6157).abs() < 1e-4);
        // cross-check: root of P_d^out(R, p_m = 0) = delta by bisection
        let (mut lo, mut hi) = (0.0, 10.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sd_outage(&p, &RatePoint::new(mid).unwrap(), 0.0).unwrap().0 < p.delta {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((r_max - lo).abs() < 1e-10);
    }

    #[test]
    fn r_min_meets_constraint_at_full_power() {
        let (p, _) = reference();
        let (r_min, r_max) = rate_bounds(&p).unwrap();
        assert!(0.0 < r_min && r_min < r_max);
        let (out, _) = sd_outage(&p, &RatePoint::new(r_min).unwrap(), p.p_m_max).unwrap();
        assert!((out - p.delta).abs() < 1e-9);
    }

    #[test]
    fn interval_collapses_without_jamming_budget() {
        let (p, _) = reference();
        let (_, r_max) = rate_bounds(&p).unwrap();
        let mut last_gap = f64::INFINITY;
        for &pm in &[1.0, 1e-2, 1e-4, 1e-8] {
            let (r_min, _) = rate_bounds(&p.with_p_m_max(pm)).unwrap();
            let gap = r_max - r_min;
            assert!(gap >= 0.0 && gap < last_gap);
            last_gap = gap;
        }
        assert!(last_gap < 1e-6);
    }

    #[test]
    fn pm_for_rate_endpoints_and_residual() {
        let (p, _) = reference();
        let (r_min, r_max) = rate_bounds(&p).unwrap();
        assert_eq!(pm_for_rate(&p, &RatePoint::new(r_max).unwrap()).unwrap(), 0.0);
        let pm = pm_for_rate(&p, &RatePoint::new(r_min).unwrap()).unwrap();
        assert!(((pm - p.p_m_max) / p.p_m_max).abs() < 1e-8);
        for i in 0..=50 {
            let r = r_min + (r_max - r_min) * i as f64 / 50.0;
            let rp = RatePoint::new(r).unwrap();
            let pm = pm_for_rate(&p, &rp).unwrap();
            let (out, _) = sd_outage(&p, &rp, pm).unwrap();
            assert!((out - p.delta).abs() < 1e-10, "R = {r}");
        }
    }

    #[test]
    fn pm_for_rate_errors() {
        let (p, _) = reference();
        assert_eq!(pm_for_rate(&p, &RatePoint::new(0.0).unwrap()), Err(Error::DegenerateRate));
        assert!(matches!(
            pm_for_rate(&p, &RatePoint::new(3.0).unwrap()),
            Err(Error::Infeasible { .. })
        ));
        assert!(matches!(
            pm_for_rate(&p, &RatePoint::new(0.01).unwrap()),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn rate_for_pm_inverts_pm_for_rate() {
        let (p, _) = reference();
        for &pm in &[0.0, 3.0, 50.0, 400.0, 1000.0] {
            let r = rate_for_pm(&p, pm).unwrap();
            let (out, _) = sd_outage(&p, &RatePoint::new(r).unwrap(), pm).unwrap();
            assert!((out - p.delta).abs() < 1e-9, "p_m = {pm}");
        }
    }

    #[test]
    fn monitor_outage_trivial_cases() {
        let (_, l) = reference();
        let spec = QuadratureSpec::default();
        let zero = RatePoint::new(0.0).unwrap();
        assert_eq!(monitor_outage_true(&l, &zero, 8, &spec).unwrap(), 0.0);
        assert_eq!(monitor_outage_bound(&l, &zero, 8), 0.0);
        assert_eq!(monitor_outage_approx(&l, &zero, 1), 0.0);
        assert_eq!(monitor_outage_approx(&l, &zero, 8), -7.0);
        for &g in &[0.1, 1.0, 3.0, 10.0] {
            let rp = RatePoint::from_threshold(g).unwrap();
            let p1 = monitor_outage_true(&l, &rp, 1, &spec).unwrap();
            assert!((p1 - (1.0 - (-g / l.gamma_cap).exp())).abs() < 1e-8);
        }
    }

    #[test]
    fn strong_correlation_falls_back_to_adaptive_rule() {
        let spec = QuadratureSpec::default();
        for &(mu, n) in &[(0.95, 4usize), (0.985, 16), (0.99, 32)] {
            let l = DerivedLink::from_parts(mu, n, 3.0).unwrap();
            for &g in &[0.3, 3.0, 30.0] {
                let rp = RatePoint::from_threshold(g).unwrap();
                let t = monitor_outage_true(&l, &rp, n, &spec).unwrap();
                // Simpson on [0, 50] as an independent check
                let m = 400_000;
                let h = EXP_TAIL_CUTOFF / m as f64;
                let a = (2.0 * mu * mu / (1.0 - mu * mu)).sqrt();
                let b = (2.0 / (1.0 - mu * mu) * g / 3.0).sqrt();
                let f = |t: f64| (-t).exp() * (1.0 - crate::specfun::marcum_q1(a * t.sqrt(), b).unwrap()).powi(n as i32);
                let mut s = f(0.0) + f(EXP_TAIL_CUTOFF);
                for i in 1..m {
                    s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
                }
                let want = s * h / 3.0;
                assert!((t - want).abs() < 1e-8, "mu = {mu}, N = {n}, g = {g}: {t} vs {want}");
                assert!(monitor_outage_bound(&l, &rp, n) <= t + 1e-9);
            }
        }
    }

    #[test]
    fn laguerre_regime_agrees_with_split_rule() {
        let spec = QuadratureSpec::default();
        for &mu in &[0.0, 0.3, 0.5, 0.707] {
            for &n in &[1usize, 2, 8, 32] {
                for &gamma in &[0.1, 1.0, 10.0, 100.0] {
                    let l = DerivedLink::from_parts(mu, n, gamma).unwrap();
                    let a = (2.0 * mu * mu / (1.0 - mu * mu)).sqrt();
                    for i in 0..=12 {
                        let g = 10f64.powf(-3.0 + 0.5 * i as f64);
                        let rp = RatePoint::from_threshold(g).unwrap();
                        let got = monitor_outage_true(&l, &rp, n, &spec).unwrap();
                        let b = (2.0 / (1.0 - mu * mu) * g / gamma).sqrt();
                        let t_step = if a > 0.0 { (b / a).powi(2) } else { 1.0 };
                        let want = integrate_split(|t| q1_pair(a * t.sqrt(), b).1.powi(n as i32), t_step, &spec).unwrap();
                        assert!(
                            (got - want).abs() <= 1e-9 + 1e-7 * want,
                            "mu {mu} N {n} Gamma {gamma} g {g}: {got} vs {want}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn bound_reduces_to_iid_case() {
        let l = DerivedLink::from_parts(0.0, 4, 2.0).unwrap();
        let rp = RatePoint::from_threshold(1.3).unwrap();
        let want = (1.0 - (-1.3f64 / 2.0).exp()).powi(4);
        assert!((monitor_outage_bound(&l, &rp, 4) - want).abs() < 1e-15);
        // with mu = 0 the bound is exact
        let t = monitor_outage_true(&l, &rp, 4, &QuadratureSpec::default()).unwrap();
        assert!((t - want).abs() < 1e-12);
    }

    #[test]
    fn rates_at_zero_rate() {
        let (_, l) = reference();
        let zero = RatePoint::new(0.0).unwrap();
        assert_eq!(rate_true(&l, &zero, 8, &QuadratureSpec::default()).unwrap(), 0.0);
        assert_eq!(rate_bound(&l, &zero, 8), 0.0);
        assert_eq!(rate_approx(&l, &zero, 8), 0.0);
    }

    #[test]
    fn orderings_on_reference_grid() {
        let (_, l) = reference();
        let spec = QuadratureSpec::default();
        for i in 1..=40 {
            let rp = RatePoint::new(0.1 * i as f64).unwrap();
            for &n in &[2, 4, 8, 16] {
                let t = monitor_outage_true(&l, &rp, n, &spec).unwrap();
                assert!(monitor_outage_bound(&l, &rp, n) <= t + 1e-9);
                assert!(monitor_outage_approx(&l, &rp, n) <= t + 1e-9);
                let rt = rate_true(&l, &rp, n, &spec).unwrap();
                assert!(rate_bound(&l, &rp, n) >= rt - 1e-9);
                assert!(rate_approx(&l, &rp, n) >= rt - 1e-9);
            }
        }
    }

    #[test]
    fn true_outage_monotone_in_threshold_and_snr_scale() {
        let (_, l) = reference();
        let spec = QuadratureSpec::default();
        let mut last = 0.0;
        for i in 0..=60 {
            let rp = RatePoint::from_threshold(0.1 * i as f64).unwrap();
            let v = monitor_outage_true(&l, &rp, 8, &spec).unwrap();
            assert!(v >= last - 1e-12);
            last = v;
        }
        let rp = RatePoint::from_threshold(2.0).unwrap();
        let mut last = 1.0;
        for i in 1..=30 {
            let li = DerivedLink::from_parts(l.mu, 8, 0.2 * i as f64).unwrap();
            let v = monitor_outage_true(&li, &rp, 8, &spec).unwrap();
            assert!(v <= last + 1e-12);
            last = v;
        }
    }

    #[test]
    fn sd_outage_monotone_in_power_and_rate() {
        let (p, _) = reference();
        for i in 1..30 {
            let rp = RatePoint::new(0.1 * i as f64).unwrap();
            let mut last = 0.0;
            for j in 0..50 {
                let (o, _) = sd_outage(&p, &rp, 20.0 * j as f64).unwrap();
                assert!(o >= last);
                last = o;
            }
        }
        let mut last = 0.0;
        for i in 0..60 {
            let (o, _) = sd_outage(&p, &RatePoint::new(0.05 * i as f64).unwrap(), 100.0).unwrap();
            assert!(o >= last);
            last = o;
        }
    }
}
