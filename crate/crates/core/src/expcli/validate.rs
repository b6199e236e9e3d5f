//! Oracle suite run by `fasmon validate`.

use std::f64::consts::{LN_2, PI};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{derive_link, DerivedLink, MixingWeight, SystemParams};
use crate::error::Result;
use crate::mcsim::{estimate_monitor_outage_with, estimate_sd_outage, StreamKey};
use crate::optimize::{objective_terms, solve_bound_bisect, DEFAULT_BISECT_TOL};
use crate::outage::{
    monitor_outage_approx, monitor_outage_bound, monitor_outage_true, pm_for_rate, rate_bounds, sd_outage,
    RatePoint,
};
use crate::specfun::{hyp1f2_half, lambert_w0, marcum_q1, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidationLevel {
    /// `10^5` Monte Carlo draws per estimate and 50 random parameter sets.
    Quick,
    /// `10^6` draws and 200 random parameter sets.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Informational checks are reported but do not fail the run.
    pub gating: bool,
    pub detail: String,
}

impl Check {
    pub fn status(&self) -> &'static str {
        match (self.passed, self.gating) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "WARN",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.first_failure().is_none()
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| c.gating && !c.passed)
    }

    fn push(&mut self, name: &'static str, passed: bool, detail: String) {
        self.checks.push(Check {
            name,
            passed,
            gating: true,
            detail,
        });
    }

    fn inform(&mut self, name: &'static str, passed: bool, detail: String) {
        self.checks.push(Check {
            name,
            passed,
            gating: false,
            detail,
        });
    }
}

/// Runs every check. `mixing` selects the port model the Monte Carlo side
/// simulates; anything but the variance-preserving weight should make the
/// Monte Carlo checks fail.
pub fn validate(seed: u64, level: ValidationLevel, mixing: MixingWeight) -> Result<ValidationReport> {
    let (draws, random_sets) = match level {
        ValidationLevel::Quick => (100_000, 50),
        ValidationLevel::Full => (1_000_000, 200),
    };
    let spec = QuadratureSpec::default();
    let params = SystemParams::reference();
    let link = derive_link(&params)?;
    let mut report = ValidationReport::default();

    special_functions(&mut report)?;
    bound_orderings(&mut report, seed, random_sets, &spec)?;
    constraint_residuals(&mut report, &params)?;
    bisection_on_sweeps(&mut report, &spec)?;
    monte_carlo(&mut report, &params, &link, seed, draws, mixing, &spec)?;
    Ok(report)
}

fn special_functions(report: &mut ValidationReport) -> Result<()> {
    let mut worst: f64 = 0.0;
    for &a in &[0.0, 0.5, 3.0, 20.0] {
        worst = worst.max((marcum_q1(a, 0.0)? - 1.0).abs());
    }
    for &b in &[0.1, 1.0, 4.0] {
        worst = worst.max((marcum_q1(0.0, b)? - (-0.5 * b * b).exp()).abs());
    }
    report.push("marcum_q1 boundary identities", worst <= 1e-15, format!("max error {worst:.2e}"));

    let mut worst: f64 = 0.0;
    for i in 0..=120 {
        let x = 10f64.powf(-6.0 + 0.1 * i as f64);
        let w = lambert_w0(x)?;
        worst = worst.max((w * w.exp() - x).abs() / x.max(1.0));
    }
    report.push("lambert_w0 residuals", worst <= 1e-12, format!("max scaled residual {worst:.2e}"));

    let mut worst: f64 = 0.0;
    for &w in &[0.05, 0.1, 0.25, 0.5] {
        // 1F2(1/2; 1, 3/2; -z) = sum_k (-z)^k / ((2k + 1) k!^2)
        let z = PI * PI * w * w;
        let (mut term, mut sum, mut k) = (1.0f64, 1.0f64, 0.0f64);
        while term.abs() > 1e-18 {
            term *= -z / ((k + 1.0) * (k + 1.0));
            k += 1.0;
            sum += term / (2.0 * k + 1.0);
        }
        worst = worst.max((hyp1f2_half(w)? - sum).abs());
    }
    report.push("1F2 integral vs series, small W", worst <= 1e-9, format!("max error {worst:.2e}"));
    Ok(())
}

fn bound_orderings(report: &mut ValidationReport, seed: u64, sets: usize, spec: &QuadratureSpec) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_bound, mut worst_approx) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for _ in 0..sets {
        let n = rng.random_range(1..=32usize);
        let mu = rng.random_range(0.0..0.99);
        let gamma = 10f64.powf(rng.random_range(-1.0..2.0));
        let link = DerivedLink::from_parts(mu, n, gamma)?;
        let rp = RatePoint::new(rng.random_range(0.0..8.0))?;
        let t = monitor_outage_true(&link, &rp, n, spec)?;
        worst_bound = worst_bound.max(monitor_outage_bound(&link, &rp, n) - t);
        worst_approx = worst_approx.max(monitor_outage_approx(&link, &rp, n) - t);
    }
    report.push(
        "outage bound <= exact",
        worst_bound <= 1e-9,
        format!("{sets} sets, max excess {worst_bound:.2e}"),
    );
    report.push(
        "outage approximation <= exact",
        worst_approx <= 1e-9,
        format!("{sets} sets, max excess {worst_approx:.2e}"),
    );
    Ok(())
}

fn constraint_residuals(report: &mut ValidationReport, params: &SystemParams) -> Result<()> {
    let (r_min, r_max) = rate_bounds(params)?;
    let mut worst: f64 = 0.0;
    for i in 0..=100 {
        let rp = RatePoint::new(r_min + (r_max - r_min) * i as f64 / 100.0)?;
        let pm = pm_for_rate(params, &rp)?;
        worst = worst.max((sd_outage(params, &rp, pm)?.0 - params.delta).abs());
    }
    report.push("outage constraint round trip", worst <= 1e-10, format!("max residual {worst:.2e}"));
    let at_min = (sd_outage(params, &RatePoint::new(r_min)?, params.p_m_max)?.0 - params.delta).abs();
    let at_max = (sd_outage(params, &RatePoint::new(r_max)?, 0.0)?.0 - params.delta).abs();
    report.push(
        "feasible interval endpoints",
        at_min <= 1e-9 && at_max <= 1e-9,
        format!("residuals {at_min:.2e} at R_min, {at_max:.2e} at R_max"),
    );
    Ok(())
}

/// On the operating points of the ratio and port sweeps: sign pattern of
/// `h - g` inside the feasible interval, and bisection against a dense grid.
///
/// The sign pattern is informational. The bound objective behaves like
/// `(1 - eta) log2(1 + x)` for large `x`, so `h - g` turns positive again
/// and a second local maximum can sit at `R_max` (the -20 dB point does
/// this); the solver scans for that case, and the gating check is that it
/// finds the grid argmax.
fn bisection_on_sweeps(report: &mut ValidationReport, spec: &QuadratureSpec) -> Result<()> {
    let mut cases: Vec<SystemParams> = (0..=10)
        .map(|i| SystemParams::reference().with_sigma_ratio_db(-20.0 + 2.0 * i as f64))
        .collect();
    cases.extend((2..=16).map(|n| SystemParams::reference().with_n_ports(n)));

    let (mut shape_bad, mut worst_gap) = (Vec::new(), 0.0f64);
    for p in &cases {
        let link = derive_link(p)?;
        let (r_min, r_max) = rate_bounds(p)?;
        let m = 10_000;
        let spacing = (r_max - r_min) / (m - 1) as f64;
        let mut falls = 0;
        let mut rises = 0;
        let mut last = None;
        let mut best = (r_min, f64::NEG_INFINITY);
        for i in 0..m {
            let r = r_min + spacing * i as f64;
            let (f, h, g) = objective_terms(&link, p.n_ports, (r * LN_2).exp_m1());
            let positive = h - g > 0.0;
            match last {
                Some(true) if !positive => falls += 1,
                Some(false) if positive => rises += 1,
                _ => {}
            }
            last = Some(positive);
            if f >= best.1 {
                best = (r, f);
            }
        }
        if falls > 1 || rises > 0 {
            shape_bad.push(format!("ratio {:.0} dB N {}", 10.0 * p.sigma_g2.log10(), p.n_ports));
        }
        let res = solve_bound_bisect(p, &link, DEFAULT_BISECT_TOL, spec)?;
        worst_gap = worst_gap.max((res.r_star - best.0).abs() - (DEFAULT_BISECT_TOL + spacing));
    }
    report.inform(
        "single stationary point on sweep operating points",
        shape_bad.is_empty(),
        format!("{} of {} parameter sets violate: {}", shape_bad.len(), cases.len(), shape_bad.join(", ")),
    );
    report.push(
        "bisection matches grid argmax",
        worst_gap <= 0.0,
        format!("max excess over tolerance {:.2e} bits", worst_gap.max(0.0)),
    );
    Ok(())
}

fn monte_carlo(
    report: &mut ValidationReport,
    params: &SystemParams,
    link: &DerivedLink,
    seed: u64,
    draws: u64,
    mixing: MixingWeight,
    spec: &QuadratureSpec,
) -> Result<()> {
    let key = StreamKey::new(seed).with_row(100, 0);
    let mut worst: f64 = 0.0;
    for (i, &g) in [0.5, 1.0, 2.0, 4.0].iter().enumerate() {
        let rp = RatePoint::from_threshold(g)?;
        let est = estimate_monitor_outage_with(params, link, &rp, draws, key.with_row(100, i as u64), mixing)?;
        let exact = monitor_outage_true(link, &rp, params.n_ports, spec)?;
        let band = (3.0 * est.sigma()).max(1e-4);
        worst = worst.max((est.mean - exact).abs() / band);
    }
    report.push(
        "monitor outage: simulation vs quadrature (N = 8)",
        worst <= 1.0,
        format!("max deviation {worst:.2} x max(3 sigma, 1e-4)"),
    );

    let single = params.with_n_ports(1);
    let mut worst: f64 = 0.0;
    for (i, &g) in [0.5, 2.0].iter().enumerate() {
        let rp = RatePoint::from_threshold(g)?;
        let est = estimate_monitor_outage_with(&single, link, &rp, draws, key.with_row(101, i as u64), mixing)?;
        let exact = monitor_outage_true(link, &rp, 1, spec)?;
        worst = worst.max((est.mean - exact).abs() / (3.0 * est.sigma()));
    }
    report.push(
        "monitor outage: simulation vs quadrature (N = 1)",
        worst <= 1.0,
        format!("max deviation {worst:.2} x 3 sigma"),
    );

    let (r_min, r_max) = rate_bounds(params)?;
    let rp = RatePoint::new(0.5 * (r_min + r_max))?;
    let pm = pm_for_rate(params, &rp)?;
    let est = estimate_sd_outage(params, &rp, pm, draws, key.with_row(102, 0))?;
    let dev = (est.mean - params.delta).abs() / (3.0 * est.sigma());
    report.push(
        "destination outage at constraint power",
        dev <= 1.0,
        format!("deviation {dev:.2} x 3 sigma"),
    );
    Ok(())
}
