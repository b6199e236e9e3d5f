//! Experiment runner: configuration, parameter sweeps, CSV and SVG output,
//! and the validation suite behind `fasmon validate`.

mod config;
mod report;
mod validate;

use rayon::prelude::*;

use crate::channel::{db_to_linear, derive_link, linear_to_db, SystemParams};
use crate::error::{Error, Result};
use crate::mcsim::{estimate_monitoring_rate, StreamKey};
use crate::optimize::{evaluate_scheme, Scheme};
use crate::outage::{rate_approx, rate_bound, rate_for_pm, rate_true, RatePoint};

pub use config::{parse_config, parse_config_str, Experiment, ExperimentSpec, SweepVariable};
pub use report::{emit_csv, emit_svg, format_number, parse_csv, write_csv, CSV_HEADER};
pub use validate::{validate, Check, ValidationLevel, ValidationReport};

/// Curve labels used in place of a scheme name by the jamming-power sweep.
pub const CURVE_TRUE: &str = "rate_true";
pub const CURVE_BOUND: &str = "rate_bound";
pub const CURVE_APPROX: &str = "rate_approx";

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub scheme: String,
    pub x_name: String,
    pub x_value: f64,
    pub r_star_bits: f64,
    /// `-inf` when no jamming power is used.
    pub pm_star_db: f64,
    pub rate_analytic: f64,
    pub rate_mc_mean: Option<f64>,
    pub rate_mc_ci95: Option<f64>,
    pub clamped: bool,
}

/// A sweep point whose evaluation failed.
#[derive(Debug, Clone, PartialEq)]
pub struct RowFailure {
    pub scheme: String,
    pub x_value: f64,
    pub error: Error,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub failures: Vec<RowFailure>,
}

/// Parameters at one sweep point.
fn params_at(spec: &ExperimentSpec, x: f64) -> SystemParams {
    let p = spec.params;
    match spec.sweep_variable {
        SweepVariable::PmDb => p,
        SweepVariable::RatioDb => {
            let s = p.sigma_h2 * db_to_linear(x);
            SystemParams {
                sigma_g2: s,
                sigma_f2: s,
                ..p
            }
        }
        SweepVariable::NPorts => p.with_n_ports(x as usize),
    }
}

/// Runs every sweep point, in parallel, and returns rows in sweep order with
/// schemes (or curves) in declared order. A failing point is reported in
/// `failures` and leaves no row.
pub fn run_experiment(spec: &ExperimentSpec) -> RunOutput {
    let labels: Vec<String> = match spec.sweep_variable {
        SweepVariable::PmDb => vec![CURVE_TRUE.into(), CURVE_BOUND.into(), CURVE_APPROX.into()],
        _ => spec.schemes.iter().map(|s| s.name().to_string()).collect(),
    };
    let per_point: Vec<Vec<std::result::Result<ResultRow, RowFailure>>> = spec
        .sweep_values
        .par_iter()
        .enumerate()
        .map(|(i, &x)| {
            let fail = |label: &str, error: Error| RowFailure {
                scheme: label.to_string(),
                x_value: x,
                error,
            };
            match spec.sweep_variable {
                SweepVariable::PmDb => match curve_rows(spec, i, x) {
                    Ok(rows) => rows.into_iter().map(Ok).collect(),
                    Err(e) => labels.iter().map(|l| Err(fail(l, e.clone()))).collect(),
                },
                _ => spec
                    .schemes
                    .iter()
                    .enumerate()
                    .map(|(j, &s)| scheme_row(spec, i * spec.schemes.len() + j, x, s).map_err(|e| fail(s.name(), e)))
                    .collect(),
            }
        })
        .collect();

    let mut out = RunOutput::default();
    for r in per_point.into_iter().flatten() {
        match r {
            Ok(row) => out.rows.push(row),
            Err(f) => out.failures.push(f),
        }
    }
    out
}

fn mc_columns(
    spec: &ExperimentSpec,
    params: &SystemParams,
    rp: &RatePoint,
    row: u64,
) -> Result<(Option<f64>, Option<f64>)> {
    if spec.mc_samples == 0 {
        return Ok((None, None));
    }
    let link = derive_link(params)?;
    let key = StreamKey::new(spec.seed).with_row(spec.experiment.index(), row);
    let est = estimate_monitoring_rate(params, &link, rp, spec.mc_samples, key)?;
    Ok((Some(est.mean), Some(est.half_width_95)))
}

/// The three rate curves at the rate that meets the outage target under
/// jamming power `x` dB.
fn curve_rows(spec: &ExperimentSpec, index: usize, x: f64) -> Result<Vec<ResultRow>> {
    let params = spec.params;
    let link = derive_link(&params)?;
    let n = params.n_ports;
    let r = rate_for_pm(&params, db_to_linear(x))?;
    let rp = RatePoint::new(r)?;
    let values = [
        (CURVE_TRUE, rate_true(&link, &rp, n, &spec.quadrature)?),
        (CURVE_BOUND, rate_bound(&link, &rp, n)),
        (CURVE_APPROX, rate_approx(&link, &rp, n)),
    ];
    // the simulated rate is the same quantity for every curve at this point
    let (mc_mean, mc_ci) = mc_columns(spec, &params, &rp, index as u64)?;
    Ok(values
        .into_iter()
        .map(|(label, v)| ResultRow {
            experiment: spec.experiment.name().into(),
            scheme: label.into(),
            x_name: spec.sweep_variable.name().into(),
            x_value: x,
            r_star_bits: r,
            pm_star_db: x,
            rate_analytic: v,
            rate_mc_mean: mc_mean,
            rate_mc_ci95: mc_ci,
            clamped: false,
        })
        .collect())
}

fn scheme_row(spec: &ExperimentSpec, row: usize, x: f64, scheme: Scheme) -> Result<ResultRow> {
    let params = params_at(spec, x);
    let link = derive_link(&params)?;
    let res = evaluate_scheme(&params, &link, scheme, &spec.quadrature)?;
    let mc_params = if scheme == Scheme::ConventionalSingle {
        params.with_n_ports(1)
    } else {
        params
    };
    let (mc_mean, mc_ci) = mc_columns(spec, &mc_params, &RatePoint::new(res.r_star)?, row as u64)?;
    Ok(ResultRow {
        experiment: spec.experiment.name().into(),
        scheme: scheme.name().into(),
        x_name: spec.sweep_variable.name().into(),
        x_value: x,
        r_star_bits: res.r_star,
        pm_star_db: linear_to_db(res.pm_star),
        rate_analytic: res.rate_true_at_rstar,
        rate_mc_mean: mc_mean,
        rate_mc_ci95: mc_ci,
        clamped: res.clamped,
    })
}
