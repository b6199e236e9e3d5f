//! System parameters, the fluid-antenna port correlation model, and random
//! draws of every channel coefficient.
//!
//! Port `k` of the fluid antenna sees `g_k = mu g_0 + sqrt(1 - mu^2) e_k`,
//! where `g_0` is a virtual reference port and the `e_k` are i.i.d.
//! innovations, all `CN(0, sigma_g^2)`. With that mixing weight every port
//! keeps variance `sigma_g^2`, and `|g_k|` given `|g_0|` is Rician, which is
//! what the outage integral assumes.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::specfun::{hyp1f2_half, j1};

/// Largest f64 strictly below one.
const ONE_MINUS_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

/// Tolerance on the correlation radicand before it is treated as inconsistent.
const RADICAND_SLACK: f64 = 1e-12;

/// Physical inputs, all in linear units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// Transmit power of the suspicious source.
    pub p_s: f64,
    /// Jamming power budget of the monitor.
    pub p_m_max: f64,
    /// Variance of the source -> destination channel `h`.
    pub sigma_h2: f64,
    /// Variance of the source -> monitor port channels `g_k`.
    pub sigma_g2: f64,
    /// Variance of the monitor -> destination jamming channel `f`.
    pub sigma_f2: f64,
    /// Noise power at the suspicious destination.
    pub sigma_d2: f64,
    /// Noise power at the monitor.
    pub sigma_m2: f64,
    /// Target outage probability enforced at the destination.
    pub delta: f64,
    pub n_ports: usize,
    /// Fluid antenna length in wavelengths.
    pub aperture_w: f64,
}

impl SystemParams {
    /// The numerical-results setup: `p_s = 20 dB`, `p_m_max = 30 dB`,
    /// `sigma_h^2 = sigma_d^2 = sigma_m^2 = 1`, `delta = 0.05`, `W = 5`,
    /// `N = 8`, and `sigma_g^2 = sigma_f^2` at `-18 dB` relative to `sigma_h^2`.
    pub fn reference() -> Self {
        let sigma2 = db_to_linear(-18.0);
        SystemParams {
            p_s: db_to_linear(20.0),
            p_m_max: db_to_linear(30.0),
            sigma_h2: 1.0,
            sigma_g2: sigma2,
            sigma_f2: sigma2,
            sigma_d2: 1.0,
            sigma_m2: 1.0,
            delta: 0.05,
            n_ports: 8,
            aperture_w: 5.0,
        }
    }

    /// Sets `sigma_g^2 = sigma_f^2 = sigma_h^2 * 10^{ratio_db/10}`.
    pub fn with_sigma_ratio_db(mut self, ratio_db: f64) -> Self {
        let s = self.sigma_h2 * db_to_linear(ratio_db);
        self.sigma_g2 = s;
        self.sigma_f2 = s;
        self
    }

    pub fn with_n_ports(mut self, n: usize) -> Self {
        self.n_ports = n;
        self
    }

    pub fn with_p_m_max(mut self, p_m_max: f64) -> Self {
        self.p_m_max = p_m_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("p_s", self.p_s),
            ("p_m_max", self.p_m_max),
            ("sigma_h2", self.sigma_h2),
            ("sigma_g2", self.sigma_g2),
            ("sigma_f2", self.sigma_f2),
            ("sigma_d2", self.sigma_d2),
            ("sigma_m2", self.sigma_m2),
            ("aperture_w", self.aperture_w),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParam {
                    name,
                    value,
                    reason: "must be finite and > 0",
                });
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParam {
                name: "delta",
                value: self.delta,
                reason: "must lie in (0, 1)",
            });
        }
        if self.n_ports == 0 {
            return Err(Error::InvalidParam {
                name: "n_ports",
                value: 0.0,
                reason: "must be >= 1",
            });
        }
        Ok(())
    }

    /// Errors unless the parameters describe a fluid antenna (`N >= 2`).
    pub fn require_fas(&self) -> Result<()> {
        if self.n_ports < 2 {
            return Err(Error::InvalidParam {
                name: "n_ports",
                value: self.n_ports as f64,
                reason: "the fluid-antenna model needs N >= 2",
            });
        }
        Ok(())
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Quantities fixed by a parameter set: correlation `mu`, bound coefficient
/// `eta = (1 - mu^2) / (1 + (N - 1) mu^2)` and SNR scale `Gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedLink {
    pub mu: f64,
    pub eta: f64,
    pub gamma_cap: f64,
}

impl DerivedLink {
    /// Builds a link from an explicit correlation, bypassing the aperture
    /// model; used for parameter scans.
    pub fn from_parts(mu: f64, n_ports: usize, gamma_cap: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&mu) {
            return Err(Error::InvalidParam {
                name: "mu",
                value: mu,
                reason: "correlation must lie in [0, 1)",
            });
        }
        if !(gamma_cap.is_finite() && gamma_cap > 0.0) {
            return Err(Error::InvalidParam {
                name: "gamma_cap",
                value: gamma_cap,
                reason: "must be finite and > 0",
            });
        }
        if n_ports == 0 {
            return Err(Error::InvalidParam {
                name: "n_ports",
                value: 0.0,
                reason: "must be >= 1",
            });
        }
        let eta = eta_of(mu, n_ports);
        Ok(DerivedLink { mu, eta, gamma_cap })
    }

    /// `eta` for a port count other than the one the link was built with.
    pub fn eta_for(&self, n_ports: usize) -> f64 {
        eta_of(self.mu, n_ports)
    }

    /// `Gamma (1 - mu^2)`, the per-port scale once `g_0` is conditioned on.
    pub fn conditional_scale(&self) -> f64 {
        self.gamma_cap * (1.0 - self.mu * self.mu)
    }
}

fn eta_of(mu: f64, n_ports: usize) -> f64 {
    let mu2 = mu * mu;
    (1.0 - mu2) / (1.0 + (n_ports as f64 - 1.0) * mu2)
}

/// Port correlation factor for an aperture of `aperture_w` wavelengths:
/// `mu = sqrt(2) sqrt(1F2(1/2; 1, 3/2; -pi^2 W^2) - J1(2 pi W) / (2 pi W))`.
pub fn correlation_mu(aperture_w: f64) -> Result<f64> {
    let hyp = hyp1f2_half(aperture_w)?;
    let a = 2.0 * PI * aperture_w;
    let radicand = hyp - j1(a) / a;
    if !(-RADICAND_SLACK..=0.5 + RADICAND_SLACK).contains(&radicand) {
        return Err(Error::Computation {
            context: "correlation_mu",
            detail: format!("radicand {radicand} outside [0, 1/2] at W = {aperture_w}"),
        });
    }
    Ok((2.0 * radicand.max(0.0)).sqrt().min(ONE_MINUS_ULP))
}

pub fn derive_link(params: &SystemParams) -> Result<DerivedLink> {
    params.validate()?;
    let mu = correlation_mu(params.aperture_w)?;
    DerivedLink::from_parts(mu, params.n_ports, params.p_s * params.sigma_g2 / params.sigma_m2)
}

/// One joint draw of all channel coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSample {
    /// Source -> destination.
    pub h: Complex64,
    /// Monitor -> destination.
    pub f: Complex64,
    /// Virtual reference port.
    pub g0: Complex64,
    pub e: Vec<Complex64>,
    /// Port coefficients.
    pub g: Vec<Complex64>,
}

/// Weight on the innovation `e_k` when forming `g_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MixingWeight {
    /// `sqrt(1 - mu^2)`: keeps each port at variance `sigma_g^2`.
    #[default]
    VariancePreserving,
    /// `1 - mu`, as the port model is sometimes written. Ports then have
    /// variance `sigma_g^2 (mu^2 + (1 - mu)^2)`; kept only to show that the
    /// outage integral does not describe it.
    Literal,
}

/// Precomputed scales for repeated draws.
#[derive(Debug, Clone, Copy)]
pub struct ChannelSampler {
    h_scale: f64,
    f_scale: f64,
    g_scale: f64,
    mu: f64,
    innovation_weight: f64,
    n_ports: usize,
}

impl ChannelSampler {
    pub fn new(params: &SystemParams, link: &DerivedLink, mixing: MixingWeight) -> Result<Self> {
        params.validate()?;
        params.require_fas()?;
        Ok(Self::build(params, link.mu, mixing, params.n_ports))
    }

    /// A conventional fixed antenna: one port with the full `sigma_g^2`.
    pub fn single_antenna(params: &SystemParams) -> Result<Self> {
        params.validate()?;
        Ok(Self::build(params, 0.0, MixingWeight::VariancePreserving, 1))
    }

    fn build(params: &SystemParams, mu: f64, mixing: MixingWeight, n_ports: usize) -> Self {
        let innovation_weight = match mixing {
            MixingWeight::VariancePreserving => (1.0 - mu * mu).sqrt(),
            MixingWeight::Literal => 1.0 - mu,
        };
        ChannelSampler {
            h_scale: (0.5 * params.sigma_h2).sqrt(),
            f_scale: (0.5 * params.sigma_f2).sqrt(),
            g_scale: (0.5 * params.sigma_g2).sqrt(),
            mu,
            innovation_weight,
            n_ports,
        }
    }

    pub fn n_ports(&self) -> usize {
        self.n_ports
    }

    /// Draws `h, f, g_0, e_1..e_N` in that order from `rng`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelSample {
        let h = cn(rng, self.h_scale);
        let f = cn(rng, self.f_scale);
        let g0 = cn(rng, self.g_scale);
        let e: Vec<Complex64> = (0..self.n_ports).map(|_| cn(rng, self.g_scale)).collect();
        let g = e.iter().map(|ek| self.mu * g0 + self.innovation_weight * ek).collect();
        ChannelSample { h, f, g0, e, g }
    }

    /// `(|h|^2, |f|^2)` using the same stream layout as [`Self::draw`].
    pub fn draw_destination_gains<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let h = cn(rng, self.h_scale);
        let f = cn(rng, self.f_scale);
        (h.norm_sqr(), f.norm_sqr())
    }

    /// `max_k |g_k|^2` using the same stream layout as [`Self::draw`],
    /// without allocating.
    pub fn draw_gmax_sq<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let _h = cn(rng, self.h_scale);
        let _f = cn(rng, self.f_scale);
        let g0 = cn(rng, self.g_scale);
        let mut best = 0.0f64;
        for _ in 0..self.n_ports {
            let gk = self.mu * g0 + self.innovation_weight * cn(rng, self.g_scale);
            best = best.max(gk.norm_sqr());
        }
        best
    }
}

/// Draws a full [`ChannelSample`] with the variance-preserving port model.
pub fn sample_channels<R: Rng + ?Sized>(
    params: &SystemParams,
    link: &DerivedLink,
    rng: &mut R,
) -> Result<ChannelSample> {
    Ok(ChannelSampler::new(params, link, MixingWeight::VariancePreserving)?.draw(rng))
}

/// Magnitude of the strongest port.
pub fn gmax_magnitude(sample: &ChannelSample) -> f64 {
    sample.g.iter().map(|g| g.norm()).fold(0.0, f64::max)
}

fn cn<R: Rng + ?Sized>(rng: &mut R, scale: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(scale * re, scale * im)
}
