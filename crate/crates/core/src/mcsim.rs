//! Monte Carlo estimators for the outage probabilities and the average
//! monitoring rate.
//!
//! Draws are split into fixed-size blocks. Block `b` of a run keyed by
//! `(seed, experiment, row)` uses ChaCha8 stream `b` under a key derived from
//! that triple, so estimates do not depend on how rayon schedules blocks.

use std::f64::consts::LN_2;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{ChannelSampler, DerivedLink, MixingWeight, SystemParams};
use crate::error::{Error, Result};
use crate::outage::RatePoint;

const BLOCK: u64 = 4096;

/// Identifies an independent family of random streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct StreamKey {
    pub seed: u64,
    pub experiment: u64,
    pub row: u64,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey {
            seed,
            experiment: 0,
            row: 0,
        }
    }

    pub fn with_row(self, experiment: u64, row: u64) -> Self {
        StreamKey {
            experiment,
            row,
            ..self
        }
    }

    fn rng_for_block(&self, block: u64) -> ChaCha8Rng {
        let mut state = self.seed;
        let mut key = [0u8; 32];
        let words = [self.experiment, self.row, 0x243f_6a88_85a3_08d3, 0x1319_8a2e_0370_7344];
        for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
            state ^= w;
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(block);
        rng
    }
}

impl From<u64> for StreamKey {
    fn from(seed: u64) -> Self {
        StreamKey::new(seed)
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    /// Normal-approximation 95% half width.
    pub half_width_95: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_count(hits: u64, n: u64, seed: u64) -> Self {
        let p = hits as f64 / n as f64;
        McEstimate {
            mean: p,
            half_width_95: 1.96 * (p * (1.0 - p) / n as f64).sqrt(),
            n_samples: n,
            seed,
        }
    }

    /// One standard error.
    pub fn sigma(&self) -> f64 {
        self.half_width_95 / 1.96
    }
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParam {
            name: "n",
            value: 0.0,
            reason: "need at least one draw",
        });
    }
    Ok(())
}

/// Counts draws for which `hit` is true, in parallel over blocks.
fn count_hits(n: u64, key: StreamKey, hit: impl Fn(&mut ChaCha8Rng) -> bool + Sync) -> u64 {
    let blocks = n.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = key.rng_for_block(b);
            let len = BLOCK.min(n - b * BLOCK);
            (0..len).filter(|_| hit(&mut rng)).count() as u64
        })
        .sum()
}

/// Fraction of draws with `log2(1 + p_s |h|^2 / (p_m |f|^2 + sigma_d^2)) < R`.
pub fn estimate_sd_outage(
    params: &SystemParams,
    rp: &RatePoint,
    p_m: f64,
    n: u64,
    key: impl Into<StreamKey>,
) -> Result<McEstimate> {
    check_n(n)?;
    let key = key.into();
    let sampler = ChannelSampler::single_antenna(params)?;
    let r = rp.rate_r;
    let hits = count_hits(n, key, |rng| {
        let (h2, f2) = sampler.draw_destination_gains(rng);
        let sinr = params.p_s * h2 / (p_m * f2 + params.sigma_d2);
        sinr.ln_1p() / LN_2 < r
    });
    Ok(McEstimate::from_count(hits, n, key.seed))
}

/// Fraction of draws with `log2(1 + p_s max_k |g_k|^2 / sigma_m^2) < R` under
/// the variance-preserving port model. `N = 1` draws a single fixed antenna.
pub fn estimate_monitor_outage(
    params: &SystemParams,
    link: &DerivedLink,
    rp: &RatePoint,
    n: u64,
    key: impl Into<StreamKey>,
) -> Result<McEstimate> {
    estimate_monitor_outage_with(params, link, rp, n, key, MixingWeight::VariancePreserving)
}

/// [`estimate_monitor_outage`] with an explicit port mixing weight.
pub fn estimate_monitor_outage_with(
    params: &SystemParams,
    link: &DerivedLink,
    rp: &RatePoint,
    n: u64,
    key: impl Into<StreamKey>,
    mixing: MixingWeight,
) -> Result<McEstimate> {
    check_n(n)?;
    let key = key.into();
    let sampler = if params.n_ports == 1 {
        ChannelSampler::single_antenna(params)?
    } else {
        ChannelSampler::new(params, link, mixing)?
    };
    let r = rp.rate_r;
    let hits = count_hits(n, key, |rng| {
        let snr = params.p_s * sampler.draw_gmax_sq(rng) / params.sigma_m2;
        snr.ln_1p() / LN_2 < r
    });
    Ok(McEstimate::from_count(hits, n, key.seed))
}

/// `R (1 - P_m^out)` with the outage estimated by simulation; the interval
/// is scaled by `R`.
pub fn estimate_monitoring_rate(
    params: &SystemParams,
    link: &DerivedLink,
    rp: &RatePoint,
    n: u64,
    key: impl Into<StreamKey>,
) -> Result<McEstimate> {
    let out = estimate_monitor_outage(params, link, rp, n, key)?;
    Ok(McEstimate {
        mean: rp.rate_r * (1.0 - out.mean),
        half_width_95: rp.rate_r * out.half_width_95,
        ..out
    })
}
