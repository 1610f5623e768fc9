//! Conditional probability of a price increase given the level-1 queue
//! sizes, evaluated by quadrature, plus its empirical counterpart and the
//! sqrt(lambda / D(f)) volatility proxy.
//!
//! The model prices a race between the two best queues: with a bid queue
//! of n and an ask queue of p orders, the chance the ask empties first is
//!
//! ```text
//! p_up(n, p) = 1/pi * int_0^pi (2 - cos t - sqrt((2 - cos t)^2 - 1))^p
//!                              * sin(n t) cos(t/2) / sin(t/2) dt
//! ```
//!
//! With s = sin(t/2) the base factors as (sqrt(1 + s^2) - s)^2 =
//! exp(-2 asinh(s)), which is numerically stable all the way into the
//! removable singularity at t = 0 (where the integrand tends to 2n).

use crate::error::{Error, Result};
use crate::events::PriceChangeSeq;
use crate::ingest::MidQuote;
use crate::quad;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Absolute tolerance of the quadrature behind `prob_up_integral`.
const QUAD_TOL: f64 = 1e-9;
const MAX_INTERVALS: usize = 4096;

fn integrand(n: f64, p: f64, t: f64) -> f64 {
    let s = (0.5 * t).sin();
    if s == 0.0 {
        return 2.0 * n;
    }
    let base_pow = (-2.0 * p * s.asinh()).exp();
    base_pow * (n * t).sin() * (0.5 * t).cos() / s
}

/// Probability that the ask queue (p orders) depletes before the bid queue
/// (n orders), for symmetric unit order flow. Absolute accuracy 1e-6.
pub fn prob_up_integral(n: u32, p: u32) -> Result<f64> {
    if n < 1 || p < 1 {
        return Err(Error::InvalidParameter(
            "queue sizes must be at least 1".into(),
        ));
    }
    let (nf, pf) = (n as f64, p as f64);
    let r = quad::adaptive_gk15(|t| integrand(nf, pf, t), 0.0, PI, QUAD_TOL, MAX_INTERVALS)
        .map_err(Error::Accuracy)?;
    Ok(r.value / PI)
}

/// Model probability surface over 1..=max_n x 1..=max_p.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UpProbGrid {
    pub max_n: u32,
    pub max_p: u32,
    /// values[n-1][p-1] = p_up(n, p)
    pub values: Vec<Vec<f64>>,
}

/// Evaluate the probability surface; cells are independent and run in
/// parallel.
pub fn model_grid(max_n: u32, max_p: u32) -> Result<UpProbGrid> {
    if max_n < 1 || max_p < 1 {
        return Err(Error::InvalidParameter("grid bounds must be >= 1".into()));
    }
    let values: Result<Vec<Vec<f64>>> = (1..=max_n)
        .into_par_iter()
        .map(|n| (1..=max_p).map(|p| prob_up_integral(n, p)).collect())
        .collect();
    Ok(UpProbGrid {
        max_n,
        max_p,
        values: values?,
    })
}

/// Depth bucketing for the empirical grids. Depths are divided by
/// `lot_size` and capped; the last bucket collects the overflow.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DepthBucketConfig {
    /// Shares per bucket unit (1 round lot = 100 shares by default).
    pub lot_size: u32,
    /// Buckets 0..max_units plus one overflow bucket.
    pub max_units: usize,
}

impl Default for DepthBucketConfig {
    fn default() -> Self {
        DepthBucketConfig {
            lot_size: 100,
            max_units: 30,
        }
    }
}

impl DepthBucketConfig {
    pub fn n_buckets(&self) -> usize {
        self.max_units + 1
    }

    pub fn bucket(&self, depth_shares: u32) -> usize {
        ((depth_shares / self.lot_size.max(1)) as usize).min(self.max_units)
    }
}

/// Empirical frequency of upward moves conditioned on the pre-change
/// queue sizes. Cells with no observations are missing, not zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmpiricalUpGrid {
    pub cfg: DepthBucketConfig,
    /// up[b][a] = upward moves seen from (bid bucket b, ask bucket a)
    pub up: Vec<Vec<u64>>,
    /// total[b][a] = all moves seen from that cell
    pub total: Vec<Vec<u64>>,
}

impl EmpiricalUpGrid {
    /// Fraction of upward moves, `None` where the cell is empty.
    pub fn frequency(&self, bid_bucket: usize, ask_bucket: usize) -> Option<f64> {
        let total = self.total[bid_bucket][ask_bucket];
        (total > 0).then(|| self.up[bid_bucket][ask_bucket] as f64 / total as f64)
    }
}

/// Tabulate next-move direction against the last book state seen strictly
/// before each price change. With `unit_spread_only` (the model's own
/// regime) states with a spread above one tick are skipped.
pub fn empirical_up_frequency(
    quotes: &[MidQuote],
    changes: &PriceChangeSeq,
    cfg: &DepthBucketConfig,
    unit_spread_only: bool,
) -> Result<EmpiricalUpGrid> {
    if quotes.is_empty() {
        return Err(Error::InsufficientData("no quotes".into()));
    }
    let nb = cfg.n_buckets();
    let mut up = vec![vec![0u64; nb]; nb];
    let mut total = vec![vec![0u64; nb]; nb];

    let mut qi = 0usize;
    for (k, &t_change) in changes.change_times.iter().enumerate() {
        while qi + 1 < quotes.len() && quotes[qi + 1].time < t_change {
            qi += 1;
        }
        let q = &quotes[qi];
        if q.time >= t_change || (unit_spread_only && q.spread_ticks() != 1) {
            continue;
        }
        let b = cfg.bucket(q.bid_depth);
        let a = cfg.bucket(q.ask_depth);
        total[b][a] += 1;
        if changes.jumps[k] > 0.0 {
            up[b][a] += 1;
        }
    }

    Ok(EmpiricalUpGrid {
        cfg: *cfg,
        up,
        total,
    })
}

/// Average bid/ask depth immediately after each price change: the state
/// the queues are reinitialized to.
pub fn post_change_depths(quotes: &[MidQuote], changes: &PriceChangeSeq) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(changes.len());
    let mut qi = 0usize;
    for &t_change in &changes.change_times {
        while qi + 1 < quotes.len() && quotes[qi + 1].time <= t_change {
            qi += 1;
        }
        if quotes[qi].time <= t_change {
            out.push((quotes[qi].bid_depth as f64, quotes[qi].ask_depth as f64));
        }
    }
    out
}

/// sqrt(lambda / D(f)) with D(f) the square of the average post-change
/// depth of the two best queues.
pub fn cl_volatility_proxy(lambda_hat: f64, post_depths: &[(f64, f64)]) -> Result<f64> {
    if lambda_hat < 0.0 {
        return Err(Error::Domain("lambda must be non-negative".into()));
    }
    if post_depths.is_empty() {
        return Err(Error::Domain("no post-change depth observations".into()));
    }
    let avg: f64 =
        post_depths.iter().map(|&(b, a)| 0.5 * (b + a)).sum::<f64>() / post_depths.len() as f64;
    if avg <= 0.0 {
        return Err(Error::Domain("average post-change depth is zero".into()));
    }
    Ok((lambda_hat / (avg * avg)).sqrt())
}
