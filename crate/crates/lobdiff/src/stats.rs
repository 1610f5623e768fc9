//! Validation harness: realized volatility over fixed windows, ordinary
//! least squares with adjusted R-squared, and empirical joint queue
//! densities after price moves.

use crate::contlarrad::DepthBucketConfig;
use crate::error::{Error, Result};
use crate::events::PriceChangeSeq;
use crate::ingest::{MidPoint, MidQuote};
use crate::math;
use serde::{Deserialize, Serialize};

/// Sample standard deviation of mid-price changes over consecutive
/// non-overlapping windows (default 600 s), the mid sampled at each window
/// boundary by last observation carried forward.
pub fn realized_std(mids: &[MidPoint], window_s: f64, tick_size: f64) -> Result<f64> {
    if window_s <= 0.0 || window_s.is_nan() {
        return Err(Error::InvalidParameter("window must be positive".into()));
    }
    if mids.len() < 2 {
        return Err(Error::InsufficientData("mid series too short".into()));
    }
    let t0 = mids[0].time;
    let t_end = mids[mids.len() - 1].time;
    let n_windows = ((t_end - t0) / window_s).floor() as usize;
    if n_windows < 2 {
        return Err(Error::InsufficientData(format!(
            "series spans {n_windows} full windows; need at least 2"
        )));
    }

    let half_tick = tick_size / 2.0;
    let mut samples = Vec::with_capacity(n_windows + 1);
    let mut idx = 0usize;
    for k in 0..=n_windows {
        let boundary = t0 + k as f64 * window_s;
        while idx + 1 < mids.len() && mids[idx + 1].time <= boundary {
            idx += 1;
        }
        samples.push(mids[idx].mid_half_ticks as f64 * half_tick);
    }

    let changes: Vec<f64> = samples.windows(2).map(|w| w[1] - w[0]).collect();
    let n = changes.len() as f64;
    let mean = changes.iter().sum::<f64>() / n;
    let var = changes.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt())
}

/// Simple linear regression summary.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub adj_r2: f64,
    pub n_points: usize,
    pub p_value_slope: f64,
}

/// Ordinary least squares of y on x with an intercept;
/// adj R^2 = 1 - (1 - R^2)(n - 1)/(n - 2) for the single predictor.
pub fn linear_fit_adjr2(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter("x and y lengths differ".into()));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData(
            "regression needs at least 3 points".into(),
        ));
    }
    let nf = n as f64;
    let x_mean = x.iter().sum::<f64>() / nf;
    let y_mean = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for i in 0..n {
        let dx = x[i] - x_mean;
        let dy = y[i] - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::SingularFit);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let sse = (syy - slope * sxy).max(0.0);
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let adj_r2 = 1.0 - (1.0 - r2) * (nf - 1.0) / (nf - 2.0);

    let dof = nf - 2.0;
    let p_value_slope = if sse == 0.0 {
        0.0
    } else {
        let se = (sse / dof / sxx).sqrt();
        math::t_two_sided_p(slope / se, dof)
    };

    Ok(RegressionResult {
        slope,
        intercept,
        r2,
        adj_r2,
        n_points: n,
        p_value_slope,
    })
}

/// Least squares through the origin. R^2 is the uncentered version and the
/// adjustment uses n/(n - 1), matching the usual no-intercept convention.
pub fn linear_fit_through_origin(x: &[f64], y: &[f64]) -> Result<RegressionResult> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter("x and y lengths differ".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InsufficientData(
            "regression needs at least 2 points".into(),
        ));
    }
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    if sxx == 0.0 {
        return Err(Error::SingularFit);
    }
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| a * b).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let slope = sxy / sxx;
    let sse = (syy - slope * sxy).max(0.0);
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let nf = n as f64;
    let adj_r2 = 1.0 - (1.0 - r2) * nf / (nf - 1.0);
    let dof = nf - 1.0;
    let p_value_slope = if sse == 0.0 {
        0.0
    } else {
        let se = (sse / dof / sxx).sqrt();
        math::t_two_sided_p(slope / se, dof)
    };
    Ok(RegressionResult {
        slope,
        intercept: 0.0,
        r2,
        adj_r2,
        n_points: n,
        p_value_slope,
    })
}

/// Direction selector for the joint density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum JumpDirection {
    Up,
    Down,
}

/// Normalized 2-D histogram of post-change queue depths.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointDensity {
    pub cfg: DepthBucketConfig,
    pub direction: JumpDirection,
    /// probs[bid_bucket][ask_bucket], summing to 1.
    pub probs: Vec<Vec<f64>>,
    pub n_observations: u64,
}

impl JointDensity {
    pub fn bid_marginal(&self) -> Vec<f64> {
        self.probs.iter().map(|row| row.iter().sum()).collect()
    }

    pub fn ask_marginal(&self) -> Vec<f64> {
        let nb = self.cfg.n_buckets();
        (0..nb)
            .map(|a| self.probs.iter().map(|row| row[a]).sum())
            .collect()
    }
}

/// Joint density f (after an up move) or f-tilde (after a down move) of
/// the reinitialized queue sizes, restricted to one-tick-spread states.
pub fn joint_queue_density(
    quotes: &[MidQuote],
    changes: &PriceChangeSeq,
    direction: JumpDirection,
    cfg: &DepthBucketConfig,
) -> Result<JointDensity> {
    if quotes.is_empty() || changes.is_empty() {
        return Err(Error::EmptyDensity);
    }
    let nb = cfg.n_buckets();
    let mut counts = vec![vec![0u64; nb]; nb];
    let mut total = 0u64;

    let mut qi = 0usize;
    for (k, &t_change) in changes.change_times.iter().enumerate() {
        let want = match direction {
            JumpDirection::Up => changes.jumps[k] > 0.0,
            JumpDirection::Down => changes.jumps[k] < 0.0,
        };
        if !want {
            continue;
        }
        // Settled book state at the change time.
        while qi + 1 < quotes.len() && quotes[qi + 1].time <= t_change {
            qi += 1;
        }
        let q = &quotes[qi];
        if q.time > t_change || q.spread_ticks() != 1 {
            continue;
        }
        counts[cfg.bucket(q.bid_depth)][cfg.bucket(q.ask_depth)] += 1;
        total += 1;
    }

    if total == 0 {
        return Err(Error::EmptyDensity);
    }
    let probs = counts
        .into_iter()
        .map(|row| row.into_iter().map(|c| c as f64 / total as f64).collect())
        .collect();
    Ok(JointDensity {
        cfg: *cfg,
        direction,
        probs,
        n_observations: total,
    })
}
