//! Markov-renewal path generation and Monte Carlo verification of the
//! diffusion limits.
//!
//! Paths are reproducible: a master seed plus the path index select an
//! independent ChaCha stream, so results do not depend on thread count or
//! scheduling.

use crate::chain::StateModel;
use crate::diffusion;
use crate::error::{Error, Result};
use crate::math;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Per-state sojourn-time distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SojournSpec {
    Exponential {
        rate: f64,
    },
    Deterministic {
        value: f64,
    },
    /// Pareto with survival (scale/x)^alpha on x >= scale. alpha <= 1 has
    /// infinite mean and selects the balanced (t n log n) scaling.
    Pareto {
        alpha: f64,
        scale: f64,
    },
}

impl SojournSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            SojournSpec::Exponential { rate } => rate > 0.0,
            SojournSpec::Deterministic { value } => value > 0.0,
            SojournSpec::Pareto { alpha, scale } => alpha > 0.0 && scale > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "sojourn parameters must be positive: {self:?}"
            )))
        }
    }

    /// Mean sojourn; `None` when infinite.
    pub fn mean(&self) -> Option<f64> {
        match *self {
            SojournSpec::Exponential { rate } => Some(1.0 / rate),
            SojournSpec::Deterministic { value } => Some(value),
            SojournSpec::Pareto { alpha, scale } => {
                (alpha > 1.0).then(|| scale * alpha / (alpha - 1.0))
            }
        }
    }

    /// Smallest value the distribution can produce (used to bound step
    /// counts when simulating to a time horizon).
    fn min_support(&self) -> f64 {
        match *self {
            SojournSpec::Exponential { .. } => 0.0,
            SojournSpec::Deterministic { value } => value,
            SojournSpec::Pareto { scale, .. } => scale,
        }
    }

    #[inline]
    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.gen_range(0.0..1.0);
        match *self {
            SojournSpec::Exponential { rate } => -(1.0 - u).ln() / rate,
            SojournSpec::Deterministic { value } => value,
            SojournSpec::Pareto { alpha, scale } => scale * (1.0 - u).powf(-1.0 / alpha),
        }
    }
}

/// Scaling regime of the functional limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scaling {
    /// t n log n horizon; requires an infinite-mean sojourn state.
    Balanced,
    /// t n horizon; requires all sojourn means finite.
    Unbalanced,
}

/// One simulated Markov-renewal path. `states[k]`, `times[k]`, `prices[k]`
/// are X_{k+1}, T_{k+1}, s_{k+1}; the chain starts from `initial_state`
/// drawn from pi*.
#[derive(Debug, Clone)]
pub struct SimulatedPath {
    pub initial_state: usize,
    pub states: Vec<usize>,
    pub times: Vec<f64>,
    pub prices: Vec<f64>,
}

/// Monte Carlo comparison of the rescaled terminal values against the
/// predicted Brownian coefficient.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimulationReport {
    pub n_paths: usize,
    pub n_jumps: usize,
    pub t: f64,
    pub scaling: Scaling,
    pub predicted_coeff: f64,
    pub empirical_coeff: f64,
    pub relative_error: f64,
    /// KS distance of the standardized terminal values from N(0,1).
    pub ks_normal: f64,
}

fn cumulative_rows(p: &[Vec<f64>]) -> Vec<Vec<f64>> {
    p.iter()
        .map(|row| {
            let mut acc = 0.0;
            let mut out: Vec<f64> = row
                .iter()
                .map(|&v| {
                    acc += v;
                    acc
                })
                .collect();
            if let Some(last) = out.last_mut() {
                *last = 1.0; // guard against rounding shortfall
            }
            out
        })
        .collect()
}

#[inline]
fn sample_index<R: Rng>(cum: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.gen_range(0.0..1.0);
    match cum.iter().position(|&c| u < c) {
        Some(i) => i,
        None => cum.len() - 1,
    }
}

fn validate_inputs(model: &StateModel, sojourns: &[SojournSpec]) -> Result<()> {
    model.validate()?;
    if sojourns.len() != model.n {
        return Err(Error::InvalidParameter(format!(
            "need one sojourn spec per state ({} != {})",
            sojourns.len(),
            model.n
        )));
    }
    for s in sojourns {
        s.validate()?;
    }
    Ok(())
}

/// Generate one path of `n_jumps` price changes. The same seed always
/// yields the same path.
pub fn simulate_path(
    model: &StateModel,
    sojourns: &[SojournSpec],
    n_jumps: usize,
    seed: u64,
) -> Result<SimulatedPath> {
    validate_inputs(model, sojourns)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi_cum = {
        let mut acc = 0.0;
        let mut v: Vec<f64> = model
            .pi_star
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        *v.last_mut().unwrap() = 1.0;
        v
    };
    let p_cum = cumulative_rows(&model.p);

    let initial_state = sample_index(&pi_cum, &mut rng);
    let mut state = initial_state;
    let mut t = 0.0;
    let mut s = 0.0;
    let mut states = Vec::with_capacity(n_jumps);
    let mut times = Vec::with_capacity(n_jumps);
    let mut prices = Vec::with_capacity(n_jumps);

    for _ in 0..n_jumps {
        t += sojourns[state].sample(&mut rng);
        state = sample_index(&p_cum[state], &mut rng);
        s += model.a[state];
        states.push(state);
        times.push(t);
        prices.push(s);
    }

    Ok(SimulatedPath {
        initial_state,
        states,
        times,
        prices,
    })
}

/// Options for [`clt_check`].
#[derive(Debug, Clone, Copy)]
pub struct CltOptions {
    pub n_paths: usize,
    /// The scaling parameter n; paths run to the corresponding horizon.
    pub n_jumps: usize,
    /// Time argument t of the limit process (default 1).
    pub t: f64,
    pub seed: u64,
    /// `None` selects the regime implied by the sojourn means.
    pub scaling: Option<Scaling>,
}

impl Default for CltOptions {
    fn default() -> Self {
        CltOptions {
            n_paths: 200,
            n_jumps: 100_000,
            t: 1.0,
            seed: 42,
            scaling: None,
        }
    }
}

struct PathOutcome {
    value: f64,
    tau_star_hat: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_path_to_horizon(
    model: &StateModel,
    sojourns: &[SojournSpec],
    p_cum: &[Vec<f64>],
    pi_cum: &[f64],
    a_star: f64,
    horizon: f64,
    max_steps: u64,
    rng: &mut ChaCha8Rng,
) -> Result<PathOutcome> {
    let mut state = sample_index(pi_cum, rng);
    let mut t = 0.0;
    let mut centered = 0.0f64;
    let mut total_sojourn = 0.0f64;
    let mut n_changes = 0u64;

    while n_changes < max_steps {
        let tau = sojourns[state].sample(rng);
        if t + tau > horizon {
            break;
        }
        t += tau;
        total_sojourn += tau;
        state = sample_index(&p_cum[state], rng);
        centered += model.a[state] - a_star;
        n_changes += 1;
    }
    if n_changes >= max_steps {
        return Err(Error::Numerical(
            "path exceeded the step budget before reaching its horizon".into(),
        ));
    }
    let tau_star_hat = if n_changes >= 2 {
        total_sojourn / (n_changes as f64 * (n_changes as f64).ln())
    } else {
        f64::NAN
    };
    Ok(PathOutcome {
        value: centered,
        tau_star_hat,
    })
}

/// Monte Carlo check of the functional CLT: simulate paths to the scaled
/// horizon, rescale the terminal centered sums by sqrt(n), and compare
/// their standard deviation with the predicted coefficient.
pub fn clt_check(
    model: &StateModel,
    sojourns: &[SojournSpec],
    opts: &CltOptions,
) -> Result<SimulationReport> {
    validate_inputs(model, sojourns)?;
    if opts.n_paths < 2 || opts.n_jumps < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 paths and n >= 2".into(),
        ));
    }
    if opts.t <= 0.0 || opts.t.is_nan() {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }

    let finite_means: Option<Vec<f64>> = sojourns.iter().map(|s| s.mean()).collect();
    let implied = if finite_means.is_some() {
        Scaling::Unbalanced
    } else {
        Scaling::Balanced
    };
    if let Some(requested) = opts.scaling {
        if requested != implied {
            return Err(Error::RegimeMismatch(format!(
                "requested {requested:?} scaling but sojourn means imply {implied:?}"
            )));
        }
    }

    let n = opts.n_jumps as f64;
    let horizon = match implied {
        Scaling::Unbalanced => opts.t * n,
        Scaling::Balanced => opts.t * n * n.ln(),
    };
    let a_star = diffusion::a_star(model);
    let sigma2 = diffusion::sigma2_general(model)?;
    let sigma = sigma2.sqrt();

    // Bound the step count: sojourns below the smallest support cannot
    // happen, and for exponentials the mean bounds the expectation.
    let min_step: f64 = sojourns
        .iter()
        .map(|s| {
            let lo = s.min_support();
            if lo > 0.0 {
                lo
            } else {
                s.mean().unwrap_or(1.0) * 0.1
            }
        })
        .fold(f64::INFINITY, f64::min);
    let max_steps = ((horizon / min_step) * 4.0 + 1e6) as u64;

    let p_cum = cumulative_rows(&model.p);
    let pi_cum = {
        let mut acc = 0.0;
        let mut v: Vec<f64> = model
            .pi_star
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        *v.last_mut().unwrap() = 1.0;
        v
    };

    let outcomes: Result<Vec<PathOutcome>> = (0..opts.n_paths)
        .into_par_iter()
        .map(|path_idx| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(path_idx as u64);
            run_path_to_horizon(
                model, sojourns, &p_cum, &pi_cum, a_star, horizon, max_steps, &mut rng,
            )
        })
        .collect();
    let outcomes = outcomes?;

    let sqrt_n = n.sqrt();
    let values: Vec<f64> = outcomes.iter().map(|o| o.value / sqrt_n).collect();

    let predicted = match implied {
        Scaling::Unbalanced => {
            let means = finite_means.expect("checked finite");
            let m_tau: f64 = model
                .pi_star
                .iter()
                .zip(&means)
                .map(|(&pi, &m)| pi * m)
                .sum();
            sigma * opts.t.sqrt() / m_tau.sqrt()
        }
        Scaling::Balanced => {
            // No closed-form tau* for a general stable law; use the
            // estimator on the simulated sojourns (self-consistency check).
            let taus: Vec<f64> = outcomes
                .iter()
                .map(|o| o.tau_star_hat)
                .filter(|v| v.is_finite())
                .collect();
            if taus.is_empty() {
                return Err(Error::Numerical("no usable tau* estimates".into()));
            }
            let tau_hat = taus.iter().sum::<f64>() / taus.len() as f64;
            sigma * opts.t.sqrt() / tau_hat.sqrt()
        }
    };

    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64;
    let empirical = var.sqrt();

    let relative_error = if predicted > 0.0 {
        (empirical - predicted).abs() / predicted
    } else if empirical == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };

    let ks_normal = if empirical > 0.0 {
        let mut standardized: Vec<f64> = values.iter().map(|v| (v - mean) / empirical).collect();
        math::ks_statistic(&mut standardized, math::normal_cdf)
    } else {
        0.0
    };

    Ok(SimulationReport {
        n_paths: opts.n_paths,
        n_jumps: opts.n_jumps,
        t: opts.t,
        scaling: implied,
        predicted_coeff: predicted,
        empirical_coeff: empirical,
        relative_error,
        ks_normal,
    })
}
