//! Diffusion-limit coefficients of the rescaled mid-price process.
//!
//! The centered price sum converges weakly to a Brownian motion whose
//! scale is sigma*/sqrt(tau*) under the balanced (t n log n) scaling and
//! sigma*/sqrt(m_tau) under the unbalanced (t n) scaling. This module
//! evaluates sigma*^2 three ways — the explicit two-state form, the
//! general n-state form through the fundamental-matrix vector g, and the
//! one-tick reduction — together with both time scales.

use crate::chain::StateModel;
use crate::error::{Error, Result};
use crate::linalg::{self, SquareMatrix};
use serde::{Deserialize, Serialize};

/// Condition-number ceiling for the (P + Pi* - I) solve.
const CONDITION_LIMIT: f64 = 1e12;
/// Relative residual bound on the g-vector solve.
const G_RESIDUAL_TOL: f64 = 1e-10;

/// Final estimate bundle: the drift a*, variance sigma*^2, both time
/// scales, and both diffusion coefficients.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DiffusionEstimate {
    pub a_star: f64,
    pub sigma2: f64,
    pub tau_star: f64,
    pub m_tau: f64,
    /// sigma*/sqrt(tau*), the balanced-scaling coefficient.
    pub coeff_balanced: f64,
    /// sigma*/sqrt(m_tau), the unbalanced-scaling coefficient.
    pub coeff_unbalanced: f64,
}

fn check_prob(name: &str, v: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter(format!(
            "{name} = {v} is not a probability"
        )));
    }
    Ok(())
}

/// Two-state sigma*^2 in closed form.
///
/// `p_cont` is the probability of two consecutive upward moves, `p_cont_p`
/// of two consecutive downward moves; `a1 > 0 > a2` are the per-state jump
/// values and `pi` the stationary distribution.
pub fn sigma2_two_state(
    p_cont: f64,
    p_cont_p: f64,
    a1: f64,
    a2: f64,
    pi: (f64, f64),
) -> Result<f64> {
    check_prob("p_cont", p_cont)?;
    check_prob("p_cont'", p_cont_p)?;
    let (pi1, pi2) = pi;
    let denom = p_cont + p_cont_p - 2.0;
    if denom.abs() < 1e-14 {
        return Err(Error::SingularDenominator);
    }
    let a_star = pi1 * a1 + pi2 * a2;

    let direct = pi1 * a1 * a1
        + pi2 * a2 * a2
        + a_star * (-2.0 * a1 * pi1 - 2.0 * a2 * pi2 + a_star * (pi1 + pi2));
    let squared_term =
        (pi1 * (1.0 - p_cont) + pi2 * (1.0 - p_cont_p)) * (a1 - a2) * (a1 - a2) / (denom * denom);
    let cross = 2.0
        * (a2 - a1)
        * ((pi2 * a2 * (1.0 - p_cont_p) - pi1 * a1 * (1.0 - p_cont)) / denom
            + a_star * (pi1 - p_cont * pi1 - pi2 + p_cont_p * pi2) / denom);

    Ok(clamp_variance(direct + squared_term + cross))
}

/// One-tick reduction: jumps of +-delta collapse the two-state form to
/// 4 delta^2 [ (1 - p' + pi*(p' - p)) / (p + p' - 2)^2 - pi*(1 - pi*) ].
pub fn sigma2_one_tick(delta: f64, p_cont: f64, p_cont_p: f64, pi1: f64) -> Result<f64> {
    check_prob("p_cont", p_cont)?;
    check_prob("p_cont'", p_cont_p)?;
    check_prob("pi*", pi1)?;
    let denom = p_cont + p_cont_p - 2.0;
    if denom.abs() < 1e-14 {
        return Err(Error::SingularDenominator);
    }
    let v = 4.0
        * delta
        * delta
        * ((1.0 - p_cont_p + pi1 * (p_cont_p - p_cont)) / (denom * denom) - pi1 * (1.0 - pi1));
    Ok(clamp_variance(v))
}

/// Solve (P + Pi* - I) g = b, where Pi* stacks the stationary distribution
/// in every row. Errors on ill-conditioned systems and checks the residual.
pub fn g_vector(p: &[Vec<f64>], pi: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = p.len();
    if pi.len() != n || b.len() != n {
        return Err(Error::InvalidParameter(
            "dimension mismatch in g-vector solve".into(),
        ));
    }
    if b.iter().all(|&v| v == 0.0) {
        return Ok(vec![0.0; n]);
    }
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            rows[i][j] = p[i][j] + pi[j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    let a = SquareMatrix::from_rows(&rows);
    let cond = linalg::condition_1norm(&a);
    if !cond.is_finite() || cond > CONDITION_LIMIT {
        return Err(Error::Singular { cond });
    }
    let g = linalg::solve(&a, b).ok_or(Error::Singular { cond })?;

    let b_scale = b.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for i in 0..n {
        let mut r = -b[i];
        for j in 0..n {
            r += rows[i][j] * g[j];
        }
        worst = worst.max(r.abs());
    }
    if worst > G_RESIDUAL_TOL * b_scale {
        return Err(Error::Numerical(format!(
            "g-vector residual {worst:.3e} exceeds {G_RESIDUAL_TOL:.1e} x ||b||"
        )));
    }
    Ok(g)
}

/// General n-state sigma*^2 = sum_i pi*_i v(i) with
/// v(i) = b(i)^2 + sum_j (g(j)-g(i))^2 P(i,j) - 2 b(i) sum_j (g(j)-g(i)) P(i,j).
pub fn sigma2_general(model: &StateModel) -> Result<f64> {
    let n = model.n;
    let a_star: f64 = (0..n).map(|i| model.pi_star[i] * model.a[i]).sum();
    let b: Vec<f64> = model.a.iter().map(|&a| a - a_star).collect();
    let g = g_vector(&model.p, &model.pi_star, &b)?;

    let mut sigma2 = 0.0;
    for i in 0..n {
        let mut quad = 0.0;
        let mut lin = 0.0;
        for j in 0..n {
            let d = g[j] - g[i];
            quad += d * d * model.p[i][j];
            lin += d * model.p[i][j];
        }
        let v = b[i] * b[i] + quad - 2.0 * b[i] * lin;
        sigma2 += model.pi_star[i] * v;
    }
    Ok(clamp_variance(sigma2))
}

/// Mean drift a* = sum_i pi*_i a(i).
pub fn a_star(model: &StateModel) -> f64 {
    model
        .a
        .iter()
        .zip(&model.pi_star)
        .map(|(&a, &pi)| pi * a)
        .sum()
}

/// The two time scales: tau* = sum(tau_k) / (n ln n) over the observed
/// sojourns, and m_tau = sum_i pi*_i m(i).
pub fn limit_time_scales(sojourns: &[f64], pi: &[f64], m: &[f64]) -> Result<(f64, f64)> {
    let n = sojourns.len();
    if n < 2 {
        return Err(Error::InsufficientData(
            "tau* needs at least two price changes".into(),
        ));
    }
    if pi.len() != m.len() {
        return Err(Error::InvalidParameter(
            "pi and m must have equal length".into(),
        ));
    }
    let total: f64 = sojourns.iter().sum();
    let tau_star = total / (n as f64 * (n as f64).ln());
    let m_tau = pi.iter().zip(m).map(|(&p, &mi)| p * mi).sum();
    Ok((tau_star, m_tau))
}

/// The two diffusion coefficients sigma*/sqrt(tau*) and sigma*/sqrt(m_tau).
pub fn diffusion_coefficients(sigma2: f64, tau_star: f64, m_tau: f64) -> Result<(f64, f64)> {
    if sigma2 < 0.0 {
        return Err(Error::Domain(format!("sigma^2 = {sigma2} is negative")));
    }
    if tau_star <= 0.0 || m_tau <= 0.0 {
        return Err(Error::Domain(format!(
            "time scales must be positive (tau* = {tau_star}, m_tau = {m_tau})"
        )));
    }
    let sigma = sigma2.sqrt();
    Ok((sigma / tau_star.sqrt(), sigma / m_tau.sqrt()))
}

/// Evaluate the full estimate bundle for a fitted model and its observed
/// sojourn sequence.
pub fn estimate(model: &StateModel, sojourns: &[f64]) -> Result<DiffusionEstimate> {
    let sigma2 = sigma2_general(model)?;
    let (tau_star, m_tau) = limit_time_scales(sojourns, &model.pi_star, &model.m)?;
    let (coeff_balanced, coeff_unbalanced) = diffusion_coefficients(sigma2, tau_star, m_tau)?;
    Ok(DiffusionEstimate {
        a_star: a_star(model),
        sigma2,
        tau_star,
        m_tau,
        coeff_balanced,
        coeff_unbalanced,
    })
}

/// Round off tiny negative values that are pure floating-point residue.
fn clamp_variance(v: f64) -> f64 {
    if v < 0.0 && v > -1e-12 {
        0.0
    } else {
        v
    }
}
