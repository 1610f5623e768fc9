//! Browser demo bindings: three interactive views over the model —
//! the two-state coefficient explorer, a Markov-renewal path simulator,
//! and the price-up probability surface.
//!
//! Build with `wasm-pack build --target web --out-dir www/pkg`; the page
//! in `www/index.html` drives these exports directly.

use lobdiff::chain::{self, StateModel};
use lobdiff::contlarrad;
use lobdiff::diffusion;
use lobdiff::simulate::{self, SojournSpec};
use wasm_bindgen::prelude::*;

fn two_state(p: f64, q: f64, a1: f64, a2: f64, m1: f64, m2: f64) -> Result<StateModel, String> {
    let pm = vec![vec![p, 1.0 - p], vec![1.0 - q, q]];
    let pi = chain::stationary_distribution(&pm).map_err(|e| e.to_string())?;
    Ok(StateModel {
        n: 2,
        a: vec![a1, a2],
        p: pm,
        pi_star: pi,
        m: vec![m1, m2],
    })
}

/// [pi1, pi2, a_star, sigma2, m_tau, coeff_balanced, coeff_unbalanced]
fn summary_impl(
    p: f64,
    q: f64,
    a1: f64,
    a2: f64,
    m1: f64,
    m2: f64,
    tau_star: f64,
) -> Result<Vec<f64>, String> {
    let model = two_state(p, q, a1, a2, m1, m2)?;
    let sigma2 = diffusion::sigma2_general(&model).map_err(|e| e.to_string())?;
    let m_tau = model.pi_star[0] * m1 + model.pi_star[1] * m2;
    let (cb, cu) =
        diffusion::diffusion_coefficients(sigma2, tau_star, m_tau).map_err(|e| e.to_string())?;
    let a_star = diffusion::a_star(&model);
    Ok(vec![
        model.pi_star[0],
        model.pi_star[1],
        a_star,
        sigma2,
        m_tau,
        cb,
        cu,
    ])
}

/// Two-state model summary for the explorer panel.
///
/// Returns [pi1, pi2, a_star, sigma2, m_tau, coeff_balanced,
/// coeff_unbalanced].
#[wasm_bindgen]
pub fn two_state_summary(
    p_cont: f64,
    p_cont_prime: f64,
    a1: f64,
    a2: f64,
    m1: f64,
    m2: f64,
    tau_star: f64,
) -> Result<Vec<f64>, JsValue> {
    summary_impl(p_cont, p_cont_prime, a1, a2, m1, m2, tau_star).map_err(|e| JsValue::from_str(&e))
}

fn path_impl(
    p: f64,
    q: f64,
    a1: f64,
    a2: f64,
    rate: f64,
    n_jumps: usize,
    seed: u64,
) -> Result<Vec<f64>, String> {
    let model = two_state(p, q, a1, a2, 1.0 / rate, 1.0 / rate)?;
    let sojourns = vec![SojournSpec::Exponential { rate }; 2];
    let path =
        simulate::simulate_path(&model, &sojourns, n_jumps, seed).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * n_jumps);
    for (t, s) in path.times.iter().zip(&path.prices) {
        out.push(*t);
        out.push(*s);
    }
    Ok(out)
}

/// One simulated price path, interleaved as [t1, s1, t2, s2, ...].
/// Sojourns are Exp(rate) in every state; the same seed always returns
/// the same path.
#[wasm_bindgen]
pub fn simulate_price_path(
    p_cont: f64,
    p_cont_prime: f64,
    a1: f64,
    a2: f64,
    rate: f64,
    n_jumps: usize,
    seed: u64,
) -> Result<Vec<f64>, JsValue> {
    path_impl(p_cont, p_cont_prime, a1, a2, rate, n_jumps, seed).map_err(|e| JsValue::from_str(&e))
}

fn grid_impl(max_n: u32, max_p: u32) -> Result<Vec<f64>, String> {
    if max_n > 60 || max_p > 60 {
        return Err("grid capped at 60 x 60".into());
    }
    let mut out = Vec::with_capacity((max_n * max_p) as usize);
    for n in 1..=max_n {
        for p in 1..=max_p {
            out.push(contlarrad::prob_up_integral(n, p).map_err(|e| e.to_string())?);
        }
    }
    Ok(out)
}

/// Price-up probability surface, row-major over (n, p) in
/// 1..=max_n x 1..=max_p.
#[wasm_bindgen]
pub fn probup_surface(max_n: u32, max_p: u32) -> Result<Vec<f64>, JsValue> {
    grid_impl(max_n, max_p).map_err(|e| JsValue::from_str(&e))
}
