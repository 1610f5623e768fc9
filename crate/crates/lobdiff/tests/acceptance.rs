//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line with the measured quantities (visible with `--nocapture`).
//!
//! Run with: cargo test -p lobdiff --test acceptance -- --nocapture

use lobdiff::chain::{self, StateModel};
use lobdiff::contlarrad;
use lobdiff::diffusion;
use lobdiff::events::PriceChangeSeq;
use lobdiff::ingest::{self, ParseOptions};
use lobdiff::simulate::{self, CltOptions, SojournSpec};
use lobdiff::stats;
use lobdiff::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::time::Instant;

fn two_state_model(p: f64, q: f64, a1: f64, a2: f64) -> StateModel {
    let pm = vec![vec![p, 1.0 - p], vec![1.0 - q, q]];
    let pi = chain::stationary_distribution(&pm).unwrap();
    StateModel {
        n: 2,
        a: vec![a1, a2],
        p: pm,
        pi_star: pi,
        m: vec![1.0, 1.0],
    }
}

/// Criterion 1: for 1000 random tuples the general n-state formula, the
/// two-state closed form, and (on unit jumps) the one-tick reduction agree
/// within 1e-10. Runtime under a second.
#[test]
fn criterion_01_formula_reduction() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst_pair = 0.0f64;
    let mut worst_tick = 0.0f64;
    for _ in 0..1000 {
        let p: f64 = rng.gen_range(0.0..=0.99);
        let q: f64 = rng.gen_range(0.0..=0.99);
        let a1: f64 = rng.gen_range(f64::MIN_POSITIVE..=1.0);
        let a2: f64 = -rng.gen_range(f64::MIN_POSITIVE..=1.0);

        let model = two_state_model(p, q, a1, a2);
        let closed =
            diffusion::sigma2_two_state(p, q, a1, a2, (model.pi_star[0], model.pi_star[1]))
                .unwrap();
        let general = diffusion::sigma2_general(&model).unwrap();
        worst_pair = worst_pair.max((closed - general).abs());

        let delta = 0.01;
        let unit = two_state_model(p, q, delta, -delta);
        let closed_u =
            diffusion::sigma2_two_state(p, q, delta, -delta, (unit.pi_star[0], unit.pi_star[1]))
                .unwrap();
        let general_u = diffusion::sigma2_general(&unit).unwrap();
        let one_tick = diffusion::sigma2_one_tick(delta, p, q, unit.pi_star[0]).unwrap();
        worst_tick = worst_tick
            .max((closed_u - one_tick).abs())
            .max((general_u - one_tick).abs());
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 1: PASS — max |two-state - general| = {worst_pair:.3e}, \
         max |vs one-tick| = {worst_tick:.3e}, runtime {elapsed:?}"
    );
    assert!(
        worst_pair <= 1e-10,
        "criterion 1: FAIL — reduction gap {worst_pair:.3e}"
    );
    assert!(
        worst_tick <= 1e-10,
        "criterion 1: FAIL — one-tick gap {worst_tick:.3e}"
    );
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "criterion 1: FAIL — runtime {elapsed:?}"
    );
}

/// Criterion 2: printed two-state inputs through the pipeline, checked at
/// printed precision (one unit in the last printed digit).
#[test]
fn criterion_02_table3_arithmetic() {
    let (p, q, a1, a2) = (0.4932, 0.4956, 0.0170, -0.0172);
    let (tau_star, m_tau) = (0.0370, 0.4026);

    let model = two_state_model(p, q, a1, a2);
    let sigma2_closed =
        diffusion::sigma2_two_state(p, q, a1, a2, (model.pi_star[0], model.pi_star[1])).unwrap();
    let sigma2 = diffusion::sigma2_general(&model).unwrap();
    assert!((sigma2 - sigma2_closed).abs() < 1e-12);
    let (cb, cu) = diffusion::diffusion_coefficients(sigma2, tau_star, m_tau).unwrap();

    println!(
        "criterion 2: sigma2 = {sigma2:.6e} (printed 0.0003), coefficients \
         {cb:.6} / {cu:.6} (printed 0.0881 / 0.0267)"
    );
    assert!(
        (sigma2 - 3e-4).abs() <= 1e-4,
        "criterion 2: FAIL — sigma2 {sigma2:.6e} vs printed 0.0003"
    );
    assert!(
        (cu - 0.0267).abs() <= 1e-4,
        "criterion 2: FAIL — unbalanced coefficient {cu:.6} vs printed 0.0267"
    );
    // Exact arithmetic on the printed (4-decimal) inputs yields sigma^2 =
    // 2.8593e-4 and a balanced coefficient of 0.08791, verified three
    // independent ways (closed form, g-vector primitives, spectral
    // autocovariance sum). The published 0.0881 corresponds to
    // sigma^2 = 2.8718e-4, i.e. unrounded jump means (a1 ~ 0.01704, which
    // still prints as 0.0170). The printed inputs therefore cannot land
    // within one unit of the last printed digit of 0.0881.
    assert!(
        (cb - 0.0881).abs() <= 1e-4,
        "criterion 2: FAIL — balanced coefficient {cb:.6} vs printed 0.0881 \
         (printed inputs give 0.08791; 0.0881 needs the unrounded a-values)"
    );
    println!("criterion 2: PASS");
}

/// Criterion 3: Monte Carlo CLT in the unbalanced regime. 200 paths of the
/// fair two-state chain with unit jumps and Exp(1) sojourns, n = 1e5.
#[test]
fn criterion_03_clt_unbalanced() {
    let start = Instant::now();
    let model = two_state_model(0.5, 0.5, 1.0, -1.0);
    let sojourns = vec![SojournSpec::Exponential { rate: 1.0 }; 2];
    let report = simulate::clt_check(
        &model,
        &sojourns,
        &CltOptions {
            n_paths: 200,
            n_jumps: 100_000,
            t: 1.0,
            seed: 2,
            scaling: None,
        },
    )
    .unwrap();
    let elapsed = start.elapsed();
    println!(
        "criterion 3: {} — predicted {:.4}, empirical {:.4}, relative error {:.3}%, \
         KS {:.4}, runtime {elapsed:?}",
        if report.relative_error < 0.05 && report.ks_normal < 0.05 {
            "PASS"
        } else {
            "FAIL"
        },
        report.predicted_coeff,
        report.empirical_coeff,
        100.0 * report.relative_error,
        report.ks_normal,
    );
    assert!(
        report.relative_error < 0.05,
        "criterion 3: FAIL — relative error {:.4}",
        report.relative_error
    );
    assert!(
        report.ks_normal < 0.05,
        "criterion 3: FAIL — KS {:.4}",
        report.ks_normal
    );
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "criterion 3: FAIL — runtime {elapsed:?}"
    );
}

/// Test-local Markov chain walker, independent of the simulate module:
/// returns the variance across batches of the centered partial sums
/// rescaled by sqrt(n). States are drawn branchlessly against u64
/// cumulative thresholds; the RNG is xoshiro (SmallRng), which is plenty
/// for an oracle and much cheaper than a cryptographic stream.
fn mc_variance_of_centered_sums(
    model: &StateModel,
    n_per_sample: usize,
    n_samples: usize,
    seed: u64,
) -> f64 {
    use rand::rngs::SmallRng;
    use rand::RngCore;

    let ns = model.n;
    let scale = 2f64.powi(64);
    let threshold = |acc: f64, last: bool| -> u64 {
        if last {
            u64::MAX
        } else {
            (acc * scale).min(u64::MAX as f64) as u64
        }
    };
    let mut row_thresholds = vec![0u64; ns * ns];
    for i in 0..ns {
        let mut acc = 0.0f64;
        for j in 0..ns {
            acc += model.p[i][j];
            row_thresholds[i * ns + j] = threshold(acc, j + 1 == ns);
        }
    }
    let mut pi_thresholds = vec![0u64; ns];
    let mut acc = 0.0f64;
    for (j, &q) in model.pi_star.iter().enumerate() {
        acc += q;
        pi_thresholds[j] = threshold(acc, j + 1 == ns);
    }
    let a_star: f64 = model
        .pi_star
        .iter()
        .zip(&model.a)
        .map(|(&pi, &a)| pi * a)
        .sum();
    let b: Vec<f64> = model.a.iter().map(|&a| a - a_star).collect();

    let values: Vec<f64> = (0..n_samples)
        .into_par_iter()
        .map(|sample_idx| {
            let mut rng = SmallRng::seed_from_u64(seed.wrapping_add(sample_idx as u64));
            let x = rng.next_u64();
            let mut state: usize = pi_thresholds[..ns - 1]
                .iter()
                .map(|&c| usize::from(x >= c))
                .sum();
            let mut sum = 0.0f64;
            for _ in 0..n_per_sample {
                let x = rng.next_u64();
                let row = &row_thresholds[state * ns..state * ns + ns - 1];
                let j: usize = row.iter().map(|&c| usize::from(x >= c)).sum();
                state = j;
                sum += b[j];
            }
            sum / (n_per_sample as f64).sqrt()
        })
        .collect();

    let mean = values.iter().sum::<f64>() / values.len() as f64;
    values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64
}

/// Criterion 4: n-state sigma^2 against the Monte Carlo variance of the
/// centered partial sums at n = 1e6, for the uniform 3-state chain with
/// a = (-1, 0, 1).
#[test]
fn criterion_04_sigma2_nstate_oracle() {
    let start = Instant::now();
    let third = 1.0 / 3.0;
    let p = vec![vec![third; 3]; 3];
    let model = StateModel {
        n: 3,
        a: vec![-1.0, 0.0, 1.0],
        pi_star: chain::stationary_distribution(&p).unwrap(),
        p,
        m: vec![1.0; 3],
    };
    let sigma2 = diffusion::sigma2_general(&model).unwrap();

    let mc = mc_variance_of_centered_sums(&model, 1_000_000, 6000, 0);
    let rel = (sigma2 - mc).abs() / mc;
    let elapsed = start.elapsed();
    println!(
        "criterion 4: {} — sigma2 {sigma2:.6} vs Monte Carlo {mc:.6} \
         (relative error {:.3}%), runtime {elapsed:?}",
        if rel < 0.02 { "PASS" } else { "FAIL" },
        100.0 * rel
    );
    assert!(rel < 0.02, "criterion 4: FAIL — relative error {rel:.4}");
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "criterion 4: FAIL — runtime {elapsed:?}"
    );
}

/// Race oracle: two independent level-1 queues drain under symmetric unit
/// order flow; each combined event picks a side and a sign. Returns the
/// fraction of races the ask queue (p) loses first, i.e. the price goes up.
fn race_oracle(n: u32, p: u32, trials: u64, seed: u64) -> f64 {
    const MAX_STEPS_PER_RACE: u64 = 10_000_000;
    let wins: u64 = (0..trials >> 14)
        .into_par_iter()
        .map(|batch| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(batch);
            let mut up = 0u64;
            for _ in 0..(1u64 << 14) {
                let mut qa = p as i64;
                let mut qb = n as i64;
                let mut bits: u64 = 0;
                let mut left = 0u32;
                let mut steps = 0u64;
                loop {
                    if left < 2 {
                        bits = rng.gen::<u64>();
                        left = 64;
                    }
                    let side_ask = bits & 1 == 1;
                    let down = bits & 2 == 2;
                    bits >>= 2;
                    left -= 2;
                    let delta = if down { -1 } else { 1 };
                    if side_ask {
                        qa += delta;
                        if qa == 0 {
                            up += 1;
                            break;
                        }
                    } else {
                        qb += delta;
                        if qb == 0 {
                            break;
                        }
                    }
                    steps += 1;
                    if steps >= MAX_STEPS_PER_RACE {
                        // Truncated race (probability ~ np/steps); drop it.
                        break;
                    }
                }
            }
            up
        })
        .sum();
    wins as f64 / trials as f64
}

/// Criterion 5: the price-up integral is 1/2 on the diagonal, complementary
/// off it, and matches the random-walk race oracle within 0.005.
#[test]
fn criterion_05_prob_up_integral() {
    let start = Instant::now();
    for n in 1..=20u32 {
        let v = contlarrad::prob_up_integral(n, n).unwrap();
        assert!(
            (v - 0.5).abs() <= 1e-6,
            "criterion 5: FAIL — p_up({n},{n}) = {v}"
        );
    }
    let mut worst_comp = 0.0f64;
    for n in 1..=20u32 {
        for p in 1..=20u32 {
            let v = contlarrad::prob_up_integral(n, p).unwrap();
            let w = contlarrad::prob_up_integral(p, n).unwrap();
            worst_comp = worst_comp.max((v + w - 1.0).abs());
        }
    }
    assert!(
        worst_comp <= 2e-6,
        "criterion 5: FAIL — complementarity gap {worst_comp:.3e}"
    );

    let trials: u64 = 1 << 20; // ~1.05e6 per cell
    let mut worst_race = 0.0f64;
    let mut worst_cell = (0u32, 0u32);
    for n in 1..=5u32 {
        for p in 1..=5u32 {
            let model = contlarrad::prob_up_integral(n, p).unwrap();
            let mc = race_oracle(n, p, trials, 500 + (n * 8 + p) as u64);
            let gap = (model - mc).abs();
            if gap > worst_race {
                worst_race = gap;
                worst_cell = (n, p);
            }
        }
    }
    let elapsed = start.elapsed();
    println!(
        "criterion 5: {} — diagonal and complementarity within 2e-6, race oracle \
         worst gap {worst_race:.4} at {worst_cell:?} over {trials} trials, runtime {elapsed:?}",
        if worst_race < 0.005 { "PASS" } else { "FAIL" }
    );
    assert!(
        worst_race < 0.005,
        "criterion 5: FAIL — race gap {worst_race:.4} at {worst_cell:?}"
    );
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "criterion 5: FAIL — runtime {elapsed:?}"
    );
}

/// Criterion 6: stationary solver on 1000 random irreducible matrices up
/// to n = 20, residual at most 1e-10; the identity matrix is rejected.
#[test]
fn criterion_06_stationary_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(2..=20);
        let p: Vec<Vec<f64>> = (0..n)
            .map(|_| {
                let row: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
                let s: f64 = row.iter().sum();
                row.into_iter().map(|v| v / s).collect()
            })
            .collect();
        let pi = chain::stationary_distribution(&p).unwrap();
        worst = worst.max(chain::stationary_residual(&p, &pi));
        let total: f64 = pi.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
    let identity = vec![
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, 0.0, 1.0],
    ];
    let rejected = matches!(
        chain::stationary_distribution(&identity),
        Err(Error::ReducibleChain)
    );
    println!(
        "criterion 6: {} — worst residual {worst:.3e} over 1000 random chains, \
         identity rejected: {rejected}",
        if worst <= 1e-10 && rejected {
            "PASS"
        } else {
            "FAIL"
        }
    );
    assert!(worst <= 1e-10, "criterion 6: FAIL — residual {worst:.3e}");
    assert!(rejected, "criterion 6: FAIL — identity not rejected");
}

/// Criterion 7: simulate 1e6 jumps from a known 4-state model and
/// re-estimate everything through the data pipeline: quantile binning,
/// transition counts, stationary solve, sigma^2.
#[test]
fn criterion_07_roundtrip_estimation() {
    let p = vec![
        vec![0.40, 0.15, 0.30, 0.15],
        vec![0.35, 0.20, 0.30, 0.15],
        vec![0.25, 0.15, 0.40, 0.20],
        vec![0.30, 0.15, 0.35, 0.20],
    ];
    let truth = StateModel {
        n: 4,
        // Layout matches the binning convention: positive ascending, then
        // negative ascending.
        a: vec![0.01, 0.03, -0.03, -0.01],
        pi_star: chain::stationary_distribution(&p).unwrap(),
        p,
        m: vec![1.0; 4],
    };
    truth.validate().unwrap();
    let sigma2_true = diffusion::sigma2_general(&truth).unwrap();

    let sojourns = vec![SojournSpec::Exponential { rate: 1.0 }; 4];
    let path = simulate::simulate_path(&truth, &sojourns, 1_000_000, 707).unwrap();

    // Rebuild the observable sequence a(X_k), tau_k and re-estimate.
    let jumps: Vec<f64> = path.states.iter().map(|&s| truth.a[s]).collect();
    let mut sojourn_obs = Vec::with_capacity(path.times.len());
    let mut prev = 0.0;
    for &t in &path.times {
        sojourn_obs.push(t - prev);
        prev = t;
    }
    let pcs = PriceChangeSeq {
        jumps,
        sojourns: sojourn_obs,
        change_times: path.times.clone(),
    };
    let (fitted, binning) = chain::fit_state_model(&pcs, 4).unwrap();
    assert_eq!(
        binning.spec.n_effective, 4,
        "criterion 7: binning collapsed"
    );

    let mut worst_a = 0.0f64;
    for (fa, ta) in fitted.a.iter().zip(&truth.a) {
        worst_a = worst_a.max((fa - ta).abs());
    }
    assert!(
        worst_a < 1e-12,
        "criterion 7: FAIL — a recovery gap {worst_a:.3e}"
    );

    let mut worst_p = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            worst_p = worst_p.max((fitted.p[i][j] - truth.p[i][j]).abs());
        }
    }
    let mut worst_pi = 0.0f64;
    for (fp, tp) in fitted.pi_star.iter().zip(&truth.pi_star) {
        worst_pi = worst_pi.max((fp - tp).abs());
    }
    let sigma2_hat = diffusion::sigma2_general(&fitted).unwrap();
    let rel_sigma = (sigma2_hat - sigma2_true).abs() / sigma2_true;
    println!(
        "criterion 7: {} — max |P̂-P| = {worst_p:.5}, max |π̂-π| = {worst_pi:.5}, \
         sigma2 {sigma2_hat:.6e} vs {sigma2_true:.6e} ({:.3}% off)",
        if worst_p < 0.01 && rel_sigma < 0.03 {
            "PASS"
        } else {
            "FAIL"
        },
        100.0 * rel_sigma
    );
    assert!(
        worst_p < 0.01,
        "criterion 7: FAIL — transition error {worst_p:.5}"
    );
    assert!(
        rel_sigma < 0.03,
        "criterion 7: FAIL — sigma2 error {rel_sigma:.4}"
    );
}

/// Criterion 8: the regression harness is exact on synthetic linear data;
/// the published adjusted-R^2 targets stay recorded for runs against the
/// full 40-symbol dataset, which is not distributed with the repository.
#[test]
fn criterion_08_regression_harness() {
    // Golden targets for the full dataset (balanced, unbalanced):
    const TARGET_TWO_STATE: (f64, f64) = (0.9788, 0.9821);
    const TARGET_MANY_STATE: (f64, f64) = (0.9814, 0.9839);
    const TARGET_ONE_TICK: (f64, f64) = (0.3916, 0.3813);

    let x: Vec<f64> = (0..10).map(|i| 0.5 + i as f64).collect();
    let y: Vec<f64> = x.iter().map(|v| 3.5 * v - 0.25).collect();
    let fit = stats::linear_fit_adjr2(&x, &y).unwrap();
    assert!(
        (fit.adj_r2 - 1.0).abs() <= 1e-12,
        "criterion 8: FAIL — exact-line adj R^2 {}",
        fit.adj_r2
    );
    println!(
        "criterion 8: PASS — exact line gives adj R^2 = {:.15}; golden targets recorded \
         (two-state {TARGET_TWO_STATE:?}, many-state {TARGET_MANY_STATE:?}, \
         one-tick {TARGET_ONE_TICK:?}) pending the 40-symbol dataset",
        fit.adj_r2
    );
}

/// Criterion 9: golden-file parse of the 1000-row excerpt with exact tick
/// conversion and row-accurate malformed-row reporting.
#[test]
fn criterion_09_parser_golden_file() {
    let start = Instant::now();
    let msg_raw = include_str!("data/lobster_message_1000.csv");
    let ob_raw = include_str!("data/lobster_orderbook_1000.csv");

    let (events, quotes) = ingest::parse_lobster(
        msg_raw.as_bytes(),
        ob_raw.as_bytes(),
        &ParseOptions::default(),
    )
    .unwrap();
    assert_eq!(events.len(), 1000, "criterion 9: FAIL — row count");
    assert_eq!(quotes.len(), 1000, "criterion 9: FAIL — quote count");

    // Tick conversion must be exact against the raw integer fields.
    for (row, (line, e)) in msg_raw.lines().zip(&events).enumerate() {
        let price_e4: i64 = line.split(',').nth(4).unwrap().parse().unwrap();
        assert_eq!(
            e.price_ticks * 100,
            price_e4,
            "criterion 9: FAIL — tick conversion at row {}",
            row + 1
        );
    }
    for (row, (line, q)) in ob_raw.lines().zip(&quotes).enumerate() {
        let f: Vec<i64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(q.best_ask_ticks * 100, f[0], "row {}", row + 1);
        assert_eq!(q.best_bid_ticks * 100, f[2], "row {}", row + 1);
    }

    // First row, spot-checked field by field.
    let e0 = events[0];
    assert_eq!(e0.kind, ingest::EventKind::LimitSubmit);
    assert_eq!(e0.size, 200);
    assert_eq!(e0.price_ticks, 58590);
    assert_eq!(e0.side, Some(ingest::Side::Bid));

    // Corrupt one row and expect the error to carry its 1-based number.
    let corrupted: String = msg_raw
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i == 499 {
                "34210.0,1,1,oops,5859000,1".to_string()
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n");
    let err = ingest::parse_lobster(
        corrupted.as_bytes(),
        ob_raw.as_bytes(),
        &ParseOptions::default(),
    )
    .unwrap_err();
    let row_ok = matches!(err, Error::MalformedRow { row: 500, .. });
    let elapsed = start.elapsed();
    println!(
        "criterion 9: {} — 1000 rows parsed, tick conversion exact, malformed row \
         reported at 500: {row_ok}, runtime {elapsed:?}",
        if row_ok { "PASS" } else { "FAIL" }
    );
    assert!(row_ok, "criterion 9: FAIL — wrong error: {err}");
    assert!(
        elapsed.as_secs_f64() < 1.0,
        "criterion 9: FAIL — runtime {elapsed:?}"
    );
}
