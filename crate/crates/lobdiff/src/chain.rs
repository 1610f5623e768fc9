//! The n-state Markov chain over mid-price jumps: quantile state binning,
//! transition-matrix estimation, stationary distribution, and conditional
//! sojourn means.
//!
//! States are laid out positive bins first (ascending jump value), then
//! negative bins (ascending). With two states this reduces to the sign
//! assignment: positive jumps are state 0, negative jumps state 1, so the
//! per-state values come out as `(mean positive, mean negative)`.

use crate::error::{Error, Result};
use crate::events::PriceChangeSeq;
use crate::linalg::{self, SquareMatrix};
use serde::{Deserialize, Serialize};

/// Row-sum slack accepted when validating a stochastic matrix.
const ROW_SUM_TOL: f64 = 1e-9;
/// Residual bound enforced on the stationary-distribution solve.
const STATIONARY_RESIDUAL_TOL: f64 = 1e-10;

/// Quantile boundaries used to bin jumps, per sign.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinningSpec {
    pub n_requested: usize,
    /// Ascending, deduplicated boundaries for negative jumps.
    pub negative_boundaries: Vec<f64>,
    /// Ascending, deduplicated boundaries for positive jumps.
    pub positive_boundaries: Vec<f64>,
    /// State count after collapsing duplicate boundaries and empty bins.
    pub n_effective: usize,
}

/// Result of binning a jump sequence: the spec, the per-jump state
/// assignment, and the per-state mean jump values.
#[derive(Debug, Clone)]
pub struct Binning {
    pub spec: BinningSpec,
    /// 0-based state index per jump.
    pub states: Vec<usize>,
    /// Mean jump value per state (the model's a(i)).
    pub a: Vec<f64>,
}

/// Fitted n-state model: per-state jump values, transition matrix,
/// stationary distribution, and conditional mean sojourns.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StateModel {
    pub n: usize,
    pub a: Vec<f64>,
    #[serde(rename = "P")]
    pub p: Vec<Vec<f64>>,
    pub pi_star: Vec<f64>,
    pub m: Vec<f64>,
}

impl StateModel {
    /// Check the structural invariants: shapes, row sums, positivity of
    /// pi*, its residual, and irreducibility.
    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 1 || self.a.len() != n || self.p.len() != n || self.pi_star.len() != n {
            return Err(Error::InvalidParameter(
                "state model fields have inconsistent dimensions".into(),
            ));
        }
        if self.m.len() != n {
            return Err(Error::InvalidParameter(
                "sojourn mean vector length differs from n".into(),
            ));
        }
        for (i, row) in self.p.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "row {i} is not length {n}"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL
                || row.iter().any(|&v| !(0.0..=1.0 + 1e-12).contains(&v))
            {
                return Err(Error::InvalidParameter(format!(
                    "row {i} is not a probability distribution (sum {s})"
                )));
            }
        }
        if !is_irreducible(&self.p) {
            return Err(Error::ReducibleChain);
        }
        if self.pi_star.iter().any(|&v| v <= 0.0) {
            return Err(Error::Numerical(
                "stationary entries must be positive".into(),
            ));
        }
        let res = stationary_residual(&self.p, &self.pi_star);
        if res > STATIONARY_RESIDUAL_TOL {
            return Err(Error::Numerical(format!(
                "stationary residual {res:.3e} exceeds {STATIONARY_RESIDUAL_TOL:.1e}"
            )));
        }
        Ok(())
    }

    /// Relabel states by `perm`, where `perm[new] = old`. Conjugates P and
    /// permutes a, pi*, and m consistently.
    pub fn permuted(&self, perm: &[usize]) -> StateModel {
        let n = self.n;
        assert_eq!(perm.len(), n);
        let mut p = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                p[i][j] = self.p[perm[i]][perm[j]];
            }
        }
        StateModel {
            n,
            a: perm.iter().map(|&o| self.a[o]).collect(),
            p,
            pi_star: perm.iter().map(|&o| self.pi_star[o]).collect(),
            m: perm.iter().map(|&o| self.m[o]).collect(),
        }
    }
}

/// Max-norm of pi P - pi.
pub fn stationary_residual(p: &[Vec<f64>], pi: &[f64]) -> f64 {
    let n = pi.len();
    let mut worst = 0.0f64;
    for j in 0..n {
        let mut s = 0.0;
        for i in 0..n {
            s += pi[i] * p[i][j];
        }
        worst = worst.max((s - pi[j]).abs());
    }
    worst
}

/// Two-state values: mean of the positive jumps and mean of the negative
/// jumps. Errors when either sign is absent.
pub fn two_state_values(jumps: &[f64]) -> Result<(f64, f64)> {
    let (mut pos_sum, mut pos_n, mut neg_sum, mut neg_n) = (0.0, 0usize, 0.0, 0usize);
    for &j in jumps {
        if j > 0.0 {
            pos_sum += j;
            pos_n += 1;
        } else if j < 0.0 {
            neg_sum += j;
            neg_n += 1;
        }
    }
    if pos_n == 0 {
        return Err(Error::MissingState("positive"));
    }
    if neg_n == 0 {
        return Err(Error::MissingState("negative"));
    }
    Ok((pos_sum / pos_n as f64, neg_sum / neg_n as f64))
}

/// Empirical quantile with linear interpolation between order statistics
/// (the common "type 7" definition). `sorted` must be ascending, non-empty.
fn quantile_linear(sorted: &[f64], level: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * level;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

/// Bin one sign's jumps into at most `m` states. Returns the deduplicated
/// boundaries and, per jump, a local 0-based bin index; empty bins are
/// dropped and indices renumbered.
fn bin_one_sign(values: &[f64], m: usize) -> (Vec<f64>, Vec<usize>, Vec<f64>) {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mut boundaries = Vec::new();
    for k in 1..m {
        let q = quantile_linear(&sorted, k as f64 / m as f64);
        // Equal quantile values collapse; this is what shrinks the state count.
        if boundaries.last().is_none_or(|&last| q > last) {
            boundaries.push(q);
        }
    }

    // A value equal to a boundary stays in the lower bin.
    let raw_bin = |x: f64| boundaries.iter().filter(|&&b| b < x).count();

    let n_bins = boundaries.len() + 1;
    let mut counts = vec![0usize; n_bins];
    let mut sums = vec![0.0f64; n_bins];
    let raw: Vec<usize> = values
        .iter()
        .map(|&x| {
            let b = raw_bin(x);
            counts[b] += 1;
            sums[b] += x;
            b
        })
        .collect();

    // Renumber over occupied bins only.
    let mut remap = vec![usize::MAX; n_bins];
    let mut a = Vec::new();
    let mut kept_boundaries = Vec::new();
    let mut next = 0usize;
    for b in 0..n_bins {
        if counts[b] > 0 {
            remap[b] = next;
            if next > 0 {
                // Keep the boundary that separates this bin from the previous kept one.
                kept_boundaries.push(boundaries[b - 1]);
            }
            a.push(sums[b] / counts[b] as f64);
            next += 1;
        }
    }
    let local = raw.into_iter().map(|b| remap[b]).collect();
    (kept_boundaries, local, a)
}

/// Quantile-based state binning: negative and positive jumps are split and
/// binned separately by evenly spaced quantiles. Duplicate boundaries and
/// empty bins reduce the effective state count.
///
/// Layout: positive bins first (ascending a), then negative bins (ascending
/// a), so `n_requested = 2` reduces to the sign assignment.
pub fn quantile_binning(jumps: &[f64], n_requested: usize) -> Result<Binning> {
    if n_requested < 2 {
        return Err(Error::InvalidParameter(format!(
            "n_requested must be at least 2, got {n_requested}"
        )));
    }
    let pos: Vec<f64> = jumps.iter().copied().filter(|&j| j > 0.0).collect();
    let neg: Vec<f64> = jumps.iter().copied().filter(|&j| j < 0.0).collect();
    if pos.is_empty() {
        return Err(Error::MissingState("positive"));
    }
    if neg.is_empty() {
        return Err(Error::MissingState("negative"));
    }
    if jumps.contains(&0.0) {
        return Err(Error::InvalidParameter("jumps must be nonzero".into()));
    }

    let m_neg = n_requested / 2;
    let m_pos = n_requested - m_neg;

    let (pos_bounds, pos_local, pos_a) = bin_one_sign(&pos, m_pos);
    let (neg_bounds, neg_local, neg_a) = bin_one_sign(&neg, m_neg);

    let n_pos = pos_a.len();
    let n_effective = n_pos + neg_a.len();
    if n_effective < 2 {
        return Err(Error::DegenerateBinning);
    }

    let mut a = pos_a;
    a.extend_from_slice(&neg_a);

    let mut pos_iter = pos_local.into_iter();
    let mut neg_iter = neg_local.into_iter();
    let states: Vec<usize> = jumps
        .iter()
        .map(|&j| {
            if j > 0.0 {
                pos_iter.next().unwrap()
            } else {
                n_pos + neg_iter.next().unwrap()
            }
        })
        .collect();

    Ok(Binning {
        spec: BinningSpec {
            n_requested,
            negative_boundaries: neg_bounds,
            positive_boundaries: pos_bounds,
            n_effective,
        },
        states,
        a,
    })
}

/// Relative transition frequencies. Every state in `0..n` must occur at
/// least once as a source (i.e. before the last position).
pub fn estimate_transition_matrix(states: &[usize], n: usize) -> Result<Vec<Vec<f64>>> {
    if states.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least two states to count transitions".into(),
        ));
    }
    let mut counts = vec![vec![0u64; n]; n];
    for w in states.windows(2) {
        let (from, to) = (w[0], w[1]);
        if from >= n || to >= n {
            return Err(Error::InvalidParameter(format!(
                "state index {} out of range for n={n}",
                from.max(to)
            )));
        }
        counts[from][to] += 1;
    }
    let mut p = vec![vec![0.0; n]; n];
    for i in 0..n {
        let total: u64 = counts[i].iter().sum();
        if total == 0 {
            return Err(Error::UndefinedRow { state: i });
        }
        for j in 0..n {
            p[i][j] = counts[i][j] as f64 / total as f64;
        }
    }
    Ok(p)
}

/// Strong connectivity of the positive-entry digraph.
pub fn is_irreducible(p: &[Vec<f64>]) -> bool {
    let n = p.len();
    if n == 0 {
        return false;
    }
    let reach = |transpose: bool| -> usize {
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for v in 0..n {
                let edge = if transpose { p[v][u] } else { p[u][v] };
                if edge > 0.0 && !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count
    };
    reach(false) == n && reach(true) == n
}

/// Stationary distribution of a row-stochastic irreducible matrix, solved
/// as the balance equations with one equation replaced by normalization.
pub fn stationary_distribution(p: &[Vec<f64>]) -> Result<Vec<f64>> {
    let n = p.len();
    if n == 0 {
        return Err(Error::InvalidParameter("empty matrix".into()));
    }
    for (i, row) in p.iter().enumerate() {
        if row.len() != n {
            return Err(Error::InvalidParameter(format!("row {i} has wrong length")));
        }
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > ROW_SUM_TOL || row.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "row {i} is not a probability distribution (sum {s})"
            )));
        }
    }
    if !is_irreducible(p) {
        return Err(Error::ReducibleChain);
    }

    // (P^T - I) pi = 0 with the last balance row swapped for sum(pi) = 1.
    let mut rows = vec![vec![0.0; n]; n];
    for i in 0..n - 1 {
        for j in 0..n {
            rows[i][j] = p[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    rows[n - 1] = vec![1.0; n];
    let mut rhs = vec![0.0; n];
    rhs[n - 1] = 1.0;

    let a = SquareMatrix::from_rows(&rows);
    let pi = linalg::solve(&a, &rhs)
        .ok_or_else(|| Error::Numerical("stationary system is singular".into()))?;

    if pi.iter().any(|&v| !v.is_finite() || v <= 0.0) {
        return Err(Error::Numerical(
            "stationary solve produced non-positive entries".into(),
        ));
    }
    let res = stationary_residual(p, &pi);
    if res > STATIONARY_RESIDUAL_TOL {
        return Err(Error::Numerical(format!(
            "stationary residual {res:.3e} exceeds tolerance"
        )));
    }
    Ok(pi)
}

/// Conditional mean sojourns m(i) = mean of the tau_k whose previous state
/// is i. `sojourns[k]` is the sojourn ending at change k, so pairs are
/// `(states[k-1], sojourns[k])`; the first sojourn has no predecessor and
/// is skipped.
pub fn conditional_sojourn_means(states: &[usize], sojourns: &[f64], n: usize) -> Result<Vec<f64>> {
    if states.len() != sojourns.len() {
        return Err(Error::InvalidParameter(
            "states and sojourns must have equal length".into(),
        ));
    }
    if states.len() < 2 {
        return Err(Error::InsufficientData(
            "need at least two changes for conditional sojourns".into(),
        ));
    }
    let mut sums = vec![0.0f64; n];
    let mut counts = vec![0u64; n];
    for k in 1..states.len() {
        let prev = states[k - 1];
        if prev >= n {
            return Err(Error::InvalidParameter(format!(
                "state index {prev} out of range for n={n}"
            )));
        }
        sums[prev] += sojourns[k];
        counts[prev] += 1;
    }
    let mut m = vec![0.0; n];
    for i in 0..n {
        if counts[i] == 0 {
            return Err(Error::UndefinedSojournMean { state: i });
        }
        m[i] = sums[i] / counts[i] as f64;
    }
    Ok(m)
}

/// Fit the full n-state model from a price-change sequence: binning,
/// transition matrix, stationary distribution, and sojourn means.
pub fn fit_state_model(pcs: &PriceChangeSeq, n_requested: usize) -> Result<(StateModel, Binning)> {
    let binning = quantile_binning(&pcs.jumps, n_requested)?;
    let n = binning.spec.n_effective;
    let p = estimate_transition_matrix(&binning.states, n)?;
    let pi_star = stationary_distribution(&p)?;
    let m = conditional_sojourn_means(&binning.states, &pcs.sojourns, n)?;
    let model = StateModel {
        n,
        a: binning.a.clone(),
        p,
        pi_star,
        m,
    };
    model.validate()?;
    Ok((model, binning))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_state_values_basic() {
        let (a1, a2) = two_state_values(&[1.0, 3.0, -2.0]).unwrap();
        assert_eq!(a1, 2.0);
        assert_eq!(a2, -2.0);
    }

    #[test]
    fn two_state_values_one_signed_errors() {
        assert!(matches!(
            two_state_values(&[1.0, 2.0]),
            Err(Error::MissingState("negative"))
        ));
    }

    #[test]
    fn binning_matches_hand_executed_four_state_case() {
        // Negative {-3},{-1}; positive median boundary at 1.5 splits
        // {1,1} from {2,4}.
        let jumps = [-3.0, -1.0, 1.0, 1.0, 2.0, 4.0];
        let b = quantile_binning(&jumps, 4).unwrap();
        assert_eq!(b.spec.n_effective, 4);
        assert_eq!(b.a, vec![1.0, 3.0, -3.0, -1.0]);
        assert_eq!(b.states, vec![2, 3, 0, 0, 1, 1]);
    }

    /// Brute-force reference for the binning procedure: per sign, compute
    /// the interpolated quantile boundaries directly, assign by scanning
    /// all boundaries, and drop empty bins. Kept deliberately naive.
    fn brute_force_binning(jumps: &[f64], n: usize) -> (Vec<usize>, Vec<f64>) {
        let m_neg = n / 2;
        let m_pos = n - m_neg;
        let sign_bins = |vals: &[f64], m: usize| -> (Vec<Vec<f64>>, Vec<usize>) {
            let mut sorted = vals.to_vec();
            sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut bounds: Vec<f64> = (1..m)
                .map(|k| {
                    let h = (sorted.len() - 1) as f64 * k as f64 / m as f64;
                    let lo = h.floor() as usize;
                    sorted[lo] + (h - lo as f64) * (sorted[h.ceil() as usize] - sorted[lo])
                })
                .collect();
            bounds.dedup();
            let assign: Vec<usize> = vals
                .iter()
                .map(|&x| bounds.iter().filter(|&&b| b < x).count())
                .collect();
            let mut bins: Vec<Vec<f64>> = vec![Vec::new(); bounds.len() + 1];
            for (&x, &s) in vals.iter().zip(&assign) {
                bins[s].push(x);
            }
            // Renumber skipping empties.
            let occupied: Vec<usize> = (0..bins.len()).filter(|&b| !bins[b].is_empty()).collect();
            let remap: Vec<usize> = (0..bins.len())
                .map(|b| occupied.iter().position(|&o| o == b).unwrap_or(usize::MAX))
                .collect();
            (
                occupied.iter().map(|&b| bins[b].clone()).collect(),
                assign.into_iter().map(|s| remap[s]).collect(),
            )
        };
        let pos: Vec<f64> = jumps.iter().copied().filter(|&x| x > 0.0).collect();
        let neg: Vec<f64> = jumps.iter().copied().filter(|&x| x < 0.0).collect();
        let (pos_bins, pos_assign) = sign_bins(&pos, m_pos);
        let (neg_bins, neg_assign) = sign_bins(&neg, m_neg);
        let n_pos = pos_bins.len();
        let mut a: Vec<f64> = pos_bins
            .iter()
            .chain(neg_bins.iter())
            .map(|b| b.iter().sum::<f64>() / b.len() as f64)
            .collect();
        let (mut pi, mut ni) = (pos_assign.into_iter(), neg_assign.into_iter());
        let states: Vec<usize> = jumps
            .iter()
            .map(|&x| {
                if x > 0.0 {
                    pi.next().unwrap()
                } else {
                    n_pos + ni.next().unwrap()
                }
            })
            .collect();
        a.shrink_to_fit();
        (states, a)
    }

    #[test]
    fn binning_agrees_with_brute_force_on_random_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..200 {
            let len = rng.gen_range(8..200);
            let jumps: Vec<f64> = (0..len)
                .map(|_| {
                    let mag = rng.gen_range(1..=6) as f64;
                    if rng.gen_bool(0.5) {
                        mag
                    } else {
                        -mag
                    }
                })
                .collect();
            let n_req = rng.gen_range(2..=7);
            let (Ok(b), (bf_states, bf_a)) = (
                quantile_binning(&jumps, n_req),
                brute_force_binning(&jumps, n_req),
            ) else {
                continue;
            };
            assert_eq!(b.states, bf_states, "trial {trial}");
            assert_eq!(b.a.len(), bf_a.len());
            for (x, y) in b.a.iter().zip(&bf_a) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn all_equal_positive_jumps_collapse() {
        // Two requested positive states cannot be told apart when every
        // positive jump is the same value.
        let jumps = [1.0, 1.0, 1.0, -1.0, -2.0, 1.0];
        let b = quantile_binning(&jumps, 4).unwrap();
        let n_pos_states = b
            .states
            .iter()
            .zip(&jumps)
            .filter(|(_, &j)| j > 0.0)
            .map(|(&s, _)| s)
            .collect::<std::collections::BTreeSet<_>>()
            .len();
        assert_eq!(n_pos_states, 1);
        assert_eq!(b.spec.n_effective, 3);
    }

    #[test]
    fn binning_with_two_states_equals_sign_assignment() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let jumps: Vec<f64> = (0..500)
            .map(|_| {
                let v: f64 = rng.gen_range(-5.0..5.0);
                if v == 0.0 {
                    1.0
                } else {
                    v
                }
            })
            .collect();
        let b = quantile_binning(&jumps, 2).unwrap();
        let (a1, a2) = two_state_values(&jumps).unwrap();
        assert_eq!(b.a, vec![a1, a2]);
        for (&s, &j) in b.states.iter().zip(&jumps) {
            assert_eq!(s, if j > 0.0 { 0 } else { 1 });
        }
    }

    #[test]
    fn transition_matrix_alternating() {
        let p = estimate_transition_matrix(&[0, 1, 0, 1], 2).unwrap();
        assert_eq!(p, vec![vec![0.0, 1.0], vec![1.0, 0.0]]);
    }

    #[test]
    fn transition_matrix_missing_source() {
        let err = estimate_transition_matrix(&[0, 0, 0], 2).unwrap_err();
        assert!(matches!(err, Error::UndefinedRow { state: 1 }));
    }

    #[test]
    fn transition_rows_sum_exactly_for_count_ratios() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let states: Vec<usize> = (0..5000).map(|_| rng.gen_range(0..4)).collect();
        let p = estimate_transition_matrix(&states, 4).unwrap();
        for row in &p {
            let s: f64 = row.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stationary_symmetric_two_state() {
        let p = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let pi = stationary_distribution(&p).unwrap();
        assert!((pi[0] - 0.5).abs() < 1e-14);
        assert!((pi[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn stationary_from_printed_two_state_inputs() {
        // p_cont = 0.4932, p_cont' = 0.4956 gives pi* ~ (0.49882, 0.50118).
        let (p, q) = (0.4932, 0.4956);
        let pm = vec![vec![p, 1.0 - p], vec![1.0 - q, q]];
        let pi = stationary_distribution(&pm).unwrap();
        let expect0 = (1.0 - q) / ((1.0 - p) + (1.0 - q));
        assert!((pi[0] - expect0).abs() < 1e-12);
        // Exact value is 0.4988133; the rounded reference is 0.49882.
        assert!((pi[0] - 0.49882).abs() < 1.5e-5);
        assert!((pi[1] - 0.50118).abs() < 1.5e-5);
    }

    #[test]
    fn identity_is_reducible() {
        let p = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(matches!(
            stationary_distribution(&p),
            Err(Error::ReducibleChain)
        ));
    }

    #[test]
    fn two_state_detailed_balance_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let p: f64 = rng.gen_range(0.0..0.99);
            let q: f64 = rng.gen_range(0.0..0.99);
            let pm = vec![vec![p, 1.0 - p], vec![1.0 - q, q]];
            let pi = stationary_distribution(&pm).unwrap();
            assert!((pi[0] * (1.0 - p) - pi[1] * (1.0 - q)).abs() < 1e-12);
        }
    }

    #[test]
    fn permutation_roundtrip_consistency() {
        let model = StateModel {
            n: 3,
            a: vec![0.5, 1.5, -1.0],
            p: vec![
                vec![0.2, 0.3, 0.5],
                vec![0.4, 0.1, 0.5],
                vec![0.25, 0.25, 0.5],
            ],
            pi_star: stationary_distribution(&[
                vec![0.2, 0.3, 0.5],
                vec![0.4, 0.1, 0.5],
                vec![0.25, 0.25, 0.5],
            ])
            .unwrap(),
            m: vec![1.0, 2.0, 3.0],
        };
        model.validate().unwrap();
        let perm = [2usize, 0, 1];
        let pm = model.permuted(&perm);
        pm.validate().unwrap();
        // Applying the inverse permutation restores the original.
        let mut inv = [0usize; 3];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let back = pm.permuted(&inv);
        for i in 0..3 {
            assert!((back.a[i] - model.a[i]).abs() < 1e-15);
            assert!((back.pi_star[i] - model.pi_star[i]).abs() < 1e-15);
            for j in 0..3 {
                assert!((back.p[i][j] - model.p[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn conditional_sojourns_follow_previous_state() {
        // states (1,2,1) with tau_2 = 4, tau_3 = 6 in 1-based terms.
        let states = [0usize, 1, 0];
        let sojourns = [99.0, 4.0, 6.0]; // first entry has no predecessor
        let m = conditional_sojourn_means(&states, &sojourns, 2).unwrap();
        assert_eq!(m, vec![4.0, 6.0]);
    }

    #[test]
    fn conditional_sojourns_constant() {
        let states = [0usize, 1, 0, 1, 0];
        let sojourns = [2.0; 5];
        let m = conditional_sojourn_means(&states, &sojourns, 2).unwrap();
        assert_eq!(m, vec![2.0, 2.0]);
    }

    #[test]
    fn conditional_sojourns_missing_predecessor() {
        // State 1 appears only at the last position.
        let states = [0usize, 0, 1];
        let sojourns = [1.0, 1.0, 1.0];
        assert!(matches!(
            conditional_sojourn_means(&states, &sojourns, 2),
            Err(Error::UndefinedSojournMean { state: 1 })
        ));
    }

    #[test]
    fn state_model_json_shape() {
        let model = StateModel {
            n: 2,
            a: vec![0.017, -0.0172],
            p: vec![vec![0.4932, 0.5068], vec![0.5044, 0.4956]],
            pi_star: stationary_distribution(&[vec![0.4932, 0.5068], vec![0.5044, 0.4956]])
                .unwrap(),
            m: vec![0.4, 0.41],
        };
        let js = serde_json::to_value(&model).unwrap();
        assert!(js.get("P").is_some());
        assert!(js.get("pi_star").is_some());
        let back: StateModel = serde_json::from_value(js).unwrap();
        back.validate().unwrap();
    }
}
